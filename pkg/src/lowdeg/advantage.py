"""Degree-D advantage upper bounds and an exact tiny-instance oracle.

The advantage Adv_{<=D}(P, Q) = sup over degree-D polynomials f of
E_P[f] / sqrt(E_Q[f^2]) measures how much better than random guessing a
low-degree test can do; it equals 1 exactly when no degree-D information
separates the models. Two general bounds are evaluated exactly at finite
(n, D) by summing class contributions:

  Gaussian:  Adv^2 <= 1 + sum over classes g (1 <= d <= D) of
                       copies(g, n) * r_g^2 / alpha!(g)
  Binary:    Adv^2 <= 1 + sum over simple loop-free classes of
                       copies(g, n) * r_g^2 / (q(1-tau1))^d

where copies(g, n) is the exact labelled-copy count. When P and Q share
(lambda, k, n) every forest class has r = 0 and the sums restrict to
classes whose components all contain cycles. The binary sum runs in the
shift-free rational parameterization (lam_eff = s), so all partial sums
stay rational; the square root is taken in floats at the end.

The oracle computes Adv_{<=D} exactly on tiny instances as
sqrt(c^T G^+ c) over the monomial basis in the observed entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from typing import Dict, Optional, Tuple

import numpy as np

from .graphs import (ClassCatalog, MultigraphClass, SizeLimitError, alpha_factorial,
                     enumerate_classes, labeled_copy_count)
from .models import BinaryParams, GaussianParams, PriorSpec, STAR
from .numeric import Number
from .rvalues import RTable, r_value

ORACLE_MAX_N = 6
ORACLE_MAX_D = 3


@dataclass(frozen=True)
class AdvQuery:
    """One advantage evaluation: a (P, Q) pair, a degree cap and a mode."""

    p_params: object
    q_params: object
    D: int
    mode: str  # "gaussian" | "binary"

    def __post_init__(self):
        if self.mode not in ("gaussian", "binary"):
            raise ValueError(f"unknown mode {self.mode!r}")
        want = GaussianParams if self.mode == "gaussian" else BinaryParams
        if not isinstance(self.p_params, want) or not isinstance(self.q_params, want):
            raise ValueError(f"mode {self.mode} requires {want.__name__} on both sides")
        if self.p_params.n != self.q_params.n:
            raise ValueError("P and Q must share n")
        if self.D < 0:
            raise ValueError("D must be nonnegative")

    @property
    def n(self) -> int:
        return self.p_params.n


@dataclass
class AdvantageReport:
    mode: str
    D: int
    n: int
    total_bound: float
    total_bound_sq: Number
    contributions: Dict[Tuple[int, int], Number]
    m_hat: int
    m_tilde: int
    balance: Number
    series_bound: float
    oracle_value: Optional[float] = None

    def to_jsonable(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        return {
            "mode": self.mode,
            "D": self.D,
            "n": self.n,
            "total_bound": self.total_bound,
            "total_bound_sq": num(self.total_bound_sq),
            "contributions": {f"{d},{v}": num(c) for (d, v), c in sorted(self.contributions.items())},
            "derived_constants": {"M_hat": self.m_hat, "M_tilde": self.m_tilde,
                                  "C": num(self.balance)},
            "series_bound": "inf" if math.isinf(self.series_bound) else self.series_bound,
            "oracle_value": self.oracle_value,
        }


def series_bound(D: int, m_hat: int, lam_eff: float, c_balance: float,
                 k: float, n: int) -> float:
    """Closed-form geometric-series upper bound for the squared Gaussian sum:

        1 + D * sum_{d=1}^{D} ((2 D^2 M_hat lam_eff / C)^2 (k^2/n v 1))^d

    Returns +inf when the series ratio reaches 1. Used for comparison curves.
    """
    if D == 0:
        return 1.0
    ratio = (2.0 * D * D * m_hat * lam_eff / c_balance) ** 2 * max(k * k / n, 1.0)
    if ratio >= 1.0:
        return math.inf
    return 1.0 + D * sum(ratio ** d for d in range(1, D + 1))


def _resolve_catalog(catalog: Optional[ClassCatalog], D: int, allow_loops: bool,
                     require_cyclic: bool) -> ClassCatalog:
    if catalog is None:
        return enumerate_classes(D, allow_loops=allow_loops,
                                 require_cyclic_components=require_cyclic)
    if catalog.d_max < D:
        raise ValueError(f"catalog covers d <= {catalog.d_max}, need {D}")
    if allow_loops and not catalog.allow_loops:
        raise ValueError("catalog excludes loops but loops are required")
    if require_cyclic and not catalog.require_cyclic_components:
        # fine: we filter below
        pass
    if catalog.require_cyclic_components and not require_cyclic:
        raise ValueError("catalog is cyclic-only but the full class list is required")
    return catalog


def adv_bound_gaussian(qy: AdvQuery, catalog: Optional[ClassCatalog] = None) -> AdvantageReport:
    """Evaluate the Gaussian advantage bound exactly at finite (n, D)."""
    if qy.mode != "gaussian":
        raise ValueError("adv_bound_gaussian requires a gaussian-mode query")
    p, q = qy.p_params, qy.q_params
    table = RTable(PriorSpec.from_gaussian(p), PriorSpec.from_gaussian(q))
    cat = _resolve_catalog(catalog, qy.D, allow_loops=True, require_cyclic=table.trees_vanish)

    contributions: Dict[Tuple[int, int], Number] = {}
    total_sq: Number = Fraction(1) if table.exact else 1.0
    for g in cat.classes:
        if g.d > qy.D:
            continue
        if table.trees_vanish and not g.all_components_cyclic:
            continue
        cnt = labeled_copy_count(g, qy.n)
        if cnt == 0:
            continue
        r = r_value(g, table)
        term = cnt * r * r / alpha_factorial(g)
        contributions[(g.d, g.v)] = contributions.get((g.d, g.v), 0) + term
        total_sq += term

    c_bal = min(p.balance, q.balance)
    return AdvantageReport(
        mode="gaussian", D=qy.D, n=qy.n,
        total_bound=math.sqrt(float(total_sq)), total_bound_sq=total_sq,
        contributions=contributions,
        m_hat=max(p.M, q.M), m_tilde=abs(p.M - q.M), balance=c_bal,
        series_bound=series_bound(qy.D, max(p.M, q.M), float(max(p.lam, q.lam)),
                                  float(c_bal), float(p.k), qy.n))


def adv_bound_binary(qy: AdvQuery, catalog: Optional[ClassCatalog] = None) -> AdvantageReport:
    """Evaluate the binary advantage bound exactly at finite (n, D).

    Only simple loop-free classes contribute (entries are 0/1 with no
    diagonal); denominators are (q(1-tau1))^d per degree-d class.
    """
    if qy.mode != "binary":
        raise ValueError("adv_bound_binary requires a binary-mode query")
    p, q = qy.p_params, qy.q_params
    for name in ("q", "s", "tau1", "k"):
        if getattr(p, name) != getattr(q, name):
            raise ValueError(f"P and Q must share {name} in binary mode")
    table = RTable(PriorSpec.binary_shift_free(p), PriorSpec.binary_shift_free(q))
    cat = _resolve_catalog(catalog, qy.D, allow_loops=False, require_cyclic=True)
    denom_base = p.q * (1 - p.tau1)

    contributions: Dict[Tuple[int, int], Number] = {}
    total_sq: Number = Fraction(1) if table.exact else 1.0
    for g in cat.classes:
        if g.d > qy.D or not g.is_simple_loop_free or not g.all_components_cyclic:
            continue
        cnt = labeled_copy_count(g, qy.n)
        if cnt == 0:
            continue
        r = r_value(g, table)
        term = cnt * r * r / denom_base ** g.d
        contributions[(g.d, g.v)] = contributions.get((g.d, g.v), 0) + term
        total_sq += term

    c_bal = min(p.balance, q.balance)
    lam_eff = float(p.s) / math.sqrt(float(denom_base))
    return AdvantageReport(
        mode="binary", D=qy.D, n=qy.n,
        total_bound=math.sqrt(float(total_sq)), total_bound_sq=total_sq,
        contributions=contributions,
        m_hat=max(p.M, q.M), m_tilde=abs(p.M - q.M), balance=c_bal,
        series_bound=series_bound(qy.D, max(p.M, q.M), lam_eff, float(c_bal),
                                  float(p.k), qy.n))


def adv_bound(qy: AdvQuery, catalog: Optional[ClassCatalog] = None) -> AdvantageReport:
    if qy.mode == "gaussian":
        return adv_bound_gaussian(qy, catalog)
    return adv_bound_binary(qy, catalog)


# ---------------------------------------------------------------------------
# Exact tiny-instance oracle: Adv = sqrt(c^T G^+ c) over the monomial basis.

def _label_configs(params) -> Tuple[list, np.ndarray]:
    """All (M+1)^n label assignments and their probabilities."""
    probs = [float(1 - params.k / params.n)] + \
            [float(xl * params.k / params.n) for xl in params.x]
    configs = list(product(range(params.M + 1), repeat=params.n))
    w = np.array([math.prod(probs[c] for c in cfg) for cfg in configs])
    return configs, w


def _entry_means(params, configs, entries, mode: str) -> np.ndarray:
    """Conditional entry means X_e(sigma): (n_configs, n_entries)."""
    out = np.zeros((len(configs), len(entries)))
    if mode == "gaussian":
        within = [float(params.lam / xl) for xl in params.x]
        base = 0.0
    else:
        within = [float(params.q + params.s / xl) for xl in params.x]
        base = float(params.q)
    for ci, cfg in enumerate(configs):
        for ei, (i, j) in enumerate(entries):
            if cfg[i] == cfg[j] and cfg[i] != STAR:
                out[ci, ei] = within[cfg[i] - 1]
            else:
                out[ci, ei] = base
    return out


def _normal_raw_moments(mu: np.ndarray, max_deg: int) -> list:
    """Raw moments of N(mu, 1) up to max_deg, elementwise over mu."""
    moments = [np.ones_like(mu), mu.copy()]
    for d in range(2, max_deg + 1):
        moments.append(mu * moments[d - 1] + (d - 1) * moments[d - 2])
    return moments[:max_deg + 1]


class _SideTables:
    """Weighted conditional moment tables for one distribution."""

    def __init__(self, params, entries, mode: str, max_deg: int):
        configs, self.w = _label_configs(params)
        mu = _entry_means(params, configs, entries, mode)
        if mode == "gaussian":
            self.mom = _normal_raw_moments(mu, max_deg)
        else:
            # E[Y^d | X] = X for d >= 1 (entries are 0/1)
            self.mom = [np.ones_like(mu)] + [mu] * max_deg
        self.cache: Dict[tuple, float] = {}

    def moment(self, gamma: tuple) -> float:
        """E[Y^gamma]; gamma is a sorted tuple of entry indices with repetition."""
        hit = self.cache.get(gamma)
        if hit is not None:
            return hit
        val = self.w.copy()
        idx = 0
        while idx < len(gamma):
            e = gamma[idx]
            deg = 1
            while idx + deg < len(gamma) and gamma[idx + deg] == e:
                deg += 1
            val *= self.mom[deg][:, e]
            idx += deg
        out = float(val.sum())
        self.cache[gamma] = out
        return out


def exact_adv_oracle(qy: AdvQuery) -> float:
    """Exact Adv_{<=D}(P, Q) on a tiny instance (n <= 6, D <= 3).

    Gaussian mode uses the full monomial basis over all n(n+1)/2 entries
    (diagonal included) with conditional normal raw moments averaged over
    all label assignments; binary mode uses multilinear monomials over the
    n(n-1)/2 off-diagonal entries (Y_e^2 = Y_e). The Gram pseudo-inverse
    drops singular values below 1e-10 of the largest.
    """
    n, D = qy.n, qy.D
    if n > ORACLE_MAX_N or D > ORACLE_MAX_D:
        raise SizeLimitError(f"oracle requires n <= {ORACLE_MAX_N} and D <= {ORACLE_MAX_D}")

    if qy.mode == "gaussian":
        entries = [(i, j) for i in range(n) for j in range(i, n)]
        monomials = [tuple()]
        for deg in range(1, D + 1):
            monomials += list(combinations_with_replacement(range(len(entries)), deg))
        merge = None  # multiset union via sorted concatenation
    else:
        entries = [(i, j) for i in range(n) for j in range(i + 1, n)]
        monomials = [tuple()]
        for deg in range(1, D + 1):
            monomials += list(combinations(range(len(entries)), deg))
        merge = "set"

    p_side = _SideTables(qy.p_params, entries, qy.mode, max_deg=D)
    q_side = _SideTables(qy.q_params, entries, qy.mode, max_deg=2 * D)

    nm = len(monomials)
    c = np.array([p_side.moment(mon) for mon in monomials])
    gram = np.empty((nm, nm))
    for a in range(nm):
        ma = monomials[a]
        for b in range(a, nm):
            if merge == "set":
                gamma = tuple(sorted(set(ma) | set(monomials[b])))
            else:
                gamma = tuple(sorted(ma + monomials[b]))
            gram[a, b] = gram[b, a] = q_side.moment(gamma)

    pinv = np.linalg.pinv(gram, rcond=1e-10, hermitian=True)
    adv_sq = float(c @ pinv @ c)
    return math.sqrt(max(adv_sq, 0.0))
