"""Parameter bundles, community-label sampling, and observation samplers.

Two observation models on n vertices share the same label mechanism: each
vertex independently joins community l in {1..M} with probability x_l*k/n
and stays unassigned (the star sentinel, stored as 0) with probability
1 - k/n. The Gaussian model observes a symmetric matrix Y = X + Z with
unit-variance noise and community mean lambda/x_l on within-community
pairs (diagonal included); the binary model observes symmetric Bernoulli
edges with success probability q + s/x_l within communities and q
elsewhere, diagonal fixed to zero.

PriorSpec describes an affine transform a*X + y of the community mean
matrix; it is the common currency of the moment and r-value engines.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np

from .numeric import Number, as_exact, is_exact

STAR = 0  # sentinel label: member of no community


def _validate_proportions(x, exact_ok: bool) -> None:
    if any((v <= 0) for v in x):
        raise ValueError("community proportions must be positive")
    total = sum(x)
    if exact_ok:
        if total != 1:
            raise ValueError(f"sum(x) = {total} != 1")
    elif abs(float(total) - 1.0) > 1e-9:
        raise ValueError(f"sum(x) = {total} != 1")


def _resolve_balance(balance, M: int, x) -> Number:
    floor = M * min(x)
    if balance is None:
        return min(as_exact(1), floor)
    balance = as_exact(balance)
    if not (0 < balance <= 1):
        raise ValueError(f"balance constant must lie in (0, 1], got {balance}")
    if balance > floor + (0 if is_exact(balance, floor) else 1e-12):
        raise ValueError(f"M*min(x) = {floor} < balance constant {balance}")
    return balance


@dataclass(frozen=True)
class GaussianParams:
    """Additive Gaussian model parameters (n, k, lambda, M, x)."""

    n: int
    k: Number
    lam: Number
    M: int
    x: Tuple[Number, ...]
    balance: Optional[Number] = None  # lower bound for M*min(x), in (0, 1]

    def __post_init__(self):
        object.__setattr__(self, "k", as_exact(self.k))
        object.__setattr__(self, "lam", as_exact(self.lam))
        object.__setattr__(self, "x", tuple(as_exact(v) for v in self.x))
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not (0 <= self.k <= self.n):
            raise ValueError(f"k must satisfy 0 <= k <= n, got k = {self.k}")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.M < 1 or len(self.x) != self.M:
            raise ValueError("x must list one proportion per community")
        _validate_proportions(self.x, is_exact(*self.x))
        object.__setattr__(self, "balance", _resolve_balance(self.balance, self.M, self.x))

    @property
    def is_exact(self) -> bool:
        return is_exact(self.k, self.lam, *self.x)


@dataclass(frozen=True)
class BinaryParams:
    """Binary observation model parameters (n, k, q, s, M, x, tau1)."""

    n: int
    k: Number
    q: Number
    s: Number
    M: int
    x: Tuple[Number, ...]
    tau1: Number = Fraction(99, 100)
    balance: Optional[Number] = None

    def __post_init__(self):
        object.__setattr__(self, "k", as_exact(self.k))
        object.__setattr__(self, "q", as_exact(self.q))
        object.__setattr__(self, "s", as_exact(self.s))
        object.__setattr__(self, "tau1", as_exact(self.tau1))
        object.__setattr__(self, "x", tuple(as_exact(v) for v in self.x))
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not (0 <= self.k <= self.n):
            raise ValueError(f"k must satisfy 0 <= k <= n, got k = {self.k}")
        if self.M < 1 or len(self.x) != self.M:
            raise ValueError("x must list one proportion per community")
        _validate_proportions(self.x, is_exact(*self.x))
        if self.q <= 0:
            raise ValueError("q must be positive")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if not self.tau1 < 1:
            raise ValueError(f"tau1 must be < 1, got {self.tau1}")
        cap = self.q + self.s / min(self.x)
        if cap > self.tau1:
            raise ValueError(f"q + s/min(x) = {cap} > tau1 = {self.tau1}")
        object.__setattr__(self, "balance", _resolve_balance(self.balance, self.M, self.x))

    @property
    def is_exact(self) -> bool:
        return is_exact(self.k, self.q, self.s, self.tau1, *self.x)


ModelParams = Union[GaussianParams, BinaryParams]


@dataclass(eq=False)
class LabelAssignment:
    """Community labels: sigma[i] in {0 (star), 1, ..., M}."""

    sigma: np.ndarray

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.int64)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]


@dataclass(eq=False)
class Sample:
    """One observed matrix plus the labels that generated it."""

    y: np.ndarray
    sigma: LabelAssignment
    kind: str  # "gaussian" | "binary"

    def __post_init__(self):
        if self.kind not in ("gaussian", "binary"):
            raise ValueError(f"unknown sample kind {self.kind!r}")


@dataclass(frozen=True)
class PriorSpec:
    """Affine-transformed community mean matrix: scale * X_base + shift.

    base carries the raw community mean description (entry lam/x_l on
    within-community pairs, 0 elsewhere); the shift is a uniform scalar.
    """

    base: GaussianParams
    scale: Number = Fraction(1)
    shift: Number = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "scale", as_exact(self.scale))
        object.__setattr__(self, "shift", as_exact(self.shift))
        if self.scale == 0:
            raise ValueError("scale must be nonzero")

    @classmethod
    def from_gaussian(cls, p: GaussianParams) -> "PriorSpec":
        return cls(base=p)

    @classmethod
    def binary_mean(cls, p: BinaryParams) -> "PriorSpec":
        """Mean matrix of the binary model: entry q + s/x_l, i.e. shift q on base lam = s."""
        base = GaussianParams(n=p.n, k=p.k, lam=p.s, M=p.M, x=p.x, balance=p.balance)
        return cls(base=base, scale=Fraction(1), shift=p.q)

    @classmethod
    def binary_shift_free(cls, p: BinaryParams) -> "PriorSpec":
        """Shift-free rational carrier for the binary model (lam_eff = s)."""
        base = GaussianParams(n=p.n, k=p.k, lam=p.s, M=p.M, x=p.x, balance=p.balance)
        return cls(base=base)

    @property
    def lam_eff(self) -> Number:
        return self.scale * self.base.lam

    @property
    def is_exact(self) -> bool:
        return self.base.is_exact and is_exact(self.scale, self.shift)

    def transformed(self, a: Number, y: Number) -> "PriorSpec":
        """Spec for a * (this prior) + y."""
        a = as_exact(a)
        y = as_exact(y)
        return PriorSpec(base=self.base, scale=a * self.scale, shift=a * self.shift + y)

    def entry_value(self, ci: int, cj: int) -> Number:
        """Exact entry value given endpoint labels (0 = star)."""
        if ci == cj and ci != STAR:
            return self.scale * self.base.lam / self.base.x[ci - 1] + self.shift
        return self.shift

    def value_table(self):
        """(M+1) x (M+1) table of entry_value over label pairs."""
        M = self.base.M
        return [[self.entry_value(a, b) for b in range(M + 1)] for a in range(M + 1)]

    def label_probabilities(self):
        """[P(star), P(1), ..., P(M)] as exact numbers."""
        p = self.base
        ratio = p.k / p.n
        return [1 - ratio] + [xl * ratio for xl in p.x]


def label_probs_float(p: ModelParams) -> np.ndarray:
    ratio = float(p.k) / p.n
    probs = np.array([1.0 - ratio] + [float(xl) * ratio for xl in p.x])
    # guard against tiny negative rounding in the star mass
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_labels(p: ModelParams, rng: np.random.Generator) -> LabelAssignment:
    """i.i.d. labels: P(sigma_i = l) = x_l*k/n, P(sigma_i = star) = 1 - k/n."""
    sigma = rng.choice(p.M + 1, size=p.n, p=label_probs_float(p))
    return LabelAssignment(sigma=sigma)


def mean_matrix(spec: PriorSpec, sigma: LabelAssignment) -> np.ndarray:
    """Entry (i,j) = scale * (lam/x_l) * 1{sigma_i = sigma_j = l} + shift."""
    lab = sigma.sigma
    p = spec.base
    within = np.zeros(p.M + 1)
    for l in range(1, p.M + 1):
        within[l] = float(spec.scale * p.lam / p.x[l - 1])
    same = (lab[:, None] == lab[None, :]) & (lab[:, None] != STAR)
    return np.where(same, within[lab][:, None], 0.0) + float(spec.shift)


def sample_gaussian(p: GaussianParams, rng: np.random.Generator) -> Sample:
    """Y = X + Z with Z i.i.d. standard normal on i <= j, symmetrized."""
    sigma = sample_labels(p, rng)
    x = mean_matrix(PriorSpec.from_gaussian(p), sigma)
    a = rng.standard_normal((p.n, p.n))
    z = np.triu(a) + np.triu(a, 1).T
    return Sample(y=x + z, sigma=sigma, kind="gaussian")


def sample_binary(p: BinaryParams, rng: np.random.Generator) -> Sample:
    """Symmetric 0/1 matrix, zero diagonal, P(Y_ij = 1) = q + s/x_l or q."""
    sigma = sample_labels(p, rng)
    prob = mean_matrix(PriorSpec.binary_mean(p), sigma)
    u = rng.random((p.n, p.n))
    upper = np.triu((u < prob).astype(np.int8), 1)
    return Sample(y=upper + upper.T, sigma=sigma, kind="binary")


def write_sample_csv(sample: Sample, path, params: ModelParams, seed) -> None:
    """Upper-triangle CSV export (i,j,value) with a parameter/seed header."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# kind={sample.kind} seed={seed}\n")
        fh.write(f"# params={params!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "value"])
        n = sample.y.shape[0]
        lo_offset = 1 if sample.kind == "binary" else 0
        for i in range(n):
            for j in range(i + lo_offset, n):
                v = sample.y[i, j]
                writer.writerow([i, j, int(v) if sample.kind == "binary" else repr(float(v))])
