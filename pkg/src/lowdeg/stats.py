"""Easy-regime test statistics and Monte Carlo separation experiments.

Two statistics: the degree-1 diagonal sum for the Gaussian model (analytic
mean M*k*lambda, variance at most n + sum_l k*lambda^2/x_l) and the degree-3
signed triangle count for the binary model, R_hat = sum_{i<j<k} R_ij R_ik
R_jk with R_ij = Y_ij - q, computed as trace(R^3)/6 (valid because R has
zero diagonal). run_experiment draws fresh replicates from both models,
thresholds at the midpoint of the analytic means, and reports empirical
moments, the separation ratio and the misclassification rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from .models import (BinaryParams, GaussianParams, Sample, sample_binary,
                     sample_gaussian)
from .numeric import Number, derive_rng, derive_seed


def diag_sum(sample: Sample) -> float:
    """Sum of the diagonal entries; rejects binary samples (zero diagonal)."""
    if sample.kind != "gaussian":
        raise ValueError("diag_sum requires a gaussian sample")
    return float(np.trace(sample.y))


def diag_moments(p: GaussianParams) -> Tuple[Number, Number]:
    """(mean, variance bound) of the diagonal sum: M*k*lam and n + sum_l k*lam^2/x_l."""
    mean = p.M * p.k * p.lam
    var_bound = p.n + p.k * p.lam ** 2 * sum(1 / xl for xl in p.x)
    return mean, var_bound


def signed_triangles(sample: Sample, q: Union[float, Number]) -> float:
    """Signed triangle count of a binary sample via trace(R^3)/6."""
    if sample.kind != "binary":
        raise ValueError("signed_triangles requires a binary sample")
    r = sample.y.astype(np.float64) - float(q)
    np.fill_diagonal(r, 0.0)
    return float(np.trace(r @ r @ r)) / 6.0


def signed_triangles_exact(y: np.ndarray, q: Number) -> Number:
    """trace(R^3)/6 in exact rational arithmetic (for identity checks)."""
    n = y.shape[0]
    r = [[(Fraction(int(y[i, j])) - q if i != j else Fraction(0)) for j in range(n)]
         for i in range(n)]
    total = 0
    for i in range(n):
        for j in range(n):
            rij = r[i][j]
            if rij == 0:
                continue
            for k in range(n):
                total += rij * r[j][k] * r[k][i]
    return total / 6


def signed_triangles_naive(y: np.ndarray, q: Number) -> Number:
    """Triple-loop sum over i < j < k in exact rational arithmetic."""
    n = y.shape[0]
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            rij = Fraction(int(y[i, j])) - q
            for k in range(j + 1, n):
                total += rij * (Fraction(int(y[i, k])) - q) * (Fraction(int(y[j, k])) - q)
    return total


def tri_moments(p: BinaryParams) -> Tuple[Number, Number]:
    """(exact mean, variance bound) of the signed triangle count.

    mean = C(n,3) * M * k^3 s^3 / n^3; the variance bound collects the
    overlap terms (one shared vertex, one shared edge, identical triples)
    with M*min(x) >= C folded in through 1/C factors.
    """
    mean = math.comb(p.n, 3) * p.M * p.k ** 3 * p.s ** 3 / Fraction(p.n) ** 3
    c = p.balance
    var_bound = (p.M ** 2 * p.k ** 5 * p.s ** 6 / c
                 + p.M * p.k ** 4 * p.s ** 4 * p.q
                 + p.M ** 2 * p.k ** 4 * p.s ** 5 / c
                 + Fraction(p.n) ** 3 * p.q ** 3 / 3
                 + p.n * p.k ** 2 * p.s * p.q ** 2
                 + p.k ** 3 * p.q ** 2 * p.s
                 + p.k ** 3 * p.q * p.s ** 2
                 + p.M * p.k ** 3 * p.s ** 3 / 3)
    return mean, var_bound


@dataclass
class TestStatReport:
    statistic: str
    analytic_mean_p: float
    analytic_mean_q: float
    analytic_var_bound_p: float
    analytic_var_bound_q: float
    empirical_mean_p: float
    empirical_mean_q: float
    empirical_var_p: float
    empirical_var_q: float
    reps: int
    separation_ratio: float
    error_rate: float
    threshold: float
    values_p: List[float] = field(default_factory=list, repr=False)
    values_q: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError("reps must be at least 2")

    def to_jsonable(self) -> dict:
        return {
            "statistic": self.statistic,
            "analytic": {"mean_p": self.analytic_mean_p, "mean_q": self.analytic_mean_q,
                         "var_bound_p": self.analytic_var_bound_p,
                         "var_bound_q": self.analytic_var_bound_q},
            "empirical": {"mean_p": self.empirical_mean_p, "mean_q": self.empirical_mean_q,
                          "var_p": self.empirical_var_p, "var_q": self.empirical_var_q,
                          "reps": self.reps},
            "separation_ratio": self.separation_ratio,
            "error_rate": self.error_rate,
            "threshold": self.threshold,
        }


STATISTICS = ("diag_sum", "signed_triangles")


def _one_value(statistic: str, params, rng) -> float:
    if statistic == "diag_sum":
        return diag_sum(sample_gaussian(params, rng))
    return signed_triangles(sample_binary(params, rng), params.q)


def run_experiment(p_params, q_params, statistic: str, reps: int,
                   rng: Union[int, np.random.Generator], keep_values: bool = True) -> TestStatReport:
    """Monte Carlo separation experiment with a midpoint-threshold test.

    Draws `reps` fresh samples from each model, evaluates the statistic,
    and classifies each value against the midpoint of the analytic means.
    Replicates use per-rep derived seeds, so the report is deterministic
    for a fixed master seed.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    if reps < 50:
        raise ValueError("run_experiment requires reps >= 50")
    if statistic == "diag_sum":
        if not isinstance(p_params, GaussianParams) or not isinstance(q_params, GaussianParams):
            raise ValueError("diag_sum runs on gaussian models")
        amp, avp = diag_moments(p_params)
        amq, avq = diag_moments(q_params)
    else:
        if not isinstance(p_params, BinaryParams) or not isinstance(q_params, BinaryParams):
            raise ValueError("signed_triangles runs on binary models")
        if p_params.q != q_params.q:
            raise ValueError("P and Q must share q for the signed triangle statistic")
        amp, avp = tri_moments(p_params)
        amq, avq = tri_moments(q_params)

    root = int(rng) if isinstance(rng, (int, np.integer)) else int(rng.integers(2 ** 62))
    values_p = np.array([_one_value(statistic, p_params, derive_rng(root, "P", i))
                         for i in range(reps)])
    values_q = np.array([_one_value(statistic, q_params, derive_rng(root, "Q", i))
                         for i in range(reps)])

    threshold = float(amp + amq) / 2.0
    if amp == amq:
        errors = reps  # no analytic gap: classify everything as Q
    elif amp < amq:
        errors = int((values_p >= threshold).sum() + (values_q < threshold).sum())
    else:
        errors = int((values_p <= threshold).sum() + (values_q > threshold).sum())

    var_p = float(values_p.var(ddof=1))
    var_q = float(values_q.var(ddof=1))
    gap = abs(float(values_p.mean() - values_q.mean()))
    max_sd = math.sqrt(max(var_p, var_q))
    return TestStatReport(
        statistic=statistic,
        analytic_mean_p=float(amp), analytic_mean_q=float(amq),
        analytic_var_bound_p=float(avp), analytic_var_bound_q=float(avq),
        empirical_mean_p=float(values_p.mean()), empirical_mean_q=float(values_q.mean()),
        empirical_var_p=var_p, empirical_var_q=var_q,
        reps=reps,
        separation_ratio=gap / max_sd if max_sd > 0 else math.inf,
        error_rate=errors / (2.0 * reps),
        threshold=threshold,
        values_p=values_p.tolist() if keep_values else [],
        values_q=values_q.tolist() if keep_values else [])
