"""Within-subjects (repeated measures) ANOVA and LSD pairwise comparison.

The decomposition for an n-subjects x a-systems complete matrix is
SS_total = SS_A + SS_Sub + SS_SxA with F = MS_A / MS_SxA.  The LSD threshold
at level alpha is t(1 - alpha/2, df_error) * sqrt(2 * MS_error / n); the
Student t quantile is computed numerically from the regularized incomplete
beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateAnovaError(ValueError):
    """Raised when the error sum of squares is zero and F is undefined."""


@dataclass(frozen=True)
class TrialMatrix:
    """measurements[subject][system]; complete within-subjects design."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("trial matrix must be 2-D (subjects x systems)")
        if v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError("need at least 2 subjects and 2 systems")
        if not np.isfinite(v).all():
            raise ValueError("trial matrix has missing or non-finite cells")
        object.__setattr__(self, "values", v)

    @property
    def n_subjects(self) -> int:
        return self.values.shape[0]

    @property
    def n_systems(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AnovaResult:
    ss_a: float
    ss_sub: float
    ss_sxa: float
    ss_total: float
    df_a: int
    df_sub: int
    df_sxa: int
    ms_a: float
    ms_sxa: float
    f: float


def within_subjects_anova(m: TrialMatrix) -> AnovaResult:
    v = m.values
    n, a = v.shape
    grand = v.mean()
    col_means = v.mean(axis=0)
    row_means = v.mean(axis=1)
    ss_a = float(n * ((col_means - grand) ** 2).sum())
    ss_sub = float(a * ((row_means - grand) ** 2).sum())
    ss_total = float(((v - grand) ** 2).sum())
    ss_sxa = ss_total - ss_a - ss_sub
    df_a, df_sub, df_sxa = a - 1, n - 1, (a - 1) * (n - 1)
    if ss_sxa <= 0.0 or math.isclose(ss_sxa, 0.0, abs_tol=1e-15 * max(ss_total, 1.0)):
        raise DegenerateAnovaError("zero interaction sum of squares; F undefined")
    ms_a = ss_a / df_a
    ms_sxa = ss_sxa / df_sxa
    return AnovaResult(ss_a, ss_sub, ss_sxa, ss_total, df_a, df_sub, df_sxa, ms_a, ms_sxa, ms_a / ms_sxa)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 0.5
    ib = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return 1.0 - 0.5 * ib if t > 0 else 0.5 * ib


def student_t_quantile(p: float, df: float) -> float:
    """Inverse CDF by bisection; accurate to ~1e-12 in t."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    if p == 0.5:
        return 0.0
    lo, hi = -1.0, 1.0
    while student_t_cdf(lo, df) > p:
        lo *= 2.0
        if lo < -1e12:
            break
    while student_t_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def lsd_threshold(ms_error: float, n: int, df_error: int, alpha: float = 0.05) -> float:
    """Least-significant-difference threshold for paired system means."""
    if ms_error <= 0:
        return 0.0
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if df_error < 1:
        raise ValueError("df_error must be >= 1")
    t = student_t_quantile(1.0 - alpha / 2.0, df_error)
    return t * math.sqrt(2.0 * ms_error / n)


@dataclass(frozen=True)
class PairComparison:
    i: int
    j: int
    difference: float
    threshold: float
    significant: bool


def pairwise_lsd(m: TrialMatrix, alpha: float = 0.05) -> list[PairComparison]:
    result = within_subjects_anova(m)
    thr = lsd_threshold(result.ms_sxa, m.n_subjects, result.df_sxa, alpha)
    means = m.values.mean(axis=0)
    out = []
    for i in range(m.n_systems):
        for j in range(i + 1, m.n_systems):
            diff = abs(float(means[i] - means[j]))
            out.append(PairComparison(i, j, diff, thr, diff > thr))
    return out


def anova_table_text(result: AnovaResult, title: str) -> str:
    """Plain-text ANOVA table: SV, SS, df, MS, F columns."""
    rows = [
        ("A", result.ss_a, result.df_a, result.ms_a, result.f),
        ("Sub", result.ss_sub, result.df_sub, None, None),
        ("SxA", result.ss_sxa, result.df_sxa, result.ms_sxa, None),
        ("Total", result.ss_total, result.df_a + result.df_sub + result.df_sxa, None, None),
    ]
    lines = [title, f"{'SV':<8}{'SS':>10}{'df':>5}{'MS':>10}{'F':>9}"]
    for sv, ss, df, ms, f in rows:
        ms_s = f"{ms:10.4f}" if ms is not None else " " * 10
        f_s = f"{f:9.2f}" if f is not None else " " * 9
        lines.append(f"{sv:<8}{ss:10.4f}{df:5d}{ms_s}{f_s}")
    return "\n".join(lines)


def lsd_report_text(m: TrialMatrix, labels: list[str], alpha: float = 0.05) -> str:
    comparisons = pairwise_lsd(m, alpha)
    lines = [f"LSD pairwise comparison (alpha={alpha})"]
    means = m.values.mean(axis=0)
    for k, label in enumerate(labels):
        lines.append(f"  mean[{label}] = {means[k]:.4f}")
    for c in comparisons:
        mark = "SIGNIFICANT" if c.significant else "n.s."
        lines.append(
            f"  |{labels[c.i]} - {labels[c.j]}| = {c.difference:.4f} vs threshold {c.threshold:.4f} -> {mark}"
        )
    return "\n".join(lines)
