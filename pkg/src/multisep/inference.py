"""Wald and Hotelling tests, multiple-testing corrections, FDR/power, ROC,
and normality diagnostics for replicated estimates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import ndtr, ndtri

from .exceptions import RankError

METHODS = ("bonferroni", "holm", "hochberg", "bh")
_ALIASES = {"benjamini-hochberg": "bh", "fdr_bh": "bh", "bonf": "bonferroni"}


def _method(name):
    key = name.lower()
    key = _ALIASES.get(key, key)
    if key not in METHODS:
        raise ValueError(f"unknown method {name!r}; expected one of {METHODS}")
    return key


def two_sided_pvalue(z):
    """``2 (1 - Phi(|z|))``, computed on the upper tail for accuracy."""
    return 2.0 * ndtr(-np.abs(np.asarray(z, dtype=float)))


def adjust(p_raw, method: str) -> np.ndarray:
    """Adjusted p-values for Bonferroni, Holm, Hochberg or Benjamini-Hochberg.

    Step-down (Holm) and step-up (Hochberg, BH) adjustments are made monotone
    in the ordered raw p-values and clipped to ``[0, 1]``.
    """
    method = _method(method)
    p = np.asarray(p_raw, dtype=float)
    if p.ndim != 1:
        raise ValueError("p_raw must be one-dimensional")
    if np.any((p < 0) | (p > 1) | ~np.isfinite(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    if m == 0:
        return p.copy()
    if method == "bonferroni":
        return np.minimum(1.0, m * p)
    order = np.argsort(p, kind="stable")
    ps = p[order]
    rank = np.arange(1, m + 1)
    if method == "holm":
        adj = np.maximum.accumulate((m - rank + 1) * ps)
    elif method == "hochberg":
        adj = np.minimum.accumulate(((m - rank + 1) * ps)[::-1])[::-1]
    else:
        adj = np.minimum.accumulate((m / rank * ps)[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(1.0, adj)
    return out


@dataclass(frozen=True)
class TestReport:
    z_scores: np.ndarray
    p_values_raw: np.ndarray
    p_values_adjusted: dict
    decisions: np.ndarray
    method: str
    alpha: float

    def decisions_for(self, method: str) -> np.ndarray:
        return self.p_values_adjusted[_method(method)] <= self.alpha


def z_tests(theta_hat, std_err, mu=None, alpha=0.05, method="bh") -> TestReport:
    theta_hat = np.asarray(theta_hat, dtype=float)
    std_err = np.asarray(std_err, dtype=float)
    if np.any(~np.isfinite(std_err)) or np.any(std_err <= 0):
        raise RankError("standard errors must be finite and positive (singular information?)")
    mu = np.zeros_like(theta_hat) if mu is None else np.asarray(mu, dtype=float)
    z = (theta_hat - mu) / std_err
    raw = two_sided_pvalue(z)
    adjusted = {m: adjust(raw, m) for m in METHODS}
    method = _method(method)
    return TestReport(z, raw, adjusted, adjusted[method] <= alpha, method, alpha)


def wald_tests(fit, mu=None, alpha=0.05, method="bh") -> TestReport:
    """Componentwise tests of ``theta_i = mu_i`` from a fitted model."""
    return z_tests(fit.theta_hat, fit.std_err, mu, alpha, method)


@dataclass(frozen=True)
class HotellingResult:
    statistic: float
    f_statistic: float
    df: tuple
    p_value: float


def hotelling_global(estimates, mu=None) -> HotellingResult:
    """One-sample Hotelling T^2 test of ``E[theta_hat] = mu`` over replicates.

    ``estimates`` is an ``(M, p)`` matrix; requires ``M > p``.
    """
    A = np.asarray(estimates, dtype=float)
    if A.ndim != 2:
        raise ValueError("estimates must be an (M, p) matrix")
    M, p = A.shape
    if M <= p:
        raise RankError(f"Hotelling test needs more replicates than parameters (M={M}, p={p})")
    mu = np.zeros(p) if mu is None else np.asarray(mu, dtype=float)
    diff = A.mean(axis=0) - mu
    S = np.cov(A, rowvar=False)
    if np.linalg.matrix_rank(S) < p:
        raise RankError("sample covariance is rank deficient")
    t2 = float(M * diff @ np.linalg.solve(S, diff))
    f = t2 * (M - p) / ((M - 1) * p)
    return HotellingResult(t2, f, (p, M - p), float(stats.f.sf(f, p, M - p)))


def fdr_power(decisions, truth_support):
    """Empirical FDR and power over replicates.

    Parameters
    ----------
    decisions : bool array, shape (M, p)
        Rejections per replicate.
    truth_support : bool array, shape (p,) or (M, p)
        True where the parameter is nonzero.

    Returns
    -------
    fdr, power : float
        FDR averages ``false / max(1, discoveries)``; power averages the
        fraction of nonzero parameters discovered (``nan`` if there are none).
    """
    D = np.atleast_2d(np.asarray(decisions, dtype=bool))
    T = np.broadcast_to(np.asarray(truth_support, dtype=bool), D.shape)
    false = np.sum(D & ~T, axis=1)
    disc = np.sum(D, axis=1)
    fdr = float(np.mean(false / np.maximum(1, disc)))
    n_true = np.sum(T, axis=1)
    has = n_true > 0
    power = float(np.mean(np.sum(D & T, axis=1)[has] / n_true[has])) if has.any() else float("nan")
    return fdr, power


def roc_points(z_scores, truth_support, thresholds=None) -> np.ndarray:
    """(FPR, TPR) pairs for the rule ``|z| > t`` over a threshold grid.

    Endpoints ``(0, 0)`` and ``(1, 1)`` are always included; rows are sorted
    by FPR then TPR. The default grid is every distinct ``|z|`` plus 0.
    """
    Z = np.abs(np.atleast_2d(np.asarray(z_scores, dtype=float)))
    T = np.broadcast_to(np.asarray(truth_support, dtype=bool), Z.shape)
    if thresholds is None:
        thresholds = np.unique(np.concatenate([[0.0], Z.ravel()]))
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))
    if thresholds.size == 0:
        raise ValueError("threshold grid must be nonempty")
    n_pos, n_neg = T.sum(), (~T).sum()
    pos, neg = Z[T], Z[~T]
    pts = [(0.0, 0.0), (1.0, 1.0)]
    for t in thresholds:
        fpr = float(np.sum(neg > t) / n_neg) if n_neg else 0.0
        tpr = float(np.sum(pos > t) / n_pos) if n_pos else 0.0
        pts.append((fpr, tpr))
    pts = np.array(pts)
    return pts[np.lexsort((pts[:, 1], pts[:, 0]))]


def roc_auc(points) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.sum(np.diff(pts[:, 0]) * (pts[1:, 1] + pts[:-1, 1]) / 2.0))


def anderson_darling(x):
    """Anderson-Darling normality test with estimated mean and variance.

    Returns the statistic and the D'Agostino-Stephens p-value approximation
    for the small-sample-corrected statistic.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if n < 8:
        raise ValueError("need at least 8 observations")
    sd = x.std(ddof=1)
    if sd == 0:
        raise RankError("constant sample")
    w = (x - x.mean()) / sd
    log_cdf = stats.norm.logcdf(w)
    log_sf = stats.norm.logsf(w)
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (log_cdf + log_sf[::-1])) / n
    a = a2 * (1 + 0.75 / n + 2.25 / n ** 2)
    if a >= 0.6:
        p = np.exp(1.2937 - 5.709 * a + 0.0186 * a ** 2)
    elif a >= 0.34:
        p = np.exp(0.9177 - 4.279 * a - 1.38 * a ** 2)
    elif a >= 0.2:
        p = 1 - np.exp(-8.318 + 42.796 * a - 59.938 * a ** 2)
    else:
        p = 1 - np.exp(-13.436 + 101.14 * a - 223.73 * a ** 2)
    return float(a2), float(np.clip(p, 0.0, 1.0))


def mardia(x):
    """Mardia's multivariate skewness and kurtosis tests.

    Returns ``(b1, p_skew, b2, p_kurt)``; the skewness statistic ``M b1 / 6``
    is referred to chi-square with ``p(p+1)(p+2)/6`` degrees of freedom and
    the kurtosis to a standard normal (two-sided).
    """
    X = np.asarray(x, dtype=float)
    M, p = X.shape
    C = X - X.mean(axis=0)
    S = C.T @ C / M
    if np.linalg.matrix_rank(S) < p:
        raise RankError("sample covariance is rank deficient")
    G = C @ np.linalg.solve(S, C.T)
    b1 = float(np.sum(G ** 3) / M ** 2)
    b2 = float(np.mean(np.diag(G) ** 2))
    df = p * (p + 1) * (p + 2) / 6
    p_skew = float(stats.chi2.sf(M * b1 / 6, df))
    z = (b2 - p * (p + 2)) / np.sqrt(8 * p * (p + 2) / M)
    return b1, p_skew, b2, float(two_sided_pvalue(z))


def _sqrtm_psd(A):
    w, v = np.linalg.eigh(0.5 * (A + A.T))
    if np.any(w <= 0):
        raise RankError("standardizer must be positive definite")
    return (v * np.sqrt(w)) @ v.T


@dataclass(frozen=True)
class NormalityReport:
    standardized: np.ndarray = field(repr=False)
    mardia_skewness: float
    mardia_skew_pvalue: float
    mardia_kurtosis: float
    mardia_kurt_pvalue: float
    ad_statistics: np.ndarray
    ad_pvalues: np.ndarray
    qq: list = field(repr=False)

    def n_ad_pass(self, alpha=0.05) -> int:
        return int(np.sum(self.ad_pvalues > alpha))


def qq_pairs(sample) -> tuple[np.ndarray, np.ndarray]:
    """Normal quantiles at Hazen plotting positions against the sorted sample."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    return ndtri((np.arange(1, n + 1) - 0.5) / n), s


def normality_diagnostics(estimates, standardizer=None, center=None) -> NormalityReport:
    """Normality checks for an ``(M, p)`` matrix of replicated estimates.

    With ``standardizer`` (e.g. ``||Y||_1 I(theta*)``) rows become
    ``standardizer^{1/2} (theta_hat - center)``, ``center`` defaulting to the
    replicate mean; without it each column is centred and scaled by its
    sample standard deviation.
    """
    A = np.asarray(estimates, dtype=float)
    if A.ndim != 2:
        raise ValueError("estimates must be an (M, p) matrix")
    M, p = A.shape
    if M < 20:
        raise ValueError(f"need at least 20 replicates, got {M}")
    c = A.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    if standardizer is None:
        sd = A.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise RankError("a component is constant across replicates")
        Z = (A - c) / sd
    else:
        Z = (A - c) @ _sqrtm_psd(np.asarray(standardizer, dtype=float))
    b1, p1, b2, p2 = mardia(Z)
    ad = np.array([anderson_darling(Z[:, j]) for j in range(p)])
    return NormalityReport(Z, b1, p1, b2, p2, ad[:, 0], ad[:, 1],
                           [qq_pairs(Z[:, j]) for j in range(p)])


__all__ = [
    "METHODS", "TestReport", "HotellingResult", "NormalityReport", "adjust", "two_sided_pvalue",
    "z_tests", "wald_tests", "hotelling_global", "fdr_power", "roc_points", "roc_auc",
    "anderson_darling", "mardia", "qq_pairs", "normality_diagnostics",
]
