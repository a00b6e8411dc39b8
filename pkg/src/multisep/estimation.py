"""Maximum likelihood and maximum pseudolikelihood estimation.

Both objectives are concave in ``theta`` and depend on the data only through
the histogram of dyad outcomes, so a damped Newton method on that histogram
is cheap regardless of network size.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import DegenerateModelError, EstimationError, NonexistenceError, SingularHessianError
from .model import (InteractionIndex, _counts, check_theta, expected_dyad_stats, info_dyad, loglik_terms,
                    network_suff_stats, pseudo_info_dyad, pseudo_score_covariance, pseudolik_terms)
from .network import BasisNetwork, MultilayerNetwork, derive_basis

OBJECTIVES = ("mle", "mple")


@dataclass(frozen=True)
class FitOptions:
    objective: str = "mple"
    max_iters: int = 100
    grad_tol: float = 1e-8
    step_halving_max: int = 30
    divergence_cap: float = 50.0
    init: np.ndarray | None = None
    eig_floor: float = 1e-10

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.grad_tol <= 0 or self.divergence_cap <= 0:
            raise ValueError("grad_tol and divergence_cap must be positive")
        if self.max_iters < 1 or self.step_halving_max < 0:
            raise ValueError("max_iters must be >= 1 and step_halving_max >= 0")


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit`.

    ``info_matrix`` is ``||Y||_1 I(theta_hat)`` for the MLE and
    ``||Y||_1 Itilde(theta_hat)`` for the MPLE. ``covariance`` is its inverse
    for the MLE and the sandwich ``A^-1 B A^-1`` for the MPLE, where ``B`` is
    the model covariance of the pseudo-score; ``std_err`` is the square root
    of its diagonal. ``info_std_err`` keeps the plain inverse-information
    values, which understate MPLE variability.
    """

    theta_hat: np.ndarray
    std_err: np.ndarray
    info_matrix: np.ndarray
    converged: bool
    iters: int
    final_grad_norm: float
    objective_value: float
    objective: str
    index: InteractionIndex = field(repr=False)
    n_activated: int = 0
    covariance: np.ndarray | None = field(default=None, repr=False)
    info_std_err: np.ndarray | None = None


def _safe_inverse(mat):
    w, v = np.linalg.eigh(0.5 * (mat + mat.T))
    scale = max(float(np.max(np.abs(w))), 1.0)
    inv_w = np.where(w > 1e-12 * scale, 1.0 / np.where(w > 0, w, 1.0), np.inf)
    if np.all(np.isfinite(inv_w)):
        return (v * inv_w) @ v.T
    out = np.full_like(mat, np.nan)
    np.fill_diagonal(out, np.inf)
    return out


def _newton_direction(grad, neg_hess, flat_tol):
    """Newton step, or ``None`` plus the flattest direction when curvature vanishes.

    The objective is flat along an eigenvector whose eigenvalue is at most
    ``flat_tol``; there the maximizer is at infinity (or not unique).
    """
    if not np.all(np.isfinite(neg_hess)):
        raise SingularHessianError("Hessian has non-finite entries")
    try:
        step = cho_solve(cho_factor(neg_hess), grad)
    except LinAlgError:
        step = None
    w, v = np.linalg.eigh(0.5 * (neg_hess + neg_hess.T))
    if step is None or w[0] <= flat_tol:
        return None, v[:, 0]
    return step, None


STEP_TOL = 1e-6


def _is_stationary(grad, step, theta, options):
    return (np.max(np.abs(grad)) <= options.grad_tol
            and np.max(np.abs(step)) <= STEP_TOL * (1.0 + np.max(np.abs(theta))))


def _terms_fn(objective):
    return loglik_terms if objective == "mle" else pseudolik_terms


def fit_counts(counts, index: InteractionIndex, options: FitOptions = FitOptions()) -> FitResult:
    """Fit from a dyad-outcome histogram of length ``2 ** n_layers``.

    Converged means the gradient max-norm is at most ``options.grad_tol`` and
    the Newton step is at most ``1e-6 (1 + ||theta||_inf)`` in max-norm.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (1 << index.n_layers,):
        raise ValueError("counts must have length 2 ** n_layers")
    n_act = int(counts[1:].sum())
    if n_act < 1:
        raise EstimationError("no activated dyads: ||Y||_1 must be at least 1")
    if index.n_layers == 1:
        raise DegenerateModelError(
            "a single layer gives a constant sufficient statistic on activated dyads; "
            "the information matrix is zero and theta is not identifiable")
    if index.max_order == index.n_layers:
        raise DegenerateModelError(
            f"max_order={index.max_order} equals n_layers: on activated dyads the alternating sum of "
            "all subset statistics is identically 1, so the information matrix is singular and theta "
            "is not identifiable; use max_order < n_layers")
    terms = _terms_fn(options.objective)
    theta = np.zeros(index.p) if options.init is None else check_theta(options.init, index).copy()

    value, grad, hess = terms(theta, counts, index)
    converged = False
    it = 0
    flat_tol = options.eig_floor * n_act
    for it in range(1, options.max_iters + 1):
        step, flat = _newton_direction(grad, -hess, flat_tol)
        if step is None:
            raise NonexistenceError(_flat_message(theta, flat, index, options))
        # a small gradient alone is not enough: near a face of the convex hull
        # gradient and curvature vanish together while the Newton step stays O(1)
        if _is_stationary(grad, step, theta, options):
            converged = True
            it -= 1
            break
        slack = 1e-12 * (1.0 + abs(value))
        t = 1.0
        for _ in range(options.step_halving_max + 1):
            cand = theta + t * step
            cand_value = terms(cand, counts, index, 0)[0]
            if np.isfinite(cand_value) and cand_value >= value - slack:
                break
            t *= 0.5
        else:
            # no ascent possible at floating-point resolution
            break
        theta = cand
        if np.linalg.norm(theta) > options.divergence_cap:
            raise NonexistenceError(_divergence_message(theta, index, options))
        value, grad, hess = terms(theta, counts, index)
    else:
        it = options.max_iters
    grad_norm = float(np.max(np.abs(grad)))
    if not converged:
        step, flat = _newton_direction(grad, -hess, flat_tol)
        if step is None:
            raise NonexistenceError(_flat_message(theta, flat, index, options))
        converged = _is_stationary(grad, step, theta, options)

    if options.objective == "mle":
        info = n_act * info_dyad(theta, index)
        cov = _safe_inverse(info)
    else:
        info = n_act * pseudo_info_dyad(theta, index)
        bread = _safe_inverse(info)
        cov = bread @ (n_act * pseudo_score_covariance(theta, index)) @ bread
    info_se = np.sqrt(np.diag(_safe_inverse(info)))
    std_err = np.sqrt(np.clip(np.diag(cov), 0, None))
    return FitResult(theta_hat=theta, std_err=std_err, info_matrix=info, converged=converged,
                     iters=it, final_grad_norm=grad_norm, objective_value=value,
                     objective=options.objective, index=index, n_activated=n_act,
                     covariance=cov, info_std_err=info_se)


def _flat_message(theta, direction, index, options):
    worst = int(np.argmax(np.abs(direction)))
    return (f"{options.objective.upper()} does not exist: the curvature vanished at ||theta||_2 = "
            f"{np.linalg.norm(theta):.3g} (flat direction dominated by statistic {index.labels()[worst]}; "
            "the observed sufficient statistics lie on the boundary of their convex hull)")


def _divergence_message(theta, index, options):
    worst = int(np.argmax(np.abs(theta)))
    return (f"{options.objective.upper()} does not exist: ||theta||_2 exceeded "
            f"{options.divergence_cap} (statistic {index.labels()[worst]} drifting to "
            f"{'+' if theta[worst] > 0 else '-'}infinity; the observed sufficient statistics "
            "lie on the boundary of their convex hull)")


def fit(X: MultilayerNetwork, Y: BasisNetwork | None, index: InteractionIndex,
        options: FitOptions = FitOptions()) -> FitResult:
    """Maximize the log-likelihood or log-pseudolikelihood of ``X`` given ``Y``.

    Parameters
    ----------
    X : MultilayerNetwork
    Y : BasisNetwork or None
        Derived from ``X`` when omitted; must be concordant with ``X`` otherwise.
    index : InteractionIndex
    options : FitOptions

    Raises
    ------
    NonexistenceError
        The iterates leave the ball of radius ``options.divergence_cap``, or
        the curvature vanishes along some direction (smallest eigenvalue of
        the negative Hessian at most ``options.eig_floor * ||Y||_1``).
    SingularHessianError
        The Hessian has non-finite entries.
    DegenerateModelError
        One-layer networks and saturated indices (``max_order == n_layers``),
        whose information matrix is singular.
    """
    if Y is None:
        Y = derive_basis(X)
    counts = _counts(X, Y, index)
    return fit_counts(counts, index, options)


def moment_check(result: FitResult, X: MultilayerNetwork, Y: BasisNetwork | None = None,
                 index: InteractionIndex | None = None, theta=None) -> np.ndarray:
    """Residual ``s(x) - ||Y||_1 E_theta[s]`` at the fitted (or a given) parameter."""
    index = result.index if index is None else index
    if Y is None:
        Y = derive_basis(X)
    theta = result.theta_hat if theta is None else np.asarray(theta, dtype=float)
    return network_suff_stats(X, index) - Y.n_edges * expected_dyad_stats(theta, index)


__all__ = ["FitOptions", "FitResult", "fit", "fit_counts", "moment_check", "OBJECTIVES"]
