"""Non-asymptotic error and normal-approximation bounds.

All logarithms are natural. Bounds are reported as computed, with a
``vacuous`` flag when they carry no information (an error radius no smaller
than ``epsilon_star``, a probability bound of at least 1, or a negative
probability floor).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .graphgen import BernoulliFixed, BernoulliSparse, Lsm, Sbm, make_rng
from .model import InteractionIndex, check_theta, info_dyad, pseudo_info_dyad
from .network import n_pairs


@dataclass(frozen=True)
class TheoryInputs:
    n_nodes: int
    p: int
    n_layers: int
    expected_edges: float
    xi: float
    dg_plus: float = 0.0
    epsilon_star: float | None = None

    def __post_init__(self):
        if self.n_nodes < 3:
            raise ValueError("n_nodes must be at least 3")
        if self.p < 1 or self.n_layers < 1:
            raise ValueError("p and n_layers must be positive")
        if self.expected_edges < 1:
            raise ValueError("expected number of activated dyads must be at least 1")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.dg_plus < 0:
            raise ValueError("dg_plus is a positive part and cannot be negative")


@dataclass(frozen=True)
class BoundReport:
    value: float
    components: dict
    vacuous: bool
    flags: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DgEstimate:
    """Sum of pairwise basis-edge covariances and its positive part."""

    value: float
    positive_part: float
    std_error: float
    exact: bool


def basis_covariance_sum(spec, n_nodes: int, mc_reps: int = 10_000, seed=0) -> DgEstimate:
    """``D_g``, the sum over ordered pairs of dyads of ``Cov(Y_ij, Y_vw)``.

    Edge-independent families (Bernoulli, fixed-block SBM) give exactly 0.
    Under the LSM, dyads without a shared node are independent; dyads sharing
    one node have a common covariance ``c``, so
    ``D_g = n_nodes * C(n_nodes - 1, 2) * c`` with ``c`` estimated by Monte
    Carlo over ``mc_reps`` triples of positions.
    """
    if isinstance(spec, (BernoulliFixed, BernoulliSparse, Sbm)):
        return DgEstimate(0.0, 0.0, 0.0, True)
    if not isinstance(spec, Lsm):
        raise TypeError(f"unsupported spec {spec!r}")
    if spec.alpha is None:
        spec = spec.calibrated(seed)
    rng = make_rng(seed)
    z = rng.standard_normal((3, mc_reps, spec.latent_dim))
    a = expit(spec.alpha - np.linalg.norm(z[0] - z[1], axis=1))
    b = expit(spec.alpha - np.linalg.norm(z[0] - z[2], axis=1))
    # a and b are exchangeable, so both share the mean estimate
    ab = a * b
    m = mc_reps
    mean_a = (a.sum() + b.sum()) / (2 * m)
    cov = ab.mean() - mean_a ** 2
    n_cherries = n_nodes * (n_nodes - 1) * (n_nodes - 2) / 2
    # delta-method standard error of ab - mean_a^2
    infl = ab - mean_a * (a + b)
    se = float(infl.std(ddof=1) / math.sqrt(m))
    value = n_cherries * cov
    return DgEstimate(float(value), max(0.0, float(value)), n_cherries * se, False)


def _unit_ball(rng, n, dim):
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(n) ** (1.0 / dim)
    return g * r[:, None]


def min_information_eigenvalue(theta_star, epsilon_star: float, index: InteractionIndex,
                               n_ball_samples: int = 200, seed=0, pseudo: bool = False,
                               pool_radius: float | None = None) -> float:
    """Sampled minimum of ``lambda_min(I(theta))`` over the ball ``B(theta*, epsilon_star)``.

    The infimum is approximated by the minimum over ``theta*`` and a seeded
    pool of ``n_ball_samples`` points drawn uniformly in the ball of radius
    ``pool_radius`` (default ``epsilon_star``), restricted to distance
    ``epsilon_star``. With a fixed ``pool_radius`` the candidate sets are
    nested, so the result is non-increasing in ``epsilon_star``. The value is
    an upper estimate of the true infimum.
    """
    theta_star = check_theta(theta_star, index)
    if epsilon_star <= 0:
        raise ValueError("epsilon_star must be positive")
    if index.max_order == index.n_layers:
        warnings.warn("saturated or one-layer index: the information matrix is singular", RuntimeWarning)
        return 0.0
    info = pseudo_info_dyad if pseudo else info_dyad
    radius = epsilon_star if pool_radius is None else pool_radius
    pool = radius * _unit_ball(make_rng(seed), n_ball_samples, index.p)
    pool = pool[np.linalg.norm(pool, axis=1) <= epsilon_star]
    best = np.linalg.eigvalsh(info(theta_star, index))[0]
    for d in pool:
        best = min(best, np.linalg.eigvalsh(info(theta_star + d, index))[0])
    return float(max(best, 0.0))


def consistency_bound(inputs: TheoryInputs, which: str = "mle") -> BoundReport:
    """Error radius ``sqrt(3 p [K^2] log N / E||Y||_1) sqrt(1 + D_g+) / xi``."""
    which = which.lower()
    if which not in ("mle", "mple"):
        raise ValueError("which must be 'mle' or 'mple'")
    k2 = inputs.n_layers ** 2 if which == "mple" else 1
    rate = math.sqrt(3 * inputs.p * k2 * math.log(inputs.n_nodes) / inputs.expected_edges)
    dep = math.sqrt(1 + inputs.dg_plus)
    value = rate * dep / inputs.xi
    vacuous = inputs.epsilon_star is not None and value >= inputs.epsilon_star
    flags = {"p_le_n": inputs.p <= inputs.n_nodes,
             "probability_floor": 1 - 3 / inputs.expected_edges}
    return BoundReport(value, {"rate": rate, "dependence": dep, "inv_xi": 1 / inputs.xi}, vacuous, flags)


def normal_approx_bound(inputs: TheoryInputs) -> BoundReport:
    """Normal-approximation error over convex sets; three additive terms."""
    E, D, xi, p = inputs.expected_edges, inputs.dg_plus, inputs.xi, inputs.p
    t1 = 83 / xi ** 1.5 * math.sqrt(p ** 3.5 / E)
    t2 = 4 / E
    t3 = 8 * D / E ** 2
    value = t1 + t2 + t3
    return BoundReport(value, {"lyapunov": t1, "edge_count": t2, "dependence": t3}, value >= 1)


def remainder_bound(inputs: TheoryInputs) -> BoundReport:
    """Bound on ``||R~||_2`` and the probability with which it holds."""
    E, D, xi, p, N = inputs.expected_edges, inputs.dg_plus, inputs.xi, inputs.p, inputs.n_nodes
    value = 3 * math.sqrt(2) * (1 + D) / xi ** 2 * p ** 2.5 * math.log(N) / math.sqrt(E)
    raw_floor = 1 - 7 / E - 8 * D / E ** 2
    return BoundReport(value, {"radius": value, "probability_floor_raw": raw_floor},
                       raw_floor <= 0, {"probability_floor": max(0.0, raw_floor)})


def bernoulli_normal_approx_bound(pi: float, inputs: TheoryInputs) -> dict:
    """Bernoulli-basis specialization (``D_g+ = 0``) of the normal-approximation bounds.

    ``pi`` is the basis edge probability. Returns the approximation bound,
    the remainder bound, and the saturated-model growth check
    ``K <= 0.5 log N``.
    """
    if not 0 < pi < 1:
        raise ValueError("pi must lie in (0, 1)")
    N, p, xi, K = inputs.n_nodes, inputs.p, inputs.xi, inputs.n_layers
    t1 = 166 / math.sqrt(pi * xi ** 3) * p ** 1.75 / N
    t2 = 16 / (pi * N ** 2)
    approx = BoundReport(t1 + t2, {"lyapunov": t1, "edge_count": t2}, t1 + t2 >= 1)
    radius = 6 * math.sqrt(2) / xi ** 2 * p ** 2.5 * math.log(N) / (pi * N)
    raw_floor = 1 - 28 / (pi * N ** 2)
    rem = BoundReport(radius, {"radius": radius, "probability_floor_raw": raw_floor},
                      raw_floor <= 0, {"probability_floor": max(0.0, raw_floor)})
    return {"approximation": approx, "remainder": rem,
            "expected_edges": pi * n_pairs(N),
            "saturated_growth_ok": K <= 0.5 * math.log(N),
            "growth_limit": 0.5 * math.log(N)}


__all__ = ["TheoryInputs", "BoundReport", "DgEstimate", "basis_covariance_sum",
           "min_information_eigenvalue", "consistency_bound", "normal_approx_bound",
           "remainder_bound", "bernoulli_normal_approx_bound"]
