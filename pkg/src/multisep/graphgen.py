"""Random basis networks and exact sampling of layers given a basis network.

Randomness comes from ``numpy.random.Generator`` backed by PCG64. A seed may
be an int or an existing Generator; the same seed and spec always give the
same network.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit

from .exceptions import CalibrationError, InvalidSpecError
from .model import InteractionIndex, check_theta, dyad_pmf
from .network import BasisNetwork, MultilayerNetwork, n_pairs, pair_nodes


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _check_prob(name, value):
    if not 0.0 < value < 1.0:
        raise InvalidSpecError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True)
class BernoulliFixed:
    prob: float
    family = "bernoulli"

    def __post_init__(self):
        _check_prob("prob", self.prob)

    def edge_prob(self, n_nodes):
        _check_prob("prob", self.prob)
        return self.prob


@dataclass(frozen=True)
class BernoulliSparse:
    """Edge probability ``mean_degree / n_nodes``."""

    mean_degree: float
    family = "sparse"

    def __post_init__(self):
        if not self.mean_degree > 0:
            raise InvalidSpecError(f"mean_degree must be positive, got {self.mean_degree}")

    def edge_prob(self, n_nodes):
        prob = self.mean_degree / n_nodes
        _check_prob("mean_degree / n_nodes", prob)
        return prob


@dataclass(frozen=True)
class Sbm:
    """Stochastic block model; node ``i`` sits in block ``i % n_blocks``."""

    n_blocks: int
    p_in: float
    p_out: float
    family = "sbm"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_blocks < 1:
            raise InvalidSpecError("n_blocks must be positive")
        _check_prob("p_in", self.p_in)
        _check_prob("p_out", self.p_out)

    def blocks(self, n_nodes):
        return np.arange(n_nodes) % self.n_blocks

    def expected_density(self, n_nodes) -> float:
        self.validate()
        sizes = np.bincount(self.blocks(n_nodes), minlength=self.n_blocks)
        within = float(np.sum(sizes * (sizes - 1) / 2))
        total = n_pairs(n_nodes)
        return (within * self.p_in + (total - within) * self.p_out) / total


@dataclass(frozen=True)
class Lsm:
    """Latent space model with link ``expit(alpha - ||z_i - z_j||)``.

    ``alpha`` is calibrated from ``density`` when not given.
    """

    density: float
    latent_dim: int = 2
    alpha: float | None = None
    mc_reps: int = 200_000
    family = "lsm"

    def __post_init__(self):
        self.validate()

    def validate(self):
        _check_prob("density", self.density)
        if self.latent_dim < 1:
            raise InvalidSpecError("latent_dim must be positive")

    def calibrated(self, seed=0) -> "Lsm":
        if self.alpha is not None:
            return self
        alpha = calibrate_lsm_alpha(self.density, self.latent_dim, seed, self.mc_reps)
        return Lsm(self.density, self.latent_dim, alpha, self.mc_reps)


BasisSpec = BernoulliFixed | BernoulliSparse | Sbm | Lsm

_FAMILIES = {"bernoulli": BernoulliFixed, "sparse": BernoulliSparse, "sbm": Sbm, "lsm": Lsm}


def spec_from_dict(d: dict) -> BasisSpec:
    """Parse ``{"family": "sbm", "n_blocks": 5, ...}`` into a spec."""
    d = dict(d)
    family = d.pop("family", None)
    if family not in _FAMILIES:
        raise InvalidSpecError(f"unknown basis family {family!r}; expected one of {sorted(_FAMILIES)}")
    try:
        spec = _FAMILIES[family](**d)
    except TypeError as exc:
        raise InvalidSpecError(f"bad parameters for {family}: {exc}") from None
    return spec


def spec_to_dict(spec: BasisSpec) -> dict:
    return {"family": spec.family, **asdict(spec)}


def sample_basis(spec: BasisSpec, n_nodes: int, seed=None):
    """Draw a basis network.

    Returns
    -------
    Y : BasisNetwork
    meta : dict
        ``edge_prob`` for Bernoulli families, ``blocks`` for the SBM,
        ``positions`` and ``alpha`` for the LSM.
    """
    if n_nodes < 3:
        raise InvalidSpecError("n_nodes must be at least 3")
    rng = make_rng(seed)
    m = n_pairs(n_nodes)
    meta = {}
    if isinstance(spec, (BernoulliFixed, BernoulliSparse)):
        prob = spec.edge_prob(n_nodes)
        edges = rng.random(m) < prob
        meta["edge_prob"] = prob
    elif isinstance(spec, Sbm):
        spec.validate()
        blocks = spec.blocks(n_nodes)
        iu, ju = pair_nodes(n_nodes)
        probs = np.where(blocks[iu] == blocks[ju], spec.p_in, spec.p_out)
        edges = rng.random(m) < probs
        meta["blocks"] = blocks
    elif isinstance(spec, Lsm):
        spec.validate()
        if spec.alpha is None:
            raise InvalidSpecError("Lsm.alpha must be calibrated before sampling (see Lsm.calibrated)")
        z = rng.standard_normal((n_nodes, spec.latent_dim))
        iu, ju = pair_nodes(n_nodes)
        dist = np.linalg.norm(z[iu] - z[ju], axis=1)
        edges = rng.random(m) < expit(spec.alpha - dist)
        meta["positions"] = z
        meta["alpha"] = spec.alpha
    else:
        raise InvalidSpecError(f"unsupported basis spec {spec!r}")
    return BasisNetwork(n_nodes, edges), meta


def bisect_alpha(distances, density_target, bracket=(-20.0, 20.0), tol=1e-12, max_iter=200):
    """Solve ``mean(expit(alpha - distances)) = density_target`` by bisection."""
    distances = np.asarray(distances, dtype=float)
    lo, hi = bracket

    def excess(a):
        return float(np.mean(expit(a - distances))) - density_target

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo > 0 or f_hi < 0:
        raise CalibrationError(
            f"density {density_target} unreachable for alpha in [{lo}, {hi}] "
            f"(attainable range [{f_lo + density_target:.6g}, {f_hi + density_target:.6g}])")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def calibrate_lsm_alpha(density_target, latent_dim=2, seed=0, mc_reps=200_000,
                        bracket=(-20.0, 20.0)) -> float:
    """Monte-Carlo calibration of the LSM intercept to an expected density.

    Distances between two independent standard-normal positions do not depend
    on the network size, so ``mc_reps`` position pairs are drawn once and the
    intercept is found by bisection on their mean link probability.
    """
    if not 0.0 < density_target < 1.0:
        raise InvalidSpecError("density_target must lie in (0, 1)")
    rng = make_rng(seed)
    z = rng.standard_normal((2, mc_reps, latent_dim))
    dist = np.linalg.norm(z[0] - z[1], axis=1)
    return bisect_alpha(dist, density_target, bracket)


def sample_dyad_codes(theta, index: InteractionIndex, size: int, seed=None) -> np.ndarray:
    """Draw ``size`` nonzero dyad codes from the dyad law by inverse CDF."""
    rng = make_rng(seed)
    cdf = np.cumsum(dyad_pmf(theta, index).probs)
    u = rng.random(size) * cdf[-1]
    return (np.searchsorted(cdf, u, side="right") + 1).astype(np.uint32)


def sample_multilayer(Y: BasisNetwork, theta, index: InteractionIndex, seed=None) -> MultilayerNetwork:
    """Exact draw of the layers given the basis network; concordant with ``Y``."""
    theta = check_theta(theta, index)
    codes = np.zeros(Y.edges.shape, dtype=np.uint32)
    active = np.flatnonzero(Y.edges)
    codes[active] = sample_dyad_codes(theta, index, active.size, seed)
    return MultilayerNetwork(Y.n_nodes, index.n_layers, codes)


__all__ = [
    "BernoulliFixed", "BernoulliSparse", "Sbm", "Lsm", "BasisSpec", "make_rng",
    "spec_from_dict", "spec_to_dict", "sample_basis", "bisect_alpha",
    "calibrate_lsm_alpha", "sample_dyad_codes", "sample_multilayer",
]
