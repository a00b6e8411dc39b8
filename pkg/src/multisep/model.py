"""Probability structure of the network-separable multilayer model.

Given the basis network, activated dyads are independent and each carries a
nonzero outcome ``x`` in ``{0,1}^K`` with probability proportional to
``exp(<theta, s(x)>)``, where ``s(x)`` holds the products of layer indicators
over the subsets in an :class:`InteractionIndex`. Everything the objectives
need from the data is therefore the histogram of dyad outcomes, which is what
the functions below work with internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np
from scipy.special import expit, logsumexp

from .exceptions import ConcordanceError, InvalidOrderError, InvalidParameterError
from .network import MAX_LAYERS, BasisNetwork, MultilayerNetwork, derive_basis, encode_dyad


@dataclass(frozen=True)
class InteractionIndex:
    """Ordered layer subsets that define sufficient statistics and parameters.

    Subsets are 1-based tuples, singletons first, then by size, lexicographic
    within a size.
    """

    n_layers: int
    max_order: int
    subsets: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def p(self) -> int:
        return len(self.subsets)

    @cached_property
    def masks(self) -> np.ndarray:
        return np.array([sum(1 << (k - 1) for k in s) for s in self.subsets], dtype=np.int64)

    @cached_property
    def stat_table(self) -> np.ndarray:
        """``S[c, t] = s_t(x)`` for every dyad code ``c``; shape (2^K, p)."""
        codes = np.arange(1 << self.n_layers, dtype=np.int64)[:, None]
        table = (codes & self.masks[None, :]) == self.masks[None, :]
        table = table.astype(float)
        table.flags.writeable = False
        return table

    @cached_property
    def _pseudo_design(self):
        # diff[c, k] = s(c with bit k on) - s(c with bit k off); logit of layer k
        # given the other layers is <theta, diff[c, k]>.
        K = self.n_layers
        codes = np.arange(1 << K, dtype=np.int64)
        S = self.stat_table
        bits = 1 << np.arange(K, dtype=np.int64)
        on = codes[:, None] | bits[None, :]
        off = codes[:, None] & ~bits[None, :]
        diff = S[on] - S[off]
        x_k = ((codes[:, None] & bits[None, :]) != 0).astype(float)
        # a layer whose partners are all absent is forced on: its term is 0
        free = (off != 0) & (codes[:, None] != 0)
        return diff, x_k, free.astype(float)

    def labels(self, names=None) -> list[str]:
        if names is None:
            return ["theta_" + ",".join(str(k) for k in s) for s in self.subsets]
        return [" x ".join(names[k - 1] for k in s) for s in self.subsets]


def build_interaction_index(n_layers: int, max_order: int) -> InteractionIndex:
    if not 1 <= n_layers <= MAX_LAYERS:
        raise InvalidOrderError(f"n_layers must lie in [1, {MAX_LAYERS}], got {n_layers}")
    if not 1 <= max_order <= n_layers:
        raise InvalidOrderError(
            f"max_order must lie in [1, n_layers={n_layers}], got {max_order}")
    subsets = tuple(
        c for h in range(1, max_order + 1)
        for c in combinations(range(1, n_layers + 1), h))
    return InteractionIndex(n_layers, max_order, subsets)


def check_theta(theta, index: InteractionIndex) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (index.p,):
        raise InvalidParameterError(f"theta must have length p={index.p}, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise InvalidParameterError("theta must be finite")
    return theta


def _as_code(x, index: InteractionIndex) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    if len(x) != index.n_layers:
        raise ValueError(f"dyad outcome must have {index.n_layers} entries")
    return encode_dyad(x)


def dyad_suff_stats(x, index: InteractionIndex) -> np.ndarray:
    """Dyad-level statistic: entry ``t`` is the product of ``x`` over ``subsets[t]``."""
    return index.stat_table[_as_code(x, index)].astype(np.int64)


def network_suff_stats(X: MultilayerNetwork, index: InteractionIndex) -> np.ndarray:
    if X.n_layers != index.n_layers:
        raise ValueError("network and index disagree on the number of layers")
    return (X.outcome_counts() @ index.stat_table).round().astype(np.int64)


@dataclass(frozen=True)
class DyadPmf:
    """Law of an activated dyad.

    ``probs[c - 1]`` is the probability of dyad code ``c`` (``c >= 1``);
    ``log_normalizer`` is ``log sum_{x != 0} exp<theta, s(x)>``.
    """

    probs: np.ndarray
    log_normalizer: float

    def table(self) -> np.ndarray:
        """Probabilities indexed by dyad code, including 0 for the empty outcome."""
        return np.concatenate([[0.0], self.probs])

    def prob(self, x, index: InteractionIndex) -> float:
        c = _as_code(x, index)
        return 0.0 if c == 0 else float(self.probs[c - 1])


def _log_weights(theta, index):
    return index.stat_table[1:] @ theta


def dyad_pmf(theta, index: InteractionIndex) -> DyadPmf:
    theta = check_theta(theta, index)
    logw = _log_weights(theta, index)
    lz = float(logsumexp(logw))
    probs = np.exp(logw - lz)
    probs.flags.writeable = False
    return DyadPmf(probs, lz)


def log_odds(theta, index: InteractionIndex, k: int, x_minus_k) -> float:
    """Conditional log-odds of layer ``k`` (1-based) on an activated dyad.

    ``x_minus_k`` gives the other layers' bits, either as a length ``K - 1``
    sequence in layer order or as a ``{layer: bit}`` mapping (missing layers
    are 0). Returns ``inf`` when every other layer is empty.
    """
    theta = check_theta(theta, index)
    K = index.n_layers
    if not 1 <= k <= K:
        raise ValueError(f"layer must lie in [1, {K}]")
    others = [l for l in range(1, K + 1) if l != k]
    if isinstance(x_minus_k, dict):
        bits = {l: int(x_minus_k.get(l, 0)) for l in others}
    else:
        if len(x_minus_k) != K - 1:
            raise ValueError(f"x_minus_k must have {K - 1} entries")
        bits = dict(zip(others, (int(b) for b in x_minus_k)))
    if not any(bits.values()):
        return math.inf
    total = 0.0
    for t, s in enumerate(index.subsets):
        if k in s and all(bits[l] for l in s if l != k):
            total += theta[t]
    return float(total)


def _counts(X: MultilayerNetwork, Y: BasisNetwork | None, index: InteractionIndex) -> np.ndarray:
    if X.n_layers != index.n_layers:
        raise ValueError("network and index disagree on the number of layers")
    if Y is not None:
        if Y.n_nodes != X.n_nodes or not np.array_equal(X.codes != 0, Y.edges):
            raise ConcordanceError("(X, Y) is not network concordant")
    return X.outcome_counts()


# -- objectives on outcome histograms -----------------------------------------

def loglik_terms(theta, counts, index, order=2):
    """Log-likelihood (and derivatives up to ``order``) from outcome counts."""
    S = index.stat_table
    n_act = counts[1:].sum()
    logw = S[1:] @ theta
    lz = logsumexp(logw)
    s_obs = counts @ S
    value = float(s_obs @ theta - n_act * lz)
    if order == 0:
        return value, None, None
    probs = np.exp(logw - lz)
    mean = probs @ S[1:]
    grad = s_obs - n_act * mean
    if order == 1:
        return value, grad, None
    cov = (S[1:] * probs[:, None]).T @ S[1:] - np.outer(mean, mean)
    return value, grad, -n_act * cov


def pseudolik_terms(theta, counts, index, order=2):
    """Log-pseudolikelihood (and derivatives up to ``order``) from outcome counts."""
    diff, x_k, free = index._pseudo_design
    eta = diff @ theta                      # (2^K, K)
    w = counts[:, None] * free
    value = float(np.sum(w * (x_k * eta - np.logaddexp(0.0, eta))))
    if order == 0:
        return value, None, None
    mu = expit(eta)
    grad = np.einsum("ck,ckt->t", w * (x_k - mu), diff)
    if order == 1:
        return value, grad, None
    hess = -np.einsum("ck,cks,ckt->st", w * mu * (1.0 - mu), diff, diff)
    return value, grad, hess


def _objective(theta, X, Y, index, fn, order):
    theta = check_theta(theta, index)
    return fn(theta, _counts(X, Y, index), index, order)


def loglik(theta, X, Y, index) -> float:
    """Conditional log-likelihood ``log P(X = x | Y = y)`` (``log g(y)`` omitted)."""
    return _objective(theta, X, Y, index, loglik_terms, 0)[0]


def loglik_gradient(theta, X, Y, index) -> np.ndarray:
    return _objective(theta, X, Y, index, loglik_terms, 1)[1]


def loglik_hessian(theta, X, Y, index) -> np.ndarray:
    return _objective(theta, X, Y, index, loglik_terms, 2)[2]


def log_pseudolik(theta, X, Y, index) -> float:
    """Sum over activated dyads and layers of conditional Bernoulli log-probabilities."""
    return _objective(theta, X, Y, index, pseudolik_terms, 0)[0]


def log_pseudolik_gradient(theta, X, Y, index) -> np.ndarray:
    return _objective(theta, X, Y, index, pseudolik_terms, 1)[1]


def log_pseudolik_hessian(theta, X, Y, index) -> np.ndarray:
    return _objective(theta, X, Y, index, pseudolik_terms, 2)[2]


# -- per-dyad information matrices ---------------------------------------------

def info_dyad(theta, index: InteractionIndex) -> np.ndarray:
    """Fisher information of one activated dyad: covariance of ``s`` under the dyad law."""
    pmf = dyad_pmf(theta, index)
    S = index.stat_table[1:]
    mean = pmf.probs @ S
    info = (S * pmf.probs[:, None]).T @ S - np.outer(mean, mean)
    return 0.5 * (info + info.T)


def pseudo_info_dyad(theta, index: InteractionIndex) -> np.ndarray:
    """Expected negative Hessian of one activated dyad's pseudolikelihood term."""
    theta = check_theta(theta, index)
    table = dyad_pmf(theta, index).table()
    diff, _, free = index._pseudo_design
    mu = expit(diff @ theta)
    w = table[:, None] * free * mu * (1.0 - mu)
    info = np.einsum("ck,cks,ckt->st", w, diff, diff)
    return 0.5 * (info + info.T)


def pseudo_score_covariance(theta, index: InteractionIndex) -> np.ndarray:
    """Covariance of one activated dyad's pseudolikelihood score under the model."""
    theta = check_theta(theta, index)
    table = dyad_pmf(theta, index).table()
    diff, x_k, free = index._pseudo_design
    mu = expit(diff @ theta)
    score = np.einsum("ck,ckt->ct", free * (x_k - mu), diff)
    mean = table @ score
    return (score * table[:, None]).T @ score - np.outer(mean, mean)


def expected_dyad_stats(theta, index: InteractionIndex) -> np.ndarray:
    pmf = dyad_pmf(theta, index)
    return pmf.probs @ index.stat_table[1:]


__all__ = [
    "InteractionIndex", "DyadPmf", "build_interaction_index", "check_theta",
    "dyad_suff_stats", "network_suff_stats", "derive_basis", "dyad_pmf", "log_odds",
    "loglik", "loglik_gradient", "loglik_hessian",
    "log_pseudolik", "log_pseudolik_gradient", "log_pseudolik_hessian",
    "info_dyad", "pseudo_info_dyad", "pseudo_score_covariance", "expected_dyad_stats",
]
