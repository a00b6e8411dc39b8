"""Scikit-learn style wrapper around the fitting routines."""
from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_random_state

from ._validation import as_basis, check_basis, check_multilayer
from .estimation import FitOptions, fit_counts
from .graphgen import sample_multilayer
from .inference import wald_tests
from .model import build_interaction_index, log_odds, loglik_terms, network_suff_stats, pseudolik_terms


class SeparableMultilayerModel(BaseEstimator):
    """Exponential-family model for the layers of a multilayer network given its basis network.

    Each activated dyad (a node pair with at least one edge in some layer)
    carries a nonzero layer pattern drawn independently with probability
    proportional to ``exp(<theta, s(x)>)``, where ``s`` holds the products of
    layer indicators over all layer subsets of size at most ``max_order``.

    Parameters
    ----------
    max_order : int, default=2
        Highest interaction order ``H``. It must be below the number of layers:
        the saturated model is not identifiable and fitting it raises
        ``DegenerateModelError``.
    objective : {"mple", "mle"}, default="mple"
    max_iter : int, default=100
    tol : float, default=1e-8
        Convergence threshold on the max-norm of the gradient (the Newton
        step must also be negligible).
    step_halving_max : int, default=30
    divergence_cap : float, default=50.0
        Fitting stops with ``NonexistenceError`` once ``||theta||_2`` exceeds this.

    Attributes
    ----------
    index_ : InteractionIndex
    theta_ : ndarray of shape (p,)
    std_err_ : ndarray of shape (p,)
    info_matrix_ : ndarray of shape (p, p)
    converged_ : bool
    n_iter_ : int
    n_activated_ : int
    fit_result_ : FitResult

    Examples
    --------
    >>> from multisep import SeparableMultilayerModel, BernoulliFixed, sample_basis, sample_multilayer
    >>> from multisep import build_interaction_index
    >>> idx = build_interaction_index(3, 2)
    >>> Y, _ = sample_basis(BernoulliFixed(0.5), 200, seed=1)
    >>> X = sample_multilayer(Y, [-1, -1, -1, 0.5, 0.5, 0.5], idx, seed=2)
    >>> SeparableMultilayerModel().fit(X).theta_.shape
    (6,)
    """

    def __init__(self, max_order=2, objective="mple", max_iter=100, tol=1e-8,
                 step_halving_max=30, divergence_cap=50.0):
        self.max_order = max_order
        self.objective = objective
        self.max_iter = max_iter
        self.tol = tol
        self.step_halving_max = step_halving_max
        self.divergence_cap = divergence_cap

    def _options(self):
        return FitOptions(objective=self.objective, max_iters=self.max_iter, grad_tol=self.tol,
                          step_halving_max=self.step_halving_max, divergence_cap=self.divergence_cap)

    def fit(self, X, y=None):
        """Fit to a multilayer network.

        ``y`` is the basis network (derived from ``X`` when omitted).
        """
        X = check_multilayer(X)
        Y = check_basis(y, X)
        self.index_ = build_interaction_index(X.n_layers, self.max_order)
        res = fit_counts(X.outcome_counts(), self.index_, self._options())
        self.fit_result_ = res
        self.theta_ = res.theta_hat
        self.std_err_ = res.std_err
        self.info_matrix_ = res.info_matrix
        self.converged_ = res.converged
        self.n_iter_ = res.iters
        self.n_activated_ = Y.n_edges
        return self

    def _check_layers(self, X):
        X = check_multilayer(X)
        if X.n_layers != self.index_.n_layers:
            raise ValueError(f"model was fitted on {self.index_.n_layers} layers, got {X.n_layers}")
        return X

    def transform(self, X):
        """Sufficient statistics, shape ``(1, p)``."""
        check_is_fitted(self)
        X = self._check_layers(X)
        return network_suff_stats(X, self.index_)[None, :].astype(float)

    def score(self, X, y=None):
        """Fitted objective per activated dyad on ``X`` (higher is better)."""
        check_is_fitted(self)
        X = self._check_layers(X)
        check_basis(y, X)
        counts = X.outcome_counts().astype(float)
        terms = loglik_terms if self.objective == "mle" else pseudolik_terms
        n = counts[1:].sum()
        if n == 0:
            raise ValueError("X has no activated dyads")
        return terms(self.theta_, counts, self.index_, 0)[0] / n

    def predict_proba(self, X):
        """Probability that each layer is present given the other layers.

        Returns an array of shape ``(n_pairs, K)`` in dyad order. Dyads outside
        the basis network get 0; a layer whose partners are all absent on an
        activated dyad is forced on and gets 1.
        """
        check_is_fitted(self)
        X = self._check_layers(X)
        diff, _, free = self.index_._pseudo_design
        table = np.where(free > 0, expit(diff @ self.theta_), 1.0)
        table[0] = 0.0
        return table[X.codes]

    def sample(self, y, random_state=None):
        """Draw layers on the basis network ``y`` from the fitted parameter."""
        check_is_fitted(self)
        rng = check_random_state(random_state)
        seed = np.random.Generator(np.random.PCG64(rng.randint(0, 2 ** 31 - 1)))
        return sample_multilayer(as_basis(y), self.theta_, self.index_, seed)

    def log_odds(self, layer, given):
        """Conditional log-odds of ``layer`` (1-based) given ``{other_layer: bit}``."""
        check_is_fitted(self)
        return log_odds(self.theta_, self.index_, layer, given)

    def wald_test(self, mu=None, alpha=0.05, method="bh"):
        """Componentwise Wald tests of ``theta = mu`` with multiplicity adjustment."""
        check_is_fitted(self)
        return wald_tests(self.fit_result_, mu, alpha, method)
