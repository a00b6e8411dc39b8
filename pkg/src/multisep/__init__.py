"""Separable exponential-family models for multilayer networks.

Layers are modelled conditionally on a basis network that marks which node
pairs carry any edge; each such dyad's layer pattern is an independent draw
from a log-linear law with interactions up to a chosen order.
"""
from .bounds import (BoundReport, DgEstimate, TheoryInputs, basis_covariance_sum, bernoulli_normal_approx_bound,
                     consistency_bound, min_information_eigenvalue, normal_approx_bound, remainder_bound)
from .estimation import FitOptions, FitResult, fit, fit_counts, moment_check
from .estimator import SeparableMultilayerModel
from .exceptions import (CalibrationError, ConcordanceError, ConfigError, DataError, DegenerateModelError,
                         EstimationError, FormatVersionError, InvalidOrderError, InvalidParameterError,
                         InvalidSpecError, MultisepError, NonexistenceError, ParseError, RankError,
                         SingularHessianError)
from .graphgen import (BernoulliFixed, BernoulliSparse, Lsm, Sbm, calibrate_lsm_alpha, make_rng, sample_basis,
                       sample_dyad_codes, sample_multilayer, spec_from_dict, spec_to_dict)
from .harness import ExperimentConfig, run_experiment, run_gof
from .inference import (adjust, anderson_darling, fdr_power, hotelling_global, mardia, normality_diagnostics,
                        roc_auc, roc_points, wald_tests, z_tests)
from .io import load_fit, load_multilayer, load_network, save_fit, save_network
from .model import (InteractionIndex, build_interaction_index, dyad_pmf, dyad_suff_stats, info_dyad,
                    log_odds, log_pseudolik, log_pseudolik_gradient, log_pseudolik_hessian, loglik,
                    loglik_gradient, loglik_hessian, network_suff_stats, pseudo_info_dyad)
from .network import BasisNetwork, MultilayerNetwork, derive_basis, is_concordant

__version__ = "0.1.0"

import types as _types

__all__ = sorted(n for n, v in dict(globals()).items()
                 if not n.startswith("_") and not isinstance(v, _types.ModuleType))
