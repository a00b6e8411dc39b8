"""Command-line entry point: ``multisep {simulate,fit,test,experiment,gof,bounds}``.

Every run first prints its resolved configuration as one JSON line. Exit
codes: 0 success, 2 configuration error, 3 data error, 4 estimation failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys

import numpy as np

from .exceptions import (ConcordanceError, ConfigError, DataError, EstimationError, InvalidOrderError,
                         InvalidParameterError, InvalidSpecError, RankError)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_ESTIMATION = 0, 2, 3, 4
_ODDS = re.compile(r"^\s*(\d+)\s+given\s+(.*)$")


def parse_odds_query(text: str):
    """``"1 given 2=1,3=1"`` -> ``(1, {2: 1, 3: 1})``."""
    m = _ODDS.match(text)
    if not m:
        raise ConfigError(f"odds query must look like '1 given 2=1,3=1', got {text!r}")
    given = {}
    for part in filter(None, (s.strip() for s in m.group(2).split(","))):
        try:
            layer, bit = (int(v) for v in part.split("="))
        except ValueError:
            raise ConfigError(f"bad condition {part!r} in odds query") from None
        if bit not in (0, 1):
            raise ConfigError(f"layer values must be 0 or 1 in {part!r}")
        given[layer] = bit
    return int(m.group(1)), given


def _floats(text, name):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--{name} must be a comma-separated list of numbers") from None


def _basis_dict(args):
    if args.basis is None:
        return {"family": "bernoulli", "prob": 0.8}
    try:
        d = json.loads(args.basis)
    except json.JSONDecodeError:
        raise ConfigError("--basis must be a JSON object, e.g. '{\"family\": \"sbm\", ...}'") from None
    if not isinstance(d, dict):
        raise ConfigError("--basis must be a JSON object")
    return d


def _print_config(d):
    print("config: " + json.dumps(d, sort_keys=True, default=str))


def _load_input(args):
    from .io import load_multilayer, load_network
    from .network import MultilayerNetwork
    if bool(args.network) == bool(args.layers):
        raise ConfigError("give exactly one of --network or --layers")
    if args.network:
        X = load_network(args.network)
        if not isinstance(X, MultilayerNetwork):
            raise DataError(f"{args.network} holds a basis network, not a multilayer network")
        return X
    return load_multilayer(args.layers, args.format, args.rule)


def _add_input(p):
    p.add_argument("--network", help="saved multilayer network file")
    p.add_argument("--layers", nargs="+", metavar="FILE", help="one layer file per layer, in layer order")
    p.add_argument("--format", choices=("matrix", "edgelist"), default="matrix")
    p.add_argument("--rule", choices=("and", "or", "asis"), default="and",
                   help="symmetrization of directed input (default: and)")


def _print_tests(labels, theta, se, report):
    head = f"{'statistic':<14}{'estimate':>11}{'std_err':>10}{'z':>9}{'p_raw':>11}" + "".join(
        f"{m:>12}" for m in report.p_values_adjusted)
    print(head)
    for t, lab in enumerate(labels):
        adj = "".join(f"{report.p_values_adjusted[m][t]:>12.4g}" for m in report.p_values_adjusted)
        print(f"{lab:<14}{theta[t]:>11.4f}{se[t]:>10.4f}{report.z_scores[t]:>9.3f}"
              f"{report.p_values_raw[t]:>11.4g}{adj}")


def cmd_simulate(args):
    from .graphgen import Lsm, sample_basis, sample_multilayer, spec_from_dict
    from .io import save_network
    from .model import build_interaction_index, check_theta
    index = build_interaction_index(args.n_layers, args.max_order)
    theta = check_theta(_floats(args.theta, "theta"), index)
    basis = _basis_dict(args)
    _print_config({"command": "simulate", "n_nodes": args.n_nodes, "n_layers": args.n_layers,
                   "max_order": args.max_order, "theta": theta.tolist(), "basis": basis,
                   "seed": args.seed, "out": args.out})
    spec = spec_from_dict(basis)
    if isinstance(spec, Lsm) and spec.alpha is None:
        spec = spec.calibrated(args.seed)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    Y, _ = sample_basis(spec, args.n_nodes, rng)
    X = sample_multilayer(Y, theta, index, rng)
    save_network(args.out, X, args.max_order)
    print(f"wrote {args.out}: {X.n_nodes} nodes, {Y.n_edges} activated dyads, "
          f"layer edges {X.layer_edge_counts().tolist()}")
    return EXIT_OK


def cmd_fit(args):
    from .estimation import FitOptions, fit
    from .inference import wald_tests
    from .io import save_fit
    from .model import build_interaction_index, log_odds
    queries = [parse_odds_query(q) for q in args.odds or []]
    _print_config({"command": "fit", "network": args.network, "layers": args.layers, "format": args.format,
                   "rule": args.rule, "objective": args.objective, "max_order": args.max_order,
                   "alpha": args.alpha, "method": args.method, "odds": args.odds or [], "out": args.out})
    X = _load_input(args)
    index = build_interaction_index(X.n_layers, args.max_order)
    res = fit(X, None, index, FitOptions(objective=args.objective))
    print(f"{args.objective.upper()} on {X.n_nodes} nodes, {X.n_layers} layers, "
          f"{res.n_activated} activated dyads; converged={res.converged} after {res.iters} iterations")
    report = wald_tests(res, alpha=args.alpha, method=args.method)
    _print_tests(index.labels(), res.theta_hat, res.std_err, report)
    for layer, given in queries:
        lo = log_odds(res.theta_hat, index, layer, given)
        cond = ",".join(f"{k}={v}" for k, v in sorted(given.items()))
        odds = math.exp(lo) if math.isfinite(lo) else math.inf
        print(f"odds of layer {layer} given {cond}: log-odds {lo:.4f}, odds {odds:.4f}")
    if args.out:
        save_fit(args.out, res)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_test(args):
    from .inference import hotelling_global, z_tests
    from .io import load_fit
    _print_config({"command": "test", "fit": args.fit, "replicates": args.replicates, "mu": args.mu,
                   "alpha": args.alpha, "method": args.method})
    if bool(args.fit) == bool(args.replicates):
        raise ConfigError("give exactly one of --fit or --replicates")
    if args.fit:
        res = load_fit(args.fit)
        mu = None if args.mu is None else _floats(args.mu, "mu")
        report = z_tests(res.theta_hat, res.std_err, mu, args.alpha, args.method)
        _print_tests(res.index.labels(), res.theta_hat, res.std_err, report)
        print(f"rejected ({report.method}, alpha={args.alpha}): "
              f"{[lab for lab, d in zip(res.index.labels(), report.decisions) if d]}")
        return EXIT_OK
    with open(args.replicates, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    cols = [c for c in (rows[0] if rows else {}) if c.startswith("hat_")]
    if not cols:
        raise DataError(f"{args.replicates}: no hat_* columns")
    est = np.array([[float(r[c]) for c in cols] for r in rows if r.get("error", "") == ""])
    mu = np.zeros(len(cols)) if args.mu is None else np.array(_floats(args.mu, "mu"))
    if mu.size != len(cols):
        raise ConfigError(f"--mu needs {len(cols)} values")
    h = hotelling_global(est, mu)
    print(f"Hotelling T2={h.statistic:.4f} F={h.f_statistic:.4f} df={h.df} p={h.p_value:.4g}")
    return EXIT_OK


def cmd_experiment(args):
    from .harness import ExperimentConfig, run_experiment
    cfg = ExperimentConfig.from_json(args.config)
    overrides = {k: v for k, v in (("seed", args.seed), ("output_dir", args.output_dir),
                                   ("n_jobs", args.n_jobs)) if v is not None}
    if overrides:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    _print_config({"command": "experiment", **cfg.to_dict()})
    out = run_experiment(cfg)
    for f in out.files:
        print(f"wrote {f}")
    if out.message:
        print(out.message)
    return EXIT_ESTIMATION if out.failed else EXIT_OK


def cmd_gof(args):
    from .estimation import FitOptions, fit
    from .harness import GofTable, run_gof, write_csv
    from .model import build_interaction_index
    from .network import derive_basis
    _print_config({"command": "gof", "network": args.network, "layers": args.layers, "format": args.format,
                   "rule": args.rule, "objective": args.objective, "max_order": args.max_order,
                   "n_reps": args.n_reps, "seed": args.seed, "out": args.out})
    if args.n_reps < 1:
        raise ConfigError("--n-reps must be at least 1")
    X = _load_input(args)
    index = build_interaction_index(X.n_layers, args.max_order)
    res = fit(X, None, index, FitOptions(objective=args.objective))
    table = run_gof(res, derive_basis(X), index, args.n_reps, args.seed, observed=X)
    print(f"{'statistic':<14}" + "".join(f"{h:>12}" for h in GofTable.header[1:]))
    for row in table.rows():
        print(f"{row[0]:<14}" + "".join(f"{v:>12.2f}" for v in row[1:]))
    print(f"relative l2 error: {table.rel_l2_error:.4f}")
    if args.out:
        write_csv(args.out, GofTable.header, table.rows())
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bounds(args):
    from .bounds import (TheoryInputs, basis_covariance_sum, bernoulli_normal_approx_bound, consistency_bound,
                         min_information_eigenvalue, normal_approx_bound, remainder_bound)
    from .graphgen import BernoulliFixed, BernoulliSparse, Lsm, spec_from_dict
    from .harness import expected_density
    from .model import build_interaction_index, check_theta
    from .network import n_pairs
    index = build_interaction_index(args.n_layers, args.max_order)
    theta = check_theta(_floats(args.theta, "theta"), index)
    basis = _basis_dict(args)
    _print_config({"command": "bounds", "n_nodes": args.n_nodes, "n_layers": args.n_layers,
                   "max_order": args.max_order, "theta": theta.tolist(), "basis": basis,
                   "epsilon_star": args.epsilon_star, "xi": args.xi, "seed": args.seed})
    spec = spec_from_dict(basis)
    if isinstance(spec, Lsm) and spec.alpha is None:
        spec = spec.calibrated(args.seed)
    xi = args.xi if args.xi is not None else min_information_eigenvalue(
        theta, args.epsilon_star, index, seed=args.seed)
    if xi <= 0:
        raise EstimationError("minimum information eigenvalue is 0; the bounds are undefined")
    E = expected_density(spec, args.n_nodes) * n_pairs(args.n_nodes)
    dg = basis_covariance_sum(spec, args.n_nodes, seed=args.seed)
    ti = TheoryInputs(args.n_nodes, index.p, args.n_layers, E, xi, dg.positive_part, args.epsilon_star)
    print(f"xi={xi:.6g} expected_edges={E:.6g} dg_plus={dg.positive_part:.6g}")
    for name, rep in (("consistency (MLE)", consistency_bound(ti, "mle")),
                      ("consistency (MPLE)", consistency_bound(ti, "mple")),
                      ("normal approximation", normal_approx_bound(ti)), ("remainder", remainder_bound(ti))):
        print(f"{name}: {rep.value:.6g}{' (vacuous)' if rep.vacuous else ''}")
    if isinstance(spec, (BernoulliFixed, BernoulliSparse)):
        b = bernoulli_normal_approx_bound(spec.edge_prob(args.n_nodes), ti)
        print(f"bernoulli normal approximation: {b['approximation'].value:.6g}; "
              f"remainder {b['remainder'].value:.6g} with probability >= "
              f"{b['remainder'].flags['probability_floor']:.6g}; "
              f"K <= 0.5 log N: {b['saturated_growth_ok']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multisep", description="Separable models for multilayer networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a basis network and layers")
    p.add_argument("--n-nodes", type=int, required=True)
    p.add_argument("--n-layers", type=int, default=3)
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--theta", required=True, help="comma-separated parameter vector")
    p.add_argument("--basis", help="basis spec as JSON (default bernoulli prob 0.8)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a network and print Wald tests")
    _add_input(p)
    p.add_argument("--objective", choices=("mple", "mle"), default="mple")
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", default="bh", choices=("bonferroni", "holm", "hochberg", "bh"))
    p.add_argument("--odds", action="append", help="conditional odds query, e.g. '1 given 2=1,3=1'")
    p.add_argument("--out", help="write the fit as JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("test", help="Wald tests from a saved fit, or Hotelling test on replicates")
    p.add_argument("--fit")
    p.add_argument("--replicates", help="replicates.csv written by an experiment")
    p.add_argument("--mu", help="comma-separated null values (default 0)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--method", default="bh", choices=("bonferroni", "holm", "hochberg", "bh"))
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("experiment", help="run a simulation study from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--n-jobs", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gof", help="goodness of fit by simulation from the fitted model")
    _add_input(p)
    p.add_argument("--objective", choices=("mple", "mle"), default="mple")
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--n-reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the comparison table as CSV")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("bounds", help="evaluate the non-asymptotic error bounds")
    p.add_argument("--n-nodes", type=int, required=True)
    p.add_argument("--n-layers", type=int, default=3)
    p.add_argument("--max-order", type=int, default=2)
    p.add_argument("--theta", required=True)
    p.add_argument("--basis")
    p.add_argument("--epsilon-star", type=float, default=0.1)
    p.add_argument("--xi", type=float, help="minimum information eigenvalue (estimated when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bounds)
    return parser


_LIST_FLAGS = ("--theta", "--mu")


def _attach_negative_lists(argv):
    # argparse reads "-3,-2" as an option; bind such values to their flag
    out = []
    for tok in argv:
        if out and out[-1] in _LIST_FLAGS and tok.startswith("-"):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_negative_lists(argv))
    try:
        return args.func(args)
    except (ConfigError, InvalidOrderError, InvalidParameterError, InvalidSpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ConcordanceError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EstimationError, RankError) as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":
    sys.exit(main())
