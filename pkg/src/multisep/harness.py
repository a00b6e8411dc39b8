"""Config-driven simulation studies.

A study is described by a JSON object (see :class:`ExperimentConfig`) and
writes CSV tables, optional SVG figures, ``timings.json`` and a
``manifest.json`` listing every file with its SHA-256 hash. CSVs carry no
wall-clock data, so rerunning a config reproduces them byte for byte.

Every replicate draws from its own generator seeded by
``SeedSequence(seed, spawn_key=(N, replicate))``; results do not depend on
``n_jobs`` or scheduling order.

Config keys
-----------
study : {"consistency", "normality", "fdr", "roc", "gof", "bounds-sweep"}
n_grid : list of int
    Network sizes.
replicates : int, default 100
n_layers, max_order : int, default 3, 2
theta : list of float or {"random": {"low": -1, "high": 1, "zero": [2, 4]}}
    Explicit true parameter, or a fresh uniform draw per replicate with the
    listed 0-based components set to 0. The string ``"random"`` uses the
    defaults shown.
basis : dict, default {"family": "bernoulli", "prob": 0.8}
    Passed to :func:`multisep.graphgen.spec_from_dict`.
seed : int, default 0
alpha : float, default 0.05
output_dir : str, default "results"
objective : {"mple", "mle"}, default "mple"
n_jobs : int, default 1
    Worker processes for replicates (joblib); ``-1`` uses all cores.
synthetic_gaussian : bool, default False
    Normality study only: replace fitted estimates by Gaussian draws from
    the asymptotic law, to check the diagnostics themselves.
gof_reps : int, default 10
    Goodness-of-fit study: number of simulated networks.
input : dict, optional
    Goodness-of-fit study: ``{"files": [...], "format": "matrix", "rule":
    "and"}`` or ``{"network": path}``; without it a network is simulated at
    ``n_grid[0]``.
k_grid : list of int, optional
    Bounds sweep: layer counts (default ``[n_layers]``).
epsilon_star : float, default 0.1
n_ball_samples : int, default 50
plots : bool, default True
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .bounds import (TheoryInputs, basis_covariance_sum, bernoulli_normal_approx_bound, consistency_bound,
                     min_information_eigenvalue, normal_approx_bound, remainder_bound)
from .estimation import OBJECTIVES, FitOptions, FitResult, fit_counts
from .exceptions import ConfigError, EstimationError, InvalidSpecError, MultisepError
from .graphgen import (BernoulliFixed, BernoulliSparse, Lsm, Sbm, make_rng, sample_basis,
                       sample_multilayer, spec_from_dict)
from .inference import METHODS, fdr_power, normality_diagnostics, roc_auc, roc_points, z_tests
from .model import (InteractionIndex, build_interaction_index, expected_dyad_stats, info_dyad,
                    network_suff_stats, pseudo_info_dyad, pseudo_score_covariance)
from .network import BasisNetwork, n_pairs
from .plotting import svg_plot

STUDIES = ("consistency", "normality", "fdr", "roc", "gof", "bounds-sweep")
MANIFEST_VERSION = 1
MAX_FAILURE_RATE = 0.10
MIN_NORMALITY_REPS = 50


@dataclass
class ExperimentConfig:
    study: str
    n_grid: list
    replicates: int = 100
    n_layers: int = 3
    max_order: int = 2
    theta: object = field(default_factory=lambda: [-3.0, -2.0, -1.0, 0.5, 0.0, 0.0])
    basis: dict = field(default_factory=lambda: {"family": "bernoulli", "prob": 0.8})
    seed: int = 0
    alpha: float = 0.05
    output_dir: str = "results"
    objective: str = "mple"
    n_jobs: int = 1
    synthetic_gaussian: bool = False
    gof_reps: int = 10
    input: dict | None = None
    k_grid: list | None = None
    epsilon_star: float = 0.1
    n_ball_samples: int = 50
    plots: bool = True

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"study must be one of {STUDIES}, got {self.study!r}")
        if not isinstance(self.n_grid, (list, tuple)) or not self.n_grid:
            raise ConfigError("n_grid must be a nonempty list")
        if any(not isinstance(n, int) or n < 3 for n in self.n_grid):
            raise ConfigError("n_grid entries must be integers >= 3")
        if not isinstance(self.replicates, int) or self.replicates < 1:
            raise ConfigError("replicates must be an integer >= 1")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.k_grid is not None and (not self.k_grid or any(k < 1 for k in self.k_grid)):
            raise ConfigError("k_grid must be a nonempty list of positive integers")
        try:
            self.index = build_interaction_index(self.n_layers, self.max_order)
            self.basis_spec = spec_from_dict(self.basis)
        except MultisepError as exc:
            raise ConfigError(str(exc)) from None
        self.theta_source = _parse_theta(self.theta, self.index.p)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        missing = [k for k in ("study", "n_grid") if k not in d]
        if missing:
            raise ConfigError(f"missing required config keys: {missing}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _parse_theta(theta, p):
    if theta == "random":
        theta = {"random": {}}
    if isinstance(theta, dict):
        if set(theta) != {"random"} or not isinstance(theta["random"], dict):
            raise ConfigError('theta must be a list or {"random": {...}}')
        opts = {"low": -1.0, "high": 1.0, "zero": [2, 4], **theta["random"]}
        if set(opts) != {"low", "high", "zero"}:
            raise ConfigError("random theta accepts only low, high, zero")
        if not opts["low"] < opts["high"]:
            raise ConfigError("random theta needs low < high")
        if any(not 0 <= z < p for z in opts["zero"]):
            raise ConfigError(f"zero indices must lie in [0, {p})")
        return ("random", float(opts["low"]), float(opts["high"]), tuple(opts["zero"]))
    try:
        vec = np.asarray(theta, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("theta must be numeric") from None
    if vec.shape != (p,):
        raise ConfigError(f"explicit theta must have length p={p}, got {vec.size}")
    return ("explicit", vec)


def draw_theta(source, p: int, rng) -> np.ndarray:
    """The true parameter for one replicate."""
    if source[0] == "explicit":
        return source[1].copy()
    _, low, high, zero = source
    theta = rng.uniform(low, high, size=p)
    theta[list(zero)] = 0.0
    return theta


def replicate_seed(master: int, n_nodes: int, rep: int) -> int:
    """64-bit seed as a pure function of ``(master, n_nodes, rep)``."""
    ss = np.random.SeedSequence(master, spawn_key=(int(n_nodes), int(rep)))
    return int(ss.generate_state(1, np.uint64)[0])


def expected_density(spec, n_nodes: int) -> float:
    if isinstance(spec, (BernoulliFixed, BernoulliSparse)):
        return spec.edge_prob(n_nodes)
    if isinstance(spec, Sbm):
        return spec.expected_density(n_nodes)
    if isinstance(spec, Lsm):
        return spec.density
    raise InvalidSpecError(f"unsupported spec {spec!r}")


def _resolved_spec(cfg):
    spec = cfg.basis_spec
    if isinstance(spec, Lsm) and spec.alpha is None:
        spec = spec.calibrated(cfg.seed)
    return spec


# -- replicates -----------------------------------------------------------------

def _one_replicate(n_nodes, rep, master, theta_source, index, spec, options):
    t0 = time.perf_counter()
    seed = replicate_seed(master, n_nodes, rep)
    rng = make_rng(seed)
    theta_star = draw_theta(theta_source, index.p, rng)
    Y, _ = sample_basis(spec, n_nodes, rng)
    X = sample_multilayer(Y, theta_star, index, rng)
    rec = {"N": n_nodes, "replicate": rep, "seed": seed, "theta_star": theta_star,
           "n_activated": Y.n_edges, "converged": False, "error": ""}
    try:
        res = fit_counts(X.outcome_counts(), index, options)
    except EstimationError as exc:
        rec["error"] = type(exc).__name__
        nan = np.full(index.p, np.nan)
        rec.update(theta_hat=nan, std_err=nan, abs_error=math.nan, rel_error=math.nan)
    else:
        err = float(np.linalg.norm(res.theta_hat - theta_star))
        norm = float(np.linalg.norm(theta_star))
        rec.update(converged=res.converged, theta_hat=res.theta_hat, std_err=res.std_err,
                   abs_error=err, rel_error=err / norm if norm > 0 else math.nan)
        if not res.converged:
            rec["error"] = "NotConverged"
    rec["runtime"] = time.perf_counter() - t0
    return rec


def run_replicates(cfg: ExperimentConfig, n_values=None) -> list[dict]:
    """Simulate and fit every ``(N, replicate)`` pair; records sorted by ``(N, replicate)``."""
    n_values = cfg.n_grid if n_values is None else n_values
    spec = _resolved_spec(cfg)
    options = FitOptions(objective=cfg.objective)
    jobs = [(n, r) for n in n_values for r in range(cfg.replicates)]
    args = (cfg.seed, cfg.theta_source, cfg.index, spec, options)
    if cfg.n_jobs == 1:
        records = [_one_replicate(n, r, *args) for n, r in jobs]
    else:
        from joblib import Parallel, delayed
        records = Parallel(n_jobs=cfg.n_jobs)(delayed(_one_replicate)(n, r, *args) for n, r in jobs)
    return sorted(records, key=lambda rec: (rec["N"], rec["replicate"]))


# -- output ---------------------------------------------------------------------

@dataclass
class StudyOutput:
    study: str
    records: list
    summary: dict
    files: list = field(default_factory=list)
    failed: bool = False
    message: str = ""


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _tags(index):
    return ["_".join(str(k) for k in s) for s in index.subsets]


def _write_replicates(out, records, index):
    tags = _tags(index)
    header = (["N", "replicate", "seed", "n_activated", "converged", "error", "rel_l2_error", "abs_l2_error"]
              + [f"star_{t}" for t in tags] + [f"hat_{t}" for t in tags] + [f"se_{t}" for t in tags])
    rows = [[r["N"], r["replicate"], r["seed"], r["n_activated"], r["converged"], r["error"],
             r["rel_error"], r["abs_error"], *r["theta_star"], *r["theta_hat"], *r["std_err"]]
            for r in records]
    path = out / "replicates.csv"
    write_csv(path, header, rows)
    return path


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _finish(cfg, out, study_output, t_start):
    out = Path(out)
    timings = {"total_seconds": time.perf_counter() - t_start}
    if study_output.records:
        timings["replicate_seconds"] = [[r["N"], r["replicate"], r["runtime"]] for r in study_output.records
                                        if "runtime" in r]
    tpath = out / "timings.json"
    tpath.write_text(json.dumps(timings) + "\n", encoding="utf-8")
    study_output.files.append(tpath)
    manifest = {"format_version": MANIFEST_VERSION, "study": cfg.study, "config": cfg.to_dict(),
                "failed": study_output.failed, "message": study_output.message,
                "files": [{"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size}
                          for p in study_output.files]}
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    study_output.files.append(mpath)
    return study_output


def _failure_check(records):
    by_n = {}
    for r in records:
        by_n.setdefault(r["N"], []).append(bool(r["error"]))
    worst = {n: float(np.mean(v)) for n, v in by_n.items()}
    bad = {n: f for n, f in worst.items() if f > MAX_FAILURE_RATE}
    if bad:
        return True, f"fit failures above {MAX_FAILURE_RATE:.0%} at N={sorted(bad)}"
    n_fail = sum(sum(v) for v in by_n.values())
    return False, f"{n_fail} failed fits" if n_fail else ""


def log_log_slope(n_values, medians):
    """OLS slope and intercept of ``log(median)`` on ``log(N)``; ``None`` with fewer than 2 sizes."""
    n_values, medians = np.asarray(n_values, float), np.asarray(medians, float)
    ok = np.isfinite(medians) & (medians > 0)
    if ok.sum() < 2:
        return None
    slope, intercept = np.polyfit(np.log(n_values[ok]), np.log(medians[ok]), 1)
    return float(slope), float(intercept)


# -- studies --------------------------------------------------------------------

def _medians(records, n_grid):
    rows = []
    for n in n_grid:
        ok = [r for r in records if r["N"] == n and not r["error"]]
        rel = [r["rel_error"] for r in ok if math.isfinite(r["rel_error"])]
        rows.append([n, len(ok), sum(1 for r in records if r["N"] == n) - len(ok),
                     float(np.median(rel)) if rel else math.nan,
                     float(np.median([r["abs_error"] for r in ok])) if ok else math.nan])
    return rows


def run_consistency(cfg: ExperimentConfig) -> StudyOutput:
    """Relative l2 error of the estimator against network size.

    Writes ``replicates.csv``, ``summary.csv`` (per-N medians) and, with at
    least two sizes, ``slope.csv`` holding the log-log OLS fit.
    """
    t0 = time.perf_counter()
    out = _outdir(cfg)
    records = run_replicates(cfg)
    files = [_write_replicates(out, records, cfg.index)]
    rows = _medians(records, cfg.n_grid)
    files.append(out / "summary.csv")
    write_csv(files[-1], ["N", "n_ok", "n_failed", "median_rel_l2_error", "median_abs_l2_error"], rows)
    summary = {"N": [r[0] for r in rows], "median_rel_error": [r[3] for r in rows],
               "median_abs_error": [r[4] for r in rows]}
    fitted = log_log_slope(summary["N"], summary["median_rel_error"])
    if fitted is not None:
        summary["slope"], summary["intercept"] = fitted
        files.append(out / "slope.csv")
        write_csv(files[-1], ["slope", "intercept"], [list(fitted)])
        if cfg.plots:
            files.append(out / "consistency.svg")
            svg_plot(files[-1], [("median", np.log(summary["N"]), np.log(summary["median_rel_error"]))],
                     title=f"slope {fitted[0]:.3f}", xlabel="log N", ylabel="log median relative error")
    failed, msg = _failure_check(records)
    return _finish(cfg, out, StudyOutput(cfg.study, records, summary, files, failed, msg), t0)


def asymptotic_covariance(theta, index: InteractionIndex, n_activated: float, objective="mple"):
    """Large-sample covariance of the estimator for ``n_activated`` activated dyads."""
    if objective == "mle":
        return np.linalg.inv(n_activated * info_dyad(theta, index))
    bread = np.linalg.inv(pseudo_info_dyad(theta, index))
    return bread @ pseudo_score_covariance(theta, index) @ bread / n_activated


def run_normality(cfg: ExperimentConfig) -> StudyOutput:
    """Replicated fits at the largest size with Anderson-Darling, Mardia and Q-Q output.

    Diagnostics are computed twice: per-component standardization
    (``normality_raw.csv``) and standardization by the asymptotic covariance
    at the true parameter, centred there (``normality_standardized.csv``).
    """
    if cfg.replicates < MIN_NORMALITY_REPS:
        raise ConfigError(f"normality study needs replicates >= {MIN_NORMALITY_REPS}, got {cfg.replicates}")
    if cfg.theta_source[0] != "explicit":
        raise ConfigError("normality study needs an explicit theta")
    t0 = time.perf_counter()
    out = _outdir(cfg)
    n = max(cfg.n_grid)
    theta = cfg.theta_source[1]
    spec = _resolved_spec(cfg)
    files = []
    n_act_expected = expected_density(spec, n) * n_pairs(n)
    cov = asymptotic_covariance(theta, cfg.index, n_act_expected, cfg.objective)
    if cfg.synthetic_gaussian:
        rng = make_rng(replicate_seed(cfg.seed, n, 0))
        est = rng.multivariate_normal(theta, cov, size=cfg.replicates, method="cholesky")
        records = []
    else:
        records = run_replicates(cfg, [n])
        files.append(_write_replicates(out, records, cfg.index))
        est = np.array([r["theta_hat"] for r in records if not r["error"]])
    tags = _tags(cfg.index)
    reports = {"raw": normality_diagnostics(est),
               "standardized": normality_diagnostics(est, np.linalg.inv(cov), center=theta)}
    summary = {"N": n, "n_estimates": len(est)}
    for name, rep in reports.items():
        rows = [[tags[j], rep.ad_statistics[j], rep.ad_pvalues[j], rep.ad_pvalues[j] > cfg.alpha]
                for j in range(cfg.index.p)]
        rows.append(["mardia_skewness", rep.mardia_skewness, rep.mardia_skew_pvalue,
                     rep.mardia_skew_pvalue > cfg.alpha])
        rows.append(["mardia_kurtosis", rep.mardia_kurtosis, rep.mardia_kurt_pvalue,
                     rep.mardia_kurt_pvalue > cfg.alpha])
        files.append(out / f"normality_{name}.csv")
        write_csv(files[-1], ["test", "statistic", "p_value", "pass"], rows)
        qq_rows = [[tags[j], q, s] for j, (qs, ss) in enumerate(rep.qq) for q, s in zip(qs, ss)]
        files.append(out / f"qq_{name}.csv")
        write_csv(files[-1], ["component", "normal_quantile", "sample_quantile"], qq_rows)
        summary[name] = {"ad_pvalues": rep.ad_pvalues.tolist(), "n_ad_pass": rep.n_ad_pass(cfg.alpha),
                         "mardia_skew_pvalue": rep.mardia_skew_pvalue,
                         "mardia_kurt_pvalue": rep.mardia_kurt_pvalue}
        if cfg.plots:
            files.append(out / f"qq_{name}.svg")
            svg_plot(files[-1], [(tags[j], *rep.qq[j]) for j in range(cfg.index.p)], title=f"Q-Q ({name})",
                     xlabel="normal quantile", ylabel="sample quantile", lines=False, diagonal=True)
    summary["mean"] = est.mean(axis=0).tolist()
    summary["sd"] = est.std(axis=0, ddof=1).tolist()
    failed, msg = _failure_check(records) if records else (False, "")
    return _finish(cfg, out, StudyOutput(cfg.study, records, summary, files, failed, msg), t0)


def _tests_by_n(cfg, records):
    """Per-N stacks of z-scores, truth supports and per-method decisions."""
    grouped = {}
    for r in records:
        if r["error"]:
            continue
        rep = z_tests(r["theta_hat"], r["std_err"], alpha=cfg.alpha)
        g = grouped.setdefault(r["N"], {"z": [], "truth": [], **{m: [] for m in METHODS}})
        g["z"].append(rep.z_scores)
        g["truth"].append(r["theta_star"] != 0)
        for m in METHODS:
            g[m].append(rep.decisions_for(m))
    return grouped


def run_fdr(cfg: ExperimentConfig) -> StudyOutput:
    """Empirical FDR and power of the four multiple-testing procedures (``fdr.csv``)."""
    t0 = time.perf_counter()
    out = _outdir(cfg)
    records = run_replicates(cfg)
    files = [_write_replicates(out, records, cfg.index)]
    rows = []
    summary = {}
    for n, g in sorted(_tests_by_n(cfg, records).items()):
        for m in METHODS:
            fdr, power = fdr_power(np.array(g[m]), np.array(g["truth"]))
            rows.append([n, m, len(g["z"]), fdr, power])
            summary[(n, m)] = (fdr, power)
    files.append(out / "fdr.csv")
    write_csv(files[-1], ["N", "method", "n_replicates", "fdr", "power"], rows)
    failed, msg = _failure_check(records)
    return _finish(cfg, out, StudyOutput(cfg.study, records, summary, files, failed, msg), t0)


def run_roc(cfg: ExperimentConfig) -> StudyOutput:
    """ROC points for the rule ``|z| > t`` pooled over replicates (``roc.csv``, ``auc.csv``)."""
    t0 = time.perf_counter()
    out = _outdir(cfg)
    records = run_replicates(cfg)
    files = [_write_replicates(out, records, cfg.index)]
    roc_rows, auc_rows, series = [], [], []
    summary = {}
    for n, g in sorted(_tests_by_n(cfg, records).items()):
        truth = np.array(g["truth"])
        if truth.all() or not truth.any():
            continue
        pts = roc_points(np.array(g["z"]), truth)
        roc_rows.extend([n, f, t] for f, t in pts)
        auc = roc_auc(pts)
        auc_rows.append([n, auc])
        summary[n] = auc
        series.append((f"N={n}", pts[:, 0], pts[:, 1]))
    files.append(out / "roc.csv")
    write_csv(files[-1], ["N", "fpr", "tpr"], roc_rows)
    files.append(out / "auc.csv")
    write_csv(files[-1], ["N", "auc"], auc_rows)
    if cfg.plots and series:
        files.append(out / "roc.svg")
        svg_plot(files[-1], series, title="ROC", xlabel="false positive rate", ylabel="true positive rate",
                 diagonal=True)
    failed, msg = _failure_check(records)
    return _finish(cfg, out, StudyOutput(cfg.study, records, summary, files, failed, msg), t0)


@dataclass(frozen=True)
class GofTable:
    labels: list
    observed: np.ndarray
    simulated: np.ndarray = field(repr=False)
    rel_l2_error: float

    def rows(self):
        q = np.quantile(self.simulated, [0, 0.25, 0.5, 0.75, 1], axis=0)
        mean = self.simulated.mean(axis=0)
        return [[self.labels[t], self.observed[t], mean[t], *q[:, t]] for t in range(len(self.labels))]

    header = ["statistic", "observed", "sim_mean", "sim_min", "sim_q1", "sim_median", "sim_q3", "sim_max"]


def run_gof(fit: FitResult, Y: BasisNetwork, index: InteractionIndex, n_reps: int, seed=0,
            observed=None) -> GofTable:
    """Compare observed sufficient statistics with networks simulated from the fit.

    Draws ``n_reps`` multilayer networks on ``Y`` from ``fit.theta_hat``.
    ``rel_l2_error`` is ``||s_obs - mean(s_sim)||_2 / ||s_obs||_2``.
    ``observed`` is the observed network (or its statistics); without it the
    expectation ``||Y||_1 E[s]`` at the fit stands in.
    """
    if not isinstance(n_reps, (int, np.integer)) or n_reps < 1:
        raise ConfigError("n_reps must be a positive integer")
    sims = np.array([network_suff_stats(sample_multilayer(Y, fit.theta_hat, index,
                                                          replicate_seed(seed, Y.n_nodes, r)), index)
                     for r in range(n_reps)], dtype=float)
    if observed is None:
        obs = Y.n_edges * expected_dyad_stats(fit.theta_hat, index)
    elif hasattr(observed, "codes"):
        obs = network_suff_stats(observed, index).astype(float)
    else:
        obs = np.asarray(observed, dtype=float)
    rel = float(np.linalg.norm(obs - sims.mean(axis=0)) / np.linalg.norm(obs))
    return GofTable(index.labels(), obs, sims, rel)


def _gof_network(cfg):
    from .io import load_multilayer, load_network
    inp = cfg.input
    if inp is None:
        n = cfg.n_grid[0]
        rng = make_rng(replicate_seed(cfg.seed, n, 0))
        theta = draw_theta(cfg.theta_source, cfg.index.p, rng)
        Y, _ = sample_basis(_resolved_spec(cfg), n, rng)
        return sample_multilayer(Y, theta, cfg.index, rng)
    if "network" in inp:
        return load_network(inp["network"])
    if "files" in inp:
        return load_multilayer(inp["files"], inp.get("format", "matrix"), inp.get("rule", "and"))
    raise ConfigError('input must have "files" or "network"')


def run_gof_study(cfg: ExperimentConfig) -> StudyOutput:
    """Fit the input (or a simulated) network and compare with simulations (``gof.csv``)."""
    from .network import derive_basis
    if cfg.gof_reps < 1:
        raise ConfigError("gof_reps must be a positive integer")
    t0 = time.perf_counter()
    out = _outdir(cfg)
    X = _gof_network(cfg)
    index = build_interaction_index(X.n_layers, cfg.max_order)
    Y = derive_basis(X)
    res = fit_counts(X.outcome_counts(), index, FitOptions(objective=cfg.objective))
    table = run_gof(res, Y, index, cfg.gof_reps, cfg.seed, observed=X)
    files = [out / "gof.csv", out / "gof_summary.csv", out / "gof_fit.csv"]
    write_csv(files[0], GofTable.header, table.rows())
    write_csv(files[1], ["n_reps", "rel_l2_error"], [[cfg.gof_reps, table.rel_l2_error]])
    write_csv(files[2], ["statistic", "estimate", "std_err"],
              [[lab, t, s] for lab, t, s in zip(index.labels(), res.theta_hat, res.std_err)])
    summary = {"rel_l2_error": table.rel_l2_error, "theta_hat": res.theta_hat.tolist()}
    return _finish(cfg, out, StudyOutput(cfg.study, [], summary, files), t0)


def run_bounds_sweep(cfg: ExperimentConfig) -> StudyOutput:
    """Evaluate the non-asymptotic bounds over ``n_grid`` x ``k_grid`` (``bounds.csv``).

    The interaction order is ``min(max_order, K - 1)``. The true parameter is
    the configured one when its length fits, otherwise a seeded uniform draw
    on ``[-1, 1]``.
    """
    t0 = time.perf_counter()
    out = _outdir(cfg)
    spec = _resolved_spec(cfg)
    rows = []
    for K in (cfg.k_grid or [cfg.n_layers]):
        # saturated indices have singular information, so cap the order at K - 1
        index = build_interaction_index(K, max(1, min(cfg.max_order, K - 1)))
        if cfg.theta_source[0] == "explicit" and cfg.theta_source[1].size == index.p:
            theta = cfg.theta_source[1]
        else:
            theta = make_rng(replicate_seed(cfg.seed, 0, K)).uniform(-1, 1, index.p)
        xi = min_information_eigenvalue(theta, cfg.epsilon_star, index, cfg.n_ball_samples, cfg.seed) \
            if K > 1 else 0.0
        for n in cfg.n_grid:
            E = expected_density(spec, n) * n_pairs(n)
            dg = basis_covariance_sum(spec, n, seed=cfg.seed).positive_part
            row = [n, K, index.max_order, index.p, xi, E, dg]
            if xi <= 0 or E < 1:
                rows.append(row + [math.nan] * 6)
                continue
            ti = TheoryInputs(n, index.p, K, E, xi, dg, cfg.epsilon_star)
            na, rem = normal_approx_bound(ti), remainder_bound(ti)
            row += [consistency_bound(ti, "mle").value, consistency_bound(ti, "mple").value,
                    na.value, na.vacuous, rem.value, rem.flags["probability_floor"]]
            rows.append(row)
    header = ["N", "K", "H", "p", "xi", "expected_edges", "dg_plus", "consistency_mle", "consistency_mple",
              "normal_approx", "normal_approx_vacuous", "remainder", "remainder_probability"]
    files = [out / "bounds.csv"]
    write_csv(files[0], header, rows)
    if isinstance(spec, (BernoulliFixed, BernoulliSparse)):
        brows = []
        for r in rows:
            n, K, _, p, xi, E = r[:6]
            if xi <= 0:
                continue
            b = bernoulli_normal_approx_bound(spec.edge_prob(n), TheoryInputs(n, p, K, max(E, 1.0), xi))
            brows.append([n, K, b["approximation"].value, b["remainder"].value,
                          b["remainder"].flags["probability_floor"], b["saturated_growth_ok"]])
        files.append(out / "bounds_bernoulli.csv")
        write_csv(files[-1], ["N", "K", "normal_approx", "remainder", "remainder_probability",
                              "saturated_growth_ok"], brows)
    return _finish(cfg, out, StudyOutput(cfg.study, [], {"rows": rows}, files), t0)


def _outdir(cfg):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


RUNNERS = {"consistency": run_consistency, "normality": run_normality, "fdr": run_fdr, "roc": run_roc,
           "gof": run_gof_study, "bounds-sweep": run_bounds_sweep}


def run_experiment(cfg: ExperimentConfig) -> StudyOutput:
    return RUNNERS[cfg.study](cfg)


__all__ = ["ExperimentConfig", "StudyOutput", "GofTable", "STUDIES", "run_experiment", "run_replicates",
           "run_consistency", "run_normality", "run_fdr", "run_roc", "run_gof", "run_gof_study",
           "run_bounds_sweep", "replicate_seed", "draw_theta", "expected_density", "log_log_slope",
           "asymptotic_covariance", "write_csv"]
