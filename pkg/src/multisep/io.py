"""Reading layer files, saving networks and fits.

Layer files come in two formats:

* ``matrix``: ``N`` whitespace-separated rows of ``N`` entries in ``{0, 1}``;
  the diagonal is ignored.
* ``edgelist``: one ``i j`` pair per line, 1-based node labels; blank lines
  and ``#`` comments are skipped.

Directed input is symmetrized per layer with ``"and"`` (tie present only if
both directions are reported), ``"or"``, or ``"asis"`` (input must already be
symmetric).

Saved networks are text files: a JSON header line carrying ``format`` and
``format_version``, then one line per nonzero dyad, ``i j bits`` for a
multilayer network (1-based nodes, bits in layer order) or ``i j`` for a
basis network.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import FormatVersionError, ParseError
from .network import BasisNetwork, MultilayerNetwork, n_pairs, pair_index, pair_nodes

FORMAT_VERSION = 1
NETWORK_FORMAT = "multisep-network"
FIT_FORMAT = "multisep-fit"
RULES = ("and", "or", "asis")


def _read_matrix(path: Path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            tokens = line.split()
            if not tokens:
                continue
            row = []
            for tok in tokens:
                if tok not in ("0", "1"):
                    raise ParseError(path, lineno, f"non-binary entry {tok!r}")
                row.append(tok == "1")
            if rows and len(row) != len(rows[0][1]):
                raise ParseError(path, lineno,
                                 f"ragged matrix: {len(row)} columns, expected {len(rows[0][1])}")
            rows.append((lineno, row))
    if not rows:
        raise ParseError(path, None, "empty matrix file")
    mat = np.array([r for _, r in rows], dtype=bool)
    if mat.shape[0] != mat.shape[1]:
        raise ParseError(path, rows[-1][0], f"matrix is {mat.shape[0]}x{mat.shape[1]}, not square")
    return mat


def _read_edgelist(path: Path, n_nodes: int | None) -> tuple[list, int]:
    edges = []
    biggest = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise ParseError(path, lineno, "expected two node labels 'i j'")
            try:
                i, j = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ParseError(path, lineno, f"non-integer node label in {line!r}") from None
            if i < 1 or j < 1:
                raise ParseError(path, lineno, "node labels are 1-based")
            if n_nodes is not None and max(i, j) > n_nodes:
                raise ParseError(path, lineno, f"node label exceeds n_nodes={n_nodes}")
            biggest = max(biggest, i, j)
            edges.append((lineno, i - 1, j - 1))
    return edges, biggest


def _symmetrize(mat: np.ndarray, rule: str, path: Path) -> np.ndarray:
    if rule == "and":
        return mat & mat.T
    if rule == "or":
        return mat | mat.T
    iu, ju = pair_nodes(mat.shape[0])
    bad = np.flatnonzero(mat[iu, ju] != mat[ju, iu])
    if bad.size:
        raise ParseError(path, int(iu[bad[0]]) + 1,
                         f"asymmetric entry ({iu[bad[0]] + 1}, {ju[bad[0]] + 1}) with rule 'asis'")
    return mat


def load_layer(path, fmt: str = "matrix", rule: str = "and", n_nodes: int | None = None) -> np.ndarray:
    """One symmetric boolean adjacency matrix from a layer file."""
    path = Path(path)
    rule = rule.lower()
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}")
    if fmt == "matrix":
        mat = _read_matrix(path)
        if n_nodes is not None and mat.shape[0] != n_nodes:
            raise ParseError(path, None, f"matrix has {mat.shape[0]} nodes, expected {n_nodes}")
    elif fmt == "edgelist":
        edges, biggest = _read_edgelist(path, n_nodes)
        n = n_nodes if n_nodes is not None else biggest
        mat = np.zeros((n, n), dtype=bool)
        for _, i, j in edges:
            mat[i, j] = True
            if rule == "asis":
                mat[j, i] = True
    else:
        raise ValueError("fmt must be 'matrix' or 'edgelist'")
    np.fill_diagonal(mat, False)
    return _symmetrize(mat, rule, path)


def load_multilayer(paths, fmt: str = "matrix", rule: str = "and",
                    n_nodes: int | None = None) -> MultilayerNetwork:
    """Stack layer files, in the given order, into a multilayer network.

    For edge lists without ``n_nodes`` the node count is the largest label
    seen in any layer.
    """
    paths = [Path(p) for p in paths]
    if not paths:
        raise ValueError("at least one layer file is required")
    if fmt == "edgelist" and n_nodes is None:
        n_nodes = max(_read_edgelist(p, None)[1] for p in paths)
    layers = [load_layer(p, fmt, rule, n_nodes) for p in paths]
    n = layers[0].shape[0]
    for p, layer in zip(paths, layers):
        if layer.shape[0] != n:
            raise ParseError(p, None, f"layer has {layer.shape[0]} nodes, first layer has {n}")
    return MultilayerNetwork.from_adjacency(np.stack(layers).astype(np.uint8))


def save_network(path, network, max_order: int | None = None) -> None:
    """Write a multilayer or basis network in the versioned edge-list format."""
    iu, ju = pair_nodes(network.n_nodes)
    if isinstance(network, MultilayerNetwork):
        kind, values = "multilayer", network.codes
        header = {"n_layers": network.n_layers}
    elif isinstance(network, BasisNetwork):
        kind, values = "basis", network.edges
        header = {}
    else:
        raise TypeError("network must be a MultilayerNetwork or BasisNetwork")
    sel = np.flatnonzero(values)
    header = {"format": NETWORK_FORMAT, "format_version": FORMAT_VERSION, "kind": kind,
              "n_nodes": network.n_nodes, **header, "n_dyads": int(sel.size)}
    if max_order is not None:
        header["max_order"] = int(max_order)
    lines = [json.dumps(header, sort_keys=True)]
    for s in sel:
        row = f"{iu[s] + 1} {ju[s] + 1}"
        if kind == "multilayer":
            code = int(values[s])
            row += " " + "".join(str((code >> k) & 1) for k in range(network.n_layers))
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_network_header(path) -> dict:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError:
        raise FormatVersionError(f"{path}: missing or corrupted header") from None
    if not isinstance(header, dict) or header.get("format") != NETWORK_FORMAT:
        raise FormatVersionError(f"{path}: not a {NETWORK_FORMAT} file")
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatVersionError(
            f"{path}: format_version {header.get('format_version')!r} is not supported "
            f"(expected {FORMAT_VERSION})")
    return header


def load_network(path):
    """Inverse of :func:`save_network`."""
    path = Path(path)
    header = read_network_header(path)
    try:
        kind, n = header["kind"], int(header["n_nodes"])
        n_dyads = int(header["n_dyads"])
        n_layers = int(header["n_layers"]) if kind == "multilayer" else None
    except (KeyError, TypeError, ValueError):
        raise FormatVersionError(f"{path}: incomplete header") from None
    values = np.zeros(n_pairs(n), dtype=np.uint32)
    body = path.read_text(encoding="utf-8").splitlines()[1:]
    body = [(k + 2, ln) for k, ln in enumerate(body) if ln.strip()]
    if len(body) != n_dyads:
        raise FormatVersionError(f"{path}: truncated file, expected {n_dyads} dyads, found {len(body)}")
    for lineno, line in body:
        tokens = line.split()
        try:
            i, j = int(tokens[0]) - 1, int(tokens[1]) - 1
            if kind == "multilayer":
                bits = tokens[2]
                if len(bits) != n_layers or set(bits) - {"0", "1"}:
                    raise ValueError
                code = sum(1 << k for k, b in enumerate(bits) if b == "1")
            else:
                code = 1
            values[pair_index(i, j, n)] = code
        except (IndexError, ValueError):
            raise ParseError(path, lineno, f"malformed dyad line {line!r}") from None
    if kind == "multilayer":
        return MultilayerNetwork(n, n_layers, values)
    if kind == "basis":
        return BasisNetwork(n, values.astype(bool))
    raise FormatVersionError(f"{path}: unknown network kind {kind!r}")


def fit_to_dict(result) -> dict:
    idx = result.index
    return {
        "format": FIT_FORMAT, "format_version": FORMAT_VERSION,
        "objective": result.objective, "n_layers": idx.n_layers, "max_order": idx.max_order,
        "subsets": [list(s) for s in idx.subsets],
        "theta_hat": result.theta_hat.tolist(), "std_err": result.std_err.tolist(),
        "info_std_err": None if result.info_std_err is None else result.info_std_err.tolist(),
        "covariance": None if result.covariance is None else result.covariance.tolist(),
        "info_matrix": result.info_matrix.tolist(), "converged": bool(result.converged),
        "iters": int(result.iters), "final_grad_norm": result.final_grad_norm,
        "objective_value": result.objective_value, "n_activated": int(result.n_activated),
    }


def fit_from_dict(d: dict):
    from .estimation import FitResult
    from .model import build_interaction_index
    if d.get("format") != FIT_FORMAT or d.get("format_version") != FORMAT_VERSION:
        raise FormatVersionError("not a supported fit file")
    idx = build_interaction_index(d["n_layers"], d["max_order"])

    def arr(key):
        return None if d.get(key) is None else np.asarray(d[key], dtype=float)

    return FitResult(theta_hat=arr("theta_hat"), std_err=arr("std_err"),
                     info_matrix=arr("info_matrix"), converged=d["converged"], iters=d["iters"],
                     final_grad_norm=d["final_grad_norm"], objective_value=d["objective_value"],
                     objective=d["objective"], index=idx, n_activated=d["n_activated"],
                     covariance=arr("covariance"), info_std_err=arr("info_std_err"))


def save_fit(path, result) -> None:
    Path(path).write_text(json.dumps(fit_to_dict(result), indent=2) + "\n", encoding="utf-8")


def load_fit(path):
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        raise FormatVersionError(f"{path}: not JSON") from None
    return fit_from_dict(d)


LAZEGA_MPLE = (-1.450, -3.334, -2.695, 1.801, 0.218, 2.458)
LAZEGA_LAYERS = ("coworker", "advice", "friendship")


def write_lazega_fixture(directory, seed=0, n_nodes=71, basis_density=0.208,
                         theta=LAZEGA_MPLE, asym_noise=0.02) -> list[Path]:
    """Synthetic stand-in for the Lazega lawyers data.

    Draws a Bernoulli basis network and three layers from ``theta``, then
    writes one directed 0/1 matrix per layer in which every mutual tie is
    reported both ways and a fraction ``asym_noise`` of absent ties is
    reported one way only, so that only the ``"and"`` rule recovers the
    sampled network.
    """
    from .graphgen import BernoulliFixed, make_rng, sample_basis, sample_multilayer
    from .model import build_interaction_index
    rng = make_rng(seed)
    idx = build_interaction_index(3, 2)
    Y, _ = sample_basis(BernoulliFixed(basis_density), n_nodes, rng)
    X = sample_multilayer(Y, theta, idx, rng)
    adj = X.to_adjacency().astype(bool)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, name in enumerate(LAZEGA_LAYERS):
        one_way = np.triu(rng.random((n_nodes, n_nodes)) < asym_noise, 1) & ~adj[k]
        flip = rng.random((n_nodes, n_nodes)) < 0.5
        directed = adj[k] | (one_way & flip) | (one_way & ~flip).T
        path = directory / f"{name}.txt"
        path.write_text("\n".join(" ".join("1" if v else "0" for v in row)
                                  for row in directed) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


__all__ = ["load_layer", "load_multilayer", "save_network", "load_network", "read_network_header",
           "save_fit", "load_fit", "fit_to_dict", "fit_from_dict", "write_lazega_fixture",
           "LAZEGA_MPLE", "LAZEGA_LAYERS", "FORMAT_VERSION"]
