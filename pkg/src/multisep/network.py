"""Containers for multilayer and basis networks.

Both types store one value per unordered node pair ``{i, j}`` (``i < j``) in
lexicographic order, which is the order produced by ``np.triu_indices(n, 1)``.
A multilayer dyad is encoded as a K-bit integer: bit ``k - 1`` holds the edge
indicator of layer ``k``.
"""
from __future__ import annotations

import numpy as np

MAX_LAYERS = 16


def n_pairs(n_nodes: int) -> int:
    return n_nodes * (n_nodes - 1) // 2


def pair_index(i: int, j: int, n_nodes: int) -> int:
    """Position of the 0-based pair ``{i, j}`` in lexicographic order."""
    if i == j:
        raise ValueError("self-loops are not representable")
    if i > j:
        i, j = j, i
    return i * n_nodes - i * (i + 1) // 2 + (j - i - 1)


def pair_nodes(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n_nodes, 1)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def encode_dyad(bits) -> int:
    """Integer code of a dyad outcome given as a sequence of 0/1 bits."""
    code = 0
    for k, b in enumerate(bits):
        if b not in (0, 1, True, False):
            raise ValueError(f"dyad bits must be 0/1, got {b!r}")
        code |= int(b) << k
    return code


def decode_dyad(code: int, n_layers: int) -> tuple[int, ...]:
    return tuple((int(code) >> k) & 1 for k in range(n_layers))


class MultilayerNetwork:
    """K binary undirected layers on a common set of ``n_nodes`` nodes.

    Parameters
    ----------
    n_nodes : int
    n_layers : int
    codes : array_like of int, shape (n_nodes * (n_nodes - 1) // 2,)
        Dyad outcomes as K-bit integers in lexicographic pair order.
    """

    __slots__ = ("n_nodes", "n_layers", "codes")

    def __init__(self, n_nodes: int, n_layers: int, codes=None):
        if n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        if not 1 <= n_layers <= MAX_LAYERS:
            raise ValueError(f"n_layers must lie in [1, {MAX_LAYERS}]")
        m = n_pairs(n_nodes)
        if codes is None:
            codes = np.zeros(m, dtype=np.uint32)
        codes = np.asarray(codes)
        if codes.shape != (m,):
            raise ValueError(f"expected {m} dyad codes, got shape {codes.shape}")
        if codes.size and (codes.min() < 0 or codes.max() >= (1 << n_layers)):
            raise ValueError("dyad code out of range for the number of layers")
        object.__setattr__(self, "n_nodes", int(n_nodes))
        object.__setattr__(self, "n_layers", int(n_layers))
        object.__setattr__(self, "codes", _frozen(codes.astype(np.uint32)))

    def __setattr__(self, name, value):
        raise AttributeError("MultilayerNetwork is immutable")

    def __eq__(self, other):
        if not isinstance(other, MultilayerNetwork):
            return NotImplemented
        return (self.n_nodes == other.n_nodes and self.n_layers == other.n_layers
                and np.array_equal(self.codes, other.codes))

    def __hash__(self):
        return hash((self.n_nodes, self.n_layers, self.codes.tobytes()))

    def __repr__(self):
        return (f"MultilayerNetwork(n_nodes={self.n_nodes}, n_layers={self.n_layers}, "
                f"n_active={int(np.count_nonzero(self.codes))})")

    @classmethod
    def from_adjacency(cls, adjacency) -> "MultilayerNetwork":
        """Build from a stack of symmetric 0/1 matrices, shape (K, N, N).

        Only the strict upper triangle is read.
        """
        adj = np.asarray(adjacency)
        if adj.ndim == 2:
            adj = adj[None]
        if adj.ndim != 3 or adj.shape[1] != adj.shape[2]:
            raise ValueError("adjacency must have shape (n_layers, n_nodes, n_nodes)")
        n_layers, n_nodes, _ = adj.shape
        iu, ju = pair_nodes(n_nodes)
        upper = adj[:, iu, ju]
        if not np.isin(upper, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        weights = (1 << np.arange(n_layers, dtype=np.uint32))[:, None]
        codes = (upper.astype(np.uint32) * weights).sum(axis=0)
        return cls(n_nodes, n_layers, codes)

    @classmethod
    def from_dyads(cls, n_nodes: int, n_layers: int, dyads: dict) -> "MultilayerNetwork":
        """Build from ``{(i, j): bits}`` with 0-based node labels."""
        codes = np.zeros(n_pairs(n_nodes), dtype=np.uint32)
        for (i, j), bits in dyads.items():
            if len(bits) != n_layers:
                raise ValueError("dyad length does not match n_layers")
            codes[pair_index(i, j, n_nodes)] = encode_dyad(bits)
        return cls(n_nodes, n_layers, codes)

    def to_adjacency(self) -> np.ndarray:
        iu, ju = pair_nodes(self.n_nodes)
        out = np.zeros((self.n_layers, self.n_nodes, self.n_nodes), dtype=np.uint8)
        for k in range(self.n_layers):
            bit = ((self.codes >> k) & 1).astype(np.uint8)
            out[k, iu, ju] = bit
            out[k, ju, iu] = bit
        return out

    def dyad(self, i: int, j: int) -> tuple[int, ...]:
        return decode_dyad(self.codes[pair_index(i, j, self.n_nodes)], self.n_layers)

    def layer_edge_counts(self) -> np.ndarray:
        return np.array([int(((self.codes >> k) & 1).sum()) for k in range(self.n_layers)])

    def outcome_counts(self) -> np.ndarray:
        """Histogram of dyad codes, length ``2 ** n_layers``."""
        return np.bincount(self.codes, minlength=1 << self.n_layers).astype(np.int64)

    def permute(self, perm) -> "MultilayerNetwork":
        """Relabel nodes: node ``i`` becomes ``perm[i]``."""
        perm = np.asarray(perm)
        iu, ju = pair_nodes(self.n_nodes)
        a, b = perm[iu], perm[ju]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        idx = lo * self.n_nodes - lo * (lo + 1) // 2 + (hi - lo - 1)
        codes = np.zeros_like(self.codes)
        codes[idx] = self.codes
        return MultilayerNetwork(self.n_nodes, self.n_layers, codes)


class BasisNetwork:
    """Single undirected layer marking the activated dyads."""

    __slots__ = ("n_nodes", "edges")

    def __init__(self, n_nodes: int, edges=None):
        m = n_pairs(n_nodes)
        if edges is None:
            edges = np.zeros(m, dtype=bool)
        edges = np.asarray(edges)
        if edges.shape != (m,):
            raise ValueError(f"expected {m} dyads, got shape {edges.shape}")
        if edges.dtype != bool:
            if not np.isin(edges, (0, 1)).all():
                raise ValueError("basis edges must be 0 or 1")
            edges = edges.astype(bool)
        object.__setattr__(self, "n_nodes", int(n_nodes))
        object.__setattr__(self, "edges", _frozen(edges))

    def __setattr__(self, name, value):
        raise AttributeError("BasisNetwork is immutable")

    def __eq__(self, other):
        if not isinstance(other, BasisNetwork):
            return NotImplemented
        return self.n_nodes == other.n_nodes and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n_nodes, self.edges.tobytes()))

    def __repr__(self):
        return f"BasisNetwork(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    @property
    def n_edges(self) -> int:
        """``||Y||_1``, the number of activated dyads."""
        return int(np.count_nonzero(self.edges))

    def density(self) -> float:
        m = n_pairs(self.n_nodes)
        return self.n_edges / m if m else 0.0

    def edge_list(self) -> list[tuple[int, int]]:
        iu, ju = pair_nodes(self.n_nodes)
        sel = np.flatnonzero(self.edges)
        return [(int(iu[s]), int(ju[s])) for s in sel]

    def to_adjacency(self) -> np.ndarray:
        iu, ju = pair_nodes(self.n_nodes)
        out = np.zeros((self.n_nodes, self.n_nodes), dtype=np.uint8)
        out[iu, ju] = self.edges
        out[ju, iu] = self.edges
        return out


def derive_basis(X: MultilayerNetwork) -> BasisNetwork:
    """The unique basis network concordant with ``X``: ``y_ij = 1(x_ij != 0)``."""
    return BasisNetwork(X.n_nodes, X.codes != 0)


def is_concordant(X: MultilayerNetwork, Y: BasisNetwork) -> bool:
    return X.n_nodes == Y.n_nodes and np.array_equal(X.codes != 0, Y.edges)
