"""Input coercion shared by the estimator and the command line."""
from __future__ import annotations

import numpy as np

from .exceptions import ConcordanceError, DataError
from .network import BasisNetwork, MultilayerNetwork, derive_basis, is_concordant


def check_multilayer(X) -> MultilayerNetwork:
    """Accept a :class:`MultilayerNetwork` or a ``(K, N, N)`` 0/1 array."""
    if isinstance(X, MultilayerNetwork):
        return X
    arr = np.asarray(X)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise DataError(f"expected a (K, N, N) adjacency stack, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise DataError("adjacency entries must be 0 or 1")
    return MultilayerNetwork.from_adjacency(arr.astype(np.uint8))


def as_basis(Y, n_nodes: int | None = None) -> BasisNetwork:
    """Accept a :class:`BasisNetwork` or a square 0/1 adjacency matrix."""
    if isinstance(Y, BasisNetwork):
        return Y
    arr = np.asarray(Y)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or (n_nodes is not None and arr.shape[0] != n_nodes):
        expect = "(N, N)" if n_nodes is None else f"({n_nodes}, {n_nodes})"
        raise DataError(f"basis adjacency must be {expect}, got {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise DataError("adjacency entries must be 0 or 1")
    iu, ju = np.triu_indices(arr.shape[0], 1)
    return BasisNetwork(arr.shape[0], arr[iu, ju].astype(bool))


def check_basis(Y, X: MultilayerNetwork) -> BasisNetwork:
    """Coerce ``Y`` (network, ``(N, N)`` array or None) and check concordance with ``X``."""
    if Y is None:
        return derive_basis(X)
    Y = as_basis(Y, X.n_nodes)
    if not is_concordant(X, Y):
        raise ConcordanceError("X has edges on a dyad outside Y, or Y has an empty activated dyad")
    return Y
