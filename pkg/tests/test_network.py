import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisep.network import (BasisNetwork, MultilayerNetwork, decode_dyad, derive_basis, encode_dyad,
                              is_concordant, n_pairs, pair_index, pair_nodes)


def test_pair_index_matches_lexicographic_order():
    n = 6
    iu, ju = pair_nodes(n)
    for t, (i, j) in enumerate(zip(iu, ju)):
        assert pair_index(i, j, n) == t
        assert pair_index(j, i, n) == t
    assert len(iu) == n_pairs(n) == 15


def test_self_pair_rejected():
    with pytest.raises(ValueError):
        pair_index(2, 2, 5)


def test_encode_decode_roundtrip():
    assert encode_dyad((1, 0, 1)) == 0b101
    assert decode_dyad(0b110, 3) == (0, 1, 1)


def test_derive_basis_examples():
    X = MultilayerNetwork.from_dyads(3, 3, {(0, 1): (1, 0, 0), (0, 2): (0, 0, 0), (1, 2): (1, 1, 1)})
    Y = derive_basis(X)
    assert Y.edge_list() == [(0, 1), (1, 2)]
    assert Y.n_edges == 2
    assert is_concordant(X, Y)


def test_adjacency_roundtrip_and_symmetry():
    rng = np.random.default_rng(0)
    codes = rng.integers(0, 8, n_pairs(7)).astype(np.uint32)
    X = MultilayerNetwork(7, 3, codes)
    adj = X.to_adjacency()
    assert (adj == adj.transpose(0, 2, 1)).all()
    assert (np.diagonal(adj, axis1=1, axis2=2) == 0).all()
    assert MultilayerNetwork.from_adjacency(adj) == X


def test_immutable():
    X = MultilayerNetwork(4, 2)
    with pytest.raises(AttributeError):
        X.n_nodes = 5
    with pytest.raises(ValueError):
        X.codes[0] = 1


def test_codes_out_of_range_rejected():
    with pytest.raises(ValueError):
        MultilayerNetwork(3, 2, [0, 4, 1])


def test_basis_rejects_non_binary():
    with pytest.raises(ValueError):
        BasisNetwork(3, [0, 2, 1])


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 9), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_permutation_preserves_outcome_histogram(n, K, seed):
    rng = np.random.default_rng(seed)
    X = MultilayerNetwork(n, K, rng.integers(0, 2 ** K, n_pairs(n)).astype(np.uint32))
    perm = rng.permutation(n)
    P = X.permute(perm)
    assert np.array_equal(P.outcome_counts(), X.outcome_counts())
    i, j = 0, 1
    assert P.dyad(perm[i], perm[j]) == X.dyad(i, j)
