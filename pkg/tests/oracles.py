"""Independent reference computations used by the tests.

Everything here is written with plain Python loops over explicit layer
tuples, without the bit-code tables used in the package.
"""
import itertools
import math

import numpy as np


def subsets(K, H):
    out = []
    for h in range(1, H + 1):
        out.extend(itertools.combinations(range(1, K + 1), h))
    return out


def stat(x, subs):
    return [int(all(x[k - 1] for k in s)) for s in subs]


def outcomes(K):
    """Nonzero layer tuples, ordered by their binary code with layer 1 as the low bit."""
    return [tuple((c >> k) & 1 for k in range(K)) for c in range(1, 2 ** K)]


def pmf(theta, K, H):
    subs = subsets(K, H)
    w = [math.exp(sum(t * v for t, v in zip(theta, stat(x, subs)))) for x in outcomes(K)]
    z = sum(w)
    return [v / z for v in w]


def loglik(theta, dyads, K, H):
    """Sum of per-dyad log probabilities over the activated dyads in ``dyads``."""
    subs = subsets(K, H)
    table = dict(zip(outcomes(K), pmf(theta, K, H)))
    total = 0.0
    for x in dyads:
        if any(x):
            total += math.log(table[tuple(x)])
    del subs
    return total


def log_pseudolik(theta, dyads, K, H):
    subs = subsets(K, H)
    total = 0.0
    for x in dyads:
        if not any(x):
            continue
        for k in range(1, K + 1):
            others = [x[l - 1] for l in range(1, K + 1) if l != k]
            if not any(others):
                continue
            eta = sum(t for t, s in zip(theta, subs) if k in s and all(x[l - 1] for l in s if l != k))
            xk = x[k - 1]
            total += xk * eta - math.log1p(math.exp(eta))
    return total


def info(theta, K, H):
    subs = subsets(K, H)
    probs = pmf(theta, K, H)
    S = np.array([stat(x, subs) for x in outcomes(K)], dtype=float)
    mean = sum(p * s for p, s in zip(probs, S))
    return sum(p * np.outer(s - mean, s - mean) for p, s in zip(probs, S))


def central_gradient(f, theta, h=1e-5):
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))
