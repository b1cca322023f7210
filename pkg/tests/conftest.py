"""Shared fixtures and independent oracles used across the suite.

The oracles here deliberately avoid the library's own computation paths:
spanning trees come from brute-force subset enumeration, occupancy laws
from enumerating every ball placement, count laws from enumerating every
indicator outcome.
"""

import itertools

import numpy as np
import pytest

import detperm as dp


@pytest.fixture
def rng():
    return dp.stream(20240817)


def enumerate_spanning_trees(graph):
    """All spanning trees by brute force over edge subsets."""
    n = graph.n_vertices
    pairs = graph._index_pairs()
    trees = []
    for subset in itertools.combinations(range(graph.n_edges), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for e in subset:
            u, v = pairs[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok and len({find(i) for i in range(n)}) == 1:
            trees.append(tuple(subset))
    return trees


def occupancy_pmf_exact(lambda_matrix):
    """Exact joint count pmf of the ball-into-cell model: enumerate every
    placement of each ball into a cell or nowhere."""
    lm = np.atleast_2d(np.asarray(lambda_matrix, dtype=float))
    r = lm.shape[1]
    pmf = {tuple([0] * r): 1.0}
    for row in lm:
        rest = 1.0 - row.sum()
        nxt = {}
        for counts, prob in pmf.items():
            for cell, p in enumerate(list(row) + [rest]):
                if p <= 0:
                    continue
                key = list(counts)
                if cell < r:
                    key[cell] += 1
                key = tuple(key)
                nxt[key] = nxt.get(key, 0.0) + prob * p
        pmf = nxt
    return pmf


def bernoulli_sum_enumeration(lams):
    """Exact count pmf by enumerating all 2^n indicator outcomes."""
    n = len(lams)
    pmf = np.zeros(n + 1)
    for bits in itertools.product([0, 1], repeat=n):
        prob = 1.0
        for b, lam in zip(bits, lams):
            prob *= lam if b else 1 - lam
        pmf[sum(bits)] += prob
    return pmf


def tabulate(values, width=None):
    v = np.asarray(list(values), dtype=np.int64)
    return np.bincount(v, minlength=(width or (v.max() + 1 if v.size else 1)))
