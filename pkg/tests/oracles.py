"""Brute-force reference implementations, independent of the library paths they check."""

from __future__ import annotations

import itertools
import math

import numpy as np

from pairgraph.core import AcyclicGraph, CycleError, DirectedGraph


def all_digraphs(d):
    """Every 2-cycle-free digraph: each unordered pair is absent, i->j or j->i."""
    pairs = list(itertools.combinations(range(d), 2))
    for status in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = set()
        for (i, j), s in zip(pairs, status):
            if s == 1:
                edges.add((i, j))
            elif s == 2:
                edges.add((j, i))
        yield DirectedGraph(d, frozenset(edges))


def is_acyclic_by_permutation(g):
    """A digraph is acyclic iff some node permutation orders all its edges forward."""
    for perm in itertools.permutations(range(g.d)):
        pos = {v: k for k, v in enumerate(perm)}
        if all(pos[i] < pos[j] for i, j in g.edges):
            return True
    return False


def all_dags(d):
    for g in all_digraphs(d):
        if is_acyclic_by_permutation(g):
            yield AcyclicGraph(d, g.edges)


def counting_metrics(est_edges, truth_edges, d):
    """SHD/TPR/FPR by counting edge-set cases pair by pair."""
    shd = tp = fp = 0
    for i, j in itertools.combinations(range(d), 2):
        if (i, j) in truth_edges or (j, i) in truth_edges:
            true = (i, j) if (i, j) in truth_edges else (j, i)
            rev = (true[1], true[0])
            if true in est_edges:
                tp += 1
            else:
                shd += 1  # missing or reversed
            if rev in est_edges:
                fp += 1
        else:
            extra = ((i, j) in est_edges) + ((j, i) in est_edges)
            shd += extra
            fp += extra
    m = d * (d - 1) // 2
    e = len(truth_edges)
    return {
        "shd": float(shd),
        "shd_per_node": shd / d,
        "tpr": tp / max(e, 1),
        "fpr": fp / max(m - e, 1),
    }


def log_prob_by_enumeration(beliefs, g):
    """Product over pairs of the class probability selected by g, in log space."""
    total = 0.0
    for (i, j), p in beliefs.items():
        if (i, j) in g.edges:
            q = p[2]
        elif (j, i) in g.edges:
            q = p[0]
        else:
            q = p[1]
        total += math.log(q) if q > 0 else -math.inf
    return total


def ordered_log_prob(P, order, edges):
    total = 0.0
    for a, b in itertools.combinations(order, 2):
        p = P[a, b] if (a, b) in edges else 1.0 - P[a, b]
        total += math.log(p) if p > 0 else -math.inf
    return total


def order_consistent_graphs(order):
    pairs = list(itertools.combinations(order, 2))
    for mask in itertools.product((0, 1), repeat=len(pairs)):
        yield frozenset(p for p, m in zip(pairs, mask) if m)


def reaches(edges, src, dst):
    stack, seen = [src], {src}
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        for a, b in edges:
            if a == v and b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def random_beliefs_probs(rng, m, sparsity=0.0):
    """``m`` random categorical triples; with ``sparsity`` > 0 some entries are exactly zero."""
    p = rng.dirichlet(np.ones(3), size=m)
    if sparsity:
        p[rng.random((m, 3)) < sparsity] = 0.0
        empty = p.sum(axis=1) == 0
        p[empty, 1] = 1.0
        p = p / p.sum(axis=1, keepdims=True)
    return p


def concentrated_probs(g):
    """Beliefs with probability 1 on g's edge status for every pair."""
    d = g.d
    probs = []
    for i, j in itertools.combinations(range(d), 2):
        if (i, j) in g.edges:
            probs.append((0.0, 0.0, 1.0))
        elif (j, i) in g.edges:
            probs.append((1.0, 0.0, 0.0))
        else:
            probs.append((0.0, 1.0, 0.0))
    return np.array(probs)


def assert_acyclic(g):
    try:
        AcyclicGraph(g.d, g.edges)
    except CycleError as exc:  # pragma: no cover - failure path
        raise AssertionError(str(exc)) from None
