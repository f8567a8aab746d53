"""Graph estimators built from pair beliefs.

PG    -- independent pair distribution over digraphs (``graph_log_probability``,
         ``sample_digraph``), summarized by ``beliefs_to_adjacency``.
MLG   -- its most likely digraph (``mlg``).
PDAG  -- order-constrained distribution over DAGs under the order recovered
         from a greedy maximum spanning DAG (``ml_order``, ``renormalize``,
         ``dag_log_probability``, ``sample_dag``).
MLDAG -- its most likely DAG (``mldag``).
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    AcyclicGraph,
    DirectedGraph,
    OrderedEdgeBeliefs,
    PairBeliefs,
    TopologicalOrder,
    WeightedAdjacency,
    pair_list,
    toposort,
)

REV, NONE, FWD = 0, 1, 2


def _log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def beliefs_to_adjacency(b: PairBeliefs) -> WeightedAdjacency:
    A = np.zeros((b.d, b.d))
    for (i, j), p in b.items():
        A[i, j] = p[FWD]
        A[j, i] = p[REV]
    return WeightedAdjacency(A)


def graph_log_probability(b: PairBeliefs, g: DirectedGraph) -> float:
    """Log-probability of ``g`` under independent pair beliefs."""
    if g.d != b.d:
        raise ValueError(f"graph has d={g.d}, beliefs have d={b.d}")
    total = 0.0
    for (i, j), p in b.items():
        if (i, j) in g.edges:
            total += _log(p[FWD])
        elif (j, i) in g.edges:
            total += _log(p[REV])
        else:
            total += _log(p[NONE])
    return total


def mlg(b: PairBeliefs) -> DirectedGraph:
    """Per-pair argmax; ties prefer none, then forward, then reverse."""
    edges = []
    for (i, j), p in b.items():
        if p[NONE] >= p[FWD] and p[NONE] >= p[REV]:
            continue
        edges.append((i, j) if p[FWD] >= p[REV] else (j, i))
    return DirectedGraph(b.d, frozenset(edges))


class _Reachability:
    """Transitive closure maintained under edge insertion."""

    def __init__(self, d: int):
        self.reach = np.eye(d, dtype=bool)

    def creates_cycle(self, i: int, j: int) -> bool:
        return bool(self.reach[j, i])

    def add(self, i: int, j: int) -> None:
        # everything reaching i now reaches everything j reaches
        self.reach |= np.outer(self.reach[:, i], self.reach[j, :])


def msdag(a: WeightedAdjacency) -> AcyclicGraph:
    """Greedy maximum spanning DAG.

    A maximum spanning forest over the pairwise weights max(A[i,j], A[j,i])
    is built first, each tree edge oriented towards its heavier direction
    (i -> j for i < j on ties). All remaining directed edges are then tried
    in descending weight order and kept when they close no cycle. Edges of
    zero weight are never added.
    """
    A = a.A
    d = a.d
    parent = list(range(d))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    closure = _Reachability(d)
    edges: set[tuple[int, int]] = set()

    pairs = sorted(pair_list(d), key=lambda e: (-max(A[e[0], e[1]], A[e[1], e[0]]), e))
    for i, j in pairs:
        w = max(A[i, j], A[j, i])
        if w <= 0:
            break
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        parent[ri] = rj
        src, dst = (i, j) if A[i, j] >= A[j, i] else (j, i)
        edges.add((src, dst))
        closure.add(src, dst)

    candidates = [(i, j) for i in range(d) for j in range(d) if i != j and (i, j) not in edges and A[i, j] > 0]
    candidates.sort(key=lambda e: (-A[e[0], e[1]], e))
    for i, j in candidates:
        if not closure.creates_cycle(i, j):
            edges.add((i, j))
            closure.add(i, j)
    return AcyclicGraph(d, frozenset(edges))


def ml_order(b: PairBeliefs) -> TopologicalOrder:
    return toposort(msdag(beliefs_to_adjacency(b)))


def renormalize(b: PairBeliefs, order: TopologicalOrder) -> OrderedEdgeBeliefs:
    """Edge probabilities conditioned on the direction allowed by ``order``.

    For a pair whose earlier node is ``i`` and later node ``j``, the value is
    p(i->j) / (p(i->j) + p(none)), or 0 when both masses vanish.
    """
    if order.d != b.d:
        raise ValueError(f"order has d={order.d}, beliefs have d={b.d}")
    P = np.zeros((b.d, b.d))
    for (i, j), p in b.items():
        if order.before(i, j):
            src, dst, fwd = i, j, p[FWD]
        else:
            src, dst, fwd = j, i, p[REV]
        denom = fwd + p[NONE]
        P[src, dst] = fwd / denom if denom > 0 else 0.0
    return OrderedEdgeBeliefs(order, P)


def _check_consistent(ob: OrderedEdgeBeliefs, g: DirectedGraph) -> None:
    if g.d != ob.d:
        raise ValueError(f"graph has d={g.d}, ordered beliefs have d={ob.d}")
    for i, j in g.edges:
        if not ob.order.before(i, j):
            raise ValueError(f"graph inconsistent with topological order: edge ({i},{j})")


def dag_log_probability(ob: OrderedEdgeBeliefs, g: DirectedGraph) -> float:
    _check_consistent(ob, g)
    total = 0.0
    for i, j in ob.ordered_pairs():
        p = float(ob.P[i, j])
        total += _log(p) if (i, j) in g.edges else _log(1.0 - p)
    return total


def mldag(ob: OrderedEdgeBeliefs) -> AcyclicGraph:
    """Keep every order-consistent edge with probability strictly above 1/2."""
    edges = frozenset((i, j) for i, j in ob.ordered_pairs() if ob.P[i, j] > 0.5)
    return AcyclicGraph(ob.d, edges)


def ordered_adjacency(ob: OrderedEdgeBeliefs) -> WeightedAdjacency:
    """Edge-probability matrix of the order-constrained distribution."""
    return WeightedAdjacency(np.array(ob.P))


def sample_digraph(b: PairBeliefs, seed) -> DirectedGraph:
    rng = np.random.default_rng(seed)
    r = rng.random(len(b))
    cum = np.cumsum(b.probs, axis=1)
    edges = []
    for k, (i, j) in enumerate(pair_list(b.d)):
        if r[k] < cum[k, REV]:
            edges.append((j, i))
        elif r[k] >= cum[k, NONE]:
            edges.append((i, j))
    return DirectedGraph(b.d, frozenset(edges))


def sample_dag(ob: OrderedEdgeBeliefs, seed) -> AcyclicGraph:
    rng = np.random.default_rng(seed)
    pairs = ob.ordered_pairs()
    r = rng.random(len(pairs))
    edges = frozenset((i, j) for k, (i, j) in enumerate(pairs) if r[k] < ob.P[i, j])
    return AcyclicGraph(ob.d, edges)


def pdag(b: PairBeliefs) -> OrderedEdgeBeliefs:
    return renormalize(b, ml_order(b))


def mldag_from_beliefs(b: PairBeliefs) -> AcyclicGraph:
    return mldag(pdag(b))
