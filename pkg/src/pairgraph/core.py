"""Domain types and graph primitives.

Nodes are identified by their 0-based column index; column names are
carried along as metadata only. Every type validates its invariants on
construction and is treated as immutable afterwards (numpy buffers are
marked read-only).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

PROB_SUM_TOL = 1e-9


class GraphError(ValueError):
    """A graph violates a structural invariant."""


class CycleError(GraphError):
    """Raised when an operation requiring acyclicity meets a cycle."""

    def __init__(self, cycle: Sequence[int]):
        self.cycle = list(cycle)
        path = " -> ".join(str(v) for v in self.cycle + self.cycle[:1])
        super().__init__(f"graph contains a directed cycle: {path}")


class FormatError(ValueError):
    """An input file does not conform to its declared format."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def n_pairs(d: int) -> int:
    return d * (d - 1) // 2


def pair_list(d: int) -> list[tuple[int, int]]:
    """All unordered pairs ``i < j`` in lexicographic order."""
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def pair_index(i: int, j: int, d: int) -> int:
    """Position of pair ``(i, j)``, ``i < j``, in :func:`pair_list` order."""
    return i * d - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True, eq=False)
class VariableMatrix:
    samples: np.ndarray
    column_names: tuple[str, ...] | None = None

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"samples must be a 2-d matrix, got shape {x.shape}")
        n, d = x.shape
        if n < 2 or d < 2:
            raise ValueError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
        if not np.all(np.isfinite(x)):
            r, c = np.argwhere(~np.isfinite(x))[0]
            raise ValueError(f"non-finite sample at row {r}, column {c}")
        object.__setattr__(self, "samples", _frozen(x))
        if self.column_names is not None:
            names = tuple(str(s) for s in self.column_names)
            if len(names) != d:
                raise ValueError(f"{len(names)} column names for {d} columns")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.samples[:, j]


@dataclass(frozen=True, eq=False)
class PairBeliefs:
    """Categorical beliefs ``(p_rev, p_none, p_fwd)`` for every pair ``i < j``.

    ``probs`` has shape ``(d(d-1)/2, 3)`` with rows in lexicographic pair
    order and columns in class order (reverse, none, forward).
    """

    d: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        m = n_pairs(self.d)
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if p.shape != (m, 3):
            raise ValueError(f"expected {m} probability triples for d={self.d}, got shape {p.shape}")
        for k, (i, j) in enumerate(pair_list(self.d)):
            row = p[k]
            if not np.all(np.isfinite(row)) or np.any(row < 0) or np.any(row > 1):
                raise ValueError(f"pair ({i},{j}): probabilities {tuple(row)} outside [0,1]")
            if abs(row.sum() - 1.0) > PROB_SUM_TOL:
                raise ValueError(f"pair ({i},{j}): probabilities sum to {row.sum()!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def from_dict(cls, d: int, triples: dict[tuple[int, int], Sequence[float]]) -> "PairBeliefs":
        probs = np.empty((n_pairs(d), 3))
        for k, pair in enumerate(pair_list(d)):
            if pair not in triples:
                raise ValueError(f"missing belief for pair {pair}")
            probs[k] = triples[pair]
        return cls(d, probs)

    @classmethod
    def uniform(cls, d: int) -> "PairBeliefs":
        return cls(d, np.full((n_pairs(d), 3), 1.0 / 3.0))

    def triple(self, i: int, j: int) -> tuple[float, float, float]:
        """Beliefs for the pair, oriented so that "forward" means ``i -> j``."""
        if i == j:
            raise ValueError("no belief for a self-pair")
        if i < j:
            r, z, f = self.probs[pair_index(i, j, self.d)]
            return float(r), float(z), float(f)
        r, z, f = self.probs[pair_index(j, i, self.d)]
        return float(f), float(z), float(r)

    def items(self) -> Iterator[tuple[tuple[int, int], np.ndarray]]:
        return zip(pair_list(self.d), self.probs)

    def __len__(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True, eq=False)
class WeightedAdjacency:
    """``A[i, j]`` is the probability of the directed edge ``i -> j``."""

    A: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.A, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
            raise ValueError("adjacency entries must lie in [0,1]")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency diagonal must be zero")
        object.__setattr__(self, "A", _frozen(a))

    @property
    def d(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class DirectedGraph:
    d: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.d < 1:
            raise GraphError(f"d must be positive, got {self.d}")
        for i, j in edges:
            if not (0 <= i < self.d and 0 <= j < self.d):
                raise GraphError(f"edge ({i},{j}) out of range for d={self.d}")
            if i == j:
                raise GraphError(f"self-loop on node {i}")
            if (j, i) in edges:
                raise GraphError(f"edges ({i},{j}) and ({j},{i}) form a 2-cycle")

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.d)]
        for i, j in self.edges:
            out[i].append(j)
        for c in out:
            c.sort()
        return out

    def parents(self, j: int) -> list[int]:
        return sorted(i for i, k in self.edges if k == j)

    def indicator(self) -> np.ndarray:
        a = np.zeros((self.d, self.d))
        for i, j in self.edges:
            a[i, j] = 1.0
        return a

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class AcyclicGraph(DirectedGraph):
    def __post_init__(self):
        super().__post_init__()
        cycle = find_cycle(self)
        if cycle is not None:
            raise CycleError(cycle)

    @classmethod
    def from_digraph(cls, g: DirectedGraph) -> "AcyclicGraph":
        return cls(g.d, g.edges)


@dataclass(frozen=True)
class MixedGraph:
    """Directed edges plus undirected ones, as emitted by CPDAG learners."""

    d: int
    directed: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    undirected: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        directed = frozenset((int(i), int(j)) for i, j in self.directed)
        undirected = frozenset((min(int(i), int(j)), max(int(i), int(j))) for i, j in self.undirected)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)
        DirectedGraph(self.d, directed)
        for i, j in undirected:
            if i == j or not (0 <= i < self.d and 0 <= j < self.d):
                raise GraphError(f"invalid undirected edge ({i},{j}) for d={self.d}")
            if (i, j) in directed or (j, i) in directed:
                raise GraphError(f"pair ({i},{j}) is both directed and undirected")

    def indicator(self) -> np.ndarray:
        a = np.zeros((self.d, self.d))
        for i, j in self.directed:
            a[i, j] = 1.0
        for i, j in self.undirected:
            a[i, j] = a[j, i] = 0.5
        return a

    def to_digraph(self) -> DirectedGraph:
        if self.undirected:
            raise GraphError("graph has undirected edges")
        return DirectedGraph(self.d, self.directed)


@dataclass(frozen=True)
class TopologicalOrder:
    order: tuple[int, ...]
    position: tuple[int, ...] = ()

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        d = len(order)
        if sorted(order) != list(range(d)):
            raise ValueError(f"order {order} is not a permutation of 0..{d - 1}")
        position = [0] * d
        for k, v in enumerate(order):
            position[v] = k
        if self.position and tuple(self.position) != tuple(position):
            raise ValueError("position is not the inverse of order")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "position", tuple(position))

    @property
    def d(self) -> int:
        return len(self.order)

    def before(self, i: int, j: int) -> bool:
        return self.position[i] < self.position[j]


@dataclass(frozen=True, eq=False)
class OrderedEdgeBeliefs:
    """Edge probabilities for ordered pairs consistent with a topological order.

    ``P[i, j]`` holds p(i -> j) when ``i`` precedes ``j`` in ``order``;
    every other entry is zero.
    """

    order: TopologicalOrder
    P: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.P, dtype=float)
        d = self.order.d
        if p.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ValueError("ordered edge probabilities must lie in [0,1]")
        pos = np.asarray(self.order.position)
        backward = pos[:, None] >= pos[None, :]
        if np.any(p[backward] != 0):
            raise ValueError("probability mass on a pair that violates the order")
        object.__setattr__(self, "P", _frozen(p))

    @property
    def d(self) -> int:
        return self.order.d

    def ordered_pairs(self) -> list[tuple[int, int]]:
        o = self.order.order
        return [(o[a], o[b]) for a in range(len(o)) for b in range(a + 1, len(o))]

    def prob(self, i: int, j: int) -> float:
        if not self.order.before(i, j):
            raise ValueError(f"({i},{j}) is not ordered along the topological order")
        return float(self.P[i, j])


def find_cycle(g: DirectedGraph) -> list[int] | None:
    """Return the node sequence of one directed cycle, or None."""
    children = g.children()
    state = [0] * g.d  # 0 unseen, 1 on stack, 2 done
    for root in range(g.d):
        if state[root]:
            continue
        stack = [(root, iter(children[root]))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
            elif state[nxt] == 1:
                return path[path.index(nxt):]
            elif state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(children[nxt])))
    return None


def has_cycle(g: DirectedGraph) -> bool:
    return find_cycle(g) is not None


def toposort(g: DirectedGraph) -> TopologicalOrder:
    """Kahn's algorithm, emitting the smallest available index first.

    Raises :class:`CycleError` naming one cycle if ``g`` is cyclic.
    """
    indeg = [0] * g.d
    children = g.children()
    for i, j in g.edges:
        indeg[j] += 1
    heap = [v for v in range(g.d) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) < g.d:
        raise CycleError(find_cycle(g) or [])
    return TopologicalOrder(tuple(order))


# --- edge-list TSV -----------------------------------------------------------


def format_edge_list(g: DirectedGraph | MixedGraph) -> str:
    lines = [f"#d={g.d}"]
    if isinstance(g, MixedGraph):
        lines += [f"{i}\t{j}" for i, j in sorted(g.directed)]
        lines += [f"{i}\t{j}\tu" for i, j in sorted(g.undirected)]
    else:
        lines += [f"{i}\t{j}" for i, j in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def write_edge_list(g: DirectedGraph | MixedGraph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))


def parse_edge_list(text: str, source: str = "<edge list>") -> MixedGraph:
    d = None
    directed: list[tuple[int, int]] = []
    undirected: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#d="):
                try:
                    d = int(line[3:])
                except ValueError:
                    raise FormatError(f"{source}:{lineno}: bad node count {line!r}") from None
            continue
        cols = line.split("\t")
        if len(cols) not in (2, 3) or (len(cols) == 3 and cols[2] != "u"):
            raise FormatError(f"{source}:{lineno}: expected 'i<TAB>j[<TAB>u]', got {raw!r}")
        try:
            i, j = int(cols[0]), int(cols[1])
        except ValueError:
            raise FormatError(f"{source}:{lineno}: non-integer node in {raw!r}") from None
        (undirected if len(cols) == 3 else directed).append((i, j))
    if d is None:
        raise FormatError(f"{source}: missing '#d=<int>' header")
    try:
        return MixedGraph(d, frozenset(directed), frozenset(undirected))
    except GraphError as exc:
        raise FormatError(f"{source}: {exc}") from None


def read_edge_list(path: str | Path) -> MixedGraph:
    return parse_edge_list(Path(path).read_text(), str(path))


def read_digraph(path: str | Path) -> DirectedGraph:
    g = read_edge_list(path)
    if g.undirected:
        raise FormatError(f"{path}: undirected edges are not allowed here")
    return DirectedGraph(g.d, g.directed)


def read_dag(path: str | Path) -> AcyclicGraph:
    g = read_digraph(path)
    try:
        return AcyclicGraph(g.d, g.edges)
    except CycleError as exc:
        raise FormatError(f"{path}: {exc}") from None

