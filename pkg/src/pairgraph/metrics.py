"""Structural metrics for probabilistic and point graph estimates.

The probabilistic metrics take an edge-probability matrix ``A``; point
estimates are scored through their 0/1 indicator matrix (0.5 in both
directions for an undirected edge), so both share one code path.

Note that a reversed true edge adds its reversed mass to FP but does not
add a second SHD term.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import AcyclicGraph, DirectedGraph, MixedGraph, WeightedAdjacency, n_pairs

METRIC_FIELDS = ("shd", "shd_per_node", "tpr", "fpr")
COUNT_FIELDS = ("predicted", "correct", "reversed")
REPORT_FIELDS = ("shd_per_node", "tpr", "fpr", *COUNT_FIELDS)


@dataclass(frozen=True)
class GraphMetrics:
    shd: float
    shd_per_node: float
    tpr: float
    fpr: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_FIELDS}


@dataclass(frozen=True)
class EdgeCounts:
    predicted: float
    correct: float
    reversed: float

    def __post_init__(self):
        if self.correct + self.reversed > self.predicted + 1e-9:
            raise ValueError("correct + reversed exceeds predicted")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in COUNT_FIELDS}


def _matrix(a) -> np.ndarray:
    return a.A if isinstance(a, WeightedAdjacency) else np.asarray(a, dtype=float)


def _check(A: np.ndarray, truth: DirectedGraph) -> None:
    if A.shape != (truth.d, truth.d):
        raise ValueError(f"estimate is {A.shape[0]}x{A.shape[1]} but truth has d={truth.d}")


def _nonadjacent_mask(truth: DirectedGraph) -> np.ndarray:
    adj = truth.indicator()
    adj = adj + adj.T
    mask = np.triu(adj == 0, k=1)
    return mask


def _true_edge_masses(A: np.ndarray, truth: DirectedGraph) -> tuple[float, float]:
    """Sum of A along true edges and along their reversals."""
    src = [i for i, _ in truth.edges]
    dst = [j for _, j in truth.edges]
    return float(A[src, dst].sum()), float(A[dst, src].sum())


def _nonadjacent_mass(A: np.ndarray, truth: DirectedGraph) -> float:
    mask = _nonadjacent_mask(truth)
    return float((A[mask] + A.T[mask]).sum())


def prob_shd(a, truth: DirectedGraph) -> float:
    A = _matrix(a)
    _check(A, truth)
    along, _ = _true_edge_masses(A, truth)
    return (len(truth.edges) - along) + _nonadjacent_mass(A, truth)


def prob_tpr(a, truth: DirectedGraph) -> float:
    A = _matrix(a)
    _check(A, truth)
    along, _ = _true_edge_masses(A, truth)
    return along / max(len(truth.edges), 1)


def prob_fpr(a, truth: DirectedGraph) -> float:
    A = _matrix(a)
    _check(A, truth)
    _, against = _true_edge_masses(A, truth)
    fp = against + _nonadjacent_mass(A, truth)
    return fp / max(n_pairs(truth.d) - len(truth.edges), 1)


def prob_metrics(a, truth: DirectedGraph) -> GraphMetrics:
    shd = prob_shd(a, truth)
    return GraphMetrics(shd, shd / truth.d, prob_tpr(a, truth), prob_fpr(a, truth))


def point_metrics(g: DirectedGraph, truth: AcyclicGraph) -> GraphMetrics:
    if g.d != truth.d:
        raise ValueError(f"estimate has d={g.d} but truth has d={truth.d}")
    return prob_metrics(g.indicator(), truth)


def cpdag_point_metrics(g: MixedGraph | DirectedGraph, truth: AcyclicGraph) -> GraphMetrics:
    """Point metrics where an undirected edge counts 0.5 in each direction."""
    if g.d != truth.d:
        raise ValueError(f"estimate has d={g.d} but truth has d={truth.d}")
    return prob_metrics(g.indicator(), truth)


def expected_edge_counts(a, truth_edges: Iterable[tuple[int, int]]) -> EdgeCounts:
    """Expected predicted / correct / reversed edge counts against a consensus edge list."""
    A = _matrix(a)
    edges = sorted(set(truth_edges))
    for i, j in edges:
        if not (0 <= i < A.shape[0] and 0 <= j < A.shape[0]) or i == j:
            raise ValueError(f"truth edge ({i},{j}) invalid for d={A.shape[0]}")
    correct = sum(float(A[i, j]) for i, j in edges)
    rev = sum(float(A[j, i]) for i, j in edges)
    return EdgeCounts(float(A.sum()), correct, rev)


# --- aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class AggregateRow:
    label: str
    method: str
    reps: int
    mean: Mapping[str, float]
    stderr: Mapping[str, float]


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    if len(values) == 0:
        raise ValueError("cannot aggregate an empty group")
    x = np.asarray(values, dtype=float)
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def aggregate(records: Iterable[Mapping], fields: Sequence[str] = REPORT_FIELDS) -> list[AggregateRow]:
    """Group records by (config, method); mean and standard error per field.

    Fields absent from every record of a group are left out of that row.
    """
    groups: dict[tuple[str, str], list[Mapping]] = defaultdict(list)
    for rec in records:
        groups[(str(rec.get("config", "")), str(rec.get("method", "")))].append(rec)
    if not groups:
        raise ValueError("no metric records to aggregate")
    rows = []
    for (label, method), recs in sorted(groups.items()):
        means, errs = {}, {}
        for f in fields:
            vals = [float(r[f]) for r in recs if r.get(f) is not None]
            if vals:
                means[f], errs[f] = mean_stderr(vals)
        rows.append(AggregateRow(label, method, len(recs), means, errs))
    return rows


def read_records(source: str | Path) -> list[dict]:
    """Metric records from a JSON-lines file or every ``*.jsonl`` under a directory."""
    source = Path(source)
    files = sorted(source.rglob("*.jsonl")) if source.is_dir() else [source]
    records = []
    for path in files:
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            if line.strip():
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: invalid JSON record: {exc}") from None
    return records


def _fmt(mean: float, err: float, digits: int = 2) -> str:
    return f"{mean:.{digits}f}±{err:.{digits}f}"


def format_table(rows: Sequence[AggregateRow], digits: int = 2) -> str:
    fields = [f for f in REPORT_FIELDS if any(f in r.mean for r in rows)]
    header = ["config", "method", "reps", *fields]
    body = [
        [r.label, r.method, str(r.reps), *(_fmt(r.mean[f], r.stderr[f], digits) if f in r.mean else "-" for f in fields)]
        for r in rows
    ]
    widths = [max(len(row[k]) for row in [header, *body]) for k in range(len(header))]
    lines = ["  ".join(c.ljust(w) if k < 2 else c.rjust(w) for k, (c, w) in enumerate(zip(row, widths))) for row in [header, *body]]
    return "\n".join(lines) + "\n"


def format_csv(rows: Sequence[AggregateRow]) -> str:
    fields = [f for f in REPORT_FIELDS if any(f in r.mean for r in rows)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config", "method", "reps", *(c for f in fields for c in (f"{f}_mean", f"{f}_stderr"))])
    for r in rows:
        cells = []
        for f in fields:
            cells += [repr(r.mean[f]), repr(r.stderr[f])] if f in r.mean else ["", ""]
        w.writerow([r.label, r.method, r.reps, *cells])
    return buf.getvalue()
