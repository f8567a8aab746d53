import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairgraph.benchgen import gen_er_dag
from pairgraph.core import AcyclicGraph, DirectedGraph, MixedGraph
from pairgraph.metrics import (
    aggregate,
    cpdag_point_metrics,
    expected_edge_counts,
    format_csv,
    format_table,
    point_metrics,
    prob_fpr,
    prob_metrics,
    prob_shd,
    prob_tpr,
)

from oracles import all_dags, all_digraphs, counting_metrics


def test_two_node_worked_example():
    truth = AcyclicGraph(2, {(0, 1)})
    A = np.array([[0, 0.8], [0.1, 0]])
    # only the true-edge term applies: SHD = 1 - 0.8, TP = 0.8, FP = 0.1 over max(1 - 1, 1)
    assert prob_shd(A, truth) == pytest.approx(0.2, abs=1e-12)
    assert prob_tpr(A, truth) == pytest.approx(0.8, abs=1e-12)
    assert prob_fpr(A, truth) == pytest.approx(0.1, abs=1e-12)


def test_zero_and_indicator_adjacency():
    truth = gen_er_dag(6, 7, seed=1)
    assert prob_shd(np.zeros((6, 6)), truth) == 7
    assert prob_shd(truth.indicator(), truth) == 0
    assert prob_tpr(truth.indicator(), truth) == 1.0
    assert prob_fpr(truth.indicator(), truth) == 0.0
    assert prob_tpr(np.zeros((3, 3)), AcyclicGraph(3)) == 0.0


def test_fpr_example():
    truth = AcyclicGraph(3, {(0, 1)})
    A = np.zeros((3, 3))
    A[1, 0], A[0, 2], A[2, 0] = 0.1, 0.2, 0.05
    # FP = 0.1 + (0.2 + 0.05); denominator M - |E| = 3 - 1
    assert prob_fpr(A, truth) == pytest.approx(0.35 / 2, abs=1e-12)


def test_reversed_two_node():
    truth = AcyclicGraph(2, {(0, 1)})
    m = point_metrics(DirectedGraph(2, {(1, 0)}), truth)
    assert (m.shd, m.tpr, m.fpr) == (1.0, 0.0, 1.0)
    m = point_metrics(DirectedGraph(2), truth)
    assert (m.shd, m.tpr, m.fpr) == (1.0, 0.0, 0.0)
    m = point_metrics(truth, truth)
    assert (m.shd, m.tpr, m.fpr) == (0.0, 1.0, 0.0)


def test_point_metrics_match_counting_oracle_exhaustive():
    truths = list(all_dags(3))
    estimates = list(all_digraphs(3))
    assert len(truths) == 25 and len(estimates) == 27
    for truth in truths:
        for g in estimates:
            got = point_metrics(g, truth).as_dict()
            assert got == counting_metrics(g.edges, truth.edges, 3)


def test_point_metrics_match_oracle_d4_sample():
    truths = list(all_dags(4))
    rng = np.random.default_rng(0)
    estimates = list(all_digraphs(4))
    for t in rng.choice(len(truths), 40, replace=False):
        for k in rng.choice(len(estimates), 40, replace=False):
            truth, g = truths[t], estimates[k]
            assert point_metrics(g, truth).as_dict() == counting_metrics(g.edges, truth.edges, 4)


def test_cpdag_examples():
    truth = AcyclicGraph(2, {(0, 1)})
    assert cpdag_point_metrics(MixedGraph(2, undirected={(0, 1)}), truth).tpr == 0.5
    assert cpdag_point_metrics(MixedGraph(2, undirected={(0, 1)}), AcyclicGraph(2)).fpr == 1.0
    truth = gen_er_dag(5, 4, seed=3)
    for g in itertools.islice(all_digraphs(5), 0, 3 ** 10, 997):
        assert cpdag_point_metrics(MixedGraph(5, g.edges), truth) == point_metrics(g, truth)


def test_expected_edge_counts_examples():
    A = np.zeros((3, 3))
    A[0, 1], A[1, 0], A[0, 2] = 0.8, 0.1, 0.5
    c = expected_edge_counts(A, {(0, 1)})
    assert (c.predicted, c.correct, c.reversed) == pytest.approx((1.4, 0.8, 0.1), abs=1e-12)
    truth = gen_er_dag(11, 17, seed=0)
    c = expected_edge_counts(truth.indicator(), truth.edges)
    assert (c.predicted, c.correct, c.reversed) == (17, 17, 0)
    est = gen_er_dag(11, 20, seed=1)
    assert expected_edge_counts(est.indicator(), truth.edges).predicted == len(est.edges)


@st.composite
def adjacency_and_truth(draw):
    d = draw(st.integers(2, 6))
    seed = draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    e = int(rng.integers(1, d * (d - 1) // 2 + 1))
    truth = gen_er_dag(d, e, seed)
    p = rng.dirichlet(np.ones(3), size=(d, d))
    A = np.triu(p[..., 2], 1) + np.triu(p[..., 0], 1).T
    return A, truth


@settings(max_examples=100, deadline=None)
@given(adjacency_and_truth(), st.floats(0, 1))
def test_monotone_and_affine_in_true_entries(case, delta):
    A, truth = case
    i, j = sorted(truth.edges)[0]
    lo, hi = A.copy(), A.copy()
    lo[i, j] = 0.0
    hi[i, j] = delta
    assert prob_shd(hi, truth) <= prob_shd(lo, truth) + 1e-12
    assert prob_tpr(hi, truth) >= prob_tpr(lo, truth) - 1e-12
    # affine: value at the midpoint is the mean of the endpoints
    mid = A.copy()
    mid[i, j] = delta / 2
    for f in (prob_shd, prob_tpr, prob_fpr):
        assert f(mid, truth) == pytest.approx((f(lo, truth) + f(hi, truth)) / 2, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(adjacency_and_truth(), st.integers(0, 35), st.floats(0, 1))
def test_affine_in_every_entry(case, k, delta):
    A, truth = case
    d = A.shape[0]
    off = [(a, b) for a in range(d) for b in range(d) if a != b]
    a, b = off[k % len(off)]
    vals = []
    for x in (0.0, delta / 2, delta):
        B = A.copy()
        B[a, b] = x
        vals.append(prob_metrics(B, truth))
    for f in ("shd", "tpr", "fpr"):
        y0, y1, y2 = (getattr(v, f) for v in vals)
        assert y1 == pytest.approx((y0 + y2) / 2, abs=1e-12)


def test_aggregate_examples():
    recs = [{"config": "c", "method": "m", "shd_per_node": v} for v in (1.0, 2.0, 3.0)]
    (row,) = aggregate(recs)
    assert row.mean["shd_per_node"] == 2.0
    assert row.stderr["shd_per_node"] == pytest.approx(1 / math.sqrt(3))
    (row,) = aggregate([{"config": "c", "method": "m", "tpr": 1.0}] * 3)
    assert (row.mean["tpr"], row.stderr["tpr"]) == (1.0, 0.0)
    (row,) = aggregate([{"config": "c", "method": "m", "fpr": 0.25}])
    assert (row.mean["fpr"], row.stderr["fpr"]) == (0.25, 0.0)
    with pytest.raises(ValueError):
        aggregate([])


def test_report_formats():
    recs = [{"config": "er_d10", "method": m, "shd_per_node": v, "tpr": 0.5, "fpr": 0.1} for m in ("mlg", "pg") for v in (1.0, 2.0, 3.0)]
    rows = aggregate(recs)
    assert [(r.label, r.method) for r in rows] == [("er_d10", "mlg"), ("er_d10", "pg")]
    table = format_table(rows)
    assert "2.00±0.58" in table
    csv_text = format_csv(rows).splitlines()
    assert csv_text[0].startswith("config,method,reps,shd_per_node_mean,shd_per_node_stderr")
    assert len(csv_text) == 3
