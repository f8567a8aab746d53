import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pairgraph.core import VariableMatrix
from pairgraph.pairfeat import (
    ANTISYMMETRIC,
    FEATURE_NAMES,
    N_FEATURES,
    DegenerateVariableError,
    discretized_entropy,
    extract_features,
    feature_matrix,
    hsic,
    igci_score,
    igci_slope,
    mirror_features,
    mutual_information,
    pearson,
    spearman,
    standardize_columns,
    write_feature_matrix,
)


def _pearson_by_formula(u, v):
    u, v = np.asarray(u, float), np.asarray(v, float)
    mu, mv = sum(u) / len(u), sum(v) / len(v)
    cov = sum((a - mu) * (b - mv) for a, b in zip(u, v))
    su = math.sqrt(sum((a - mu) ** 2 for a in u))
    sv = math.sqrt(sum((b - mv) ** 2 for b in v))
    return cov / (su * sv)


def _midranks(x):
    # rank by counting: 1 + #smaller + (#ties - 1)/2
    return [1 + sum(y < a for y in x) + (sum(y == a for y in x) - 1) / 2 for a in x]


def test_standardize_examples():
    x = VariableMatrix(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]))
    s = standardize_columns(x).samples
    np.testing.assert_allclose(s[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)
    assert np.all(s[:, 1] == 0.0)
    again = standardize_columns(standardize_columns(x)).samples
    np.testing.assert_allclose(again, s, atol=1e-9)


def test_standardize_moments():
    rng = np.random.default_rng(3)
    s = standardize_columns(VariableMatrix(rng.normal(5, 3, size=(50, 4)))).samples
    assert np.all(np.abs(s.mean(axis=0)) < 1e-9)
    np.testing.assert_allclose(s.std(axis=0, ddof=1), 1.0, atol=1e-9)


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-12)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)
    assert _pearson_by_formula([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)
    assert pearson([1, 1, 1], [1, 2, 3]) == 0.0


def test_spearman_examples():
    assert spearman([1, 2, 3, 4], [10, 20, 25, 100]) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [9, 4, 1]) == pytest.approx(-1.0)
    u, v = [1, 1, 2], [1, 2, 3]
    assert _midranks(u) == [1.5, 1.5, 3]
    expected = _pearson_by_formula(_midranks(u), _midranks(v))
    assert expected == pytest.approx(1.5 / math.sqrt(3), abs=1e-12)
    assert spearman(u, v) == pytest.approx(expected, abs=1e-12)


def test_entropy_examples():
    assert discretized_entropy([4.0, 4.0, 4.0]) == 0.0
    one_per_bin = (np.arange(16) + 0.5) / 16
    assert discretized_entropy(one_per_bin) == pytest.approx(-16 * (1 / 16) * math.log(1 / 16), abs=1e-12)
    assert discretized_entropy([0.0, 0.0, 1.0, 1.0]) == pytest.approx(math.log(2), abs=1e-12)


def test_mutual_information_examples():
    rng = np.random.default_rng(0)
    assert mutual_information(np.ones(20), rng.normal(size=20)) == 0.0
    u = (np.arange(16) + 0.5) / 16
    assert mutual_information(u, u) == pytest.approx(discretized_entropy(u), abs=1e-12)
    a, b = rng.uniform(size=10000), rng.uniform(size=10000)
    assert mutual_information(a, b) < 0.05


def test_hsic_examples():
    rng = np.random.default_rng(1)
    assert hsic(np.full(30, 2.0), rng.normal(size=30)) == pytest.approx(0.0, abs=1e-15)
    for seed in range(20):
        r = np.random.default_rng(seed)
        u = r.normal(size=200)
        assert hsic(u, u) > hsic(u, r.permutation(u))
    u, v = rng.normal(size=120), rng.normal(size=120)
    sigma = rng.permutation(120)
    assert hsic(u, v) == pytest.approx(hsic(u[sigma], v[sigma]), rel=1e-12)


def test_hsic_subsample_is_order_free():
    rng = np.random.default_rng(2)
    u = rng.normal(size=1500)
    v = u**2 + rng.normal(size=1500)
    sigma = rng.permutation(1500)
    assert hsic(u, v) == pytest.approx(hsic(u[sigma], v[sigma]), rel=1e-12)
    assert hsic(u, v) == hsic(v, u)


def test_igci_examples():
    rng = np.random.default_rng(4)
    u = rng.uniform(size=1000)
    assert igci_score(u, u) == 0.0
    assert igci_score(u, 2 * u + 3) == pytest.approx(0.0, abs=1e-9)
    # y = x^2 on [0,1]: the mean log-derivative of the forward map is ln 2 - 1 < 0
    forward, backward = igci_slope(u, u**2), igci_slope(u**2, u)
    assert forward < 0 < backward
    assert igci_score(u, u**2) < 0
    with pytest.raises(DegenerateVariableError, match="degenerate cause variable"):
        igci_slope(np.ones(10), u[:10])


def test_feature_layout():
    assert len(FEATURE_NAMES) == N_FEATURES == 23
    rng = np.random.default_rng(5)
    f = extract_features(rng.normal(size=50), rng.normal(size=50))
    assert len(f) == 23
    assert f.names == FEATURE_NAMES


def test_self_pair_features():
    rng = np.random.default_rng(6)
    u = rng.normal(size=300)
    f = extract_features(u, u)
    assert f["pearson"] == pytest.approx(1.0)
    assert f["entropy_diff"] == 0.0
    assert f["mixed_moment_21"] == 0.0
    assert f["mixed_moment_31"] == 0.0
    assert f["igci"] == 0.0


@pytest.mark.parametrize("n", [40, 800])
def test_swap_symmetry(n):
    rng = np.random.default_rng(n)
    u = rng.normal(size=n)
    v = np.tanh(u) + 0.3 * rng.normal(size=n)
    f, g = extract_features(u, v), extract_features(v, u)
    for k, name in enumerate(FEATURE_NAMES):
        if name in ANTISYMMETRIC:
            assert g.values[k] == -f.values[k], name
        elif name.startswith(("u_", "v_")):
            other = ("v_" if name.startswith("u_") else "u_") + name[2:]
            assert g[other] == f[name], name
        else:
            assert g.values[k] == f.values[k], name
    np.testing.assert_array_equal(mirror_features(f), g.values)


def test_degenerate_pairs():
    rng = np.random.default_rng(7)
    f = extract_features(np.ones(20), rng.normal(size=20))
    assert f["igci"] == 0.0
    assert np.all(np.isfinite(f.values))
    with pytest.raises(DegenerateVariableError):
        extract_features(np.ones(20), np.full(20, 2.0))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.integers(3, 60).map(lambda n: (n, 2)), elements=finite), st.randoms(use_true_random=False))
def test_feature_properties(xy, rnd):
    u, v = xy[:, 0], xy[:, 1]
    if np.ptp(u) == 0 and np.ptp(v) == 0:
        return
    f = extract_features(u, v)
    assert np.all(np.isfinite(f.values))
    for name in ("pearson", "spearman"):
        assert -1.0 <= f[name] <= 1.0
    for name in ("u_entropy", "v_entropy", "mutual_information", "hsic"):
        assert f[name] >= 0.0
    perm = list(range(len(u)))
    rnd.shuffle(perm)
    g = extract_features(u[perm], v[perm])
    np.testing.assert_allclose(g.values, f.values, rtol=1e-9, atol=1e-9)


def test_feature_matrix_file(tmp_path):
    rng = np.random.default_rng(8)
    x = VariableMatrix(rng.normal(size=(30, 3)))
    F = feature_matrix(x)
    assert F.shape == (3, 23)
    path = tmp_path / "features.csv"
    write_feature_matrix(F, 3, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == ["i", "j", *FEATURE_NAMES]
    assert [tuple(map(int, ln.split(",")[:2])) for ln in lines[1:]] == [(0, 1), (0, 2), (1, 2)]
    np.testing.assert_array_equal(np.array([[float(c) for c in ln.split(",")[2:]] for ln in lines[1:]]), F)
