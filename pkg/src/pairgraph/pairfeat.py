"""Statistical and information-theoretic features of a variable pair.

The feature vector has a fixed layout (see ``FEATURE_NAMES``): six marginal
statistics for each variable followed by eleven pairwise measures. Every
feature is either symmetric or antisymmetric under swapping the two
arguments; :func:`mirror_features` applies that swap without recomputing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .core import VariableMatrix, pair_list

N_BINS = 16
HSIC_MAX_POINTS = 500
IGCI_FLOOR = np.log(1e-10)

_MARGINAL = ("min", "max", "unique_ratio", "skewness", "kurtosis", "entropy")

FEATURE_NAMES: tuple[str, ...] = (
    *(f"u_{s}" for s in _MARGINAL),
    *(f"v_{s}" for s in _MARGINAL),
    "pearson",
    "abs_pearson",
    "spearman",
    "abs_spearman",
    "mutual_information",
    "hsic",
    "igci",
    "mixed_moment_21",
    "mixed_moment_31",
    "entropy_diff",
    "unique_ratio_diff",
)
N_FEATURES = len(FEATURE_NAMES)

ANTISYMMETRIC = frozenset({"igci", "mixed_moment_21", "mixed_moment_31", "entropy_diff", "unique_ratio_diff"})


class DegenerateVariableError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.names),):
            raise ValueError(f"expected {len(self.names)} values, got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def __len__(self) -> int:
        return len(self.values)


def standardize_columns(x: VariableMatrix) -> VariableMatrix:
    """Zero mean, unit sample std per column; constant columns become zeros."""
    s = x.samples
    mean = s.mean(axis=0)
    centered = s - mean
    std = s.std(axis=0, ddof=1)
    const = np.ptp(s, axis=0) == 0
    out = np.where(const, 0.0, centered / np.where(const, 1.0, std))
    return VariableMatrix(out, x.column_names)


def _as_pair(u, v):
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.size} vs {v.size}")
    if u.size < 2:
        raise ValueError("need at least 2 samples")
    return u, v


def pearson(u, v) -> float:
    u, v = _as_pair(u, v)
    du = u - u.mean()
    dv = v - v.mean()
    su = np.sqrt(np.dot(du, du))
    sv = np.sqrt(np.dot(dv, dv))
    if su == 0 or sv == 0 or np.ptp(u) == 0 or np.ptp(v) == 0:
        return 0.0
    return float(np.clip(np.dot(du, dv) / (su * sv), -1.0, 1.0))


def spearman(u, v) -> float:
    u, v = _as_pair(u, v)
    return pearson(stats.rankdata(u), stats.rankdata(v))


def _bin_index(u: np.ndarray) -> np.ndarray:
    lo, hi = u.min(), u.max()
    if hi == lo:
        return np.zeros(u.size, dtype=int)
    idx = np.floor((u - lo) / (hi - lo) * N_BINS).astype(int)
    return np.clip(idx, 0, N_BINS - 1)


def _entropy_of_counts(counts: np.ndarray) -> float:
    # sorted so the sum does not depend on bin layout (keeps MI symmetric)
    p = np.sort(counts[counts > 0]) / counts.sum()
    return float(-np.sum(p * np.log(p)))


def discretized_entropy(u) -> float:
    """Shannon entropy (nats) of the 16-bin equal-width histogram."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size < 2:
        raise ValueError("need at least 2 samples")
    return _entropy_of_counts(np.bincount(_bin_index(u), minlength=N_BINS))


def mutual_information(u, v) -> float:
    """Plug-in MI (nats) of the 16x16 equal-width joint histogram."""
    u, v = _as_pair(u, v)
    bu, bv = _bin_index(u), _bin_index(v)
    joint = np.bincount(bu * N_BINS + bv, minlength=N_BINS * N_BINS)
    mi = (
        _entropy_of_counts(np.bincount(bu, minlength=N_BINS))
        + _entropy_of_counts(np.bincount(bv, minlength=N_BINS))
        - _entropy_of_counts(joint)
    )
    return max(mi, 0.0)


def _subsample(u: np.ndarray, v: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    # symmetric sort key: the sample is the same for (u, v) and (v, u) and
    # does not depend on row order
    if u.size <= m:
        return u, v
    idx = np.lexsort((np.abs(u - v), u + v))
    pick = idx[np.linspace(0, u.size - 1, m).round().astype(int)]
    return u[pick], v[pick]


def _centered_gram(x: np.ndarray) -> np.ndarray:
    dist = np.abs(x[:, None] - x[None, :])
    iu = np.triu_indices(x.size, k=1)
    width = np.median(dist[iu])
    if not width > 0:
        width = 1.0
    k = np.exp(-(dist**2) / (2.0 * width**2))
    k -= k.mean(axis=0, keepdims=True)
    k -= k.mean(axis=1, keepdims=True)
    return k


def hsic(u, v, max_points: int = HSIC_MAX_POINTS) -> float:
    """Biased HSIC with Gaussian kernels and median-distance bandwidths."""
    u, v = _as_pair(u, v)
    u, v = _subsample(u, v, max_points)
    n = u.size
    k = _centered_gram(u)
    l = _centered_gram(v)
    # tr(HKH L) = <HKH, HLH> for symmetric kernels
    return max(float(np.sum(k * l)) / n**2, 0.0)


def _minmax(x: np.ndarray) -> np.ndarray:
    span = np.ptp(x)
    if span == 0:
        return np.zeros_like(x)
    return (x - x.min()) / span


def igci_slope(u, v) -> float:
    """Mean log-slope of ``v`` against ``u`` after min-max normalization."""
    u, v = _as_pair(u, v)
    if u.size < 3:
        raise ValueError("need at least 3 samples")
    if np.ptp(u) == 0:
        raise DegenerateVariableError("degenerate cause variable")
    x, y = _minmax(u), _minmax(v)
    idx = np.lexsort((y, x))
    dx = np.diff(x[idx])
    dy = np.abs(np.diff(y[idx]))
    keep = dx != 0
    dx, dy = dx[keep], dy[keep]
    terms = np.full(dx.shape, IGCI_FLOOR)
    nz = dy != 0
    terms[nz] = np.log(dy[nz] / dx[nz])
    return float(terms.mean())


def igci_score(u, v) -> float:
    """Antisymmetric IGCI score; more negative favors ``u -> v``."""
    return igci_slope(u, v) - igci_slope(v, u)


def _marginals(u: np.ndarray) -> list[float]:
    with np.errstate(all="ignore"):
        skew = stats.skew(u) if np.ptp(u) > 0 else 0.0
        kurt = stats.kurtosis(u) if np.ptp(u) > 0 else 0.0
    return [
        u.min(),
        u.max(),
        np.unique(u).size / u.size,
        skew,
        kurt,
        discretized_entropy(u),
    ]


def extract_features(u, v) -> FeatureVector:
    u, v = _as_pair(u, v)
    if u.size < 3:
        raise ValueError("need at least 3 samples")
    mu = _marginals(u)
    mv = _marginals(v)
    try:
        igci = igci_score(u, v)
    except DegenerateVariableError:
        if np.ptp(u) == 0 and np.ptp(v) == 0:
            raise
        igci = 0.0
    r = pearson(u, v)
    uv = u * v
    rho = spearman(u, v)
    values = [
        *mu,
        *mv,
        r,
        abs(r),
        rho,
        abs(rho),
        mutual_information(u, v),
        hsic(u, v),
        igci,
        np.mean(uv * u) - np.mean(uv * v),
        np.mean(uv * (u * u)) - np.mean(uv * (v * v)),
        mu[5] - mv[5],
        mu[2] - mv[2],
    ]
    values = np.asarray(values, dtype=float)
    values[~np.isfinite(values)] = 0.0
    return FeatureVector(values)


_SWAP = np.array([FEATURE_NAMES.index(n) for n in (
    *(f"v_{s}" for s in _MARGINAL),
    *(f"u_{s}" for s in _MARGINAL),
    *FEATURE_NAMES[12:],
)])
_SIGN = np.array([-1.0 if n in ANTISYMMETRIC else 1.0 for n in FEATURE_NAMES])


def mirror_features(f: FeatureVector | np.ndarray) -> np.ndarray:
    """Features of the swapped pair ``(v, u)`` given those of ``(u, v)``.

    Works row-wise on a 2-d array of feature vectors.
    """
    values = f.values if isinstance(f, FeatureVector) else np.asarray(f, dtype=float)
    return values[..., _SWAP] * _SIGN


def feature_matrix(x: VariableMatrix) -> np.ndarray:
    """Features for every column pair ``i < j``, in lexicographic order."""
    pairs = pair_list(x.d)
    out = np.empty((len(pairs), N_FEATURES))
    for k, (i, j) in enumerate(pairs):
        out[k] = extract_features(x.column(i), x.column(j)).values
    return out


def write_feature_matrix(features: np.ndarray, d: int, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", *FEATURE_NAMES])
        for (i, j), row in zip(pair_list(d), features):
            w.writerow([i, j, *(repr(float(x)) for x in row)])
