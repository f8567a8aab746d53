"""Pair scorer: a multinomial logistic model over pair features.

Class order everywhere is (reverse, none, forward), i.e. labels -1, 0, 1.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import FormatError, PairBeliefs, VariableMatrix, n_pairs, pair_list
from .pairfeat import FEATURE_NAMES, N_FEATURES, extract_features, mirror_features

MODEL_FORMAT = "pairgraph-scorer/1"
CLASSES = (-1, 0, 1)
SUM_TOL_FILE = 1e-6


class ScoringError(RuntimeError):
    def __init__(self, pair: tuple[int, int], cause: Exception):
        self.pair = pair
        super().__init__(f"scoring pair {pair} failed: {cause}")


@dataclass(frozen=True)
class LabeledPairSample:
    u: np.ndarray
    v: np.ndarray
    label: int

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        v = np.asarray(self.v, dtype=float).ravel()
        if u.shape != v.shape:
            raise ValueError("u and v must have equal length")
        if u.size < 3:
            raise ValueError("a labeled pair needs at least 3 samples")
        if self.label not in CLASSES:
            raise ValueError(f"label must be one of {CLASSES}, got {self.label!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True, eq=False)
class PairScorer:
    feature_names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray  # (3, n_features + 1), bias in the last column
    loss_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        k = len(self.feature_names)
        if w.shape != (3, k + 1):
            raise ValueError(f"weights must have shape (3, {k + 1}), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != (k,) or std.shape != (k,):
            raise ValueError("standardization stats do not match the feature count")
        if np.any(std <= 0):
            raise ValueError("standardization std must be positive")
        for name, a in (("weights", w), ("mean", mean), ("std", std)):
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @classmethod
    def zeros(cls) -> "PairScorer":
        return cls(FEATURE_NAMES, np.zeros(N_FEATURES), np.ones(N_FEATURES), np.zeros((3, N_FEATURES + 1)))

    def class_probs(self, features: np.ndarray) -> np.ndarray:
        """Softmax class probabilities for raw feature rows, shape (m, 3)."""
        z = (np.atleast_2d(features) - self.mean) / self.std
        logits = z @ self.weights[:, :-1].T + self.weights[:, -1]
        return softmax(logits)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "classes": list(CLASSES),
            "feature_names": list(self.feature_names),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PairScorer":
        if obj.get("format") != MODEL_FORMAT:
            raise FormatError(f"unsupported model format {obj.get('format')!r}")
        if tuple(obj["feature_names"]) != FEATURE_NAMES:
            raise FormatError("model feature names do not match this library's feature set")
        return cls(tuple(obj["feature_names"]), obj["mean"], obj["std"], obj["weights"])


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def save_scorer(s: PairScorer, path: str | Path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=1) + "\n")


def load_scorer(path: str | Path) -> PairScorer:
    try:
        obj = json.loads(Path(path).read_text())
        return PairScorer.from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: invalid scorer model: {exc}") from None


def fit_multinomial(
    X: np.ndarray,
    y: np.ndarray,
    l2: float,
    iterations: int,
    learning_rate: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, list[float]]:
    """Full-batch gradient descent on L2-regularized softmax cross-entropy.

    ``y`` holds class indices 0..2. Returns (weights, loss per iteration);
    the loss list has ``iterations + 1`` entries, the last one evaluated at
    the returned weights.
    """
    m, k = X.shape
    Xb = np.hstack([X, np.ones((m, 1))])
    Y = np.zeros((m, 3))
    Y[np.arange(m), y] = 1.0
    W = rng.normal(scale=0.01, size=(3, k + 1))
    reg = np.ones((3, k + 1))
    reg[:, -1] = 0.0  # bias is not penalized

    def loss_and_grad(W):
        P = softmax(Xb @ W.T)
        ce = -np.mean(np.log(np.clip(P[np.arange(m), y], 1e-300, None)))
        loss = ce + 0.5 * l2 * np.sum((W * reg) ** 2)
        grad = (P - Y).T @ Xb / m + l2 * W * reg
        return loss, grad

    losses = []
    for _ in range(iterations):
        loss, grad = loss_and_grad(W)
        losses.append(float(loss))
        W = W - learning_rate * grad
    losses.append(float(loss_and_grad(W)[0]))
    return W, losses


def train_scorer(
    samples: Sequence[LabeledPairSample],
    l2: float = 1e-3,
    iterations: int = 500,
    learning_rate: float = 0.1,
    seed: int = 0,
) -> PairScorer:
    """Fit a scorer on labeled pairs, augmented with every pair's mirror."""
    if l2 < 0 or iterations < 1 or learning_rate <= 0:
        raise ValueError("need l2 >= 0, iterations >= 1, learning_rate > 0")
    labels = np.array([s.label for s in samples], dtype=int)
    for c in CLASSES:
        if not np.any(labels == c):
            raise ValueError(f"class absent from training data: {c}")
    F = np.array([extract_features(s.u, s.v).values for s in samples])
    X = np.vstack([F, mirror_features(F)])
    y = np.concatenate([labels, -labels]) + 1
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    rng = np.random.default_rng(seed)
    W, losses = fit_multinomial((X - mean) / std, y, l2, iterations, learning_rate, rng)
    return PairScorer(FEATURE_NAMES, mean, std, W, tuple(losses))


def _symmetrize(forward: np.ndarray, backward: np.ndarray) -> np.ndarray:
    # forward: probs for (u, v); backward: probs for (v, u); class order (rev, none, fwd)
    out = np.empty_like(forward)
    out[..., 0] = (forward[..., 0] + backward[..., 2]) / 2
    out[..., 1] = (forward[..., 1] + backward[..., 1]) / 2
    out[..., 2] = (forward[..., 2] + backward[..., 0]) / 2
    return out


def predict_from_features(s: PairScorer, features: np.ndarray) -> np.ndarray:
    """Symmetrized beliefs for rows of (u, v) features, shape (m, 3)."""
    features = np.atleast_2d(features)
    return _symmetrize(s.class_probs(features), s.class_probs(mirror_features(features)))


def predict_pair(s: PairScorer, u, v) -> tuple[float, float, float]:
    p = predict_from_features(s, extract_features(u, v).values)[0]
    return float(p[0]), float(p[1]), float(p[2])


def pair_features(x: VariableMatrix) -> np.ndarray:
    """Feature rows for every column pair ``i < j``; failures name the pair."""
    pairs = pair_list(x.d)
    F = np.empty((len(pairs), N_FEATURES))
    for k, (i, j) in enumerate(pairs):
        try:
            F[k] = extract_features(x.column(i), x.column(j)).values
        except Exception as exc:
            raise ScoringError((i, j), exc) from exc
    return F


def score_all_pairs(s: PairScorer, x: VariableMatrix) -> PairBeliefs:
    return PairBeliefs(x.d, predict_from_features(s, pair_features(x)))


# --- beliefs file ------------------------------------------------------------


def beliefs_to_json(b: PairBeliefs) -> dict:
    return {
        "d": b.d,
        "pairs": [
            {"i": i, "j": j, "p_rev": float(p[0]), "p_none": float(p[1]), "p_fwd": float(p[2])}
            for (i, j), p in b.items()
        ],
    }


def save_beliefs(b: PairBeliefs, path: str | Path) -> None:
    Path(path).write_text(json.dumps(beliefs_to_json(b), indent=1) + "\n")


def beliefs_from_json(obj: dict, source: str = "<beliefs>") -> PairBeliefs:
    try:
        d = int(obj["d"])
        entries = obj["pairs"]
    except (KeyError, TypeError, ValueError):
        raise FormatError(f"{source}: expected an object with 'd' and 'pairs'") from None
    if d < 2:
        raise FormatError(f"{source}: d must be >= 2")
    triples: dict[tuple[int, int], np.ndarray] = {}
    for e in entries:
        try:
            i, j = int(e["i"]), int(e["j"])
            t = np.array([e["p_rev"], e["p_none"], e["p_fwd"]], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{source}: malformed pair entry {e!r}") from None
        if not (0 <= i < j < d):
            raise FormatError(f"{source}: pair ({i},{j}) invalid for d={d}")
        if (i, j) in triples:
            raise FormatError(f"{source}: duplicate pair ({i},{j})")
        if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
            raise FormatError(f"{source}: pair ({i},{j}) has probabilities outside [0,1]")
        if abs(t.sum() - 1.0) > SUM_TOL_FILE:
            raise FormatError(f"{source}: pair ({i},{j}) probabilities sum to {t.sum()!r}")
        triples[(i, j)] = t
    probs = np.empty((n_pairs(d), 3))
    for k, pair in enumerate(pair_list(d)):
        if pair not in triples:
            raise FormatError(f"{source}: missing pair {pair} for d={d}")
        t = triples[pair]
        probs[k] = t / t.sum()
    return PairBeliefs(d, probs)


def load_beliefs(path: str | Path) -> PairBeliefs:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from None
    return beliefs_from_json(obj, str(path))


# --- training pairs directory ------------------------------------------------


def _read_pair_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from None
    if not rows or [c.strip() for c in rows[0]] != ["a", "b"]:
        raise FormatError(f"{path}: expected header 'a,b'")
    data = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        try:
            a, b = (float(c) for c in row)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected two numeric columns") from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise FormatError(f"{path}:{lineno}: non-finite value")
        data.append((a, b))
    if len(data) < 3:
        raise FormatError(f"{path}: need at least 3 rows")
    arr = np.array(data)
    return arr[:, 0], arr[:, 1]


def load_training_pairs(pairs_dir: str | Path, labels_csv: str | Path) -> list[tuple[str, LabeledPairSample]]:
    """Read ``<pair_id>.csv`` files listed in a ``pair_id,label`` CSV."""
    pairs_dir = Path(pairs_dir)
    with open(labels_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"pair_id", "label"} <= set(reader.fieldnames):
            raise FormatError(f"{labels_csv}: expected header 'pair_id,label'")
        entries = list(reader)
    out = []
    for e in entries:
        pid = e["pair_id"].strip()
        try:
            label = int(e["label"])
        except ValueError:
            raise FormatError(f"{labels_csv}: bad label {e['label']!r} for pair {pid}") from None
        if label not in CLASSES:
            raise FormatError(f"{labels_csv}: label {label} for pair {pid} not in {CLASSES}")
        path = pairs_dir / f"{pid}.csv"
        if not path.is_file():
            raise FormatError(f"{labels_csv}: pair {pid} has no file {path}")
        u, v = _read_pair_csv(path)
        out.append((pid, LabeledPairSample(u, v, label)))
    return out


def write_training_pairs(
    samples: Sequence[tuple[str, LabeledPairSample]], pairs_dir: str | Path, labels_csv: str | Path
) -> None:
    pairs_dir = Path(pairs_dir)
    pairs_dir.mkdir(parents=True, exist_ok=True)
    with open(labels_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair_id", "label"])
        for pid, s in samples:
            w.writerow([pid, s.label])
            with open(pairs_dir / f"{pid}.csv", "w", newline="") as pf:
                pw = csv.writer(pf)
                pw.writerow(["a", "b"])
                pw.writerows(zip(map(repr, s.u.tolist()), map(repr, s.v.tolist())))
