"""Random ground-truth DAGs, nonlinear SEM data and benchmark suites."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import AcyclicGraph, VariableMatrix, n_pairs, toposort, write_edge_list
from .pairfeat import standardize_columns
from .scorer import LabeledPairSample

log = logging.getLogger(__name__)

HIDDEN_UNITS = 100
WEIGHT_RANGE = (0.5, 2.0)
MODELS = ("er", "sf")


@dataclass(frozen=True)
class BenchmarkConfig:
    d: int
    edges: int
    n: int
    model: str = "er"
    reps: int = 1
    seed: int = 0

    def __post_init__(self):
        model = self.model.lower()
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if not 1 <= self.edges <= n_pairs(self.d):
            raise ValueError(f"edges must be in [1, {n_pairs(self.d)}] for d={self.d}, got {self.edges}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")

    @property
    def label(self) -> str:
        return f"{self.model}_d{self.d}_e{self.edges}_n{self.n}"


def paper_grid(reps: int = 10, seed: int = 0) -> list[BenchmarkConfig]:
    """The 16 synthetic configurations: d in {10,20}, e in {d,4d}, n in {200,1000}, ER/SF."""
    return [
        BenchmarkConfig(d, k * d, n, model, reps, seed)
        for model in MODELS
        for d in (10, 20)
        for k in (1, 4)
        for n in (200, 1000)
    ]


def _check_edge_count(d: int, e: int) -> None:
    if not 1 <= e <= n_pairs(d):
        raise ValueError(f"edge count {e} infeasible for d={d} (need 1..{n_pairs(d)})")


def gen_er_dag(d: int, e: int, seed) -> AcyclicGraph:
    """``e`` uniformly chosen pairs, oriented along a random node permutation."""
    _check_edge_count(d, e)
    rng = np.random.default_rng(seed)
    pos = np.empty(d, dtype=int)
    pos[rng.permutation(d)] = np.arange(d)
    iu, ju = np.triu_indices(d, k=1)
    chosen = rng.choice(iu.size, size=e, replace=False)
    edges = set()
    for k in chosen:
        i, j = int(iu[k]), int(ju[k])
        edges.add((i, j) if pos[i] < pos[j] else (j, i))
    return AcyclicGraph(d, frozenset(edges))


def gen_sf_dag(d: int, e: int, seed) -> AcyclicGraph:
    """Preferential attachment (degree + 1), edges from earlier to later arrivals.

    Nodes arrive in a random order; each attaches to ``round(e/d)`` earlier
    nodes. The edge set is then trimmed, or topped up with random
    earlier-to-later pairs, to exactly ``e`` edges.
    """
    _check_edge_count(d, e)
    rng = np.random.default_rng(seed)
    m = max(1, int(round(e / d)))
    arrival = rng.permutation(d)
    degree = np.zeros(d)
    edges: list[tuple[int, int]] = []
    for k in range(1, d):
        new = int(arrival[k])
        earlier = arrival[:k]
        w = degree[earlier] + 1.0
        targets = rng.choice(earlier, size=min(m, k), replace=False, p=w / w.sum())
        for t in sorted(int(t) for t in targets):
            edges.append((t, new))
            degree[t] += 1
            degree[new] += 1
    if len(edges) > e:
        keep = np.sort(rng.choice(len(edges), size=e, replace=False))
        edges = [edges[k] for k in keep]
    elif len(edges) < e:
        present = set(edges)
        spare = [
            (int(arrival[a]), int(arrival[b]))
            for a in range(d)
            for b in range(a + 1, d)
            if (int(arrival[a]), int(arrival[b])) not in present
        ]
        extra = rng.choice(len(spare), size=e - len(edges), replace=False)
        edges += [spare[k] for k in np.sort(extra)]
    return AcyclicGraph(d, frozenset(edges))


def gen_dag(model: str, d: int, e: int, seed) -> AcyclicGraph:
    model = model.lower()
    if model == "er":
        return gen_er_dag(d, e, seed)
    if model == "sf":
        return gen_sf_dag(d, e, seed)
    raise ValueError(f"unknown graph model {model!r}")


def _signed_uniform(rng: np.random.Generator, size) -> np.ndarray:
    w = rng.uniform(*WEIGHT_RANGE, size=size)
    w[rng.random(size) < 0.5] *= -1
    return w


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def sample_sem(g: AcyclicGraph, n: int, seed) -> VariableMatrix:
    """Nonlinear SEM: X_j = MLP_j(parents) + N(0, 1); roots are pure noise.

    Each MLP has one sigmoid hidden layer of 100 units, with hidden and
    output weights of magnitude U[0.5, 2] and random sign.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not isinstance(g, AcyclicGraph):
        g = AcyclicGraph(g.d, g.edges)
    rng = np.random.default_rng(seed)
    X = np.zeros((n, g.d))
    for j in toposort(g).order:
        pa = g.parents(j)
        z = rng.normal(size=n)
        if pa:
            W1 = _signed_uniform(rng, (len(pa), HIDDEN_UNITS))
            W2 = _signed_uniform(rng, HIDDEN_UNITS)
            X[:, j] = _sigmoid(X[:, pa] @ W1) @ W2 + z
        else:
            X[:, j] = z
    return VariableMatrix(X)


def case_seed(base: int, config_index: int, rep: int) -> int:
    return int(np.random.SeedSequence([base, config_index, rep]).generate_state(1)[0])


def _split_seed(seed: int) -> tuple[int, int]:
    graph_ss, data_ss = np.random.SeedSequence(seed).spawn(2)
    return int(graph_ss.generate_state(1)[0]), int(data_ss.generate_state(1)[0])


def write_data_csv(x: VariableMatrix, path: str | Path) -> None:
    names = x.column_names or tuple(f"x{j}" for j in range(x.d))
    lines = [",".join(names)]
    lines += [",".join(repr(float(v)) for v in row) for row in x.samples]
    Path(path).write_text("\n".join(lines) + "\n")


def gen_case(config: BenchmarkConfig, seed: int) -> tuple[AcyclicGraph, VariableMatrix]:
    gseed, dseed = _split_seed(seed)
    g = gen_dag(config.model, config.d, config.edges, gseed)
    x = standardize_columns(sample_sem(g, config.n, dseed))
    return g, x


def gen_suite(configs: Sequence[BenchmarkConfig], out_dir: str | Path) -> dict:
    """Write every (config, repetition) case plus ``manifest.json``.

    Layout: ``<label>/rep<k>/{truth.tsv,data.csv}``. Returns the manifest.
    """
    out_dir = Path(out_dir)
    cases = []
    for ci, cfg in enumerate(configs):
        for r in range(cfg.reps):
            seed = case_seed(cfg.seed, ci, r)
            g, x = gen_case(cfg, seed)
            rel = Path(cfg.label) / f"rep{r}"
            case_dir = out_dir / rel
            try:
                case_dir.mkdir(parents=True, exist_ok=True)
                write_edge_list(g, case_dir / "truth.tsv")
                write_data_csv(x, case_dir / "data.csv")
            except OSError as exc:
                raise OSError(f"writing case {rel}: {exc}") from exc
            log.debug("wrote %s (seed %d)", rel, seed)
            cases.append({
                "label": cfg.label,
                "config_index": ci,
                "rep": r,
                "seed": seed,
                **{k: v for k, v in asdict(cfg).items() if k not in ("reps", "seed")},
                "truth": str(rel / "truth.tsv"),
                "data": str(rel / "data.csv"),
            })
    manifest = {"configs": [asdict(c) for c in configs], "cases": cases}
    try:
        (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"writing manifest in {out_dir}: {exc}") from exc
    return manifest


# --- synthetic training pairs --------------------------------------------------

_MECHANISMS = ("square", "cube", "tanh", "mlp")


def _mechanism(kind: str, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if kind == "square":
        return u**2
    if kind == "cube":
        return u**3
    if kind == "tanh":
        return np.tanh(2.0 * u)
    W1 = _signed_uniform(rng, (1, HIDDEN_UNITS))
    W2 = _signed_uniform(rng, HIDDEN_UNITS)
    return _sigmoid(u[:, None] @ W1) @ W2


def gen_training_pairs(
    per_class: int, n: int, seed, mechanisms: Sequence[str] = ("square",), noise: float = 0.5
) -> list[tuple[str, LabeledPairSample]]:
    """Balanced labeled pairs: forward ``v = f(u) + e``, its swap, and independent pairs.

    Each effect is standardized before noise of scale ``noise`` is added, so
    the noise level is comparable across mechanisms.
    """
    for kind in mechanisms:
        if kind not in _MECHANISMS:
            raise ValueError(f"unknown mechanism {kind!r}; choose from {_MECHANISMS}")
    rng = np.random.default_rng(seed)
    out = []
    for k in range(3 * per_class):
        label = (1, -1, 0)[k % 3]
        cause = rng.normal(size=n)
        if label == 0:
            a, b = cause, rng.normal(size=n)
        else:
            kind = mechanisms[(k // 3) % len(mechanisms)]
            f = _mechanism(kind, cause, rng)
            sd = f.std()
            f = (f - f.mean()) / (sd if sd > 0 else 1.0)
            effect = f + noise * rng.normal(size=n)
            a, b = (cause, effect) if label == 1 else (effect, cause)
        out.append((f"pair{k:04d}", LabeledPairSample(a, b, label)))
    return out
