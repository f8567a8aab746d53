"""Command-line front end.

    pairgraph gen       generate a benchmark suite (truth graphs + SEM data)
    pairgraph pairs     generate a synthetic labeled training-pairs directory
    pairgraph train     fit the native pair scorer
    pairgraph score     pair beliefs for every column pair of a data CSV
    pairgraph assemble  PG / MLG / PDAG / MLDAG artifacts from a beliefs file
    pairgraph eval      structural metrics of an estimate against a truth graph
    pairgraph report    mean ± standard error tables over metric records

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import assemble as asm
from .benchgen import BenchmarkConfig, gen_suite, gen_training_pairs, paper_grid
from .core import (
    FormatError,
    GraphError,
    OrderedEdgeBeliefs,
    PairBeliefs,
    TopologicalOrder,
    VariableMatrix,
    WeightedAdjacency,
    read_dag,
    read_edge_list,
    write_edge_list,
)
from .metrics import (
    aggregate,
    expected_edge_counts,
    format_csv,
    format_table,
    prob_metrics,
    read_records,
)
from .pairfeat import standardize_columns, write_feature_matrix
from .scorer import (
    LabeledPairSample,
    ScoringError,
    load_beliefs,
    load_scorer,
    load_training_pairs,
    pair_features,
    predict_pair,
    predict_from_features,
    save_beliefs,
    save_scorer,
    train_scorer,
    write_training_pairs,
)

log = logging.getLogger("pairgraph")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
METHODS = ("pg", "mlg", "pdag", "mldag")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _check_out(path: Path, force: bool) -> None:
    if path.exists() and not force:
        if path.is_dir() and not any(path.iterdir()):
            return
        raise UsageError(f"{path} exists; pass --force to overwrite")


def _seed_for(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


# --- file helpers -------------------------------------------------------------


def read_data_csv(path: str | Path) -> VariableMatrix:
    """n x d float CSV with an optional header row."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path}: empty data file")
    names = None
    start = 0
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        names = [c.strip() for c in rows[0]]
        start = 1
    d = len(rows[start]) if len(rows) > start else len(rows[0])
    data = []
    for r, row in enumerate(rows[start:], start + 1):
        if len(row) != d:
            raise FormatError(f"{path}: row {r} has {len(row)} columns, expected {d}")
        vals = []
        for c, cell in enumerate(row, 1):
            try:
                x = float(cell)
            except ValueError:
                raise FormatError(f"{path}: non-numeric value {cell!r} at row {r}, column {c}") from None
            if not math.isfinite(x):
                raise FormatError(f"{path}: non-finite value at row {r}, column {c}")
            vals.append(x)
        data.append(vals)
    if names is not None and len(names) != d:
        raise FormatError(f"{path}: header has {len(names)} names for {d} columns")
    try:
        return VariableMatrix(np.array(data), names)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_adjacency_csv(a: WeightedAdjacency, path: str | Path) -> None:
    lines = [",".join(repr(float(x)) for x in row) for row in a.A]
    Path(path).write_text("\n".join(lines) + "\n")


def read_adjacency_csv(path: str | Path) -> WeightedAdjacency:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        A = np.array([[float(c) for c in r] for r in rows])
        return WeightedAdjacency(A)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid adjacency matrix: {exc}") from None


def pdag_to_json(ob: OrderedEdgeBeliefs) -> dict:
    return {
        "d": ob.d,
        "order": list(ob.order.order),
        "edges": [{"i": i, "j": j, "p": float(ob.P[i, j])} for i, j in ob.ordered_pairs()],
    }


def pdag_from_json(obj: dict, source: str = "<pdag>") -> OrderedEdgeBeliefs:
    try:
        order = TopologicalOrder(tuple(obj["order"]))
        P = np.zeros((order.d, order.d))
        for e in obj["edges"]:
            P[int(e["i"]), int(e["j"])] = float(e["p"])
        return OrderedEdgeBeliefs(order, P)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"{source}: invalid ordered-beliefs file: {exc}") from None


def read_estimate_adjacency(path: str | Path) -> WeightedAdjacency:
    """Adjacency CSV, or a PDAG JSON converted to its edge-probability matrix."""
    path = Path(path)
    if path.suffix == ".json":
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from None
        return asm.ordered_adjacency(pdag_from_json(obj, str(path)))
    return read_adjacency_csv(path)


# --- commands -------------------------------------------------------------------


def cmd_gen(args) -> int:
    explicit = [args.model, args.nodes, args.edges, args.samples]
    if args.grid:
        if any(v is not None for v in explicit):
            raise UsageError("--grid cannot be combined with --model/--nodes/--edges/--samples")
        configs = paper_grid(args.reps, args.seed)
    else:
        if any(v is None for v in explicit):
            raise UsageError("need --model, --nodes, --edges and --samples (or --grid paper)")
        try:
            configs = [BenchmarkConfig(args.nodes, args.edges, args.samples, args.model, args.reps, args.seed)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = Path(args.out)
    _check_out(out, args.force)
    manifest = gen_suite(configs, out)
    print(json.dumps(manifest, indent=1))
    log.info("%d cases written to %s", len(manifest["cases"]), out)
    return EXIT_OK


def cmd_pairs(args) -> int:
    out = Path(args.out)
    _check_out(out, args.force)
    samples = gen_training_pairs(args.per_class, args.samples, args.seed, args.mechanisms.split(","), args.noise)
    write_training_pairs(samples, out / "pairs", out / "labels.csv")
    print(f"{len(samples)} pairs written to {out}")
    return EXIT_OK


def _standardize_pair(s: LabeledPairSample) -> LabeledPairSample:
    x = standardize_columns(VariableMatrix(np.column_stack([s.u, s.v])))
    return LabeledPairSample(x.column(0), x.column(1), s.label)


def cmd_train(args) -> int:
    out = Path(args.out)
    _check_out(out, args.force)
    named = load_training_pairs(args.pairs, args.labels)
    if len(named) < 2:
        raise FormatError(f"{args.labels}: need at least 2 labeled pairs")
    samples = [_standardize_pair(s) if args.standardize else s for _, s in named]
    rng = np.random.default_rng(args.seed)
    perm = rng.permutation(len(samples))
    n_test = max(1, int(round(0.2 * len(samples))))
    test, train = perm[:n_test], perm[n_test:]
    try:
        scorer = train_scorer(
            [samples[k] for k in train], args.l2, args.iterations, args.learning_rate, args.seed
        )
    except ValueError as exc:
        raise FormatError(f"training split: {exc}") from None
    hits = 0
    for k in test:
        s = samples[k]
        p = predict_pair(scorer, s.u, s.v)
        hits += int(np.argmax(p)) - 1 == s.label
    acc = hits / len(test)
    save_scorer(scorer, out)
    print(f"held-out accuracy: {acc:.4f} ({hits}/{len(test)})")
    return EXIT_OK


def cmd_score(args) -> int:
    out = Path(args.out)
    _check_out(out, args.force)
    x = read_data_csv(args.data)
    scorer = load_scorer(args.model)
    if args.standardize:
        x = standardize_columns(x)
    F = pair_features(x)
    beliefs = PairBeliefs(x.d, predict_from_features(scorer, F))
    save_beliefs(beliefs, out)
    if args.features_out:
        write_feature_matrix(F, x.d, args.features_out)
    print(f"{len(beliefs)} pair beliefs written to {out}")
    return EXIT_OK


def cmd_assemble(args) -> int:
    b = load_beliefs(args.beliefs)
    out = Path(args.out)
    _check_out(out, args.force)
    method = args.method
    if args.sample is not None:
        if method not in ("pg", "pdag"):
            raise UsageError("--sample is available for the distributions pg and pdag only")
        if args.sample < 1:
            raise UsageError("--sample must be positive")
        out.mkdir(parents=True, exist_ok=True)
        ob = asm.pdag(b) if method == "pdag" else None
        for k in range(args.sample):
            seed = _seed_for(args.seed, k)
            g = asm.sample_dag(ob, seed) if ob is not None else asm.sample_digraph(b, seed)
            write_edge_list(g, out / f"sample_{k:04d}.tsv")
        print(f"{args.sample} {method} samples written to {out}")
        return EXIT_OK
    if method == "pg":
        write_adjacency_csv(asm.beliefs_to_adjacency(b), out)
    elif method == "mlg":
        write_edge_list(asm.mlg(b), out)
    elif method == "pdag":
        out.write_text(json.dumps(pdag_to_json(asm.pdag(b)), indent=1) + "\n")
    else:
        write_edge_list(asm.mldag_from_beliefs(b), out)
    print(f"{method} written to {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if (args.graph is None) == (args.adjacency is None):
        raise UsageError("pass exactly one of --graph or --adjacency")
    if args.counts_only and args.truth_edges is None:
        raise UsageError("--counts-only requires --truth-edges")
    if not args.counts_only and args.truth is None:
        raise UsageError("--truth is required")
    if args.graph is not None:
        A = read_edge_list(args.graph).indicator()
    else:
        A = read_estimate_adjacency(args.adjacency).A
    record: dict = {}
    for key in ("config", "rep", "method"):
        if getattr(args, key) is not None:
            record[key] = getattr(args, key)
    if not args.counts_only:
        truth = read_dag(args.truth)
        if truth.d != A.shape[0]:
            raise FormatError(f"estimate has d={A.shape[0]} but truth {args.truth} has d={truth.d}")
        record.update(prob_metrics(A, truth).as_dict())
        truth_edges = truth.edges
    if args.truth_edges is not None:
        te = read_edge_list(args.truth_edges)
        if te.d != A.shape[0]:
            raise FormatError(f"estimate has d={A.shape[0]} but {args.truth_edges} has d={te.d}")
        truth_edges = te.directed
    record.update(expected_edge_counts(A, truth_edges).as_dict())
    line = json.dumps(record)
    if args.out:
        out = Path(args.out)
        _check_out(out, args.force)
        out.write_text(line + "\n")
    print(line)
    return EXIT_OK


def cmd_report(args) -> int:
    src = Path(args.runs)
    if not src.exists():
        raise FormatError(f"{src}: no such file or directory")
    try:
        rows = aggregate(read_records(src))
    except ValueError as exc:
        raise FormatError(f"{src}: {exc}") from None
    text = format_table(rows) if args.format == "table" else format_csv(rows)
    if args.out:
        out = Path(args.out)
        _check_out(out, args.force)
        out.write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pairgraph", description="Causal graphs from pairwise cause-effect beliefs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic benchmark suite")
    g.add_argument("--grid", choices=["paper"], help="16-configuration grid (d, e, n, model)")
    g.add_argument("--model", choices=["er", "sf"])
    g.add_argument("--nodes", type=int)
    g.add_argument("--edges", type=int)
    g.add_argument("--samples", type=int)
    g.add_argument("--reps", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_gen)

    g = sub.add_parser("pairs", help="generate synthetic labeled training pairs")
    g.add_argument("--per-class", type=int, default=100)
    g.add_argument("--samples", type=int, default=300)
    g.add_argument("--mechanisms", default="square", help="comma-separated: square,cube,tanh,mlp")
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_pairs)

    g = sub.add_parser("train", help="train the pair scorer")
    g.add_argument("--pairs", required=True)
    g.add_argument("--labels", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--l2", type=float, default=1e-3)
    g.add_argument("--iterations", type=int, default=500)
    g.add_argument("--learning-rate", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_train)

    g = sub.add_parser("score", help="score every column pair of a data file")
    g.add_argument("--data", required=True)
    g.add_argument("--model", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--features-out", help="also write the per-pair feature matrix CSV")
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_score)

    g = sub.add_parser("assemble", help="build a graph estimate from pair beliefs")
    g.add_argument("--beliefs", required=True)
    g.add_argument("--method", required=True, choices=METHODS)
    g.add_argument("--out", required=True)
    g.add_argument("--sample", type=int, help="write this many sampled graphs into --out (a directory)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_assemble)

    g = sub.add_parser("eval", help="score an estimate against a truth graph")
    g.add_argument("--truth")
    g.add_argument("--graph", help="edge-list TSV; 'u'-marked edges count 0.5 each way")
    g.add_argument("--adjacency", help="adjacency CSV, or a pdag JSON")
    g.add_argument("--counts-only", action="store_true")
    g.add_argument("--truth-edges", help="consensus edge list for predicted/correct/reversed counts")
    g.add_argument("--config")
    g.add_argument("--rep", type=int)
    g.add_argument("--method")
    g.add_argument("--out")
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_eval)

    g = sub.add_parser("report", help="aggregate metric records")
    g.add_argument("--runs", required=True, help="directory of *.jsonl files or one .jsonl file")
    g.add_argument("--format", choices=["table", "csv"], default="table")
    g.add_argument("--out")
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (FormatError, ScoringError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
