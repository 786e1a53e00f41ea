"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (bad file contents, impossible
request), 2 usage error (unknown subcommand, missing or malformed flags).
Diagnostics go to standard error; results go to files or standard output,
never interleaved with logs. Every output file is written atomically, so a
failing invocation leaves no partial output behind.

``--seed`` flags fall back to the ``SVP_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness, scoring
from .forgetting import process_log, select_most_forgotten, write_forgetting_csv
from .kcenters import KCentersResult, greedy_kcenters, write_order_csv
from .ranking_diag import pearson, scores_to_ranks, spearman
from .tensor_io import (
    LOG_MAGIC,
    InvalidValueError,
    read_scores_csv,
    read_tensor,
    read_train_log,
    read_train_log_csv,
    write_labels_csv,
    write_scores_csv,
    write_tensor,
)


class UsageError(Exception):
    """Flag combinations argparse cannot express (e.g. a missing seed)."""


def _resolve_seed(value) -> int | None:
    if value is not None:
        return int(value)
    env = os.environ.get("SVP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"SVP_SEED must be an integer, got {env!r}") from exc
    return None


def _require_seed(value) -> int:
    seed = _resolve_seed(value)
    if seed is None:
        raise UsageError("a seed is required: pass --seed or set SVP_SEED")
    return seed


def _read_index_file(path: str) -> np.ndarray:
    """One integer index per line; blank lines ignored."""
    indices = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                indices.append(int(line))
            except ValueError as exc:
                raise InvalidValueError(f"{path}:{lineno}: not an integer: {line!r}") from exc
    if not indices:
        raise InvalidValueError(f"{path}: no indices found")
    return np.asarray(indices, dtype=np.int64)


def _load_train_log(path: str) -> np.ndarray:
    """Accept either SVPL binary (sniffed by magic) or the CSV import form."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == LOG_MAGIC:
        return read_train_log(path)
    return read_train_log_csv(path)


def _load_score_series(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Load scores keyed by example id from either CSV layout.

    ``example_id,score`` is used as-is. A k-centers order file
    (``rank,example_id,min_dist``) is converted to scores as negated rank,
    so earlier-added points score higher.
    """
    import csv as _csv

    with open(path, newline="") as fh:
        header = next(_csv.reader(fh), None)
    if header == ["example_id", "score"]:
        scores = read_scores_csv(path)
        return np.arange(scores.shape[0], dtype=np.int64), scores
    if header == ["rank", "example_id", "min_dist"]:
        ids, scores = [], []
        with open(path, newline="") as fh:
            reader = _csv.reader(fh)
            next(reader)
            for lineno, rec in enumerate(reader, start=2):
                if len(rec) != 3:
                    raise InvalidValueError(f"{path}:{lineno}: expected 3 fields")
                ids.append(int(rec[1]))
                scores.append(-float(rec[0]))
        if not ids:
            raise InvalidValueError(f"{path}: no data rows")
        ids = np.asarray(ids, dtype=np.int64)
        if np.unique(ids).size != ids.size:
            raise InvalidValueError(f"{path}: duplicate example ids")
        return ids, np.asarray(scores, dtype=np.float64)
    raise InvalidValueError(f"{path}: unrecognized header {header}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svp",
        description="Data selection: uncertainty scoring, k-centers, forgetting, and proxy-driven selection runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score a probability tensor")
    p.add_argument("--method", required=True, choices=sorted(scoring.SCORERS))
    p.add_argument("--probs", required=True, help="SVPT file of class probabilities")
    p.add_argument("--out", required=True, help="output CSV (example_id,score)")

    p = sub.add_parser("kcenters", help="greedy k-centers selection order")
    p.add_argument("--features", required=True, help="SVPT file of features")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--initial", help="file of initial indices, one per line")
    group.add_argument("--initial-size", type=int, help="number of seeded-random initial indices")
    p.add_argument("--budget", required=True, type=int)
    p.add_argument("--out", required=True, help="output CSV (rank,example_id,min_dist)")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("forget", help="forgetting events from a training log")
    p.add_argument("--log", required=True, help="SVPL file or CSV (example_id,epoch,correct)")
    p.add_argument("--out", required=True, help="output CSV (example_id,never_learned,count)")
    p.add_argument("--select", type=int, default=None, metavar="M",
                   help="also print the M most-forgotten example ids")

    p = sub.add_parser("correlate", help="rank correlation between two score files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--ranks", action="store_true",
                   help="convert both inputs to average ranks before correlating")

    p = sub.add_parser("al", help="run batch active learning from a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("coreset", help="run core-set selection from a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("synth", help="generate a synthetic blob dataset")
    p.add_argument("--classes", required=True, type=int)
    p.add_argument("--dim", required=True, type=int)
    p.add_argument("--separation", required=True, type=float)
    p.add_argument("--noise", required=True, type=float)
    p.add_argument("--n-train", required=True, type=int)
    p.add_argument("--n-test", required=True, type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-test-features", default=None)
    p.add_argument("--out-test-labels", default=None)

    return parser


def _cmd_score(args) -> int:
    probs = read_tensor(args.probs)
    scores = scoring.SCORERS[args.method](probs)
    write_scores_csv(scores, args.out)
    return 0


def _cmd_kcenters(args) -> int:
    features = read_tensor(args.features)
    n = features.shape[0]
    if args.initial is not None:
        initial = _read_index_file(args.initial)
    else:
        if args.initial_size < 1:
            raise UsageError("--initial-size must be at least 1")
        seed = _require_seed(args.seed)
        initial = harness.random_select(np.arange(n), args.initial_size, seed)
    result: KCentersResult = greedy_kcenters(features, initial, args.budget)
    write_order_csv(result, args.out)
    return 0


def _cmd_forget(args) -> int:
    log = _load_train_log(args.log)
    scores = process_log(log)
    write_forgetting_csv(scores, args.out)
    if args.select is not None:
        chosen = select_most_forgotten(scores, args.select)
        sys.stdout.write("\n".join(str(int(i)) for i in chosen) + "\n")
    return 0


def _cmd_correlate(args) -> int:
    ids_a, a = _load_score_series(args.a)
    ids_b, b = _load_score_series(args.b)
    if ids_a.shape != ids_b.shape or (np.sort(ids_a) != np.sort(ids_b)).any():
        raise ValueError("inputs cover different example ids; cannot correlate")
    a = a[np.argsort(ids_a, kind="stable")]
    b = b[np.argsort(ids_b, kind="stable")]
    if args.ranks:
        a = scores_to_ranks(a)
        b = scores_to_ranks(b)
    s = spearman(a, b)
    r = pearson(a, b)
    sys.stdout.write(f"spearman={s:.6f} pearson={r:.6f} n={a.shape[0]}\n")
    return 0


def _cmd_run(args, task: str) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    if config.get("task") != task:
        raise ValueError(f"config task is {config.get('task')!r}, expected {task!r}")
    report, output = harness.execute_config(config)
    if output is None:
        sys.stdout.write(harness.report_json(config, report))
    return 0


def _cmd_synth(args) -> int:
    from .learner import SynthParams, make_synthetic

    seed = _require_seed(args.seed)
    if (args.out_test_features is None) != (args.out_test_labels is None):
        raise UsageError("--out-test-features and --out-test-labels go together")
    params = SynthParams(
        classes=args.classes,
        dim=args.dim,
        separation=args.separation,
        noise=args.noise,
        n_train=args.n_train,
        n_test=args.n_test,
        seed=seed,
    )
    ds = make_synthetic(params)
    write_tensor(ds.features, args.out_features)
    write_labels_csv(ds.labels, args.out_labels)
    if args.out_test_features is not None:
        write_tensor(ds.test_features, args.out_test_features)
        write_labels_csv(ds.test_labels, args.out_test_labels)
    return 0


_COMMANDS = {
    "score": _cmd_score,
    "kcenters": _cmd_kcenters,
    "forget": _cmd_forget,
    "correlate": _cmd_correlate,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in ("al", "coreset"):
            return _cmd_run(args, args.command)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
