"""End-to-end selection protocols: batch active learning and core-set runs.

Both protocols share one shape: a cheap selection model (the proxy) computes
the metric that picks training points; the expensive target model trains only
on the picked points. Substituting the target spec into the proxy slot
degenerates to the classical self-selecting run, and with equal seeds the two
reports are identical apart from wall-clock fields.

Timing contract: each selection round is bracketed by exactly two clock()
calls covering the proxy fit, scoring, and selection. Proxy evaluation on the
test set, bookkeeping, and the final target fit are outside the bracket.
``selection_seconds`` is the sum of round times; ``speedup`` is
baseline_seconds / selection_seconds when a baseline measurement is supplied
or taken. The clock is injectable for testing.

Determinism contract: every field of a RunReport except the timing block is a
pure function of (config, data). All randomness flows from the run seed and
the learner-spec seeds through documented sub-seed derivations.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import scoring
from .forgetting import process_log, select_most_forgotten
from .kcenters import greedy_kcenters
from .learner import (
    LearnerSpec,
    SynthParams,
    embed,
    error_rate,
    fit,
    make_synthetic,
    predict_proba,
)
from .rng import SplitMix64, derive_seed
from .tensor_io import atomic_write_text, read_labels_csv, read_tensor

AL_METHODS = ("least_confidence", "kcenters", "random")
CORESET_METHODS = ("entropy", "kcenters", "forgetting", "random")


class ScheduleError(ValueError):
    """Budget not reachable by the configured round schedule."""


@dataclass(frozen=True)
class Schedule:
    initial: float
    first: float
    subsequent: float

    def __post_init__(self):
        for name in ("initial", "first", "subsequent"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 < v <= 1.0):
                raise ValueError(f"schedule {name} must lie in (0, 1], got {v}")


DEFAULT_SCHEDULE = Schedule(initial=0.02, first=0.08, subsequent=0.10)


@dataclass(frozen=True)
class ALConfig:
    proxy: LearnerSpec
    target: LearnerSpec
    method: str
    budget_fraction: float
    schedule: Schedule
    seed: int

    def __post_init__(self):
        if self.method not in AL_METHODS:
            raise ValueError(f"method must be one of {AL_METHODS}, got {self.method!r}")
        if not (np.isfinite(self.budget_fraction) and 0.0 < self.budget_fraction <= 1.0):
            raise ValueError(f"budget_fraction must lie in (0, 1], got {self.budget_fraction}")


@dataclass
class RunReport:
    task: str
    method: str
    n_train: int
    round_sizes: list  # cumulative selected-set size, initial stage included
    round_proxy_errors: list  # proxy test error per selection round
    selected_ids: list  # final selected/labeled ids, ascending
    target_test_error: float
    full_data_error: Optional[float]
    round_seconds: list
    selection_seconds: float
    baseline_seconds: Optional[float]
    speedup: Optional[float]

    def deterministic_dict(self) -> dict:
        return {
            "task": self.task,
            "method": self.method,
            "n_train": self.n_train,
            "round_sizes": list(self.round_sizes),
            "round_proxy_errors": list(self.round_proxy_errors),
            "selected_ids": [int(i) for i in self.selected_ids],
            "target_test_error": self.target_test_error,
            "full_data_error": self.full_data_error,
        }

    def timing_dict(self) -> dict:
        return {
            "round_seconds": list(self.round_seconds),
            "selection_seconds": self.selection_seconds,
            "baseline_seconds": self.baseline_seconds,
            "speedup": self.speedup,
        }

    def to_dict(self) -> dict:
        d = self.deterministic_dict()
        d["timing"] = self.timing_dict()
        return d


def nearest_count(fraction: float, n: int) -> int:
    """Resolve fraction * n to a count once, rounding halves up."""
    return int(np.floor(fraction * n + 0.5))


def ceil_count(fraction: float, n: int) -> int:
    """ceil(fraction * n) with slack so representation error in the product
    cannot bump an exact integer up by one."""
    return int(np.ceil(fraction * n - 1e-9))


def plan_schedule(n: int, budget_fraction: float, schedule: Schedule) -> list:
    """Cumulative labeled sizes [initial, after round 1, ..., budget].

    The schedule fractions are fractions of the total pool size n. The
    cumulative fraction must land on the budget exactly (to 1e-9); anything
    else is a configuration error, not silent truncation.
    """
    s0 = nearest_count(schedule.initial, n)
    if s0 < 1:
        raise ScheduleError(f"initial fraction {schedule.initial} selects nothing from n={n}")
    if budget_fraction < schedule.initial - 1e-9:
        raise ScheduleError("budget_fraction below the initial fraction")
    if abs(budget_fraction - schedule.initial) <= 1e-9:
        return [s0]
    remaining = budget_fraction - schedule.initial - schedule.first
    if remaining < -1e-9:
        raise ScheduleError("budget_fraction falls inside the first round increment")
    k_real = remaining / schedule.subsequent + 1.0
    k = int(round(k_real))
    if k < 1 or abs(k_real - k) > 1e-6:
        raise ScheduleError(
            f"budget {budget_fraction} not reachable: initial {schedule.initial} "
            f"+ first {schedule.first} + k*{schedule.subsequent} never lands on it"
        )
    sizes = [s0]
    for j in range(1, k + 1):
        frac = schedule.initial + schedule.first + (j - 1) * schedule.subsequent
        sizes.append(nearest_count(frac, n))
    if sizes[-1] > n:
        raise ScheduleError(f"schedule overruns the pool: {sizes[-1]} > {n}")
    for a, b in zip(sizes, sizes[1:]):
        if b <= a:
            raise ScheduleError(f"round quota collapses to zero at size {a} (n too small)")
    return sizes


def random_select(pool, m: int, seed: int) -> np.ndarray:
    """Seeded uniform sample of m pool entries without replacement."""
    pool = np.asarray(pool, dtype=np.int64).reshape(-1)
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    if m > pool.shape[0]:
        raise ValueError(f"m={m} exceeds pool size {pool.shape[0]}")
    perm = SplitMix64(seed).permutation(pool.shape[0])
    return pool[perm[:m]]


def speedup(baseline_time: float, svp_time: float) -> float:
    """baseline_time / svp_time; both must be positive."""
    if not (baseline_time > 0.0 and svp_time > 0.0):
        raise ValueError("times must be positive")
    return baseline_time / svp_time


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    x, y = data
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("data must be (features (n,d), labels (n,))")
    return x, y


def _fit_seed(run_seed: int, salt: str, spec: LearnerSpec) -> int:
    return derive_seed(derive_seed(run_seed, salt), spec.seed)


def _al_selection_pass(
    cfg: ALConfig,
    x: np.ndarray,
    y: np.ndarray,
    xt: np.ndarray,
    yt: np.ndarray,
    c: int,
    sizes: list,
    proxy_spec: LearnerSpec,
    clock: Callable[[], float],
):
    """Run the selection rounds; returns (labeled ids, per-round records)."""
    n = x.shape[0]
    labeled = np.sort(random_select(np.arange(n), sizes[0], derive_seed(cfg.seed, "initial-pool")))
    mask = np.zeros(n, dtype=bool)
    mask[labeled] = True

    proxy_errors = []
    round_seconds = []
    for k in range(1, len(sizes)):
        quota = sizes[k] - sizes[k - 1]
        unlabeled = np.flatnonzero(~mask)
        t0 = clock()
        spec_k = dataclasses.replace(
            proxy_spec, seed=_fit_seed(cfg.seed, f"proxy-round-{k}", proxy_spec)
        )
        proxy = fit(spec_k, x[labeled], y[labeled], n_classes=c)
        if cfg.method == "least_confidence":
            scores = scoring.least_confidence(predict_proba(proxy, x[unlabeled]))
            picked = unlabeled[scoring.top_m(scores, quota)]
        elif cfg.method == "kcenters":
            picked = greedy_kcenters(embed(proxy, x), labeled, quota).order
        else:
            picked = random_select(unlabeled, quota, derive_seed(cfg.seed, f"random-round-{k}"))
        t1 = clock()
        round_seconds.append(t1 - t0)
        proxy_errors.append(error_rate(proxy, xt, yt))
        mask[picked] = True
        labeled = np.flatnonzero(mask)
    return labeled, proxy_errors, round_seconds


def run_active_learning(
    cfg: ALConfig,
    data,
    test_data,
    clock: Callable[[], float] = time.perf_counter,
    baseline_seconds: Optional[float] = None,
    measure_baseline: bool = False,
) -> RunReport:
    """Pool-based batch active learning with a proxy selection model.

    Seeds the initial pool uniformly at random, then each round refits the
    proxy from scratch on the labeled set, selects the round quota from the
    unlabeled pool by the configured method, and finally trains the target
    from scratch on the full labeled set. When ``measure_baseline`` is set,
    the selection pass is rerun with the target spec in the proxy slot purely
    to record the classical self-selection wall-clock.
    """
    x, y = _as_xy(data)
    xt, yt = _as_xy(test_data)
    c = max(2, int(max(y.max(), yt.max())) + 1)
    sizes = plan_schedule(x.shape[0], cfg.budget_fraction, cfg.schedule)

    labeled, proxy_errors, round_seconds = _al_selection_pass(
        cfg, x, y, xt, yt, c, sizes, cfg.proxy, clock
    )
    selection_seconds = float(sum(round_seconds))

    if measure_baseline and baseline_seconds is None:
        _, _, base_rounds = _al_selection_pass(cfg, x, y, xt, yt, c, sizes, cfg.target, clock)
        baseline_seconds = float(sum(base_rounds))

    target_spec = dataclasses.replace(
        cfg.target, seed=_fit_seed(cfg.seed, "target-fit", cfg.target)
    )
    target = fit(target_spec, x[labeled], y[labeled], n_classes=c)

    ratio = None
    if baseline_seconds is not None and selection_seconds > 0.0:
        ratio = speedup(baseline_seconds, selection_seconds)
    return RunReport(
        task="al",
        method=cfg.method,
        n_train=x.shape[0],
        round_sizes=[int(s) for s in sizes],
        round_proxy_errors=proxy_errors,
        selected_ids=[int(i) for i in labeled],
        target_test_error=error_rate(target, xt, yt),
        full_data_error=None,
        round_seconds=round_seconds,
        selection_seconds=selection_seconds,
        baseline_seconds=baseline_seconds,
        speedup=ratio,
    )


def _coreset_select(
    method: str,
    proxy_spec: LearnerSpec,
    x: np.ndarray,
    y: np.ndarray,
    xt: np.ndarray,
    yt: np.ndarray,
    c: int,
    m: int,
    seed: int,
    clock: Callable[[], float],
):
    """One timed selection pass; returns (subset ids, proxy error, seconds)."""
    n = x.shape[0]
    t0 = clock()
    spec = dataclasses.replace(proxy_spec, seed=_fit_seed(seed, "proxy-fit", proxy_spec))
    proxy = fit(spec, x, y, n_classes=c)
    if method == "entropy":
        subset = scoring.top_m(scoring.entropy(predict_proba(proxy, x)), m)
    elif method == "forgetting":
        if proxy.train_log is None:
            raise ValueError("forgetting selection needs a proxy trained for >= 1 epoch")
        subset = select_most_forgotten(process_log(proxy.train_log), m)
    elif method == "kcenters":
        start = random_select(np.arange(n), 1, derive_seed(seed, "kcenters-start"))
        order = greedy_kcenters(embed(proxy, x), start, m - 1).order
        subset = np.concatenate([start, order])
    else:
        subset = random_select(np.arange(n), m, derive_seed(seed, "random-subset"))
    t1 = clock()
    return np.sort(subset), error_rate(proxy, xt, yt), t1 - t0


def run_coreset(
    proxy: LearnerSpec,
    target: LearnerSpec,
    method: str,
    subset_fraction: float,
    data,
    test_data,
    seed: int,
    include_full_data_error: bool = False,
    clock: Callable[[], float] = time.perf_counter,
    baseline_seconds: Optional[float] = None,
    measure_baseline: bool = False,
) -> RunReport:
    """Select a core-set with the proxy, train the target on it.

    m = ceil(subset_fraction * n) points are kept. With fraction 1.0 the
    subset is the identity and the target fit equals full-data training
    exactly, seed for seed.
    """
    if method not in CORESET_METHODS:
        raise ValueError(f"method must be one of {CORESET_METHODS}, got {method!r}")
    if not (np.isfinite(subset_fraction) and 0.0 < subset_fraction <= 1.0):
        raise ValueError(f"subset_fraction must lie in (0, 1], got {subset_fraction}")
    x, y = _as_xy(data)
    xt, yt = _as_xy(test_data)
    n = x.shape[0]
    c = max(2, int(max(y.max(), yt.max())) + 1)
    m = ceil_count(subset_fraction, n)
    if m < 1:
        raise ValueError("subset is empty")

    subset, proxy_error, seconds = _coreset_select(
        method, proxy, x, y, xt, yt, c, m, seed, clock
    )
    if measure_baseline and baseline_seconds is None:
        _, _, base_seconds = _coreset_select(method, target, x, y, xt, yt, c, m, seed, clock)
        baseline_seconds = float(base_seconds)

    target_spec = dataclasses.replace(target, seed=_fit_seed(seed, "target-fit", target))
    model = fit(target_spec, x[subset], y[subset], n_classes=c)
    test_error = error_rate(model, xt, yt)

    full_error = None
    if include_full_data_error:
        if m == n:
            full_error = test_error
        else:
            full_model = fit(target_spec, x, y, n_classes=c)
            full_error = error_rate(full_model, xt, yt)

    ratio = None
    if baseline_seconds is not None and seconds > 0.0:
        ratio = speedup(baseline_seconds, seconds)
    return RunReport(
        task="coreset",
        method=method,
        n_train=n,
        round_sizes=[int(m)],
        round_proxy_errors=[proxy_error],
        selected_ids=[int(i) for i in subset],
        target_test_error=test_error,
        full_data_error=full_error,
        round_seconds=[seconds],
        selection_seconds=float(seconds),
        baseline_seconds=baseline_seconds,
        speedup=ratio,
    )


def load_data_section(section: dict):
    """Resolve the config ``data`` block to (train, test) array pairs.

    Either {"synthetic": {...generator params...}} or file paths
    {"features", "labels", "test_features", "test_labels"} with SVPT tensors
    and ``example_id,label`` CSVs.
    """
    if "synthetic" in section:
        params = dict(section["synthetic"])
        ds = make_synthetic(SynthParams(**params))
        return (ds.features, ds.labels), (ds.test_features, ds.test_labels)
    needed = {"features", "labels", "test_features", "test_labels"}
    missing = needed - set(section)
    if missing:
        raise ValueError(f"data section needs synthetic params or file paths; missing {sorted(missing)}")
    train = (read_tensor(section["features"]), read_labels_csv(section["labels"]))
    test = (read_tensor(section["test_features"]), read_labels_csv(section["test_labels"]))
    return train, test


def report_json(config: dict, report: RunReport) -> str:
    doc = {"config": config, "report": report.to_dict()}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def rounds_csv(report: RunReport) -> str:
    """Flat per-round rows; the initial stage has no fit or timing."""
    lines = ["round,labeled_size,proxy_test_error,seconds"]
    if report.task == "al":
        lines.append(f"0,{report.round_sizes[0]},,")
        stages = zip(report.round_sizes[1:], report.round_proxy_errors, report.round_seconds)
        for k, (size, err, sec) in enumerate(stages, start=1):
            lines.append(f"{k},{size},{err!r},{sec!r}")
    else:
        for k, (size, err, sec) in enumerate(
            zip(report.round_sizes, report.round_proxy_errors, report.round_seconds), start=1
        ):
            lines.append(f"{k},{size},{err!r},{sec!r}")
    return "\n".join(lines) + "\n"


def _csv_path_for(output: str) -> str:
    base = output[:-5] if output.endswith(".json") else output
    return base + ".rounds.csv"


def execute_config(config: dict, clock: Callable[[], float] = time.perf_counter) -> tuple[RunReport, Optional[str]]:
    """Run the task described by a config dict; write outputs if requested.

    Returns the report and the JSON output path (None when no ``output``).
    """
    if not isinstance(config, dict):
        raise ValueError("config must be a JSON object")
    task = config.get("task")
    if task not in ("al", "coreset"):
        raise ValueError(f"task must be 'al' or 'coreset', got {task!r}")
    for key in ("proxy", "target", "method", "seed", "data"):
        if key not in config:
            raise ValueError(f"config is missing {key!r}")
    proxy = LearnerSpec.from_dict(config["proxy"])
    target = LearnerSpec.from_dict(config["target"])
    seed = int(config["seed"])
    train, test = load_data_section(config["data"])
    measure = bool(config.get("measure_baseline", False))
    baseline_seconds = config.get("baseline_seconds")
    if baseline_seconds is not None:
        baseline_seconds = float(baseline_seconds)

    if task == "al":
        if "budget_fraction" not in config:
            raise ValueError("al config needs budget_fraction")
        sched = config.get("schedule")
        schedule = Schedule(**sched) if sched else DEFAULT_SCHEDULE
        cfg = ALConfig(
            proxy=proxy,
            target=target,
            method=config["method"],
            budget_fraction=float(config["budget_fraction"]),
            schedule=schedule,
            seed=seed,
        )
        report = run_active_learning(
            cfg, train, test, clock=clock,
            baseline_seconds=baseline_seconds, measure_baseline=measure,
        )
    else:
        if "subset_fraction" not in config:
            raise ValueError("coreset config needs subset_fraction")
        report = run_coreset(
            proxy,
            target,
            config["method"],
            float(config["subset_fraction"]),
            train,
            test,
            seed,
            include_full_data_error=bool(config.get("include_full_data_error", False)),
            clock=clock,
            baseline_seconds=baseline_seconds,
            measure_baseline=measure,
        )

    output = config.get("output")
    if output is not None:
        atomic_write_text(output, report_json(config, report))
        atomic_write_text(_csv_path_for(output), rounds_csv(report))
    return report, output
