"""Collaborative calibration rounds over a communication graph.

Every node starts from the same uniform statistics of mass m0.  One
round is, for every node simultaneously: average the statistics of the
neighborhood as of the previous round (synchronous barrier), then
calibrate the average against the node's local data.  Per-round metrics
compare the node models with centralized baselines trained on the
pooled sample.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import nan

import numpy as np

from .calibration import RCTrace, lrc, project, rc
from .data import Dataset
from .model import (
    NBParams,
    StatsVector,
    evaluate_many,
    param_map,
    stat_map_dataset,
    uniform_init,
)
from .network import Graph, RewireSchedule, adjacency, rewire


def m0_heuristic(m: float, lr: float, n: int) -> float:
    """Initial mass per node matching a centralized run: m / (lr * n).

    Chosen so that the effective local learning rate m_v / m0 of an
    average node equals lr when the m instances are spread over n nodes.
    """
    if not m > 0 or not lr > 0 or n < 1:
        raise ValueError(f"need m > 0, lr > 0, n >= 1, got m={m}, lr={lr}, n={n}")
    return m / (lr * n)


@dataclass
class NodeState:
    """One node after a round: its data, statistics and model."""

    node: int
    dataset: Dataset
    stats: StatsVector
    params: NBParams


METRICS_COLUMNS = (
    "t",
    "train_err_mean",
    "train_err_std",
    "test_err_mean",
    "test_err_std",
    "soft_train_mean",
    "rc_train_err",
    "rc_test_err",
    "train_gap",
    "test_gap",
)


@dataclass
class RoundMetrics:
    """Cross-node error summary for one round.

    Means and standard deviations (population, ddof=0) are taken over
    nodes.  Gaps are node means minus the centralized calibration
    baseline at the same round; nan when no baseline was supplied.
    """

    t: int
    train_err_mean: float
    train_err_std: float
    test_err_mean: float
    test_err_std: float
    soft_train_mean: float
    rc_train_err: float
    rc_test_err: float
    train_gap: float
    test_gap: float
    node_train_errs: tuple[float, ...]
    node_test_errs: tuple[float, ...]

    def as_row(self) -> list:
        return [getattr(self, c) for c in METRICS_COLUMNS]


def write_metrics_csv(metrics, path) -> None:
    """Metrics rows with full-precision floats; identical runs write identical bytes."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for rm in metrics:
            row = rm.as_row() if isinstance(rm, RoundMetrics) else list(rm)
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def evaluate_round(
    states: list[NodeState],
    global_train: Dataset,
    global_test: Dataset,
    baseline: tuple[float, float] | None = None,
    t: int = 0,
) -> RoundMetrics:
    """Score every node's model on the pooled train and test sets."""
    params = [st.params for st in states]
    tr01, tr_soft = evaluate_many(params, global_train)
    te01, _ = evaluate_many(params, global_test)
    rc_tr, rc_te = baseline if baseline is not None else (nan, nan)
    tr_mean = float(tr01.mean())
    te_mean = float(te01.mean())
    return RoundMetrics(
        t=t,
        train_err_mean=tr_mean,
        train_err_std=float(tr01.std()),
        test_err_mean=te_mean,
        test_err_std=float(te01.std()),
        soft_train_mean=float(tr_soft.mean()),
        rc_train_err=float(rc_tr),
        rc_test_err=float(rc_te),
        train_gap=tr_mean - rc_tr,
        test_gap=te_mean - rc_te,
        node_train_errs=tuple(float(e) for e in tr01),
        node_test_errs=tuple(float(e) for e in te01),
    )


@dataclass
class CRCResult:
    """Everything a collaborative run produced.

    ``aggregates``, when recorded, holds for each round t the averaged
    neighborhood statistics each node calibrated from (the state just
    before the local step).
    """

    metrics: list[RoundMetrics]
    states: list[NodeState]
    aggregates: list[list[StatsVector]] | None


def _neighbor_index(graph: Graph, neighborhood: str) -> list[np.ndarray]:
    adj = adjacency(graph)
    index = []
    for v in range(1, graph.n + 1):
        ids = adj[v] if neighborhood == "open" else sorted(adj[v] + [v])
        if not ids:
            raise ValueError(f"node {v} has no neighbors; open aggregation is undefined")
        index.append(np.asarray(ids, dtype=np.int64) - 1)
    return index


def run_crc(
    local_datasets: list[Dataset],
    schedule: RewireSchedule,
    *,
    m0: float,
    t_max: int,
    iterations: int = 1,
    neighborhood: str = "closed",
    rng: np.random.Generator | None = None,
    global_train: Dataset | None = None,
    global_test: Dataset | None = None,
    baseline: list[tuple[float, float]] | None = None,
    workers: int = 1,
    record_aggregates: bool = False,
) -> CRCResult:
    """Run t_max collaborative calibration rounds.

    ``schedule`` provides the (possibly rewired) communication graph;
    ``rng`` drives its randomness.  When ``global_train`` and
    ``global_test`` are given, metrics are recorded every round,
    compared against ``baseline`` (one (train_err, test_err) pair per
    round) when supplied.  ``workers`` > 1 evaluates nodes of one round
    in a thread pool; results do not depend on the worker count because
    every node reads only round t-1 state.
    """
    n = len(local_datasets)
    if n < 1:
        raise ValueError("need at least one node")
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    if neighborhood not in ("open", "closed"):
        raise ValueError(f"neighborhood must be 'open' or 'closed', got {neighborhood!r}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    schema = local_datasets[0].schema
    for ds in local_datasets:
        if ds.schema != schema:
            raise ValueError("all local datasets must share one schema")
        if ds.m == 0:
            raise ValueError("empty local dataset")
    if baseline is not None and len(baseline) < t_max:
        raise ValueError(f"baseline has {len(baseline)} rounds, need {t_max}")
    evaluating = global_train is not None and global_test is not None

    if rng is None:
        rng = np.random.default_rng(0)
    graph = schedule.initial(n, rng)
    nbr_index = _neighbor_index(graph, neighborhood)

    init = uniform_init(schema, m0)
    states = [
        NodeState(v + 1, ds, init.copy(), param_map(project(init)))
        for v, ds in enumerate(local_datasets)
    ]
    S = np.stack([st.stats.values for st in states])  # (n, len)

    metrics: list[RoundMetrics] = []
    aggregates: list[list[StatsVector]] | None = [] if record_aggregates else None

    def step(v: int) -> tuple[StatsVector, NBParams, StatsVector]:
        agg = StatsVector(schema, S[nbr_index[v]].mean(axis=0))
        params, stats = lrc(agg, local_datasets[v], iterations)
        return agg, params, stats

    for t in range(1, t_max + 1):
        new_graph = rewire(schedule, t, graph, rng)
        if new_graph is not graph:
            graph = new_graph
            nbr_index = _neighbor_index(graph, neighborhood)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(step, range(n)))
        else:
            results = [step(v) for v in range(n)]
        states = [
            NodeState(v + 1, local_datasets[v], stats, params)
            for v, (_, params, stats) in enumerate(results)
        ]
        S = np.stack([st.stats.values for st in states])
        if aggregates is not None:
            aggregates.append([agg for agg, _, _ in results])
        if evaluating:
            per_round = baseline[t - 1] if baseline is not None else None
            metrics.append(evaluate_round(states, global_train, global_test, per_round, t))
    return CRCResult(metrics, states, aggregates)


def run_baseline(
    kind: str,
    dataset: Dataset,
    *,
    lr: float = 0.05,
    t_max: int = 64,
    init_ess: float | None = None,
    smoothing: float = 1.0,
) -> tuple[NBParams, RCTrace | None]:
    """Centralized reference models on the pooled sample.

    kind 'ml': closed-form maximum likelihood with ``smoothing`` units
    of uniform mass added (0 disables smoothing); no trace.
    kind 'rc': centralized calibration from uniform statistics of mass
    ``init_ess`` (defaults to the sample size) at learning rate lr.
    """
    kind = kind.lower()
    if kind == "ml":
        stats = stat_map_dataset(dataset)
        if smoothing < 0:
            raise ValueError(f"smoothing must be nonnegative, got {smoothing}")
        if smoothing > 0:
            stats = stats + uniform_init(dataset.schema, smoothing)
        return param_map(project(stats)), None
    if kind == "rc":
        ess = float(init_ess) if init_ess is not None else float(dataset.m)
        trace = rc(dataset, lr, t_max, uniform_init(dataset.schema, ess))
        return trace.final.params, trace
    raise ValueError(f"unknown baseline kind {kind!r}")
