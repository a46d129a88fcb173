"""Risk-based calibration of statistics, centralized and local.

The update direction is always the same: add the statistics of the
labelled data and subtract the expected statistics the current model
assigns to the same instances.  At a perfect fit the two cancel and the
statistics are a fixed point.  The centralized variant scales the step
by a learning rate; the local variant used inside collaborative rounds
applies the full step, with the aggregated mass acting as inertia.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Discrete
from .model import (
    COUNT_FLOOR,
    VAR_FLOOR,
    NBParams,
    StatsVector,
    evaluate,
    param_map,
    prob_stat_map,
    stat_map_dataset,
)


def project(stats: StatsVector) -> StatsVector:
    """Pull statistics back into the region where parameters exist.

    Counts and zeroth moments are floored at COUNT_FLOOR; second moments
    are raised just enough that every implied variance is at least
    VAR_FLOOR.  Idempotent, and the identity on statistics of real data
    of at least one instance per class.
    """
    out = stats.copy()
    cls = out.class_block
    np.maximum(cls, COUNT_FLOOR, out=cls)
    for i, spec in enumerate(stats.schema.features):
        block = out.feature_block(i)
        if isinstance(spec, Discrete):
            np.maximum(block, COUNT_FLOOR, out=block)
        else:
            s0 = np.maximum(block[:, 0], COUNT_FLOOR)
            block[:, 0] = s0
            # var >= VAR_FLOOR  <=>  s2 >= s0 * VAR_FLOOR + s1^2 / s0
            s2_min = s0 * VAR_FLOOR + block[:, 1] ** 2 / s0
            np.maximum(block[:, 2], s2_min, out=block[:, 2])
    return out


def rc_update(stats: StatsVector, dataset: Dataset, lr: float, params: NBParams) -> StatsVector:
    """One calibration step at learning rate lr, followed by projection.

    Moves the statistics towards the labelled data and away from the
    model's own expectations: s + lr * (s(X, Y) - s(X, theta)).  With
    lr = 0 the input is returned unchanged (up to projection).
    """
    if lr < 0:
        raise ValueError(f"learning rate must be nonnegative, got {lr}")
    if stats.schema != dataset.schema or params.schema != dataset.schema:
        raise ValueError("schema mismatch")
    step = stat_map_dataset(dataset) - prob_stat_map(dataset.X, params)
    return project(stats + lr * step)


@dataclass
class RCRecord:
    """State after iteration t (t = 0 is the initialization)."""

    t: int
    soft_err: float
    err01: float
    params: NBParams
    stats: StatsVector


@dataclass
class RCTrace:
    """Per-iteration history of a centralized calibration run."""

    records: list[RCRecord]

    @property
    def best_index(self) -> int:
        """Iteration with the lowest soft training error (earliest wins)."""
        softs = [rec.soft_err for rec in self.records]
        return int(np.argmin(softs))

    @property
    def best(self) -> RCRecord:
        return self.records[self.best_index]

    @property
    def final(self) -> RCRecord:
        return self.records[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "soft_err", "err01"])
            for rec in self.records:
                writer.writerow([rec.t, repr(rec.soft_err), repr(rec.err01)])


def rc(dataset: Dataset, lr: float, t_max: int, init: StatsVector) -> RCTrace:
    """Centralized risk calibration for t_max iterations.

    Records soft and 0-1 training error at every iteration including the
    initialization.  The final record holds the model after the last
    iteration; ``trace.best`` marks the lowest soft error seen.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    if not lr > 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    stats = project(init)
    params = param_map(stats)
    err01, soft = evaluate(params, dataset)
    records = [RCRecord(0, soft, err01, params, stats)]
    for t in range(1, t_max + 1):
        stats = rc_update(stats, dataset, lr, params)
        params = param_map(stats)
        err01, soft = evaluate(params, dataset)
        records.append(RCRecord(t, soft, err01, params, stats))
    return RCTrace(records)


def lrc(agg_stats: StatsVector, local_dataset: Dataset, iterations: int = 1) -> tuple[NBParams, StatsVector]:
    """Local calibration of aggregated statistics against local data.

    Applies the full (unscaled) calibration step ``iterations`` times:
    the step has total mass zero, so the mass of ``agg_stats`` is
    conserved and acts as the inertia that turns aggregate mass into an
    effective local learning rate.  Returns the calibrated parameters
    and the statistics that produced them.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if agg_stats.schema != local_dataset.schema:
        raise ValueError("schema mismatch")
    local = stat_map_dataset(local_dataset)
    stats = project(agg_stats)
    for _ in range(iterations):
        params = param_map(stats)
        stats = project(stats + local - prob_stat_map(local_dataset.X, params))
    return param_map(stats), stats
