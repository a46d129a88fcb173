"""Assigning training instances to nodes: iid and drifted splits.

Every splitter draws n * m_v instances without replacement from the
dataset and deals them into n blocks of size m_v.  The drift variants
skew what each node sees:

* drift_x: instances ordered along the first principal component, so
  neighbouring nodes receive neighbouring regions of feature space,
* drift_y: each node filled from a single preferred class, topping up
  cyclically from the next non-empty class when a pool runs dry,
* drift_xy: drift_y with every class pool pre-sorted along the first
  principal component.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import Dataset

PARTITION_MODES = ("iid", "drift_x", "drift_y", "drift_xy")


@dataclass(frozen=True)
class PartitionPlan:
    """Which global training indices each node owns."""

    mode: str
    n: int
    m_v: int
    assignment: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.mode not in PARTITION_MODES:
            raise ValueError(f"unknown partition mode {self.mode!r}")
        if len(self.assignment) != self.n:
            raise ValueError(f"expected {self.n} blocks, got {len(self.assignment)}")
        seen: set[int] = set()
        for block in self.assignment:
            if len(block) != self.m_v:
                raise ValueError(f"block size {len(block)} != m_v {self.m_v}")
            seen.update(block)
        if len(seen) != self.n * self.m_v:
            raise ValueError("blocks overlap")

    def to_csv(self, path) -> None:
        """Audit dump: one (node, global_index) row per assigned instance."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "global_index"])
            for v, block in enumerate(self.assignment, start=1):
                for g in block:
                    writer.writerow([v, g])


def local_datasets(dataset: Dataset, plan: PartitionPlan) -> list[Dataset]:
    return [dataset.subset(block) for block in plan.assignment]


def global_sample(dataset: Dataset, plan: PartitionPlan) -> Dataset:
    """Union of all blocks in sorted index order: the pooled training set."""
    idx = np.sort(np.concatenate([np.asarray(b, dtype=np.int64) for b in plan.assignment]))
    return dataset.subset(idx)


def _standardize(X: np.ndarray) -> np.ndarray:
    """Center columns and scale unit variance; zero-variance columns stay centered."""
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    Z = X - mu
    nz = sd > 0
    Z[:, nz] /= sd[nz]
    return Z


def first_principal_component(X) -> np.ndarray:
    """Leading eigenvector of the standardized covariance, by power iteration.

    Deterministic: the start vector comes from a fixed internal seed and
    iteration stops once the Rayleigh quotient is stable to a relative
    1e-9 and the direction itself has stopped moving (sup change below
    1e-13), or after 10000 steps.  The sign is fixed so the
    largest-magnitude coordinate is positive.  Raises on fewer than two
    instances or on all-identical instances (zero covariance).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two instances for a principal component")
    Z = _standardize(X)
    C = (Z.T @ Z) / X.shape[0]
    if not np.any(np.abs(C) > 0):
        raise ValueError("zero covariance: all instances identical")
    rng = np.random.default_rng(180451)
    v = rng.standard_normal(C.shape[0])
    v /= np.linalg.norm(v)
    lam_prev = np.inf
    for _ in range(10000):
        w = C @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # Start vector fell in the null space; re-draw.
            v = rng.standard_normal(C.shape[0])
            v /= np.linalg.norm(v)
            continue
        v_new = w / norm
        lam = float(v_new @ C @ v_new)
        moved = float(np.max(np.abs(v_new - v)))
        v = v_new
        if abs(lam - lam_prev) <= 1e-9 * abs(lam) and moved <= 1e-13:
            break
        lam_prev = lam
    j = int(np.argmax(np.abs(v)))
    if v[j] < 0:
        v = -v
    return v


def _draw(dataset: Dataset, n: int, m_v: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1 or m_v < 1:
        raise ValueError(f"need n >= 1 and m_v >= 1, got n={n}, m_v={m_v}")
    if n * m_v > dataset.m:
        raise ValueError(f"partition wants {n * m_v} instances, dataset has {dataset.m}")
    return rng.choice(dataset.m, size=n * m_v, replace=False)


def _blocks(order: np.ndarray, mode: str, n: int, m_v: int) -> PartitionPlan:
    assignment = tuple(
        tuple(int(g) for g in order[v * m_v : (v + 1) * m_v]) for v in range(n)
    )
    return PartitionPlan(mode, n, m_v, assignment)


def split_iid(dataset: Dataset, n: int, m_v: int, rng: np.random.Generator) -> PartitionPlan:
    take = _draw(dataset, n, m_v, rng)
    return _blocks(take, "iid", n, m_v)


def split_drift_x(dataset: Dataset, n: int, m_v: int, rng: np.random.Generator) -> PartitionPlan:
    take = _draw(dataset, n, m_v, rng)
    Z = _standardize(dataset.X[take])
    proj = Z @ first_principal_component(dataset.X[take])
    order = take[np.argsort(proj, kind="stable")]
    return _blocks(order, "drift_x", n, m_v)


def _class_pools(y: np.ndarray, take: np.ndarray, r: int) -> list[list[int]]:
    labels = y[take]
    return [[int(g) for g in take[labels == c]] for c in range(1, r + 1)]


def _deal_by_class(pools: list[list[int]], n: int, m_v: int, r: int) -> list[list[int]]:
    # Node v prefers class ((v - 1) mod r) + 1 and tops up cyclically
    # from the next non-empty pool.
    cursor = [0] * r
    blocks: list[list[int]] = []
    for v in range(1, n + 1):
        block: list[int] = []
        c = (v - 1) % r
        while len(block) < m_v:
            if cursor[c] < len(pools[c]):
                block.append(pools[c][cursor[c]])
                cursor[c] += 1
            else:
                c = (c + 1) % r
        blocks.append(block)
    return blocks


def split_drift_y(dataset: Dataset, n: int, m_v: int, rng: np.random.Generator) -> PartitionPlan:
    take = _draw(dataset, n, m_v, rng)
    r = dataset.schema.class_cardinality
    pools = _class_pools(dataset.y, take, r)
    blocks = _deal_by_class(pools, n, m_v, r)
    return PartitionPlan("drift_y", n, m_v, tuple(tuple(b) for b in blocks))


def split_drift_xy(dataset: Dataset, n: int, m_v: int, rng: np.random.Generator) -> PartitionPlan:
    take = _draw(dataset, n, m_v, rng)
    r = dataset.schema.class_cardinality
    Z = _standardize(dataset.X[take])
    proj = Z @ first_principal_component(dataset.X[take])
    rank = {int(g): p for g, p in zip(take, proj)}
    pools = _class_pools(dataset.y, take, r)
    pools = [sorted(pool, key=lambda g: rank[g]) for pool in pools]
    blocks = _deal_by_class(pools, n, m_v, r)
    return PartitionPlan("drift_xy", n, m_v, tuple(tuple(b) for b in blocks))


SPLITTERS = {
    "iid": split_iid,
    "drift_x": split_drift_x,
    "drift_y": split_drift_y,
    "drift_xy": split_drift_xy,
}
