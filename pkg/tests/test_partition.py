"""Node assignment splitters and the principal-component helper."""
from __future__ import annotations

import numpy as np
import pytest

from conftest import mixed_schema, random_dataset
from riskcal.data import Continuous, Dataset, FeatureSchema
from riskcal.partition import (
    PartitionPlan,
    SPLITTERS,
    _standardize,
    first_principal_component,
    global_sample,
    local_datasets,
    split_drift_x,
    split_drift_xy,
    split_drift_y,
    split_iid,
)


def blob_dataset(m=400, r=2, seed=0):
    rng = np.random.default_rng(seed)
    schema = FeatureSchema((Continuous(), Continuous(), Continuous()), r)
    y = np.arange(m) % r + 1
    rng.shuffle(y)
    X = rng.standard_normal((m, 3)) + 2.5 * (y[:, None] - (r + 1) / 2)
    return Dataset(schema, X, y)


@pytest.mark.parametrize("mode", list(SPLITTERS))
def test_splitters_common_contract(mode):
    ds = blob_dataset()
    n, m_v = 7, 30
    plan = SPLITTERS[mode](ds, n, m_v, np.random.default_rng(1))
    assert plan.mode == mode and plan.n == n and plan.m_v == m_v
    flat = [g for block in plan.assignment for g in block]
    assert len(flat) == len(set(flat)) == n * m_v
    assert all(0 <= g < ds.m for g in flat)
    # deterministic under the same seed
    again = SPLITTERS[mode](ds, n, m_v, np.random.default_rng(1))
    assert again.assignment == plan.assignment
    # materialization
    locs = local_datasets(ds, plan)
    assert all(loc.m == m_v for loc in locs)
    pooled = global_sample(ds, plan)
    assert pooled.m == n * m_v


def test_split_requires_enough_instances():
    ds = blob_dataset(m=50)
    with pytest.raises(ValueError, match="wants"):
        split_iid(ds, 10, 6, np.random.default_rng(0))


def test_split_iid_uses_all_when_exact():
    ds = blob_dataset(m=60)
    plan = split_iid(ds, 6, 10, np.random.default_rng(2))
    flat = sorted(g for block in plan.assignment for g in block)
    assert flat == list(range(60))


def test_split_drift_x_blocks_ordered_along_component():
    ds = blob_dataset()
    n, m_v = 8, 40
    plan = split_drift_x(ds, n, m_v, np.random.default_rng(3))
    taken = np.array([g for block in plan.assignment for g in block])
    Z = _standardize(ds.X[taken])
    proj = Z @ first_principal_component(ds.X[taken])
    blocks = proj.reshape(n, m_v)
    for v in range(n - 1):
        assert blocks[v].max() <= blocks[v + 1].min() + 1e-12


def test_split_drift_y_single_class_nodes_when_balanced():
    ds = blob_dataset(m=400, r=2)
    # full draw: pools are exactly 200 per class, so every node fills cleanly
    plan = split_drift_y(ds, 4, 100, np.random.default_rng(4))
    labels_per_node = [set(int(ds.y[g]) for g in block) for block in plan.assignment]
    assert labels_per_node == [{1}, {2}, {1}, {2}]


def test_split_drift_y_tops_up_cyclically():
    # more nodes asking for class 1 than class 1 can fill
    rng = np.random.default_rng(5)
    schema = FeatureSchema((Continuous(),), 2)
    y = np.array([1] * 30 + [2] * 90)
    X = rng.standard_normal((120, 1)) + y[:, None]
    ds = Dataset(schema, X, y)
    plan = split_drift_y(ds, 3, 40, rng)
    counts = [np.bincount(ds.y[list(block)], minlength=3)[1:] for block in plan.assignment]
    # nodes 1 and 3 prefer class 1 but only 30 such instances exist in total
    total_class1 = sum(c[0] for c in counts)
    assert total_class1 == 30
    assert counts[1][1] == 40  # node 2 got pure class 2


def test_split_drift_xy_sorts_within_class():
    ds = blob_dataset(m=400, r=2)
    n, m_v = 4, 100  # full draw keeps class pools exactly balanced
    plan = split_drift_xy(ds, n, m_v, np.random.default_rng(6))
    taken = np.array([g for block in plan.assignment for g in block])
    Z = _standardize(ds.X[taken])
    v1 = first_principal_component(ds.X[taken])
    proj = {int(g): float(p) for g, p in zip(taken, Z @ v1)}
    # nodes 1 and 3 both draw class 1: node 1 must hold smaller projections
    assert set(int(ds.y[g]) for g in plan.assignment[0]) == {1}
    assert set(int(ds.y[g]) for g in plan.assignment[2]) == {1}
    max_first = max(proj[g] for g in plan.assignment[0])
    min_third = min(proj[g] for g in plan.assignment[2])
    assert max_first <= min_third + 1e-12


def test_first_principal_component_matches_eigendecomposition():
    rng = np.random.default_rng(7)
    for _ in range(25):
        X = rng.normal(size=(rng.integers(5, 40), rng.integers(2, 6)))
        v = first_principal_component(X)
        Z = _standardize(np.asarray(X, float))
        C = Z.T @ Z / X.shape[0]
        w, V = np.linalg.eigh(C)
        lead = V[:, -1]
        angle = np.arccos(min(1.0, abs(float(v @ lead))))
        assert angle < 1e-6
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
        assert v[int(np.argmax(np.abs(v)))] > 0  # sign convention


def test_first_principal_component_degenerate_inputs():
    with pytest.raises(ValueError, match="two instances"):
        first_principal_component(np.ones((1, 3)))
    with pytest.raises(ValueError, match="identical"):
        first_principal_component(np.ones((5, 3)))


def test_partition_plan_validation():
    with pytest.raises(ValueError, match="overlap"):
        PartitionPlan("iid", 2, 2, ((0, 1), (1, 2)))
    with pytest.raises(ValueError, match="block size"):
        PartitionPlan("iid", 2, 2, ((0, 1), (2,)))
    with pytest.raises(ValueError, match="unknown partition"):
        PartitionPlan("weird", 1, 2, ((0, 1),))


def test_partition_plan_csv(tmp_path):
    plan = PartitionPlan("iid", 2, 3, ((4, 0, 2), (1, 3, 5)))
    p = tmp_path / "plan.csv"
    plan.to_csv(p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "node,global_index"
    assert lines[1] == "1,4"
    assert lines[-1] == "2,5"
    assert len(lines) == 7


def test_global_sample_sorted_union():
    ds = blob_dataset(m=60)
    plan = PartitionPlan("iid", 2, 3, ((9, 1, 5), (0, 7, 3)))
    pooled = global_sample(ds, plan)
    assert np.array_equal(pooled.X, ds.X[[0, 1, 3, 5, 7, 9]])


def test_drift_splits_work_on_mixed_schema():
    rng = np.random.default_rng(8)
    ds = random_dataset(mixed_schema(3), 200, rng)
    for mode in ("drift_x", "drift_xy"):
        plan = SPLITTERS[mode](ds, 5, 20, rng)
        assert len(plan.assignment) == 5
