"""Collaborative calibration over a sparse graph, next to its baselines.

Each round every node averages the statistics of its neighborhood and
calibrates the average against its own data.  Metrics compare the mean
local model to the calibrated model trained on the pooled data (the
gold standard) and to plain maximum likelihood.
"""
import numpy as np

from riskcal import (
    METRICS_COLUMNS,
    RewireSchedule,
    evaluate,
    gaussian_blobs,
    local_datasets,
    m0_heuristic,
    run_baseline,
    run_crc,
    split_iid,
    train_test_split,
)

rng = np.random.default_rng(3)
n, m_v, t_max, lr = 8, 50, 16, 0.05
pool = gaussian_blobs(1400, separation=2.8, rng=rng)
train, test = train_test_split(pool, train_size=n * m_v, test_size=800, rng=rng)

plan = split_iid(train, n, m_v, rng)
parts = local_datasets(train, plan)

m0 = m0_heuristic(train.m, lr, n)
print(f"{n} nodes x {m_v} instances, aggregate mass m0 = {m0:.0f}")

rc_params, rc_trace = run_baseline("rc", train, lr=lr, t_max=t_max)
baseline = []
for rec in rc_trace.records[1:]:
    te, _ = evaluate(rec.params, test)
    baseline.append((rec.err01, te))

ml_params, _ = run_baseline("ml", train)
ml_test, _ = evaluate(ml_params, test)
print(f"maximum likelihood test error: {ml_test:.4f}")

result = run_crc(
    parts,
    RewireSchedule("tree"),
    m0=m0,
    t_max=t_max,
    rng=np.random.default_rng(9),
    global_train=train,
    global_test=test,
    baseline=baseline,
)

idx = {name: k for k, name in enumerate(METRICS_COLUMNS)}
print(f"{'t':>3} {'test_mean':>10} {'test_std':>9} {'rc_test':>8} {'test_gap':>9}")
for row in (result.metrics[0], result.metrics[3], result.metrics[7], result.metrics[-1]):
    vals = row.as_row()
    print(
        f"{vals[idx['t']]:3.0f} {vals[idx['test_err_mean']]:10.4f} "
        f"{vals[idx['test_err_std']]:9.4f} {vals[idx['rc_test_err']]:8.4f} "
        f"{vals[idx['test_gap']]:9.4f}"
    )

per_node = [evaluate(st.params, test)[0] for st in result.states]
print("final per-node test errors:", np.round(per_node, 4))
