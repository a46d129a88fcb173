"""Centralized risk calibration against the maximum likelihood fit.

Starting from uniform statistics, each iteration nudges the statistics
by lr times (statistics of the labeled data minus statistics the model
expects on the same instances).  The soft error decreases until the
model settles; the trace records every iteration so the best round can
be picked afterwards.
"""
import numpy as np

from riskcal import evaluate, gaussian_blobs, rc, run_baseline, train_test_split, uniform_init

rng = np.random.default_rng(2)
pool = gaussian_blobs(1600, d=2, r=2, separation=2.4, rng=rng)
train, test = train_test_split(pool, train_size=1000, test_size=600, rng=rng)

ml_params, _ = run_baseline("ml", train)
ml_train, _ = evaluate(ml_params, train)
ml_test, _ = evaluate(ml_params, test)
print(f"maximum likelihood: train {ml_train:.4f}  test {ml_test:.4f}")

trace = rc(train, lr=0.05, t_max=40, init=uniform_init(train.schema, float(train.m)))
for rec in trace.records[::8]:
    print(f"  t={rec.t:2d}  soft={rec.soft_err:.4f}  err01={rec.err01:.4f}")

best = trace.best
final = trace.final
print(f"best iteration {best.t} (soft {best.soft_err:.4f}), final iteration {final.t}")
final_test, _ = evaluate(final.params, test)
print(f"calibrated:        train {final.err01:.4f}  test {final_test:.4f}")
