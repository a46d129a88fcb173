"""Naive Bayes over mixed features, driven by additive sufficient statistics.

A model is determined by one flat statistics vector per schema:

* class block: r pseudo-counts, one per class,
* each discrete feature: an (r, cardinality) block of joint pseudo-counts,
* each continuous feature: an (r, 3) block of per-class moments
  (zeroth, first, second), i.e. weight, sum of x, sum of x^2.

Statistics compose by plain addition and scalar multiplication, which is
what lets local statistics be averaged across a network.  Parameters are
the closed-form maximum likelihood mapping from statistics: categorical
tables by row normalization, Gaussians by moment matching

    mu = s1 / s0,    var = s2 / s0 - mu^2.

Posteriors are evaluated in log space with max subtraction; zero
probabilities are allowed and yield exact 0/1 posteriors.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import log, pi

import numpy as np

from .data import Continuous, Dataset, Discrete, FeatureSchema, validate_instances

# Smallest admissible count / zeroth moment after projection.
COUNT_FLOOR = 1e-9
# Smallest admissible Gaussian variance.
VAR_FLOOR = 1e-6

_LOG_2PI = log(2.0 * pi)


@lru_cache(maxsize=None)
def _layout(schema: FeatureSchema) -> tuple[tuple[int, ...], int]:
    """Block start offsets (one per feature, plus the total length)."""
    r = schema.class_cardinality
    starts = []
    pos = r
    for spec in schema.features:
        starts.append(pos)
        pos += r * spec.cardinality if isinstance(spec, Discrete) else r * 3
    return tuple(starts), pos


def stats_length(schema: FeatureSchema) -> int:
    return _layout(schema)[1]


@dataclass
class StatsVector:
    """Flat additive statistics for one schema.

    ``values`` is a float64 vector laid out as class block, then one
    block per feature in schema order.  Block accessors return writable
    views into the flat array.
    """

    schema: FeatureSchema
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (stats_length(self.schema),):
            raise ValueError(f"expected {stats_length(self.schema)} components, got {v.shape}")
        self.values = v

    @property
    def class_block(self) -> np.ndarray:
        return self.values[: self.schema.class_cardinality]

    def feature_block(self, i: int) -> np.ndarray:
        starts, total = _layout(self.schema)
        r = self.schema.class_cardinality
        end = starts[i + 1] if i + 1 < len(starts) else total
        width = (end - starts[i]) // r
        return self.values[starts[i] : end].reshape(r, width)

    @property
    def ess(self) -> float:
        """Equivalent sample size: total mass in the class block."""
        return float(self.class_block.sum())

    def copy(self) -> "StatsVector":
        return StatsVector(self.schema, self.values.copy())

    def _check_schema(self, other: "StatsVector") -> None:
        if self.schema != other.schema:
            raise ValueError("schema mismatch between statistics vectors")

    def __add__(self, other: "StatsVector") -> "StatsVector":
        self._check_schema(other)
        return StatsVector(self.schema, self.values + other.values)

    def __sub__(self, other: "StatsVector") -> "StatsVector":
        self._check_schema(other)
        return StatsVector(self.schema, self.values - other.values)

    def __mul__(self, scalar: float) -> "StatsVector":
        return StatsVector(self.schema, self.values * float(scalar))

    __rmul__ = __mul__

    def to_text(self) -> str:
        """Full-precision key/value dump, one component per line."""
        lines = [f"ess = {self.ess!r}"]
        for y, v in enumerate(self.class_block, start=1):
            lines.append(f"class[{y}] = {float(v)!r}")
        for i, spec in enumerate(self.schema.features):
            block = self.feature_block(i)
            if isinstance(spec, Discrete):
                for y in range(block.shape[0]):
                    for k in range(block.shape[1]):
                        lines.append(f"feature[{i}].count[{y + 1}][{k + 1}] = {float(block[y, k])!r}")
            else:
                for y in range(block.shape[0]):
                    for j in range(3):
                        lines.append(f"feature[{i}].moment[{y + 1}][{j}] = {float(block[y, j])!r}")
        return "\n".join(lines) + "\n"


def zero_stats(schema: FeatureSchema) -> StatsVector:
    return StatsVector(schema, np.zeros(stats_length(schema)))


@dataclass
class NBParams:
    """Classifier parameters: class probabilities plus per-feature blocks.

    Discrete features carry an (r, cardinality) table of conditional
    probabilities; continuous features an (r, 2) block with means in
    column 0 and variances in column 1.
    """

    schema: FeatureSchema
    class_probs: np.ndarray
    feature_params: tuple[np.ndarray, ...]

    def to_text(self) -> str:
        lines = []
        for y, v in enumerate(self.class_probs, start=1):
            lines.append(f"class_prob[{y}] = {float(v)!r}")
        for i, spec in enumerate(self.schema.features):
            block = self.feature_params[i]
            if isinstance(spec, Discrete):
                for y in range(block.shape[0]):
                    for k in range(block.shape[1]):
                        lines.append(f"feature[{i}].prob[{y + 1}][{k + 1}] = {float(block[y, k])!r}")
            else:
                for y in range(block.shape[0]):
                    lines.append(f"feature[{i}].mean[{y + 1}] = {float(block[y, 0])!r}")
                    lines.append(f"feature[{i}].var[{y + 1}] = {float(block[y, 1])!r}")
        return "\n".join(lines) + "\n"


def stat_map_instance(x, y: int, schema: FeatureSchema) -> StatsVector:
    """Statistics of a single labelled instance.

    One unit of class mass on label y; for discrete features one unit on
    the observed (y, value) cell; for continuous features the moment
    triple (1, x, x^2) in class y's row.
    """
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    validate_instances(schema, x)
    y = int(y)
    if not 1 <= y <= schema.class_cardinality:
        raise ValueError(f"label {y} outside 1..{schema.class_cardinality}")
    out = zero_stats(schema)
    out.class_block[y - 1] = 1.0
    for i, spec in enumerate(schema.features):
        block = out.feature_block(i)
        if isinstance(spec, Discrete):
            block[y - 1, int(x[0, i]) - 1] = 1.0
        else:
            block[y - 1, 0] = 1.0
            block[y - 1, 1] = x[0, i]
            block[y - 1, 2] = x[0, i] ** 2
    return out


def stat_map_dataset(dataset: Dataset) -> StatsVector:
    """Sum of instance statistics over a dataset; ess equals its size."""
    if dataset.m == 0:
        raise ValueError("empty dataset has no statistics")
    schema = dataset.schema
    r = schema.class_cardinality
    out = zero_stats(schema)
    y0 = dataset.y - 1
    out.class_block[:] = np.bincount(y0, minlength=r)
    for i, spec in enumerate(schema.features):
        block = out.feature_block(i)
        col = dataset.X[:, i]
        if isinstance(spec, Discrete):
            flat = y0 * spec.cardinality + (col.astype(np.int64) - 1)
            block[:] = np.bincount(flat, minlength=r * spec.cardinality).reshape(r, spec.cardinality)
        else:
            block[:, 0] = np.bincount(y0, minlength=r)
            block[:, 1] = np.bincount(y0, weights=col, minlength=r)
            block[:, 2] = np.bincount(y0, weights=col * col, minlength=r)
    return out


def prob_stat_map(X, params: NBParams) -> StatsVector:
    """Expected statistics of unlabelled instances under a model.

    Each instance contributes to every class, weighted by its posterior:
    the result equals sum over instances x and classes y of
    p(y | x) * stat_map_instance(x, y).  The ess equals the number of
    instances because posteriors sum to one.
    """
    X = np.asarray(X, dtype=np.float64)
    schema = params.schema
    validate_instances(schema, X)
    r = schema.class_cardinality
    P = posterior_matrix(params, X)  # (m, r)
    out = zero_stats(schema)
    out.class_block[:] = P.sum(axis=0)
    for i, spec in enumerate(schema.features):
        block = out.feature_block(i)
        col = X[:, i]
        if isinstance(spec, Discrete):
            codes = col.astype(np.int64) - 1
            for k in range(spec.cardinality):
                mask = codes == k
                if mask.any():
                    block[:, k] = P[mask].sum(axis=0)
        else:
            block[:, 0] = P.sum(axis=0)
            block[:, 1] = P.T @ col
            block[:, 2] = P.T @ (col * col)
    return out


def _log_joint_many(params_list, X: np.ndarray) -> np.ndarray:
    """Log joint log p(y) + sum_i log p(x_i | y) for a batch of models.

    Returns shape (n_models, m, r).  Zero probabilities produce -inf,
    which flows through argmax and softmax exactly.
    """
    K = len(params_list)
    m = X.shape[0]
    schema = params_list[0].schema
    r = schema.class_cardinality
    out = np.empty((K, m, r), dtype=np.float64)
    with np.errstate(divide="ignore"):
        cp = np.log(np.stack([p.class_probs for p in params_list]))  # (K, r)
        out[:] = cp[:, None, :]
        for i, spec in enumerate(schema.features):
            col = X[:, i]
            if isinstance(spec, Discrete):
                tables = np.log(np.stack([p.feature_params[i] for p in params_list]))  # (K, r, c)
                codes = col.astype(np.int64) - 1
                out += tables[:, :, codes].transpose(0, 2, 1)
            else:
                block = np.stack([p.feature_params[i] for p in params_list])  # (K, r, 2)
                mu = block[:, None, :, 0]
                var = block[:, None, :, 1]
                diff = col[None, :, None] - mu
                out += -0.5 * (diff * diff / var + np.log(var) + _LOG_2PI)
    return out


def _softmax_last(logp: np.ndarray) -> np.ndarray:
    mx = logp.max(axis=-1, keepdims=True)
    # All -inf rows cannot occur: class priors are positive after projection.
    z = np.exp(logp - mx)
    return z / z.sum(axis=-1, keepdims=True)


def posterior_matrix(params: NBParams, X) -> np.ndarray:
    """Posterior p(y | x) for each row of X; shape (m, r), rows sum to 1."""
    X = np.asarray(X, dtype=np.float64)
    validate_instances(params.schema, X)
    return _softmax_last(_log_joint_many([params], X)[0])


def posterior(params: NBParams, x) -> np.ndarray:
    """Posterior class distribution of a single instance."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return posterior_matrix(params, x)[0]


def predict_matrix(params: NBParams, X) -> np.ndarray:
    """Most probable class per row, ties resolved to the lowest index."""
    X = np.asarray(X, dtype=np.float64)
    validate_instances(params.schema, X)
    return np.argmax(_log_joint_many([params], X)[0], axis=-1).astype(np.int64) + 1


def predict(params: NBParams, x) -> int:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return int(predict_matrix(params, x)[0])


def param_map(stats: StatsVector) -> NBParams:
    """Closed-form maximum likelihood parameters from statistics.

    Requires projected statistics: every count and zeroth moment at
    least COUNT_FLOOR.  Variances are floored at VAR_FLOOR.
    """
    schema = stats.schema
    cls = stats.class_block
    if cls.min() < COUNT_FLOOR:
        raise ValueError("statistics below the count floor; project before mapping to parameters")
    feature_params = []
    for i, spec in enumerate(schema.features):
        block = stats.feature_block(i)
        if isinstance(spec, Discrete):
            if block.min() < COUNT_FLOOR:
                raise ValueError("statistics below the count floor; project before mapping to parameters")
            feature_params.append(block / block.sum(axis=1, keepdims=True))
        else:
            s0, s1, s2 = block[:, 0], block[:, 1], block[:, 2]
            if s0.min() < COUNT_FLOOR:
                raise ValueError("statistics below the count floor; project before mapping to parameters")
            mu = s1 / s0
            var = np.maximum(s2 / s0 - mu * mu, VAR_FLOOR)
            feature_params.append(np.column_stack([mu, var]))
    return NBParams(schema, cls / cls.sum(), tuple(feature_params))


def uniform_init(schema: FeatureSchema, m0: float) -> StatsVector:
    """Statistics of total mass m0 whose model is maximally uninformative.

    Class mass m0/r per class; discrete cells m0/(r * cardinality), so
    every conditional table is uniform; continuous moments
    (m0/r, 0, m0/r), giving mean 0 and variance 1 for every class.  The
    resulting posterior is uniform for every instance, and the
    construction is homogeneous: uniform_init(c * m0) equals
    c * uniform_init(m0) componentwise.
    """
    m0 = float(m0)
    if not m0 > 0:
        raise ValueError(f"initial mass must be positive, got {m0}")
    r = schema.class_cardinality
    out = zero_stats(schema)
    out.class_block[:] = m0 / r
    for i, spec in enumerate(schema.features):
        block = out.feature_block(i)
        if isinstance(spec, Discrete):
            block[:] = m0 / (r * spec.cardinality)
        else:
            block[:, 0] = m0 / r
            block[:, 1] = 0.0
            block[:, 2] = m0 / r
    return out


# Models evaluated together per batch; bounds the (K, m, r) temporaries.
_EVAL_CHUNK = 64


def evaluate(params: NBParams, dataset: Dataset) -> tuple[float, float]:
    """Mean 0-1 error and mean soft error (1 - posterior of true class)."""
    err01, soft = evaluate_many([params], dataset)
    return float(err01[0]), float(soft[0])


def evaluate_many(params_list, dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate many models on one dataset in a single vectorized pass.

    Returns two arrays of length len(params_list): mean 0-1 errors and
    mean soft errors.  Much faster than per-model evaluation when a
    network of models is scored each round.
    """
    if dataset.m == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    params_list = list(params_list)
    for p in params_list:
        if p.schema != dataset.schema:
            raise ValueError("schema mismatch between model and dataset")
    err01 = np.empty(len(params_list))
    soft = np.empty(len(params_list))
    y0 = dataset.y - 1
    rows = np.arange(dataset.m)
    for lo in range(0, len(params_list), _EVAL_CHUNK):
        chunk = params_list[lo : lo + _EVAL_CHUNK]
        logj = _log_joint_many(chunk, dataset.X)  # (K, m, r)
        pred = logj.argmax(axis=-1)
        err01[lo : lo + len(chunk)] = (pred != y0[None, :]).mean(axis=1)
        post = _softmax_last(logj)
        soft[lo : lo + len(chunk)] = (1.0 - post[:, rows, y0]).mean(axis=1)
    return err01, soft
