"""Synthetic classification datasets used by the CLI and the test suite."""
from __future__ import annotations

import numpy as np

from .data import Continuous, Dataset, Discrete, FeatureSchema


def _balanced_labels(m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    # Near-equal class counts, shuffled so row order is exchangeable.
    y = np.arange(m) % r + 1
    rng.shuffle(y)
    return y.astype(np.int64)


def gaussian_blobs(
    m: int,
    *,
    d: int = 2,
    r: int = 2,
    separation: float = 4.0,
    rng: np.random.Generator,
) -> Dataset:
    """Unit-variance Gaussian classes spaced ``separation`` apart.

    Class centers sit along the diagonal direction, symmetric about the
    origin, so the data is roughly centered and unit scale.
    """
    if m < r:
        raise ValueError(f"need at least {r} instances for {r} classes")
    y = _balanced_labels(m, r, rng)
    direction = np.ones(d) / np.sqrt(d)
    offsets = np.arange(r) - (r - 1) / 2.0
    centers = separation * offsets[:, None] * direction[None, :]  # (r, d)
    X = rng.standard_normal((m, d)) + centers[y - 1]
    schema = FeatureSchema(tuple(Continuous() for _ in range(d)), r)
    return Dataset(schema, X, y)


def categorical_mixture(
    m: int,
    *,
    d: int = 3,
    r: int = 2,
    cardinality: int = 4,
    skew: float = 0.7,
    rng: np.random.Generator,
) -> Dataset:
    """Categorical features whose preferred value rotates with the class.

    For class y and feature i the value ((y - 1 + i) mod cardinality) + 1
    receives probability skew + (1 - skew)/cardinality; the rest share
    the remainder uniformly.
    """
    if not 0.0 <= skew < 1.0:
        raise ValueError(f"skew must be in [0, 1), got {skew}")
    if cardinality < 2:
        raise ValueError(f"cardinality must be >= 2, got {cardinality}")
    y = _balanced_labels(m, r, rng)
    X = np.empty((m, d), dtype=np.float64)
    base = (1.0 - skew) / cardinality
    for c in range(1, r + 1):
        mask = y == c
        for i in range(d):
            probs = np.full(cardinality, base)
            probs[(c - 1 + i) % cardinality] += skew
            X[mask, i] = rng.choice(cardinality, size=int(mask.sum()), p=probs) + 1
    schema = FeatureSchema(tuple(Discrete(cardinality) for _ in range(d)), r)
    return Dataset(schema, X, y)


def mixed_dataset(
    m: int,
    *,
    d_continuous: int = 2,
    d_discrete: int = 2,
    r: int = 2,
    cardinality: int = 4,
    separation: float = 3.0,
    skew: float = 0.6,
    rng: np.random.Generator,
) -> Dataset:
    """Continuous blob features followed by skewed categorical features."""
    if d_continuous < 1 or d_discrete < 1:
        raise ValueError("need at least one feature of each kind")
    y = _balanced_labels(m, r, rng)
    direction = np.ones(d_continuous) / np.sqrt(d_continuous)
    offsets = np.arange(r) - (r - 1) / 2.0
    centers = separation * offsets[:, None] * direction[None, :]
    Xc = rng.standard_normal((m, d_continuous)) + centers[y - 1]
    Xd = np.empty((m, d_discrete), dtype=np.float64)
    base = (1.0 - skew) / cardinality
    for c in range(1, r + 1):
        mask = y == c
        for i in range(d_discrete):
            probs = np.full(cardinality, base)
            probs[(c - 1 + i) % cardinality] += skew
            Xd[mask, i] = rng.choice(cardinality, size=int(mask.sum()), p=probs) + 1
    schema = FeatureSchema(
        tuple(Continuous() for _ in range(d_continuous))
        + tuple(Discrete(cardinality) for _ in range(d_discrete)),
        r,
    )
    return Dataset(schema, np.column_stack([Xc, Xd]), y)


GENERATORS = {
    "blobs": gaussian_blobs,
    "categorical": categorical_mixture,
    "mixed": mixed_dataset,
}
