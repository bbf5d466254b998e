"""Segmented nearest-neighbor voting classifier.

A d-dimensional query is split into c contiguous blocks of length d/c. Each
block is compared against a per-subspace dictionary holding n segments per
class, the k nearest entries of each subspace cast one class vote apiece,
and the class with the most of the k*c votes wins.

Randomness conventions (all reproducible from one seeded generator):

* distance ties at the k-th neighbor boundary are broken uniformly at random
  among the tied entries, by exact floating-point equality of squared
  distances (no epsilon);
* tie-break noise is consumed for every subspace, in ascending subspace
  order, before the final tally;
* a final tally tie consumes one more draw and picks uniformly among the
  classes attaining the maximum.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ConfigError, DimensionError, StateError

RngLike = np.random.Generator | int | None


def as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class SegmentationConfig:
    """Dimension d split into c contiguous segments of length d // c."""

    d: int
    c: int

    def __post_init__(self) -> None:
        if self.d < 1 or self.c < 1:
            raise ConfigError(f"d and c must be >= 1, got d={self.d}, c={self.c}")
        if self.d % self.c != 0:
            raise ConfigError(f"segment count c={self.c} must divide d={self.d}")

    @property
    def segment_length(self) -> int:
        return self.d // self.c


@dataclass
class LabeledDataset:
    """Feature vectors with dense class labels in [0, K).

    ``label_names`` retains the original labels when a loader remapped them.
    """

    vectors: np.ndarray
    labels: np.ndarray
    label_names: list | None = None

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.vectors.ndim != 2:
            raise DimensionError("vectors must be a 2-D (count, d) array")
        if self.labels.shape != (self.vectors.shape[0],):
            raise DimensionError("labels must have one entry per vector")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.K):
            raise ConfigError("labels must be dense indices in [0, K)")

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def K(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    def class_indices(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)


class OpCounter:
    """Counts coordinate-difference operations spent in distance evaluation.

    Safe to share across concurrent classification calls.
    """

    def __init__(self) -> None:
        self.coordinate_ops = 0
        self._lock = threading.Lock()

    def add(self, n: int) -> None:
        with self._lock:
            self.coordinate_ops += int(n)


@dataclass
class SegmentDictionaries:
    """Per-subspace dictionaries, immutable after construction.

    ``segments`` has shape (c, n*K, segment_length); entries are class-major,
    so entry slot i holds class ``labels[i] = i // n``. ``sources[j, i]`` is
    the training-word index that contributed entry i of subspace j
    (diagnostics only).
    """

    config: SegmentationConfig
    n: int
    K: int
    segments: np.ndarray
    labels: np.ndarray
    sources: np.ndarray

    @property
    def entries_per_subspace(self) -> int:
        return self.n * self.K

    def subspace(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """(segments, labels) of subspace j."""
        return self.segments[j], self.labels


@dataclass
class VoteOutcome:
    """Result of classifying one query: k votes per subspace plus the tally."""

    per_segment_votes: np.ndarray  # shape (c, k), class indices
    tally: np.ndarray  # shape (K,)
    decided_class: int
    tie_broken: bool = field(default=False)


def squared_euclidean(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of squared coordinate differences (argmin-equivalent to the
    Euclidean distance, exact for small integers)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(diff @ diff)


def segment_vector(v: np.ndarray, cfg: SegmentationConfig) -> list[np.ndarray]:
    """Split v into c contiguous blocks; concatenating them reproduces v."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (cfg.d,):
        raise DimensionError(f"expected a vector of dimension {cfg.d}, got {v.shape}")
    return list(v.reshape(cfg.c, cfg.segment_length))


def build_dictionaries(
    train: LabeledDataset,
    cfg: SegmentationConfig,
    n: int,
    rng: RngLike = None,
) -> SegmentDictionaries:
    """Sample n segments per class per subspace, without replacement.

    Sampling is independent across subspaces, so entries of D_j and D_j' may
    stem from different training words. Deterministic given the seed.
    """
    if train.d != cfg.d:
        raise ConfigError(f"dataset dimension {train.d} != config dimension {cfg.d}")
    if n < 1:
        raise ConfigError("n must be >= 1")
    K = train.K
    if K < 1:
        raise ConfigError("dataset has no classes")
    counts = train.class_counts()
    if n > counts.min():
        short = int(np.argmin(counts))
        raise CapacityError(
            f"n={n} exceeds the {counts[short]} words of class {short} "
            "(sampling is without replacement)"
        )
    rng = as_rng(rng)
    c, length = cfg.c, cfg.segment_length
    blocks = train.vectors.reshape(len(train.labels), c, length)

    segments = np.empty((c, n * K, length), dtype=np.float64)
    sources = np.empty((c, n * K), dtype=np.int64)
    subspace_idx = np.arange(c)[:, None]
    for k in range(K):
        pool = train.class_indices(k)
        if n == len(pool):
            picks = np.broadcast_to(pool, (c, n))
        else:
            # n smallest of i.i.d. uniform keys per row = one independent
            # uniform without-replacement draw per subspace
            keys = rng.random((c, len(pool)))
            picks = pool[np.argpartition(keys, n - 1, axis=1)[:, :n]]
        sources[:, k * n : (k + 1) * n] = picks
        segments[:, k * n : (k + 1) * n] = blocks[picks, subspace_idx]
    labels = np.repeat(np.arange(K, dtype=np.int64), n)
    return SegmentDictionaries(cfg, n, K, segments, labels, sources)


def _ranked_labels(
    dists: np.ndarray, labels: np.ndarray, noise: np.ndarray
) -> np.ndarray:
    """Entry labels sorted by distance, exact ties shuffled uniformly.

    ``noise`` supplies an i.i.d. uniform secondary sort key, which realizes a
    uniform random order among entries with exactly equal distance.
    """
    order = np.lexsort((noise, dists))
    return labels[order]


def segment_vote(
    z_j: np.ndarray,
    dictionary: tuple[np.ndarray, np.ndarray],
    k: int,
    rng: RngLike = None,
    counter: OpCounter | None = None,
) -> list[int]:
    """Classes of the k dictionary entries nearest to the query segment."""
    segments, labels = dictionary
    if len(segments) == 0:
        raise StateError("empty dictionary")
    z_j = np.asarray(z_j, dtype=np.float64)
    if z_j.shape != segments.shape[1:]:
        raise DimensionError(
            f"segment length {z_j.shape} != dictionary segment length {segments.shape[1:]}"
        )
    if not 1 <= k <= len(segments):
        raise ConfigError(f"k={k} must be in [1, {len(segments)}]")
    diff = segments - z_j
    dists = np.einsum("ij,ij->i", diff, diff)
    if counter is not None:
        counter.add(segments.size)
    noise = as_rng(rng).random(len(segments))
    return list(_ranked_labels(dists, labels, noise)[:k])


def classify(
    z: np.ndarray,
    dicts: SegmentDictionaries,
    k: int = 1,
    rng: RngLike = None,
    counter: OpCounter | None = None,
) -> VoteOutcome:
    """Majority vote over the k nearest neighbors of every subspace.

    Consumes tie-break noise for all c subspaces in ascending order (the same
    stream a loop of ``segment_vote`` calls would draw), then one extra draw
    if the final tally is tied.
    """
    cfg = dicts.config
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (cfg.d,):
        raise DimensionError(f"expected a vector of dimension {cfg.d}, got {z.shape}")
    if not 1 <= k <= dicts.entries_per_subspace:
        raise ConfigError(f"k={k} must be in [1, {dicts.entries_per_subspace}]")
    rng = as_rng(rng)

    z_blocks = z.reshape(cfg.c, 1, cfg.segment_length)
    diff = dicts.segments - z_blocks
    dists = np.einsum("cij,cij->ci", diff, diff)
    if counter is not None:
        counter.add(dicts.segments.size)
    noise = rng.random(dists.shape)
    order = np.lexsort((noise, dists), axis=1)
    votes = dicts.labels[order[:, :k]]

    tally = np.bincount(votes.ravel(), minlength=dicts.K)
    best = int(tally.max())
    winners = np.flatnonzero(tally == best)
    tie_broken = len(winners) > 1
    decided = int(winners[rng.integers(len(winners))]) if tie_broken else int(winners[0])
    return VoteOutcome(votes, tally, decided, tie_broken)
