"""Synthetic distribution families used to probe the segmented classifier.

Three families:

* Model A: two classes of random sign vectors, each a pointwise sign-flip of
  a class base vector drawn uniformly from {-1, +1}^d.
* Model B: classes are sparse "spike" base vectors (a 1 at one fixed offset
  within every block of length l) plus rare large additive noise (value N
  with probability p, else 0), with up to l+1 classes.
* Model C: both classes share one Bernoulli(p) support vector and differ
  only in per-word amplitudes (>= a) and their spike base vectors.

Every generator is a pure function of (params, rng); the returned query is
independent of the training words and distributed as a word of class 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledDataset, RngLike, as_rng
from .errors import CapacityError, ConfigError


@dataclass(frozen=True)
class ModelAParams:
    d: int
    rho: float
    M: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if not 0.0 < self.rho < 0.5:
            raise ConfigError(f"rho must lie in (0, 1/2), got {self.rho}")
        if self.M < 1:
            raise ConfigError("M must be >= 1")


@dataclass(frozen=True)
class ModelBParams:
    d: int
    l: int
    p: float
    N: float
    K: int = 2
    M: int = 1
    nu: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d < 1 or self.l < 1 or self.d % self.l != 0:
            raise ConfigError(f"spike spacing l={self.l} must divide d={self.d}")
        if not 2 <= self.K <= self.l + 1:
            raise CapacityError(
                f"K={self.K} classes need K <= l+1 = {self.l + 1} distinct spike offsets"
            )
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        if self.N <= 0:
            raise ConfigError("perturbation amplitude N must be > 0")
        if self.nu < 1 or self.M < self.nu:
            raise ConfigError(f"need 1 <= nu <= M, got nu={self.nu}, M={self.M}")


@dataclass(frozen=True)
class ModelCParams:
    d: int
    l: int
    p: float
    a: float
    amplitude_law: str = "uniform"  # Uniform[a, 2a]; or "shifted_exponential"
    M: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d < 1 or self.l < 1 or self.d % self.l != 0:
            raise ConfigError(f"spike spacing l={self.l} must divide d={self.d}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        if self.a <= 0:
            raise ConfigError("amplitude floor a must be > 0")
        if self.amplitude_law not in ("uniform", "shifted_exponential"):
            raise ConfigError(f"unknown amplitude law {self.amplitude_law!r}")
        if self.M < 1:
            raise ConfigError("M must be >= 1")


ModelSpec = ModelAParams | ModelBParams | ModelCParams


@dataclass
class GeneratedInstance:
    train: LabeledDataset
    query: np.ndarray
    true_class: int = 0


def derive_rng(seed: int, *indices: int) -> np.random.Generator:
    """Per-trial generator: mixes the master seed with trial indices through
    numpy's SeedSequence, so trials are independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, indices)]))


def _sign_flips(rng: np.random.Generator, rho: float, shape) -> np.ndarray:
    """i.i.d. +-1 entries, -1 with probability rho."""
    return np.where(rng.random(shape) < rho, -1.0, 1.0)


def model_a_generate(params: ModelAParams, rng: RngLike = None) -> GeneratedInstance:
    rng = as_rng(rng if rng is not None else params.seed)
    d, M = params.d, params.M
    bases = np.where(rng.random((2, d)) < 0.5, -1.0, 1.0)
    words = np.empty((2 * M, d))
    labels = np.repeat(np.arange(2), M)
    for k in range(2):
        words[k * M : (k + 1) * M] = _sign_flips(rng, params.rho, (M, d)) * bases[k]
    query = _sign_flips(rng, params.rho, d) * bases[0]
    return GeneratedInstance(LabeledDataset(words, labels), query, true_class=0)


def spike_base_vectors(d: int, l: int, K: int) -> np.ndarray:
    """Base vectors m_1 .. m_K: m_1 is zero; m_k (k >= 2) carries a 1 at
    offset k-2 within every consecutive block of length l."""
    if d % l != 0:
        raise ConfigError(f"l={l} must divide d={d}")
    if K > l + 1:
        raise CapacityError(f"at most l+1 = {l + 1} classes fit distinct offsets, got K={K}")
    bases = np.zeros((K, d))
    for k in range(1, K):
        bases[k, k - 1 :: l] = 1.0
    return bases


def _spike_noise(rng: np.random.Generator, p: float, N: float, shape) -> np.ndarray:
    return np.where(rng.random(shape) < p, N, 0.0)


def model_b_generate(params: ModelBParams, rng: RngLike = None) -> GeneratedInstance:
    rng = as_rng(rng if rng is not None else params.seed)
    d, M, K = params.d, params.M, params.K
    bases = spike_base_vectors(d, params.l, K)
    words = np.empty((K * M, d))
    labels = np.repeat(np.arange(K), M)
    for k in range(K):
        words[k * M : (k + 1) * M] = bases[k] + _spike_noise(rng, params.p, params.N, (M, d))
    query = bases[0] + _spike_noise(rng, params.p, params.N, d)
    return GeneratedInstance(LabeledDataset(words, labels), query, true_class=0)


def _amplitudes(rng: np.random.Generator, params: ModelCParams, shape) -> np.ndarray:
    if params.amplitude_law == "uniform":
        return rng.uniform(params.a, 2 * params.a, shape)
    return params.a + rng.exponential(params.a, shape)


def model_c_generate(params: ModelCParams, rng: RngLike = None) -> GeneratedInstance:
    rng = as_rng(rng if rng is not None else params.seed)
    d, M = params.d, params.M
    bases = spike_base_vectors(d, params.l, 2)
    support = (rng.random(d) < params.p).astype(np.float64)  # shared by every word
    words = np.empty((2 * M, d))
    labels = np.repeat(np.arange(2), M)
    for k in range(2):
        words[k * M : (k + 1) * M] = bases[k] + support * _amplitudes(rng, params, (M, d))
    query = bases[0] + support * _amplitudes(rng, params, d)
    return GeneratedInstance(LabeledDataset(words, labels), query, true_class=0)


def generate(params: ModelSpec, rng: RngLike = None) -> GeneratedInstance:
    if isinstance(params, ModelAParams):
        return model_a_generate(params, rng)
    if isinstance(params, ModelBParams):
        return model_b_generate(params, rng)
    if isinstance(params, ModelCParams):
        return model_c_generate(params, rng)
    raise ConfigError(f"unknown model parameter type {type(params).__name__}")
