"""Counter-based Gaussian increments.

Every sample owns a Philox substream keyed by the run seed; the sample index
selects the high half of the 256-bit counter. The draws for sample j are thus a
pure function of (seed, j) and never depend on which worker produced them or in
what order.
"""

import numpy as np

COUNTER_SHIFT = 128


def philox_key(seed: int) -> np.ndarray:
    if seed < 0:
        raise ValueError(f"Seed must be nonnegative, got {seed}")
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def sample_generator(seed: int, sample: int, key: np.ndarray | None = None) -> np.random.Generator:
    """Generator for one sample's substream."""
    if sample < 0:
        raise ValueError(f"Sample index must be nonnegative, got {sample}")
    if key is None:
        key = philox_key(seed)
    return np.random.Generator(np.random.Philox(key=key, counter=sample << COUNTER_SHIFT))


def standard_normals(seed: int, start: int, stop: int, K: int, m: int) -> np.ndarray:
    """Standard normals of shape (stop - start, K, m) for samples start..stop-1."""
    key = philox_key(seed)
    out = np.empty((stop - start, K, m))
    for i, sample in enumerate(range(start, stop)):
        out[i] = sample_generator(seed, sample, key).standard_normal((K, m))
    return out


def brownian_increments(seed: int, start: int, stop: int, K: int, m: int, dt: float) -> np.ndarray:
    """Increments dB_k ~ N(0, dt I_m) for samples start..stop-1, shape (n, K, m)."""
    return np.sqrt(dt) * standard_normals(seed, start, stop, K, m)
