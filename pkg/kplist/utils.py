import math

import numpy as np


def ceil_log2(n: int) -> int:
    """⌈log₂ n⌉, never below 1 so it can size message fields and polylog factors."""
    if n <= 2:
        return 1
    return (n - 1).bit_length()


def log2(n: float) -> float:
    return math.log2(n) if n > 1 else 1.0


def polylog(n: int, exponent: int = 2) -> int:
    return ceil_log2(n) ** exponent


def ceil_root(k: int, p: int) -> int:
    """Smallest integer r >= 1 with r**p >= k, computed without float rounding errors."""
    if k <= 1:
        return 1
    r = max(1, int(round(k ** (1.0 / p))))
    while r**p < k:
        r += 1
    while r > 1 and (r - 1) ** p >= k:
        r -= 1
    return r


def derive_seed(seed: int, *keys: int) -> int:
    """Stable child seed for a (seed, key, ...) path, independent of call order."""
    entropy = [int(seed) & 0xFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def node_rng(seed: int, node: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, node]))
