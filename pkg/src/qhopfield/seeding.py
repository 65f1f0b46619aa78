"""Deterministic seed derivation for parallel ensembles.

Child seeds are derived from a master seed and one or more indices with the
splitmix64 avalanche mixer.  The derivation depends only on the (seed,
indices) tuple, never on scheduling, so ensemble results are reproducible
for any number of workers and any grid point can be recomputed in
isolation.
"""

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """splitmix64 finalizer: a 64-bit avalanche of the input."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def child_seed(master: int, *indices: int) -> int:
    """Derive a 64-bit child seed from a master seed and index path.

    Each index advances the splitmix64 stream by ``(index + 1) * GOLDEN_GAMMA``
    and mixes, so ``child_seed(s, i, j)`` differs from ``child_seed(s, j, i)``
    and from ``child_seed(s, i)`` for all i, j >= 0.
    """
    state = master & _MASK64
    for index in indices:
        if index < 0:
            raise ValueError(f"seed indices must be non-negative, got {index}")
        state = mix64((state + (index + 1) * GOLDEN_GAMMA) & _MASK64)
    return state
