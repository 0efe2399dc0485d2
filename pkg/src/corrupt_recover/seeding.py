"""Deterministic 64-bit seed derivation for position-addressed trials."""

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    """One SplitMix64 finalizer step."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def hash64(*parts: int) -> int:
    """Fold integers into a single 64-bit seed.

    Each part is xored into the running state and passed through a
    SplitMix64 step.  The scheme is fixed for good: per-trial seeds
    derived from (master seed, grid position, run index) must stay
    stable across releases so experiment cells can be replayed.
    """
    state = 0
    for p in parts:
        state = _splitmix64(state ^ (int(p) & _MASK64))
    return state
