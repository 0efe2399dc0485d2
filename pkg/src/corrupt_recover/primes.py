"""Primality helpers for experiment dimension selection."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    i = 5
    while i * i <= n:
        if n % i == 0 or n % (i + 2) == 0:
            return False
        i += 6
    return True


def primes_in_range(lo: int, hi: int) -> list[int]:
    """All primes p with lo <= p <= hi."""
    return [p for p in range(max(lo, 2), hi + 1) if is_prime(p)]


def nonprimes_in_range(lo: int, hi: int) -> list[int]:
    """All composite (or unit) integers in [lo, hi]."""
    return [q for q in range(max(lo, 1), hi + 1) if not is_prime(q)]
