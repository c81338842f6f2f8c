"""Small number-theory helpers: primality, divisors, Moebius, base-a digits."""
from functools import lru_cache
from math import gcd

from sympy import divisor_count, divisors as _divisors, factorint, isprime, primerange

__all__ = [
    "is_prime",
    "divisors",
    "mobius",
    "num_divisors",
    "lcm",
    "primes_upto",
    "ceil_log",
    "base_digits",
]


def is_prime(n: int) -> bool:
    """Deterministic primality (exact for all 64-bit inputs)."""
    return bool(isprime(int(n)))


@lru_cache(maxsize=4096)
def divisors(n: int) -> tuple:
    return tuple(int(d) for d in _divisors(int(n)))


@lru_cache(maxsize=4096)
def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    f = factorint(int(n))
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def num_divisors(n: int) -> int:
    return int(divisor_count(int(n)))


def lcm(x: int, y: int) -> int:
    return x // gcd(x, y) * y


def primes_upto(n: int) -> list:
    return [int(p) for p in primerange(2, int(n) + 1)]


def ceil_log(q: int, a: int) -> int:
    """Smallest ``k >= 0`` with ``a**k >= q`` (exact integer arithmetic)."""
    k, p = 0, 1
    while p < q:
        p *= a
        k += 1
    return k


def base_digits(x: int, a: int, n: int):
    """Floor-convention base-``a`` digits of ``x``.

    Returns ``(digits, top)`` with ``x = sum(d_i a**i) + top * a**n`` and
    ``0 <= d_i < a``; negative ``x`` give a negative ``top``.
    """
    digits = []
    for _ in range(n):
        x, d = divmod(x, a)
        digits.append(d)
    return digits, x
