"""Integer substrate: primes, factorization, and small multiplicative functions.

Everything here operates on ordinary Python/NumPy 64-bit integers; desk-scale
moduli and summation indices never approach that range.  A smallest-prime-factor
sieve is built lazily and grown on demand, so factorization of the n that occur
in hot loops is a table walk rather than repeated trial division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SIEVE_LIMIT_DEFAULT = 1_000_000

# Lazily built smallest-prime-factor table; _spf[n] is the least prime
# dividing n (0 for n < 2).  Grown geometrically, never shrunk.
_spf: np.ndarray | None = None


def _spf_table(limit: int) -> np.ndarray:
    global _spf
    if _spf is None or len(_spf) <= limit:
        size = max(limit + 1, _SIEVE_LIMIT_DEFAULT)
        tab = np.zeros(size, dtype=np.int64)
        tab[2::2] = 2
        for p in range(3, int(math.isqrt(size - 1)) + 1, 2):
            if tab[p] == 0:
                tab[p * p::2 * p][tab[p * p::2 * p] == 0] = p
        odd = np.arange(3, size, 2)
        rest = tab[3::2] == 0
        tab[3::2][rest] = odd[rest]
        _spf = tab
    return _spf


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, ascending.

    Args:
        limit: inclusive upper bound; values below 2 give an empty array.

    Returns:
        int64 array of primes.
    """
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    tab = _spf_table(limit)
    n = np.arange(2, limit + 1)
    return n[tab[2:limit + 1] == n]


@dataclass(frozen=True)
class Factorization:
    """Canonical factorization n = prod p^e, primes strictly ascending."""

    n: int
    factors: tuple[tuple[int, int], ...]


def factorize(n: int) -> Factorization:
    """Factor a positive integer.

    Args:
        n: integer >= 1; n = 1 yields an empty factor list.

    Raises:
        ValueError: on n < 1.
    """
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    m = int(n)
    out: list[tuple[int, int]] = []
    if m > 1 and m < _SIEVE_LIMIT_DEFAULT:
        tab = _spf_table(m)
        while m > 1:
            p = int(tab[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    else:
        # trial division; fine for the occasional large argument
        d = 2
        while d * d <= m:
            if m % d == 0:
                e = 0
                while m % d == 0:
                    m //= d
                    e += 1
                out.append((d, e))
            d += 1 if d == 2 else 2
        if m > 1:
            out.append((m, 1))
    return Factorization(int(n), tuple(out))


def big_omega(n: int) -> int:
    """Omega(n): number of prime factors counted with multiplicity."""
    return sum(e for _, e in factorize(n).factors)


def divisor_count(n: int) -> int:
    """d(n) = prod (e+1)."""
    out = 1
    for _, e in factorize(n).factors:
        out *= e + 1
    return out


def mobius(n: int) -> int:
    """Mobius mu(n): 0 unless n is squarefree, else (-1)^(number of primes)."""
    fac = factorize(n).factors
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    out = 1
    for p, e in factorize(n).factors:
        out *= (p - 1) * p ** (e - 1)
    return out


def w_of(n: int) -> int:
    """w(n) = prod alpha! over the exponents; w(p^a) = a!."""
    out = 1
    for _, e in factorize(n).factors:
        out *= math.factorial(e)
    return out


def divisors(n: int) -> list[int]:
    """All divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p ** j for j in range(e + 1) for d in divs]
    return sorted(divs)


def phi_star(q: int) -> int:
    """Number of primitive characters mod q: sum over c | q of mu(q/c) phi(c).

    Vanishes exactly for q = 2 mod 4 (no primitive characters exist there).
    """
    if q < 1:
        raise ValueError(f"phi_star needs q >= 1, got {q}")
    return sum(mobius(q // c) * euler_phi(c) for c in divisors(q))
