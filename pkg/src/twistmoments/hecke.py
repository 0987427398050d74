"""Hecke eigenvalues for the fixed level-1 eigenform, default Delta (kappa=12).

tau(n) is computed exactly: the cube of the eta-type product is Jacobi's sparse
series sum (-1)^k (2k+1) x^{k(k+1)/2}, and three successive squarings give the
24th power.  Squarings are exact integer convolutions done by Kronecker
substitution (pack the series into one big integer per sign, multiply, unpack);
gmpy2 does the packing and the product at C speed when present, plain Python
integers otherwise.  Normalized eigenvalues lambda(n) = tau(n)/n^((kappa-1)/2)
are stored as float64.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import arith

try:
    import gmpy2

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - environment dependent
    _HAVE_GMPY2 = False

_INT64_SAFE = 1 << 62


def _pack_nonneg(vals: list[int], bits: int) -> "int":
    if _HAVE_GMPY2:
        return gmpy2.pack(vals, bits)
    nbytes = bits // 8
    buf = bytearray(len(vals) * nbytes)
    for i, v in enumerate(vals):
        buf[i * nbytes:(i + 1) * nbytes] = v.to_bytes(nbytes, "little")
    return int.from_bytes(bytes(buf), "little")


def _unpack_nonneg(z: "int", bits: int, count: int) -> list[int]:
    if _HAVE_GMPY2:
        out = [int(v) for v in gmpy2.unpack(gmpy2.mpz(z), bits)[:count]]
        # short products occupy fewer limbs than requested
        out.extend([0] * (count - len(out)))
        return out
    nbytes = bits // 8
    raw = int(z).to_bytes(count * nbytes, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little")
            for i in range(count)]


def _square_trunc(a: np.ndarray, length: int):
    """Exact coefficients of (sum a_i x^i)^2 truncated below x^length.

    Args:
        a: int64 coefficient array (may contain negatives).
        length: number of output coefficients to keep.

    Returns:
        int64 array when every output fits comfortably in 64 bits, else a
        list of Python integers.
    """
    amax = int(np.abs(a).max()) if len(a) else 0
    # worst case for one convolution coefficient, doubled since the packed
    # value carries P*P + N*N in a single slot
    bound = 2 * length * amax * amax + 1
    bits = ((bound.bit_length() + 7) // 8) * 8 + 8
    pos = np.where(a > 0, a, 0).tolist()
    neg = np.where(a < 0, -a, 0).tolist()
    zp = _pack_nonneg(pos, bits)
    zn = _pack_nonneg(neg, bits)
    u = _unpack_nonneg(zp * zp + zn * zn, bits, length)
    v = _unpack_nonneg(2 * zp * zn, bits, length)
    if bound < _INT64_SAFE:
        return np.array(u, dtype=np.int64) - np.array(v, dtype=np.int64)
    out = [x - y for x, y in zip(u, v)]
    if max(map(abs, out), default=0) < _INT64_SAFE:
        return np.array(out, dtype=np.int64)
    return out


def _jacobi_cube(length: int) -> np.ndarray:
    """Coefficients of prod (1-x^n)^3 = sum (-1)^k (2k+1) x^{k(k+1)/2}."""
    out = np.zeros(length, dtype=np.int64)
    k = 0
    while k * (k + 1) // 2 < length:
        out[k * (k + 1) // 2] = (2 * k + 1) * (-1 if k % 2 else 1)
        k += 1
    return out

# Above this the J^4 stage would overflow the int64 intermediate.
TAU_N_MAX = 20_000_000


def ramanujan_tau_table(n_max: int) -> list[int]:
    """Exact tau(1..n_max) as Python integers.

    tau(n) overflows 64-bit integers past n ~ 3000, so the return type is a
    plain list; callers wanting floats should go through build_eigenform.

    Raises:
        ValueError: n_max < 1 or beyond the configured bound.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if n_max > TAU_N_MAX:
        raise ValueError(
            f"n_max={n_max} exceeds the supported bound {TAU_N_MAX} "
            "(intermediate convolution would overflow its 64-bit stage)")
    j = _jacobi_cube(n_max)
    j2 = _square_trunc(j, n_max)
    j4 = _square_trunc(j2, n_max)
    j8 = _square_trunc(j4, n_max)
    if isinstance(j8, np.ndarray):
        return [int(v) for v in j8]
    return j8


def write_tau_file(path: str, taus: list[int]) -> None:
    """Write the coefficient file: one "n<TAB>tau(n)" line per n, no header."""
    tmpfd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".")
    try:
        with os.fdopen(tmpfd, "w") as fh:
            for i, t in enumerate(taus, start=1):
                fh.write(f"{i}\t{t}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_coefficient_file(path: str) -> list[int]:
    """Read an "n<TAB>a(n)" file, validating ascending 1-based indices."""
    coeffs: list[int] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            n_str, a_str = line.split("\t")
            if int(n_str) != len(coeffs) + 1:
                raise ValueError(f"{path}: expected index {len(coeffs)+1}, "
                                 f"got {n_str}")
            coeffs.append(int(a_str))
    if not coeffs:
        raise ValueError(f"{path}: empty coefficient file")
    return coeffs


@dataclass(frozen=True)
class EigenformTable:
    """Normalized eigenvalues lambda(1..n_max) of a level-1 eigenform.

    lam is indexed so lam[n] is lambda(n); lam[0] is unused (zero).
    """

    weight: int
    n_max: int
    lam: np.ndarray = field(repr=False)
    source: str = "builtin-delta"

    def lam_at(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise ValueError(f"n={n} outside table range 1..{self.n_max}")
        return float(self.lam[n])


def _divisor_count_table(n_max: int) -> np.ndarray:
    """d(n) for n <= n_max; the i-loop is cut at n_max/32 and the short
    slices (divisors above that) are folded into 32 strided updates."""
    d = np.zeros(n_max + 1, dtype=np.int32)
    t = n_max // 32
    for i in range(1, t + 1):
        d[i::i] += 1
    for j in range(1, n_max // (t + 1) + 1):
        d[j * (t + 1)::j] += 1
    d[0] = 0
    return d


def _spf_array(n_max: int) -> np.ndarray:
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in arith.sieve_primes(n_max)[::-1]:
        spf[p::p] = p
    return spf


def _validate_table(lam: np.ndarray, n_max: int, tol: float) -> None:
    if abs(lam[1] - 1.0) > tol:
        raise ValueError(f"lambda(1) = {lam[1]!r}, must be 1")
    d = _divisor_count_table(n_max)
    bad = np.nonzero(np.abs(lam[1:]) > d[1:] + tol)[0]
    if len(bad):
        n = int(bad[0]) + 1
        raise ValueError(f"Deligne bound violated at n={n}: "
                         f"|lambda|={abs(lam[n]):.6g} > d(n)={d[n]}")
    primes = arith.sieve_primes(n_max)
    # Hecke recursion at every prime power in range
    for p in primes[primes * primes <= n_max]:
        pa = int(p)
        while pa * p <= n_max:
            nxt = lam[p] * lam[pa] - (lam[pa // p] if pa > p else 1.0)
            if abs(lam[pa * p] - nxt) > tol * max(1.0, abs(nxt)):
                raise ValueError(f"Hecke recursion fails at p={p}, p^a={pa}")
            pa *= p
    if n_max < 2:
        return
    # multiplicativity: split every n as p^a * m with p = spf(n), (p, m) = 1
    s = _spf_array(n_max)[2:]
    pa = s.copy()
    m = np.arange(2, n_max + 1, dtype=np.int64) // s
    for _ in range(int(math.log2(max(n_max, 2))) + 1):
        msk = (m > 1) & (m % s == 0)
        if not msk.any():
            break
        pa[msk] *= s[msk]
        m[msk] //= s[msk]
    split = m > 1
    lhs = lam[2:][split]
    rhs = lam[pa[split]] * lam[m[split]]
    bad_mult = np.abs(lhs - rhs) > tol * np.maximum(1.0, np.abs(lhs))
    if bad_mult.any():
        raise ValueError(
            f"multiplicativity fails at {int(bad_mult.sum())} indices")


def build_eigenform(source: str = "builtin-delta", n_max: int = 1000,
                    kappa: int = 12, validate: bool = True,
                    tol: float = 1e-9) -> EigenformTable:
    """Build the eigenvalue table.

    Args:
        source: "builtin-delta", or a path to an "n<TAB>a(n)" coefficient
            file holding unnormalized integer coefficients a(n).
        n_max: table length (for file sources, capped at the file length).
        kappa: weight; builtin-delta forces 12.
        validate: check lambda(1)=1, the Deligne bound, the Hecke recursion
            and multiplicativity; file sources are always validated.

    Raises:
        ValueError: invariant violations, or unreadable source.
    """
    if source == "builtin-delta":
        if kappa != 12:
            raise ValueError("builtin-delta has weight 12")
        coeffs = ramanujan_tau_table(n_max)
    else:
        coeffs = read_coefficient_file(source)
        if len(coeffs) < n_max:
            n_max = len(coeffs)
        validate = True
    if kappa < 2 or kappa % 2:
        raise ValueError(f"weight must be a positive even integer, got {kappa}")
    n = np.arange(n_max + 1, dtype=np.float64)
    lam = np.zeros(n_max + 1)
    lam[1:] = np.array([float(c) for c in coeffs[:n_max]])
    lam[1:] /= n[1:] ** ((kappa - 1) / 2)
    if validate:
        _validate_table(lam, n_max, tol)
    lam.setflags(write=False)
    return EigenformTable(weight=kappa, n_max=n_max, lam=lam, source=source)


def lambda_tilde(table: EigenformTable, n: int) -> float:
    """Completely multiplicative extension: prod lambda(p)^a over n's factors.

    Raises:
        ValueError: some prime factor of n exceeds the table range.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = 1.0
    for p, e in arith.factorize(n).factors:
        if p > table.n_max:
            raise ValueError(f"prime {p} outside table range {table.n_max}")
        out *= table.lam_at(p) ** e
    return out


def rankin_prime_sum(table: EigenformTable, x: float) -> float:
    """Sum of lambda(p)^2/p over primes p <= x (grows like log log x)."""
    if x > table.n_max:
        raise ValueError(f"x={x} beyond table range {table.n_max}")
    primes = arith.sieve_primes(int(x))
    lam_p = table.lam[primes]
    return float(np.sum(lam_p * lam_p / primes))


def mertens_log_sum(x: float) -> float:
    """Sum of (log p)/p over primes p <= x (equals log x + O(1))."""
    primes = arith.sieve_primes(int(x))
    if len(primes) == 0:
        return 0.0
    return float(np.sum(np.log(primes) / primes))


_shared_tables: dict[int, EigenformTable] = {}
_SHARED_STEP = 250_000


def shared_eigenform(n_max: int, kappa: int = 12) -> EigenformTable:
    """Process-wide cached builtin-delta table covering at least n_max.

    Tau generation dominates table cost (tens of seconds at sweep scale), so
    everything in one process shares a single table, grown in 250k steps and
    never shrunk.  The returned table may cover more than asked.
    """
    tab = _shared_tables.get(kappa)
    if tab is None or tab.n_max < n_max:
        size = n_max
        if size > _SHARED_STEP:
            size = -(-size // _SHARED_STEP) * _SHARED_STEP
        tab = build_eigenform(n_max=size, kappa=kappa)
        _shared_tables[kappa] = tab
    return tab
