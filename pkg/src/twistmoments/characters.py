"""Dirichlet character groups mod q, Gauss and Kloosterman sums, identities.

The default policy builds groups for odd prime powers q0^nu, where the unit
group is cyclic and a single discrete-log table against the least primitive
root describes every character.  Any q not congruent to 2 mod 4 is accepted
through the general path: the unit group is decomposed into cyclic components
(one per odd prime power, the <-1, 5> pair for 2^a with a >= 3) and characters
are indexed by exponent tuples, flattened to a single integer index.

Character values are exact roots of unity addressed by an integer phase table,
so primitivity and conductor logic never touches floating point.

Convention: e(z) = exp(2*pi*i*z).  The Kloosterman sum here is
S(u,v,q) = sum over units h of e((u h + v h^-1)/q); some sources write the
exponential without the 2*pi*i, but the Weil bound fixes this normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import arith


def _order_divides(g: int, m: int, d: int) -> bool:
    return pow(g, d, m) == 1


def _is_primitive_root(g: int, m: int, phi: int, phi_primes: tuple[int, ...]) -> bool:
    if math.gcd(g, m) != 1:
        return False
    return all(not _order_divides(g, m, phi // r) for r in phi_primes)


def least_primitive_root(m: int) -> int:
    """Least primitive root of m; caller guarantees one exists (m odd prime
    power, or m in {2, 4})."""
    phi = arith.euler_phi(m)
    phi_primes = tuple(p for p, _ in arith.factorize(phi).factors)
    for g in range(2, m):
        if _is_primitive_root(g, m, phi, phi_primes):
            return g
    raise ValueError(f"no primitive root mod {m}")


def _cyclic_dlog(m: int, gen: int, order: int) -> np.ndarray:
    """Exponent of n mod m with respect to gen (-1 off the orbit)."""
    small = np.full(m, -1, dtype=np.int64)
    acc = 1
    for t in range(order):
        small[acc] = t
        acc = acc * gen % m
    return small


def _two_power_dlogs(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Joint exponents for units mod m = 2^a, a >= 3: n = (-1)^s 5^t."""
    t_sign = np.full(m, -1, dtype=np.int64)
    t_five = np.full(m, -1, dtype=np.int64)
    acc = 1
    for t in range(m // 4):
        t_sign[acc] = 0
        t_five[acc] = t
        t_sign[m - acc] = 1
        t_five[m - acc] = t
        acc = acc * 5 % m
    return t_sign, t_five


@dataclass(frozen=True)
class CharacterGroup:
    """Unit group mod q with discrete-log tables for character evaluation.

    For the default odd-prime-power q there is one component and `g` / `dlog`
    expose the classical primitive-root picture: dlog[g^t mod q] = t.  The
    exponent D is the lcm of the component orders; `phase_scale[i]` = D/d_i.
    """

    q: int
    phi_q: int
    components: tuple[tuple[int, int, int], ...]  # (modulus, generator, order)
    exponent: int
    exps: np.ndarray          # shape (ncomp, q), -1 at non-units
    unit_mask: np.ndarray     # shape (q,), bool
    roots: np.ndarray         # exp(2 pi i t / D), t = 0..D-1

    @property
    def g(self) -> int | None:
        return self.components[0][1] if len(self.components) == 1 else None

    @property
    def dlog(self) -> np.ndarray | None:
        return self.exps[0] if len(self.components) == 1 else None

    def orders(self) -> tuple[int, ...]:
        return tuple(c[2] for c in self.components)

    def character(self, index: int) -> "Character":
        if not 0 <= index < self.phi_q:
            raise ValueError(f"character index {index} out of 0..{self.phi_q - 1}")
        return Character(self, index)

    def characters(self) -> list["Character"]:
        return [Character(self, e) for e in range(self.phi_q)]


def build_group(q: int, allow_general: bool = False) -> CharacterGroup:
    """Build the character group mod q.

    Args:
        q: modulus; default policy takes odd prime powers >= 3 only.
        allow_general: accept any q >= 3 with q != 2 (mod 4) via the CRT
            component decomposition.

    Raises:
        ValueError: q = 2 mod 4 (no primitive characters), q < 3, or a
            non-prime-power q without allow_general.
    """
    if q < 3:
        raise ValueError(f"q={q}: group building needs q >= 3")
    if q % 4 == 2:
        raise ValueError(f"q={q} = 2 (mod 4): no primitive characters exist")
    fac = arith.factorize(q).factors
    is_odd_pp = len(fac) == 1 and fac[0][0] % 2 == 1
    if not (is_odd_pp or allow_general):
        raise ValueError(
            f"q={q} is not an odd prime power; pass allow_general=True "
            "for the CRT escape hatch")

    components: list[tuple[int, int, int]] = []
    small_tables: list[np.ndarray] = []
    for p, e in fac:
        m = p ** e
        if p == 2:
            if e == 2:
                components.append((4, 3, 2))
                small_tables.append(_cyclic_dlog(4, 3, 2))
            else:
                t_sign, t_five = _two_power_dlogs(m)
                components.append((m, m - 1, 2))           # <-1>
                small_tables.append(t_sign)
                components.append((m, 5, m // 4))          # <5>, order 2^(e-2)
                small_tables.append(t_five)
        else:
            g = least_primitive_root(m)
            d = arith.euler_phi(m)
            components.append((m, g, d))
            small_tables.append(_cyclic_dlog(m, g, d))

    nn_mod = np.arange(q, dtype=np.int64)
    exps = np.stack([tab[nn_mod % m]
                     for tab, (m, _, _) in zip(small_tables, components)])
    nn = np.arange(q, dtype=np.int64)
    unit_mask = np.gcd(nn, q) == 1
    if not np.all(exps[:, unit_mask] >= 0):
        raise AssertionError(f"dlog table incomplete for q={q}")
    orders = [d for _, _, d in components]
    exponent = math.lcm(*orders)
    phi_q = arith.euler_phi(q)
    assert math.prod(orders) == phi_q
    roots = np.exp(2j * np.pi * np.arange(exponent) / exponent)
    return CharacterGroup(q=q, phi_q=phi_q, components=tuple(components),
                          exponent=exponent, exps=exps, unit_mask=unit_mask,
                          roots=roots)


class Character:
    """One Dirichlet character mod q, addressed by a flat index.

    The flat index is the mixed-radix encoding of the per-component exponent
    tuple (e_1, ..., e_m); for cyclic groups it is just the exponent e with
    chi(n) = e(e * dlog(n) / phi(q)).
    """

    __slots__ = ("group", "index", "idx_tuple", "_phase", "_values",
                 "_conductor")

    def __init__(self, group: CharacterGroup, index: int):
        self.group = group
        self.index = index
        tup = []
        rem = index
        for d in group.orders():
            tup.append(rem % d)
            rem //= d
        self.idx_tuple = tuple(tup)
        self._phase: np.ndarray | None = None
        self._values: np.ndarray | None = None
        self._conductor: int | None = None

    def phase_numerators(self) -> np.ndarray:
        """Integer t(n) with chi(n) = e(t(n)/D), -1 sentinel at non-units."""
        if self._phase is None:
            grp = self.group
            acc = np.zeros(grp.q, dtype=np.int64)
            for e_i, (exps_i, d_i) in zip(self.idx_tuple,
                                          zip(grp.exps, grp.orders())):
                acc += e_i * (grp.exponent // d_i) * exps_i
            acc %= grp.exponent
            acc[~grp.unit_mask] = -1
            self._phase = acc
        return self._phase

    def values(self) -> np.ndarray:
        """chi(n) for n = 0..q-1 as a complex array (0 at non-units)."""
        if self._values is None:
            phase = self.phase_numerators()
            vals = np.where(phase >= 0,
                            self.group.roots[np.maximum(phase, 0)], 0.0)
            vals.setflags(write=False)
            self._values = vals
        return self._values

    def __call__(self, n):
        return self.values()[np.asarray(n) % self.group.q]

    @property
    def conductor(self) -> int:
        """Smallest f | q from which chi is induced (exact integer logic)."""
        if self._conductor is None:
            grp = self.group
            phase = self.phase_numerators()
            nn = np.arange(grp.q)
            for f in arith.divisors(grp.q):
                sub = grp.unit_mask & (nn % f == 1 % f)
                if np.all(phase[sub] == 0):
                    self._conductor = f
                    break
        return self._conductor

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.group.q

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.idx_tuple)

    def conjugate_index(self) -> int:
        """Flat index of chi-bar."""
        tup = [(-e) % d for e, d in zip(self.idx_tuple, self.group.orders())]
        out = 0
        for t, d in zip(reversed(tup), reversed(self.group.orders())):
            out = out * d + t
        return out

    def __repr__(self):
        return (f"Character(q={self.group.q}, index={self.index}, "
                f"conductor={self.conductor})")


def conductor(chi: Character) -> int:
    return chi.conductor


def primitive_characters(group: CharacterGroup) -> list[Character]:
    """All primitive characters, ascending flat index; length phi_star(q)."""
    prims = [chi for chi in group.characters() if chi.is_primitive]
    assert len(prims) == arith.phi_star(group.q)
    return prims


@lru_cache(maxsize=64)
def _e_table(q: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(q) / q)


def gauss_sum(chi: Character) -> complex:
    """tau(chi) = sum over a mod q of chi(a) e(a/q)."""
    q = chi.group.q
    return complex(np.dot(chi.values(), _e_table(q)))


def iota(chi: Character, kappa: int) -> complex:
    """Root factor i^kappa tau(chi)^2 / q of the functional equation.

    Raises:
        ValueError: chi not primitive (the factor is only defined there).
    """
    if not chi.is_primitive:
        raise ValueError(f"iota needs a primitive character, got {chi!r}")
    i_pow = (1, 1j, -1, -1j)[kappa % 4]
    t = gauss_sum(chi)
    return i_pow * t * t / chi.group.q


def kloosterman(u: int, v: int, q: int) -> float:
    """S(u, v, q) = sum over units h of e((u h + v h^-1)/q); real.

    The imaginary residue of the straight complex sum is checked below 1e-9
    and discarded (h <-> -h pairing makes the sum real; that is verified
    numerically rather than assumed).
    """
    if q < 2:
        raise ValueError(f"kloosterman needs q >= 2, got {q}")
    e_tab = _e_table(q)
    total = 0.0 + 0.0j
    for h in range(1, q):
        if math.gcd(h, q) != 1:
            continue
        hbar = pow(h, -1, q)
        total += e_tab[(u * h + v * hbar) % q]
    if abs(total.imag) >= 1e-9:
        raise AssertionError(
            f"S({u},{v},{q}) imaginary part {total.imag:.3e} not negligible")
    return float(total.real)


def primitive_sum_identity(a: int, q: int, audit: bool = False,
                           group: CharacterGroup | None = None) -> int:
    """Sum of chi(a) over primitive chi mod q, via the Mobius side.

    Returns sum over c | (q, a-1) of mu(q/c) phi(c).  With audit=True the
    left side is formed by direct summation over primitive_characters and
    both sides are required to agree within 1e-6.

    Raises:
        ValueError: gcd(a, q) > 1.
    """
    if math.gcd(a, q) != 1:
        raise ValueError(f"need (a, q) = 1, got a={a}, q={q}")
    g = math.gcd(q, a - 1) if a != 1 else q
    rhs = sum(arith.mobius(q // c) * arith.euler_phi(c)
              for c in arith.divisors(q) if g % c == 0)
    if audit:
        grp = group if group is not None else build_group(q, allow_general=True)
        lhs = sum(chi.values()[a % q] for chi in primitive_characters(grp))
        if abs(lhs - rhs) > 1e-6:
            raise AssertionError(
                f"sum over primitive chi mod {q} of chi({a}) = {lhs}, "
                f"Mobius side = {rhs}")
    return rhs
