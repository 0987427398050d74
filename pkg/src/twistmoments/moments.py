"""Family moments, twisted moments, and the numerical inequality audits.

Everything here works over the family of primitive characters mod q.  The
moment statistics are exact finite sums of |L(1/2)| powers from the lvalues
module; the audits check, instance by instance, the pointwise truncated
exponential bounds, the Hoelder splittings at family level, and the exact
diagonal factorization identity behind the twisted first moment.

Asymptotic statements (anything with an unspecified constant) are never
asserted: they surface as reported ratios so sweeps can eyeball boundedness,
while every constant-1 inequality is asserted with a small relative slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith, characters, hecke, lvalues, mollifier
from .hecke import EigenformTable
from .lvalues import AfeConfig, DEFAULT_CONFIG
from .mollifier import MollifierContext

DESK_SWEEP_PRIMES = (53, 101, 149, 211, 307, 401, 503, 701, 1009)
DESK_SWEEP_PRIME_POWERS = (27, 125, 343, 1331)

_SLACK = 1e-9
_TINY = 1e-300


@dataclass(frozen=True)
class MomentReport:
    """One family moment: q, k, and Sum* |L(1/2)|^(2k) with normalizations."""

    q: int
    k: float
    phi_star: int
    raw_moment: float
    normalized: float               # raw_moment / phi_star
    log_q: float
    ratio_to_logq_pow_k2: float     # normalized / (log q)^(k^2)
    contributions: tuple[float, ...] | None = None
    audit: dict | None = None


@dataclass(frozen=True)
class CheckRecord:
    """A single audited inequality instance: lhs <= rhs up to relative slack."""

    name: str
    subject: str
    lhs: float
    rhs: float
    ok: bool

    @property
    def ratio(self) -> float:
        return self.lhs / max(self.rhs, _TINY)


@dataclass(frozen=True)
class InequalityAudit:
    """Bundle of asserted checks plus reported (not asserted) ratios."""

    q: int
    k: float
    checks: tuple[CheckRecord, ...]
    reported: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def pass_count(self) -> int:
        return sum(1 for c in self.checks if c.ok)

    @property
    def fail_count(self) -> int:
        return sum(1 for c in self.checks if not c.ok)

    def failures(self) -> list[CheckRecord]:
        return [c for c in self.checks if not c.ok]


def _default_table(q: int, cfg: AfeConfig) -> EigenformTable:
    return hecke.shared_eigenform(lvalues.required_n_cap(q, cfg))


def family_values_cached(q: int, cfg: AfeConfig = DEFAULT_CONFIG,
                         table: EigenformTable | None = None):
    """(group, primitive characters, central values) for one modulus.

    Thin convenience wrapper so the moment and audit functions can share one
    family computation; the character list and the value records are index
    aligned.
    """
    if table is None:
        table = _default_table(q, cfg)
    group = characters.build_group(q, allow_general=True)
    prims = characters.primitive_characters(group)
    recs = lvalues.family_values(table, q, cfg, group=group)
    by_index = {c.index: c for c in prims}
    chis = [by_index[r.chi_index] for r in recs]
    return group, chis, recs


def family_moment(q: int, k: float, cfg: AfeConfig = DEFAULT_CONFIG,
                  table: EigenformTable | None = None,
                  values=None, keep_contributions: bool = False) -> MomentReport:
    """Sum* |L(1/2)|^(2k) over primitive chi mod q.

    k = 0 returns phi_star(q) exactly (every term is 1 by convention).
    `values` may carry a precomputed family (list of CentralValue) to avoid
    recomputation across k.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    phi_star = arith.phi_star(q)
    logq = math.log(q)
    if k == 0:
        raw = float(phi_star)
        contrib = tuple([1.0] * phi_star) if keep_contributions else None
    else:
        if values is None:
            if table is None:
                table = _default_table(q, cfg)
            values = lvalues.family_values(table, q, cfg)
        amps = [abs(r.value) ** (2 * k) for r in values]
        if len(amps) != phi_star:
            raise AssertionError(
                f"family size {len(amps)} != phi_star {phi_star}")
        raw = float(sum(amps))
        contrib = tuple(amps) if keep_contributions else None
    normalized = raw / phi_star
    return MomentReport(
        q=q, k=k, phi_star=phi_star, raw_moment=raw, normalized=normalized,
        log_q=logq, ratio_to_logq_pow_k2=normalized / logq ** (k * k),
        contributions=contrib)


def twisted_first_moment(q: int, k: float, ladder: mollifier.LadderParams,
                         cfg: AfeConfig = DEFAULT_CONFIG,
                         table: EigenformTable | None = None,
                         ctx: MollifierContext | None = None) -> complex:
    """Sum* L(1/2) N(conj chi, k) N(chi, k-1) over primitive chi mod q.

    Returned as a complex number; the family is closed under conjugation, so
    the imaginary part should be at noise level.
    """
    if table is None:
        table = _default_table(q, cfg)
    if ctx is None:
        segs = mollifier.build_segments(q, ladder)
        ctx = MollifierContext(table, ladder, segs)
    group, chis, recs = family_values_cached(q, cfg, table)
    by_index = {c.index: c for c in chis}
    total = 0.0 + 0.0j
    for chi, rec in zip(chis, recs):
        chibar = by_index[rec.conj_index]
        total += (rec.value
                  * mollifier.n_full(ctx, chibar, k)
                  * mollifier.n_full(ctx, chi, k - 1))
    return total


@dataclass(frozen=True)
class DiagonalCheck:
    """Result of the exact convolution-vs-product identity."""

    lhs: float
    rhs: float
    residual: float
    ok: bool
    local_terms: tuple[float, ...]


def diagonal_factorization_check(ctx: MollifierContext, k: float,
                                 tol: float = 1e-9) -> DiagonalCheck:
    """Exact identity behind the diagonal of the twisted first moment.

    With x the coefficient map of N(., k-1) and y that of N(., k), both in
    the lambda-weighted mode, the double sum

        sum_b (y_b / b) sum_{a m = b} lambda(m) x_a

    factors as the product over segments of

        sum_n c_k(n)/n * sum_{n' | n} c_(k-1)(n') lambda(n / n'),

    where c_alpha is the per-segment coefficient map.  Both sides are finite
    and must agree to the stated relative tolerance.
    """
    if not ctx.weighted:
        raise ValueError("identity requires the lambda-weighted mode")
    x = mollifier.mollifier_coefficients(ctx, k - 1)
    y = mollifier.mollifier_coefficients(ctx, k)
    top = max(y)
    if top > ctx.table.n_max:
        raise ValueError(
            f"support reaches {top} beyond the coefficient table"
            f" ({ctx.table.n_max})")
    lhs = 0.0
    for b, yb in y.items():
        inner = 0.0
        for a, xa in x.items():
            if b % a == 0:
                inner += ctx.table.lam_at(b // a) * xa
        lhs += yb / b * inner
    rhs = 1.0
    locals_: list[float] = []
    for j in range(1, ctx.ladder.R + 1):
        ck = mollifier.segment_coefficients(ctx, j, k)
        ck1 = mollifier.segment_coefficients(ctx, j, k - 1)
        term = 0.0
        for n, cn in ck.items():
            inner = 0.0
            for np_, cn1 in ck1.items():
                if n % np_ == 0:
                    inner += cn1 * ctx.table.lam_at(n // np_)
            term += cn / n * inner
        locals_.append(term)
        rhs *= term
    residual = abs(lhs - rhs) / max(abs(lhs), abs(rhs), _TINY)
    return DiagonalCheck(lhs=lhs, rhs=rhs, residual=residual,
                         ok=residual < tol, local_terms=tuple(locals_))


def _lam_prime_powers(lam_p: float, jmax: int) -> list[float]:
    """lambda(p^j), j = 0..jmax, from the two-term Hecke recursion."""
    out = [1.0, lam_p]
    for _ in range(jmax - 1):
        out.append(lam_p * out[-1] - out[-2])
    return out[:jmax + 1]


def diagonal_local_factor(table: EigenformTable, p: int, k: float,
                          terms: int = 60, envelope: float = 10.0) -> dict:
    """Unrestricted Euler factor of the diagonal identity at one prime.

    T_p = sum_i (lambda(p)^i k^i / (p^i i!)) *
          sum_{l<=i} (k-1)^l lambda(p)^l / l! * lambda(p^(i-l)),

    which should match 1 + k^2 lambda(p)^2 / p up to a remainder of size
    envelope/p^2.  The default envelope of 10 covers k <= 1; the remainder's
    constant grows like k^4 (the p^-2 term carries k^2 lambda^2 (5k-2)/2
    against it), so larger k needs a wider envelope.
    """
    lam_p = table.lam_at(p)
    lpow = _lam_prime_powers(lam_p, terms)
    total = 0.0
    for i in range(terms + 1):
        outer = lam_p ** i * k ** i / (p ** i * math.factorial(i))
        if outer == 0.0 or abs(outer) < 1e-320:
            break
        inner = sum((k - 1) ** l * lam_p ** l / math.factorial(l)
                    * lpow[i - l] for l in range(i + 1))
        total += outer * inner
    target = 1.0 + k * k * lam_p * lam_p / p
    dev = abs(total - target)
    bound = envelope / p ** 2
    return {"p": p, "value": total, "target": target, "deviation": dev,
            "bound": bound, "ok": dev <= bound}


def pointwise_inequality_audit(ctx: MollifierContext,
                               chi: characters.Character,
                               k: float | None = None,
                               slack: float = _SLACK) -> InequalityAudit:
    """Per-character regime checks of the truncated-exponential bounds.

    For each rung j, |P_j(chi)| picks a regime.  With x = exp(-ell_j):

    k <= 1, small (|P_j| <= ell_j/60):
        |N_j(k)^(1/k) N_j(k-1)|^2 <= |N_j(k)|^2 (1+x)^(2/k)
        |N_j(k-1)|^(2k) |N_j(k)|^(2(1-k)) >= (1-x)^2
    k <= 1, large: the product is <= (64|P_j|/ell_j)^(2(1+1/k) ell_j)
        <= |Q_j(k)|^2, and |Q_j(k)| >= 1.
    k > 1 uses threshold ell_j/(40k) and exponent 2k/(2k-1):
        small: |N_j(k) N_j(k-1)|^(2k/(2k-1))
               <= |N_j(k)|^2 (1+x)^(2k/(2k-1)) (1-x)^(-2(k-1)/(2k-1))
        large: same left side <= |Q_j(k)|^2, and |Q_j(k)| >= 1.

    All are exact inequalities; each instance is asserted with the given
    relative slack.
    """
    kk = ctx.ladder.k if k is None else k
    if kk <= 0:
        raise ValueError(f"k must be positive, got {kk}")
    checks: list[CheckRecord] = []

    def add(name: str, j: int, lhs: float, rhs: float, lower: bool = False):
        if lower:
            ok = lhs >= rhs * (1 - slack)
        else:
            ok = lhs <= rhs * (1 + slack)
        checks.append(CheckRecord(
            name=name, subject=f"chi={chi.index} j={j}",
            lhs=lhs, rhs=rhs, ok=ok))

    for j in range(1, ctx.ladder.R + 1):
        ell = ctx.ladder.ell[j - 1]
        x = math.exp(-ell)
        P = abs(ctx.prime_sum(chi, j))
        Nk = abs(mollifier.n_poly(ctx, chi, j, kk))
        Nk1 = abs(mollifier.n_poly(ctx, chi, j, kk - 1))
        Q = abs(mollifier.q_poly(ctx, chi, j, kk))
        if kk <= 1:
            if P <= ell / 60:
                add("product_small_regime", j,
                    Nk ** (2 / kk) * Nk1 ** 2,
                    Nk ** 2 * (1 + x) ** (2 / kk))
                add("lower_small_regime", j,
                    Nk1 ** (2 * kk) * Nk ** (2 * (1 - kk)),
                    (1 - x) ** 2, lower=True)
            else:
                mid = (64 * P / ell) ** (2 * (1 + 1 / kk) * ell)
                add("product_large_regime", j, Nk ** (2 / kk) * Nk1 ** 2, mid)
                add("q_dominates_large_regime", j, mid, Q * Q)
                add("guard_unit", j, Q, 1.0, lower=True)
        else:
            e = 2 * kk / (2 * kk - 1)
            if P <= ell / (40 * kk):
                add("product_small_regime", j,
                    (Nk * Nk1) ** e,
                    Nk ** 2 * (1 + x) ** e
                    * (1 - x) ** (-2 * (kk - 1) / (2 * kk - 1)))
            else:
                add("product_large_regime", j, (Nk * Nk1) ** e, Q * Q)
                add("guard_unit", j, Q, 1.0, lower=True)
    return InequalityAudit(q=ctx.segments.q, k=kk, checks=tuple(checks))


def family_pointwise_audit(ctx: MollifierContext, k: float | None = None,
                           group: characters.CharacterGroup | None = None,
                           slack: float = _SLACK) -> InequalityAudit:
    """Pointwise audit over every primitive character of the modulus."""
    q = ctx.segments.q
    if group is None:
        group = characters.build_group(q, allow_general=True)
    checks: list[CheckRecord] = []
    kk = ctx.ladder.k if k is None else k
    for chi in characters.primitive_characters(group):
        checks.extend(pointwise_inequality_audit(ctx, chi, kk, slack).checks)
    return InequalityAudit(q=q, k=kk, checks=tuple(checks))


def _upper_weights(ctx: MollifierContext, chi: characters.Character,
                   alpha: float, k: float) -> float:
    """sum_v (prod_{j<=v} |N_j(chi, alpha)|^2) |Q_(v+1)(chi, k)|^2."""
    total = 0.0
    running = 1.0
    for v in range(ctx.ladder.R + 1):
        if v >= 1:
            running *= abs(mollifier.n_poly(ctx, chi, v, alpha)) ** 2
        total += running * abs(mollifier.q_poly(ctx, chi, v + 1, k)) ** 2
    return total


def holder_chain_audit(q: int, k: float, ladder: mollifier.LadderParams,
                       cfg: AfeConfig = DEFAULT_CONFIG,
                       table: EigenformTable | None = None,
                       slack: float = _SLACK) -> InequalityAudit:
    """Family-level Hoelder splittings, asserted with constant 1.

    k <= 1 asserts the three-factor split of the twisted moment and the
    two-factor split of the upper principle; k > 1 asserts the two-factor
    exponent (1/(2k), (2k-1)/(2k)) split.  Quantities with unspecified
    constants are reported as ratios, never asserted: the guarded product
    family sum and the per-character weight min (which the arguments need
    to stay of size 1).
    """
    if table is None:
        table = _default_table(q, cfg)
    segs = mollifier.build_segments(q, ladder)
    ctx = MollifierContext(table, ladder, segs)
    group, chis, recs = family_values_cached(q, cfg, table)
    by_index = {c.index: c for c in chis}
    L = {c.index: r.value for c, r in zip(chis, recs)}
    checks: list[CheckRecord] = []
    reported: dict = {}

    twisted = 0.0 + 0.0j
    for chi in chis:
        chibar = by_index[chi.conjugate_index()]
        twisted += (L[chi.index]
                    * mollifier.n_full(ctx, chibar, k)
                    * mollifier.n_full(ctx, chi, k - 1))
    S_2k = sum(abs(L[c.index]) ** (2 * k) for c in chis)
    reported["twisted_moment"] = abs(twisted)

    if k <= 1:
        S_LN = sum(abs(L[c.index] * mollifier.n_full(ctx, c, k - 1)) ** 2
                   for c in chis)
        S_NN = sum(abs(mollifier.n_full(ctx, c, k)) ** (2 / k)
                   * abs(mollifier.n_full(ctx, c, k - 1)) ** 2
                   for c in chis)
        rhs = (S_2k ** 0.5 * S_LN ** ((1 - k) / 2) * S_NN ** (k / 2))
        checks.append(CheckRecord(
            name="holder_three_factor", subject=f"q={q}",
            lhs=abs(twisted), rhs=rhs, ok=abs(twisted) <= rhs * (1 + slack)))

        S_guard = sum(
            math.prod(abs(mollifier.n_poly(ctx, c, j, k)) ** 2
                      + abs(mollifier.q_poly(ctx, c, j, k)) ** 2
                      for j in range(1, ladder.R + 1))
            for c in chis)
        bump = math.prod((1 + math.exp(-l)) ** (2 / k) for l in ladder.ell)
        checks.append(CheckRecord(
            name="guarded_product_dominates", subject=f"q={q}",
            lhs=S_NN, rhs=bump * S_guard,
            ok=S_NN <= bump * S_guard * (1 + slack)))
        reported["guarded_product_ratio"] = S_NN / max(S_guard, _TINY)

        A = {c.index: _upper_weights(ctx, c, k - 1, k) for c in chis}
        B = {c.index: _upper_weights(ctx, c, k, k) for c in chis}
        lhs_up = sum((abs(L[i]) ** 2 * A[i]) ** k * B[i] ** (1 - k)
                     for i in A)
        rhs_up = (sum(abs(L[i]) ** 2 * A[i] for i in A) ** k
                  * sum(B.values()) ** (1 - k))
        checks.append(CheckRecord(
            name="holder_upper_principle", subject=f"q={q}",
            lhs=lhs_up, rhs=rhs_up, ok=lhs_up <= rhs_up * (1 + slack)))
        reported["upper_weight_min"] = min(
            A[i] ** k * B[i] ** (1 - k) for i in A)
        reported["upper_weight_max"] = max(
            A[i] ** k * B[i] ** (1 - k) for i in A)
    else:
        S_prod = sum(
            (abs(mollifier.n_full(ctx, c, k))
             * abs(mollifier.n_full(ctx, c, k - 1))) ** (2 * k / (2 * k - 1))
            for c in chis)
        rhs = S_2k ** (1 / (2 * k)) * S_prod ** ((2 * k - 1) / (2 * k))
        checks.append(CheckRecord(
            name="holder_two_factor", subject=f"q={q}",
            lhs=abs(twisted), rhs=rhs, ok=abs(twisted) <= rhs * (1 + slack)))
    return InequalityAudit(q=q, k=k, checks=tuple(checks),
                           reported=reported)


@dataclass(frozen=True)
class Prop56Report:
    """The four guarded family sums with their (log q)^(k^2) normalizations."""

    q: int
    k: float
    phi_star: int
    sum_LN_sq: float            # Sum* |L N(chi, k-1)|^2
    sum_L_sq_weighted: float    # Sum* |L|^2 A(chi)
    sum_guarded_product: float  # Sum* prod_j (|N_j(k)|^2 + |Q_j(k)|^2)
    sum_weights_k: float        # Sum* B(chi)
    normalized: tuple[float, float, float, float]


def prop56_quantities(q: int, k: float, ladder: mollifier.LadderParams,
                      cfg: AfeConfig = DEFAULT_CONFIG,
                      table: EigenformTable | None = None) -> Prop56Report:
    """The guarded family sums that cap the moment from above.

    A(chi) and B(chi) are the upper-principle weights built from
    prod_{j<=v} |N_j|^2 times |Q_(v+1)|^2, at alpha = k-1 and k.
    """
    if table is None:
        table = _default_table(q, cfg)
    segs = mollifier.build_segments(q, ladder)
    ctx = MollifierContext(table, ladder, segs)
    group, chis, recs = family_values_cached(q, cfg, table)
    L = {c.index: r.value for c, r in zip(chis, recs)}
    s_ln = 0.0
    s_lw = 0.0
    s_gp = 0.0
    s_bw = 0.0
    for c in chis:
        amp = abs(L[c.index]) ** 2
        s_ln += amp * abs(mollifier.n_full(ctx, c, k - 1)) ** 2
        s_lw += amp * _upper_weights(ctx, c, k - 1, k)
        s_gp += math.prod(abs(mollifier.n_poly(ctx, c, j, k)) ** 2
                          + abs(mollifier.q_poly(ctx, c, j, k)) ** 2
                          for j in range(1, ladder.R + 1))
        s_bw += _upper_weights(ctx, c, k, k)
    phi_star = arith.phi_star(q)
    scale = phi_star * math.log(q) ** (k * k)
    sums = (s_ln, s_lw, s_gp, s_bw)
    return Prop56Report(
        q=q, k=k, phi_star=phi_star,
        sum_LN_sq=s_ln, sum_L_sq_weighted=s_lw,
        sum_guarded_product=s_gp, sum_weights_k=s_bw,
        normalized=tuple(s / scale for s in sums))


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points: int


def exponent_fit(reports) -> FitResult:
    """Least-squares slope of log(normalized moment) against log log q."""
    reports = list(reports)
    if len(reports) < 4:
        raise ValueError(f"need >= 4 reports, got {len(reports)}")
    ks = {r.k for r in reports}
    if len(ks) != 1:
        raise ValueError(f"reports mix k values: {sorted(ks)}")
    qs = [r.q for r in reports]
    if any(a >= b for a, b in zip(qs, qs[1:])):
        raise ValueError("reports must come in strictly increasing q")
    xs = np.array([math.log(math.log(r.q)) for r in reports])
    ys = np.array([math.log(r.normalized) for r in reports])
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - ss_res / ss_tot
    return FitResult(slope=float(slope), intercept=float(intercept),
                     r_squared=r2, points=len(reports))


def sweep_reports(q_list, k: float, cfg: AfeConfig = DEFAULT_CONFIG,
                  table: EigenformTable | None = None) -> list[MomentReport]:
    """family_moment across moduli, reusing one coefficient table."""
    q_list = sorted(q_list)
    if table is None:
        need = max(lvalues.required_n_cap(q, cfg) for q in q_list)
        table = hecke.shared_eigenform(need)
    return [family_moment(q, k, cfg, table=table) for q in q_list]
