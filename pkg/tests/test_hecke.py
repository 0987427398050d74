"""Eigenform coefficient tables: tau, Hecke relations, prime-sum diagnostics."""

import math

import numpy as np
import pytest

from twistmoments import arith, hecke

import helpers

KNOWN_TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def test_tau_table_matches_q_expansion_oracle():
    got = hecke.ramanujan_tau_table(40)
    assert list(got) == helpers.tau_q_expansion(40)
    assert list(got[:10]) == KNOWN_TAU


def test_tau_table_tiny_sizes():
    # sparse squarings occupy fewer limbs than the output length; make sure
    # the unpacking pads instead of misbroadcasting
    for n in (1, 2, 3, 6, 7, 11):
        assert list(hecke.ramanujan_tau_table(n)) == helpers.tau_q_expansion(n)


def test_tau_multiplicativity():
    taus = hecke.ramanujan_tau_table(200)
    assert taus[6 - 1] == taus[2 - 1] * taus[3 - 1]
    assert taus[200 - 1] == taus[8 - 1] * taus[25 - 1]


def test_tau_table_size_limit():
    with pytest.raises(ValueError):
        hecke.ramanujan_tau_table(hecke.TAU_N_MAX + 1)
    with pytest.raises(ValueError):
        hecke.ramanujan_tau_table(0)


def test_tau_file_round_trip(tmp_path):
    taus = hecke.ramanujan_tau_table(50)
    path = tmp_path / "tau.tsv"
    hecke.write_tau_file(str(path), taus)
    assert hecke.read_coefficient_file(str(path)) == list(taus)
    lines = path.read_text().splitlines()
    assert lines[0] == "1\t1"
    assert len(lines) == 50


@pytest.mark.parametrize("body", [
    "",                    # empty
    "2\t-24\n",            # does not start at 1
    "1\t1\n3\t252\n",      # index gap
    "1\t1\n2 -24\n",       # missing tab
    "1\t1\n2\tx\n",        # non-integer entry
])
def test_coefficient_file_rejections(tmp_path, body):
    path = tmp_path / "bad.tsv"
    path.write_text(body)
    with pytest.raises(ValueError):
        hecke.read_coefficient_file(str(path))


def test_build_from_file_always_validates(tmp_path):
    path = tmp_path / "fake.tsv"
    path.write_text("1\t2\n2\t-24\n")  # a(1) != 1
    with pytest.raises(ValueError):
        hecke.build_eigenform(source=str(path))


def test_build_from_file_round_trip(tmp_path):
    path = tmp_path / "tau.tsv"
    hecke.write_tau_file(str(path), hecke.ramanujan_tau_table(80))
    t = hecke.build_eigenform(source=str(path), n_max=500)
    assert t.n_max == 80  # capped at the file length
    ref = hecke.build_eigenform(n_max=80)
    assert np.array_equal(t.lam, ref.lam)


def test_eigenform_basic_identities():
    t = hecke.build_eigenform(n_max=10_000)
    assert t.lam[1] == 1.0
    assert t.lam_at(1) == 1.0
    # lambda(4) = lambda(2)^2 - 1 from the prime-power recursion
    assert abs(t.lam_at(4) - (t.lam_at(2) ** 2 - 1.0)) < 1e-12
    d = np.array([arith.divisor_count(n) for n in range(1, 10_001)],
                 dtype=float)
    assert np.all(np.abs(t.lam[1:]) <= d + 1e-9)


def test_hecke_relation_on_random_pairs(table_100k):
    t = table_100k
    rng = np.random.default_rng(3)
    for _ in range(500):
        m, n = (int(v) for v in rng.integers(1, 317, size=2))
        lhs = t.lam_at(m) * t.lam_at(n)
        rhs = sum(t.lam_at(m * n // (d * d))
                  for d in arith.divisors(math.gcd(m, n)))
        assert abs(lhs - rhs) < 1e-10, (m, n)


def test_lambda_tilde(table_100k):
    t = table_100k
    want = t.lam_at(2) ** 2 * t.lam_at(3)
    assert abs(hecke.lambda_tilde(t, 12) - want) < 1e-15
    for n in range(1, 10_001):
        if arith.mobius(n) != 0:
            diff = hecke.lambda_tilde(t, n) - t.lam_at(n)
            assert abs(diff) < 1e-12 * arith.divisor_count(n), n
    with pytest.raises(ValueError):
        hecke.lambda_tilde(t, 0)


def test_rankin_prime_sum_values(table_100k):
    t = table_100k
    assert abs(hecke.rankin_prime_sum(t, 2) - t.lam_at(2) ** 2 / 2) < 1e-15
    assert abs(hecke.rankin_prime_sum(t, 100) - 0.8690134446666661) < 1e-12
    with pytest.raises(ValueError):
        hecke.rankin_prime_sum(t, 2 * t.n_max)


def test_rankin_tracks_loglog(table_100k):
    t = table_100k
    vals = [hecke.rankin_prime_sum(t, x) for x in (10.0, 1e2, 1e3, 1e4, 1e5)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    resid = [hecke.rankin_prime_sum(t, x) - math.log(math.log(x))
             for x in (1e3, 1e4, 1e5)]
    assert max(resid) - min(resid) < 0.05
    assert abs(resid[-1] + 0.687356) < 1e-4


def test_mertens_log_sum():
    assert hecke.mertens_log_sum(1.5) == 0.0
    assert abs(hecke.mertens_log_sum(2) - math.log(2) / 2) < 1e-15
    want = sum(math.log(p) / p for p in (2, 3, 5, 7))
    assert abs(hecke.mertens_log_sum(10) - want) < 1e-12
    resid = hecke.mertens_log_sum(1e5) - math.log(1e5)
    assert abs(resid + 1.3286305110533725) < 1e-9


def test_shared_eigenform_reuses_table():
    a = hecke.shared_eigenform(1000)
    assert a.n_max >= 1000
    b = hecke.shared_eigenform(500)
    assert b is a
    c = hecke.shared_eigenform(1200)
    assert c.n_max >= 1200
    assert c.lam[1] == 1.0
