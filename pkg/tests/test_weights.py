"""Weight kernels: quadrature accuracy, grid fidelity, decay and errors."""

import numpy as np
import pytest

from twistmoments import lvalues, weights

import helpers


@pytest.fixture(scope="module")
def ev_w():
    return lvalues.default_evaluators(12)[0]


@pytest.fixture(scope="module")
def ev_w2():
    return lvalues.default_evaluators(12)[1]


def test_small_x_limit(ev_w, ev_w2):
    for ev in (ev_w, ev_w2):
        assert abs(ev.quad(1e-6) - 1.0) < 1e-4
        assert abs(ev(1e-6) - 1.0) < 1e-4


def test_frozen_reference_values(ev_w, ev_w2):
    assert abs(ev_w.quad(50.0) - 0.002998406658876877) < 1e-12
    w2_50 = ev_w2.quad(50.0)
    assert abs(w2_50 - 8.900811428434201e-07) < 1e-15
    assert w2_50 < 1e-6


def test_two_sided_contour_oracle(ev_w, ev_w2):
    for ev, kind in ((ev_w, "W"), (ev_w2, "W2")):
        for x in (0.1, 1.0, 10.0):
            z = helpers.contour_weight_two_sided(kind, x)
            got = ev.quad(x)
            assert abs(z.imag) < 1e-9
            assert abs(z.real - got) < 1e-12 * max(1.0, abs(got))


def test_quadrature_stability_under_refinement(ev_w, ev_w2):
    # doubling T and halving h moves nothing at the 1e-8 relative level
    for kind, ev in (("W", ev_w), ("W2", ev_w2)):
        fine = weights.WeightEvaluator(kind, T=2 * ev.T, h=ev.h / 2,
                                       build_grid=False)
        for x in (0.1, 1.0, 10.0):
            a, b = ev.quad(x), fine.quad(x)
            assert abs(a - b) <= 1e-8 * max(abs(a), abs(b))


def test_grid_matches_quadrature(ev_w, ev_w2):
    rng = np.random.default_rng(2)
    for ev, hi in ((ev_w, 100.0), (ev_w2, 50.0)):
        xs = np.exp(rng.uniform(np.log(1e-6), np.log(hi), size=100))
        direct = ev.quad(xs)
        interp = np.array([ev(float(x)) for x in xs])
        rel = np.abs(interp - direct) / np.maximum(np.abs(direct), 1e-18)
        assert rel.max() < 1e-7


def test_exactly_real_output_types(ev_w):
    arr = ev_w.quad(np.array([0.5, 2.0]))
    assert arr.dtype == np.float64
    assert isinstance(ev_w.quad(1.0), float)
    assert isinstance(ev_w(1.0), float)


def test_monotone_tail(ev_w, ev_w2):
    xs = np.geomspace(10.0, 1000.0, 50)
    for ev in (ev_w, ev_w2):
        vals = np.array([ev(float(x)) for x in xs])
        assert np.all(np.diff(vals) <= 1e-18)
        assert np.all(vals >= 0.0)


def test_grid_values_bounded(ev_w, ev_w2):
    for ev in (ev_w, ev_w2):
        assert np.abs(ev.grid_vals).max() <= 1.01


def test_envelope_cutoff(ev_w, ev_w2):
    for ev in (ev_w, ev_w2):
        x8 = ev.envelope_cutoff(1e-8)
        x6 = ev.envelope_cutoff(1e-6)
        assert 0 < x6 < x8
        assert ev(float(2 * x8)) <= 1.01e-8
        with pytest.raises(ValueError):
            ev.envelope_cutoff(0.0)
        # past the support end values clamp to exactly zero, so thresholds
        # below the quadrature noise floor resolve to the support edge
        assert ev.envelope_cutoff(1e-30) >= x8


def test_constructor_validation():
    with pytest.raises(ValueError):
        weights.WeightEvaluator("V")
    with pytest.raises(ValueError):
        weights.WeightEvaluator("W", c=0.0)
    with pytest.raises(ValueError):
        weights.WeightEvaluator("W", T=12.0, h=0.013)  # T/h not integral
    ev = weights.WeightEvaluator("W", build_grid=False)
    with pytest.raises(ValueError):
        ev.quad(0.0)
    with pytest.raises(ValueError):
        ev.quad(-1.0)


def test_tail_error_when_T_too_small():
    ev = weights.WeightEvaluator("W2", T=4.0, build_grid=False)
    with pytest.raises(weights.QuadratureTailError):
        ev.quad(1e-6)


def test_decay_audit(ev_w, ev_w2):
    for ev in (ev_w, ev_w2):
        m = weights.decay_audit(ev, 3.0)
        assert np.isfinite(m)
        assert m > 0
    with pytest.raises(ValueError):
        weights.decay_audit(ev_w, 6.0)  # must stay below kappa/2
    with pytest.raises(ValueError):
        weights.decay_audit(ev_w, 0.0)


def test_eval_weight_helper(ev_w):
    assert weights.eval_weight(ev_w, 1.0) == ev_w.quad(1.0)
