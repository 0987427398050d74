"""Smooth weight kernels for the approximate functional equations.

Two kernels, both inverse Mellin transforms along the vertical line Re s = c:

    W(x)  = (1/2pi i) int Gamma(kappa/2 + s)/Gamma(kappa/2) e^{s^2} (2 pi x)^{-s} ds/s
    W2(x) = (1/2pi i) int [Gamma(kappa/2 + s)/Gamma(kappa/2)]^2 (2 pi x)^{-s} ds/s

W drives the first-power equation, W2 the squared one.  Both tend to 1 as
x -> 0 (residue at s = 0) and decay faster than any power: W like
exp(-log^2(2 pi x)/4) thanks to the e^{s^2} factor, W2 like exp(-c sqrt(x))
from the Gamma^2.

Quadrature is a trapezoid rule on s = c + it, |t| <= T, with the integrand
assembled in log space (scipy loggamma) so large |t| never overflows.  The
kernel factor K(t) = Gamma-part / s is independent of x and cached per
evaluator, turning each evaluation into one complex dot product.

Production evaluation interpolates a 2048-sample log-spaced grid with a cubic
spline in (log x, log W); direct quadrature stays available for audits.  The
spline is built only over the part of the grid where samples sit safely above
quadrature noise; past that the weight is clamped to 0, which costs less than
1e-16 absolute and keeps the log transform well defined.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import loggamma

_GRID_SIZE = 2048
_GRID_LO = 1e-8
_GRID_HI = 1e6
# below these, grid samples are dominated by quadrature round-off
_NOISE_FLOOR = {"W": 1e-20, "W2": 1e-16}
_TAIL_TOL = 1e-12
_CHUNK = 256


class QuadratureTailError(RuntimeError):
    """The |Im s| in [T-1, T] band of the contour contributes more than the
    tolerance: T is too small for this x."""


class WeightEvaluator:
    """Immutable evaluator for one kernel; thread-safe after construction.

    Args:
        kind: "W" (first-power kernel, with e^{s^2}) or "W2" (squared kernel).
        kappa: weight of the eigenform, even.
        c: contour abscissa.
        T: truncation height; defaults 12 for W, 40 for W2.
        h: quadrature step; T/h must be an integer.
        build_grid: precompute the interpolation grid (skip for one-off audits).
    """

    def __init__(self, kind: str, kappa: int = 12, c: float = 1.0,
                 T: float | None = None, h: float = 1.0 / 64,
                 build_grid: bool = True):
        if kind not in ("W", "W2"):
            raise ValueError(f"kind must be 'W' or 'W2', got {kind!r}")
        if c <= 0:
            raise ValueError(f"contour abscissa must be positive, got {c}")
        if T is None:
            T = 12.0 if kind == "W" else 40.0
        steps = T / h
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(f"T/h = {steps} is not an integer")
        self.kind = kind
        self.kappa = kappa
        self.c = float(c)
        self.T = float(T)
        self.h = float(h)

        # The integrand is conjugate-symmetric in t, so the [-T, T] trapezoid
        # sum equals f(0) + 2 sum_{t>0} w_t Re f(t) exactly; folding the
        # contour halves the work and makes the result real by construction
        # instead of real up to amplified rounding noise.
        n = int(round(steps))
        t = np.arange(0, n + 1) * self.h
        s = self.c + 1j * t
        lg = loggamma(kappa / 2 + s) - loggamma(kappa / 2)
        ln_k = lg + s * s if kind == "W" else 2.0 * lg
        kern = np.exp(ln_k) / s
        f0 = kern[0]
        if abs(f0.imag) > 1e-13 * abs(f0.real):
            raise AssertionError("kernel not real at t=0")
        kern *= 2.0
        kern[0] = f0.real
        kern[-1] *= 0.5
        self._t = t
        self._kern = kern
        # absolute bound on what the outermost unit band can contribute,
        # before the (2 pi x)^{-c} factor
        band = t >= self.T - 1.0
        self._tail_mass = float(np.sum(np.abs(kern[band]))) * self.h / (2 * np.pi)

        self.grid_x: np.ndarray | None = None
        self.grid_vals: np.ndarray | None = None
        self._spline = None
        self._support_end: float | None = None
        self._left_val: float | None = None
        if build_grid:
            self._build_grid()

    # ------------------------------------------------------------------ direct

    def quad(self, x) -> np.ndarray | float:
        """Direct quadrature at x (scalar or array); exactly real because the
        folded trapezoid sum is.

        Raises:
            QuadratureTailError: the truncated contour cannot certify
                convergence at this x.
        """
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs <= 0):
            raise ValueError("weight argument must be positive")
        ln2pix = np.log(2 * np.pi * xs)
        pref = (self.h / (2 * np.pi)) * np.exp(-self.c * ln2pix)
        tail = self._tail_mass * np.exp(-self.c * ln2pix)
        if np.any(tail > _TAIL_TOL):
            bad = float(xs[np.argmax(tail)])
            raise QuadratureTailError(
                f"kind={self.kind}: tail band exceeds {_TAIL_TOL:g} "
                f"at x={bad:g}; increase T")
        out = np.empty(len(xs))
        for lo in range(0, len(xs), _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            phase = np.exp(-1j * np.outer(ln2pix[sl], self._t))
            # Re(phase @ kern) pairs each t > 0 with its conjugate mirror at
            # -t, so the imaginary residue of the represented two-sided sum
            # is identically zero rather than < 1e-9 by luck
            out[sl] = pref[sl] * (phase @ self._kern).real
        return out if np.ndim(x) else float(out[0])

    # ------------------------------------------------------------------- grid

    def _build_grid(self):
        x = np.geomspace(_GRID_LO, _GRID_HI, _GRID_SIZE)
        v = self.quad(x)
        floor = _NOISE_FLOOR[self.kind]
        peak = int(np.argmax(v))
        below = np.nonzero(v[peak:] < floor)[0]
        end = peak + (int(below[0]) if len(below) else len(v) - peak)
        if end < peak + 8:
            raise AssertionError("degenerate weight grid")
        if np.any(v[:end] <= 0):
            raise AssertionError("nonpositive sample above the noise floor")
        self.grid_x = x
        self.grid_vals = v
        self._support_end = float(x[end - 1])
        self._left_val = float(v[0])
        self._spline = CubicSpline(np.log(x[:end]), np.log(v[:end]))

    def __call__(self, x) -> np.ndarray | float:
        """Grid-interpolated value (falls back to quadrature without a grid);
        clamped to the left-edge value below the grid and to 0 past the point
        where samples sink into quadrature noise."""
        if self._spline is None:
            return self.quad(x)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs <= 0):
            raise ValueError("weight argument must be positive")
        out = np.zeros(len(xs))
        low = xs < _GRID_LO
        out[low] = self._left_val
        mid = ~low & (xs <= self._support_end)
        if np.any(mid):
            out[mid] = np.exp(self._spline(np.log(xs[mid])))
        return out if np.ndim(x) else float(out[0])

    def envelope_cutoff(self, eps: float) -> float:
        """Smallest grid x beyond which the running majorant of |values|
        stays <= eps; conservative input to truncation-length choices."""
        if self.grid_vals is None:
            raise ValueError("evaluator built without a grid")
        if eps <= 0:
            raise ValueError("eps must be positive")
        vals = np.abs(self.grid_vals.copy())
        vals[self.grid_x > self._support_end] = 0.0
        majorant = np.maximum.accumulate(vals[::-1])[::-1]
        idx = np.nonzero(majorant <= eps)[0]
        if not len(idx):
            raise ValueError(f"majorant never reaches {eps:g} on the grid")
        return float(self.grid_x[idx[0]])


def eval_weight(ev: WeightEvaluator, x: float) -> float:
    """Direct-quadrature kernel value at x (the audit path)."""
    return ev.quad(x)


def decay_audit(ev: WeightEvaluator, c_test: float) -> float:
    """Max of |W(x)| x^{c_test} over a log grid x in [1, 1e4]: the implied
    constant in the min(1, x^{-c}) decay bound at exponent c_test."""
    if not 0 < c_test < ev.kappa / 2:
        raise ValueError(
            f"c_test must lie in (0, kappa/2) = (0, {ev.kappa / 2}), "
            f"got {c_test}")
    x = np.geomspace(1.0, 1e4, 200)
    return float(np.max(np.abs(ev.quad(x)) * x ** c_test))
