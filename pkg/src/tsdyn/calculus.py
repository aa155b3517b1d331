"""Scalar calculus on time scales.

Covers the cylinder transformation, regressivity checks, the generalized
exponential e_p(t, s), and evaluation of the comparison and Gronwall-Bellman
bounds.  All scalar arithmetic runs over the complex numbers with the
principal logarithm branch (imaginary part in (-pi, pi]); jump factors with
1 + mu*p < 0 therefore produce complex rates, whose real parts are the
branch-independent quantities the exponent estimators consume.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    NegativeGain,
    NonRegressiveValue,
    NotPositivelyRegressive,
)
from .timescale import DEFAULT_QUADRATURE, QuadratureConfig, TimeScale

__all__ = [
    "cylinder",
    "ScalarCoefficient",
    "ScalarRegressivity",
    "ScalarRegressivityReport",
    "check_regressive_scalar",
    "exp_generalized",
    "comparison_bound",
    "gronwall_bound",
    "rate_to_coefficient",
]

_SINGULAR_TOL = 1e-12


def cylinder(z: complex, h: float) -> complex:
    """Cylinder transformation: log(1 + z*h)/h for h > 0, z for h == 0.

    Converts a jump factor over a gap of length h into an exponential rate.
    Uses the principal branch, so a negative real 1 + z*h yields an imaginary
    part of pi/h.
    """
    if h == 0:
        return complex(z)
    w = 1.0 + complex(z) * h
    if abs(w) < _SINGULAR_TOL:
        raise NonRegressiveValue(f"1 + z*h = {w} at h={h}")
    return cmath.log(w) / h


def rate_to_coefficient(rate: float, mu: float) -> float:
    """Coefficient whose cylinder rate over a gap of length mu equals ``rate``."""
    if mu == 0:
        return rate
    return (math.exp(rate * mu) - 1.0) / mu


class ScalarCoefficient:
    """Scalar coefficient p(t): constant, piecewise-constant, or a callback.

    The declared rd-continuity of callbacks is a caller promise; this class
    only guarantees evaluability.  Values are complex.
    """

    CONSTANT = "constant"
    PIECEWISE = "piecewise"
    CALLBACK = "callback"

    def __init__(self, kind, value=None, breaks=None, fn=None):
        self.kind = kind
        self._value = complex(value) if value is not None else None
        if breaks is not None:
            pts = sorted(breaks, key=lambda kv: kv[0])
            self._break_ts = np.asarray([float(t) for t, _ in pts])
            self._break_vs = np.asarray([complex(v) for _, v in pts])
        else:
            self._break_ts = self._break_vs = None
        self._fn = fn

    @classmethod
    def constant(cls, c) -> "ScalarCoefficient":
        return cls(cls.CONSTANT, value=c)

    @classmethod
    def piecewise(cls, breaks) -> "ScalarCoefficient":
        """breaks: [(t_i, value_i)]; p(t) = value of the last t_i <= t."""
        if not breaks:
            raise ValueError("piecewise coefficient needs at least one break")
        return cls(cls.PIECEWISE, breaks=breaks)

    @classmethod
    def from_callable(cls, fn: Callable[[float], complex]) -> "ScalarCoefficient":
        return cls(cls.CALLBACK, fn=fn)

    @classmethod
    def coerce(cls, obj) -> "ScalarCoefficient":
        if isinstance(obj, cls):
            return obj
        if callable(obj):
            return cls.from_callable(obj)
        return cls.constant(obj)

    @property
    def is_constant(self) -> bool:
        return self.kind == self.CONSTANT

    @property
    def constant_value(self) -> complex:
        if not self.is_constant:
            raise ValueError("not a constant coefficient")
        return self._value

    def __call__(self, t: float) -> complex:
        if self.kind == self.CONSTANT:
            return self._value
        if self.kind == self.PIECEWISE:
            i = int(np.searchsorted(self._break_ts, t, side="right")) - 1
            return complex(self._break_vs[max(i, 0)])
        return complex(self._fn(t))

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        if self.kind == self.CONSTANT:
            return np.full(ts.shape, self._value, dtype=complex)
        if self.kind == self.PIECEWISE:
            idx = np.clip(np.searchsorted(self._break_ts, ts, side="right") - 1, 0, None)
            return self._break_vs[idx]
        try:
            vals = np.asarray(self._fn(ts), dtype=complex)
            if vals.shape == ts.shape:
                return vals
        except Exception:
            pass
        return np.asarray([complex(self._fn(t)) for t in ts])


class ScalarRegressivity(Enum):
    POSITIVELY_REGRESSIVE = "positively-regressive"
    REGRESSIVE = "regressive"
    FAILS = "fails"


@dataclass(frozen=True)
class ScalarRegressivityReport:
    kind: ScalarRegressivity
    fail_time: float | None = None
    min_abs: float = math.inf
    exact: bool = False


def check_regressive_scalar(ts: TimeScale, p, horizon: float,
                            tol: float = 1e-9) -> ScalarRegressivityReport:
    """Classify 1 + mu*p over scattered points up to ``horizon``.

    For a constant coefficient on a scale with an exact grain profile the
    verdict covers the whole scale (every attained tail gap is checked);
    otherwise the scan is a finite-horizon sample.
    """
    p = ScalarCoefficient.coerce(p)
    profile = ts.grain_profile(horizon)
    positively = True
    min_abs = math.inf
    exact = False
    if p.is_constant and profile.exact:
        exact = True
        values = [1.0 + mu * p.constant_value for mu in profile.attained_gaps]
        fail_mu = None
        for mu, w in zip(profile.attained_gaps, values):
            if abs(w) < tol:
                fail_mu = mu
            min_abs = min(min_abs, abs(w))
            if abs(w.imag) > 1e-12 or w.real <= 0:
                positively = False
        if fail_mu is not None:
            return ScalarRegressivityReport(ScalarRegressivity.FAILS, fail_mu,
                                            min_abs, exact)
    else:
        hi = ts.floor_scale(horizon)
        for t, mu in ts.scattered_points(ts.min_time, hi):
            w = 1.0 + mu * p(t)
            min_abs = min(min_abs, abs(w))
            if abs(w) < tol:
                return ScalarRegressivityReport(ScalarRegressivity.FAILS, t,
                                                min_abs, exact)
            if abs(w.imag) > 1e-12 or w.real <= 0:
                positively = False
    kind = (ScalarRegressivity.POSITIVELY_REGRESSIVE if positively
            else ScalarRegressivity.REGRESSIVE)
    return ScalarRegressivityReport(kind, None, min_abs, exact)


# ---------------------------------------------------------------------------
# cumulative cylinder integral
# ---------------------------------------------------------------------------

@dataclass
class _DenseRun:
    edges: np.ndarray      # panel edges, length n+1
    mids: np.ndarray       # panel midpoints, length n
    I_edges: np.ndarray    # cumulative integral at edges
    I_mids: np.ndarray     # cumulative integral at midpoints


@dataclass
class _JumpRecord:
    t: float
    mu: float
    I_before: complex
    I_after: complex


class _CylinderAccumulation:
    """Cumulative integral of xi_mu(p) along [a, b], jump-exact.

    Dense runs contribute per-panel Simpson increments of p itself
    (xi_0 = identity); every jump contributes log(1 + mu*p) exactly.
    """

    def __init__(self, ts: TimeScale, p: ScalarCoefficient, a: float, b: float,
                 quad: QuadratureConfig):
        self.jumps: list[_JumpRecord] = []
        self.dense: list[_DenseRun] = []
        total = 0.0 + 0.0j
        for kind, t0, t1 in ts.events(a, b):
            if kind == "jump":
                w = 1.0 + t1 * p(t0)
                if abs(w) < _SINGULAR_TOL:
                    raise NonRegressiveValue(f"1 + mu*p = {w} at t={t0}")
                inc = cmath.log(w)
                self.jumps.append(_JumpRecord(t0, t1, total, total + inc))
                total += inc
            else:
                run = _accumulate_dense(p, t0, t1, total, quad)
                self.dense.append(run)
                total = complex(run.I_edges[-1])
        self.total = total


def _accumulate_dense(p: ScalarCoefficient, a: float, b: float,
                      start: complex, quad: QuadratureConfig) -> _DenseRun:
    length = b - a
    n = max(1, int(math.ceil(length / quad.step_for(length))))
    edges = np.linspace(a, b, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    quarters = 0.5 * (edges[:-1] + mids)
    fe = p.eval_array(edges)
    fm = p.eval_array(mids)
    fq = p.eval_array(quarters)
    h = length / n
    panel = (fe[:-1] + 4.0 * fm + fe[1:]) * (h / 6.0)
    half = (fe[:-1] + 4.0 * fq + fm) * (h / 12.0)
    I_edges = start + np.concatenate(([0.0], np.cumsum(panel)))
    I_mids = I_edges[:-1] + half
    return _DenseRun(edges, mids, I_edges, I_mids)


def exp_generalized(ts: TimeScale, p, t: float, s: float,
                    quad: QuadratureConfig | None = None) -> complex:
    """Generalized exponential e_p(t, s) = exp of the Delta-integral of xi_mu(p).

    Solves the scalar Cauchy problem x^Delta = p x, x(s) = 1; on the reals it
    reduces to exp(int p), and on a lattice to the product of (1 + h p).
    """
    if t < s:
        raise ValueError("need t >= s")
    p = ScalarCoefficient.coerce(p)
    acc = _CylinderAccumulation(ts, p, s, t, quad or DEFAULT_QUADRATURE)
    return cmath.exp(acc.total)


def _check_real_positive_jumps(acc: _CylinderAccumulation, p: ScalarCoefficient,
                               what: str):
    for rec in acc.jumps:
        w = 1.0 + rec.mu * p(rec.t)
        if abs(w.imag) > 1e-10 or w.real <= 0:
            raise NotPositivelyRegressive(
                f"{what} needs 1 + mu*p > 0, got {w} at t={rec.t}")


def comparison_bound(ts: TimeScale, p, f, x0: float, t0: float, t: float,
                     quad: QuadratureConfig | None = None) -> float:
    """Right side of the comparison theorem.

    Evaluates x0*e_p(t, t0) + int_{t0}^t e_p(t, sigma(tau)) f(tau) Delta-tau,
    which dominates every solution of x^Delta <= p x + f with x(t0) <= x0 for
    positively regressive p.
    """
    quad = quad or DEFAULT_QUADRATURE
    p = ScalarCoefficient.coerce(p)
    f = ScalarCoefficient.coerce(f)
    acc = _CylinderAccumulation(ts, p, t0, t, quad)
    _check_real_positive_jumps(acc, p, "comparison bound")
    total = acc.total.real
    value = x0 * math.exp(total)
    value += _weighted_integral(acc, total, lambda s: f(s).real)
    return value


def gronwall_bound(ts: TimeScale, g, p, t0: float, t: float,
                   quad: QuadratureConfig | None = None) -> float:
    """Gronwall-Bellman envelope g(t) + int e_p(t, sigma(s)) g(s) p(s) Delta-s.

    Requires p >= 0 along [t0, t] (NegativeGain otherwise).  On [t0, t] it
    equals the solution of the integral equation x = g + int x p, hence it
    dominates every function satisfying the inequality form.
    """
    quad = quad or DEFAULT_QUADRATURE
    g = ScalarCoefficient.coerce(g)
    p = ScalarCoefficient.coerce(p)
    acc = _CylinderAccumulation(ts, p, t0, t, quad)
    for rec in acc.jumps:
        if p(rec.t).real < -1e-12:
            raise NegativeGain(f"gain p({rec.t}) < 0")
    for run in acc.dense:
        vals = p.eval_array(run.edges)
        if np.any(vals.real < -1e-12):
            raise NegativeGain("gain sampled negative on a dense run")
    total = acc.total.real
    value = g(t).real
    value += _weighted_integral(acc, total,
                                lambda s: g(s).real * p(s).real)
    return value


def _weighted_integral(acc: _CylinderAccumulation, total: float, weight) -> float:
    """int exp(I(t) - I(sigma(s))) * weight(s) Delta-s over the walked range."""
    out = 0.0
    for rec in acc.jumps:
        out += rec.mu * math.exp(total - rec.I_after.real) * weight(rec.t)
    for run in acc.dense:
        we = np.asarray([weight(s) for s in run.edges])
        wm = np.asarray([weight(s) for s in run.mids])
        ee = np.exp(total - run.I_edges.real) * we
        em = np.exp(total - run.I_mids.real) * wm
        h = run.edges[1] - run.edges[0]
        out += float(np.sum((ee[:-1] + 4.0 * em + ee[1:]) * (h / 6.0)))
    return out
