"""Linear systems on time scales.

Fundamental matrices with overflow-safe log-scaled storage, trajectory
simulation, Lyapunov and central upper exponent estimators (finite-horizon
tail-window surrogates for the limsup definitions), empirical boundedness
probes, spectral strong-stability/instability tests, and quadratic
Lyapunov/Chetaev certificate construction and checking.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .calculus import ScalarCoefficient, _CylinderAccumulation, cylinder
from .errors import (
    EigdecompositionFailed,
    EmpiricalProfileWarning,
    HorizonTooShort,
    ModeConditionFails,
    NonRegressiveJump,
    NotDiagonalizable,
)
from .timescale import (
    DEFAULT_QUADRATURE,
    GrainProfile,
    QuadratureConfig,
    TimeScale,
)

__all__ = [
    "IntegratorConfig",
    "CoefficientMap",
    "Transition",
    "Trajectory",
    "ExponentEstimate",
    "MatrixRegressivity",
    "MatrixRegressivityReport",
    "check_regressive_matrix",
    "fundamental_matrix",
    "ode_transition",
    "simulate",
    "lyapunov_exponents_constant",
    "lyapunov_exponent_trajectory",
    "central_upper_exponent",
    "StabilityProbeReport",
    "classify_stability_empirical",
    "StrongStabilityReport",
    "StrongInstabilityReport",
    "is_strongly_stable",
    "is_strongly_unstable",
    "QuadraticForm",
    "SampleSpec",
    "delta_derivative_of_form",
    "CertificateCheckReport",
    "check_strict_lyapunov",
    "check_chetaev",
    "Certificate",
    "build_quadratic_certificate",
    "UpperFunctionReport",
    "upper_function_check",
    "operator_norm",
    "guarded_eig",
]


def operator_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


def guarded_eig(M: np.ndarray, guard: float = 1e8, exc=EigdecompositionFailed):
    """Eigendecomposition with a conditioning guard on the eigenvector basis.

    Raises ``exc`` when the basis is ill-conditioned beyond ``guard`` --
    defective or near-defective matrices are rejected rather than silently
    mis-handled.
    """
    w, V = np.linalg.eig(np.asarray(M, dtype=complex))
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > guard:
        raise exc(f"eigenvector basis condition {cond:.3g} exceeds guard {guard:.3g}")
    return w, V


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control for dense-interval integration and overflow management."""

    max_step: float = 1e-2
    substep_divisor: float = 100.0
    expm_chunk: float = 30.0          # max |A|*length handled by a single expm
    blowup_threshold: float = 1e12
    unbounded_factor: float = 1e6
    record_stride: int = 1
    gap_step_divisor: float = 400.0   # ODE steps per gap crossing in projections
    tail_fraction: float = 0.5
    eig_guard: float = 1e8
    jump_tol: float = 1e-12

    def dense_step(self, length: float) -> float:
        return max(min(self.max_step, length / self.substep_divisor), 1e-12)


DEFAULT_INTEGRATOR = IntegratorConfig()


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

class CoefficientMap:
    """Matrix coefficient A(t): constant, piecewise-constant, or a callback.

    ``segments(a, b)`` decomposes [a, b] into runs where the coefficient is
    known constant (closed-form matrix exponentials apply) or unknown
    (one-step integration applies).
    """

    CONSTANT = "constant"
    PIECEWISE = "piecewise"
    CALLBACK = "callback"

    def __init__(self, kind, dimension, matrix=None, breaks=None, fn=None,
                 sup_norm_hint=None):
        self.kind = kind
        self.dimension = int(dimension)
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=complex)
        if breaks is not None:
            pts = sorted(breaks, key=lambda kv: kv[0])
            self._break_ts = np.asarray([float(t) for t, _ in pts])
            self._break_ms = [np.asarray(m, dtype=complex) for _, m in pts]
        else:
            self._break_ts, self._break_ms = None, None
        self._fn = fn
        self._sup_hint = sup_norm_hint

    @classmethod
    def constant(cls, M) -> "CoefficientMap":
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        if M.shape[0] != M.shape[1]:
            raise ValueError("coefficient matrix must be square")
        return cls(cls.CONSTANT, M.shape[0], matrix=M)

    @classmethod
    def piecewise(cls, breaks) -> "CoefficientMap":
        """breaks: [(t_i, matrix_i)]; A(t) = matrix of the last t_i <= t."""
        if not breaks:
            raise ValueError("piecewise coefficient needs at least one break")
        M0 = np.atleast_2d(np.asarray(breaks[0][1], dtype=complex))
        return cls(cls.PIECEWISE, M0.shape[0],
                   breaks=[(t, np.atleast_2d(np.asarray(m, dtype=complex)))
                           for t, m in breaks])

    @classmethod
    def from_callable(cls, fn, dimension, sup_norm_hint=None) -> "CoefficientMap":
        return cls(cls.CALLBACK, dimension, fn=fn, sup_norm_hint=sup_norm_hint)

    @classmethod
    def coerce(cls, obj) -> "CoefficientMap":
        if isinstance(obj, cls):
            return obj
        if isinstance(obj, (np.ndarray, list, tuple, int, float, complex)):
            return cls.constant(np.atleast_2d(np.asarray(obj, dtype=complex)))
        raise TypeError(f"cannot coerce {type(obj).__name__} to CoefficientMap")

    @property
    def is_constant(self) -> bool:
        return self.kind == self.CONSTANT

    @property
    def constant_value(self) -> np.ndarray:
        if not self.is_constant:
            raise ValueError("not a constant coefficient")
        return self._matrix

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == self.CONSTANT:
            return self._matrix
        if self.kind == self.PIECEWISE:
            i = int(np.searchsorted(self._break_ts, t, side="right")) - 1
            return self._break_ms[max(i, 0)]
        return np.atleast_2d(np.asarray(self._fn(t), dtype=complex))

    def segments(self, a: float, b: float):
        """Runs (t0, t1, matrix-or-None) covering [a, b]."""
        if self.kind == self.CONSTANT:
            return [(a, b, self._matrix)]
        if self.kind == self.CALLBACK:
            return [(a, b, None)]
        cuts = [t for t in self._break_ts if a < t < b]
        edges = [a] + cuts + [b]
        return [(t0, t1, self(t0)) for t0, t1 in zip(edges, edges[1:]) if t1 > t0]

    def sup_norm(self, horizon: float | None = None, n_samples: int = 256) -> float:
        """Sup of the operator norm; sampled (empirical) for callbacks."""
        if self._sup_hint is not None:
            return float(self._sup_hint)
        if self.kind == self.CONSTANT:
            return operator_norm(self._matrix)
        if self.kind == self.PIECEWISE:
            if horizon is None:
                return max(operator_norm(m) for m in self._break_ms)
            idx = np.searchsorted(self._break_ts, horizon, side="right")
            return max(operator_norm(m) for m in self._break_ms[:max(idx, 1)])
        if horizon is None:
            raise ValueError("callback coefficient needs a horizon to sample")
        ts = np.linspace(0.0, horizon, n_samples)
        return max(operator_norm(self(t)) for t in ts)

    def __add__(self, other):
        other = CoefficientMap.coerce(other)
        if self.dimension != other.dimension:
            raise ValueError("dimension mismatch")
        if self.is_constant and other.is_constant:
            return CoefficientMap.constant(self._matrix + other._matrix)
        return CoefficientMap.from_callable(
            lambda t, a=self, b=other: a(t) + b(t), self.dimension)


def perron_switched_coefficient(horizon: float) -> CoefficientMap:
    """Switched diagonal system: diag(+1,-1) and diag(-1,+1) alternating on
    epochs [k^2, (k+1)^2).  Each coordinate's time-average rate drifts to 0
    while the per-epoch top growth rate stays 1."""
    up_first = np.diag([1.0, -1.0]).astype(complex)
    down_first = np.diag([-1.0, 1.0]).astype(complex)
    breaks = []
    k = 0
    while k * k <= horizon * 1.5 + 4:
        breaks.append((float(k * k), up_first if k % 2 == 0 else down_first))
        k += 1
    return CoefficientMap.piecewise(breaks)


# ---------------------------------------------------------------------------
# transitions
# ---------------------------------------------------------------------------

class Transition:
    """Fundamental-matrix value stored as exp(logscale) * unit.

    ``unit`` is renormalized into [1e-2, 1e2] so products over long horizons
    neither overflow nor underflow; ``log_norm`` is always finite arithmetic.
    """

    __slots__ = ("unit", "logscale")

    def __init__(self, unit: np.ndarray, logscale: float = 0.0):
        self.unit = np.asarray(unit, dtype=complex)
        self.logscale = float(logscale)

    @classmethod
    def identity(cls, n: int) -> "Transition":
        return cls(np.eye(n, dtype=complex), 0.0)

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> "Transition":
        t = cls(np.asarray(M, dtype=complex), 0.0)
        t._renormalize()
        return t

    def _renormalize(self):
        nrm = operator_norm(self.unit)
        if nrm == 0.0:
            raise NonRegressiveJump(None, "transition collapsed to zero")
        if nrm < 1e-2 or nrm > 1e2:
            self.unit = self.unit / nrm
            self.logscale += math.log(nrm)

    def left_multiplied(self, M: np.ndarray, logfactor: float = 0.0) -> "Transition":
        out = Transition(M @ self.unit, self.logscale + logfactor)
        out._renormalize()
        return out

    def compose(self, other: "Transition") -> "Transition":
        """self after other (matrix product self @ other)."""
        out = Transition(self.unit @ other.unit, self.logscale + other.logscale)
        out._renormalize()
        return out

    def inverse(self) -> "Transition":
        out = Transition(np.linalg.inv(self.unit), -self.logscale)
        out._renormalize()
        return out

    def log_norm(self) -> float:
        return self.logscale + math.log(operator_norm(self.unit))

    def norm(self) -> float:
        return math.exp(self.log_norm())

    def matrix(self) -> np.ndarray:
        return math.exp(self.logscale) * self.unit

    def apply_unit(self, u: np.ndarray, logmag: float):
        """Apply to a log-scaled vector, returning (unit_vector, logmag)."""
        v = self.unit @ u
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return v, -math.inf
        return v / nv, logmag + self.logscale + math.log(nv)


# ---------------------------------------------------------------------------
# propagators
# ---------------------------------------------------------------------------

def _expm_factor_chunked(M: np.ndarray, length: float, cfg: IntegratorConfig,
                         trans: Transition) -> Transition:
    """Multiply trans by exp(M*length), chunked to keep expm well-scaled."""
    load = operator_norm(M) * length
    k = max(1, int(math.ceil(load / cfg.expm_chunk)))
    F = expm(M * (length / k))
    for _ in range(k):
        trans = trans.left_multiplied(F)
    return trans


def _rk4_matrix(fn, trans: Transition, a: float, b: float,
                cfg: IntegratorConfig) -> Transition:
    """Classical one-step 4th-order integration of U' = A(t) U."""
    length = b - a
    h = cfg.dense_step(length)
    n_steps = max(1, int(math.ceil(length / h)))
    h = length / n_steps
    U = trans.unit.copy()
    ls = trans.logscale
    t = a
    for i in range(n_steps):
        k1 = fn(t) @ U
        k2 = fn(t + h / 2) @ (U + (h / 2) * k1)
        k3 = fn(t + h / 2) @ (U + (h / 2) * k2)
        k4 = fn(t + h) @ (U + h * k3)
        U = U + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = a + (i + 1) * h
        if i % 32 == 31:
            nrm = operator_norm(U)
            if nrm > 1e2 or nrm < 1e-2:
                U /= nrm
                ls += math.log(nrm)
    out = Transition(U, ls)
    out._renormalize()
    return out


def ode_transition(coeff, s: float, t: float,
                   cfg: IntegratorConfig | None = None) -> Transition:
    """Transition matrix of the plain ODE x' = coeff(t) x over [s, t].

    ``coeff`` must be callable and provide ``segments(s, t)``; constant runs
    use the matrix exponential, others use fixed-step RK4.
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    if t < s:
        raise ValueError("need t >= s")
    n = coeff.dimension
    trans = Transition.identity(n)
    for a, b, M in coeff.segments(s, t):
        if b <= a:
            continue
        if M is not None:
            trans = _expm_factor_chunked(M, b - a, cfg, trans)
        else:
            trans = _rk4_matrix(coeff, trans, a, b, cfg)
    return trans


def _jump_factor(A, t: float, mu: float, cfg: IntegratorConfig) -> np.ndarray:
    n = A.dimension
    F = np.eye(n, dtype=complex) + mu * A(t)
    sv = np.linalg.svd(F, compute_uv=False)
    if sv[-1] < cfg.jump_tol * max(sv[0], 1.0):
        raise NonRegressiveJump(t)
    return F


def fundamental_matrix(ts: TimeScale, A, t: float, s: float,
                       cfg: IntegratorConfig | None = None) -> Transition:
    """Fundamental matrix Phi_A(t, s) of x^Delta = A(t) x for scale points s <= t.

    Right-scattered points contribute the exact jump factor E + mu*A; dense
    runs use the matrix exponential when the coefficient is constant there and
    fixed-step RK4 otherwise.
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    A = CoefficientMap.coerce(A)
    if t < s:
        raise ValueError("need t >= s")
    trans = Transition.identity(A.dimension)
    for kind, t0, t1 in ts.events(s, t):
        if kind == "jump":
            trans = trans.left_multiplied(_jump_factor(A, t0, t1, cfg))
        else:
            for a, b, M in A.segments(t0, t1):
                if b <= a:
                    continue
                if M is not None:
                    trans = _expm_factor_chunked(M, b - a, cfg, trans)
                else:
                    trans = _rk4_matrix(A, trans, a, b, cfg)
    return trans


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled solution (times, states); ``blowup`` records an escape time
    past the overflow guard instead of crashing."""

    times: np.ndarray
    states: np.ndarray
    blowup: float | None = None

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def simulate(ts: TimeScale, rhs, x0, t0: float, horizon: float,
             cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate x^Delta = rhs(t, x) from t0 up to floor_scale(horizon).

    Scattered points advance by x(sigma) = x + mu*rhs(t, x); dense runs use
    classical RK4 with the configured step, recording at sub-steps.
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    x = np.asarray(x0, dtype=complex).ravel()
    end = ts.floor_scale(horizon)
    times = [float(t0)]
    states = [x.copy()]
    blowup = None

    def record(t, v):
        times.append(float(t))
        states.append(v.copy())

    guard = cfg.blowup_threshold
    for kind, a, b in ts.events(t0, end):
        if blowup is not None:
            break
        if kind == "jump":
            x = x + b * np.asarray(rhs(a, x), dtype=complex)
            record(a + b, x)
            if np.linalg.norm(x) > guard:
                blowup = a + b
        else:
            length = b - a
            h = cfg.dense_step(length)
            n_steps = max(1, int(math.ceil(length / h)))
            h = length / n_steps
            t = a
            for i in range(n_steps):
                k1 = np.asarray(rhs(t, x), dtype=complex)
                k2 = np.asarray(rhs(t + h / 2, x + (h / 2) * k1), dtype=complex)
                k3 = np.asarray(rhs(t + h / 2, x + (h / 2) * k2), dtype=complex)
                k4 = np.asarray(rhs(t + h, x + h * k3), dtype=complex)
                x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
                t = a + (i + 1) * h
                if i % cfg.record_stride == 0 or i == n_steps - 1:
                    record(t, x)
                if np.linalg.norm(x) > guard:
                    blowup = t
                    break
    return Trajectory(np.asarray(times), np.asarray(states), blowup)


# ---------------------------------------------------------------------------
# exponent estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentEstimate:
    """Finite-horizon exponent estimate.

    ``value`` is the maximum of the running averages over the trailing
    ``tail_fraction`` of the time range -- an honest surrogate for a limsup,
    reported together with the full window series so convergence can be
    inspected.
    """

    value: float
    windows: np.ndarray          # rows (t, running_average)
    horizon: float
    method: str
    tail_fraction: float = 0.5

    @classmethod
    def from_windows(cls, windows, horizon, method,
                     tail_fraction=0.5) -> "ExponentEstimate":
        w = np.asarray(windows, dtype=float)
        if w.size == 0:
            raise ValueError("no exponent windows accumulated")
        t0, t1 = w[0, 0], w[-1, 0]
        cut = t0 + (1.0 - tail_fraction) * (t1 - t0)
        tail = w[w[:, 0] >= cut - 1e-12]
        return cls(float(np.max(tail[:, 1])), w, float(horizon), method,
                   tail_fraction)


def _eig_rate_windows(ts: TimeScale, lam: complex, horizon: float):
    """Running averages of Re xi_mu(lam) along the scale, closed-form.

    Jumps contribute log|1 + mu*lam| exactly and dense runs Re(lam)*length,
    so no quadrature error enters for constant coefficients.
    """
    t0 = ts.min_time
    end = ts.floor_scale(horizon)
    acc = 0.0
    windows = []
    for kind, a, b in ts.events(t0, end):
        if kind == "jump":
            w = abs(1.0 + b * lam)
            if w < 1e-300:
                raise NonRegressiveJump(a, f"1 + mu*lambda = 0 at t={a}")
            acc += math.log(w)
            t = a + b
        else:
            acc += lam.real * (b - a)
            t = b
        if t > t0:
            windows.append((t, acc / (t - t0)))
    return windows


def lyapunov_exponents_constant(ts: TimeScale, A, horizon: float,
                                quad: QuadratureConfig | None = None,
                                cfg: IntegratorConfig | None = None):
    """Per-eigenvalue Lyapunov exponent estimates for a constant coefficient.

    Each eigenvalue lambda_k yields the running average of Re xi_mu(lambda_k)
    accumulated exactly component by component (the integrand is constant on
    every regime, so the quadrature config plays no role here).
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    A = CoefficientMap.coerce(A)
    if not A.is_constant:
        raise ValueError("spectral exponents require a constant coefficient")
    w, _ = guarded_eig(A.constant_value, cfg.eig_guard, EigdecompositionFailed)
    out = []
    for lam in w:
        windows = _eig_rate_windows(ts, complex(lam), horizon)
        out.append(ExponentEstimate.from_windows(
            windows, horizon, "spectral", cfg.tail_fraction))
    return out


def _propagate_vector(ts: TimeScale, A, x0, horizon: float,
                      cfg: IntegratorConfig, t0: float | None = None):
    """Log-scaled linear propagation; returns (times, units, logmags)."""
    A = CoefficientMap.coerce(A)
    t0 = ts.min_time if t0 is None else t0
    end = ts.floor_scale(horizon)
    u = np.asarray(x0, dtype=complex).ravel()
    nrm = float(np.linalg.norm(u))
    if nrm == 0:
        raise ValueError("x0 must be nonzero")
    u = u / nrm
    logmag = math.log(nrm)
    times = [t0]
    units = [u.copy()]
    logs = [logmag]
    for kind, a, b in ts.events(t0, end):
        if kind == "jump":
            F = _jump_factor(A, a, b, cfg)
            v = F @ u
            nv = float(np.linalg.norm(v))
            if nv == 0.0:
                logmag = -math.inf
                u = v
            else:
                u, logmag = v / nv, logmag + math.log(nv)
            times.append(a + b)
            units.append(u.copy())
            logs.append(logmag)
        else:
            for sa, sb, M in A.segments(a, b):
                if sb <= sa:
                    continue
                if M is not None:
                    load = operator_norm(M) * (sb - sa)
                    k = max(1, int(math.ceil(load / cfg.expm_chunk)))
                    F = expm(M * ((sb - sa) / k))
                    for i in range(k):
                        v = F @ u
                        nv = float(np.linalg.norm(v))
                        u, logmag = v / nv, logmag + math.log(nv)
                        times.append(sa + (i + 1) * (sb - sa) / k)
                        units.append(u.copy())
                        logs.append(logmag)
                else:
                    tr = _rk4_matrix(A, Transition.identity(A.dimension), sa, sb, cfg)
                    u, logmag = tr.apply_unit(u, logmag)
                    times.append(sb)
                    units.append(u.copy())
                    logs.append(logmag)
    return np.asarray(times), np.asarray(units), np.asarray(logs)


def lyapunov_exponent_trajectory(ts: TimeScale, A, x0, horizon: float,
                                 cfg: IntegratorConfig | None = None) -> ExponentEstimate:
    """Finite-horizon (1/t) log|x(t)| exponent of one linear trajectory."""
    cfg = cfg or DEFAULT_INTEGRATOR
    times, _, logs = _propagate_vector(ts, A, x0, horizon, cfg)
    t0 = times[0]
    mask = times > t0 + 1e-9
    rel = logs[mask] - logs[0]
    windows = np.column_stack((times[mask], rel / (times[mask] - t0)))
    return ExponentEstimate.from_windows(windows, horizon, "trajectory",
                                         cfg.tail_fraction)


def central_upper_exponent(ts: TimeScale, A, T: float, horizon: float,
                           cfg: IntegratorConfig | None = None) -> ExponentEstimate:
    """Block-norm running average (1/kT) sum log|Phi(b_{i+1}, b_i)|.

    Block boundaries are iT snapped to floor_scale(iT) so every transition is
    between genuine scale points; for syndetic scales the snap moves each
    boundary by at most one gap.  Callers sweep T and read the trend.
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    if T <= 0:
        raise ValueError("block length T must be positive")
    k_max = int(math.floor(horizon / T))
    if k_max < 2:
        raise HorizonTooShort(f"horizon {horizon} fits fewer than 2 blocks of {T}")
    bounds = [ts.floor_scale(i * T) for i in range(k_max + 1)]
    acc = 0.0
    windows = []
    for i in range(k_max):
        if bounds[i + 1] > bounds[i]:
            tr = fundamental_matrix(ts, A, bounds[i + 1], bounds[i], cfg)
            acc += tr.log_norm()
        windows.append(((i + 1) * T, acc / ((i + 1) * T)))
    return ExponentEstimate.from_windows(windows, horizon, "central-A1",
                                         cfg.tail_fraction)


# ---------------------------------------------------------------------------
# regressivity and empirical stability
# ---------------------------------------------------------------------------

class MatrixRegressivity(Enum):
    UNIFORMLY_REGRESSIVE = "uniformly-regressive"
    REGRESSIVE = "regressive"
    FAILS = "fails"


@dataclass(frozen=True)
class MatrixRegressivityReport:
    kind: MatrixRegressivity
    bound: float = math.inf        # sup |(E + mu A)^-1| over the checked set
    fail_time: float | None = None
    min_modulus: float = math.inf  # inf |1 + mu*lambda_k| for constant A
    exact: bool = False


def check_regressive_matrix(ts: TimeScale, A, horizon: float,
                            tol: float = 1e-9,
                            uniform_bound: float = 1e6) -> MatrixRegressivityReport:
    """Invertibility of E + mu*A over scattered points up to ``horizon``.

    For constant A the eigenvalue criterion inf |1 + mu*lambda| > 0 is
    evaluated on the attained gap set (exact when the profile is exact);
    otherwise the jump factors are sampled along the walk.
    """
    A = CoefficientMap.coerce(A)
    profile = ts.grain_profile(horizon)
    if A.is_constant:
        lams = np.linalg.eigvals(A.constant_value)
        min_mod = math.inf
        worst_mu = None
        for mu in profile.attained_gaps:
            for lam in lams:
                m = abs(1.0 + mu * lam)
                if m < min_mod:
                    min_mod, worst_mu = m, mu
        if min_mod <= tol:
            return MatrixRegressivityReport(MatrixRegressivity.FAILS,
                                            fail_time=worst_mu,
                                            min_modulus=min_mod,
                                            exact=profile.exact)
        bound = 1.0
        for mu in profile.attained_gaps:
            F = np.eye(A.dimension, dtype=complex) + mu * A.constant_value
            bound = max(bound, operator_norm(np.linalg.inv(F)))
        kind = (MatrixRegressivity.UNIFORMLY_REGRESSIVE if bound <= uniform_bound
                else MatrixRegressivity.REGRESSIVE)
        return MatrixRegressivityReport(kind, bound, None, min_mod, profile.exact)
    hi = ts.floor_scale(horizon)
    bound = 1.0
    for t, mu in ts.scattered_points(ts.min_time, hi):
        F = np.eye(A.dimension, dtype=complex) + mu * A(t)
        sv = np.linalg.svd(F, compute_uv=False)
        if sv[-1] < tol:
            return MatrixRegressivityReport(MatrixRegressivity.FAILS, fail_time=t,
                                            min_modulus=float(sv[-1]))
        bound = max(bound, 1.0 / float(sv[-1]))
    kind = (MatrixRegressivity.UNIFORMLY_REGRESSIVE if bound <= uniform_bound
            else MatrixRegressivity.REGRESSIVE)
    return MatrixRegressivityReport(kind, bound)


@dataclass(frozen=True)
class StabilityProbeReport:
    bounded: bool
    unbounded_at: float | None
    gamma: float | None            # uniform bound over probes when bounded
    sup_table: dict                # t0 -> sup log |Phi(t, t0)|
    threshold: float


def classify_stability_empirical(ts: TimeScale, A, horizon: float,
                                 t0_grid: Sequence[float] | None = None,
                                 cfg: IntegratorConfig | None = None) -> StabilityProbeReport:
    """Probe sup_t |Phi(t, t0)| over a grid of start times.

    An empirical verdict: 'bounded' means no probe exceeded the configured
    factor within the horizon, which witnesses (but does not prove)
    uniform stability.
    """
    cfg = cfg or DEFAULT_INTEGRATOR
    A = CoefficientMap.coerce(A)
    if t0_grid is None:
        t0_grid = [ts.min_time]
    end = ts.floor_scale(horizon)
    log_cap = math.log(cfg.unbounded_factor)
    table = {}
    unbounded_at = None
    for t0 in t0_grid:
        start = ts.floor_scale(t0)
        trans = Transition.identity(A.dimension)
        sup_log = 0.0
        for kind, a, b in ts.events(start, end):
            if kind == "jump":
                trans = trans.left_multiplied(_jump_factor(A, a, b, cfg))
                sup_log = max(sup_log, trans.log_norm())
            else:
                for sa, sb, M in A.segments(a, b):
                    if sb <= sa:
                        continue
                    if M is not None:
                        load = operator_norm(M) * (sb - sa)
                        k = max(1, int(math.ceil(load / cfg.expm_chunk)))
                        F = expm(M * ((sb - sa) / k))
                        for _ in range(k):
                            trans = trans.left_multiplied(F)
                            sup_log = max(sup_log, trans.log_norm())
                    else:
                        steps = np.linspace(sa, sb, max(2, int((sb - sa) / 1.0) + 2))
                        for lo, hi2 in zip(steps, steps[1:]):
                            trans = _rk4_matrix(A, trans, lo, hi2, cfg)
                            sup_log = max(sup_log, trans.log_norm())
            if sup_log > log_cap and unbounded_at is None:
                unbounded_at = t0
        table[float(t0)] = sup_log
    bounded = unbounded_at is None
    gamma = math.exp(max(table.values())) if bounded else None
    return StabilityProbeReport(bounded, unbounded_at, gamma, table,
                                cfg.unbounded_factor)


# ---------------------------------------------------------------------------
# strong stability / instability (spectral, gap-profile based)
# ---------------------------------------------------------------------------

def _jump_rate(lam: complex, mu: float) -> float:
    """Quadratic-form growth rate across a gap: (|1 + mu*lam|^2 - 1)/mu."""
    return (abs(1.0 + mu * lam) ** 2 - 1.0) / mu


@dataclass(frozen=True)
class StrongStabilityReport:
    stable: bool
    margin: float                  # min over conditions of -rate (>0 iff stable)
    witnesses: tuple               # (lambda, mu-or-'dense', rate)
    empirical: bool


@dataclass(frozen=True)
class StrongInstabilityReport:
    unstable: bool
    group1: tuple                  # indices into the eigenvalue array
    group2: tuple
    eigenvalues: tuple
    margin: float                  # guaranteed Chetaev growth coefficient
    empirical: bool


def _profile_guard(profile: GrainProfile):
    if not profile.attained_gaps and not profile.has_dense_tail:
        raise ValueError("profile carries neither gaps nor a dense tail")
    if not profile.exact:
        warnings.warn(EmpiricalProfileWarning(
            "gap profile is a finite-horizon sample; verdict is empirical"))


def _stable_margin(lams, profile: GrainProfile):
    witnesses = []
    margin = math.inf
    for lam in lams:
        for mu in profile.attained_gaps:
            r = _jump_rate(lam, mu)
            witnesses.append((complex(lam), float(mu), r))
            margin = min(margin, -r)
        if profile.has_dense_tail:
            r = 2.0 * lam.real
            witnesses.append((complex(lam), "dense", r))
            margin = min(margin, -r)
    return margin, tuple(witnesses)


def is_strongly_stable(A, profile: GrainProfile) -> StrongStabilityReport:
    """Eigenvalue contraction across every recurring gap (and Re < 0 when the
    scale keeps a dense tail).  Guarantees a strict quadratic Lyapunov
    function for the diagonalized system."""
    A = CoefficientMap.coerce(A)
    _profile_guard(profile)
    lams = np.linalg.eigvals(A.constant_value)
    margin, witnesses = _stable_margin(lams, profile)
    return StrongStabilityReport(margin > 0, margin, witnesses,
                                 empirical=not profile.exact)


def _unstable_split_margin(lams, group1, group2, profile: GrainProfile):
    """Chetaev growth coefficient for a candidate split; -inf if inadmissible."""
    r1_min = math.inf
    r2_max = -math.inf
    for mu in profile.attained_gaps:
        for i in group1:
            r1_min = min(r1_min, _jump_rate(lams[i], mu))
        for j in group2:
            r2_max = max(r2_max, _jump_rate(lams[j], mu))
    d1_min = math.inf
    d2_max = -math.inf
    if profile.has_dense_tail:
        for i in group1:
            d1_min = min(d1_min, 2.0 * lams[i].real)
        for j in group2:
            d2_max = max(d2_max, 2.0 * lams[j].real)
    kappas = []
    if profile.attained_gaps:
        if r1_min <= 0 or (group2 and r1_min <= r2_max):
            return -math.inf
        kappas.append((r1_min - max(r2_max, 0.0)) / 2.0)
    if profile.has_dense_tail:
        if d1_min <= 0 or (group2 and d1_min <= d2_max):
            return -math.inf
        kappas.append((d1_min - max(d2_max, 0.0)) / 2.0)
    return min(kappas)


def is_strongly_unstable(A, profile: GrainProfile) -> StrongInstabilityReport:
    """Search eigenvalue splits for the jump-expansion conditions.

    Candidates are tried as prefixes of the eigenvalues ordered by decreasing
    |1 + mu_bar*lambda| (mu_bar = largest recurring gap; by Re lambda on
    gap-free scales), falling back to full subset enumeration.  The first
    admissible split is returned.
    """
    A = CoefficientMap.coerce(A)
    _profile_guard(profile)
    lams = np.linalg.eigvals(A.constant_value)
    n = len(lams)
    if profile.attained_gaps:
        mubar = max(profile.attained_gaps)
        order = sorted(range(n), key=lambda i: -abs(1.0 + mubar * lams[i]))
    else:
        order = sorted(range(n), key=lambda i: -lams[i].real)
    tried = set()
    candidates = []
    for ell in range(1, n + 1):
        g1 = tuple(sorted(order[:ell]))
        candidates.append(g1)
        tried.add(g1)
    for ell in range(1, n + 1):
        for combo in itertools.combinations(range(n), ell):
            if combo not in tried:
                candidates.append(combo)
    for g1 in candidates:
        g2 = tuple(i for i in range(n) if i not in g1)
        kappa = _unstable_split_margin(lams, g1, g2, profile)
        if kappa > 0:
            return StrongInstabilityReport(True, g1, g2,
                                           tuple(complex(l) for l in lams),
                                           kappa, empirical=not profile.exact)
    return StrongInstabilityReport(False, (), tuple(range(n)),
                                   tuple(complex(l) for l in lams),
                                   -math.inf, empirical=not profile.exact)


# ---------------------------------------------------------------------------
# quadratic forms and certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticForm:
    """V(x) = x* B x with Hermitian B; ``split`` marks the (l, n-l) block
    signature of an indefinite Chetaev form."""

    matrix: np.ndarray
    split: tuple | None = None

    def __post_init__(self):
        B = np.asarray(self.matrix, dtype=complex)
        if operator_norm(B - B.conj().T) > 1e-12 * max(1.0, operator_norm(B)):
            raise ValueError("form matrix must be Hermitian")
        object.__setattr__(self, "matrix", B)
        if self.split is not None:
            if sum(self.split) != B.shape[0] or self.split[0] < 1:
                raise ValueError("split must be (l, n-l) with l >= 1")

    def value(self, x) -> float:
        x = np.asarray(x, dtype=complex).ravel()
        return float(np.real(np.vdot(x, self.matrix @ x)))


def delta_derivative_of_form(ts: TimeScale, V: QuadraticForm, F, t: float,
                             x) -> float:
    """Trajectory Delta-derivative of a time-independent quadratic form.

    Dense points: 2 Re(x* B F(t,x)); scattered: difference quotient
    [V(x + mu F(t,x)) - V(x)]/mu.
    """
    x = np.asarray(x, dtype=complex).ravel()
    mu = ts.mu(t)
    fx = np.asarray(F(t, x), dtype=complex).ravel()
    if mu > 0:
        return (V.value(x + mu * fx) - V.value(x)) / mu
    return float(2.0 * np.real(np.vdot(x, V.matrix @ fx)))


@dataclass(frozen=True)
class SampleSpec:
    """Deterministic seeded sampling grid for certificate checks:
    logarithmic shells of radii [radius*r_min_factor, radius] times a fixed
    set of directions, evaluated at scale points up to the horizon."""

    horizon: float
    radius: float
    t_start: float = 0.0
    r_min_factor: float = 1e-3
    n_radii: int = 6
    n_directions: int = 16
    n_times: int = 32
    seed: int = 0
    margin: float = 1e-6           # required decay/growth coefficient c
    margin_pd: float = 0.5         # required positive-definiteness coefficient


def _sample_times(ts: TimeScale, spec: SampleSpec):
    lo = max(spec.t_start, ts.min_time)
    hi = ts.floor_scale(spec.horizon)
    scattered = [t for t, _ in ts.scattered_points(ts.floor_scale(lo), hi)]
    if len(scattered) > spec.n_times:
        idx = np.linspace(0, len(scattered) - 1, spec.n_times).astype(int)
        scattered = [scattered[i] for i in idx]
    dense = []
    for kind, a, b in ts.events(ts.floor_scale(lo), hi):
        if kind == "dense":
            dense.extend(np.linspace(a, b, 4)[1:-1])
        if len(dense) >= spec.n_times:
            break
    return list(scattered) + [float(t) for t in dense[:spec.n_times]]


def _sample_points(n: int, spec: SampleSpec):
    rng = np.random.default_rng(spec.seed)
    dirs = [np.eye(n, dtype=complex)[k] for k in range(n)]
    n_extra = max(spec.n_directions * max(1, n * (n - 1) // 2), spec.n_directions)
    for _ in range(n_extra):
        v = rng.standard_normal(n) + (1j * rng.standard_normal(n)
                                      if rng.random() < 0.5 else 0.0)
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            dirs.append(np.asarray(v, dtype=complex) / nv)
    radii = np.geomspace(spec.radius * spec.r_min_factor, spec.radius,
                         spec.n_radii)
    return [r * d for r in radii for d in dirs], radii


@dataclass
class CertificateCheckReport:
    passed: bool
    n_samples: int
    violations: list
    worst_decay: float             # min over samples of -(V^Delta)/|x|^2 (stable)
    margin: float
    boundary_witness: bool = True  # Chetaev: V > 0 points found at smallest shell


def check_strict_lyapunov(ts: TimeScale, V: QuadraticForm, F,
                          spec: SampleSpec) -> CertificateCheckReport:
    """Sampled verification of the strict-Lyapunov conditions.

    Requires V(x) >= margin_pd*|x|^2 and V^Delta(t,x) <= -margin*|x|^2 on the
    sampled shells and times; failures are returned, not raised.
    """
    times = _sample_times(ts, spec)
    points, _ = _sample_points(V.matrix.shape[0], spec)
    violations = []
    worst = math.inf
    count = 0
    for x in points:
        nx2 = float(np.real(np.vdot(x, x)))
        if V.value(x) < spec.margin_pd * nx2 - 1e-12:
            violations.append(("positivity", None, x, V.value(x)))
        for t in times:
            dv = delta_derivative_of_form(ts, V, F, t, x)
            count += 1
            worst = min(worst, -dv / nx2)
            if dv > -spec.margin * nx2 + 1e-12:
                if len(violations) < 20:
                    violations.append(("decay", t, x, dv))
    return CertificateCheckReport(not violations, count, violations, worst,
                                  spec.margin)


def check_chetaev(ts: TimeScale, V: QuadraticForm, F,
                  spec: SampleSpec) -> CertificateCheckReport:
    """Sampled verification of the Chetaev conditions on the cone {V > 0}.

    The form must carry a declared signature split.  Checks that points with
    V > 0 exist at the smallest sampled shell (witnessing 0 on the boundary
    of the cone) and that V^Delta >= margin*|x|^2 throughout the sampled cone.
    """
    if V.split is None:
        raise ValueError("Chetaev check requires a form with a declared split")
    times = _sample_times(ts, spec)
    points, radii = _sample_points(V.matrix.shape[0], spec)
    violations = []
    worst = math.inf
    count = 0
    smallest_witness = False
    r_min = radii[0]
    for x in points:
        vx = V.value(x)
        if vx <= 0:
            continue
        nx = float(np.linalg.norm(x))
        nx2 = nx * nx
        if abs(nx - r_min) < 1e-12 * max(1.0, r_min):
            smallest_witness = True
        for t in times:
            dv = delta_derivative_of_form(ts, V, F, t, x)
            count += 1
            worst = min(worst, dv / nx2)
            if dv < spec.margin * nx2 - 1e-12:
                if len(violations) < 20:
                    violations.append(("growth", t, x, dv))
    if not smallest_witness:
        violations.append(("boundary", None, None,
                           "no V > 0 point at the smallest shell"))
    return CertificateCheckReport(not violations, count, violations, worst,
                                  spec.margin, boundary_witness=smallest_witness)


@dataclass(frozen=True)
class Certificate:
    transform: np.ndarray          # eigenvector matrix S, columns reordered
    form: QuadraticForm            # in y = S^-1 x coordinates
    mode: str                      # "stable" | "unstable"
    margin: float                  # guaranteed rate coefficient kappa
    eigenvalues: np.ndarray        # in column order of `transform`
    split: tuple | None


def build_quadratic_certificate(A, profile: GrainProfile, delta: float,
                                mode: str) -> Certificate:
    """Diagonalize and return the canonical quadratic certificate.

    Stable mode: V(y) = |y|^2 with guaranteed V^Delta <= -kappa |y|^2.
    Unstable mode: V(y) = |y1|^2 - |y2|^2 ordered by the admissible split.
    ``delta`` is the off-diagonal weight a Jordan-chain construction would
    use; the diagonalizable route implemented here does not need it (a
    documented restriction, since numerical Jordan forms are unstable).
    """
    A = CoefficientMap.coerce(A)
    w, S = guarded_eig(A.constant_value, exc=NotDiagonalizable)
    n = len(w)
    if mode == "stable":
        rep = is_strongly_stable(A, profile)
        if not rep.stable:
            raise ModeConditionFails(
                f"matrix is not strongly stable (margin {rep.margin:.3g})")
        form = QuadraticForm(np.eye(n, dtype=complex))
        return Certificate(S, form, "stable", rep.margin, w, None)
    if mode == "unstable":
        rep = is_strongly_unstable(A, profile)
        if not rep.unstable:
            raise ModeConditionFails("matrix is not strongly unstable")
        order = list(rep.group1) + list(rep.group2)
        S2 = S[:, order]
        w2 = w[list(order)]
        ell = len(rep.group1)
        diag = np.diag([1.0] * ell + [-1.0] * (n - ell)).astype(complex)
        form = QuadraticForm(diag, split=(ell, n - ell))
        return Certificate(S2, form, "unstable", rep.margin, w2, (ell, n - ell))
    raise ValueError(f"unknown certificate mode {mode!r}")


# ---------------------------------------------------------------------------
# upper functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UpperFunctionReport:
    passed: bool
    worst_margin: float            # min of log(C|e_u|) - log|Phi| over pairs
    worst_pair: tuple | None
    n_pairs: int


def upper_function_check(ts: TimeScale, A, u, C: float, horizon: float,
                         n_grid: int = 16,
                         cfg: IntegratorConfig | None = None,
                         quad: QuadratureConfig | None = None,
                         tol: float = 1e-7) -> UpperFunctionReport:
    """Sampled check of |Phi(t, s)| <= C |e_u(t, s)| over a grid of pairs.

    Transitions are propagated fresh from every grid start, so no
    ill-conditioned inversions enter; the worst log-margin is reported.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    cfg = cfg or DEFAULT_INTEGRATOR
    quad = quad or DEFAULT_QUADRATURE
    A = CoefficientMap.coerce(A)
    u = ScalarCoefficient.coerce(u)
    end = ts.floor_scale(horizon)
    grid = sorted({ts.floor_scale(x) for x in
                   np.linspace(ts.min_time, end, n_grid)})
    I_at = {grid[0]: 0.0}
    for a, b in zip(grid, grid[1:]):
        seg = _CylinderAccumulation(ts, u, a, b, quad)
        I_at[b] = I_at[a] + seg.total.real
    worst = math.inf
    worst_pair = None
    n_pairs = 0
    logC = math.log(C)
    for i, s in enumerate(grid[:-1]):
        trans = Transition.identity(A.dimension)
        pos = s
        for t in grid[i + 1:]:
            step = fundamental_matrix(ts, A, t, pos, cfg)
            trans = step.compose(trans)
            pos = t
            margin = logC + (I_at[t] - I_at[s]) - trans.log_norm()
            n_pairs += 1
            if margin < worst:
                worst, worst_pair = margin, (s, t)
    return UpperFunctionReport(worst >= -tol, worst, worst_pair, n_pairs)
