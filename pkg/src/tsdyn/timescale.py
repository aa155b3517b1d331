"""Exact time-scale representations and scalar Delta-integration.

A time scale here is an ordered list of closed components (intervals and
isolated points) plus a tail rule that extends the structure to +infinity:

* ``PeriodicTail``  -- a finite pattern of components repeated with a fixed
  period forever,
* ``GeneratorTail`` -- components produced on demand by a named rule (used
  for scales whose epoch structure drifts, e.g. the mixed-regime scale),
* ``None``          -- the half-line ``[b_last, inf)`` glued after the last
  explicit component (an eventually-continuous scale).

The jump operator sigma, the graininess mu, membership, floor projection and
the Cauchy Delta-integral are all read off this exact description; there is
no floating-point search for the next scale point.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    BadFraction,
    BeforeScaleStart,
    EndpointNotInScale,
    NotInScale,
    ParseError,
    ScaleConstructionError,
)

__all__ = [
    "Component",
    "Interval",
    "Point",
    "PeriodicTail",
    "GeneratorTail",
    "TimeScale",
    "GrainProfile",
    "PointKind",
    "Syndetic",
    "QuadratureConfig",
    "mixed_regime_scale",
    "scale_with_gap_pattern",
    "reals_scale",
    "integers_scale",
    "uniform_lattice",
    "parse_scale_text",
    "format_scale_text",
]


# ---------------------------------------------------------------------------
# components and tails
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    """One closed piece of a time scale: [start, end], a point iff start == end."""

    start: float
    end: float

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ScaleConstructionError("component endpoints must be finite")
        if self.end < self.start:
            raise ScaleConstructionError(
                f"component end {self.end} precedes start {self.start}")

    @property
    def is_point(self) -> bool:
        return self.start == self.end

    def shifted(self, dt: float) -> "Component":
        return Component(self.start + dt, self.end + dt)


def Interval(a: float, b: float) -> Component:
    """A closed interval [a, b] with a < b."""
    if not b > a:
        raise ScaleConstructionError(f"interval needs a < b, got [{a}, {b}]")
    return Component(float(a), float(b))


def Point(t: float) -> Component:
    """An isolated point {t}."""
    return Component(float(t), float(t))


@dataclass(frozen=True)
class PeriodicTail:
    """Pattern of components repeated with the given period forever.

    The pattern is written in absolute coordinates of its first repetition;
    repetition k is the pattern shifted by k*period.
    """

    period: float
    pattern: tuple

    def __post_init__(self):
        if self.period <= 0:
            raise ScaleConstructionError("tail period must be positive")
        if not self.pattern:
            raise ScaleConstructionError("periodic tail needs a nonempty pattern")
        object.__setattr__(self, "pattern", tuple(self.pattern))
        _check_ordering(self.pattern)
        span = self.pattern[-1].end - self.pattern[0].start
        if span >= self.period:
            raise ScaleConstructionError(
                "pattern span must be smaller than the period")

    def gap_values(self) -> list:
        """Exact set of graininess values attained over the tail, sorted."""
        gaps = []
        for a, b in zip(self.pattern, self.pattern[1:]):
            gaps.append(b.start - a.end)
        wrap = self.pattern[0].start + self.period - self.pattern[-1].end
        if wrap > 0:
            gaps.append(wrap)
        return sorted(set(_round_gap(g) for g in gaps if g > 0))

    def has_dense(self) -> bool:
        return any(not c.is_point for c in self.pattern)


@dataclass(frozen=True)
class GeneratorTail:
    """Tail produced on demand by a named rule.

    The rule must declare either a finite bound on its gap lengths or that
    the gaps are unbounded, so syndicity questions can be answered without
    scanning to infinity.  ``declared_gaps`` may pin the exact attained gap
    set when the rule guarantees it.
    """

    rule: str
    params: dict = field(default_factory=dict)
    sup_gap: float | None = None          # finite bound, math.inf, or None (undeclared)
    declared_gaps: tuple | None = None    # exact gap set, when known
    has_dense: bool = False

    def make_iterator(self) -> Iterator[Component]:
        try:
            factory = _GENERATOR_RULES[self.rule]
        except KeyError:
            raise ScaleConstructionError(f"unknown generator rule {self.rule!r}")
        return factory(self.params)


def _check_ordering(components: Sequence[Component]):
    for a, b in zip(components, components[1:]):
        if b.start <= a.end:
            raise ScaleConstructionError(
                f"components must be disjoint with positive gaps: "
                f"[{a.start},{a.end}] then [{b.start},{b.end}]")


def _round_gap(g: float) -> float:
    # collapse float jitter so gap sets stay small and comparable
    return float(f"{g:.12g}")


# ---------------------------------------------------------------------------
# generator rules
# ---------------------------------------------------------------------------

def _epoch_sequence(rule) -> Callable[[int], int]:
    if callable(rule):
        return rule
    if rule == "squares":
        return lambda k: k * k
    raise ScaleConstructionError(f"unknown epoch rule {rule!r}")


def _mixed_regime_components(params: dict) -> Iterator[Component]:
    """Scale alternating continuous runs and a uniform lattice.

    Epoch j covers [step*q*n_j, step*q*n_{j+1}] and consists of one interval
    of length step*p*m_j (m_j = n_{j+1} - n_j) followed by lattice points at
    spacing ``step``.  Every gap has length exactly ``step`` and the fraction
    of continuous time per epoch is p/q.
    """
    p = int(params["p"])
    q = int(params["q"])
    step = float(params.get("step", 6.0))
    epochs = _epoch_sequence(params.get("epoch_rule", "squares"))
    n_prev = int(epochs(1))
    if n_prev <= 0:
        raise ScaleConstructionError("epoch sequence must start positive")
    # lattice prefix [0, step*q*n_1]: points 0, step, ..., step*(q*n_1 - 1)
    for j in range(q * n_prev):
        yield Point(step * j)
    k = 1
    while True:
        n_next = int(epochs(k + 1))
        if n_next <= n_prev:
            raise ScaleConstructionError("epoch sequence must be strictly increasing")
        m = n_next - n_prev
        a = step * q * n_prev
        b = a + step * p * m
        yield Interval(a, b)
        # lattice from b + step up to step*q*n_next - step
        n_pts = (q - p) * m - 1
        for i in range(1, n_pts + 1):
            yield Point(b + step * i)
        n_prev = n_next
        k += 1


def _growing_gaps_components(params: dict) -> Iterator[Component]:
    """Isolated points whose k-th gap has length start_gap + (k-1)."""
    g = float(params.get("start_gap", 1.0))
    t = 0.0
    k = 0
    while True:
        yield Point(t)
        t += g + k
        k += 1


_GENERATOR_RULES = {
    "mixed-regime": _mixed_regime_components,
    "growing-gaps": _growing_gaps_components,
}


# ---------------------------------------------------------------------------
# profiles and enums
# ---------------------------------------------------------------------------

class PointKind(Enum):
    RIGHT_SCATTERED = "right-scattered"
    RIGHT_DENSE = "right-dense"


class Syndetic(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN_AT_HORIZON = "unknown-at-horizon"


@dataclass(frozen=True)
class GrainProfile:
    """Summary of the graininess values a scale attains in its tail.

    ``attained_gaps`` is exact for periodic tails and for generator tails
    that declare their gap set; otherwise it is the set observed up to the
    requested horizon and ``exact`` is False.
    """

    attained_gaps: tuple
    has_dense_tail: bool
    sup_gap: float
    exact: bool

    def __post_init__(self):
        if any(g <= 0 for g in self.attained_gaps):
            raise ScaleConstructionError("gap values must be positive")


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite quadrature resolution for dense sub-intervals.

    The panel width on a dense run of length L is min(max_step, rel_step*L),
    so short intervals are resolved proportionally.
    """

    max_step: float = 1e-2
    rel_step: float = 1e-2

    def step_for(self, length: float) -> float:
        return max(min(self.max_step, self.rel_step * length), 1e-12)


DEFAULT_QUADRATURE = QuadratureConfig()

_REALIZE_CAP = 5_000_000


# ---------------------------------------------------------------------------
# the TimeScale class
# ---------------------------------------------------------------------------

class TimeScale:
    """A closed, upward-unbounded subset of the reals with exact structure.

    All values are immutable after construction; the realization cache only
    grows and is replaced atomically, so instances are safe to share between
    threads without locking.
    """

    def __init__(self, components: Sequence[Component], tail=None, name: str = "",
                 atol: float = 1e-9, require_zero: bool = True):
        comps = tuple(components)
        if comps:
            _check_ordering(comps)
        self.explicit = comps
        self.tail = tail
        self.name = name
        self.atol = float(atol)
        if isinstance(tail, GeneratorTail):
            self._gen = tail.make_iterator()
        elif tail is None or isinstance(tail, PeriodicTail):
            self._gen = None
            if not comps:
                raise ScaleConstructionError(
                    "explicit components required unless a generator tail is given")
        else:
            raise ScaleConstructionError(f"unsupported tail {tail!r}")
        if isinstance(tail, PeriodicTail) and comps:
            if tail.pattern[0].start <= comps[-1].end:
                raise ScaleConstructionError(
                    "periodic pattern must start after the explicit components")
        self._comps: list[Component] = list(comps)
        self._starts: list[float] = [c.start for c in comps]
        self._reps = 0  # periodic repetitions realized
        if self._gen is not None:
            self._pull_generator(16)
        if require_zero and not self.contains(0.0):
            raise ScaleConstructionError("0 must belong to the time scale")

    # -- realization --------------------------------------------------------

    def _pull_generator(self, n: int):
        comps = list(self._comps)
        starts = list(self._starts)
        for _ in range(n):
            c = next(self._gen)
            if comps and c.start <= comps[-1].end:
                raise ScaleConstructionError(
                    f"generator produced overlapping component at {c.start}")
            comps.append(c)
            starts.append(c.start)
        self._comps, self._starts = comps, starts  # atomic swap

    def _realize_to(self, x: float):
        """Ensure components cover past x (or certify the half-line does)."""
        if self.tail is None:
            return
        while self._comps[-1].end <= x:
            if len(self._comps) > _REALIZE_CAP:
                raise ScaleConstructionError("realization cap exceeded")
            if isinstance(self.tail, PeriodicTail):
                shift = self._reps * self.tail.period
                comps = list(self._comps)
                starts = list(self._starts)
                for c in self.tail.pattern:
                    cc = c.shifted(shift)
                    if cc.start <= comps[-1].end:
                        raise ScaleConstructionError(
                            "periodic pattern overlaps previous components")
                    comps.append(cc)
                    starts.append(cc.start)
                self._comps, self._starts = comps, starts
                self._reps += 1
            else:
                self._pull_generator(64)

    def _index_of(self, t: float) -> int:
        """Index of the last component starting at or before t (-1 if none)."""
        self._realize_to(t)
        return bisect.bisect_right(self._starts, t + self.atol) - 1

    @property
    def min_time(self) -> float:
        return self._comps[0].start

    @property
    def is_halfline_tail(self) -> bool:
        return self.tail is None

    @property
    def scattered_unbounded(self) -> bool:
        """Whether right-scattered points reach to +infinity.

        The analysis modules assume this for scattered-point limsup notions;
        an eventually-continuous scale (half-line tail) reports False and the
        scale report surfaces the flag.
        """
        if self.tail is None:
            return False
        if isinstance(self.tail, PeriodicTail):
            return bool(self.tail.gap_values())
        return True  # generator rules here always produce gaps

    # -- point operations ----------------------------------------------------

    def contains(self, t: float) -> bool:
        if not math.isfinite(t):
            return False
        i = self._index_of(t)
        if i < 0:
            return False
        c = self._comps[i]
        if t <= c.end + self.atol:
            return True
        return self.tail is None and i == len(self._comps) - 1

    def sigma(self, t: float) -> float:
        """Forward jump operator: inf of scale points strictly above t."""
        i = self._require(t)
        c = self._comps[i]
        if t < c.end - self.atol:
            return t  # interior of an interval: right-dense
        if self.tail is None and i == len(self._comps) - 1:
            return t  # half-line: right-dense forever
        self._realize_to(c.end + self.atol)
        return self._comps[i + 1].start

    def mu(self, t: float) -> float:
        """Graininess sigma(t) - t, computed from stored boundaries."""
        i = self._require(t)
        c = self._comps[i]
        if t < c.end - self.atol:
            return 0.0
        if self.tail is None and i == len(self._comps) - 1:
            return 0.0
        self._realize_to(c.end + self.atol)
        return self._comps[i + 1].start - c.end

    def classify_point(self, t: float) -> PointKind:
        return PointKind.RIGHT_SCATTERED if self.mu(t) > 0 else PointKind.RIGHT_DENSE

    def floor_scale(self, t: float) -> float:
        """Largest scale element <= t."""
        if t < self.min_time - self.atol:
            raise BeforeScaleStart(f"{t} precedes the scale start {self.min_time}")
        i = self._index_of(t)
        c = self._comps[i]
        if self.tail is None and i == len(self._comps) - 1 and t >= c.end:
            return t
        return min(t, c.end)

    def _require(self, t: float) -> int:
        i = self._index_of(t)
        if i < 0 or (t > self._comps[i].end + self.atol
                     and not (self.tail is None and i == len(self._comps) - 1)):
            raise NotInScale(f"{t} is not a scale point")
        return i

    # -- structural walk -----------------------------------------------------

    def events(self, a: float, b: float):
        """Yield ('dense', t0, t1) and ('jump', t, mu) covering [a, b].

        Both endpoints must be scale points.  Jumps land exactly on stored
        component boundaries, so downstream arithmetic is reproducible.
        """
        if not self.contains(a) or not self.contains(b):
            raise EndpointNotInScale(f"[{a}, {b}] endpoints must be scale points")
        if b < a:
            raise ValueError("need a <= b")
        t = a
        while t < b - self.atol:
            i = self._require(t)
            c = self._comps[i]
            if t < c.end - self.atol:
                end = min(c.end, b)
                yield ("dense", t, end)
                t = end
            elif self.tail is None and i == len(self._comps) - 1:
                yield ("dense", t, b)
                t = b
            else:
                self._realize_to(c.end + self.atol)
                nxt = self._comps[i + 1]
                yield ("jump", c.end, nxt.start - c.end)
                t = nxt.start

    def scattered_points(self, a: float, b: float):
        """(t, mu) for every right-scattered t in [a, b)."""
        return [(t, m) for kind, t, m in
                ((k, x, y) for (k, x, y) in self.events(a, b)) if kind == "jump"]

    # -- grain profile -------------------------------------------------------

    def grain_profile(self, horizon: float) -> GrainProfile:
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        if isinstance(self.tail, PeriodicTail):
            gaps = tuple(self.tail.gap_values())
            sup = max(gaps) if gaps else 0.0
            return GrainProfile(gaps, self.tail.has_dense(), sup, exact=True)
        if self.tail is None:
            return GrainProfile((), True, 0.0, exact=True)
        tail: GeneratorTail = self.tail
        if tail.declared_gaps is not None:
            gaps = tuple(sorted(_round_gap(g) for g in tail.declared_gaps))
            sup = tail.sup_gap if tail.sup_gap is not None else max(gaps)
            return GrainProfile(gaps, tail.has_dense, sup, exact=True)
        lo = self.min_time
        hi = self.floor_scale(min(horizon, lo + horizon))
        gaps = sorted({_round_gap(m) for _, m in self.scattered_points(lo, hi)})
        sup = tail.sup_gap if tail.sup_gap is not None else (max(gaps) if gaps else 0.0)
        return GrainProfile(tuple(gaps), tail.has_dense, sup, exact=False)

    def is_syndetic(self, horizon: float) -> Syndetic:
        """Whether tail gaps stay bounded; generator tails must declare."""
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        if isinstance(self.tail, PeriodicTail) or self.tail is None:
            return Syndetic.YES
        tail: GeneratorTail = self.tail
        if tail.sup_gap is None:
            return Syndetic.UNKNOWN_AT_HORIZON
        return Syndetic.NO if math.isinf(tail.sup_gap) else Syndetic.YES

    # -- Delta-integration ---------------------------------------------------

    def delta_integral(self, f, a: float, b: float,
                       quad: QuadratureConfig | None = None):
        """Cauchy Delta-integral of f over [a, b].

        Sum of mu(t)*f(t) over right-scattered t in [a, b) plus composite
        Simpson quadrature of f over the dense sub-intervals.  Linear in f
        and additive over concatenated ranges (to quadrature tolerance).
        """
        quad = quad or DEFAULT_QUADRATURE
        if b < a:
            raise ValueError("need a <= b")
        total = None
        for kind, t0, t1 in self.events(a, b):
            if kind == "jump":
                piece = t1 * np.asarray(f(t0))
            else:
                piece = _simpson(f, t0, t1, quad)
            total = piece if total is None else total + piece
        if total is None:
            total = np.asarray(0.0 * np.asarray(f(a)))
        return total if total.shape else total[()]

    # -- misc ----------------------------------------------------------------

    def __repr__(self):
        tail = ("halfline" if self.tail is None else
                type(self.tail).__name__)
        label = f" {self.name!r}" if self.name else ""
        return f"<TimeScale{label} {len(self.explicit)} explicit, tail={tail}>"


def _simpson(f, a: float, b: float, quad: QuadratureConfig):
    """Composite Simpson with midpoints on each panel; vectorizes f if possible."""
    length = b - a
    if length <= 0:
        return np.asarray(0.0)
    n = max(1, int(math.ceil(length / quad.step_for(length))))
    edges = np.linspace(a, b, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    fe = _eval_nodes(f, edges)
    fm = _eval_nodes(f, mids)
    h = length / n
    weights_mid = 4.0 * fm
    panel = (fe[:-1] + weights_mid + fe[1:]) * (h / 6.0)
    return panel.sum(axis=0)


def _eval_nodes(f, nodes: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(nodes))
        if vals.shape and vals.shape[0] == nodes.shape[0]:
            return vals
    except Exception:
        pass
    return np.asarray([f(t) for t in nodes])


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def reals_scale() -> TimeScale:
    """The half-line [0, inf): no scattered points at all."""
    return TimeScale((Point(0.0),), tail=None, name="reals")


def uniform_lattice(h: float) -> TimeScale:
    """h*Z restricted to [0, inf)."""
    if h <= 0:
        raise ScaleConstructionError("lattice spacing must be positive")
    return scale_with_gap_pattern([h], name=f"lattice-{h:g}")


def integers_scale() -> TimeScale:
    return uniform_lattice(1.0)


def scale_with_gap_pattern(gaps: Sequence[float], dense_length: float = 0.0,
                           name: str = "") -> TimeScale:
    """Periodic scale: one dense run (optional) then points separated by ``gaps``.

    The period is dense_length + sum(gaps); the realized tail graininess set
    is exactly the distinct values in ``gaps``.
    """
    gaps = [float(g) for g in gaps]
    if not gaps or any(g <= 0 for g in gaps):
        raise ScaleConstructionError("need at least one positive gap")
    dense_length = float(dense_length)
    comps = [Interval(0.0, dense_length) if dense_length > 0 else Point(0.0)]
    cursor = dense_length
    for g in gaps[:-1]:
        cursor += g
        comps.append(Point(cursor))
    period = dense_length + sum(gaps)
    pattern = tuple(c.shifted(period) for c in comps)
    return TimeScale(tuple(comps), tail=PeriodicTail(period, pattern), name=name)


def mixed_regime_scale(p: int, q: int, epoch_rule="squares",
                       step: float = 6.0) -> TimeScale:
    """Scale spending fraction p/q of each epoch continuous, the rest on a lattice.

    Epoch lengths grow (default epoch ends at k^2 lattice periods) so the
    continuous fraction per epoch stays exactly p/q while individual regimes
    get arbitrarily long.  Every gap has length exactly ``step``.
    """
    p, q = int(p), int(q)
    if p <= 0 or q <= 0:
        raise BadFraction("p and q must be positive integers")
    if p >= q:
        raise BadFraction(f"need p < q for a fraction in (0, 1), got {p}/{q}")
    seq = _epoch_sequence(epoch_rule)
    for k in range(1, 5):  # sanity-probe monotonicity
        if seq(k + 1) <= seq(k):
            raise ScaleConstructionError("epoch sequence must be strictly increasing")
    tail = GeneratorTail(
        rule="mixed-regime",
        params={"p": p, "q": q, "step": float(step),
                "epoch_rule": epoch_rule},
        sup_gap=float(step),
        declared_gaps=(float(step),),
        has_dense=True,
    )
    return TimeScale((), tail=tail, name=f"mixed-regime-{p}-{q}")


def growing_gaps_scale(start_gap: float = 1.0) -> TimeScale:
    """Isolated points whose gaps grow without bound (not syndetic)."""
    tail = GeneratorTail(rule="growing-gaps", params={"start_gap": float(start_gap)},
                         sup_gap=math.inf, has_dense=False)
    return TimeScale((), tail=tail, name="growing-gaps")


# ---------------------------------------------------------------------------
# scale description text format
# ---------------------------------------------------------------------------

def parse_scale_text(text: str) -> TimeScale:
    """Parse the scale description format.

    Lines ('#' comments allowed)::

        interval A B
        point T
        tail halfline
        tail periodic P        # followed by 'pattern point T' / 'pattern interval A B'
        tail generator mixed-regime P Q [EPOCH_RULE] [STEP]
        tail generator growing-gaps [START_GAP]
    """
    comps: list[Component] = []
    pattern: list[Component] = []
    tail = None
    tail_seen = False
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "interval":
                comps.append(Interval(float(tok[1]), float(tok[2])))
            elif tok[0] == "point":
                comps.append(Point(float(tok[1])))
            elif tok[0] == "pattern":
                if tok[1] == "point":
                    pattern.append(Point(float(tok[2])))
                elif tok[1] == "interval":
                    pattern.append(Interval(float(tok[2]), float(tok[3])))
                else:
                    raise ParseError(f"unknown pattern kind {tok[1]!r}", line=ln)
            elif tok[0] == "tail":
                if tail_seen:
                    raise ParseError("only one tail stanza allowed", line=ln)
                tail_seen = True
                if tok[1] == "halfline":
                    tail = ("halfline",)
                elif tok[1] == "periodic":
                    tail = ("periodic", float(tok[2]))
                elif tok[1] == "generator":
                    if tok[2] == "mixed-regime":
                        p, q = int(tok[3]), int(tok[4])
                        rule = tok[5] if len(tok) > 5 else "squares"
                        step = float(tok[6]) if len(tok) > 6 else 6.0
                        tail = ("mixed-regime", p, q, rule, step)
                    elif tok[2] == "growing-gaps":
                        g = float(tok[3]) if len(tok) > 3 else 1.0
                        tail = ("growing-gaps", g)
                    else:
                        raise ParseError(f"unknown generator {tok[2]!r}", line=ln)
                else:
                    raise ParseError(f"unknown tail kind {tok[1]!r}", line=ln)
            else:
                raise ParseError(f"unknown directive {tok[0]!r}", line=ln)
        except ParseError:
            raise
        except (IndexError, ValueError) as exc:
            raise ParseError(f"malformed line: {raw.strip()!r} ({exc})", line=ln)
        except ScaleConstructionError as exc:
            raise ParseError(str(exc), line=ln)
    try:
        if tail is None or tail[0] == "halfline":
            return TimeScale(tuple(comps), tail=None)
        if tail[0] == "periodic":
            if not pattern:
                raise ScaleConstructionError("periodic tail needs pattern lines")
            return TimeScale(tuple(comps), tail=PeriodicTail(tail[1], tuple(pattern)))
        if tail[0] == "mixed-regime":
            if comps:
                raise ScaleConstructionError(
                    "mixed-regime generator does not take explicit components")
            return mixed_regime_scale(tail[1], tail[2], tail[3], tail[4])
        if comps:
            raise ScaleConstructionError(
                "growing-gaps generator does not take explicit components")
        return growing_gaps_scale(tail[1])
    except ScaleConstructionError as exc:
        raise ParseError(str(exc))


def format_scale_text(ts: TimeScale) -> str:
    """Serialize a scale back to the description format (round-trips)."""
    out = []
    for c in ts.explicit:
        out.append(f"point {c.start:.17g}" if c.is_point
                   else f"interval {c.start:.17g} {c.end:.17g}")
    if ts.tail is None:
        out.append("tail halfline")
    elif isinstance(ts.tail, PeriodicTail):
        out.append(f"tail periodic {ts.tail.period:.17g}")
        for c in ts.tail.pattern:
            out.append(f"pattern point {c.start:.17g}" if c.is_point
                       else f"pattern interval {c.start:.17g} {c.end:.17g}")
    else:
        tail: GeneratorTail = ts.tail
        if tail.rule == "mixed-regime":
            rule = tail.params.get("epoch_rule", "squares")
            if not isinstance(rule, str):
                raise ScaleConstructionError(
                    "cannot serialize a callable epoch rule")
            out.append(f"tail generator mixed-regime {tail.params['p']} "
                       f"{tail.params['q']} {rule} {tail.params.get('step', 6.0):.17g}")
        elif tail.rule == "growing-gaps":
            out.append(f"tail generator growing-gaps "
                       f"{tail.params.get('start_gap', 1.0):.17g}")
        else:
            raise ScaleConstructionError(f"cannot serialize rule {tail.rule!r}")
    return "\n".join(out) + "\n"
