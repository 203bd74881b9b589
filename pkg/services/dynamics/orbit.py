"""
Separation traces, hitting sets, Birkhoff means and diameter traces.

Pairs of circle or interval points are iterated in integer numerators over a
common denominator, so two-point traces are exact before rounding to float.
When the eventual behavior of a trace is known exactly (isometries, dyadic
and periodic differences, coinciding orbits, periodic shift points) it is
recorded as an ExactTail and turned into a tail hint on derived sets.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from core.zset import TailHint, WindowSet
from services.dynamics.space import (
    BinaryShift,
    Circle,
    Doubling,
    Identity,
    Interval,
    MetricSystem,
    Point,
    Product,
    Rotation,
    SampleMode,
    ShiftMap,
    Tent,
    agreement_length,
    as_fraction,
    sample_ball,
)
from services.dynamics.symbolic import MAX_EXACT_PERIOD, ShiftPoint, multiplicative_order, split_two_power

# Extra symbols read past the horizon so shift distances are exact down to 2⁻⁶⁴.
SHIFT_LOOKAHEAD = 64
MIN_BIRKHOFF_HORIZON = 64


@dataclass(frozen=True)
class ExactTail:
    """values[n] = cycle[n % len(cycle)] for every n ≥ start."""

    start: int
    cycle: Tuple[float, ...]

    @property
    def period(self) -> int:
        return len(self.cycle)

    @property
    def constant_from_zero(self) -> bool:
        return self.start == 0 and self.period == 1

    def mean(self) -> float:
        return float(np.mean(self.cycle))

    def hint(self, predicate) -> TailHint:
        return TailHint.periodic(tuple(int(bool(predicate(c))) for c in self.cycle), self.start)


def constant_tail(value: float) -> ExactTail:
    return ExactTail(0, (float(value),))


def combine_tails(a: Optional[ExactTail], b: Optional[ExactTail]) -> Optional[ExactTail]:
    """Tail of √(a² + b²); None when either side is unknown or the period grows too large."""
    if a is None or b is None:
        return None
    period = math.lcm(a.period, b.period)
    if period > MAX_EXACT_PERIOD:
        return None
    r = np.arange(period)
    ca = np.asarray(a.cycle)[r % a.period]
    cb = np.asarray(b.cycle)[r % b.period]
    return ExactTail(max(a.start, b.start), tuple(float(v) for v in np.sqrt(ca * ca + cb * cb)))


def _apply_tail(values: np.ndarray, tail: Optional[ExactTail]) -> np.ndarray:
    if tail is not None and tail.start < values.size:
        n = np.arange(tail.start, values.size)
        values[tail.start:] = np.asarray(tail.cycle)[n % tail.period]
    return values


@dataclass(frozen=True, eq=False)
class SeparationTrace:
    values: np.ndarray
    pair: Tuple[Point, Point]
    system: MetricSystem
    tail: Optional[ExactTail] = None

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def horizon(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class OpenSet:
    center: Point
    radius: float

    def describe(self) -> str:
        return f"B({self.center}, {self.radius})"


@dataclass(frozen=True, eq=False)
class DiamTrace:
    values: np.ndarray
    sample_size: int
    open_set: OpenSet
    system: MetricSystem
    tail: Optional[ExactTail] = None
    exact: bool = False

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def horizon(self) -> int:
        return int(self.values.size)


# Circle and interval orbits in integer numerators

def _common_denominator(sys: MetricSystem, points: Sequence[Fraction]) -> int:
    q = 1
    for p in points:
        q = math.lcm(q, p.denominator)
    if isinstance(sys, Rotation):
        q = math.lcm(q, sys.alpha.denominator)
    return q


def _numerator_step(sys: MetricSystem, q: int):
    if isinstance(sys, Doubling):
        return lambda p: 2 * p % q
    if isinstance(sys, Tent):
        return lambda p: 2 * p if 2 * p <= q else 2 * q - 2 * p
    if isinstance(sys, Rotation):
        a = sys.alpha.numerator * (q // sys.alpha.denominator)
        return lambda p: (p + a) % q
    return lambda p: p


def _real_positions(sys: MetricSystem, points: Sequence[Fraction], horizon: int) -> np.ndarray:
    """(len(points), horizon) float positions of lockstep orbits."""
    q = _common_denominator(sys, points)
    step = _numerator_step(sys, q)
    nums = [p.numerator * (q // p.denominator) for p in points]
    out = np.empty((len(points), horizon))
    for n in range(horizon):
        for i, p in enumerate(nums):
            out[i, n] = p / q
        nums = [step(p) for p in nums]
    return out


def _doubling_difference(diff: Fraction, horizon: int) -> Tuple[np.ndarray, Optional[ExactTail]]:
    """Circle distance of 2ⁿ·diff for n < horizon, with its exact eventual cycle."""
    q = diff.denominator
    r = diff.numerator % q

    def dist(num: int) -> float:
        return min(num, q - num) / q

    values = np.empty(horizon)
    for n in range(horizon):
        values[n] = dist(r)
        r = 2 * r % q
    k, m = split_two_power(q)
    if m == 1:
        return values, ExactTail(k, (0.0,))
    period = multiplicative_order(2, m)
    if period is None:
        return values, None
    cycle = [0.0] * period
    for n in range(k, k + period):
        cycle[n % period] = dist(pow(2, n, q) * diff.numerator % q)
    return values, ExactTail(k, tuple(cycle))


def _tent_pair(sys: Tent, x: Fraction, y: Fraction, horizon: int) -> Tuple[np.ndarray, Optional[ExactTail]]:
    q = _common_denominator(sys, (x, y))
    step = _numerator_step(sys, q)
    px, py = x.numerator * (q // x.denominator), y.numerator * (q // y.denominator)
    values = np.empty(horizon)
    for n in range(horizon):
        if px == py:
            values[n:] = 0.0
            return values, ExactTail(n, (0.0,))
        values[n] = abs(px - py) / q
        px, py = step(px), step(py)
    return values, None


# Shift orbits through symbol blocks

def _next_mismatch_distances(bx: np.ndarray, by: np.ndarray, horizon: int) -> np.ndarray:
    """d(σⁿx, σⁿy) for n < horizon from blocks of length ≥ horizon; unseen mismatches read as 0."""
    size = bx.size
    idx = np.where(bx != by, np.arange(size), size)
    nxt = np.minimum.accumulate(idx[::-1])[::-1][:horizon]
    gap = nxt - np.arange(horizon)
    values = np.ldexp(1.0, -np.minimum(gap, 1100).astype(np.int32))
    values[nxt >= size] = 0.0
    return values


def _shift_pair_tail(x: ShiftPoint, y: ShiftPoint) -> Optional[ExactTail]:
    px, py = x.eventual_period(), y.eventual_period()
    if px is None or py is None:
        return None
    (sx, wx), (sy, wy) = px, py
    period = math.lcm(len(wx), len(wy))
    if period > MAX_EXACT_PERIOD:
        return None
    start = max(sx, sy)
    bx, by = x.block(start, 2 * period), y.block(start, 2 * period)
    dist = _next_mismatch_distances(bx, by, period)
    cycle = [0.0] * period
    for i in range(period):
        cycle[(start + i) % period] = float(dist[i])
    return ExactTail(start, tuple(cycle))


def _shift_pair(x: ShiftPoint, y: ShiftPoint, horizon: int) -> Tuple[np.ndarray, Optional[ExactTail]]:
    length = horizon + SHIFT_LOOKAHEAD
    values = _next_mismatch_distances(x.block(0, length), y.block(0, length), horizon)
    if x == y:
        return values, constant_tail(0.0)
    return values, _shift_pair_tail(x, y)


def _pair_values(sys: MetricSystem, x: Point, y: Point, horizon: int) -> Tuple[np.ndarray, Optional[ExactTail]]:
    if isinstance(sys, Product):
        v1, t1 = _pair_values(sys.first, x[0], y[0], horizon)
        v2, t2 = _pair_values(sys.second, x[1], y[1], horizon)
        return np.sqrt(v1 * v1 + v2 * v2), combine_tails(t1, t2)
    if sys.isometric:
        d = sys.metric(x, y)
        return np.full(horizon, d), constant_tail(d)
    if isinstance(sys, Doubling):
        return _doubling_difference((y - x) % 1, horizon)
    if isinstance(sys, Tent):
        return _tent_pair(sys, x, y, horizon)
    if isinstance(sys, ShiftMap):
        return _shift_pair(x, y, horizon)
    raise ValueError(f"no orbit arithmetic for {sys!r}")


def separation_trace(sys: MetricSystem, x: Point, y: Point, horizon: int) -> SeparationTrace:
    """values[n] = d(Tⁿx, Tⁿy) for n < horizon, both orbits advanced one step per n."""
    if horizon < 1:
        raise ValueError(f"trace horizon must be at least 1, got {horizon}")
    x, y = sys.coerce(x), sys.coerce(y)
    values, tail = _pair_values(sys, x, y, horizon)
    values = _apply_tail(np.asarray(values, dtype=float).copy(), tail)
    return SeparationTrace(values, (x, y), sys, tail)


def hitting_set(trace: SeparationTrace, epsilon: float, closed: bool = False) -> WindowSet:
    """
    N((x, y), Δ_ε): times with d(Tⁿx, Tⁿy) < ε, or ≤ ε when closed.

    Raises:
        ValueError: ε ≤ 0.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    n = trace.horizon
    diameter = trace.system.diameter
    if epsilon > diameter or (closed and epsilon >= diameter):
        return WindowSet(np.ones(n, dtype=bool), TailHint.all_beyond(0))
    if closed:
        bits = trace.values <= epsilon
        hint = trace.tail.hint(lambda c: c <= epsilon) if trace.tail else TailHint.unknown()
    else:
        bits = trace.values < epsilon
        hint = trace.tail.hint(lambda c: c < epsilon) if trace.tail else TailHint.unknown()
    return WindowSet(bits, hint)


def birkhoff_bounds(trace: SeparationTrace) -> Tuple[float, float]:
    """(min, max) of the prefix averages (1/n)·Σ_{i<n} values[i] over n ∈ [⌈N/2⌉, N]."""
    n = trace.horizon
    if n < MIN_BIRKHOFF_HORIZON:
        raise ValueError(f"Birkhoff averages need a horizon of at least {MIN_BIRKHOFF_HORIZON}, got {n}")
    cs = np.cumsum(trace.values)
    ns = np.arange(math.ceil(n / 2), n + 1)
    averages = cs[ns - 1] / ns
    return float(averages.min()), float(averages.max())


def birkhoff_limsup(trace: SeparationTrace) -> float:
    """Lim sup proxy of the Birkhoff averages of the separation; exact for constant traces."""
    if trace.tail is not None and trace.tail.constant_from_zero:
        if trace.horizon < MIN_BIRKHOFF_HORIZON:
            raise ValueError(
                f"Birkhoff averages need a horizon of at least {MIN_BIRKHOFF_HORIZON}, got {trace.horizon}"
            )
        return trace.tail.cycle[0]
    return birkhoff_bounds(trace)[1]


def birkhoff_limit(trace: SeparationTrace) -> Optional[float]:
    """The exact Birkhoff limit when the trace is eventually periodic, else None."""
    return trace.tail.mean() if trace.tail is not None else None


# Diameter traces

def _exact_ball_diameters(sys: MetricSystem, center: Point,
                          radius: Fraction, horizon: int) -> Optional[Tuple[np.ndarray, ExactTail]]:
    half = Fraction(1, 2)
    space = getattr(sys, 'space', None)
    if isinstance(sys, (Rotation, Identity)) and isinstance(space, Circle):
        d = float(min(2 * radius, half))
        return np.full(horizon, d), constant_tail(d)
    if isinstance(sys, Doubling):
        length = 2 * radius
        start = 0
        while length * 2 ** start < half:
            start += 1
        values = np.array([float(min(length * 2 ** n, half)) for n in range(min(start, horizon))]
                          + [0.5] * max(horizon - start, 0))
        return values, ExactTail(start, (0.5,))
    if isinstance(sys, Identity) and isinstance(space, Interval):
        d = float(min(center + radius, 1) - max(center - radius, 0))
        return np.full(horizon, d), constant_tail(d)
    if isinstance(sys, Tent):
        a, b = max(center - radius, Fraction(0)), min(center + radius, Fraction(1))
        values = np.ones(horizon)
        for n in range(horizon):
            if a == 0 and b == 1:
                return values, ExactTail(n, (1.0,))
            values[n] = float(b - a)
            if b <= half:
                a, b = 2 * a, 2 * b
            elif a >= half:
                a, b = 2 - 2 * b, 2 - 2 * a
            else:
                a, b = min(2 * a, 2 - 2 * b), Fraction(1)
        return None
    if isinstance(space, BinaryShift) and type(sys) in (ShiftMap, Identity):
        k = agreement_length(radius)
        if isinstance(sys, Identity):
            d = 2.0 ** -k
            return np.full(horizon, d), constant_tail(d)
        values = np.array([2.0 ** -(k - n) if n < k else 1.0 for n in range(horizon)])
        return values, ExactTail(k, (1.0,))
    return None


def _pairwise_max(sys: MetricSystem, points: Sequence[Point], horizon: int) -> np.ndarray:
    """values[n] = max over pairs of d(Tⁿp, Tⁿq) for the given lockstep points."""
    if len(points) < 2:
        return np.zeros(horizon)
    if sys.isometric:
        d = max(sys.metric(p, q) for p, q in itertools.combinations(points, 2))
        return np.full(horizon, d)
    return _pairwise_max_table(sys, _orbit_table(sys, points, horizon), len(points), horizon)


def _orbit_table(sys: MetricSystem, points: Sequence[Point], horizon: int):
    if isinstance(sys, Product):
        return (_orbit_table(sys.first, [p[0] for p in points], horizon),
                _orbit_table(sys.second, [p[1] for p in points], horizon))
    if isinstance(sys, ShiftMap) or isinstance(getattr(sys, 'space', None), BinaryShift):
        if sys.isometric:
            return [p.block(0, SHIFT_LOOKAHEAD) for p in points]
        return [p.block(0, horizon + SHIFT_LOOKAHEAD) for p in points]
    if sys.isometric:
        return np.repeat(np.array([[float(p)] for p in points]), horizon, axis=1)
    return _real_positions(sys, points, horizon)


def _table_pair(sys: MetricSystem, table, i: int, j: int, horizon: int) -> np.ndarray:
    if isinstance(sys, Product):
        d1 = _table_pair(sys.first, table[0], i, j, horizon)
        d2 = _table_pair(sys.second, table[1], i, j, horizon)
        return np.sqrt(d1 * d1 + d2 * d2)
    space = getattr(sys, 'space', None)
    if isinstance(space, BinaryShift):
        if sys.isometric:
            return np.full(horizon, float(_next_mismatch_distances(table[i], table[j], 1)[0]))
        return _next_mismatch_distances(table[i], table[j], horizon)
    diff = np.abs(table[i] - table[j])
    if isinstance(space, Circle):
        diff = diff % 1.0
        return np.minimum(diff, 1.0 - diff)
    return diff


def _pairwise_max_table(sys: MetricSystem, table, count: int, horizon: int) -> np.ndarray:
    out = np.zeros(horizon)
    for i, j in itertools.combinations(range(count), 2):
        np.maximum(out, _table_pair(sys, table, i, j, horizon), out=out)
    return out


def sampled_diameters(sys: MetricSystem, points: Sequence[Point], horizon: int) -> np.ndarray:
    """Lower estimate of diam Tⁿ(U) from lockstep orbits of points of U."""
    return _pairwise_max(sys, [sys.coerce(p) for p in points], horizon)


def diam_trace(sys: MetricSystem, center: Point, radius: float, horizon: int,
               sample_size: int, seed: int) -> DiamTrace:
    """
    Estimates of diam Tⁿ(B(center, radius)) for n < horizon.

    Arcs under rotations, doubling and the identity, intervals under the
    tent map and cylinders in the full shift are propagated exactly; other
    cases take the max pairwise distance of sampled lockstep orbits, which
    is a lower bound.

    Raises:
        ValueError: sample_size < 2 or radius ≤ 0.
    """
    if sample_size < 2:
        raise ValueError(f"diam_trace needs sample_size ≥ 2, got {sample_size}")
    r = as_fraction(radius)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = sys.coerce(center)
    open_set = OpenSet(center, float(radius))
    exact = _exact_ball_diameters(sys, center, r, horizon)
    if exact is not None:
        values, tail = exact
        values = _apply_tail(np.asarray(values, dtype=float).copy(), tail)
        return DiamTrace(values, sample_size, open_set, sys, tail, exact=True)

    points = sample_ball(sys, center, r, seed, sample_size, SampleMode.ADVERSARIAL)
    values = sampled_diameters(sys, points, horizon)
    tail = constant_tail(values[0]) if sys.isometric else None
    logging.debug('[diam_trace] %s: sampled %d points around %s', sys.name, len(points), center)
    return DiamTrace(_apply_tail(values, tail), len(points), open_set, sys, tail, exact=False)


def sensitivity_set(dt: DiamTrace, epsilon: float) -> WindowSet:
    """S(U, ε) = {n : diam Tⁿ(U) > ε}."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    bits = dt.values > epsilon
    hint = dt.tail.hint(lambda c: c > epsilon) if dt.tail else TailHint.unknown()
    return WindowSet(bits, hint)
