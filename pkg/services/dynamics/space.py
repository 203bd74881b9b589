"""
Zoo of exactly computable compact metric systems (X, T).

Circle and interval points are Fractions, shift points are ShiftPoints and
product points are pairs. Irrational rotation numbers are replaced by their
2⁻⁶⁴ floor approximation, which is what the transitivity flags refer to.
"""
import logging
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.family import SpecParseError
from services.dynamics.symbolic import (
    Complemented,
    DyadicOfAngle,
    Periodic,
    SequenceRule,
    ShiftPoint,
    Spliced,
    Sturmian,
    ThueMorse,
    first_mismatch,
    sturmian_rule,
)

SYSTEM_GRAMMAR = (
    "rot(sqrt2-1) | doubling | tent | shift | sturmian(sqrt2-1) | thue_morse | "
    "prod(<spec>,<spec>) | id(circle|interval|shift)"
)

ANGLE_BITS = 64
SAMPLE_DENOMINATOR = 3 ** 20
# Symbols compared before two shift points are declared equal.
SHIFT_METRIC_DEPTH = 1100
ADVERSARIAL_RATIOS = (Fraction(1, 3), Fraction(1, 5), Fraction(1, 7), Fraction(832040, 1346269))
EDGE_FACTOR = Fraction(15, 16)
# Product balls sample each coordinate below this fraction of δ (7/10 < 1/√2).
PRODUCT_COMPONENT = Fraction(7, 10)

Point = Any


class SpaceKind(str, Enum):
    CIRCLE = 'Circle'
    INTERVAL = 'Interval'
    BINARY_SHIFT = 'BinaryShift'
    PRODUCT = 'Product'


class MapKind(str, Enum):
    ROTATION = 'Rotation'
    DOUBLING = 'Doubling'
    TENT = 'Tent'
    SHIFT = 'Shift'
    PAIR_OF = 'PairOf'
    IDENTITY = 'Identity'


class SampleMode(str, Enum):
    RANDOM = 'random'
    ADVERSARIAL = 'adversarial'


@dataclass(frozen=True)
class KnownFlags:
    transitive: bool
    isometric: bool
    mixing: bool = False
    citation: str = ''


def as_fraction(value: Union[Fraction, float, int, str]) -> Fraction:
    """Exact reading of a number; floats are read through their shortest repr (0.3 → 3/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream])


# Spaces

class Space(ABC):
    kind: SpaceKind
    name: str

    @property
    @abstractmethod
    def diameter_exact(self) -> Optional[Fraction]:
        ...

    @property
    def diameter(self) -> float:
        return float(self.diameter_exact)

    @abstractmethod
    def coerce(self, p: Point) -> Point:
        ...

    @abstractmethod
    def metric_exact(self, p: Point, q: Point) -> Fraction:
        ...

    def metric(self, p: Point, q: Point) -> float:
        return float(self.metric_exact(p, q))

    @abstractmethod
    def random_ball(self, center: Point, delta: Fraction, rng: np.random.Generator, count: int) -> List[Point]:
        ...

    @abstractmethod
    def adversarial_ball(self, center: Point, delta: Fraction) -> List[Point]:
        ...

    @abstractmethod
    def grid(self, count: int) -> List[Point]:
        ...


def _dyadic_scaled(z: Fraction, delta: Fraction) -> Fraction:
    """z·2⁻ᵏ with the least k ≥ 0 making it smaller than δ."""
    value = z
    while value >= delta:
        value /= 2
    return value


def _structured_offsets(delta: Fraction) -> List[Fraction]:
    offsets = []
    for z in ADVERSARIAL_RATIOS:
        scaled = _dyadic_scaled(z, delta)
        offsets.extend([scaled, -scaled])
    offsets.extend([EDGE_FACTOR * delta, -EDGE_FACTOR * delta])
    return offsets


def _random_offsets(delta: Fraction, rng: np.random.Generator, count: int) -> List[Fraction]:
    js = rng.integers(-(SAMPLE_DENOMINATOR - 1), SAMPLE_DENOMINATOR, size=count)
    return [delta * Fraction(int(j), SAMPLE_DENOMINATOR) for j in js]


class Circle(Space):
    kind = SpaceKind.CIRCLE
    name = 'circle'

    @property
    def diameter_exact(self) -> Fraction:
        return Fraction(1, 2)

    def coerce(self, p: Point) -> Fraction:
        return as_fraction(p) % 1

    def metric_exact(self, p: Point, q: Point) -> Fraction:
        t = (as_fraction(p) - as_fraction(q)) % 1
        return min(t, 1 - t)

    def random_ball(self, center, delta, rng, count):
        return [(center + off) % 1 for off in _random_offsets(delta, rng, count)]

    def adversarial_ball(self, center, delta):
        return [center] + [(center + off) % 1 for off in _structured_offsets(delta)]

    def grid(self, count):
        return [Fraction(j, count) for j in range(count)]


class Interval(Space):
    kind = SpaceKind.INTERVAL
    name = 'interval'

    @property
    def diameter_exact(self) -> Fraction:
        return Fraction(1)

    def coerce(self, p: Point) -> Fraction:
        value = as_fraction(p)
        if not 0 <= value <= 1:
            raise ValueError(f"interval points must lie in [0, 1], got {p}")
        return value

    def metric_exact(self, p: Point, q: Point) -> Fraction:
        return abs(as_fraction(p) - as_fraction(q))

    @staticmethod
    def _clamp(x: Fraction) -> Fraction:
        return min(max(x, Fraction(0)), Fraction(1))

    def random_ball(self, center, delta, rng, count):
        return [self._clamp(center + off) for off in _random_offsets(delta, rng, count)]

    def adversarial_ball(self, center, delta):
        return [center] + [self._clamp(center + off) for off in _structured_offsets(delta)]

    def grid(self, count):
        return [Fraction(2 * j + 1, 2 * count) for j in range(count)]


def agreement_length(delta: Fraction) -> int:
    """Least k with 2⁻ᵏ < δ: points agreeing on k symbols lie in the δ-ball."""
    k = 0
    while Fraction(1, 2 ** k) >= delta:
        k += 1
    return k


_GRID_WORDS = ('0', '1', '01', '001', '011', '0111', '00011', '0010111', '0001', '01101')


class BinaryShift(Space):
    """Full one-sided shift {0,1}^ℤ₊ with d(x, y) = 2^(−min{i : xᵢ ≠ yᵢ})."""

    kind = SpaceKind.BINARY_SHIFT
    name = 'shift'

    @property
    def diameter_exact(self) -> Fraction:
        return Fraction(1)

    def coerce(self, p: Point) -> ShiftPoint:
        if isinstance(p, ShiftPoint):
            return p
        if isinstance(p, SequenceRule):
            return ShiftPoint(p)
        if isinstance(p, str):
            return ShiftPoint(Periodic(p))
        raise ValueError(f"cannot read {p!r} as a shift point; pass a ShiftPoint, rule or 0/1 word")

    def metric_exact(self, p: Point, q: Point) -> Fraction:
        i = first_mismatch(self.coerce(p), self.coerce(q), SHIFT_METRIC_DEPTH)
        return Fraction(0) if i is None else Fraction(1, 2 ** i)

    @staticmethod
    def splice(center: ShiftPoint, agree: int, tail: SequenceRule) -> ShiftPoint:
        prefix = center.rule.text(0, center.offset + agree)
        return ShiftPoint(Spliced(prefix, tail), center.offset)

    def random_ball(self, center, delta, rng, count):
        agree = agreement_length(delta)
        points = []
        for _ in range(count):
            extra = int(rng.integers(0, 8))
            if rng.random() < 0.5:
                length = int(rng.integers(1, 13))
                word = ''.join('1' if b else '0' for b in rng.random(length) < 0.5)
                tail: SequenceRule = Periodic(word)
            else:
                tail = DyadicOfAngle(Fraction(int(rng.integers(1, SAMPLE_DENOMINATOR)), SAMPLE_DENOMINATOR))
            points.append(self.splice(center, agree + extra, tail))
        return points

    def adversarial_ball(self, center, delta):
        agree = agreement_length(delta)
        points = [center]
        for extra in (0, 1, 3):
            points.append(self.splice(center, agree + extra, Complemented(center.rule)))
        for word in ('0', '1', '01'):
            points.append(self.splice(center, agree, Periodic(word)))
        return points

    def grid(self, count):
        return [ShiftPoint(Periodic(_GRID_WORDS[j % len(_GRID_WORDS)])) for j in range(count)]


_SPACES = {'circle': Circle, 'interval': Interval, 'shift': BinaryShift}


# Systems

class MetricSystem(ABC):
    """A compact metric space with an exactly computable self-map."""

    space_kind: SpaceKind
    map_kind: MapKind

    def __init__(self, name: str, space: Space, flags: KnownFlags):
        self.name = name
        self.space = space
        self.flags = flags
        self.space_kind = space.kind

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"

    @property
    def diameter_exact(self) -> Optional[Fraction]:
        return self.space.diameter_exact

    @property
    def diameter(self) -> float:
        return self.space.diameter

    @property
    def isometric(self) -> bool:
        return self.flags.isometric

    @property
    def transitive(self) -> bool:
        return self.flags.transitive

    def coerce(self, p: Point) -> Point:
        return self.space.coerce(p)

    def metric_exact(self, p: Point, q: Point) -> Fraction:
        return self.space.metric_exact(p, q)

    def metric(self, p: Point, q: Point) -> float:
        return self.space.metric(p, q)

    @abstractmethod
    def step(self, p: Point) -> Point:
        ...

    def iterate(self, p: Point, n: int) -> Point:
        if n < 0:
            raise ValueError(f"iterate needs n ≥ 0, got {n}")
        p = self.coerce(p)
        for _ in range(n):
            p = self.step(p)
        return p

    def random_ball(self, center: Point, delta: Fraction, rng: np.random.Generator, count: int) -> List[Point]:
        return self.space.random_ball(center, delta, rng, count)

    def adversarial_ball(self, center: Point, delta: Fraction) -> List[Point]:
        return self.space.adversarial_ball(center, delta)

    def point_grid(self, count: int) -> List[Point]:
        return self.space.grid(count)


class Rotation(MetricSystem):
    map_kind = MapKind.ROTATION

    def __init__(self, alpha: Fraction, label: str):
        super().__init__(f"rot({label})", Circle(), KnownFlags(
            transitive=True, isometric=True, mixing=False,
            citation='irrational rotations are minimal isometries (Weyl)'))
        self.alpha = alpha

    def step(self, p):
        return (self.coerce(p) + self.alpha) % 1

    def iterate(self, p, n):
        if n < 0:
            raise ValueError(f"iterate needs n ≥ 0, got {n}")
        return (self.coerce(p) + n * self.alpha) % 1


class Doubling(MetricSystem):
    map_kind = MapKind.DOUBLING

    def __init__(self):
        super().__init__('doubling', Circle(), KnownFlags(
            transitive=True, isometric=False, mixing=True,
            citation='x ↦ 2x mod 1 is topologically exact, hence mixing'))

    def step(self, p):
        return (2 * self.coerce(p)) % 1

    def iterate(self, p, n):
        if n < 0:
            raise ValueError(f"iterate needs n ≥ 0, got {n}")
        x = self.coerce(p)
        q = x.denominator
        return Fraction(pow(2, n, q) * x.numerator % q, q)


class Tent(MetricSystem):
    map_kind = MapKind.TENT

    def __init__(self):
        super().__init__('tent', Interval(), KnownFlags(
            transitive=True, isometric=False, mixing=True,
            citation='the full tent map is topologically exact on [0, 1]'))

    @staticmethod
    def tent(x: Fraction) -> Fraction:
        return 2 * x if x <= Fraction(1, 2) else 2 - 2 * x

    def step(self, p):
        return self.tent(self.coerce(p))

    def iterate(self, p, n):
        if n < 0:
            raise ValueError(f"iterate needs n ≥ 0, got {n}")
        x = self.coerce(p)
        if n == 0:
            return x
        # tentⁿ = tent ∘ Dⁿ⁻¹ with D the doubling map (tent is symmetric about 1/2)
        q = x.denominator
        doubled = Fraction(pow(2, n - 1, q) * x.numerator % q, q)
        return self.tent(doubled)


class ShiftMap(MetricSystem):
    """σ on the full shift, or on the orbit closure of a single sequence."""

    map_kind = MapKind.SHIFT

    def __init__(self, name: str = 'shift', flags: Optional[KnownFlags] = None):
        super().__init__(name, BinaryShift(), flags or KnownFlags(
            transitive=True, isometric=False, mixing=True,
            citation='the full shift is topologically mixing'))

    def step(self, p):
        return self.coerce(p).advanced(1)

    def iterate(self, p, n):
        if n < 0:
            raise ValueError(f"iterate needs n ≥ 0, got {n}")
        return self.coerce(p).advanced(n)


def _convergent_denominators(x: Fraction, limit: int) -> List[int]:
    """Denominators of the continued-fraction convergents of x up to limit."""
    dens = []
    h_prev, h = 0, 1
    num, den = x.numerator, x.denominator
    while den and h <= limit:
        a, rem = divmod(num, den)
        h_prev, h = h, a * h + h_prev
        if h > limit:
            break
        if h > 0:
            dens.append(h)
        num, den = den, rem
    return dens


class SturmianShift(ShiftMap):
    """Orbit closure of the Sturmian codings of an irrational rotation number."""

    def __init__(self, alpha: Fraction, label: str):
        super().__init__(f"sturmian({label})", KnownFlags(
            transitive=True, isometric=False, mixing=False,
            citation='Sturmian subshifts are minimal and uniquely ergodic, not weakly mixing'))
        self.alpha = alpha

    def rule(self, beta: Fraction = Fraction(0)) -> Sturmian:
        return sturmian_rule(self.alpha, beta)

    def coerce(self, p):
        if p is None:
            return ShiftPoint(self.rule())
        return super().coerce(p)

    @staticmethod
    def _agrees(a: ShiftPoint, b: ShiftPoint, agree: int) -> bool:
        return bool(np.array_equal(a.block(0, agree), b.block(0, agree)))

    def _perturbed(self, center: ShiftPoint, e: int) -> ShiftPoint:
        rule = center.rule
        return ShiftPoint(Sturmian(rule.A, (rule.B + e) % rule.D, rule.D), center.offset)

    def random_ball(self, center, delta, rng, count):
        if not isinstance(center.rule, Sturmian):
            return super().random_ball(center, delta, rng, count)
        agree = agreement_length(delta)
        points = []
        for _ in range(count):
            scale = int(rng.integers(agree + 2, agree + 34))
            e = max(1, int(rng.integers(1, 2 ** 20)) * (center.rule.D >> (scale + 20)))
            candidate = self._perturbed(center, e)
            while not self._agrees(center, candidate, agree) and e > 1:
                e //= 2
                candidate = self._perturbed(center, e)
            points.append(candidate if self._agrees(center, candidate, agree) else center)
        return points

    def adversarial_ball(self, center, delta):
        agree = agreement_length(delta)
        points = [center]
        for q in _convergent_denominators(self.alpha, 1 << 24):
            candidate = center.advanced(q)
            if self._agrees(center, candidate, agree):
                points.append(candidate)
        return points

    def point_grid(self, count):
        return [ShiftPoint(self.rule(Fraction(j, count))) for j in range(count)]


def _even_popcount(k: int) -> int:
    if bin(k).count('1') % 2:
        k ^= 1
    return k if k else 3


class ThueMorseShift(ShiftMap):
    """Orbit closure of the Thue–Morse sequence t(n) = popcount(n) mod 2."""

    def __init__(self):
        super().__init__('thue_morse', KnownFlags(
            transitive=True, isometric=False, mixing=False,
            citation='the Thue–Morse subshift is minimal with discrete spectral part, not weakly mixing'))

    def coerce(self, p):
        if p is None:
            return ShiftPoint(ThueMorse())
        if isinstance(p, int):
            return ShiftPoint(ThueMorse(), p)
        return super().coerce(p)

    @staticmethod
    def _same_prefix_offsets(offset: int, agree: int, ks: Sequence[int]) -> List[int]:
        # t(2ᵐk + j) = t(k) ⊕ t(j) for j < 2ᵐ, so even-popcount k preserve the first `agree` symbols
        m = max(1, (offset + agree).bit_length())
        return [offset + (_even_popcount(k) << m) for k in ks]

    def random_ball(self, center, delta, rng, count):
        if not isinstance(center.rule, ThueMorse):
            return super().random_ball(center, delta, rng, count)
        agree = agreement_length(delta)
        ks = [int(k) for k in rng.integers(1, 256, size=count)]
        return [ShiftPoint(ThueMorse(), o) for o in self._same_prefix_offsets(center.offset, agree, ks)]

    def adversarial_ball(self, center, delta):
        if not isinstance(center.rule, ThueMorse):
            return super().adversarial_ball(center, delta)
        agree = agreement_length(delta)
        offsets = self._same_prefix_offsets(center.offset, agree, (3, 5, 6, 9))
        return [center] + [ShiftPoint(ThueMorse(), o) for o in offsets]

    def point_grid(self, count):
        return [ShiftPoint(ThueMorse(), 3 * j) for j in range(count)]


class Identity(MetricSystem):
    map_kind = MapKind.IDENTITY

    def __init__(self, space: Space):
        super().__init__(f"id({space.name})", space, KnownFlags(
            transitive=False, isometric=True, mixing=False,
            citation='the identity on a non-degenerate space has no dense orbit'))

    def step(self, p):
        return self.coerce(p)

    def iterate(self, p, n):
        if n < 0:
            raise ValueError(f"iterate needs n ≥ 0, got {n}")
        return self.coerce(p)


class Product(MetricSystem):
    """T₁ × T₂ with d((x,y),(x′,y′)) = √(d₁² + d₂²)."""

    space_kind = SpaceKind.PRODUCT
    map_kind = MapKind.PAIR_OF

    def __init__(self, first: MetricSystem, second: MetricSystem):
        self.name = f"prod({first.name},{second.name})"
        self.first = first
        self.second = second
        self.space = None
        self.space_kind = SpaceKind.PRODUCT
        self.flags = KnownFlags(
            transitive=first.transitive and second.transitive and (first.flags.mixing or second.flags.mixing),
            isometric=first.isometric and second.isometric,
            mixing=first.flags.mixing and second.flags.mixing,
            citation='a product of transitive systems is transitive when one factor is weakly mixing',
        )

    @property
    def diameter_squared(self) -> Optional[Fraction]:
        d1, d2 = self.first.diameter_exact, self.second.diameter_exact
        if d1 is None or d2 is None:
            return None
        return d1 * d1 + d2 * d2

    @property
    def diameter_exact(self) -> Optional[Fraction]:
        sq = self.diameter_squared
        if sq is None:
            return None
        num, den = math.isqrt(sq.numerator), math.isqrt(sq.denominator)
        if num * num == sq.numerator and den * den == sq.denominator:
            return Fraction(num, den)
        return None

    @property
    def diameter(self) -> float:
        return math.hypot(self.first.diameter, self.second.diameter)

    def coerce(self, p):
        a, b = p
        return self.first.coerce(a), self.second.coerce(b)

    def metric_exact(self, p, q):
        raise ValueError("the product metric is a square root; use metric_squared or metric")

    def metric_squared(self, p, q) -> Fraction:
        p, q = self.coerce(p), self.coerce(q)
        d1 = self.first.metric_exact(p[0], q[0])
        d2 = self.second.metric_exact(p[1], q[1])
        return d1 * d1 + d2 * d2

    def metric(self, p, q) -> float:
        return math.sqrt(self.metric_squared(p, q))

    def step(self, p):
        a, b = self.coerce(p)
        return self.first.step(a), self.second.step(b)

    def iterate(self, p, n):
        a, b = self.coerce(p)
        return self.first.iterate(a, n), self.second.iterate(b, n)

    def random_ball(self, center, delta, rng, count):
        radius = PRODUCT_COMPONENT * delta
        first = self.first.random_ball(center[0], radius, rng, count)
        second = self.second.random_ball(center[1], radius, rng, count)
        return list(zip(first, second))

    def adversarial_ball(self, center, delta):
        points = [(a, center[1]) for a in self.first.adversarial_ball(center[0], delta)]
        points += [(center[0], b) for b in self.second.adversarial_ball(center[1], delta)[1:]]
        return points

    def point_grid(self, count):
        return list(zip(self.first.point_grid(count), self.second.point_grid(count)))


# Grammar

def _angle_from_text(text: str) -> Tuple[Fraction, str]:
    """Parse an irrational rotation number: sqrtK, sqrtK-M or golden."""
    s = text.strip().replace(' ', '')
    one = 1 << ANGLE_BITS
    if s == 'golden':
        root = math.isqrt(5 << (2 * ANGLE_BITS))
        return Fraction((root - one) // 2, one), s
    m = re.fullmatch(r'sqrt(\d+)(?:-(\d+))?', s)
    if m:
        k = int(m.group(1))
        if math.isqrt(k) ** 2 == k:
            raise ValueError(f"sqrt{k} is rational; rotation numbers must be irrational")
        root = Fraction(math.isqrt(k << (2 * ANGLE_BITS)), one)
        value = root - int(m.group(2) or 0)
        if not 0 < value < 1:
            value = value % 1
        return value, s
    try:
        Fraction(s)
    except ValueError:
        raise SpecParseError(
            f"cannot parse rotation number {text!r}; expected sqrtK, sqrtK-M or golden"
        ) from None
    raise ValueError(
        f"rotation number {text!r} is rational; use sqrtK-M or golden so the transitivity flag holds"
    )


def _split_args(body: str) -> List[str]:
    parts, depth, current = [], 0, []
    for ch in body:
        if ch == ',' and depth == 0:
            parts.append(''.join(current))
            current = []
            continue
        depth += (ch == '(') - (ch == ')')
        current.append(ch)
    parts.append(''.join(current))
    return [p.strip() for p in parts]


@dataclass(frozen=True)
class SystemSpec:
    """Parsed system descriptor: a head name and its arguments."""

    head: str
    args: Tuple[Any, ...] = ()


_ALIASES = {
    'rotation': 'rot', 'rot': 'rot', 'doubling': 'doubling', 'tent': 'tent',
    'shift': 'shift', 'full_shift': 'shift', 'sturmian': 'sturmian', 'thue_morse': 'thue_morse',
    'thuemorse': 'thue_morse', 'prod': 'prod', 'product': 'prod', 'id': 'id', 'identity': 'id',
}


def parse_system(text: str) -> SystemSpec:
    s = text.strip()
    m = re.fullmatch(r'([a-z_]+)(?:\((.*)\))?', s)
    if not m or m.group(1) not in _ALIASES:
        raise SpecParseError(f"cannot parse system {text!r}; expected {SYSTEM_GRAMMAR}")
    head, body = _ALIASES[m.group(1)], m.group(2)
    if head in ('doubling', 'tent', 'shift', 'thue_morse'):
        if body:
            raise SpecParseError(f"{head} takes no arguments in {text!r}; expected {SYSTEM_GRAMMAR}")
        return SystemSpec(head)
    if not body:
        raise SpecParseError(f"{head} needs arguments in {text!r}; expected {SYSTEM_GRAMMAR}")
    if head == 'prod':
        args = _split_args(body)
        if len(args) != 2:
            raise SpecParseError(f"prod takes two systems, got {text!r}")
        return SystemSpec(head, (parse_system(args[0]), parse_system(args[1])))
    if head == 'id':
        if body.strip() not in _SPACES:
            raise SpecParseError(f"id() takes one of {sorted(_SPACES)}, got {body!r}")
        return SystemSpec(head, (body.strip(),))
    return SystemSpec(head, (body.strip(),))


def make_system(spec: Union[str, SystemSpec]) -> MetricSystem:
    """
    Build a system from its descriptor.

    Raises:
        SpecParseError: the descriptor is not in the grammar.
        ValueError: a rotation number is rational.
    """
    if isinstance(spec, str):
        spec = parse_system(spec)
    head = spec.head
    if head == 'rot':
        alpha, label = _angle_from_text(spec.args[0])
        return Rotation(alpha, label)
    if head == 'sturmian':
        alpha, label = _angle_from_text(spec.args[0])
        return SturmianShift(alpha, label)
    if head == 'doubling':
        return Doubling()
    if head == 'tent':
        return Tent()
    if head == 'shift':
        return ShiftMap()
    if head == 'thue_morse':
        return ThueMorseShift()
    if head == 'id':
        return Identity(_SPACES[spec.args[0]]())
    if head == 'prod':
        return Product(make_system(spec.args[0]), make_system(spec.args[1]))
    raise SpecParseError(f"unknown system head {head!r}; expected {SYSTEM_GRAMMAR}")


def iterate(sys: MetricSystem, p: Point, n: int) -> Point:
    return sys.iterate(p, n)


def default_point(sys: MetricSystem) -> Point:
    """A canonical starting point (grid point 0)."""
    return sys.point_grid(1)[0]


def sample_ball(sys: MetricSystem, center: Point, delta: Union[float, Fraction], seed: int,
                count: int, mode: Union[SampleMode, str] = SampleMode.RANDOM) -> List[Point]:
    """
    `count` points of B(center, δ); adversarial mode appends structured
    offsets that are known to separate orbits.

    Raises:
        ValueError: δ ≤ 0.
    """
    mode = SampleMode(mode)
    delta = as_fraction(delta)
    if delta <= 0:
        raise ValueError(f"ball radius must be positive, got {delta}")
    diameter = sys.diameter_exact
    if diameter is not None and delta > diameter:
        delta = diameter
    center = sys.coerce(center)
    rng = _rng(seed, count, delta.denominator % (2 ** 32))
    points = sys.random_ball(center, delta, rng, count)
    if mode is SampleMode.ADVERSARIAL:
        points = points + sys.adversarial_ball(center, delta)
    bad = [p for p in points if not sys.metric(center, p) < float(delta)]
    if bad:
        logging.debug('[sample_ball] %s: dropped %d points outside B(x, %s)', sys.name, len(bad), delta)
        points = [p for p in points if sys.metric(center, p) < float(delta)]
    return points
