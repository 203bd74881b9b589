"""
Factor maps between zoo systems and empirical checks that ℱ-equicontinuity
passes from a system to its open factors.

Openness is never inferred from samples: every FactorMap carries the
openness its construction guarantees, with a note saying why.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from config.settings import ProbeConfig
from core.family import FamilyDescriptor, SpecParseError, Verdict, fails, holds
from services.classify.equicontinuity import f_equi_point_grid, f_equicontinuity
from services.classify.probe import HypothesisError, describe_point, family_label
from services.dynamics.space import (
    KnownFlags,
    MetricSystem,
    Point,
    Product,
    ShiftMap,
    make_system,
    parse_system,
)
from services.dynamics.symbolic import Periodic, ShiftPoint, SlidingBlock

FACTOR_GRAMMAR = "proj1(<prod spec>) | proj2(<prod spec>) | sbc(r=<n>,table=<bits>[,source=<spec>])"
COMMUTATION_TOLERANCE = 1e-10
XOR_NEXT_TABLE = '00111100'


class OpennessKind(str, Enum):
    OPEN = 'Open'
    SEMI_OPEN = 'SemiOpen'
    OPEN_AT_POINTS = 'OpenAtPoints'


@dataclass(frozen=True)
class Openness:
    kind: OpennessKind
    points: Tuple[Point, ...] = ()

    def admits(self, p: Optional[Point] = None) -> bool:
        """True when the preservation argument may be applied at p (or everywhere if p is None)."""
        if self.kind is OpennessKind.OPEN:
            return True
        if self.kind is OpennessKind.OPEN_AT_POINTS:
            return p is not None and p in self.points
        return False


@dataclass(frozen=True)
class FactorMap:
    source: MetricSystem
    target: MetricSystem
    point_map: Callable[[Point], Point]
    openness: Openness
    note: str = ''
    name: str = field(default='')

    def __call__(self, p: Point) -> Point:
        return self.point_map(self.source.coerce(p))

    def commutation_defect(self, p: Point) -> float:
        """d(S(π p), π(T p)); zero for a factor map."""
        p = self.source.coerce(p)
        return self.target.metric(self.target.step(self(p)), self(self.source.step(p)))


def projection_factor(prod: MetricSystem, which: str = 'first') -> FactorMap:
    """
    Coordinate projection of a product system.

    Raises:
        ValueError: prod is not a product, or `which` is not first/second.
    """
    if not isinstance(prod, Product):
        raise ValueError(f"projection_factor needs a product system, got {prod.name}")
    if which not in ('first', 'second'):
        raise ValueError(f"which must be 'first' or 'second', got {which!r}")
    index = 0 if which == 'first' else 1
    target = prod.first if index == 0 else prod.second
    return FactorMap(
        source=prod,
        target=target,
        point_map=lambda p: p[index],
        openness=Openness(OpennessKind.OPEN),
        note='coordinate projections of a product are open maps',
        name=f"proj{index + 1}({prod.name})",
    )


class ImageShift(ShiftMap):
    """
    Image of a shift system under a sliding block code.

    Points are ShiftPoints over SlidingBlock rules. A ball of radius δ around
    an image point is sampled as the image of the source ball of radius
    δ·4^(-r): agreeing on k + 2r source symbols gives agreement on k image
    symbols.
    """

    def __init__(self, source: MetricSystem, table: str, radius: int, flags: KnownFlags):
        super().__init__(f"sbc(r={radius},table={table},source={source.name})", flags)
        self.source = source
        self.table = table
        self.radius = radius

    def image(self, p: ShiftPoint) -> ShiftPoint:
        p = self.source.coerce(p)
        return ShiftPoint(SlidingBlock(self.table, self.radius, p.rule), p.offset)

    def _preimage(self, center: ShiftPoint) -> Optional[ShiftPoint]:
        rule = center.rule
        if isinstance(rule, SlidingBlock) and rule.table == self.table and rule.radius == self.radius:
            return ShiftPoint(rule.inner, center.offset)
        return None

    def _source_radius(self, delta: Fraction) -> Fraction:
        return delta / 4 ** self.radius

    def random_ball(self, center, delta, rng, count):
        upstairs = self._preimage(center)
        if upstairs is None:
            return super().random_ball(center, delta, rng, count)
        points = self.source.random_ball(upstairs, self._source_radius(delta), rng, count)
        return [self.image(p) for p in points]

    def adversarial_ball(self, center, delta):
        upstairs = self._preimage(center)
        if upstairs is None:
            return super().adversarial_ball(center, delta)
        points = self.source.adversarial_ball(upstairs, self._source_radius(delta))
        return [center] + [self.image(p) for p in points[1:]]

    def point_grid(self, count):
        return [self.image(p) for p in self.source.point_grid(count)]


def _is_identity_table(table: str, radius: int) -> bool:
    shift = 2 * radius
    return all(int(bit) == (i >> shift) & 1 for i, bit in enumerate(table))


def sliding_block_factor(table: str, radius: int, source: Optional[MetricSystem] = None) -> FactorMap:
    """
    Factor of a shift system given by a radius-r block code.

    The table lists the output symbol for each (2r+1)-block read as a binary
    number, leftmost symbol most significant. Commutation holds by
    construction. Identity and constant codes are open; other codes are
    admitted without an openness guarantee.

    Raises:
        ValueError: bad table, or the source is not a shift system.
    """
    source = source or make_system('shift')
    if not isinstance(source, ShiftMap):
        raise ValueError(f"sliding block codes act on shift systems, got {source.name}")
    SlidingBlock(table, radius, Periodic('0'))
    name = f"sbc(r={radius},table={table})"
    if _is_identity_table(table, radius):
        return FactorMap(source, source, lambda p: p, Openness(OpennessKind.OPEN),
                         note='the identity code is a homeomorphism', name=name)
    constant = len(set(table)) == 1
    if constant:
        flags = KnownFlags(transitive=True, isometric=True, mixing=True,
                           citation='a one-point system is trivially minimal')
        openness = Openness(OpennessKind.OPEN)
        note = 'a map onto a one-point space is open'
    else:
        flags = KnownFlags(transitive=source.transitive, isometric=False, mixing=source.flags.mixing,
                           citation='factors of transitive (mixing) systems are transitive (mixing)')
        openness = Openness(OpennessKind.OPEN_AT_POINTS, ())
        note = 'openness of this block code is unknown'
    target = ImageShift(source, table, radius, flags)
    return FactorMap(source, target, target.image, openness, note=note, name=name)


def xor_next_factor(source: Optional[MetricSystem] = None) -> FactorMap:
    """x_n ⊕ x_{n+1}; sends Thue–Morse to the period-doubling sequence."""
    return sliding_block_factor(XOR_NEXT_TABLE, 1, source or make_system('thue_morse'))


def parse_factor(text: str) -> FactorMap:
    """
    Build a factor from its descriptor.

    Raises:
        SpecParseError: the descriptor is not in the grammar.
    """
    s = text.strip()
    m = re.fullmatch(r'proj([12])\((.+)\)', s)
    if m:
        spec = parse_system(m.group(2))
        if spec.head != 'prod':
            raise SpecParseError(f"{s!r}: projections need a prod(...) system; expected {FACTOR_GRAMMAR}")
        return projection_factor(make_system(spec), 'first' if m.group(1) == '1' else 'second')
    m = re.fullmatch(r'sbc\(r=(\d+),\s*table=([01]+)(?:,\s*source=(.+))?\)', s)
    if m:
        source = make_system(m.group(3)) if m.group(3) else None
        try:
            return sliding_block_factor(m.group(2), int(m.group(1)), source)
        except ValueError as e:
            raise SpecParseError(f"bad block code in {s!r}: {e}") from e
    raise SpecParseError(f"cannot parse factor {text!r}; expected {FACTOR_GRAMMAR}")


def commutation_check(fm: FactorMap, points: Sequence[Point]) -> float:
    """Largest commutation defect over the points."""
    return max((fm.commutation_defect(p) for p in points), default=0.0)


def commutes(fm: FactorMap, points: Sequence[Point]) -> bool:
    return commutation_check(fm, points) <= COMMUTATION_TOLERANCE


def preservation_check(fm: FactorMap, f: FamilyDescriptor, cfg: Optional[ProbeConfig] = None) -> Verdict:
    """
    ℱ-equicontinuity must pass to the factor: at sampled points whose source
    verdict holds the image point may not fail, and a globally holding source
    may not have a failing target.

    Raises:
        HypothesisError: the factor's openness does not admit the check.
    """
    cfg = cfg or ProbeConfig()
    if fm.openness.admits():
        points = fm.source.point_grid(cfg.point_grid)
    else:
        points = [p for p in fm.openness.points if fm.openness.admits(p)]
    if not points:
        raise HypothesisError(
            f"preservation needs an open factor or known points of openness; {fm.name or fm.target.name} "
            f"is {fm.openness.kind.value} ({fm.note})"
        )
    tag = f"{fm.name}|{family_label(f)}"
    rows: List[dict] = []
    premises = 0
    for x in points:
        src = f_equi_point_grid(fm.source, x, f, cfg).verdict
        row = {'point': describe_point(fm.source.coerce(x)), 'source': src.outcome.value}
        if src.holds:
            premises += 1
            tgt = f_equi_point_grid(fm.target, fm(x), f, cfg).verdict
            row['target'] = tgt.outcome.value
            if tgt.fails:
                rows.append(row)
                logging.error('[%s] ❌ image of an equicontinuous point is refuted: %s', tag, row)
                return fails({'pointwise': rows, 'violation': row}, cfg.horizon)
        rows.append(row)

    witness = {'pointwise': rows}
    if fm.openness.admits():
        src_global = f_equicontinuity(fm.source, f, cfg.eps_grid, cfg).verdict
        witness['source_global'] = src_global.outcome.value
        if src_global.holds:
            premises += 1
            tgt_global = f_equicontinuity(fm.target, f, cfg.eps_grid, cfg).verdict
            witness['target_global'] = tgt_global.outcome.value
            if tgt_global.fails:
                logging.error('[%s] ❌ equicontinuous source with a refuted factor', tag)
                return fails(witness, cfg.horizon)
    if premises == 0:
        logging.info('[%s] no source point held; preservation is vacuous', tag)
        return holds({**witness, 'not_applicable': True}, cfg.horizon)
    logging.info('[%s] ✓ preserved on %d premises', tag, premises)
    return holds(witness, cfg.horizon)
