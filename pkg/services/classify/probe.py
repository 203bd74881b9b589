"""
Shared probing machinery for the classify operations: reports, δ grids,
ball sampling and pair sweeps.

Quantifiers become grids: ε over cfg.eps_grid, δ over ε/2ʲ, y over sampled
ball points with structured worst-case points appended. A Holds or Fails
verdict is only returned when the sampled evidence is one-sided.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from config.settings import ProbeConfig
from core import zset
from core.family import (
    FamilyDescriptor,
    Verdict,
    as_python,
    contains,
    fails,
    holds,
    inconclusive,
    to_string,
)
from core.zset import WindowSet
from services.dynamics.orbit import SeparationTrace, hitting_set, separation_trace
from services.dynamics.space import MetricSystem, Point, SampleMode, as_fraction, sample_ball
from services.dynamics.symbolic import DyadicOfAngle, Periodic, ShiftPoint, Spliced, Sturmian, ThueMorse


class HypothesisError(ValueError):
    """A theorem-shaped check was asked to run without its hypothesis."""


@dataclass(frozen=True)
class EquiReport:
    notion: str
    verdict: Verdict
    delta_found: Optional[float] = None
    samples: Dict[str, int] = field(default_factory=dict)
    config_echo: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict.holds and not (self.delta_found and self.delta_found > 0):
            raise ValueError(f"{self.notion}: a Holds report needs a positive delta_found")

    def as_dict(self) -> Dict[str, Any]:
        return as_python({
            'notion': self.notion,
            'verdict': self.verdict.outcome.value,
            'witness': self.verdict.witness,
            'horizon': self.verdict.horizon_used,
            'delta_found': self.delta_found,
            'samples': self.samples,
            'config': self.config_echo,
        })


@dataclass(frozen=True)
class SensReport:
    notion: str
    verdict: Verdict
    witness_sets: List[Dict[str, Any]] = field(default_factory=list)
    config_echo: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return as_python({
            'notion': self.notion,
            'verdict': self.verdict.outcome.value,
            'witness': self.verdict.witness,
            'horizon': self.verdict.horizon_used,
            'witness_sets': self.witness_sets,
            'config': self.config_echo,
        })


def describe_point(p: Point) -> str:
    """Short stable text for a point, used in notions and witnesses."""
    if isinstance(p, tuple):
        return f"({describe_point(p[0])},{describe_point(p[1])})"
    if isinstance(p, ShiftPoint):
        rule = p.rule
        if isinstance(rule, Periodic):
            body = f"Periodic({rule.word})"
        elif isinstance(rule, Sturmian):
            body = f"Sturmian(beta={Fraction(rule.B, rule.D)})"
        elif isinstance(rule, ThueMorse):
            body = 'ThueMorse'
        elif isinstance(rule, DyadicOfAngle):
            body = f"Dyadic({rule.angle})"
        elif isinstance(rule, Spliced):
            body = f"Spliced({rule.prefix},{type(rule.tail).__name__})"
        else:
            body = type(rule).__name__
        return f"{body}@{p.offset}"
    return str(p)


def set_summary(w: WindowSet, max_rle: int = 256) -> Dict[str, Any]:
    summary = {'count': w.count(), 'horizon': w.horizon, 'tail_hint': w.tail_hint.describe()}
    rle = zset.to_rle(w)
    if len(rle) <= max_rle:
        summary['rle'] = rle
    return summary


def delta_grid(sys: MetricSystem, epsilon: float, cfg: ProbeConfig) -> List[Fraction]:
    """{ε, ε/2, …} for cfg.delta_steps steps, stopping below delta_min; clamped to diam(X)."""
    eps = as_fraction(epsilon)
    diameter = sys.diameter_exact if sys.diameter_exact is not None else as_fraction(sys.diameter)
    grid = []
    for j in range(cfg.delta_steps):
        delta = eps / 2 ** j
        if delta < as_fraction(cfg.delta_min):
            break
        grid.append(min(delta, diameter))
    return grid or [min(eps, diameter)]


def probe_seed(cfg: ProbeConfig, *salt: int) -> int:
    seed = cfg.seed
    for s in salt:
        seed = (seed * 1_000_003 + s) % (2 ** 63)
    return seed


def ball_points(sys: MetricSystem, x: Point, delta: Fraction, cfg: ProbeConfig,
                *salt: int) -> Tuple[List[Point], List[Point]]:
    """(random, adversarial) points of B(x, δ); the adversarial list starts with x."""
    random_points = sample_ball(sys, x, delta, probe_seed(cfg, *salt), cfg.samples, SampleMode.RANDOM)
    everything = sample_ball(sys, x, delta, probe_seed(cfg, *salt), 0, SampleMode.ADVERSARIAL)
    return random_points, everything


@dataclass
class PairSweep:
    """Outcome of one verdict function over a list of pairs."""

    checked: int = 0
    held: int = 0
    failed: int = 0
    first_failure: Optional[Dict[str, Any]] = None

    @property
    def all_hold(self) -> bool:
        return self.checked > 0 and self.held == self.checked

    @property
    def any_fail(self) -> bool:
        return self.failed > 0

    def merge(self, other: 'PairSweep') -> 'PairSweep':
        return PairSweep(
            self.checked + other.checked,
            self.held + other.held,
            self.failed + other.failed,
            self.first_failure or other.first_failure,
        )

    def as_dict(self) -> Dict[str, Any]:
        out = {'checked': self.checked, 'held': self.held, 'failed': self.failed}
        if self.first_failure:
            out['first_failure'] = self.first_failure
        return out


PairVerdict = Callable[[SeparationTrace], Verdict]


def sweep_pairs(sys: MetricSystem, pairs: Iterable[Tuple[Point, Point]], judge: PairVerdict,
                horizon: int, stop_on_fail: bool = True) -> PairSweep:
    sweep = PairSweep()
    for y, z in pairs:
        trace = separation_trace(sys, y, z, horizon)
        v = judge(trace)
        sweep.checked += 1
        if v.holds:
            sweep.held += 1
        elif v.fails:
            sweep.failed += 1
            if sweep.first_failure is None:
                sweep.first_failure = {
                    'pair': [describe_point(y), describe_point(z)],
                    'witness': v.witness,
                }
            if stop_on_fail:
                break
    return sweep


def family_judge(f: FamilyDescriptor, epsilon: float, cfg: ProbeConfig) -> PairVerdict:
    """Pair verdict: N((y, z), Δ_ε) ∈ f."""
    def judge(trace: SeparationTrace) -> Verdict:
        return contains(f, hitting_set(trace, epsilon, closed=False), cfg.policy)
    return judge


def center_pairs(x: Point, points: Sequence[Point]) -> List[Tuple[Point, Point]]:
    return [(x, y) for y in points]


def ball_pairs(random_points: Sequence[Point], adversarial: Sequence[Point],
               cap: int) -> List[Tuple[Point, Point]]:
    """Adversarial combinations plus consecutive random pairs (at most `cap` of those)."""
    pairs = [(a, b) for i, a in enumerate(adversarial) for b in adversarial[i + 1:]]
    consecutive = list(zip(random_points, random_points[1:]))[:cap]
    return pairs + consecutive


def isometry_note(sys: MetricSystem, verdict: Verdict, expect_holds: bool, notion: str) -> Verdict:
    """Annotate verdicts on isometric systems with whether the generic pipeline matched the shortcut."""
    if not sys.isometric:
        return verdict
    agrees = verdict.holds if expect_holds else verdict.fails
    if not agrees:
        logging.error('[%s] ❌ isometric system %s: generic pipeline returned %s',
                      notion, sys.name, verdict.outcome.value)
    if verdict.inconclusive and not verdict.witness:
        return verdict
    return verdict.with_witness(isometry_shortcut_agrees=agrees)


def family_label(f: FamilyDescriptor) -> str:
    return to_string(f)


PairBuilder = Callable[[Point, List[Point], List[Point]], List[Tuple[Point, Point]]]


def point_pairs(x: Point, random_points: List[Point], adversarial: List[Point]) -> List[Tuple[Point, Point]]:
    """(x, y) for every sampled y ≠ x, structured points first."""
    return center_pairs(x, adversarial[1:] + random_points)


@dataclass
class DeltaSearch:
    """Result of searching the δ grid at one ε."""

    epsilon: float
    delta: Optional[Fraction] = None
    refuted: bool = False
    per_delta: List[Dict[str, Any]] = field(default_factory=list)
    pairs_checked: int = 0

    @property
    def held(self) -> bool:
        return self.delta is not None

    def witness(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {'epsilon': self.epsilon, 'per_delta': self.per_delta}
        if self.held:
            out['delta'] = float(self.delta)
        return out


def delta_search(sys: MetricSystem, centers: Sequence[Point], epsilon: float, cfg: ProbeConfig,
                 judge: PairVerdict, pairs_for: PairBuilder = point_pairs, salt: int = 0) -> DeltaSearch:
    """
    ∃δ ∀ centers ∀ sampled pairs: judge holds.

    Holds at the first δ where every pair held; refuted when every δ saw a
    failing pair.
    """
    search = DeltaSearch(float(epsilon))
    refuted_everywhere = True
    for j, delta in enumerate(delta_grid(sys, epsilon, cfg)):
        sweep = PairSweep()
        for i, x in enumerate(centers):
            random_points, adversarial = ball_points(sys, x, delta, cfg, salt, i, j)
            sweep = sweep.merge(sweep_pairs(sys, pairs_for(x, random_points, adversarial), judge, cfg.horizon))
            if sweep.any_fail:
                break
        search.pairs_checked += sweep.checked
        search.per_delta.append({'delta': float(delta), **sweep.as_dict()})
        logging.debug('[delta_search] %s ε=%s δ=%s: %d/%d held', sys.name, epsilon, delta,
                      sweep.held, sweep.checked)
        if sweep.all_hold:
            search.delta = delta
            return search
        refuted_everywhere = refuted_everywhere and sweep.any_fail
    search.refuted = refuted_everywhere
    return search


def search_verdict(searches: Sequence[DeltaSearch], horizon: int) -> Tuple[Verdict, Optional[float]]:
    """
    Combine per-ε searches: Holds iff every ε found a δ, Fails iff some ε was
    refuted at every δ. Returns the verdict and the smallest δ found.
    """
    witness = {'per_epsilon': [s.witness() for s in searches]}
    refuted = [s for s in searches if s.refuted]
    if refuted:
        witness['refuted_epsilon'] = refuted[0].epsilon
        return fails(witness, horizon), None
    if searches and all(s.held for s in searches):
        return holds(witness, horizon), float(min(s.delta for s in searches))
    return inconclusive(witness, horizon), None


def sample_counts(searches: Sequence[DeltaSearch], centers: int) -> Dict[str, int]:
    return {
        'pairs': sum(s.pairs_checked for s in searches),
        'deltas': sum(len(s.per_delta) for s in searches),
        'centers': centers,
    }
