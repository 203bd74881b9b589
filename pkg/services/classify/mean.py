"""
Mean equicontinuity, mean sensitivity and mean-L-stability.

The Birkhoff average of d(Tⁿx, Tⁿy) replaces family membership. Eventually
periodic traces are decided by their exact limit; otherwise the lim sup proxy
must clear ε by the policy margin.
"""
import logging
from typing import Optional, Tuple

from config.settings import ProbeConfig
from core import zset
from core.family import Verdict, fails, holds, inconclusive
from services.classify.probe import (
    EquiReport,
    SensReport,
    ball_points,
    delta_search,
    describe_point,
    isometry_note,
    sample_counts,
    search_verdict,
)
from services.classify.sensitivity import open_set_probes
from services.dynamics.orbit import SeparationTrace, birkhoff_limit, birkhoff_limsup, hitting_set, separation_trace
from services.dynamics.space import MetricSystem, Point, as_fraction


def birkhoff_value(trace: SeparationTrace) -> Tuple[float, bool]:
    """(value, exact): the exact Birkhoff limit when known, else the lim sup proxy."""
    limit = birkhoff_limit(trace)
    if limit is not None:
        return limit, True
    return birkhoff_limsup(trace), False


def mean_judge(epsilon: float, cfg: ProbeConfig):
    """Pair verdict: lim sup (1/n) Σ d(Tⁱy, Tⁱz) < ε."""
    margin = cfg.margin

    def judge(trace: SeparationTrace) -> Verdict:
        value, exact = birkhoff_value(trace)
        witness = {'birkhoff': value, 'exact': exact, 'epsilon': epsilon}
        if exact:
            return (holds if value < epsilon else fails)(witness, trace.horizon)
        if value < epsilon - margin:
            return holds(witness, trace.horizon)
        if value > epsilon + margin:
            return fails(witness, trace.horizon)
        return inconclusive(witness, trace.horizon)
    return judge


def _separates(trace: SeparationTrace, epsilon: float, margin: float) -> Optional[bool]:
    """True if the pair's lim sup exceeds ε, False if it stays at or below ε, None if unclear."""
    value, exact = birkhoff_value(trace)
    if exact:
        return value > epsilon
    if value > epsilon + margin:
        return True
    if value < epsilon - margin:
        return False
    return None


def _bad_time_density(trace: SeparationTrace, epsilon: float, cfg: ProbeConfig) -> Tuple[float, bool, float]:
    """Upper density of {n : d ≥ ε}; (value, exact, convergence spread)."""
    bad = zset.complement(hitting_set(trace, epsilon, closed=False))
    density = bad.tail_hint.density()
    if density is not None:
        return float(density), True, 0.0
    profile = zset.density_profile(bad, cfg.policy.banach_min_window(bad.horizon))
    return profile.upper_est, False, profile.convergence_spread


def l_stable_judge(epsilon: float, cfg: ProbeConfig):
    """Pair verdict: D̄({n : d(Tⁿy, Tⁿz) ≥ ε}) < ε."""
    margin = cfg.margin

    def judge(trace: SeparationTrace) -> Verdict:
        value, exact, spread = _bad_time_density(trace, epsilon, cfg)
        witness = {'bad_time_density': value, 'exact': exact, 'epsilon': epsilon}
        if exact:
            return (holds if value < epsilon else fails)(witness, trace.horizon)
        if value < epsilon - margin:
            return holds(witness, trace.horizon)
        if value > epsilon + margin and spread < margin:
            return fails(witness, trace.horizon)
        return inconclusive(witness, trace.horizon)
    return judge


def _global(sys: MetricSystem, cfg: ProbeConfig, notion: str, make_judge) -> EquiReport:
    centers = [sys.coerce(p) for p in sys.point_grid(cfg.point_grid)]
    searches = []
    for epsilon in cfg.eps_grid:
        search = delta_search(sys, centers, epsilon, cfg, make_judge(epsilon, cfg), salt=3)
        searches.append(search)
        if search.refuted:
            break
    verdict, delta = search_verdict(searches, cfg.horizon)
    verdict = isometry_note(sys, verdict, expect_holds=True, notion=notion)
    logging.info('[%s] %s → %s', notion, sys.name, verdict.outcome.value)
    return EquiReport(notion, verdict, delta, sample_counts(searches, len(centers)), cfg.echo())


def mean_equicontinuity(sys: MetricSystem, cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """∀ε ∃δ: d(x, y) < δ ⟹ lim sup of the Birkhoff separation < ε, on the point grid."""
    return _global(sys, cfg or ProbeConfig(), 'Mean', mean_judge)


def mean_l_stable(sys: MetricSystem, cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """∀ε ∃δ: d(x, y) < δ ⟹ the ε-separated times have upper density < ε."""
    return _global(sys, cfg or ProbeConfig(), 'MeanLStable', l_stable_judge)


def mean_equi_point(sys: MetricSystem, x: Point, cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """Mean equicontinuity at the single point x, over the ε grid."""
    cfg = cfg or ProbeConfig()
    x = sys.coerce(x)
    searches = []
    for epsilon in cfg.eps_grid:
        search = delta_search(sys, [x], epsilon, cfg, mean_judge(epsilon, cfg), salt=4)
        searches.append(search)
        if search.refuted:
            break
    verdict, delta = search_verdict(searches, cfg.horizon)
    return EquiReport(f"MeanPoint({describe_point(x)})", verdict, delta, sample_counts(searches, 1), cfg.echo())


def mean_sensitivity(sys: MetricSystem, epsilon: float, cfg: Optional[ProbeConfig] = None) -> SensReport:
    """
    Every probed ball must contain a pair whose Birkhoff separation has
    lim sup > ε. A ball where every sampled pair stays below refutes.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    cfg = cfg or ProbeConfig()
    notion = f"MeanSens({epsilon})"
    witness_sets = []
    outcomes = []
    for i, (center, radius) in enumerate(open_set_probes(sys, cfg)):
        center = sys.coerce(center)
        random_points, adversarial = ball_points(sys, center, as_fraction(radius), cfg, 5, i)
        pairs = [(center, y) for y in adversarial[1:] + random_points]
        pairs += list(zip(random_points, random_points[1:]))
        best = None
        outcome = False
        for y, z in pairs:
            trace = separation_trace(sys, y, z, cfg.horizon)
            separated = _separates(trace, epsilon, cfg.margin)
            value, _ = birkhoff_value(trace)
            best = value if best is None else max(best, value)
            if separated:
                outcome = True
                break
            if separated is None:
                outcome = None
        outcomes.append(outcome)
        witness_sets.append({
            'open_set': f"B({describe_point(center)}, {radius})",
            'birkhoff_max': best,
            'pairs': len(pairs),
            'outcome': {True: 'Holds', False: 'Fails', None: 'Inconclusive'}[outcome],
        })
        if outcome is False:
            break

    witness = {'probes': len(outcomes), 'epsilon': epsilon}
    if outcomes[-1] is False:
        verdict = fails({**witness, 'refuting_set': witness_sets[-1]['open_set']}, cfg.horizon)
    elif all(o is True for o in outcomes):
        verdict = holds(witness, cfg.horizon)
    else:
        verdict = inconclusive(witness, cfg.horizon)
    verdict = isometry_note(sys, verdict, expect_holds=False, notion=notion)
    logging.info('[%s] %s → %s', notion, sys.name, verdict.outcome.value)
    return SensReport(notion, verdict, witness_sets, cfg.echo())
