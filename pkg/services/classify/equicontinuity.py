"""
ℱ-equicontinuity: points, the Eq_ε^ℱ sets, the global notion and the
search for an ℱ-equicontinuous point in a transitive system.
"""
import logging
from typing import List, Optional, Sequence

from config.settings import ProbeConfig
from core.family import FamilyDescriptor, fails, holds, inconclusive, is_filter
from services.classify.probe import (
    EquiReport,
    HypothesisError,
    ball_pairs,
    delta_search,
    describe_point,
    family_judge,
    family_label,
    isometry_note,
    sample_counts,
    search_verdict,
)
from services.dynamics.space import MetricSystem, Point


def _check_epsilon(epsilon: float) -> None:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")


def f_equi_point(sys: MetricSystem, x: Point, f: FamilyDescriptor, epsilon: float,
                 cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """
    Is x an ℱ-equicontinuous point at scale ε?

    For each δ in {ε, ε/2, …} the ball B(x, δ) is sampled (random points plus
    structured offsets) and N((x, y), Δ_ε) is tested for membership in f.

    Args:
        sys: The system.
        x: Center point.
        f: Family the hitting sets must belong to.
        epsilon: Separation scale, > 0.
        cfg: Sampling configuration.

    Returns:
        EquiReport with notion FEquiPoint(f, x).
    """
    _check_epsilon(epsilon)
    cfg = cfg or ProbeConfig()
    x = sys.coerce(x)
    search = delta_search(sys, [x], epsilon, cfg, family_judge(f, epsilon, cfg))
    verdict, delta = search_verdict([search], cfg.horizon)
    notion = f"FEquiPoint({family_label(f)},{describe_point(x)})"
    logging.debug('[%s] %s ε=%s → %s', notion, sys.name, epsilon, verdict.outcome.value)
    return EquiReport(notion, verdict, delta, sample_counts([search], 1), cfg.echo())


def eq_eps_f_member(sys: MetricSystem, x: Point, epsilon: float, f: FamilyDescriptor,
                    cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """x ∈ Eq_ε^ℱ: some ball around x whose pairs (y, z) all have N((y, z), Δ_ε) ∈ f."""
    _check_epsilon(epsilon)
    cfg = cfg or ProbeConfig()
    x = sys.coerce(x)

    def pairs_for(center, random_points, adversarial):
        return ball_pairs(random_points, adversarial, cfg.samples)

    search = delta_search(sys, [x], epsilon, cfg, family_judge(f, epsilon, cfg), pairs_for, salt=1)
    verdict, delta = search_verdict([search], cfg.horizon)
    notion = f"EqEpsF({family_label(f)},{epsilon},{describe_point(x)})"
    return EquiReport(notion, verdict, delta, sample_counts([search], 1), cfg.echo())


def f_equicontinuity(sys: MetricSystem, f: FamilyDescriptor, eps_grid: Optional[Sequence[float]] = None,
                     cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """
    Global ℱ-equicontinuity: for every ε in the grid one δ must serve every
    center of the point grid.
    """
    cfg = cfg or ProbeConfig()
    eps_grid = list(eps_grid or cfg.eps_grid)
    if not eps_grid:
        raise ValueError("eps_grid must not be empty")
    if any(b > a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError(f"eps_grid must be descending, got {eps_grid}")
    centers = [sys.coerce(p) for p in sys.point_grid(cfg.point_grid)]
    searches = []
    for epsilon in eps_grid:
        _check_epsilon(epsilon)
        search = delta_search(sys, centers, epsilon, cfg, family_judge(f, epsilon, cfg))
        searches.append(search)
        if search.refuted:
            break
    verdict, delta = search_verdict(searches, cfg.horizon)
    notion = f"FEqui({family_label(f)})"
    verdict = isometry_note(sys, verdict, expect_holds=True, notion=notion)
    logging.info('[%s] %s → %s', notion, sys.name, verdict.outcome.value)
    return EquiReport(notion, verdict, delta, sample_counts(searches, len(centers)), cfg.echo())


def f_equi_point_grid(sys: MetricSystem, x: Point, f: FamilyDescriptor, cfg: ProbeConfig) -> EquiReport:
    """f_equi_point over cfg.eps_grid: Holds iff every ε holds, Fails iff one fails."""
    reports = []
    for epsilon in cfg.eps_grid:
        report = f_equi_point(sys, x, f, epsilon, cfg)
        reports.append(report)
        if report.verdict.fails:
            break
    per_eps = [{'epsilon': eps, 'outcome': r.verdict.outcome.value, 'delta': r.delta_found}
               for eps, r in zip(cfg.eps_grid, reports)]
    notion = f"FEquiPoint({family_label(f)},{describe_point(x)})"
    witness = {'point': describe_point(x), 'per_epsilon': per_eps}
    if reports[-1].verdict.fails:
        return EquiReport(notion, fails(witness, cfg.horizon), None, {'epsilons': len(reports)}, cfg.echo())
    if all(r.verdict.holds for r in reports):
        delta = min(r.delta_found for r in reports)
        return EquiReport(notion, holds(witness, cfg.horizon), delta, {'epsilons': len(reports)}, cfg.echo())
    return EquiReport(notion, inconclusive(witness, cfg.horizon), None, {'epsilons': len(reports)}, cfg.echo())


def almost_f_equicontinuity(sys: MetricSystem, f: FamilyDescriptor,
                            cfg: Optional[ProbeConfig] = None) -> EquiReport:
    """
    Search the point grid for an ℱ-equicontinuous point.

    Holds as soon as one grid point holds at every ε; Fails only when every
    grid point is refuted at some ε.
    """
    cfg = cfg or ProbeConfig()
    points: List[dict] = []
    all_fail = True
    for x in sys.point_grid(cfg.point_grid):
        report = f_equi_point_grid(sys, x, f, cfg)
        points.append({'point': describe_point(x), 'outcome': report.verdict.outcome.value})
        if report.verdict.holds:
            witness = {'equicontinuous_point': describe_point(x), 'points': points,
                       'per_epsilon': report.verdict.witness['per_epsilon']}
            return EquiReport(f"AlmostFEqui({family_label(f)})", holds(witness, cfg.horizon),
                              report.delta_found, {'points': len(points)}, cfg.echo())
        all_fail = all_fail and report.verdict.fails
    witness = {'points': points}
    verdict = fails(witness, cfg.horizon) if all_fail else inconclusive(witness, cfg.horizon)
    return EquiReport(f"AlmostFEqui({family_label(f)})", verdict, None, {'points': len(points)}, cfg.echo())


def filter_intersection_check(sys: MetricSystem, f: FamilyDescriptor, x: Point,
                              cfg: Optional[ProbeConfig] = None):
    """
    For a filter f, the point verdict over the ε grid must not contradict
    membership of x in every Eq_ε^ℱ.

    Raises:
        HypothesisError: f is not a filter.
    """
    if not is_filter(f):
        raise HypothesisError(
            f"filter_intersection_check needs a filter family (ℱ·ℱ ⊂ ℱ); {family_label(f)} is not one"
        )
    cfg = cfg or ProbeConfig()
    x = sys.coerce(x)
    point = f_equi_point_grid(sys, x, f, cfg).verdict
    members = []
    for epsilon in cfg.eps_grid:
        members.append(eq_eps_f_member(sys, x, epsilon, f, cfg).verdict)
        if members[-1].fails:
            break
    if any(m.fails for m in members):
        member_outcome = 'Fails'
    elif all(m.holds for m in members):
        member_outcome = 'Holds'
    else:
        member_outcome = 'Inconclusive'
    witness = {'point': describe_point(x), 'point_outcome': point.outcome.value,
               'eq_eps_outcome': member_outcome}
    contradiction = {point.outcome.value, member_outcome} == {'Holds', 'Fails'}
    if contradiction:
        logging.error('[filter_intersection] ❌ %s at %s: point %s vs Eq_ε %s',
                      sys.name, describe_point(x), point.outcome.value, member_outcome)
        return fails(witness, cfg.horizon)
    return holds(witness, cfg.horizon)
