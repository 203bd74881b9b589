"""
ℱ-sensitivity over a grid of probed open balls.
"""
import logging
import math
from typing import List, Optional, Tuple

from config.settings import ProbeConfig
from core.family import FamilyDescriptor, contains, fails, holds, inconclusive
from services.classify.probe import (
    SensReport,
    describe_point,
    family_label,
    isometry_note,
    probe_seed,
    set_summary,
)
from services.dynamics.orbit import diam_trace, sensitivity_set
from services.dynamics.space import MetricSystem, Point


def open_set_probes(sys: MetricSystem, cfg: ProbeConfig) -> List[Tuple[Point, float]]:
    """Centers × radii, enough centers to reach cfg.open_set_probes balls."""
    count = max(cfg.point_grid, math.ceil(cfg.open_set_probes / len(cfg.radii)))
    centers = sys.point_grid(count)
    return [(c, r) for c in centers for r in cfg.radii][:cfg.open_set_probes]


def f_sensitivity(sys: MetricSystem, f: FamilyDescriptor, epsilon: float,
                  cfg: Optional[ProbeConfig] = None) -> SensReport:
    """
    Is S(U, ε) = {n : diam Tⁿ(U) > ε} in f for every probed ball U?

    Holds iff every probe holds; Fails as soon as one probe fails, and that
    ball is the witness.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    cfg = cfg or ProbeConfig()
    notion = f"FSens({family_label(f)},{epsilon})"
    witness_sets = []
    outcomes = []
    for i, (center, radius) in enumerate(open_set_probes(sys, cfg)):
        dt = diam_trace(sys, center, radius, cfg.horizon, cfg.samples, probe_seed(cfg, 2, i))
        s = sensitivity_set(dt, epsilon)
        v = contains(f, s, cfg.policy)
        outcomes.append(v)
        witness_sets.append({
            'open_set': f"B({describe_point(dt.open_set.center)}, {radius})",
            'exact_diameters': dt.exact,
            'outcome': v.outcome.value,
            'set': set_summary(s),
            'witness': v.witness,
        })
        if v.fails:
            logging.debug('[%s] %s: probe %d refutes', notion, sys.name, i)
            break

    witness = {'probes': len(outcomes), 'epsilon': epsilon}
    if outcomes[-1].fails:
        verdict = fails({**witness, 'refuting_set': witness_sets[-1]['open_set']}, cfg.horizon)
    elif all(v.holds for v in outcomes):
        verdict = holds(witness, cfg.horizon)
    else:
        verdict = inconclusive(witness, cfg.horizon)
    verdict = isometry_note(sys, verdict, expect_holds=False, notion=notion)
    logging.info('[%s] %s → %s', notion, sys.name, verdict.outcome.value)
    return SensReport(notion, verdict, witness_sets, cfg.echo())
