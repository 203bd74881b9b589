"""
Family dichotomy for transitive systems: either ℱ-sensitive, or almost
kℱ-equicontinuous, never both.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from config.settings import ProbeConfig
from core.family import (
    FamilyDescriptor,
    Verdict,
    as_python,
    dual,
    fails,
    holds,
    inconclusive,
    is_translation_invariant,
    upper_density_above,
)
from services.classify.equicontinuity import almost_f_equicontinuity, f_equicontinuity
from services.classify.probe import EquiReport, HypothesisError, SensReport, family_label
from services.classify.sensitivity import f_sensitivity
from services.dynamics.space import MetricSystem

BRANCH_SENSITIVE = 'sensitive'
BRANCH_ALMOST_EQUICONTINUOUS = 'almost_equicontinuous'
BRANCH_UNDETERMINED = 'undetermined'


@dataclass(frozen=True)
class DichotomyReport:
    family: FamilyDescriptor
    dual_invariant: bool
    sens: SensReport
    almost_equi: EquiReport
    consistent: bool
    branch: str

    def as_dict(self) -> Dict[str, Any]:
        return as_python({
            'family': family_label(self.family),
            'dual_family': family_label(dual(self.family)),
            'dual_invariant': self.dual_invariant,
            'consistent': self.consistent,
            'branch': self.branch,
            'sens': self.sens.as_dict(),
            'almost_equi': self.almost_equi.as_dict(),
        })


def sensitivity_over_grid(sys: MetricSystem, f: FamilyDescriptor, cfg: ProbeConfig,
                          eps_grid: Optional[Sequence[float]] = None) -> SensReport:
    """ℱ-sensitivity for some ε: Holds if one ε holds, Fails if every ε fails."""
    eps_grid = list(eps_grid or cfg.eps_grid)
    reports: List[SensReport] = []
    for epsilon in eps_grid:
        report = f_sensitivity(sys, f, epsilon, cfg)
        reports.append(report)
        if report.verdict.holds:
            break
    per_eps = [{'epsilon': eps, 'outcome': r.verdict.outcome.value} for eps, r in zip(eps_grid, reports)]
    witness = {'per_epsilon': per_eps}
    if reports[-1].verdict.holds:
        verdict = holds({**witness, 'epsilon': reports[-1].verdict.witness['epsilon']}, cfg.horizon)
    elif all(r.verdict.fails for r in reports):
        verdict = fails(witness, cfg.horizon)
    else:
        verdict = inconclusive(witness, cfg.horizon)
    return SensReport(f"FSens({family_label(f)})", verdict, reports[-1].witness_sets, cfg.echo())


def dichotomy_report(sys: MetricSystem, f: FamilyDescriptor,
                     cfg: Optional[ProbeConfig] = None) -> DichotomyReport:
    """
    Run both branches of the dichotomy and report which one the evidence supports.

    Raises:
        HypothesisError: the system is not known to be transitive, or kℱ is
            not translation invariant.
    """
    cfg = cfg or ProbeConfig()
    if not sys.transitive:
        raise HypothesisError(f"the dichotomy needs a transitive system; {sys.name} is not flagged transitive")
    kf = dual(f)
    if not is_translation_invariant(kf):
        raise HypothesisError(
            f"the dichotomy needs a translation invariant dual family; k({family_label(f)}) = "
            f"{family_label(kf)} is not"
        )
    tag = f"{sys.name}|{family_label(f)}"
    sens = sensitivity_over_grid(sys, f, cfg)
    almost = almost_f_equicontinuity(sys, kf, cfg)
    both_hold = sens.verdict.holds and almost.verdict.holds
    both_fail = sens.verdict.fails and almost.verdict.fails
    consistent = not both_hold and not both_fail
    if sens.verdict.holds and almost.verdict.fails:
        branch = BRANCH_SENSITIVE
    elif almost.verdict.holds and sens.verdict.fails:
        branch = BRANCH_ALMOST_EQUICONTINUOUS
    else:
        branch = BRANCH_UNDETERMINED
    if consistent:
        logging.info('[%s] ✓ branch=%s', tag, branch)
    else:
        logging.error('[%s] ❌ inconsistent: sensitivity %s, almost equicontinuity %s',
                      tag, sens.verdict.outcome.value, almost.verdict.outcome.value)
    return DichotomyReport(f, True, sens, almost, consistent, branch)


def density_dichotomy(sys: MetricSystem, a_grid: Sequence[float],
                      cfg: Optional[ProbeConfig] = None) -> Verdict:
    """
    For each a: D̄(a+)-sensitivity against kD̄(a+)-equicontinuity.

    Holds when some a decides one side and no a has both sides holding;
    Fails when some a has both.
    """
    cfg = cfg or ProbeConfig()
    rows = []
    first_decided = None
    for a in a_grid:
        if not 0 < a < 1:
            raise ValueError(f"a_grid values must lie in (0, 1), got {a}")
        sens = sensitivity_over_grid(sys, upper_density_above(a), cfg).verdict
        equi = f_equicontinuity(sys, dual(upper_density_above(a)), cfg.eps_grid, cfg).verdict
        rows.append({'a': a, 'sensitivity': sens.outcome.value, 'equicontinuity': equi.outcome.value})
        if sens.holds and equi.holds:
            logging.error('[density_dichotomy] ❌ %s: both sides hold at a=%s', sys.name, a)
            return fails({'a': a, 'rows': rows}, cfg.horizon)
        if first_decided is None and (sens.holds or equi.holds):
            first_decided = a
    witness = {'rows': rows, 'first_decided_a': first_decided}
    if first_decided is not None:
        return holds(witness, cfg.horizon)
    return inconclusive(witness, cfg.horizon)
