"""
Checks of the implications linking mean notions to density families and of
the backward invariance of Eq_ε^ℱ. Verdict monotonicity along family
inclusions is checked here as well.

Each check returns a Verdict: Fails means an implication was violated on the
sampled evidence, Holds with `not_applicable` means its premise was refuted.
"""
import logging
from fractions import Fraction
from typing import List, Optional, Sequence

from config.settings import ProbeConfig
from core.family import (
    FamilyDescriptor,
    Verdict,
    fails,
    holds,
    implies,
    inconclusive,
    is_translation_invariant,
    lower_density_at_least,
    upper_density_above,
)
from services.classify.equicontinuity import eq_eps_f_member, f_equi_point, f_equicontinuity
from services.classify.mean import mean_equicontinuity, mean_sensitivity
from services.classify.probe import HypothesisError, describe_point, family_label
from services.classify.sensitivity import f_sensitivity
from services.dynamics.space import MetricSystem, as_fraction


def sensitivity_offset(sys: MetricSystem, delta, a) -> Fraction:
    """δ′ = δ − a·diam(X), exact whenever the diameter is rational."""
    diameter = sys.diameter_exact
    if diameter is None:
        diameter = as_fraction(sys.diameter)
    return as_fraction(delta) - as_fraction(a) * diameter


def lemma45_check(sys: MetricSystem, delta: float, a: float, cfg: Optional[ProbeConfig] = None) -> Verdict:
    """
    Mean sensitivity with constant δ gives D̄(a+)-sensitivity with constant
    δ − a·diam(X).

    Raises:
        HypothesisError: a is outside [0, δ/diam(X)).
    """
    cfg = cfg or ProbeConfig()
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    offset = sensitivity_offset(sys, delta, a)
    if as_fraction(a) < 0 or offset <= 0:
        raise HypothesisError(
            f"need 0 ≤ a < δ/diam(X) = {float(as_fraction(delta) / as_fraction(sys.diameter)):.6g}, got a={a}"
        )
    witness = {'delta': delta, 'a': a, 'delta_prime': float(offset), 'delta_prime_exact': str(offset)}

    premise = mean_sensitivity(sys, delta, cfg).verdict
    witness['mean_sensitivity'] = premise.outcome.value
    if premise.fails:
        return holds({**witness, 'not_applicable': True}, cfg.horizon)
    if premise.inconclusive:
        return inconclusive(witness, cfg.horizon)

    sens = f_sensitivity(sys, upper_density_above(a), float(offset), cfg).verdict
    witness['density_sensitivity'] = sens.outcome.value
    logging.info('[lemma45] %s δ′=%s → %s', sys.name, offset, sens.outcome.value)
    if sens.holds:
        return holds(witness, cfg.horizon)
    if sens.fails:
        return fails(witness, cfg.horizon)
    return inconclusive(witness, cfg.horizon)


def _implication(premise: Verdict, conclusion_fn, horizon: int, witness: dict) -> Verdict:
    """premise ⟹ conclusion does not fail."""
    witness = {**witness, 'premise': premise.outcome.value}
    if premise.fails:
        return holds({**witness, 'not_applicable': True}, horizon)
    if not premise.holds:
        return inconclusive(witness, horizon)
    conclusion = conclusion_fn()
    witness['conclusion'] = conclusion.outcome.value
    if conclusion.fails:
        return fails(witness, horizon)
    return holds(witness, horizon)


def lemma43_44_check(sys: MetricSystem, a_grid: Sequence[float],
                     cfg: Optional[ProbeConfig] = None) -> List[Verdict]:
    """
    Mean equicontinuity ⟹ kD̄(a+)-equicontinuity for each a (tested at the
    coupled scales ε/a), and kD̄(0+)-equicontinuity ⟹ mean equicontinuity.

    Returns one verdict per a followed by the converse verdict.
    """
    cfg = cfg or ProbeConfig()
    if any(not 0 < a < 1 for a in a_grid):
        raise ValueError(f"a_grid values must lie in (0, 1), got {list(a_grid)}")
    mean = mean_equicontinuity(sys, cfg).verdict
    verdicts = []
    for a in a_grid:
        f = lower_density_at_least(1 - as_fraction(a))
        coupled = [eps / a for eps in cfg.eps_grid]
        verdicts.append(_implication(
            mean,
            lambda f=f, coupled=coupled: f_equicontinuity(sys, f, coupled, cfg).verdict,
            cfg.horizon,
            {'implication': 'mean => density_equicontinuity', 'a': a, 'family': family_label(f),
             'coupled_eps': coupled},
        ))
    full = f_equicontinuity(sys, lower_density_at_least(1), cfg.eps_grid, cfg).verdict
    verdicts.append(_implication(
        full,
        lambda: mean,
        cfg.horizon,
        {'implication': 'density_equicontinuity => mean', 'family': 'ld>=1'},
    ))
    for v in verdicts:
        if v.fails:
            logging.error('[lemma43_44] ❌ %s: %s', sys.name, v.witness)
    return verdicts


def lemma31_invariance_check(sys: MetricSystem, f: FamilyDescriptor, epsilon: float,
                             cfg: Optional[ProbeConfig] = None) -> Verdict:
    """
    T(x) ∈ Eq_ε^ℱ must not coexist with a refutation of x ∈ Eq_ε^ℱ.

    Raises:
        HypothesisError: f is not translation invariant.
    """
    if not is_translation_invariant(f):
        raise HypothesisError(
            f"backward invariance of Eq_ε^ℱ needs a translation invariant family; {family_label(f)} is not"
        )
    cfg = cfg or ProbeConfig()
    checked = 0
    premises = 0
    for x in sys.point_grid(cfg.point_grid):
        x = sys.coerce(x)
        image = eq_eps_f_member(sys, sys.step(x), epsilon, f, cfg).verdict
        checked += 1
        if not image.holds:
            continue
        premises += 1
        here = eq_eps_f_member(sys, x, epsilon, f, cfg).verdict
        if here.fails:
            logging.error('[lemma31] ❌ %s: T(x) ∈ Eq_ε but x refuted at %s', sys.name, describe_point(x))
            return fails({'point': describe_point(x), 'epsilon': epsilon, 'checked': checked}, cfg.horizon)
    witness = {'checked': checked, 'premises_held': premises, 'epsilon': epsilon}
    if premises == 0:
        witness['vacuous'] = True
    return holds(witness, cfg.horizon)


def strength_monotonicity_check(sys: MetricSystem, stronger: FamilyDescriptor, weaker: FamilyDescriptor,
                                epsilon: float, cfg: Optional[ProbeConfig] = None) -> Verdict:
    """
    For stronger ⊆ weaker, a Holds under the stronger family must not come
    back Fails under the weaker one. Both f_sensitivity and f_equi_point
    are run with the same probe configuration, so they see the same balls
    and sampled points.

    Raises:
        HypothesisError: the inclusion is not in the table.
    """
    if not implies(stronger, weaker):
        raise HypothesisError(
            f"{family_label(stronger)} ⊆ {family_label(weaker)} is not a known inclusion"
        )
    cfg = cfg or ProbeConfig()
    x = sys.coerce(sys.point_grid(1)[0])
    sens = [f_sensitivity(sys, f, epsilon, cfg).verdict for f in (stronger, weaker)]
    equi = [f_equi_point(sys, x, f, epsilon, cfg).verdict for f in (stronger, weaker)]
    witness = {
        'stronger': family_label(stronger),
        'weaker': family_label(weaker),
        'epsilon': epsilon,
        'point': describe_point(x),
        'sensitivity': [v.outcome.value for v in sens],
        'equi_point': [v.outcome.value for v in equi],
    }
    broken = [name for name, (strong, weak) in (('sensitivity', sens), ('equi_point', equi))
              if strong.holds and weak.fails]
    if broken:
        logging.error('[strength] ❌ %s: %s ⊆ %s broken by %s', sys.name, witness['stronger'],
                      witness['weaker'], ', '.join(broken))
        return fails({**witness, 'broken': broken}, cfg.horizon)
    return holds(witness, cfg.horizon)
