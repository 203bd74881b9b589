"""
Furstenberg families: symbolic descriptors, the dual table, and three-valued
membership verdicts against finite windows.

A verdict from the window alone is evidence, not proof. When the window
carries an exact tail hint the verdict is decided from the hint and the
window statistics are kept in the witness only.
"""
import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional, Union

import numpy as np

from config.settings import VerdictPolicy
from core import zset
from core.zset import TailHint, WindowSet

FAMILY_GRAMMAR = "B | cf | synd | thick | tsynd | ud>a | ld>=b | bud>a | bld>=b | k(<desc>)"


class SpecParseError(ValueError):
    """A textual descriptor (family, system, factor or set expression) did not parse."""


class FamilyKind(str, Enum):
    INFINITE = 'B'
    COFINITE = 'cf'
    SYNDETIC = 'synd'
    THICK = 'thick'
    THICKLY_SYNDETIC = 'tsynd'
    UPPER_DENSITY_ABOVE = 'ud>'
    LOWER_DENSITY_AT_LEAST = 'ld>='
    BANACH_UPPER_ABOVE = 'bud>'
    BANACH_LOWER_AT_LEAST = 'bld>='
    DUAL_OF = 'k'


_STRICT_PARAM = {FamilyKind.UPPER_DENSITY_ABOVE, FamilyKind.BANACH_UPPER_ABOVE}
_AT_LEAST_PARAM = {FamilyKind.LOWER_DENSITY_AT_LEAST, FamilyKind.BANACH_LOWER_AT_LEAST}


def _as_fraction(value: Union[Fraction, float, int, str]) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class FamilyDescriptor:
    """
    Symbolic tag of a family.

    `param` is a in [0, 1) for the "above" kinds and b in (0, 1] for the
    "at least" kinds. DualOf(DualOf(f)) collapses to f on construction.
    """

    kind: FamilyKind
    param: Optional[Fraction] = None
    inner: Optional['FamilyDescriptor'] = None

    def __post_init__(self):
        kind = FamilyKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if kind is FamilyKind.DUAL_OF:
            if self.inner is None:
                raise ValueError("DualOf needs an inner family")
            if self.inner.kind is FamilyKind.DUAL_OF:
                base = self.inner.inner
                object.__setattr__(self, 'kind', base.kind)
                object.__setattr__(self, 'param', base.param)
                object.__setattr__(self, 'inner', base.inner)
            return
        if self.inner is not None:
            raise ValueError(f"{kind.value} takes no inner family")
        if kind in _STRICT_PARAM or kind in _AT_LEAST_PARAM:
            if self.param is None:
                raise ValueError(f"{kind.value} needs a density parameter")
            p = _as_fraction(self.param)
            object.__setattr__(self, 'param', p)
            if kind in _STRICT_PARAM and not 0 <= p < 1:
                raise ValueError(f"{kind.value}a needs a in [0, 1), got {p}")
            if kind in _AT_LEAST_PARAM and not 0 < p <= 1:
                raise ValueError(f"{kind.value}b needs b in (0, 1], got {p}")
        elif self.param is not None:
            raise ValueError(f"{kind.value} takes no parameter")

    def __str__(self) -> str:
        return to_string(self)


def infinite() -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.INFINITE)


def cofinite() -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.COFINITE)


def syndetic() -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.SYNDETIC)


def thick() -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.THICK)


def thickly_syndetic() -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.THICKLY_SYNDETIC)


def upper_density_above(a) -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.UPPER_DENSITY_ABOVE, _as_fraction(a))


def lower_density_at_least(b) -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.LOWER_DENSITY_AT_LEAST, _as_fraction(b))


def banach_upper_above(a) -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.BANACH_UPPER_ABOVE, _as_fraction(a))


def banach_lower_at_least(b) -> FamilyDescriptor:
    return FamilyDescriptor(FamilyKind.BANACH_LOWER_AT_LEAST, _as_fraction(b))


def dual_of(f: FamilyDescriptor) -> FamilyDescriptor:
    """Symbolic DualOf(f); never consults the dual table."""
    return FamilyDescriptor(FamilyKind.DUAL_OF, inner=f)


_DUAL_PAIRS = {
    FamilyKind.INFINITE: FamilyKind.COFINITE,
    FamilyKind.COFINITE: FamilyKind.INFINITE,
    FamilyKind.THICK: FamilyKind.SYNDETIC,
    FamilyKind.SYNDETIC: FamilyKind.THICK,
    FamilyKind.UPPER_DENSITY_ABOVE: FamilyKind.LOWER_DENSITY_AT_LEAST,
    FamilyKind.LOWER_DENSITY_AT_LEAST: FamilyKind.UPPER_DENSITY_ABOVE,
    FamilyKind.BANACH_UPPER_ABOVE: FamilyKind.BANACH_LOWER_AT_LEAST,
    FamilyKind.BANACH_LOWER_AT_LEAST: FamilyKind.BANACH_UPPER_ABOVE,
}


def dual(f: FamilyDescriptor) -> FamilyDescriptor:
    """The dual family kF = {F : ℤ₊∖F ∉ F}, normalized through the closed-form table."""
    if f.kind is FamilyKind.DUAL_OF:
        return f.inner
    if f.kind is FamilyKind.THICKLY_SYNDETIC:
        return dual_of(f)
    paired = _DUAL_PAIRS[f.kind]
    param = None if f.param is None else 1 - f.param
    return FamilyDescriptor(paired, param)


def normal_form(f: FamilyDescriptor) -> FamilyDescriptor:
    """k(g) rewritten through the dual table where the table covers g; dual(dual(f)) == normal_form(f)."""
    return dual(f.inner) if f.kind is FamilyKind.DUAL_OF else f


def is_translation_invariant(f: FamilyDescriptor) -> bool:
    if f.kind is FamilyKind.DUAL_OF:
        return is_translation_invariant(f.inner)
    return f.kind in {
        FamilyKind.INFINITE,
        FamilyKind.COFINITE,
        FamilyKind.SYNDETIC,
        FamilyKind.THICK,
        FamilyKind.THICKLY_SYNDETIC,
        FamilyKind.UPPER_DENSITY_ABOVE,
        FamilyKind.LOWER_DENSITY_AT_LEAST,
        FamilyKind.BANACH_UPPER_ABOVE,
        FamilyKind.BANACH_LOWER_AT_LEAST,
    }


def is_filter(f: FamilyDescriptor) -> bool:
    """Known filters: cofinite, thickly syndetic, D_(F) ≥ 1 and BD_(F) ≥ 1."""
    if f.kind in (FamilyKind.COFINITE, FamilyKind.THICKLY_SYNDETIC):
        return True
    if f.kind in _AT_LEAST_PARAM:
        return f.param == 1
    return False


def has_ramsey_property(f: FamilyDescriptor) -> bool:
    """A family is Ramsey iff its dual is a filter."""
    return is_filter(dual(f))


# Inclusions between families

_DENSITY_RANK = {
    FamilyKind.BANACH_LOWER_AT_LEAST: 0,
    FamilyKind.LOWER_DENSITY_AT_LEAST: 1,
    FamilyKind.UPPER_DENSITY_ABOVE: 2,
    FamilyKind.BANACH_UPPER_ABOVE: 3,
}
_DENSITY_KINDS = set(_DENSITY_RANK)

_KIND_INCLUSIONS = {
    FamilyKind.COFINITE: {FamilyKind.THICK, FamilyKind.SYNDETIC, FamilyKind.THICKLY_SYNDETIC}
    | _DENSITY_KINDS,
    FamilyKind.THICKLY_SYNDETIC: {FamilyKind.THICK, FamilyKind.SYNDETIC, FamilyKind.BANACH_UPPER_ABOVE},
    FamilyKind.THICK: {FamilyKind.BANACH_UPPER_ABOVE},
    FamilyKind.BANACH_LOWER_AT_LEAST: {FamilyKind.SYNDETIC},
}


def _density_implies(s: FamilyDescriptor, w: FamilyDescriptor) -> bool:
    # BD_ ≤ D_ ≤ D̄ ≤ BD*, so a bound on a smaller density carries over to a larger one
    if _DENSITY_RANK[s.kind] > _DENSITY_RANK[w.kind]:
        return False
    if s.kind in _AT_LEAST_PARAM and w.kind in _STRICT_PARAM:
        return s.param > w.param
    return s.param >= w.param


def implies(stronger: FamilyDescriptor, weaker: FamilyDescriptor) -> bool:
    """
    True when stronger ⊆ weaker follows from the closed-form inclusion table.

    False means the inclusion is not in the table, not that it is false.
    Every family in the grammar holds infinite sets only, so anything
    implies B; k(g) ⊆ k(h) exactly when h ⊆ g.
    """
    s, w = normal_form(stronger), normal_form(weaker)
    if s == w or w.kind is FamilyKind.INFINITE:
        return True
    if s.kind is FamilyKind.DUAL_OF or w.kind is FamilyKind.DUAL_OF:
        if s.kind is FamilyKind.DUAL_OF and w.kind is FamilyKind.DUAL_OF:
            return implies(w.inner, s.inner)
        return False
    if s.kind in _DENSITY_KINDS and w.kind in _DENSITY_KINDS:
        return _density_implies(s, w)
    return w.kind in _KIND_INCLUSIONS.get(s.kind, set())


# Textual form

_ALIASES = {
    'b': FamilyKind.INFINITE,
    'infinite': FamilyKind.INFINITE,
    'cf': FamilyKind.COFINITE,
    'cofinite': FamilyKind.COFINITE,
    'synd': FamilyKind.SYNDETIC,
    'syndetic': FamilyKind.SYNDETIC,
    'thick': FamilyKind.THICK,
    'tsynd': FamilyKind.THICKLY_SYNDETIC,
}
_PARAM_RE = re.compile(r'^(bud>|bld>=|ud>|ld>=)(.+)$')


def _format_param(p: Fraction) -> str:
    if p.denominator == 1:
        return str(p.numerator)
    as_float = float(p)
    if Fraction(repr(as_float)) == p:
        return repr(as_float)
    return f"{p.numerator}/{p.denominator}"


def to_string(f: FamilyDescriptor) -> str:
    if f.kind is FamilyKind.DUAL_OF:
        return f"k({to_string(f.inner)})"
    if f.param is not None:
        return f"{f.kind.value}{_format_param(f.param)}"
    return f.kind.value


def parse_family(text: str) -> FamilyDescriptor:
    """
    Parse the compact family grammar.

    Accepted: B | cf | synd | thick | tsynd | ud>a | ld>=b | bud>a | bld>=b | k(<desc>),
    plus the long names infinite, cofinite and syndetic. Parameters are
    decimals or p/q fractions.
    """
    s = text.strip()
    if s.startswith('k(') and s.endswith(')'):
        return dual_of(parse_family(s[2:-1]))
    if s.lower() in _ALIASES:
        return FamilyDescriptor(_ALIASES[s.lower()])
    m = _PARAM_RE.match(s)
    if m:
        try:
            return FamilyDescriptor(FamilyKind(m.group(1)), Fraction(m.group(2)))
        except (ValueError, ZeroDivisionError) as e:
            raise SpecParseError(f"bad family parameter in {text!r}: {e}") from e
    raise SpecParseError(f"cannot parse family {text!r}; expected {FAMILY_GRAMMAR}")


# Verdicts

class Outcome(str, Enum):
    HOLDS = 'Holds'
    FAILS = 'Fails'
    INCONCLUSIVE = 'Inconclusive'


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    witness: Dict[str, Any] = field(default_factory=dict)
    horizon_used: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'outcome', Outcome(self.outcome))
        if self.outcome is not Outcome.INCONCLUSIVE and not self.witness:
            raise ValueError(f"a {self.outcome.value} verdict must carry a witness")

    @property
    def holds(self) -> bool:
        return self.outcome is Outcome.HOLDS

    @property
    def fails(self) -> bool:
        return self.outcome is Outcome.FAILS

    @property
    def inconclusive(self) -> bool:
        return self.outcome is Outcome.INCONCLUSIVE

    def negated(self) -> 'Verdict':
        flipped = {
            Outcome.HOLDS: Outcome.FAILS,
            Outcome.FAILS: Outcome.HOLDS,
            Outcome.INCONCLUSIVE: Outcome.INCONCLUSIVE,
        }[self.outcome]
        return Verdict(flipped, dict(self.witness), self.horizon_used)

    def with_witness(self, **extra) -> 'Verdict':
        return Verdict(self.outcome, {**self.witness, **extra}, self.horizon_used)

    def as_dict(self) -> Dict[str, Any]:
        return {'outcome': self.outcome.value, 'witness': self.witness, 'horizon_used': self.horizon_used}


def holds(witness: Dict[str, Any], horizon: int) -> Verdict:
    return Verdict(Outcome.HOLDS, witness, horizon)


def fails(witness: Dict[str, Any], horizon: int) -> Verdict:
    return Verdict(Outcome.FAILS, witness, horizon)


def inconclusive(witness: Dict[str, Any], horizon: int) -> Verdict:
    return Verdict(Outcome.INCONCLUSIVE, witness, horizon)


def thick_run_target(horizon: int) -> int:
    """Largest power of two not exceeding ⌊√N⌋: the run length a window must show to certify thickness."""
    root = max(1, math.isqrt(horizon))
    return 1 << (root.bit_length() - 1)


def _window_syndetic(w: WindowSet, policy: VerdictPolicy) -> Verdict:
    n = w.horizon
    gap = zset.gap_run_stats(w, 1).max_gap
    witness = {'max_gap': gap, 'hold_below': policy.syndetic_gap_frac * n,
               'refute_at': policy.refute_gap_frac * n}
    if gap <= policy.syndetic_gap_frac * n:
        return holds(witness, n)
    if gap >= policy.refute_gap_frac * n:
        return fails(witness, n)
    return inconclusive(witness, n)


def _window_thick(w: WindowSet, policy: VerdictPolicy) -> Verdict:
    n = w.horizon
    target = thick_run_target(n)
    longest = zset.gap_run_stats(w, 1).longest_run
    refute = policy.thick_refute(n)
    witness = {'longest_run': longest, 'required_run': target, 'refute_run': refute}
    if longest >= target:
        return holds(witness, n)
    if longest <= refute:
        return fails(witness, n)
    return inconclusive(witness, n)


def _window_thickly_syndetic(w: WindowSet, policy: VerdictPolicy) -> Verdict:
    n = w.horizon
    target = thick_run_target(n)
    stats = zset.gap_run_stats(w, target)
    gaps = {}
    all_hold = True
    for length, starts in sorted(stats.run_starts.items()):
        v = _window_syndetic(WindowSet(starts.bits), policy)
        gaps[str(length)] = v.witness['max_gap']
        if v.fails:
            return fails({'run_length': length, 'run_start_max_gap': v.witness['max_gap'],
                          'refute_at': v.witness['refute_at']}, n)
        all_hold = all_hold and v.holds
    witness = {'run_start_max_gaps': gaps}
    return holds(witness, n) if all_hold else inconclusive(witness, n)


def _tail_free(w: WindowSet) -> bool:
    """True when w contains every index of [N/2, N)."""
    return bool(w.bits[w.horizon // 2:].all())


def _window_density(f: FamilyDescriptor, w: WindowSet, policy: VerdictPolicy) -> Verdict:
    n = w.horizon
    profile = zset.density_profile(w, policy.banach_min_window(n))
    banach = f.kind in (FamilyKind.BANACH_UPPER_ABOVE, FamilyKind.BANACH_LOWER_AT_LEAST)
    if f.kind in (FamilyKind.UPPER_DENSITY_ABOVE, FamilyKind.BANACH_UPPER_ABOVE):
        estimate = profile.banach_upper_est if banach else profile.upper_est
    else:
        estimate = profile.banach_lower_est if banach else profile.lower_est
    p = float(f.param)
    margin = policy.margin
    witness = {'estimate': estimate, 'param': p, 'margin': margin,
               'convergence_spread': profile.convergence_spread}
    if f.kind in _STRICT_PARAM:
        if estimate > p + margin:
            return holds(witness, n)
    elif estimate >= p + margin or (estimate >= p and _tail_free(w)):
        return holds(witness, n)
    if estimate < p - margin and profile.convergence_spread < margin:
        return fails(witness, n)
    return inconclusive(witness, n)


def _window_verdict(f: FamilyDescriptor, w: WindowSet, policy: VerdictPolicy) -> Verdict:
    n = w.horizon
    if f.kind is FamilyKind.INFINITE:
        late = int(w.bits[n // 2:].sum())
        witness = {'members_in_second_half': late}
        if late:
            witness['last_member'] = int(w.members()[-1])
            return holds(witness, n)
        if not w.bits[n // 4:].any():
            witness['empty_from'] = n // 4
            return fails(witness, n)
        return inconclusive(witness, n)
    if f.kind is FamilyKind.COFINITE:
        missing = w.bits.size - w.count()
        comp = zset.complement(WindowSet(w.bits))
        last_missing = int(comp.members()[-1]) if missing else -1
        witness = {'last_non_member': last_missing}
        if last_missing < n // 2:
            return holds(witness, n)
        comp_lower = zset.density_profile(comp, policy.banach_min_window(n)).lower_est
        witness['complement_lower_est'] = comp_lower
        if comp_lower >= policy.refute_density:
            return fails(witness, n)
        return inconclusive(witness, n)
    if f.kind is FamilyKind.SYNDETIC:
        return _window_syndetic(w, policy)
    if f.kind is FamilyKind.THICK:
        return _window_thick(w, policy)
    if f.kind is FamilyKind.THICKLY_SYNDETIC:
        return _window_thickly_syndetic(w, policy)
    return _window_density(f, w, policy)


def _hint_outcome(f: FamilyDescriptor, hint: TailHint) -> bool:
    """Exact membership of an eventually periodic set (finite prefixes never matter)."""
    _, pattern = hint.as_periodic()
    density = hint.density()
    all_ones = all(pattern)
    if f.kind in (FamilyKind.INFINITE, FamilyKind.SYNDETIC):
        return density > 0
    if f.kind in (FamilyKind.COFINITE, FamilyKind.THICK, FamilyKind.THICKLY_SYNDETIC):
        return all_ones
    if f.kind in _STRICT_PARAM:
        return density > f.param
    return density >= f.param


def contains(f: FamilyDescriptor, w: WindowSet, policy: Optional[VerdictPolicy] = None) -> Verdict:
    """
    Three-valued membership of the windowed set w in the family f.

    DualOf(f) is evaluated as the negation of contains(f, complement(w)).
    A known tail hint decides the outcome exactly; the window rules decide it
    otherwise and may return Inconclusive.
    """
    policy = policy or VerdictPolicy()
    if f.kind is FamilyKind.DUAL_OF:
        inner = contains(f.inner, zset.complement(w), policy)
        return inner.negated().with_witness(via='complement')

    window = _window_verdict(f, w, policy)
    if not w.tail_hint.known:
        return window

    exact = _hint_outcome(f, w.tail_hint)
    witness = {**window.witness, 'tail_hint': w.tail_hint.describe(),
               'window_outcome': window.outcome.value}
    if (window.holds and not exact) or (window.fails and exact):
        logging.debug('[contains] window rule for %s overruled by tail hint %s',
                      to_string(f), w.tail_hint.describe())
    return (holds if exact else fails)(witness, w.horizon)


def as_python(value: Any) -> Any:
    """Convert numpy scalars inside witnesses to plain Python values."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: as_python(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [as_python(v) for v in value]
    return value
