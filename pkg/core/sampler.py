"""
Canonical members and non-members of families, and the sampled
filter / Ramsey refutation searches built on them.

Every generator is a deterministic function of (seed, trial index).
"""
import itertools
import logging
import math
from typing import Iterator, List, Optional, Tuple

import numpy as np

from config.settings import VerdictPolicy
from core import zset
from core.family import (
    FamilyDescriptor,
    FamilyKind,
    Outcome,
    SpecParseError,
    Verdict,
    contains,
    dual,
    fails,
    holds,
    inconclusive,
    to_string,
)
from core.zset import TailHint, WindowSet

MIN_SAMPLE_HORIZON = 64
DEFAULT_CHECK_HORIZON = 4096
MAX_SYNDETIC_GAP = 25

SUPPORTED_KINDS = [k.value for k in FamilyKind]


def _rng(seed: int, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _check_horizon(horizon: int) -> None:
    if horizon < MIN_SAMPLE_HORIZON:
        raise ValueError(f"sampling needs a horizon of at least {MIN_SAMPLE_HORIZON}, got {horizon}")


def _random_prefix(rng: np.random.Generator, length: int) -> np.ndarray:
    return rng.random(length) < 0.5


def _pattern_with(rng: np.random.Generator, period: int, ones: int) -> np.ndarray:
    pattern = np.zeros(period, dtype=bool)
    pattern[rng.choice(period, size=ones, replace=False)] = True
    return pattern


def _periodic_member(rng: np.random.Generator, horizon: int, period: int, ones: int) -> WindowSet:
    start = int(rng.integers(0, horizon // 8 + 1))
    pattern = _pattern_with(rng, period, ones)
    return zset.periodic(pattern.astype(int), horizon, start, _random_prefix(rng, start))


def _syndetic_member(rng: np.random.Generator, horizon: int) -> WindowSet:
    """Periodic set whose consecutive members are at most g ≤ 25 apart."""
    g = int(rng.integers(2, MAX_SYNDETIC_GAP + 1))
    period = int(rng.integers(g, 4 * g + 1))
    pattern = np.zeros(period, dtype=bool)
    pos = int(rng.integers(0, g))
    while pos < period:
        pattern[pos] = True
        pos += int(rng.integers(1, g + 1))
    # wrap-around gap must also stay within g
    first, last = np.flatnonzero(pattern)[[0, -1]]
    if period - last + first > g:
        pattern[period - 1] = True
    return zset.periodic(pattern.astype(int), horizon)


def _thick_member(rng: np.random.Generator, horizon: int) -> WindowSet:
    """Blocks of length 1, 2, 4, ... separated by gaps of 1 to 4."""
    bits = np.zeros(horizon, dtype=bool)
    pos = int(rng.integers(0, 4))
    length = 1
    while pos < horizon:
        bits[pos:pos + length] = True
        pos += length + int(rng.integers(1, 5))
        length *= 2
    return WindowSet(bits)


def _cofinite_member(rng: np.random.Generator, horizon: int) -> WindowSet:
    c = int(rng.integers(0, horizon // 2))
    bits = np.ones(horizon, dtype=bool)
    bits[:c] = _random_prefix(rng, c)
    return WindowSet(bits, TailHint.all_beyond(c))


def _finite_set(rng: np.random.Generator, horizon: int) -> WindowSet:
    c = int(rng.integers(0, horizon // 2))
    bits = np.zeros(horizon, dtype=bool)
    bits[:c] = _random_prefix(rng, c)
    return WindowSet(bits, TailHint.none_beyond(c))


def _density_ones(f: FamilyDescriptor, period: int, member: bool) -> int:
    p = f.param
    if f.kind in (FamilyKind.UPPER_DENSITY_ABOVE, FamilyKind.BANACH_UPPER_ABOVE):
        # density k/P > a iff k ≥ ⌊aP⌋ + 1
        k = math.floor(p * period) + 1
        return k if member else k - 1
    k = math.ceil(p * period)
    return k if member else k - 1


def sample_member(f: FamilyDescriptor, horizon: int, seed: int, trial: int = 0) -> WindowSet:
    """
    A random member of f with an exact tail hint (thick members excepted).

    Raises:
        ValueError: horizon below 64 or an unsupported kind.
    """
    _check_horizon(horizon)
    rng = _rng(seed, trial)
    kind = f.kind
    if kind is FamilyKind.DUAL_OF:
        return zset.complement(sample_nonmember(f.inner, horizon, seed, trial))
    if kind in (FamilyKind.COFINITE, FamilyKind.THICKLY_SYNDETIC):
        return _cofinite_member(rng, horizon)
    if kind is FamilyKind.SYNDETIC:
        return _syndetic_member(rng, horizon)
    if kind is FamilyKind.INFINITE:
        period = int(rng.integers(2, 33))
        return _periodic_member(rng, horizon, period, int(rng.integers(1, period + 1)))
    if kind is FamilyKind.THICK:
        return _thick_member(rng, horizon)
    if kind in (FamilyKind.UPPER_DENSITY_ABOVE, FamilyKind.BANACH_UPPER_ABOVE,
                FamilyKind.LOWER_DENSITY_AT_LEAST, FamilyKind.BANACH_LOWER_AT_LEAST):
        period = int(rng.integers(8, 33))
        return _periodic_member(rng, horizon, period, _density_ones(f, period, member=True))
    raise ValueError(f"unsupported family kind {kind!r}; supported kinds: {SUPPORTED_KINDS}")


def sample_nonmember(f: FamilyDescriptor, horizon: int, seed: int, trial: int = 0) -> WindowSet:
    """A random set outside f, always with an exact tail hint."""
    _check_horizon(horizon)
    rng = _rng(seed, trial)
    kind = f.kind
    if kind is FamilyKind.DUAL_OF:
        member = sample_member(f.inner, horizon, seed, trial)
        if not member.tail_hint.known:
            # thick members carry no hint; a periodic all-ones tail is thick as well
            member = _cofinite_member(rng, horizon)
        return zset.complement(member)
    if kind in (FamilyKind.INFINITE, FamilyKind.SYNDETIC):
        return _finite_set(rng, horizon)
    if kind in (FamilyKind.COFINITE, FamilyKind.THICK, FamilyKind.THICKLY_SYNDETIC):
        period = int(rng.integers(2, 33))
        return _periodic_member(rng, horizon, period, int(rng.integers(0, period)))
    if kind in (FamilyKind.UPPER_DENSITY_ABOVE, FamilyKind.BANACH_UPPER_ABOVE,
                FamilyKind.LOWER_DENSITY_AT_LEAST, FamilyKind.BANACH_LOWER_AT_LEAST):
        period = int(rng.integers(8, 33))
        return _periodic_member(rng, horizon, period, _density_ones(f, period, member=False))
    raise ValueError(f"unsupported family kind {kind!r}; supported kinds: {SUPPORTED_KINDS}")


def adversarial_sets(horizon: int) -> List[Tuple[str, WindowSet]]:
    """Named sets that break most naive filter / Ramsey claims."""
    return [
        ('evens', zset.evens(horizon)),
        ('odds', zset.odds(horizon)),
        ('full', zset.full(horizon)),
        ('blocks_1100', zset.periodic((1, 1, 0, 0), horizon)),
        ('blocks_0011', zset.periodic((0, 0, 1, 1), horizon)),
        ('empty', zset.empty(horizon)),
    ]


def adversarial_members(f: FamilyDescriptor, horizon: int,
                        policy: Optional[VerdictPolicy] = None) -> List[Tuple[str, WindowSet]]:
    return [(name, w) for name, w in adversarial_sets(horizon) if contains(f, w, policy).holds]


def members_in_rotation(f: FamilyDescriptor, horizon: int, seed: int, trials: int,
                        policy: Optional[VerdictPolicy] = None) -> Iterator[Tuple[str, WindowSet]]:
    """Adversarial members first, then `trials` random members."""
    yield from adversarial_members(f, horizon, policy)
    for t in range(trials):
        yield f"random[{t}]", sample_member(f, horizon, seed, t)


def partition_masks(horizon: int, seed: int, trials: int) -> Iterator[Tuple[str, WindowSet]]:
    """Masks M splitting F into F∩M and F∖M: parity, alternating pairs, then random periodic masks."""
    yield 'parity', zset.evens(horizon)
    yield 'blocks_1100', zset.periodic((1, 1, 0, 0), horizon)
    for t in range(trials):
        rng = _rng(seed, 1_000_000 + t)
        period = int(rng.integers(2, 17))
        pattern = (rng.random(period) < 0.5).astype(int)
        yield f"random_mask[{t}]", zset.periodic(pattern, horizon)


def filter_check(f: FamilyDescriptor, sampler_seed: int, trials: int,
                 horizon: int = DEFAULT_CHECK_HORIZON,
                 policy: Optional[VerdictPolicy] = None) -> Verdict:
    """
    Search for F₁, F₂ ∈ f with F₁ ∩ F₂ ∉ f.

    Adversarial member pairs are tried before `trials` random pairs. Holds
    means no counterexample was found and every intersection was a Holds.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    policy = policy or VerdictPolicy()
    name = to_string(f)
    adversarial = adversarial_members(f, horizon, policy)
    pairs = list(itertools.combinations_with_replacement(adversarial, 2))
    for t in range(trials):
        a = sample_member(f, horizon, sampler_seed, 2 * t)
        b = sample_member(f, horizon, sampler_seed, 2 * t + 1)
        pairs.append(((f"random[{2 * t}]", a), (f"random[{2 * t + 1}]", b)))

    all_hold = True
    for (name_a, a), (name_b, b) in pairs:
        v = contains(f, zset.intersect(a, b), policy)
        if v.fails:
            logging.info('[filter_check] %s: counterexample %s ∩ %s', name, name_a, name_b)
            return fails({'pair': [name_a, name_b], 'intersection_rle': zset.to_rle(zset.intersect(a, b)),
                          'intersection_witness': v.witness, 'pairs_checked': len(pairs)}, horizon)
        all_hold = all_hold and v.holds
    witness = {'pairs_checked': len(pairs), 'seed': sampler_seed}
    return holds(witness, horizon) if all_hold else inconclusive(witness, horizon)


def _ramsey_search(f: FamilyDescriptor, sampler_seed: int, trials: int, horizon: int,
                   policy: VerdictPolicy) -> Verdict:
    members = list(members_in_rotation(f, horizon, sampler_seed, trials, policy))
    masks = list(partition_masks(horizon, sampler_seed, trials))
    candidates = [(m, mk) for m in members[:len(members) - trials] for mk in masks[:2]]
    for t in range(trials):
        candidates.append((members[len(members) - trials + t], masks[2 + t]))

    all_hold = True
    for (member_name, member), (mask_name, mask) in candidates:
        union_verdict = contains(f, member, policy)
        if not union_verdict.holds:
            all_hold = False
            continue
        part_a = zset.intersect(member, mask)
        part_b = zset.intersect(member, zset.complement(mask))
        va = contains(f, part_a, policy)
        vb = contains(f, part_b, policy)
        if va.fails and vb.fails:
            return fails({'set': member_name, 'mask': mask_name,
                          'part_a_rle': zset.to_rle(part_a), 'part_b_rle': zset.to_rle(part_b),
                          'partitions_checked': len(candidates)}, horizon)
        all_hold = all_hold and (va.holds or vb.holds)
    witness = {'partitions_checked': len(candidates), 'seed': sampler_seed}
    return holds(witness, horizon) if all_hold else inconclusive(witness, horizon)


def ramsey_check(f: FamilyDescriptor, sampler_seed: int, trials: int,
                 horizon: int = DEFAULT_CHECK_HORIZON,
                 policy: Optional[VerdictPolicy] = None) -> Verdict:
    """
    Search for a partition F₁ ⊔ F₂ ∈ f with neither part in f, then cross-check
    against filter_check(dual(f)): F is Ramsey iff kF is a filter, so the two
    searches must never disagree outright.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    policy = policy or VerdictPolicy()
    verdict = _ramsey_search(f, sampler_seed, trials, horizon, policy)
    mirror = filter_check(dual(f), sampler_seed, trials, horizon, policy)
    disagree = {verdict.outcome, mirror.outcome} == {Outcome.HOLDS, Outcome.FAILS}
    if disagree:
        logging.warning('[ramsey_check] ⚠ %s: Ramsey search says %s but filter check of %s says %s',
                        to_string(f), verdict.outcome.value, to_string(dual(f)), mirror.outcome.value)
        return inconclusive({'dual_filter_disagreement': True,
                             'ramsey': verdict.as_dict(), 'dual_filter': mirror.as_dict()}, horizon)
    return verdict.with_witness(dual_filter=mirror.outcome.value)


SET_GRAMMAR = (
    "evens | odds | blocks:2^k | periodic:<bits> | cofinite:<c> | finite:<c> | "
    "random:<p>:<seed> | rle:<line>"
)


def parse_set_expression(text: str, horizon: int) -> WindowSet:
    """
    Build a windowed set from the CLI set grammar.

    `finite:c` is [0, c) and `cofinite:c` is [c, N), both with exact hints;
    `random:p:seed` is a Bernoulli(p) window without a hint.

    Raises:
        SpecParseError: the expression is not in the grammar.
    """
    s = text.strip()
    head, _, rest = s.partition(':')
    try:
        if s == 'evens':
            return zset.evens(horizon)
        if s == 'odds':
            return zset.odds(horizon)
        if s in ('blocks:2^k', 'blocks'):
            return zset.power_blocks(horizon)
        if head == 'periodic' and rest and not set(rest) - {'0', '1'}:
            return zset.periodic([int(b) for b in rest], horizon)
        if head in ('cofinite', 'finite'):
            c = int(rest)
            if not 0 <= c <= horizon:
                raise ValueError(f"cutoff {c} outside [0, {horizon}]")
            bits = np.arange(horizon) >= c
            if head == 'cofinite':
                return WindowSet(bits, TailHint.all_beyond(c))
            return WindowSet(~bits, TailHint.none_beyond(c))
        if head == 'random':
            p_text, seed_text = rest.split(':')
            p = float(p_text)
            if not 0 <= p <= 1:
                raise ValueError(f"probability {p} outside [0, 1]")
            return WindowSet(_rng(int(seed_text)).random(horizon) < p)
        if head == 'rle':
            return zset.from_rle(rest)
    except ValueError as e:
        raise SpecParseError(f"bad set expression {text!r}: {e}; expected {SET_GRAMMAR}") from e
    raise SpecParseError(f"cannot parse set expression {text!r}; expected {SET_GRAMMAR}")
