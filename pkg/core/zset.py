"""
Finite-window subsets of ℤ₊.

A WindowSet is the membership of a set F ⊂ ℤ₊ on [0, N) plus an optional
tail hint describing F beyond the window exactly. Everything a family verdict
needs (gaps, runs, prefix and Banach densities) is computed here on numpy
bit vectors.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

# Tail hints are cross-checked against at most this many trailing entries.
HINT_CHECK_LIMIT = 1024


class TailKind(str, Enum):
    EVENTUALLY_PERIODIC = 'EventuallyPeriodic'
    ALL_BEYOND = 'AllBeyond'
    NONE_BEYOND = 'NoneBeyond'
    UNKNOWN = 'Unknown'


class Direction(str, Enum):
    PLUS = 'plus'
    MINUS = 'minus'


def _minimal_period(pattern: Tuple[int, ...]) -> Tuple[int, ...]:
    n = len(pattern)
    for p in range(1, n + 1):
        if n % p == 0 and pattern == pattern[:p] * (n // p):
            return pattern[:p]
    return pattern


@dataclass(frozen=True)
class TailHint:
    """
    Exact description of a set beyond some index.

    For EventuallyPeriodic, n ≥ start is a member iff pattern[n % period] == 1
    (the phase is absolute, not relative to start). AllBeyond(c) and
    NoneBeyond(c) are the period-1 cases and are always stored in that form.
    """

    kind: TailKind = TailKind.UNKNOWN
    start: int = 0
    pattern: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"tail hint start must be non-negative, got {self.start}")
        if self.kind is TailKind.EVENTUALLY_PERIODIC:
            if not self.pattern or any(b not in (0, 1) for b in self.pattern):
                raise ValueError(f"periodic tail hint needs a non-empty 0/1 pattern, got {self.pattern}")

    @classmethod
    def unknown(cls) -> 'TailHint':
        return cls()

    @classmethod
    def all_beyond(cls, c: int) -> 'TailHint':
        return cls(TailKind.ALL_BEYOND, c)

    @classmethod
    def none_beyond(cls, c: int) -> 'TailHint':
        return cls(TailKind.NONE_BEYOND, c)

    @classmethod
    def periodic(cls, pattern: Sequence[int], start: int = 0) -> 'TailHint':
        """Build a periodic hint, collapsing constant patterns to AllBeyond/NoneBeyond."""
        pat = _minimal_period(tuple(int(b) for b in pattern))
        if pat == (1,):
            return cls.all_beyond(start)
        if pat == (0,):
            return cls.none_beyond(start)
        return cls(TailKind.EVENTUALLY_PERIODIC, start, pat)

    @property
    def known(self) -> bool:
        return self.kind is not TailKind.UNKNOWN

    @property
    def period(self) -> int:
        return len(self.as_periodic()[1])

    def as_periodic(self) -> Tuple[int, Tuple[int, ...]]:
        """(start, pattern) view of any known hint."""
        if self.kind is TailKind.ALL_BEYOND:
            return self.start, (1,)
        if self.kind is TailKind.NONE_BEYOND:
            return self.start, (0,)
        if self.kind is TailKind.EVENTUALLY_PERIODIC:
            return self.start, self.pattern
        raise ValueError("Unknown tail hint has no periodic form")

    def member(self, n: int) -> Optional[bool]:
        """Membership of n according to the hint, or None when the hint says nothing."""
        if not self.known or n < self.start:
            return None
        start, pattern = self.as_periodic()
        return bool(pattern[n % len(pattern)])

    def density(self) -> Optional[Fraction]:
        """Asymptotic density of the hinted set (prefix and Banach densities agree)."""
        if not self.known:
            return None
        _, pattern = self.as_periodic()
        return Fraction(sum(pattern), len(pattern))

    def longest_run_unbounded(self) -> Optional[bool]:
        if not self.known:
            return None
        return self.as_periodic()[1] == (1,)

    def complement(self) -> 'TailHint':
        if not self.known:
            return self
        start, pattern = self.as_periodic()
        return TailHint.periodic(tuple(1 - b for b in pattern), start)

    def shifted(self, i: int, direction: Direction) -> 'TailHint':
        if not self.known:
            return self
        start, pattern = self.as_periodic()
        p = len(pattern)
        if direction is Direction.PLUS:
            new = tuple(pattern[(r - i) % p] for r in range(p))
            return TailHint.periodic(new, start + i)
        new = tuple(pattern[(r + i) % p] for r in range(p))
        return TailHint.periodic(new, max(start - i, 0))

    def combine(self, other: 'TailHint', op: str) -> 'TailHint':
        """Exact hint of the intersection ('and') or union ('or') of the hinted sets."""
        if not (self.known and other.known):
            return TailHint.unknown()
        s1, p1 = self.as_periodic()
        s2, p2 = other.as_periodic()
        period = math.lcm(len(p1), len(p2))
        if op == 'and':
            pattern = tuple(p1[r % len(p1)] & p2[r % len(p2)] for r in range(period))
        elif op == 'or':
            pattern = tuple(p1[r % len(p1)] | p2[r % len(p2)] for r in range(period))
        else:
            raise ValueError(f"unknown hint combination {op!r}; expected 'and' or 'or'")
        return TailHint.periodic(pattern, max(s1, s2))

    def describe(self) -> str:
        if self.kind is TailKind.UNKNOWN:
            return 'Unknown'
        if self.kind is TailKind.EVENTUALLY_PERIODIC:
            bits = ''.join(str(b) for b in self.pattern)
            return f"EventuallyPeriodic(period={len(self.pattern)},pattern={bits},start={self.start})"
        return f"{self.kind.value}({self.start})"


@dataclass(frozen=True, eq=False)
class WindowSet:
    """Membership of F ⊂ ℤ₊ on [0, horizon) with an optional exact tail hint."""

    bits: np.ndarray
    tail_hint: TailHint = field(default_factory=TailHint.unknown)

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool).ravel()
        if bits.size < 1:
            raise ValueError("WindowSet horizon must be at least 1")
        bits.setflags(write=False)
        object.__setattr__(self, 'bits', bits)
        self._check_hint()

    def _check_hint(self) -> None:
        hint = self.tail_hint
        if not hint.known:
            return
        n = self.horizon
        k = min(n // 4, HINT_CHECK_LIMIT)
        lo = max(n - k, hint.start)
        if lo >= n:
            return
        start, pattern = hint.as_periodic()
        idx = np.arange(lo, n)
        expected = np.asarray(pattern, dtype=bool)[idx % len(pattern)]
        bad = np.flatnonzero(self.bits[lo:] != expected)
        if bad.size:
            raise ValueError(
                f"tail hint {hint.describe()} disagrees with window at index {lo + int(bad[0])}"
            )

    @property
    def horizon(self) -> int:
        return int(self.bits.size)

    def members(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def count(self) -> int:
        return int(self.bits.sum())

    def __contains__(self, n: int) -> bool:
        return 0 <= n < self.horizon and bool(self.bits[n])

    def __eq__(self, other) -> bool:
        if not isinstance(other, WindowSet):
            return NotImplemented
        return np.array_equal(self.bits, other.bits) and self.tail_hint == other.tail_hint

    def __hash__(self) -> int:
        return hash((self.bits.tobytes(), self.horizon, self.tail_hint))

    def same_members(self, other: 'WindowSet') -> bool:
        return np.array_equal(self.bits, other.bits)

    def restricted(self, horizon: int) -> 'WindowSet':
        """The first `horizon` entries; the hint is kept (it describes the same set)."""
        if not 1 <= horizon <= self.horizon:
            raise ValueError(f"cannot restrict a window of {self.horizon} to {horizon}")
        return WindowSet(self.bits[:horizon], self.tail_hint)

    def __repr__(self) -> str:
        return f"WindowSet(N={self.horizon}, count={self.count()}, tail={self.tail_hint.describe()})"


@dataclass(frozen=True)
class DensityProfile:
    upper_est: float
    lower_est: float
    banach_upper_est: float
    banach_lower_est: float
    prefix_points: Tuple[int, ...]
    prefix_densities: Tuple[float, ...]
    convergence_spread: float


@dataclass(frozen=True)
class GapRunStats:
    max_gap: int
    longest_run: int
    run_starts: Dict[int, WindowSet]


# Construction helpers

def from_bits(bits: Iterable[Union[int, bool]], tail_hint: Optional[TailHint] = None) -> WindowSet:
    return WindowSet(np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=bool),
                     tail_hint or TailHint.unknown())


def from_members(members: Iterable[int], horizon: int, tail_hint: Optional[TailHint] = None) -> WindowSet:
    bits = np.zeros(horizon, dtype=bool)
    idx = np.fromiter((m for m in members if 0 <= m < horizon), dtype=np.int64)
    bits[idx] = True
    return WindowSet(bits, tail_hint or TailHint.unknown())


def periodic(pattern: Sequence[int], horizon: int, start: int = 0,
             prefix: Optional[np.ndarray] = None) -> WindowSet:
    """
    Window of an eventually periodic set with its exact hint.

    Entries before `start` come from `prefix` (zeros when omitted).
    """
    pat = np.asarray(pattern, dtype=bool)
    idx = np.arange(horizon)
    bits = pat[idx % pat.size].copy()
    head = min(start, horizon)
    if prefix is not None:
        bits[:head] = np.asarray(prefix, dtype=bool)[:head]
    else:
        bits[:head] = False
    return WindowSet(bits, TailHint.periodic(tuple(int(b) for b in pattern), start))


def evens(horizon: int) -> WindowSet:
    return periodic((1, 0), horizon)


def odds(horizon: int) -> WindowSet:
    return periodic((0, 1), horizon)


def full(horizon: int) -> WindowSet:
    return WindowSet(np.ones(horizon, dtype=bool), TailHint.all_beyond(0))


def empty(horizon: int) -> WindowSet:
    return WindowSet(np.zeros(horizon, dtype=bool), TailHint.none_beyond(0))


def power_blocks(horizon: int) -> WindowSet:
    """∪ₖ [2^(2k), 2^(2k+1)): upper density 2/3, lower density 1/3, thick."""
    bits = np.zeros(horizon, dtype=bool)
    k = 0
    while 4 ** k < horizon:
        bits[4 ** k:min(2 * 4 ** k, horizon)] = True
        k += 1
    return WindowSet(bits)


# Operations

def complement(w: WindowSet) -> WindowSet:
    """Flip membership everywhere; the tail hint is complemented with it."""
    return WindowSet(~w.bits, w.tail_hint.complement())


def shift(w: WindowSet, i: int, direction: Union[Direction, str]) -> WindowSet:
    """
    Translate F by i.

    plus:  F+i on the same horizon (positions below i are empty).
    minus: (F−i) ∩ ℤ₊ on the shrunken horizon N−i.
    """
    direction = Direction(direction)
    n = w.horizon
    if i < 0:
        raise ValueError(f"shift amount must be non-negative, got {i}")
    if i >= n:
        raise ValueError(f"window exhausted: cannot shift by {i} on a horizon of {n}")
    hint = w.tail_hint.shifted(i, direction)
    if direction is Direction.PLUS:
        bits = np.zeros(n, dtype=bool)
        bits[i:] = w.bits[:n - i]
        return WindowSet(bits, hint)
    return WindowSet(w.bits[i:].copy(), hint)


def intersect(a: WindowSet, b: WindowSet) -> WindowSet:
    _same_horizon(a, b)
    return WindowSet(a.bits & b.bits, a.tail_hint.combine(b.tail_hint, 'and'))


def union(a: WindowSet, b: WindowSet) -> WindowSet:
    _same_horizon(a, b)
    return WindowSet(a.bits | b.bits, a.tail_hint.combine(b.tail_hint, 'or'))


def is_subset(a: WindowSet, b: WindowSet) -> bool:
    _same_horizon(a, b)
    return not bool(np.any(a.bits & ~b.bits))


def _same_horizon(a: WindowSet, b: WindowSet) -> None:
    if a.horizon != b.horizon:
        raise ValueError(f"horizon mismatch: {a.horizon} vs {b.horizon}")


def _prefix_counts(bits: np.ndarray) -> np.ndarray:
    cs = np.zeros(bits.size + 1, dtype=np.int64)
    np.cumsum(bits, out=cs[1:])
    return cs


def density_profile(w: WindowSet, min_banach_window: int) -> DensityProfile:
    """
    Prefix and Banach density estimates on the window.

    Prefix extremes are taken over n ∈ [⌈N/2⌉, N]. Banach extremes scan all
    subwindows whose length lies on {m·2ᵏ} (m = min_banach_window) and the
    prefix windows themselves, which keeps BD_* ≤ D_ ≤ D̄ ≤ BD*.
    """
    if min_banach_window < 1:
        raise ValueError(f"min_banach_window must be at least 1, got {min_banach_window}")
    n = w.horizon
    cs = _prefix_counts(w.bits)

    ns = np.arange(max(1, math.ceil(n / 2)), n + 1)
    dens = cs[ns] / ns
    upper = float(dens.max())
    lower = float(dens.min())

    banach_upper, banach_lower = upper, lower
    length = min_banach_window
    while length <= n:
        sums = cs[length:] - cs[:-length]
        banach_upper = max(banach_upper, float(sums.max()) / length)
        banach_lower = min(banach_lower, float(sums.min()) / length)
        length *= 2

    samples = max(2, 4 * max(1, int(math.log2(n))) if n > 1 else 1)
    points = np.unique(np.rint(np.geomspace(1, n, num=samples)).astype(np.int64))
    prefix = cs[points] / points
    tail = prefix[len(prefix) // 2:]
    spread = float(tail.max() - tail.min()) if tail.size else 0.0

    return DensityProfile(
        upper_est=upper,
        lower_est=lower,
        banach_upper_est=banach_upper,
        banach_lower_est=banach_lower,
        prefix_points=tuple(int(p) for p in points),
        prefix_densities=tuple(float(d) for d in prefix),
        convergence_spread=spread,
    )


def _runs(bits: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(starts, lengths) of maximal runs of True."""
    padded = np.concatenate(([False], bits, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return starts, ends - starts


def _run_start_hint(hint: TailHint, length: int) -> TailHint:
    if not hint.known:
        return hint
    start, pattern = hint.as_periodic()
    p = len(pattern)
    new = tuple(int(all(pattern[(r + t) % p] for t in range(length))) for r in range(p))
    return TailHint.periodic(new, start)


def run_starts(w: WindowSet, length: int) -> WindowSet:
    """Positions j with [j, j+length) ⊂ F, on the horizon N−length+1 where that is decidable."""
    n = w.horizon
    if not 1 <= length <= n:
        raise ValueError(f"run length must lie in [1, {n}], got {length}")
    cs = _prefix_counts(w.bits)
    starts = (cs[length:] - cs[:-length]) == length
    return WindowSet(starts, _run_start_hint(w.tail_hint, length))


def gap_run_stats(w: WindowSet, max_tracked_run: int) -> GapRunStats:
    """
    Gap and run statistics.

    max_gap is the largest difference between consecutive members, or the
    number of empty positions after the last member if that is larger.
    """
    n = w.horizon
    if max_tracked_run > n:
        raise ValueError(f"max_tracked_run ({max_tracked_run}) exceeds the horizon ({n})")
    lengths = []
    length = 1
    while length <= max_tracked_run:
        lengths.append(length)
        length *= 2

    members = w.members()
    if members.size == 0:
        empty_starts = {
            L: WindowSet(np.zeros(n - L + 1, dtype=bool), _run_start_hint(w.tail_hint, L))
            for L in lengths
        }
        return GapRunStats(max_gap=n, longest_run=0, run_starts=empty_starts)

    interior = int(np.diff(members).max()) if members.size > 1 else 0
    boundary = n - int(members[-1]) - 1
    _, run_lengths = _runs(w.bits)
    return GapRunStats(
        max_gap=max(interior, boundary),
        longest_run=int(run_lengths.max()),
        run_starts={L: run_starts(w, L) for L in lengths},
    )


def longest_zero_run(w: WindowSet) -> int:
    _, lengths = _runs(~w.bits)
    return int(lengths.max()) if lengths.size else 0


# Run-length encoded text form: "N;b:len,b:len,..."

def to_rle(w: WindowSet) -> str:
    starts, lengths = _runs(w.bits)
    parts = []
    pos = 0
    for s, length in zip(starts.tolist(), lengths.tolist()):
        if s > pos:
            parts.append(f"0:{s - pos}")
        parts.append(f"1:{length}")
        pos = s + length
    if pos < w.horizon:
        parts.append(f"0:{w.horizon - pos}")
    return f"{w.horizon};{','.join(parts)}"


def from_rle(line: str, tail_hint: Optional[TailHint] = None) -> WindowSet:
    """Parse the run-length line written by to_rle."""
    try:
        head, body = line.strip().split(';', 1)
        horizon = int(head)
        chunks = []
        for token in filter(None, body.split(',')):
            bit, length = token.split(':')
            if bit not in ('0', '1') or int(length) < 1:
                raise ValueError(token)
            chunks.append(np.full(int(length), bit == '1', dtype=bool))
    except ValueError as e:
        raise ValueError(f"malformed RLE line {line!r}; expected 'N;b:len,b:len,...' ({e})") from e
    bits = np.concatenate(chunks) if chunks else np.zeros(0, dtype=bool)
    if bits.size != horizon:
        raise ValueError(f"RLE runs cover {bits.size} positions but the header says {horizon}")
    return WindowSet(bits, tail_hint or TailHint.unknown())
