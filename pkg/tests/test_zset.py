"""
Tests for windowed subsets of the non-negative integers.

This test suite verifies:
1. Tail hints agree with the window they annotate
2. complement / shift / intersect / union transform hints exactly
3. Prefix and Banach density estimates
4. Gap and run statistics against a naive scanner
5. The run-length text form

Usage:
    pytest tests/test_zset.py -v
"""

import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from core import zset
from core.zset import Direction, TailHint, TailKind, WindowSet


def naive_gap_and_run(bits):
    """Plain-loop scanner used as an independent oracle."""
    members = [i for i, b in enumerate(bits) if b]
    if not members:
        return len(bits), 0
    max_gap = 0
    for a, b in zip(members, members[1:]):
        max_gap = max(max_gap, b - a)
    max_gap = max(max_gap, len(bits) - members[-1] - 1)
    longest = run = 0
    for b in bits:
        run = run + 1 if b else 0
        longest = max(longest, run)
    return max_gap, longest


@pytest.fixture(scope="module")
def random_windows():
    """1000 random windows of length 256."""
    rng = np.random.default_rng(2024)
    return [WindowSet(rng.random(256) < rng.uniform(0.05, 0.95)) for _ in range(1000)]


class TestTailHint:
    """Test the exact tail descriptions."""

    def test_constant_patterns_collapse(self):
        """All-ones and all-zeros patterns are stored as AllBeyond / NoneBeyond."""
        assert TailHint.periodic((1, 1), 3) == TailHint.all_beyond(3)
        assert TailHint.periodic((0,), 5) == TailHint.none_beyond(5)
        assert TailHint.periodic((1, 0, 1, 0)).pattern == (1, 0)
        print("\n✓ Constant patterns collapse")

    def test_density_and_membership(self):
        """Hint density and membership follow the absolute phase."""
        hint = TailHint.periodic((1, 1, 0), 4)
        assert hint.density() == Fraction(2, 3)
        assert hint.member(2) is None
        assert hint.member(5) is False
        assert hint.member(6) is True
        assert TailHint.unknown().density() is None
        print("\n✓ Hint density and membership")

    def test_mismatched_hint_rejected(self):
        """A hint that contradicts the window tail raises ValueError."""
        with pytest.raises(ValueError, match="disagrees"):
            WindowSet(np.zeros(64, dtype=bool), TailHint.all_beyond(0))
        print("\n✓ Mismatched hint rejected")

    def test_negative_start_rejected(self):
        """Hint starts must be non-negative."""
        with pytest.raises(ValueError):
            TailHint.all_beyond(-1)
        print("\n✓ Negative start rejected")


class TestOperations:
    """Test set operations and their hint bookkeeping."""

    def test_complement_of_evens(self):
        """evens on [0, 8) complements to odds, hint included."""
        assert zset.complement(zset.evens(8)) == zset.odds(8)
        assert zset.complement(zset.full(8)) == zset.empty(8)
        print("\n✓ complement(evens) = odds")

    def test_complement_involution(self, random_windows):
        """complement ∘ complement is the identity on membership."""
        for w in random_windows:
            assert zset.complement(zset.complement(w)).same_members(w)
        print(f"\n✓ Involution on {len(random_windows)} windows")

    def test_shift_plus(self):
        """Shifting evens by one gives the odds with a shifted hint."""
        shifted = zset.shift(zset.evens(16), 1, Direction.PLUS)
        assert shifted.members().tolist() == list(range(1, 16, 2))
        assert shifted.tail_hint.pattern == (0, 1)
        assert shifted.tail_hint.start == 1
        print("\n✓ shift plus")

    def test_shift_minus(self):
        """shift({5}, 5, minus) = {0} on the shrunken horizon."""
        w = zset.from_members([5], 16)
        shifted = zset.shift(w, 5, 'minus')
        assert shifted.horizon == 11
        assert shifted.members().tolist() == [0]
        print("\n✓ shift minus")

    def test_shift_round_trip(self, random_windows):
        """shift(shift(w, 3, plus), 3, minus) restores w on [0, N−3)."""
        for w in random_windows[:200]:
            back = zset.shift(zset.shift(w, 3, 'plus'), 3, 'minus')
            assert np.array_equal(back.bits, w.bits[:w.horizon - 3])
        print("\n✓ Shift round trip")

    def test_shift_exhausted(self):
        """Shifting by the whole horizon is an error."""
        with pytest.raises(ValueError, match="exhausted"):
            zset.shift(zset.evens(16), 16, 'plus')
        print("\n✓ Exhausted window rejected")

    def test_intersect_hint(self):
        """Intersecting periodic sets combines patterns over the lcm period."""
        w = zset.intersect(zset.evens(60), zset.periodic((1, 1, 0), 60))
        assert w.tail_hint.pattern == (1, 0, 0, 0, 1, 0)
        assert w.tail_hint.density() == Fraction(1, 3)
        assert zset.union(zset.evens(60), zset.odds(60)).tail_hint == TailHint.all_beyond(0)
        print("\n✓ Intersection hint")

    def test_subset_and_from_bits(self):
        """Window inclusion; from_bits leaves the hint unknown."""
        w = zset.from_bits([1, 0, 1, 0, 1, 0])
        assert w.same_members(zset.evens(6))
        assert not w.tail_hint.known
        assert zset.is_subset(zset.intersect(zset.evens(60), zset.periodic((1, 1, 0), 60)), zset.evens(60))
        assert not zset.is_subset(zset.evens(8), zset.odds(8))
        print("\n✓ Subsets")

    def test_horizon_mismatch(self):
        """Binary operations need equal horizons."""
        with pytest.raises(ValueError, match="horizon mismatch"):
            zset.intersect(zset.evens(8), zset.evens(16))
        print("\n✓ Horizon mismatch rejected")

    def test_restricted(self):
        """Restriction keeps the hint."""
        assert zset.evens(16).restricted(8) == zset.evens(8)
        with pytest.raises(ValueError):
            zset.evens(16).restricted(0)
        print("\n✓ Restriction")


class TestDensity:
    """Test prefix and Banach density estimates."""

    def test_evens_exact(self):
        """evens at N=4096 has lower estimate exactly 1/2."""
        profile = zset.density_profile(zset.evens(4096), 256)
        assert profile.lower_est == 0.5
        assert profile.upper_est == pytest.approx(0.5, abs=1e-3)
        assert profile.banach_lower_est == 0.5
        print("\n✓ evens density")

    def test_power_blocks(self):
        """∪ₖ[4ᵏ, 2·4ᵏ) has upper density ≈ 2/3 and lower ≈ 1/3."""
        n = 2 ** 16
        profile = zset.density_profile(zset.power_blocks(n), n // 16)
        assert profile.upper_est == pytest.approx(2 / 3, abs=0.02)
        assert profile.lower_est == pytest.approx(1 / 3, abs=0.02)
        assert profile.banach_upper_est == 1.0
        assert profile.banach_lower_est == 0.0
        print(f"\n✓ power blocks: upper={profile.upper_est:.4f}, lower={profile.lower_est:.4f}")

    def test_single_block(self):
        """A single block [100, 200) in N=1000."""
        w = zset.from_members(range(100, 200), 1000)
        profile = zset.density_profile(w, 64)
        assert profile.banach_upper_est == 1.0
        assert profile.upper_est == pytest.approx(0.2)
        assert profile.lower_est <= 0.2
        print("\n✓ Single block")

    def test_density_ordering(self, random_windows):
        """BD_* ≤ D_ ≤ D̄ ≤ BD* on every window."""
        for w in random_windows[:100]:
            p = zset.density_profile(w, 16)
            assert p.banach_lower_est <= p.lower_est <= p.upper_est <= p.banach_upper_est
        print("\n✓ Density ordering")

    def test_adding_element_monotone(self):
        """Adding a member never lowers the upper estimate."""
        w = zset.periodic((1, 0, 0), 512)
        bits = w.bits.copy()
        bits[400] = True
        bigger = WindowSet(bits)
        assert zset.density_profile(bigger, 32).upper_est >= zset.density_profile(w, 32).upper_est
        print("\n✓ Monotone upper density")

    def test_bad_window(self):
        """min_banach_window must be positive."""
        with pytest.raises(ValueError):
            zset.density_profile(zset.evens(64), 0)
        print("\n✓ Bad Banach window rejected")


class TestGapRun:
    """Test gap and run statistics."""

    def test_evens(self):
        """evens on [0, 16): max_gap 2, longest_run 1."""
        stats = zset.gap_run_stats(zset.evens(16), 4)
        assert stats.max_gap == 2
        assert stats.longest_run == 1
        assert sorted(stats.run_starts) == [1, 2, 4]
        print("\n✓ evens stats")

    def test_boundary_gap(self):
        """{0..7} on [0, 16): the trailing gap counts."""
        stats = zset.gap_run_stats(zset.from_members(range(8), 16), 1)
        assert stats.longest_run == 8
        assert stats.max_gap == 8
        print("\n✓ Boundary gap")

    def test_empty(self):
        """The empty set has max_gap N and no runs."""
        stats = zset.gap_run_stats(zset.empty(32), 4)
        assert stats.max_gap == 32
        assert stats.longest_run == 0
        assert all(s.count() == 0 for s in stats.run_starts.values())
        print("\n✓ Empty set stats")

    def test_run_start_hint(self):
        """Run starts of length 2 in (1,0,0) are empty with an exact hint."""
        stats = zset.gap_run_stats(zset.periodic((1, 0, 0), 30), 4)
        assert stats.max_gap == 3
        assert stats.run_starts[2].count() == 0
        assert stats.run_starts[2].tail_hint.kind is TailKind.NONE_BEYOND
        print("\n✓ Run start hint")

    def test_naive_oracle(self):
        """Random 5000-bit sets agree with the naive scanner."""
        rng = np.random.default_rng(11)
        for _ in range(50):
            bits = rng.random(5000) < rng.uniform(0.1, 0.9)
            stats = zset.gap_run_stats(WindowSet(bits), 1)
            assert (stats.max_gap, stats.longest_run) == naive_gap_and_run(bits.tolist())
        print("\n✓ Naive scanner agreement")

    def test_complement_run_is_interior_gap(self, random_windows):
        """Longest run of the complement equals the largest interior gap minus one."""
        for w in random_windows[:200]:
            members = w.members()
            if members.size < 2 or members[0] != 0 or members[-1] != w.horizon - 1:
                continue
            interior = int(np.diff(members).max()) - 1
            assert zset.gap_run_stats(zset.complement(w), 1).longest_run == interior
        print("\n✓ Complement runs match interior gaps")


class TestRle:
    """Test the run-length text form."""

    def test_to_rle(self):
        """evens on [0, 4)."""
        assert zset.to_rle(zset.evens(4)) == '4;1:1,0:1,1:1,0:1'
        print("\n✓ to_rle")

    def test_round_trip(self, random_windows):
        """from_rle inverts to_rle."""
        for w in random_windows[:50]:
            assert zset.from_rle(zset.to_rle(w)).same_members(w)
        print("\n✓ RLE round trip")

    @pytest.mark.parametrize("line", ['x', '4;1:2', '4;2:4', '4;1:0,0:4'])
    def test_malformed(self, line):
        """Malformed lines raise ValueError."""
        with pytest.raises(ValueError):
            zset.from_rle(line)
