"""
Tests for the system zoo, symbolic sequence rules and ball sampling.

Usage:
    pytest tests/test_space.py -v
"""

import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from core.family import SpecParseError
from services.dynamics.space import (
    MetricSystem,
    Product,
    SampleMode,
    as_fraction,
    default_point,
    make_system,
    parse_system,
    sample_ball,
)
from services.dynamics.symbolic import (
    DyadicOfAngle,
    Periodic,
    ShiftPoint,
    SlidingBlock,
    ThueMorse,
    first_mismatch,
    multiplicative_order,
    sturmian_rule,
)

ZOO = ['rot(sqrt2-1)', 'doubling', 'tent', 'shift', 'sturmian(sqrt2-1)', 'thue_morse',
       'prod(rot(sqrt2-1),rot(golden))', 'id(circle)']


class TestGrammar:
    """Test system descriptors."""

    @pytest.mark.parametrize("text", ZOO)
    def test_make_system(self, text):
        """Every zoo descriptor builds a system."""
        system = make_system(text)
        assert isinstance(system, MetricSystem)
        assert system.diameter > 0

    def test_names_and_flags(self):
        """Names and literature flags."""
        rot = make_system('rot(sqrt2-1)')
        assert rot.name == 'rot(sqrt2-1)'
        assert rot.isometric and rot.transitive
        assert float(rot.alpha) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
        doubling = make_system('doubling')
        assert doubling.transitive and not doubling.isometric
        assert not make_system('id(circle)').transitive
        assert make_system('rotation(golden)').name == 'rot(golden)'
        print("\n✓ Names and flags")

    def test_nested_product(self):
        """prod() splits its arguments at the top level only."""
        spec = parse_system('prod(prod(doubling,tent),shift)')
        assert spec.head == 'prod'
        assert spec.args[0].head == 'prod'
        assert spec.args[1].head == 'shift'
        print("\n✓ Nested products")

    @pytest.mark.parametrize("text", ['foo', 'doubling(2)', 'rot', 'prod(doubling)', 'id(torus)',
                                      'rot(abc)'])
    def test_parse_errors(self, text):
        """Malformed descriptors raise SpecParseError."""
        with pytest.raises(SpecParseError):
            make_system(text)

    def test_rational_rotation_rejected(self):
        """Rational rotation numbers would break the transitivity flag."""
        with pytest.raises(ValueError, match="rational"):
            make_system('rot(1/3)')
        with pytest.raises(ValueError, match="rational"):
            make_system('rot(sqrt4)')
        print("\n✓ Rational rotations rejected")


class TestMaps:
    """Test exact iteration and metrics."""

    def test_doubling_iterate(self):
        """2ⁿx mod 1 in exact arithmetic."""
        doubling = make_system('doubling')
        assert doubling.iterate(Fraction(1, 3), 1) == Fraction(2, 3)
        assert doubling.iterate(Fraction(1, 8), 3) == 0
        assert doubling.iterate(Fraction(5, 7), 0) == Fraction(5, 7)
        print("\n✓ Doubling iterate")

    def test_tent_iterate_matches_steps(self):
        """The closed form agrees with repeated steps."""
        tent = make_system('tent')
        for x in (Fraction(3, 7), Fraction(1, 10), Fraction(5, 6)):
            for n in range(8):
                assert tent.iterate(x, n) == MetricSystem.iterate(tent, x, n)
        print("\n✓ Tent closed form")

    def test_rotation_iterate(self):
        """Rotation by nα."""
        rot = make_system('rot(sqrt2-1)')
        assert rot.iterate(0, 3) == (3 * rot.alpha) % 1
        assert rot.iterate(0, 3) == MetricSystem.iterate(rot, 0, 3)
        print("\n✓ Rotation iterate")

    def test_negative_iterate(self):
        """Negative iteration counts are rejected."""
        with pytest.raises(ValueError):
            make_system('doubling').iterate(Fraction(1, 3), -1)
        print("\n✓ Negative iterate rejected")

    def test_circle_metric(self):
        """Arc distance wraps around."""
        doubling = make_system('doubling')
        assert doubling.metric_exact(Fraction(1, 10), Fraction(9, 10)) == Fraction(1, 5)
        assert doubling.metric(0.1, 0.9) == pytest.approx(0.2)
        print("\n✓ Circle metric")

    def test_interval_bounds(self):
        """Interval points outside [0, 1] are rejected."""
        with pytest.raises(ValueError):
            make_system('tent').coerce(Fraction(3, 2))
        print("\n✓ Interval bounds")

    def test_shift_metric(self):
        """d(x, y) = 2^(−first mismatch)."""
        shift = make_system('shift')
        assert shift.metric_exact('0', '01') == Fraction(1, 2)
        assert shift.metric_exact('0', '1') == 1
        assert shift.metric_exact('01', '01') == 0
        print("\n✓ Shift metric")

    def test_product(self):
        """Product diameter and metric."""
        prod = make_system('prod(rot(sqrt2-1),rot(sqrt2-1))')
        assert isinstance(prod, Product)
        assert prod.diameter == pytest.approx(math.sqrt(0.5))
        assert prod.diameter_exact is None
        assert prod.metric((0, 0), (Fraction(3, 10), Fraction(4, 10))) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            prod.metric_exact((0, 0), (0, 0))
        assert make_system('prod(id(interval),tent)').diameter_exact is None
        print("\n✓ Product metric")

    def test_as_fraction(self):
        """Floats are read through their shortest repr."""
        assert as_fraction(0.3) == Fraction(3, 10)
        assert as_fraction('1/4') == Fraction(1, 4)
        assert as_fraction(Fraction(2, 3)) == Fraction(2, 3)
        print("\n✓ as_fraction")


class TestSymbolic:
    """Test sequence rules."""

    def test_thue_morse(self):
        """t(n) = popcount(n) mod 2, vectorized and scalar."""
        rule = ThueMorse()
        assert rule.text(0, 16) == '0110100110010110'
        assert rule.block(1000, 64).tolist() == [rule.symbol(1000 + i) for i in range(64)]
        print("\n✓ Thue–Morse")

    def test_period_doubling(self):
        """The radius-1 xor-next code maps Thue–Morse to the period-doubling word."""
        rule = SlidingBlock('00111100', 1, ThueMorse())
        assert rule.text(0, 8) == '10111010'
        assert rule.block(37, 32).tolist() == [rule.symbol(37 + i) for i in range(32)]
        print("\n✓ Period doubling")

    def test_sliding_block_table(self):
        """Tables must have 2^(2r+1) entries."""
        with pytest.raises(ValueError):
            SlidingBlock('0110', 1, ThueMorse())
        print("\n✓ Table length checked")

    def test_dyadic_angle(self):
        """Binary digits of 1/3 and their eventual period."""
        rule = DyadicOfAngle(Fraction(1, 3))
        assert rule.text(0, 6) == '010101'
        assert rule.eventual_period() == (0, '01')
        assert DyadicOfAngle(Fraction(3, 8)).eventual_period() == (3, '0')
        print("\n✓ Dyadic digits")

    def test_sturmian_block(self):
        """Vectorized and scalar Sturmian symbols agree and have density α."""
        alpha = as_fraction(make_system('sturmian(sqrt2-1)').alpha)
        rule = sturmian_rule(alpha)
        block = rule.block(0, 4000)
        assert block.tolist()[:50] == [rule.symbol(i) for i in range(50)]
        assert block.mean() == pytest.approx(float(alpha), abs=1e-3)
        print("\n✓ Sturmian coding")

    def test_periodic_word(self):
        """Periodic words must be non-empty 0/1 strings."""
        with pytest.raises(ValueError):
            Periodic('012')
        assert Periodic('01').eventual_period() == (0, '01')
        print("\n✓ Periodic words")

    def test_first_mismatch(self):
        """first_mismatch scans in chunks."""
        x = ShiftPoint(Periodic('0'))
        y = ShiftPoint(ThueMorse(), 0)
        assert first_mismatch(x, y, 100) == 1
        assert first_mismatch(x, x, 100) is None
        print("\n✓ first_mismatch")

    def test_multiplicative_order(self):
        """Order of 2 modulo odd numbers."""
        assert multiplicative_order(2, 3) == 2
        assert multiplicative_order(2, 7) == 3
        assert multiplicative_order(2, 1) == 1
        assert multiplicative_order(2, 3 ** 20) is None
        print("\n✓ multiplicative_order")


class TestSampling:
    """Test ball sampling."""

    @pytest.mark.parametrize("text", ZOO)
    def test_points_inside_ball(self, text):
        """Sampled points lie strictly inside B(x, δ)."""
        system = make_system(text)
        center = default_point(system)
        delta = Fraction(1, 16)
        points = sample_ball(system, center, delta, 3, 16, SampleMode.ADVERSARIAL)
        assert points
        for p in points:
            assert system.metric(center, p) < float(delta)

    def test_deterministic(self):
        """Same seed, same points."""
        doubling = make_system('doubling')
        a = sample_ball(doubling, Fraction(1, 8), 0.01, 5, 8)
        b = sample_ball(doubling, Fraction(1, 8), 0.01, 5, 8)
        assert a == b
        print("\n✓ Deterministic sampling")

    def test_bad_radius(self):
        """δ must be positive."""
        with pytest.raises(ValueError):
            sample_ball(make_system('doubling'), 0, 0, 1, 4)
        print("\n✓ Bad radius rejected")

    def test_adversarial_includes_center(self):
        """Adversarial mode appends the center and structured offsets."""
        doubling = make_system('doubling')
        points = sample_ball(doubling, Fraction(1, 8), Fraction(1, 4), 1, 4, SampleMode.ADVERSARIAL)
        assert Fraction(1, 8) in points
        assert len(points) > 4
        print("\n✓ Adversarial points")

    def test_grid_sizes(self):
        """point_grid returns the requested number of points."""
        for text in ZOO:
            assert len(make_system(text).point_grid(5)) == 5
        print("\n✓ Grid sizes")
