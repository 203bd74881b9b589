"""
Tests for factor maps and the preservation of ℱ-equicontinuity.

Usage:
    pytest tests/test_factor.py -v
"""

import os
import sys

import pytest

# Add project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from config.settings import ProbeConfig
from core.family import SpecParseError, parse_family
from services.classify.probe import HypothesisError
from services.dynamics.space import make_system
from services.dynamics.symbolic import ShiftPoint, ThueMorse
from services.factor.factor import (
    OpennessKind,
    commutation_check,
    commutes,
    parse_factor,
    preservation_check,
    projection_factor,
    sliding_block_factor,
    xor_next_factor,
)


@pytest.fixture(scope="module")
def cfg():
    return ProbeConfig(horizon=1024, samples=8, delta_steps=4, open_set_probes=6, point_grid=4,
                       eps_grid=[0.25, 0.1])


class TestProjection:
    """Test coordinate projections."""

    def test_projection_targets(self):
        """proj1 / proj2 land on the coordinate systems."""
        fm = parse_factor('proj2(prod(rot(sqrt2-1),doubling))')
        assert fm.target.name == 'doubling'
        assert fm.openness.kind is OpennessKind.OPEN
        assert fm.openness.admits()
        assert parse_factor('proj1(prod(rot(sqrt2-1),doubling))').target.name == 'rot(sqrt2-1)'
        print("\n✓ Projection targets")

    def test_commutes(self):
        """π ∘ (T × S) = T ∘ π on grid points."""
        fm = parse_factor('proj1(prod(rot(sqrt2-1),doubling))')
        points = fm.source.point_grid(8)
        assert commutes(fm, points)
        assert commutation_check(fm, []) == 0.0
        print("\n✓ Projections commute")

    def test_needs_product(self):
        """Projections are only defined on products."""
        with pytest.raises(ValueError):
            projection_factor(make_system('doubling'))
        with pytest.raises(ValueError):
            projection_factor(make_system('prod(doubling,tent)'), 'third')
        print("\n✓ Projection arguments checked")

    def test_preservation(self, cfg):
        """An equicontinuous product of rotations has an equicontinuous factor."""
        fm = parse_factor('proj1(prod(rot(sqrt2-1),rot(golden)))')
        v = preservation_check(fm, parse_family('thick'), cfg)
        assert v.holds
        assert v.witness['source_global'] == 'Holds'
        assert v.witness['target_global'] == 'Holds'
        assert all(row['target'] == 'Holds' for row in v.witness['pointwise'])
        print("\n✓ Equicontinuity passes to the factor")


class TestSlidingBlock:
    """Test sliding block codes on shift systems."""

    def test_xor_next_thue_morse(self):
        """Thue–Morse maps to the period-doubling sequence."""
        fm = xor_next_factor()
        image = fm(ShiftPoint(ThueMorse()))
        assert image.rule.text(0, 8) == '10111010'
        assert fm.openness.kind is OpennessKind.OPEN_AT_POINTS
        print("\n✓ xor-next image")

    def test_xor_next_commutes(self):
        """Block codes commute with the shift by construction."""
        fm = xor_next_factor()
        assert commutes(fm, fm.source.point_grid(6))
        print("\n✓ Block code commutes")

    def test_identity_and_constant_codes(self):
        """The identity code is the source itself; a constant code is open."""
        identity = parse_factor('sbc(r=1,table=00001111)')
        assert identity.target is identity.source
        assert identity.openness.kind is OpennessKind.OPEN
        constant = sliding_block_factor('00000000', 1)
        assert constant.openness.admits()
        assert constant.target.isometric
        print("\n✓ Identity and constant codes")

    def test_unknown_openness_rejected(self, cfg):
        """Preservation is not applied without an openness guarantee."""
        with pytest.raises(HypothesisError, match="open"):
            preservation_check(xor_next_factor(), parse_family('thick'), cfg)
        print("\n✓ Non-open factor rejected")

    def test_non_shift_source(self):
        """Block codes need a shift system."""
        with pytest.raises(ValueError):
            sliding_block_factor('00111100', 1, make_system('doubling'))
        print("\n✓ Non-shift source rejected")


class TestGrammar:
    """Test factor descriptors."""

    def test_source_option(self):
        """sbc(...) takes an optional source system."""
        fm = parse_factor('sbc(r=1,table=00111100,source=thue_morse)')
        assert fm.source.name == 'thue_morse'
        print("\n✓ Explicit source")

    @pytest.mark.parametrize("text", ['proj1(doubling)', 'proj3(prod(doubling,tent))', 'foo',
                                      'sbc(r=1,table=0101)', 'sbc(table=00111100)'])
    def test_errors(self, text):
        """Malformed descriptors raise SpecParseError."""
        with pytest.raises(SpecParseError):
            parse_factor(text)
