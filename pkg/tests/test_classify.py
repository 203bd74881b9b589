"""
Tests for the ℱ-equicontinuity / ℱ-sensitivity probes, the dichotomy and the
density and mean-equicontinuity relations.

The rotation is the isometric baseline and the doubling map the sensitive
one; both have exact traces, so the verdicts below are decided exactly.

Usage:
    pytest tests/test_classify.py -v
"""

import os
import sys
from fractions import Fraction
from types import SimpleNamespace

import pytest

# Add project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from config.settings import ProbeConfig, VerdictPolicy
from core.family import parse_family
from services.classify.dichotomy import (
    BRANCH_ALMOST_EQUICONTINUOUS,
    BRANCH_SENSITIVE,
    density_dichotomy,
    dichotomy_report,
    sensitivity_over_grid,
)
from services.classify.equicontinuity import (
    almost_f_equicontinuity,
    f_equi_point,
    f_equicontinuity,
    filter_intersection_check,
)
from services.classify.lemmas import (
    lemma31_invariance_check,
    lemma43_44_check,
    lemma45_check,
    sensitivity_offset,
    strength_monotonicity_check,
)
from services.classify.mean import mean_equi_point, mean_equicontinuity, mean_l_stable, mean_sensitivity
from services.classify.probe import HypothesisError, delta_grid
from services.classify.sensitivity import f_sensitivity, open_set_probes
from services.dynamics.space import make_system


@pytest.fixture(scope="module")
def cfg():
    """Small probe budget; exact traces keep the verdicts decided."""
    policy = VerdictPolicy(syndetic_gap_frac=0.02, refute_gap_frac=0.25, margin=0.02,
                           refute_density=0.1, banach_window_frac=0.0625)
    return ProbeConfig(horizon=2048, samples=8, delta_steps=4, open_set_probes=6, point_grid=4,
                       eps_grid=[0.25, 0.1, 0.05], seed=7, policy=policy)


@pytest.fixture(scope="module")
def rotation():
    return make_system('rot(sqrt2-1)')


@pytest.fixture(scope="module")
def doubling():
    return make_system('doubling')


class TestProbeGrids:
    """Test the δ grid and open-set probes."""

    def test_delta_grid(self, doubling, cfg):
        """Halving from ε, clamped to the diameter."""
        expected = [Fraction(1, 4), Fraction(1, 8), Fraction(1, 16), Fraction(1, 32)]
        assert delta_grid(doubling, 0.25, cfg) == expected
        assert delta_grid(doubling, 1.0, cfg)[0] == Fraction(1, 2)
        print("\n✓ δ grid")

    def test_open_set_probes(self, doubling, cfg):
        """Centers × radii, truncated to open_set_probes."""
        probes = open_set_probes(doubling, cfg)
        assert len(probes) == cfg.open_set_probes
        assert {r for _, r in probes} <= set(cfg.radii)
        print("\n✓ Open-set probes")


class TestEquicontinuity:
    """Test the point and global equicontinuity searches."""

    @pytest.mark.parametrize("family", ['thick', 'synd', 'ud>0.3', 'ld>=0.7'])
    def test_rotation_equicontinuous(self, rotation, cfg, family):
        """Isometries are ℱ-equicontinuous for every family: traces stay below δ ≤ ε."""
        report = f_equicontinuity(rotation, parse_family(family), cfg=cfg)
        assert report.verdict.holds
        assert report.delta_found > 0
        assert report.verdict.witness['isometry_shortcut_agrees'] is True

    def test_rotation_point(self, rotation, cfg):
        """The first δ on the grid already works for an isometry."""
        report = f_equi_point(rotation, Fraction(1, 5), parse_family('synd'), 0.1, cfg)
        assert report.verdict.holds
        assert report.delta_found == pytest.approx(0.1)
        print("\n✓ Rotation point")

    @pytest.mark.parametrize("family", ['synd', 'B', 'ld>=0.7'])
    def test_doubling_not_almost_equicontinuous(self, doubling, cfg, family):
        """Pairs at distance δ/3·2^−k end at distance 1/3 > ε forever."""
        report = almost_f_equicontinuity(doubling, parse_family(family), cfg)
        assert report.verdict.fails
        assert len(report.verdict.witness['points']) == cfg.point_grid

    def test_doubling_point_refuted(self, doubling, cfg):
        """Every δ on the grid sees a refuting pair."""
        report = f_equi_point(doubling, Fraction(1, 4), parse_family('thick'), 0.25, cfg)
        assert report.verdict.fails
        assert report.delta_found is None
        print("\n✓ Doubling point refuted")

    def test_bad_epsilon(self, doubling, cfg):
        """ε must be positive."""
        with pytest.raises(ValueError):
            f_equi_point(doubling, 0, parse_family('thick'), 0, cfg)
        with pytest.raises(ValueError):
            f_equicontinuity(doubling, parse_family('thick'), [0.1, 0.25], cfg)
        print("\n✓ Bad ε rejected")

    def test_filter_intersection_needs_filter(self, rotation, cfg):
        """Syndetic sets are not closed under intersection."""
        with pytest.raises(HypothesisError, match="filter"):
            filter_intersection_check(rotation, parse_family('synd'), 0, cfg)
        print("\n✓ Non-filter rejected")


class TestSensitivity:
    """Test ℱ-sensitivity probes."""

    @pytest.mark.parametrize("family", ['cf', 'thick', 'synd', 'ud>0.3', 'ud>0.9'])
    def test_doubling_sensitive(self, doubling, cfg, family):
        """Arcs double until they cover the circle: S(U, 1/4) is cofinite."""
        report = f_sensitivity(doubling, parse_family(family), 0.25, cfg)
        assert report.verdict.holds
        assert all(w['exact_diameters'] for w in report.witness_sets)

    @pytest.mark.parametrize("family", ['thick', 'ud>0.3', 'B'])
    def test_rotation_not_sensitive(self, rotation, cfg, family):
        """Arcs of length ≤ 2^−7 never grow past 0.02."""
        report = f_sensitivity(rotation, parse_family(family), 0.02, cfg)
        assert report.verdict.fails
        assert 'refuting_set' in report.verdict.witness

    def test_over_grid(self, doubling, cfg):
        """The first ε of the grid already decides the doubling map."""
        report = sensitivity_over_grid(doubling, parse_family('thick'), cfg)
        assert report.verdict.holds
        assert report.verdict.witness['epsilon'] == 0.25
        print("\n✓ Sensitivity over the ε grid")

    def test_bad_epsilon(self, doubling, cfg):
        """ε must be positive."""
        with pytest.raises(ValueError):
            f_sensitivity(doubling, parse_family('thick'), -0.1, cfg)
        print("\n✓ Bad ε rejected")


class TestDichotomy:
    """Exactly one branch holds on transitive systems."""

    @pytest.mark.parametrize("family", ['thick', 'cf', 'ud>0.3'])
    def test_doubling_sensitive_branch(self, doubling, cfg, family):
        """ℱ-sensitive, and no kℱ-equicontinuous point."""
        report = dichotomy_report(doubling, parse_family(family), cfg)
        assert report.consistent
        assert report.branch == BRANCH_SENSITIVE
        assert report.as_dict()['branch'] == BRANCH_SENSITIVE

    @pytest.mark.parametrize("family", ['thick', 'ud>0.3'])
    def test_rotation_equicontinuous_branch(self, rotation, cfg, family):
        """Not ℱ-sensitive, and every point is kℱ-equicontinuous."""
        report = dichotomy_report(rotation, parse_family(family), cfg)
        assert report.consistent
        assert report.branch == BRANCH_ALMOST_EQUICONTINUOUS

    def test_needs_transitivity(self, cfg):
        """The identity is not transitive."""
        with pytest.raises(HypothesisError, match="transitive"):
            dichotomy_report(make_system('id(circle)'), parse_family('thick'), cfg)
        print("\n✓ Non-transitive system rejected")

    def test_density_dichotomy(self, doubling, cfg):
        """The doubling map is D̄(0.3+)-sensitive and not kD̄(0.3+)-equicontinuous."""
        v = density_dichotomy(doubling, [0.3], cfg)
        assert v.holds
        assert v.witness['first_decided_a'] == 0.3
        print("\n✓ Density dichotomy")

    def test_density_dichotomy_range(self, doubling, cfg):
        """a must lie in (0, 1)."""
        with pytest.raises(ValueError):
            density_dichotomy(doubling, [1.5], cfg)
        print("\n✓ a range checked")


class TestMean:
    """Test the Birkhoff-average notions."""

    def test_rotation_mean_equicontinuous(self, rotation, cfg):
        """Constant separations average below ε."""
        assert mean_equicontinuity(rotation, cfg).verdict.holds
        assert mean_l_stable(rotation, cfg).verdict.holds
        print("\n✓ Rotation is mean equicontinuous")

    def test_doubling_not_mean_equicontinuous(self, doubling, cfg):
        """The 1/3 cycle averages 1/3 > 1/4."""
        assert mean_equicontinuity(doubling, cfg).verdict.fails
        print("\n✓ Doubling is not mean equicontinuous")

    def test_mean_points(self, rotation, doubling, cfg):
        """Point versions agree with the global verdicts."""
        assert mean_equi_point(rotation, Fraction(1, 3), cfg).verdict.holds
        report = mean_equi_point(doubling, Fraction(1, 3), cfg)
        assert report.verdict.fails
        assert report.notion == "MeanPoint(1/3)"
        print("\n✓ Mean equicontinuous points")

    def test_doubling_mean_sensitive(self, doubling, cfg):
        """Every small arc holds a pair averaging 1/3."""
        report = mean_sensitivity(doubling, 0.2, cfg)
        assert report.verdict.holds
        assert all(w['outcome'] == 'Holds' for w in report.witness_sets)
        print("\n✓ Doubling is mean sensitive")

    def test_rotation_not_mean_sensitive(self, rotation, cfg):
        """Pairs in small arcs average their fixed small distance."""
        assert mean_sensitivity(rotation, 0.2, cfg).verdict.fails
        print("\n✓ Rotation is not mean sensitive")


class TestLemmas:
    """Test the relations between mean and density notions."""

    def test_sensitivity_offset(self, doubling):
        """δ′ = 0.2 − 0.1 · 1/2 = 3/20, exactly."""
        assert sensitivity_offset(doubling, 0.2, 0.1) == Fraction(3, 20)
        print("\n✓ δ′ exact")

    def test_mean_sensitivity_transfers(self, doubling, cfg):
        """Mean sensitivity at 0.2 gives D̄(0.1+)-sensitivity at 3/20."""
        v = lemma45_check(doubling, 0.2, 0.1, cfg)
        assert v.holds
        assert v.witness['delta_prime_exact'] == '3/20'
        assert v.witness['mean_sensitivity'] == 'Holds'
        assert v.witness['density_sensitivity'] == 'Holds'
        print("\n✓ Mean sensitivity transfers")

    def test_not_applicable(self, rotation, cfg):
        """Without mean sensitivity there is nothing to check."""
        v = lemma45_check(rotation, 0.2, 0.1, cfg)
        assert v.holds
        assert v.witness['not_applicable'] is True
        print("\n✓ Vacuous on rotations")

    def test_offset_out_of_range(self, doubling, cfg):
        """a ≥ δ/diam(X) leaves no positive δ′."""
        with pytest.raises(HypothesisError):
            lemma45_check(doubling, 0.2, 0.4, cfg)
        with pytest.raises(HypothesisError):
            lemma45_check(doubling, 0.2, -0.1, cfg)
        with pytest.raises(ValueError):
            lemma45_check(doubling, 0, 0.1, cfg)
        print("\n✓ Out-of-range a rejected")

    def test_mean_and_density_equicontinuity(self, rotation, cfg):
        """Both directions hold on an isometry."""
        verdicts = lemma43_44_check(rotation, [0.25, 0.5], cfg)
        assert len(verdicts) == 3
        assert all(v.holds for v in verdicts)
        assert verdicts[-1].witness['premise'] == 'Holds'
        print("\n✓ Mean and density equicontinuity agree")

    def test_backward_invariance(self, doubling, rotation, cfg):
        """No point is refuted while its image is an Eq_ε member."""
        assert lemma31_invariance_check(rotation, parse_family('thick'), 0.1, cfg).holds
        assert lemma31_invariance_check(doubling, parse_family('thick'), 0.1, cfg).holds
        print("\n✓ Backward invariance")


class TestStrengthMonotonicity:
    """A verdict that holds for a family must not be refuted for a wider one."""

    def test_doubling_sensitivity(self, doubling, cfg):
        """cf-sensitivity of the doubling map carries over to thick and ud>0.3."""
        cf = parse_family('cf')
        for wider in ('thick', 'ud>0.3', 'B'):
            v = strength_monotonicity_check(doubling, cf, parse_family(wider), 0.25, cfg)
            assert v.holds
            assert v.witness['sensitivity'] == ['Holds', 'Holds']
        print("\n✓ Doubling sensitivity monotone")

    def test_rotation_equi_point(self, rotation, cfg):
        """cf-equicontinuity at a rotation point carries over to ld>=0.7 and ud>0.3."""
        cf = parse_family('cf')
        for wider in ('ld>=0.7', 'ud>0.3'):
            v = strength_monotonicity_check(rotation, cf, parse_family(wider), 0.1, cfg)
            assert v.holds
            assert v.witness['equi_point'] == ['Holds', 'Holds']
            assert v.witness['sensitivity'] == ['Fails', 'Fails']
        print("\n✓ Rotation equicontinuity monotone")

    def test_not_an_inclusion(self, doubling, cfg):
        """Pairs outside the inclusion table are rejected."""
        with pytest.raises(HypothesisError):
            strength_monotonicity_check(doubling, parse_family('thick'), parse_family('cf'), 0.25, cfg)
        print("\n✓ Unknown inclusion rejected")

    def test_violation_reported(self, doubling, cfg, monkeypatch):
        """A Holds for cf next to a Fails for thick is reported as Fails."""
        import services.classify.lemmas as lemmas
        from core.family import fails, holds

        def fake_sensitivity(sys, f, epsilon, cfg):
            outcome = holds if f.kind.value == 'cf' else fails
            return SimpleNamespace(verdict=outcome({'fake': True}, cfg.horizon))

        monkeypatch.setattr(lemmas, 'f_sensitivity', fake_sensitivity)
        v = strength_monotonicity_check(doubling, parse_family('cf'), parse_family('thick'), 0.25, cfg)
        assert v.fails
        assert v.witness['broken'] == ['sensitivity']
        print("\n✓ Violation reported")
