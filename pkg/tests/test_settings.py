"""
Tests for configuration loading and the pydantic settings models.

Usage:
    pytest tests/test_settings.py -v
"""

import json
import os
import sys
from pathlib import Path

import jsonschema
import pytest
from pydantic import ValidationError

# Add project root to Python path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from config.loader import get_config_value
from config.settings import ExperimentConfig, ProbeConfig, VerdictPolicy

SCHEMA_FILE = Path(project_root) / 'config.schema.json'


class TestLoader:
    """Test dotted lookups."""

    def test_nested_lookup(self):
        """Dotted paths walk nested mappings."""
        config = {'probe': {'horizon': 4096, 'radii': [0.5]}}
        assert get_config_value('probe.horizon', 1, config) == 4096
        assert get_config_value('probe.radii', None, config) == [0.5]
        print("\n✓ Nested lookup")

    def test_missing_keys_default(self):
        """Missing keys and non-mapping intermediates fall back to the default."""
        config = {'probe': {'horizon': 4096}}
        assert get_config_value('probe.samples', 64, config) == 64
        assert get_config_value('probe.horizon.x', 'd', config) == 'd'
        assert get_config_value('runner', None, {}) is None
        print("\n✓ Defaults for missing keys")


class TestVerdictPolicy:
    """Test the family membership thresholds."""

    def test_thick_refute(self):
        """⌈log₂N⌉ unless overridden."""
        policy = VerdictPolicy(syndetic_gap_frac=0.02, refute_gap_frac=0.25)
        assert policy.thick_refute(1024) == 10
        assert policy.thick_refute(1000) == 10
        assert VerdictPolicy(thick_refute_run=3).thick_refute(1024) == 3
        print("\n✓ Thick refutation run")

    def test_banach_window(self):
        """A fixed fraction of the horizon, at least 1."""
        policy = VerdictPolicy(banach_window_frac=0.0625)
        assert policy.banach_min_window(4096) == 256
        assert policy.banach_min_window(8) == 1
        print("\n✓ Banach window")

    def test_separated_thresholds(self):
        """The Holds gap threshold must lie below the Fails one."""
        with pytest.raises(ValidationError):
            VerdictPolicy(syndetic_gap_frac=0.3, refute_gap_frac=0.25)
        with pytest.raises(ValidationError):
            VerdictPolicy(margin=0.6)
        print("\n✓ Threshold validation")


class TestProbeConfig:
    """Test the classify sampling configuration."""

    def test_bounds(self):
        """Horizon and sample counts have lower bounds."""
        with pytest.raises(ValidationError):
            ProbeConfig(horizon=32)
        with pytest.raises(ValidationError):
            ProbeConfig(samples=1)
        print("\n✓ Bounds enforced")

    def test_grids(self):
        """ε grids are positive and descending; radii positive."""
        with pytest.raises(ValidationError):
            ProbeConfig(eps_grid=[0.1, 0.25])
        with pytest.raises(ValidationError):
            ProbeConfig(radii=[0.01, 0])
        assert ProbeConfig(eps_grid=[0.3, 0.3, 0.1]).eps_grid == [0.3, 0.3, 0.1]
        print("\n✓ Grid validation")

    def test_frozen_and_closed(self):
        """Configs are immutable and reject unknown keys."""
        cfg = ProbeConfig(horizon=1024)
        with pytest.raises(ValidationError):
            cfg.horizon = 2048
        with pytest.raises(ValidationError):
            ProbeConfig(horizon=1024, window=3)
        print("\n✓ Frozen, extra keys forbidden")

    def test_echo(self):
        """The echo is JSON-ready and includes the policy."""
        echo = ProbeConfig(horizon=1024, seed=11).echo()
        assert echo['horizon'] == 1024
        assert echo['seed'] == 11
        assert 'margin' in echo['policy']
        json.dumps(echo)
        print("\n✓ Config echo")


class TestExperimentConfig:
    """Test the CLI experiment model."""

    def test_seed_required(self):
        """Experiments are reproducible only with an explicit seed."""
        with pytest.raises(ValidationError):
            ExperimentConfig()
        print("\n✓ Seed required")

    def test_eps_sorted(self):
        """The ε grid is stored descending."""
        cfg = ExperimentConfig(seed=1, eps_grid=[0.05, 0.25, 0.1])
        assert cfg.eps_grid == [0.25, 0.1, 0.05]
        with pytest.raises(ValidationError):
            ExperimentConfig(seed=1, eps_grid=[0.1, -0.1])
        print("\n✓ ε grid sorted")

    def test_ranges(self):
        """a values lie in (0, 1); the horizon is at least 1024."""
        with pytest.raises(ValidationError):
            ExperimentConfig(seed=1, a_grid=[0.5, 1.0])
        with pytest.raises(ValidationError):
            ExperimentConfig(seed=1, horizon=512)
        with pytest.raises(ValidationError):
            ExperimentConfig(seed=1, format='xml')
        print("\n✓ Range validation")

    def test_probe_config(self):
        """The probe projection carries the sampling fields."""
        cfg = ExperimentConfig(seed=4, horizon=2048, samples=16, eps_grid=[0.2, 0.1], point_grid=3)
        probe = cfg.probe_config()
        assert isinstance(probe, ProbeConfig)
        assert (probe.horizon, probe.samples, probe.seed, probe.point_grid) == (2048, 16, 4, 3)
        assert probe.eps_grid == [0.2, 0.1]
        print("\n✓ Probe projection")

    def test_published_schema(self):
        """config.schema.json lists the model's fields and accepts a valid config."""
        schema = json.loads(SCHEMA_FILE.read_text(encoding='utf-8'))
        assert set(schema['properties']) == set(ExperimentConfig.model_fields)
        assert schema['required'] == ['seed']
        jsonschema.validate({'seed': 3, 'systems': ['doubling'], 'format': 'csv'}, schema)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate({'seed': 3, 'horizon': 100}, schema)
        print("\n✓ Published schema")

    def test_policy_from_config(self):
        """Verdict thresholds set in the experiment reach the classify configuration."""
        cfg = ExperimentConfig(seed=2, policy={'margin': 0.05, 'syndetic_gap_frac': 0.01})
        probe = cfg.probe_config()
        assert probe.margin == 0.05
        assert probe.policy.syndetic_gap_frac == 0.01
        assert probe.echo()['policy']['margin'] == 0.05
        with pytest.raises(ValidationError):
            ExperimentConfig(seed=2, policy={'margin': 0.7})
        print("\n✓ Policy carried into probes")

    def test_policy_schema_and_flag(self):
        """The schema accepts a policy mapping; --margin overrides the file value."""
        from main import build_parser, experiment_config

        schema = json.loads(SCHEMA_FILE.read_text(encoding='utf-8'))
        jsonschema.validate({'seed': 3, 'policy': {'margin': 0.1, 'thick_refute_run': 4}}, schema)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate({'seed': 3, 'policy': {'window': 1}}, schema)
        args = build_parser().parse_args(['analyze', '--seed', '5', '--margin', '0.04'])
        assert experiment_config(args).policy.margin == 0.04
        print("\n✓ Policy schema and CLI flag")
