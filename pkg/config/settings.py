"""
Typed settings for verdicts, probes and experiment runs.

Numeric defaults are read from config/config.yaml through the loader, so a
deployment can retune thresholds without touching code.
"""
import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.loader import get_config_value


def _cfg(path: str, default):
    return lambda: get_config_value(path, default)


class VerdictPolicy(BaseModel):
    """Thresholds separating Holds / Fails / Inconclusive for windowed family membership."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    syndetic_gap_frac: float = Field(default_factory=_cfg('policy.syndetic_gap_frac', 0.02), gt=0, lt=1)
    refute_gap_frac: float = Field(default_factory=_cfg('policy.refute_gap_frac', 0.25), gt=0, le=1)
    thick_refute_run: Optional[int] = Field(default=None, ge=0)
    margin: float = Field(default_factory=_cfg('policy.margin', 0.02), ge=0, lt=0.5)
    refute_density: float = Field(default_factory=_cfg('policy.refute_density', 0.1), gt=0, le=1)
    banach_window_frac: float = Field(default_factory=_cfg('policy.banach_window_frac', 0.0625), gt=0, le=1)

    @model_validator(mode='after')
    def _separated(self) -> 'VerdictPolicy':
        if self.syndetic_gap_frac >= self.refute_gap_frac:
            raise ValueError(
                f"syndetic_gap_frac ({self.syndetic_gap_frac}) must be below "
                f"refute_gap_frac ({self.refute_gap_frac})"
            )
        return self

    def thick_refute(self, horizon: int) -> int:
        """Longest run at or below which a window refutes thickness (default ⌈log₂N⌉)."""
        if self.thick_refute_run is not None:
            return self.thick_refute_run
        return max(1, math.ceil(math.log2(max(horizon, 2))))

    def banach_min_window(self, horizon: int) -> int:
        return max(1, int(self.banach_window_frac * horizon))


class ProbeConfig(BaseModel):
    """Sampling configuration shared by every classify operation."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    horizon: int = Field(default_factory=_cfg('probe.horizon', 16384), ge=64)
    samples: int = Field(default_factory=_cfg('probe.samples', 64), ge=2)
    delta_steps: int = Field(default_factory=_cfg('probe.delta_steps', 8), ge=1)
    delta_min: float = Field(default_factory=_cfg('probe.delta_min', 1.0e-6), gt=0)
    open_set_probes: int = Field(default_factory=_cfg('probe.open_set_probes', 32), ge=1)
    radii: List[float] = Field(
        default_factory=_cfg('probe.radii', [0.00390625, 0.0009765625, 0.000244140625]),
        min_length=1,
    )
    point_grid: int = Field(default_factory=_cfg('probe.point_grid', 8), ge=1)
    eps_grid: List[float] = Field(default_factory=_cfg('probe.eps_grid', [0.25, 0.1, 0.05]), min_length=1)
    seed: int = Field(default_factory=_cfg('probe.seed', 7))
    policy: VerdictPolicy = Field(default_factory=VerdictPolicy)

    @field_validator('radii', 'eps_grid')
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(v <= 0 for v in values):
            raise ValueError(f"grid values must be positive, got {values}")
        return values

    @field_validator('eps_grid')
    @classmethod
    def _descending(cls, values: List[float]) -> List[float]:
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError(f"eps_grid must be descending, got {values}")
        return values

    @property
    def margin(self) -> float:
        return self.policy.margin

    def echo(self) -> dict:
        """Config echo embedded in every report."""
        return self.model_dump(mode='json')


class ExperimentConfig(BaseModel):
    """CLI experiment configuration; published as config.schema.json."""

    model_config = ConfigDict(extra='forbid')

    systems: List[str] = Field(default_factory=list)
    families: List[str] = Field(default_factory=list)
    eps_grid: List[float] = Field(default_factory=_cfg('probe.eps_grid', [0.25, 0.1, 0.05]), min_length=1)
    delta_min: float = Field(default_factory=_cfg('probe.delta_min', 1.0e-6), gt=0)
    horizon: int = Field(default_factory=_cfg('probe.horizon', 16384), ge=1024)
    samples: int = Field(default_factory=_cfg('probe.samples', 64), ge=2)
    open_set_probes: int = Field(default_factory=_cfg('probe.open_set_probes', 32), ge=1)
    seed: int
    outputs: str = Field(default_factory=_cfg('runner.outputs', 'output'))
    format: Literal['json', 'csv', 'both'] = Field(default_factory=_cfg('runner.format', 'both'))
    delta_steps: int = Field(default_factory=_cfg('probe.delta_steps', 8), ge=1)
    point_grid: int = Field(default_factory=_cfg('probe.point_grid', 8), ge=1)
    radii: List[float] = Field(
        default_factory=_cfg('probe.radii', [0.00390625, 0.0009765625, 0.000244140625]),
        min_length=1,
    )
    a_grid: List[float] = Field(default_factory=lambda: [0.1, 0.25, 0.5], min_length=1)
    lemma_delta: float = Field(default=0.2, gt=0)
    sets: List[str] = Field(default_factory=list)
    workers: int = Field(default_factory=_cfg('runner.workers', 1), ge=1)
    policy: VerdictPolicy = Field(default_factory=VerdictPolicy)

    @field_validator('eps_grid')
    @classmethod
    def _eps_descending(cls, values: List[float]) -> List[float]:
        if any(v <= 0 for v in values):
            raise ValueError(f"eps_grid values must be positive, got {values}")
        return sorted(values, reverse=True)

    @field_validator('a_grid')
    @classmethod
    def _a_in_unit(cls, values: List[float]) -> List[float]:
        if any(not 0 < v < 1 for v in values):
            raise ValueError(f"a_grid values must lie in (0, 1), got {values}")
        return values

    def probe_config(self) -> ProbeConfig:
        """Project the experiment onto the classify sampling configuration."""
        return ProbeConfig(
            horizon=self.horizon,
            samples=self.samples,
            delta_steps=self.delta_steps,
            delta_min=self.delta_min,
            open_set_probes=self.open_set_probes,
            radii=self.radii,
            point_grid=self.point_grid,
            eps_grid=self.eps_grid,
            seed=self.seed,
            policy=self.policy,
        )
