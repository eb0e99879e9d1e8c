"""Process-step cost parameterization and the per-technology cost assembly.

Every cost is a multiple of the arbitrary unit k_c (the cost of subjecting
unit area to one pass of each of the five canonical process steps), times
lambda^2 of die area. Absolute dollars are out of scope by construction.

Two die-cost modes ship side by side because the published constants and
the step-count arithmetic disagree: 'eq13-faithful' derives the die
parameter from the step counts, 'paper-constants' uses the published
values. Reports always show both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import ComparisonError, ConfigError, DomainValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .techlib import TechnologyProfile

MODE_PAPER = "paper-constants"
MODE_EQ13 = "eq13-faithful"
COST_MODES = (MODE_PAPER, MODE_EQ13)


@dataclass(frozen=True)
class ProcessStepCounts:
    """Counts of the five canonical fabrication step families."""

    photolithography: int = 0
    diffusion: int = 0
    etching: int = 0
    deposition: int = 0
    implantation: int = 0

    def __post_init__(self) -> None:
        for name in ("photolithography", "diffusion", "etching", "deposition", "implantation"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 0):
                raise DomainValidationError(f"step count {name} must be an integer >= 0")


@dataclass(frozen=True)
class CostWeights:
    """Fractions of k_c attributed to each step family; they sum to 1."""

    photolithography: float = 0.32
    diffusion: float = 0.22
    etching: float = 0.18
    deposition: float = 0.16
    implantation: float = 0.12

    def __post_init__(self) -> None:
        values = (
            self.photolithography,
            self.diffusion,
            self.etching,
            self.deposition,
            self.implantation,
        )
        if any(not 0.0 < w < 1.0 for w in values):
            raise DomainValidationError("every cost weight must lie in (0, 1)")
        if abs(sum(values) - 1.0) > 1e-12:
            raise DomainValidationError(f"cost weights must sum to 1.0, got {sum(values)}")


DEFAULT_WEIGHTS = CostWeights()


@dataclass(frozen=True)
class CostBreakdown:
    """Die, metal, bonding and cooling cost of one chip, in k_c * lambda^2."""

    die: float
    metal: float
    bonding: float
    cooling: float
    mode: str

    def __post_init__(self) -> None:
        for name in ("die", "metal", "bonding", "cooling"):
            if getattr(self, name) < 0:
                raise DomainValidationError(f"cost component {name} must be >= 0")
        if self.mode not in COST_MODES:
            raise DomainValidationError(f"unknown cost mode {self.mode!r}")

    @property
    def total(self) -> float:
        return self.die + self.metal + self.bonding + self.cooling


def unit_area_process_cost(
    steps: ProcessStepCounts, weights: CostWeights = DEFAULT_WEIGHTS
) -> float:
    """Cost per unit area of one pass through the given step counts, in k_c."""
    return (
        weights.photolithography * steps.photolithography
        + weights.diffusion * steps.diffusion
        + weights.etching * steps.etching
        + weights.deposition * steps.deposition
        + weights.implantation * steps.implantation
    )


def metal_layer_unit_cost(tech: "TechnologyProfile") -> float:
    """Per-layer metal cost parameter, derived from the metal step counts."""
    return unit_area_process_cost(tech.metal_steps)


def die_unit_cost(tech: "TechnologyProfile", mode: str) -> float:
    """Die cost parameter c_pd for the requested mode."""
    if mode == MODE_EQ13:
        return unit_area_process_cost(tech.die_steps)
    if mode == MODE_PAPER:
        if tech.paper_cpd is not None:
            return tech.paper_cpd
        return unit_area_process_cost(tech.die_steps)
    raise ConfigError(f"unknown cost mode {mode!r}; expected one of {COST_MODES}")


def chip_cost(
    tech: "TechnologyProfile", die_area: float, n_metal: int, mode: str = MODE_PAPER
) -> CostBreakdown:
    """Assemble the constituent costs of one chip.

    die = c_pd * A; metal = c_pm * n_m * A; bonding applies only to stacked
    dies; cooling is linear in the configured relative chip temperature.
    """
    if die_area < 0:
        raise DomainValidationError(f"die_area must be >= 0, got {die_area}")
    if n_metal < 1:
        raise DomainValidationError(f"n_metal must be >= 1, got {n_metal}")
    if tech.bonding_per_area < 0 or tech.cooling_coefficient < 0 or tech.relative_temperature < 0:
        raise ConfigError(f"profile {tech.name!r} has negative cost constants")

    c_pd = die_unit_cost(tech, mode)
    c_pm = metal_layer_unit_cost(tech)
    bonding = tech.bonding_per_area * die_area if tech.tiers > 1 else 0.0
    cooling = tech.cooling_coefficient * tech.relative_temperature * die_area
    return CostBreakdown(
        die=c_pd * die_area,
        metal=c_pm * n_metal * die_area,
        bonding=bonding,
        cooling=cooling,
        mode=mode,
    )


def compare_costs(breakdowns: dict[str, CostBreakdown]) -> dict[str, dict[str, float]]:
    """Pairwise total-cost reductions, percent, one decimal.

    reductions[a][b] is how much cheaper a is than b: (1 - C_a / C_b) * 100.
    """
    if len(breakdowns) < 2:
        raise DomainValidationError("cost comparison needs at least two technologies")
    matrix: dict[str, dict[str, float]] = {}
    for a, cost_a in breakdowns.items():
        row: dict[str, float] = {}
        for b, cost_b in breakdowns.items():
            if a == b:
                continue
            if cost_b.total <= 0:
                raise ComparisonError(f"technology {b!r} has zero total cost")
            row[b] = round((1.0 - cost_a.total / cost_b.total) * 100.0, 1)
        matrix[a] = row
    return matrix
