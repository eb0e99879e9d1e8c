"""Die-area formulas for the four integration styles.

Areas are in lambda^2 throughout and are never bound to physical
nanometers: the comparison is technology-relative. Two-tier stacks halve
the per-gate footprint and pay a via blockout overhead; the nanowire
fabric's via area is already folded into its per-gate figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import ConfigError, DomainValidationError
from .rent import RentParameters

if TYPE_CHECKING:  # pragma: no cover
    from .techlib import TechnologyProfile


@dataclass(frozen=True)
class GateGeometry:
    """Average gate footprint; the pitch is the side of the square footprint."""

    gate_area: float

    def __post_init__(self) -> None:
        if not self.gate_area > 0:
            raise DomainValidationError(f"gate_area must be > 0, got {self.gate_area}")

    @property
    def gate_pitch(self) -> float:
        return math.sqrt(self.gate_area)


@dataclass(frozen=True)
class ViaSpec:
    """Inter-tier via geometry and the multiplier on the Rent-derived count.

    TSVs are far too coarse to give every inter-tier wire its own via, so
    their count coefficient is a small fraction; monolithic inter-tier vias
    use 1.0.
    """

    blockout_area: float
    count_coefficient: float = 1.0

    def __post_init__(self) -> None:
        if self.blockout_area < 0:
            raise DomainValidationError(f"blockout_area must be >= 0, got {self.blockout_area}")
        if self.count_coefficient < 0:
            raise DomainValidationError(
                f"count_coefficient must be >= 0, got {self.count_coefficient}"
            )


@dataclass(frozen=True)
class DieArea:
    """Gate area plus via overhead, lambda^2."""

    gates_area: float
    via_overhead: float

    def __post_init__(self) -> None:
        if self.gates_area < 0 or self.via_overhead < 0:
            raise DomainValidationError("die area components must be >= 0")

    @property
    def total(self) -> float:
        return self.gates_area + self.via_overhead


def inter_tier_via_count(
    n_gates: float,
    rent: RentParameters,
    tiers: int,
    count_coefficient: float = 1.0,
) -> float:
    """Vias connecting stacked tiers: the inter-tier share of all interconnects.

    alpha * k * (1 - tiers^(p-1)) * N * (1 - N^(p-1)), scaled by the via
    spec's count coefficient. One tier needs no vias.
    """
    if tiers < 1:
        raise DomainValidationError(f"tiers must be >= 1, got {tiers}")
    if not n_gates >= 1:
        raise DomainValidationError(f"n_gates must be >= 1, got {n_gates}")
    inter_share = 1.0 - float(tiers) ** (rent.p - 1.0)
    total = rent.alpha * rent.k * n_gates * (1.0 - n_gates ** (rent.p - 1.0))
    return count_coefficient * inter_share * total


def die_area(tech: "TechnologyProfile", n_gates: float, rent: RentParameters) -> DieArea:
    """Die footprint for n_gates in the given technology."""
    if not n_gates >= 1:
        raise DomainValidationError(f"n_gates must be >= 1, got {n_gates}")
    if tech.gate_area is None or tech.gate_area <= 0:
        raise ConfigError(f"profile {tech.name!r} has no usable gate area")
    gates_area = n_gates * tech.gate_area / tech.tiers
    overhead = 0.0
    if tech.tiers > 1:
        if tech.via_spec is None:
            raise ConfigError(f"profile {tech.name!r} stacks tiers but has no via spec")
        count = inter_tier_via_count(
            n_gates, rent, tech.tiers, tech.via_spec.count_coefficient
        )
        overhead = count * tech.via_spec.blockout_area
    return DieArea(gates_area=gates_area, via_overhead=overhead)


def gate_pitch(tech: "TechnologyProfile") -> float:
    """Gate pitch in lambda: side of the effective per-gate footprint."""
    if tech.gate_area is None or tech.gate_area <= 0:
        raise ConfigError(f"profile {tech.name!r} has no usable gate area")
    return math.sqrt(tech.gate_area / tech.tiers)
