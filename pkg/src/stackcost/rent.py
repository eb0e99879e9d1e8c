"""Terminal and interconnect counting via Rent's rule.

Covers the plain power-law terminal count, the Donath-style total
interconnect count, and the stacked-nanowire partition that splits each
block's terminals between 3-D fabric features and top-metal wiring.

All counts are real-valued; rounding to integers happens only at report
time so that downstream integrals stay continuous.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainValidationError


@dataclass(frozen=True)
class RentParameters:
    """Complexity descriptors of a circuit system.

    k: average terminals per block, p: Rent exponent, fanout: average
    fan-out per gate. The sink-terminal fraction alpha is always derived
    from the fan-out, never stored.
    """

    k: float = 4.0
    p: float = 0.6
    fanout: float = 3.0

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise DomainValidationError(f"terminals per block k must be > 0, got {self.k}")
        if not 0.0 < self.p < 1.0:
            raise DomainValidationError(f"Rent exponent p must lie in (0, 1), got {self.p}")
        if not self.fanout > 0:
            raise DomainValidationError(f"fan-out must be > 0, got {self.fanout}")

    @property
    def alpha(self) -> float:
        """Fraction of on-chip terminals that are sink terminals."""
        return self.fanout / (self.fanout + 1.0)


@dataclass(frozen=True)
class PartitionScheme:
    """Number of nanowire transistor layers the gates are spread over.

    A single layer reduces every stacked-fabric formula to its 2-D
    counterpart.
    """

    n_layers: int = 1

    def __post_init__(self) -> None:
        if not (isinstance(self.n_layers, int) and self.n_layers >= 1):
            raise DomainValidationError(f"n_layers must be an integer >= 1, got {self.n_layers}")


@dataclass(frozen=True)
class TerminalSplit:
    """Partition of the stacked-fabric terminal budget.

    t_total terminals emanate from all nanowire layers together; t_metal of
    them reach the top metal stack and t_fabric are absorbed by fabric
    features. k_metal / k_fabric are the matching effective per-block
    terminal counts.
    """

    t_total: float
    t_metal: float
    t_fabric: float
    k_metal: float
    k_fabric: float

    def __post_init__(self) -> None:
        for name in ("t_total", "t_metal", "t_fabric", "k_metal", "k_fabric"):
            value = getattr(self, name)
            if value < 0:
                raise DomainValidationError(f"{name} must be >= 0, got {value}")
        if abs(self.t_metal + self.t_fabric - self.t_total) > 1e-12 * max(self.t_total, 1.0):
            raise DomainValidationError("terminal split does not add up to the total")


def _check_gates(n_gates: float) -> float:
    if not n_gates >= 1:
        raise DomainValidationError(f"n_gates must be >= 1, got {n_gates}")
    return float(n_gates)


def terminals(n_gates: float, rent: RentParameters) -> float:
    """Terminal count of a module with n_gates blocks: k * N^p."""
    n = _check_gates(n_gates)
    return rent.k * n**rent.p


def total_interconnects(n_gates: float, rent: RentParameters) -> float:
    """Total point-to-point interconnect count: alpha * k * N * (1 - N^(p-1))."""
    n = _check_gates(n_gates)
    return rent.alpha * rent.k * n * (1.0 - n ** (rent.p - 1.0))


def effective_metal_terminals(rent: RentParameters, n_layers: int) -> float:
    """Per-block terminals left for metal wiring after an n-layer stack: k * n^(p-1)."""
    if n_layers < 1:
        raise DomainValidationError(f"n_layers must be >= 1, got {n_layers}")
    return rent.k * float(n_layers) ** (rent.p - 1.0)


def split_terminals(n_gates: float, rent: RentParameters, part: PartitionScheme) -> TerminalSplit:
    """Split the n-layer terminal budget into metal and fabric shares."""
    n = _check_gates(n_gates)
    layers = part.n_layers
    if n < layers:
        raise DomainValidationError(
            f"cannot place {n} gates on {layers} layers (< 1 gate per layer)"
        )
    t_total = layers * rent.k * (n / layers) ** rent.p
    t_metal = rent.k * n**rent.p
    k_metal = effective_metal_terminals(rent, layers)
    k_fabric = rent.k - k_metal
    # Guard tiny negative round-off when layers == 1.
    t_fabric = max(t_total - t_metal, 0.0)
    return TerminalSplit(
        t_total=t_total,
        t_metal=t_metal,
        t_fabric=t_fabric,
        k_metal=k_metal,
        k_fabric=max(k_fabric, 0.0),
    )


def fabric_interconnect_count(
    n_gates: float, rent: RentParameters, part: PartitionScheme
) -> float:
    """Interconnects realized by fabric features instead of metal wires.

    Equals the total interconnect count evaluated with the fabric share of
    k, so fabric + metal counts add up to the unpartitioned total.
    """
    n = _check_gates(n_gates)
    if n < part.n_layers:
        raise DomainValidationError(
            f"cannot place {n} gates on {part.n_layers} layers (< 1 gate per layer)"
        )
    k_fabric = rent.k - effective_metal_terminals(rent, part.n_layers)
    return rent.alpha * k_fabric * n * (1.0 - n ** (rent.p - 1.0))
