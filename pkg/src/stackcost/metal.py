"""Iterative bottom-up assignment of the wirelength distribution onto metal
layers.

Starting at the shortest wires, each layer absorbs demand until its
routable length is exhausted; the walk ends when the longest wire is
placed and the final layer index is the metal-layer count. Wire demand is
shared-net corrected (factor 4/(fanout+3)) and converted from gate pitches
to lambda with the technology's gate pitch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConsistencyError, DomainValidationError, StuckProgressError
from .rent import RentParameters
from .wirelength import WirelengthDistribution

#: Bisection tolerance for layer boundaries, as a fraction of domain width.
BOUNDARY_REL_TOL = 1e-6

#: Hard cap on layers before the walk is declared stuck.
MAX_LAYERS = 1024


@dataclass(frozen=True)
class MetalLayerSpec:
    """One routing layer: wire pitch (lambda), routing efficiency, via blockout."""

    wire_pitch: float
    routing_efficiency: float
    via_blockout: float

    def __post_init__(self) -> None:
        if not self.wire_pitch > 0:
            raise DomainValidationError(f"wire_pitch must be > 0, got {self.wire_pitch}")
        if not 0.0 < self.routing_efficiency <= 1.0:
            raise DomainValidationError(
                f"routing_efficiency must lie in (0, 1], got {self.routing_efficiency}"
            )
        if self.via_blockout < 0:
            raise DomainValidationError(f"via_blockout must be >= 0, got {self.via_blockout}")


@dataclass(frozen=True)
class LayerAssignment:
    """Span of the distribution routed on one layer."""

    l_start: float
    l_end: float
    routed_length: float  # lambda
    available_length: float  # lambda


@dataclass(frozen=True)
class MetalStackPlan:
    """Result of the layer walk: n_m and the per-layer spans."""

    layers_used: int
    per_layer: tuple[LayerAssignment, ...] = field(default_factory=tuple)
    unrouted_remainder: float = 0.0

    def __post_init__(self) -> None:
        if self.layers_used < 1:
            raise DomainValidationError("a die always has at least one metal layer")


def sharing_factor(fanout: float) -> float:
    """Fraction of point-to-point length not shared within a net: 4/(fanout+3)."""
    if fanout <= 0:
        raise DomainValidationError(f"fan-out must be > 0, got {fanout}")
    return 4.0 / (fanout + 3.0)


def via_blockout_area(
    layer: MetalLayerSpec, n_gates: float, fanout: float, routed_count: float
) -> float:
    """Total via blockout on a layer: 2 * A_v * (fanout wires passing through).

    routed_count is the cumulative interconnect count already placed below
    this layer; everything else pierces it, twice per wire.
    """
    total_fanout = n_gates * fanout
    if routed_count < 0 or routed_count > total_fanout * (1.0 + 1e-9):
        raise ConsistencyError(
            f"routed count {routed_count} exceeds the fan-out wire total {total_fanout}"
        )
    return 2.0 * layer.via_blockout * max(total_fanout - routed_count, 0.0)


def layer_available_length(layer: MetalLayerSpec, die_area: float, vias_area: float) -> float:
    """Routable wire length a layer offers, clamped at zero when vias win."""
    if not die_area > 0:
        raise DomainValidationError(f"die_area must be > 0, got {die_area}")
    return max(layer.routing_efficiency * die_area - vias_area, 0.0) / layer.wire_pitch


def _stack_layer(stack: tuple[MetalLayerSpec, ...], index: int) -> MetalLayerSpec:
    # Past the defined stack the topmost spec repeats indefinitely.
    return stack[index] if index < len(stack) else stack[-1]


def estimate_metal_layers(
    dist: WirelengthDistribution | None,
    die_area: float,
    pitch: float,
    stack: list[MetalLayerSpec] | tuple[MetalLayerSpec, ...],
    rent: RentParameters,
    max_layers: int = MAX_LAYERS,
) -> MetalStackPlan:
    """Walk the distribution bottom-up and count the layers needed.

    Each layer i takes the largest l_i with
    chi * (L(l_i) - L(l_{i-1})) * pitch <= available length, found by
    bisection on the monotone cumulative length. ``dist=None`` stands for a
    design too small to have any interconnect and uses the single mandatory
    layer.
    """
    if not stack:
        raise DomainValidationError("metal stack must contain at least one layer spec")
    if not die_area > 0:
        raise DomainValidationError(f"die_area must be > 0, got {die_area}")
    if not pitch > 0:
        raise DomainValidationError(f"gate pitch must be > 0, got {pitch}")
    stack = tuple(stack)

    if dist is None or dist.total_count <= 0.0:
        return MetalStackPlan(layers_used=1, per_layer=(), unrouted_remainder=0.0)

    chi = sharing_factor(rent.fanout)
    lo, hi = dist.domain
    tol = BOUNDARY_REL_TOL * (hi - lo)
    to_lambda = chi * pitch

    assignments: list[LayerAssignment] = []
    l_prev = lo
    routed_below = 0.0  # I(l_prev)
    index = 0
    while True:
        if index >= max_layers:
            raise StuckProgressError(
                f"metal stack exceeded {max_layers} layers; capacity is implausibly low"
            )
        layer = _stack_layer(stack, index)
        vias = via_blockout_area(layer, dist.n_gates, rent.fanout, routed_below)
        available = layer_available_length(layer, die_area, vias)

        demand_to_end = to_lambda * dist.length_between(l_prev, hi)
        if demand_to_end <= available:
            assignments.append(
                LayerAssignment(
                    l_start=l_prev,
                    l_end=hi,
                    routed_length=demand_to_end,
                    available_length=available,
                )
            )
            return MetalStackPlan(
                layers_used=index + 1,
                per_layer=tuple(assignments),
                unrouted_remainder=0.0,
            )

        # Largest l_end with demand(l_prev, l_end) <= available.
        a, b = l_prev, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if to_lambda * dist.length_between(l_prev, mid) <= available:
                a = mid
            else:
                b = mid
        l_end = a
        if l_end - l_prev <= tol:
            raise StuckProgressError(
                f"layer {index + 1} (pitch {layer.wire_pitch}) makes no routing progress; "
                "remaining demand cannot be placed"
            )
        routed = to_lambda * dist.length_between(l_prev, l_end)
        assignments.append(
            LayerAssignment(
                l_start=l_prev,
                l_end=l_end,
                routed_length=routed,
                available_length=available,
            )
        )
        routed_below += dist.count_between(l_prev, l_end)
        l_prev = l_end
        index += 1
