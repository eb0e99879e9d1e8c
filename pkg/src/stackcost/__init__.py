"""Analytical projection of interconnect, die area, metal layers and
relative fabrication cost for four IC integration styles."""

__version__ = "0.1.0"

from .area import DieArea, GateGeometry, ViaSpec, die_area, gate_pitch, inter_tier_via_count
from .calibrate import (
    CalibrationBounds,
    CalibrationReport,
    CalibrationTargets,
    calibrate,
)
from .cost import (
    MODE_EQ13,
    MODE_PAPER,
    CostBreakdown,
    CostWeights,
    ProcessStepCounts,
    chip_cost,
    compare_costs,
    unit_area_process_cost,
)
from .metal import (
    LayerAssignment,
    MetalLayerSpec,
    MetalStackPlan,
    estimate_metal_layers,
    layer_available_length,
    sharing_factor,
    via_blockout_area,
)
from .pipeline import (
    ProjectionReport,
    compare,
    export_distribution,
    k_effective_for,
    project,
    table1_matrix,
)
from .rent import (
    PartitionScheme,
    RentParameters,
    TerminalSplit,
    effective_metal_terminals,
    fabric_interconnect_count,
    split_terminals,
    terminals,
    total_interconnects,
)
from .techlib import (
    TechnologyLibrary,
    TechnologyProfile,
    builtin_library,
    load_library,
    save_library,
)
from .wirelength import (
    GridPairHistogram,
    WirelengthDistribution,
    grid_pair_histogram,
    normalization_tau,
    tau_closed_form,
)
