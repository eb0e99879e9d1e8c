"""End-to-end projection pipeline and report assembly.

Order of evaluation follows the cost-estimation flow: interconnect
counting, wirelength distribution, die area, metal-layer estimation,
cost. Reports echo their inputs (technology, gate count, library version,
cost mode) so every number is recomputable, and the machine-readable form
is a single versioned document from which the human tables are derived.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__ as _PKG_VERSION
from .area import DieArea, die_area, gate_pitch
from .cost import (
    COST_MODES,
    MODE_EQ13,
    MODE_PAPER,
    CostBreakdown,
    chip_cost,
    compare_costs,
    die_unit_cost,
    metal_layer_unit_cost,
)
from .errors import DomainValidationError
from .metal import MetalStackPlan, estimate_metal_layers
from .rent import PartitionScheme, RentParameters, TerminalSplit, split_terminals
from .techlib import TechnologyLibrary, TechnologyProfile
from .wirelength import WirelengthDistribution

REPORT_SCHEMA_VERSION = 1

#: Designs below this gate count have no meaningful distribution and use the
#: single mandatory metal layer.
MIN_DISTRIBUTION_GATES = 4.0


def k_effective_for(profile: TechnologyProfile, rent: RentParameters) -> float:
    """Per-block terminal count feeding the metal stack.

    An n-layer nanowire fabric absorbs terminals as k * n^(p-1). A stacked
    die absorbs them as k * tiers^(p-1) only when its inter-tier vias are
    fine enough to give every inter-tier wire a via (count coefficient >= 1,
    the monolithic case); coarse TSV stacking leaves k unchanged.
    """
    if profile.nanowire_layers > 1:
        return rent.k * float(profile.nanowire_layers) ** (rent.p - 1.0)
    if (
        profile.tiers > 1
        and profile.via_spec is not None
        and profile.via_spec.count_coefficient >= 1.0
    ):
        return rent.k * float(profile.tiers) ** (rent.p - 1.0)
    return rent.k


def build_distribution(
    profile: TechnologyProfile, n_gates: float, rent: RentParameters
) -> WirelengthDistribution | None:
    """Metal-wiring distribution for a design, None below the size threshold."""
    if n_gates < MIN_DISTRIBUTION_GATES:
        return None
    return WirelengthDistribution.build(
        n_gates, k_effective_for(profile, rent), rent.p, rent.alpha
    )


@dataclass(frozen=True)
class ProjectionReport:
    """All pipeline outputs for one (technology, design size) point."""

    technology: str
    n_gates: float
    library_version: str
    library_source: str
    cost_mode: str
    die: DieArea
    pitch: float
    split: TerminalSplit
    metal_interconnects: float
    fabric_interconnects: float
    tau: float | None
    total_wire_length: float | None  # gate pitches
    n_metal: int
    plan: MetalStackPlan
    cost: CostBreakdown
    cost_by_mode: dict[str, CostBreakdown]
    unit_costs: dict[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "tool": {"name": "stackcost", "version": _PKG_VERSION},
            "command": "project",
            "inputs": {
                "technology": self.technology,
                "n_gates": self.n_gates,
                "library_version": self.library_version,
                "library_source": self.library_source,
                "cost_mode": self.cost_mode,
            },
            "die_area": {
                "gates_area": self.die.gates_area,
                "via_overhead": self.die.via_overhead,
                "total": self.die.total,
                "gate_pitch": self.pitch,
            },
            "terminals": {
                "t_total": self.split.t_total,
                "t_metal": self.split.t_metal,
                "t_fabric": self.split.t_fabric,
                "k_metal": self.split.k_metal,
                "k_fabric": self.split.k_fabric,
            },
            "interconnects": {
                "metal": self.metal_interconnects,
                "fabric": self.fabric_interconnects,
                "tau": self.tau,
                "total_wire_length_gate_pitches": self.total_wire_length,
            },
            "metal_layers": {
                "n_metal": self.n_metal,
                "per_layer": [
                    {
                        "l_start": seg.l_start,
                        "l_end": seg.l_end,
                        "routed_length": seg.routed_length,
                        "available_length": seg.available_length,
                    }
                    for seg in self.plan.per_layer
                ],
            },
            "unit_costs": dict(self.unit_costs),
            "cost": {
                mode: {
                    "die": bd.die,
                    "metal": bd.metal,
                    "bonding": bd.bonding,
                    "cooling": bd.cooling,
                    "total": bd.total,
                }
                for mode, bd in self.cost_by_mode.items()
            },
        }


def _unit_costs(profile: TechnologyProfile) -> dict[str, float]:
    eq13 = die_unit_cost(profile, MODE_EQ13)
    paper = die_unit_cost(profile, MODE_PAPER)
    divergence = (paper - eq13) / eq13 * 100.0 if eq13 else 0.0
    return {
        "c_pm": metal_layer_unit_cost(profile),
        "c_pd_eq13": eq13,
        "c_pd_paper": paper,
        "c_pd_divergence_pct": round(divergence, 1),
    }


def project(
    library: TechnologyLibrary,
    technology: str,
    n_gates: float,
    cost_mode: str = MODE_PAPER,
    library_source: str = "builtin:calibrated",
) -> ProjectionReport:
    """Run the full pipeline for one technology and design size."""
    if not n_gates >= 1:
        raise DomainValidationError(f"n_gates must be >= 1, got {n_gates}")
    if cost_mode not in COST_MODES:
        raise DomainValidationError(f"unknown cost mode {cost_mode!r}")
    profile = library.profile(technology)
    rent = library.rent

    # A design smaller than the fabric's layer count cannot fill every layer.
    layers = max(min(profile.nanowire_layers, int(n_gates)), 1)
    split = split_terminals(n_gates, rent, PartitionScheme(layers))
    dist = build_distribution(profile, n_gates, rent)
    metal_total = dist.total_count if dist is not None else 0.0
    all_total = rent.alpha * rent.k * n_gates * (1.0 - n_gates ** (rent.p - 1.0))
    fabric_total = max(all_total - metal_total, 0.0) if dist is not None else 0.0

    area = die_area(profile, n_gates, rent)
    pitch = gate_pitch(profile)
    plan = estimate_metal_layers(dist, area.total, pitch, profile.metal_stack, rent)

    cost_by_mode = {
        mode: chip_cost(profile, area.total, plan.layers_used, mode) for mode in COST_MODES
    }
    return ProjectionReport(
        technology=technology,
        n_gates=float(n_gates),
        library_version=library.library_version,
        library_source=library_source,
        cost_mode=cost_mode,
        die=area,
        pitch=pitch,
        split=split,
        metal_interconnects=metal_total,
        fabric_interconnects=fabric_total,
        tau=dist.tau if dist is not None else None,
        total_wire_length=dist.total_length if dist is not None else None,
        n_metal=plan.layers_used,
        plan=plan,
        cost=cost_by_mode[cost_mode],
        cost_by_mode=cost_by_mode,
        unit_costs=_unit_costs(profile),
    )


def compare(
    library: TechnologyLibrary,
    technologies: list[str],
    gate_counts: list[float],
    cost_mode: str = MODE_PAPER,
    library_source: str = "builtin:calibrated",
) -> dict[str, Any]:
    """Cross-technology comparison document (metal matrix, areas, costs,
    reductions in both cost modes)."""
    if len(technologies) < 2:
        raise DomainValidationError("compare needs at least two technologies")
    if len(set(technologies)) != len(technologies):
        raise DomainValidationError("duplicate technology in comparison list")
    if not gate_counts:
        raise DomainValidationError("compare needs at least one gate count")

    gate_counts = sorted(float(g) for g in gate_counts)
    reports = {
        (tech, n): project(library, tech, n, cost_mode, library_source)
        for tech in technologies
        for n in gate_counts
    }

    doc: dict[str, Any] = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": {"name": "stackcost", "version": _PKG_VERSION},
        "command": "compare",
        "inputs": {
            "technologies": list(technologies),
            "gate_counts": gate_counts,
            "library_version": library.library_version,
            "library_source": library_source,
            "cost_mode": cost_mode,
        },
        "metal_layer_matrix": [
            {
                "technology": tech,
                "layers": [reports[(tech, n)].n_metal for n in gate_counts],
            }
            for tech in technologies
        ],
        "area_table": [
            {
                "technology": tech,
                "n_gates": n,
                "gates_area": reports[(tech, n)].die.gates_area,
                "via_overhead": reports[(tech, n)].die.via_overhead,
                "total": reports[(tech, n)].die.total,
            }
            for tech in technologies
            for n in gate_counts
        ],
        "unit_costs": {tech: _unit_costs(library.profile(tech)) for tech in technologies},
        "cost_tables": {},
        "reductions": {},
    }

    for mode in COST_MODES:
        table = []
        reduction_rows = []
        for n in gate_counts:
            breakdowns = {
                tech: reports[(tech, n)].cost_by_mode[mode] for tech in technologies
            }
            for tech in technologies:
                bd = breakdowns[tech]
                table.append(
                    {
                        "technology": tech,
                        "n_gates": n,
                        "die": bd.die,
                        "metal": bd.metal,
                        "bonding": bd.bonding,
                        "cooling": bd.cooling,
                        "total": bd.total,
                    }
                )
            matrix = compare_costs(breakdowns)
            for tech in technologies:
                for other in technologies:
                    if tech == other:
                        continue
                    reduction_rows.append(
                        {
                            "technology": tech,
                            "vs": other,
                            "n_gates": n,
                            "reduction_pct": matrix[tech][other],
                        }
                    )
        doc["cost_tables"][mode] = table
        doc["reductions"][mode] = reduction_rows
    return doc


def export_distribution(
    library: TechnologyLibrary,
    technology: str,
    n_gates: float,
    samples: int,
) -> tuple[list[str], list[tuple[float, float, float, float]]]:
    """Sampled (l, i, I, L) curve rows for plotting.

    Samples are log-uniform over [1, 2*sqrt(N)] with the region boundary
    sqrt(N) forced in; cumulative columns are integrated incrementally
    between consecutive samples.
    """
    if samples < 2:
        raise DomainValidationError(f"sample count must be >= 2, got {samples}")
    profile = library.profile(technology)
    rent = library.rent
    dist = build_distribution(profile, n_gates, rent)
    if dist is None:
        raise DomainValidationError(
            f"n_gates must be >= {MIN_DISTRIBUTION_GATES} to export a distribution"
        )
    lo, hi = dist.domain
    ls = np.geomspace(lo, hi, samples)
    boundary = dist.sqrt_n
    if not np.any(np.isclose(ls, boundary, rtol=1e-12)):
        ls = np.sort(np.append(ls, boundary))
    ls[0], ls[-1] = lo, hi

    densities = dist.density_many(ls)
    header = [
        "length_gate_pitches",
        "density_per_gate_pitch",
        "cumulative_count",
        "cumulative_length_gate_pitches",
    ]
    rows = []
    count = 0.0
    length = 0.0
    prev = ls[0]
    for l, dens in zip(ls, densities):
        if l > prev:
            count += dist.count_between(prev, float(l))
            length += dist.length_between(prev, float(l))
            prev = float(l)
        rows.append((float(l), float(dens), count, length))
    return header, rows


def table1_matrix(
    library: TechnologyLibrary,
    technologies: tuple[str, ...] = ("cmos2d", "tsv3d", "m3d", "sn3d"),
    gate_counts: tuple[float, ...] = (5e6, 1e7, 2e7),
) -> dict[str, tuple[int, ...]]:
    """Metal-layer counts for the standard design-size sweep."""
    return {
        tech: tuple(project(library, tech, n).n_metal for n in gate_counts)
        for tech in technologies
    }


# --------------------------------------------------------------------------
# Human-readable rendering
# --------------------------------------------------------------------------


def _fmt(value: float) -> str:
    if value == 0:
        return "0"
    if abs(value) >= 1e5 or abs(value) < 1e-3:
        return f"{value:.4e}"
    return f"{value:,.2f}"


def render_project(report: ProjectionReport) -> str:
    lines = [
        f"Projection: {report.technology}, {report.n_gates:,.0f} gates "
        f"(library {report.library_version}, mode {report.cost_mode})",
        "",
        f"  die area        : {_fmt(report.die.total)} lambda^2 "
        f"(gates {_fmt(report.die.gates_area)}, via overhead {_fmt(report.die.via_overhead)})",
        f"  gate pitch      : {report.pitch:.2f} lambda",
        f"  terminals       : total {_fmt(report.split.t_total)}, metal {_fmt(report.split.t_metal)}, "
        f"fabric {_fmt(report.split.t_fabric)}",
        f"  interconnects   : metal {_fmt(report.metal_interconnects)}, "
        f"fabric {_fmt(report.fabric_interconnects)}",
        f"  metal layers    : {report.n_metal}",
    ]
    lines.append("  unit costs      : c_pm=%.2f, c_pd eq13=%.2f, paper=%s (divergence %s%%)" % (
        report.unit_costs["c_pm"],
        report.unit_costs["c_pd_eq13"],
        f"{report.unit_costs['c_pd_paper']:.2f}",
        report.unit_costs["c_pd_divergence_pct"],
    ))
    for mode, bd in report.cost_by_mode.items():
        marker = " (selected)" if mode == report.cost_mode else ""
        lines.append(
            f"  cost [{mode}]{marker}: total {_fmt(bd.total)} k_c*lambda^2 "
            f"(die {_fmt(bd.die)}, metal {_fmt(bd.metal)}, "
            f"bonding {_fmt(bd.bonding)}, cooling {_fmt(bd.cooling)})"
        )
    return "\n".join(lines) + "\n"


def render_compare(doc: dict[str, Any]) -> str:
    inputs = doc["inputs"]
    gate_counts = inputs["gate_counts"]
    techs = inputs["technologies"]
    out = [
        f"Comparison across {', '.join(techs)} "
        f"(library {inputs['library_version']}, mode {inputs['cost_mode']})",
        "",
        "Metal layers:",
        "  gates      " + "".join(f"{t:>10s}" for t in techs),
    ]
    matrix = {row["technology"]: row["layers"] for row in doc["metal_layer_matrix"]}
    for i, n in enumerate(gate_counts):
        out.append(f"  {n:<10,.0f} " + "".join(f"{matrix[t][i]:>10d}" for t in techs))

    out += ["", "Die area (lambda^2):"]
    for row in doc["area_table"]:
        out.append(
            f"  {row['technology']:<8s} {row['n_gates']:<12,.0f} total {_fmt(row['total'])} "
            f"(vias {_fmt(row['via_overhead'])})"
        )

    for mode, table in doc["cost_tables"].items():
        out += ["", f"Cost stack [{mode}] (k_c*lambda^2):"]
        for row in table:
            out.append(
                f"  {row['technology']:<8s} {row['n_gates']:<12,.0f} total {_fmt(row['total'])} "
                f"= die {_fmt(row['die'])} + metal {_fmt(row['metal'])} "
                f"+ bond {_fmt(row['bonding'])} + cool {_fmt(row['cooling'])}"
            )

    for mode, rows in doc["reductions"].items():
        out += ["", f"Total-cost reductions [{mode}] (percent, negative = more expensive):"]
        for row in rows:
            out.append(
                f"  {row['technology']:<8s} vs {row['vs']:<8s} at {row['n_gates']:<12,.0f}: "
                f"{row['reduction_pct']:6.1f}%"
            )
    return "\n".join(out) + "\n"
