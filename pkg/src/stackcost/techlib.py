"""Technology library: per-technology profiles, Rent parameters, metal
stacks and cost settings, with YAML load/save and strict validation.

Two built-in libraries ship with the package. ``builtin:uncalibrated``
holds the raw documented defaults; ``builtin:calibrated`` has the routing
and cost knobs frozen from the reproduction calibration run (see
``calibrate``), so headline-number runs need no search. The four canonical
profiles (cmos2d, tsv3d, m3d, sn3d) are always present in both.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Any

import yaml

from .area import ViaSpec
from .cost import ProcessStepCounts, unit_area_process_cost
from .errors import LibraryParseError, LibraryValidationError, UnknownFieldError
from .metal import MetalLayerSpec
from .rent import RentParameters

SCHEMA_VERSION = 1
CANONICAL_TECHNOLOGIES = ("cmos2d", "tsv3d", "m3d", "sn3d")
LIBRARY_ENV_VAR = "STACKCOST_LIBRARY"
BUILTIN_CALIBRATED = "builtin:calibrated"
BUILTIN_UNCALIBRATED = "builtin:uncalibrated"

# --------------------------------------------------------------------------
# Built-in constants
# --------------------------------------------------------------------------

#: Average gate footprint, lambda^2. Stacked-die styles use the 2-D figure
#: over two tiers; the nanowire fabric's figure already absorbs its via area.
GATE_AREA_2D = 3125.0
GATE_AREA_SN3D = 432.0

#: Published die-cost parameters (k_c per lambda^2) for paper-constants mode.
PAPER_CPD = {"cmos2d": 6.26, "tsv3d": 7.26, "m3d": 7.26, "sn3d": 26.54}

#: Fabrication step counts per technology die and per metal layer.
DIE_STEPS = {
    "cmos2d": ProcessStepCounts(photolithography=9, diffusion=4, etching=5, deposition=4, implantation=7),
    "tsv3d": ProcessStepCounts(photolithography=19, diffusion=8, etching=13, deposition=10, implantation=14),
    "m3d": ProcessStepCounts(photolithography=19, diffusion=8, etching=13, deposition=10, implantation=14),
    "sn3d": ProcessStepCounts(photolithography=2, diffusion=2, etching=51, deposition=40, implantation=0),
}
METAL_STEPS = ProcessStepCounts(photolithography=2, diffusion=0, etching=4, deposition=4, implantation=0)

# The canonical metal step counts must price to exactly 2 k_c per layer per
# unit area; everything downstream quotes that constant.
if abs(unit_area_process_cost(METAL_STEPS) - 2.0) > 1e-12:  # pragma: no cover
    raise AssertionError("canonical metal step counts do not price to 2 k_c")

#: Inter-tier via defaults. The order-of-magnitude gap between TSV and MIV
#: blockout is the load-bearing fact; both are overridable knobs.
TSV_SPEC = ViaSpec(blockout_area=25000.0, count_coefficient=0.05)
MIV_SPEC = ViaSpec(blockout_area=100.0, count_coefficient=1.0)

#: Relative operating temperatures (dimensionless), ordered
#: sn3d < cmos2d < m3d <= tsv3d.
RELATIVE_TEMPERATURE = {"cmos2d": 1.0, "tsv3d": 1.8, "m3d": 1.6, "sn3d": 0.5}

#: Wire-pitch tiers of the default stack, lambda at 2-D gate pitch; pairs
#: double beyond the 16-lambda tier. Deeper layers repeat the top spec.
BASE_WIRE_PITCHES = (8.0, 8.0, 12.0, 12.0, 16.0, 16.0, 24.0, 24.0, 48.0, 48.0, 96.0, 96.0)

#: Stack knobs before calibration: documented seed values.
UNCALIBRATED_STACK_KNOBS = {
    name: {"routing_efficiency": 0.4, "pitch_scale": 1.0, "layer_pitch_multipliers": {}}
    for name in CANONICAL_TECHNOLOGIES
}

#: Rent defaults before calibration (standard logic values).
UNCALIBRATED_RENT = RentParameters(k=4.0, p=0.6, fanout=3.0)

#: Cost knobs before calibration: qualitative floors only.
UNCALIBRATED_COST_KNOBS = {
    "cooling_coefficient": 0.25,
    "bonding": {"cmos2d": 0.0, "tsv3d": 0.3, "m3d": 0.3, "sn3d": 0.0},
}

# Calibrated knob values frozen from the reproduction calibration run
# (docs/calibration_report.yaml documents the search and residuals).
CALIBRATED_RENT = RentParameters(k=4.0, p=0.658, fanout=3.0)
CALIBRATED_STACK_KNOBS = {
    "cmos2d": {"routing_efficiency": 0.8, "pitch_scale": 0.555, "layer_pitch_multipliers": {}},
    "tsv3d": {"routing_efficiency": 0.8, "pitch_scale": 0.787, "layer_pitch_multipliers": {}},
    "m3d": {
        "routing_efficiency": 0.8,
        "pitch_scale": 0.521,
        "layer_pitch_multipliers": {i: 1.5 for i in range(4, 13)},
    },
    "sn3d": {"routing_efficiency": 0.8, "pitch_scale": 0.721, "layer_pitch_multipliers": {}},
}
CALIBRATED_COST_KNOBS = {
    "cooling_coefficient": 0.25,
    "bonding": {"cmos2d": 0.0, "tsv3d": 0.3, "m3d": 12.2, "sn3d": 0.0},
}


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TechnologyProfile:
    """Everything the pipeline needs to know about one integration style."""

    name: str
    gate_area: float
    tiers: int = 1
    nanowire_layers: int = 1
    via_spec: ViaSpec | None = None
    die_steps: ProcessStepCounts = field(default_factory=ProcessStepCounts)
    metal_steps: ProcessStepCounts = field(default_factory=lambda: METAL_STEPS)
    metal_stack: tuple[MetalLayerSpec, ...] = ()
    bonding_per_area: float = 0.0
    cooling_coefficient: float = 0.0
    relative_temperature: float = 1.0
    paper_cpd: float | None = None

    def __post_init__(self) -> None:
        _validate_profile(self)


@dataclass(frozen=True)
class TechnologyLibrary:
    """A set of named profiles plus the shared Rent parameters."""

    profiles: dict[str, TechnologyProfile]
    rent: RentParameters
    library_version: str
    sn3d_reference: str = "sn3d"  # profile treated as the nanowire fabric in reports

    def profile(self, name: str) -> TechnologyProfile:
        try:
            return self.profiles[name]
        except KeyError:
            known = ", ".join(sorted(self.profiles))
            raise LibraryValidationError(
                f"unknown technology {name!r}; library defines: {known}"
            ) from None


def _validate_profile(profile: TechnologyProfile) -> None:
    def bad(message: str) -> LibraryValidationError:
        return LibraryValidationError(f"profile {profile.name!r}: {message}")

    if not profile.gate_area > 0 or not math.isfinite(profile.gate_area):
        raise bad(f"gate_area must be finite and > 0, got {profile.gate_area}")
    if not (isinstance(profile.tiers, int) and profile.tiers >= 1):
        raise bad(f"tiers must be an integer >= 1, got {profile.tiers}")
    if not (isinstance(profile.nanowire_layers, int) and profile.nanowire_layers >= 1):
        raise bad(f"nanowire_layers must be an integer >= 1, got {profile.nanowire_layers}")
    if profile.tiers >= 2 and profile.via_spec is None:
        raise bad("tiers >= 2 requires a via spec")
    if profile.tiers == 1 and profile.bonding_per_area != 0.0:
        raise bad("tiers == 1 requires bonding_per_area == 0")
    for name in ("bonding_per_area", "cooling_coefficient", "relative_temperature"):
        value = getattr(profile, name)
        if not math.isfinite(value) or value < 0:
            raise bad(f"{name} must be finite and >= 0, got {value}")
    if profile.paper_cpd is not None and (
        not math.isfinite(profile.paper_cpd) or profile.paper_cpd < 0
    ):
        raise bad(f"paper_cpd must be finite and >= 0, got {profile.paper_cpd}")


# --------------------------------------------------------------------------
# Built-in library construction
# --------------------------------------------------------------------------


def base_wire_pitch(layer_index: int) -> float:
    """Wire pitch of the default tier pattern at a zero-based layer index."""
    if layer_index < len(BASE_WIRE_PITCHES):
        return BASE_WIRE_PITCHES[layer_index]
    doublings = (layer_index - len(BASE_WIRE_PITCHES)) // 2 + 1
    return BASE_WIRE_PITCHES[-1] * 2.0**doublings


def build_metal_stack(
    gate_pitch_ratio: float,
    routing_efficiency: float,
    pitch_scale: float,
    layer_pitch_multipliers: dict[int, float] | None = None,
    n_layers: int = len(BASE_WIRE_PITCHES),
) -> tuple[MetalLayerSpec, ...]:
    """Instantiate the tiered default stack for one technology.

    Wire pitches scale with the technology's gate pitch (relative to 2-D)
    times the calibration pitch_scale knob; per-via blockout is the square
    of the wire pitch. layer_pitch_multipliers applies extra per-layer
    factors (1-based layer index) left by calibration refinement.
    """
    multipliers = layer_pitch_multipliers or {}
    layers = []
    for i in range(n_layers):
        pitch = base_wire_pitch(i) * gate_pitch_ratio * pitch_scale * multipliers.get(i + 1, 1.0)
        layers.append(
            MetalLayerSpec(
                wire_pitch=pitch,
                routing_efficiency=routing_efficiency,
                via_blockout=pitch * pitch,
            )
        )
    return tuple(layers)


def _builtin_profiles(
    stack_knobs: dict[str, dict], cost_knobs: dict[str, Any]
) -> dict[str, TechnologyProfile]:
    pitch_2d = math.sqrt(GATE_AREA_2D)
    geometry = {
        "cmos2d": (GATE_AREA_2D, 1, 1, None),
        "tsv3d": (GATE_AREA_2D, 2, 1, TSV_SPEC),
        "m3d": (GATE_AREA_2D, 2, 1, MIV_SPEC),
        "sn3d": (GATE_AREA_SN3D, 1, 10, None),
    }
    profiles = {}
    for name, (gate_area, tiers, nanowire_layers, via_spec) in geometry.items():
        knobs = stack_knobs[name]
        ratio = math.sqrt(gate_area / tiers) / pitch_2d
        profiles[name] = TechnologyProfile(
            name=name,
            gate_area=gate_area,
            tiers=tiers,
            nanowire_layers=nanowire_layers,
            via_spec=via_spec,
            die_steps=DIE_STEPS[name],
            metal_steps=METAL_STEPS,
            metal_stack=build_metal_stack(
                gate_pitch_ratio=ratio,
                routing_efficiency=knobs["routing_efficiency"],
                pitch_scale=knobs["pitch_scale"],
                layer_pitch_multipliers=knobs["layer_pitch_multipliers"],
            ),
            bonding_per_area=cost_knobs["bonding"][name],
            cooling_coefficient=cost_knobs["cooling_coefficient"],
            relative_temperature=RELATIVE_TEMPERATURE[name],
            paper_cpd=PAPER_CPD[name],
        )
    return profiles


def builtin_library(calibrated: bool = True) -> TechnologyLibrary:
    """The built-in default library, calibrated unless told otherwise."""
    if calibrated:
        return TechnologyLibrary(
            profiles=_builtin_profiles(CALIBRATED_STACK_KNOBS, CALIBRATED_COST_KNOBS),
            rent=CALIBRATED_RENT,
            library_version="builtin-calibrated-1",
        )
    return TechnologyLibrary(
        profiles=_builtin_profiles(UNCALIBRATED_STACK_KNOBS, UNCALIBRATED_COST_KNOBS),
        rent=UNCALIBRATED_RENT,
        library_version="builtin-uncalibrated-1",
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

_RENT_FIELDS = {"terminals_per_block", "exponent", "fanout"}
_PROFILE_FIELDS = {
    "gate_area",
    "tiers",
    "nanowire_layers",
    "via",
    "die_steps",
    "metal_steps",
    "metal_stack",
    "bonding_per_area",
    "cooling_coefficient",
    "relative_temperature",
    "paper_cpd",
}
_STEP_FIELDS = {"photolithography", "diffusion", "etching", "deposition", "implantation"}
_VIA_FIELDS = {"blockout_area", "count_coefficient"}
_LAYER_FIELDS = {"wire_pitch", "routing_efficiency", "via_blockout"}
_TOP_FIELDS = {"schema_version", "library_version", "rent", "profiles"}


def _steps_to_dict(steps: ProcessStepCounts) -> dict[str, int]:
    return {
        "photolithography": steps.photolithography,
        "diffusion": steps.diffusion,
        "etching": steps.etching,
        "deposition": steps.deposition,
        "implantation": steps.implantation,
    }


def library_to_dict(library: TechnologyLibrary) -> dict[str, Any]:
    """Plain-data form of a library (the YAML document structure)."""
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "library_version": library.library_version,
        "rent": {
            "terminals_per_block": library.rent.k,
            "exponent": library.rent.p,
            "fanout": library.rent.fanout,
        },
        "profiles": {},
    }
    for name in sorted(library.profiles):
        profile = library.profiles[name]
        entry: dict[str, Any] = {
            "gate_area": profile.gate_area,
            "tiers": profile.tiers,
            "nanowire_layers": profile.nanowire_layers,
            "bonding_per_area": profile.bonding_per_area,
            "cooling_coefficient": profile.cooling_coefficient,
            "relative_temperature": profile.relative_temperature,
            "die_steps": _steps_to_dict(profile.die_steps),
            "metal_steps": _steps_to_dict(profile.metal_steps),
            "metal_stack": [
                {
                    "wire_pitch": layer.wire_pitch,
                    "routing_efficiency": layer.routing_efficiency,
                    "via_blockout": layer.via_blockout,
                }
                for layer in profile.metal_stack
            ],
        }
        if profile.via_spec is not None:
            entry["via"] = {
                "blockout_area": profile.via_spec.blockout_area,
                "count_coefficient": profile.via_spec.count_coefficient,
            }
        if profile.paper_cpd is not None:
            entry["paper_cpd"] = profile.paper_cpd
        doc["profiles"][name] = entry
    return doc


def save_library(library: TechnologyLibrary, path: str | os.PathLike) -> None:
    """Write a library as a YAML document."""
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(library_to_dict(library), handle, sort_keys=False)


def _reject_unknown(mapping: dict, allowed: set[str], where: str, strict: bool) -> None:
    if not strict:
        return
    unknown = set(mapping) - allowed
    if unknown:
        raise UnknownFieldError(f"{where}: unknown field(s) {sorted(unknown)}")


def _number(mapping: dict, key: str, where: str, default: float | None = None) -> float:
    if key not in mapping:
        if default is None:
            raise LibraryValidationError(f"{where}: missing required field {key!r}")
        return default
    value = mapping[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise LibraryValidationError(f"{where}: field {key!r} must be a number, got {value!r}")
    return float(value)


def _integer(mapping: dict, key: str, where: str, default: int | None = None) -> int:
    if key not in mapping:
        if default is None:
            raise LibraryValidationError(f"{where}: missing required field {key!r}")
        return default
    value = mapping[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise LibraryValidationError(f"{where}: field {key!r} must be an integer, got {value!r}")
    return value


def _parse_steps(data: Any, where: str, strict: bool) -> ProcessStepCounts:
    if not isinstance(data, dict):
        raise LibraryValidationError(f"{where}: expected a mapping of step counts")
    _reject_unknown(data, _STEP_FIELDS, where, strict)
    return ProcessStepCounts(
        photolithography=_integer(data, "photolithography", where, 0),
        diffusion=_integer(data, "diffusion", where, 0),
        etching=_integer(data, "etching", where, 0),
        deposition=_integer(data, "deposition", where, 0),
        implantation=_integer(data, "implantation", where, 0),
    )


def library_from_dict(doc: dict[str, Any], strict: bool = True) -> TechnologyLibrary:
    """Validate a plain-data document and build the library."""
    if not isinstance(doc, dict):
        raise LibraryValidationError("library document must be a mapping")
    _reject_unknown(doc, _TOP_FIELDS, "library", strict)
    version = _integer(doc, "schema_version", "library")
    if version != SCHEMA_VERSION:
        raise LibraryValidationError(
            f"library: unsupported schema_version {version}; this build reads {SCHEMA_VERSION}"
        )
    library_version = doc.get("library_version")
    if not isinstance(library_version, str) or not library_version:
        raise LibraryValidationError("library: library_version must be a non-empty string")

    rent_data = doc.get("rent")
    if not isinstance(rent_data, dict):
        raise LibraryValidationError("library: missing 'rent' mapping")
    _reject_unknown(rent_data, _RENT_FIELDS, "rent", strict)
    try:
        rent = RentParameters(
            k=_number(rent_data, "terminals_per_block", "rent"),
            p=_number(rent_data, "exponent", "rent"),
            fanout=_number(rent_data, "fanout", "rent"),
        )
    except Exception as exc:
        raise LibraryValidationError(f"rent: {exc}") from exc

    profiles_data = doc.get("profiles")
    if not isinstance(profiles_data, dict) or not profiles_data:
        raise LibraryValidationError("library: 'profiles' must be a non-empty mapping")

    profiles: dict[str, TechnologyProfile] = {}
    for name, entry in profiles_data.items():
        where = f"profiles.{name}"
        if not isinstance(entry, dict):
            raise LibraryValidationError(f"{where}: expected a mapping")
        _reject_unknown(entry, _PROFILE_FIELDS, where, strict)

        via_spec = None
        if "via" in entry:
            via_data = entry["via"]
            if not isinstance(via_data, dict):
                raise LibraryValidationError(f"{where}.via: expected a mapping")
            _reject_unknown(via_data, _VIA_FIELDS, f"{where}.via", strict)
            try:
                via_spec = ViaSpec(
                    blockout_area=_number(via_data, "blockout_area", f"{where}.via"),
                    count_coefficient=_number(via_data, "count_coefficient", f"{where}.via", 1.0),
                )
            except Exception as exc:
                raise LibraryValidationError(f"{where}.via: {exc}") from exc

        stack_data = entry.get("metal_stack", [])
        if not isinstance(stack_data, list):
            raise LibraryValidationError(f"{where}.metal_stack: expected a list")
        layers = []
        for i, layer_data in enumerate(stack_data, start=1):
            layer_where = f"{where}.metal_stack[{i}]"
            if not isinstance(layer_data, dict):
                raise LibraryValidationError(f"{layer_where}: expected a mapping")
            _reject_unknown(layer_data, _LAYER_FIELDS, layer_where, strict)
            try:
                layers.append(
                    MetalLayerSpec(
                        wire_pitch=_number(layer_data, "wire_pitch", layer_where),
                        routing_efficiency=_number(layer_data, "routing_efficiency", layer_where),
                        via_blockout=_number(layer_data, "via_blockout", layer_where),
                    )
                )
            except LibraryValidationError:
                raise
            except Exception as exc:
                raise LibraryValidationError(f"{layer_where}: {exc}") from exc

        paper_cpd = None
        if "paper_cpd" in entry:
            paper_cpd = _number(entry, "paper_cpd", where)

        try:
            profiles[name] = TechnologyProfile(
                name=name,
                gate_area=_number(entry, "gate_area", where),
                tiers=_integer(entry, "tiers", where, 1),
                nanowire_layers=_integer(entry, "nanowire_layers", where, 1),
                via_spec=via_spec,
                die_steps=_parse_steps(entry.get("die_steps", {}), f"{where}.die_steps", strict),
                metal_steps=_parse_steps(
                    entry.get("metal_steps", _steps_to_dict(METAL_STEPS)),
                    f"{where}.metal_steps",
                    strict,
                ),
                metal_stack=tuple(layers),
                bonding_per_area=_number(entry, "bonding_per_area", where, 0.0),
                cooling_coefficient=_number(entry, "cooling_coefficient", where, 0.0),
                relative_temperature=_number(entry, "relative_temperature", where, 1.0),
                paper_cpd=paper_cpd,
            )
        except LibraryValidationError:
            raise
        except Exception as exc:
            raise LibraryValidationError(f"{where}: {exc}") from exc

    return TechnologyLibrary(profiles=profiles, rent=rent, library_version=library_version)


def load_library(source: str | os.PathLike | None = None, strict: bool = True) -> TechnologyLibrary:
    """Load a library from a path, a builtin marker, or the environment.

    ``None`` falls back to the ``STACKCOST_LIBRARY`` environment variable and
    then to the calibrated builtin.
    """
    if source is None:
        source = os.environ.get(LIBRARY_ENV_VAR) or BUILTIN_CALIBRATED
    marker = str(source)
    if marker in ("builtin", BUILTIN_CALIBRATED):
        return builtin_library(calibrated=True)
    if marker == BUILTIN_UNCALIBRATED:
        return builtin_library(calibrated=False)

    try:
        with open(source, "r", encoding="utf-8") as handle:
            doc = yaml.safe_load(handle)
    except OSError as exc:
        raise LibraryParseError(f"cannot read library file {source!s}: {exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        location = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise LibraryParseError(f"malformed library file {source!s}{location}: {exc}") from exc
    return library_from_dict(doc, strict=strict)


def with_profile(library: TechnologyLibrary, profile: TechnologyProfile) -> TechnologyLibrary:
    """A copy of the library with one profile replaced."""
    profiles = dict(library.profiles)
    profiles[profile.name] = profile
    return replace(library, profiles=profiles)
