import math
from dataclasses import dataclass

import pytest

from stackcost.area import DieArea, ViaSpec, die_area, gate_pitch, inter_tier_via_count
from stackcost.errors import ConfigError, DomainValidationError
from stackcost.rent import RentParameters
from stackcost.techlib import builtin_library

RENT = RentParameters(4.0, 0.6, 3.0)
LIB = builtin_library(calibrated=True)


class TestDieArea:
    def test_cmos2d_is_pure_gate_area(self):
        area = die_area(LIB.profile("cmos2d"), 5e6, RENT)
        assert area.total == pytest.approx(1.5625e10, rel=1e-12)
        assert area.via_overhead == 0.0

    def test_sn3d_folds_via_area_into_gates(self):
        area = die_area(LIB.profile("sn3d"), 5e6, RENT)
        assert area.total == pytest.approx(2.16e9, rel=1e-12)
        assert area.via_overhead == 0.0

    def test_sn3d_reduction_vs_2d(self):
        a2d = die_area(LIB.profile("cmos2d"), 5e6, RENT).total
        asn = die_area(LIB.profile("sn3d"), 5e6, RENT).total
        assert (1.0 - asn / a2d) * 100.0 == pytest.approx(86.176, abs=0.01)

    def test_single_gate_is_one_gate_area(self):
        assert die_area(LIB.profile("cmos2d"), 1, RENT).total == pytest.approx(3125.0)

    def test_stacked_die_area_composition(self):
        profile = LIB.profile("m3d")
        n = 1e6
        area = die_area(profile, n, RENT)
        count = inter_tier_via_count(n, RENT, 2, profile.via_spec.count_coefficient)
        assert area.gates_area == pytest.approx(n * profile.gate_area / 2, rel=1e-12)
        assert area.via_overhead == pytest.approx(count * profile.via_spec.blockout_area, rel=1e-12)
        assert area.total == area.gates_area + area.via_overhead

    def test_area_linearity_in_gate_count(self):
        profile = LIB.profile("cmos2d")
        a1 = die_area(profile, 1e6, RENT).gates_area
        a4 = die_area(profile, 4e6, RENT).gates_area
        assert a4 == pytest.approx(4.0 * a1, rel=1e-12)

    @pytest.mark.parametrize("n", [1e5, 5e6, 2e7])
    def test_cross_technology_ordering(self, n):
        rent = LIB.rent
        totals = {t: die_area(LIB.profile(t), n, rent).total for t in LIB.profiles}
        assert totals["sn3d"] < totals["m3d"] < totals["tsv3d"] < totals["cmos2d"]

    def test_invalid_gate_count(self):
        with pytest.raises(DomainValidationError):
            die_area(LIB.profile("cmos2d"), 0, RENT)

    def test_missing_gate_area_is_config_error(self):
        @dataclass
        class Broken:
            name: str = "broken"
            gate_area: float = 0.0
            tiers: int = 1
            via_spec: ViaSpec | None = None

        with pytest.raises(ConfigError):
            die_area(Broken(), 1e6, RENT)

    def test_negative_components_rejected(self):
        with pytest.raises(DomainValidationError):
            DieArea(gates_area=-1.0, via_overhead=0.0)


class TestInterTierViaCount:
    def test_single_tier_has_no_vias(self):
        assert inter_tier_via_count(1e6, RENT, 1) == 0.0

    def test_frozen_two_tier_count(self):
        # 0.75*4*(1 - 2^-0.4)*1e6*(1 - 1e6^-0.4)
        value = inter_tier_via_count(1e6, RENT, 2, 1.0)
        assert value == pytest.approx(723533.1996226158, rel=1e-12)

    def test_coefficient_scales_linearly(self):
        full = inter_tier_via_count(1e6, RENT, 2, 1.0)
        assert inter_tier_via_count(1e6, RENT, 2, 0.05) == pytest.approx(0.05 * full, rel=1e-12)

    def test_rent_saturation_limit(self):
        near_one = inter_tier_via_count(1e6, RentParameters(4.0, 1 - 1e-9, 3.0), 2)
        assert near_one < 1e-3 * inter_tier_via_count(1e6, RENT, 2)

    def test_rejects_bad_tiers(self):
        with pytest.raises(DomainValidationError):
            inter_tier_via_count(1e6, RENT, 0)

    def test_zero_coefficient_means_zero_overhead(self):
        profile = LIB.profile("tsv3d")
        from dataclasses import replace

        no_vias = replace(profile, via_spec=ViaSpec(25000.0, 0.0))
        assert die_area(no_vias, 1e6, RENT).via_overhead == 0.0


class TestGatePitch:
    def test_cmos2d(self):
        assert gate_pitch(LIB.profile("cmos2d")) == pytest.approx(math.sqrt(3125.0), rel=1e-12)
        assert gate_pitch(LIB.profile("cmos2d")) == pytest.approx(55.90, abs=0.005)

    def test_sn3d(self):
        assert gate_pitch(LIB.profile("sn3d")) == pytest.approx(20.78, abs=0.005)

    def test_stacked_footprint_is_halved(self):
        assert gate_pitch(LIB.profile("m3d")) == pytest.approx(math.sqrt(3125.0 / 2), rel=1e-12)

    def test_unit_square(self):
        from dataclasses import replace

        unit = replace(LIB.profile("cmos2d"), gate_area=1.0, metal_stack=LIB.profile("cmos2d").metal_stack)
        assert gate_pitch(unit) == 1.0
