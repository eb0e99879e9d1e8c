import math

import numpy as np
import pytest
from scipy.integrate import quad

from stackcost.errors import (
    DegenerateExponentError,
    DomainValidationError,
    OutOfDomainError,
)
from stackcost.wirelength import (
    GridPairHistogram,
    WirelengthDistribution,
    continuous_pair_count,
    grid_pair_histogram,
    normalization_tau,
    tau_closed_form,
)

DIST = WirelengthDistribution.build(1e6, 4.0, 0.6, 0.75)


def density_reference(dist, l):
    """Independent density evaluation straight from the two-region formula."""
    sn = math.sqrt(dist.n_gates)
    p = dist.p
    pref = dist.alpha * dist.k_effective * dist.tau
    if l <= sn:
        return pref / 2.0 * (l**3 / 3.0 - 2.0 * sn * l * l + 2.0 * sn * sn * l) * l ** (2 * p - 4)
    return pref / 6.0 * max(2.0 * sn - l, 0.0) ** 3 * l ** (2 * p - 4)


def antiderivative_count(dist, l):
    """Closed-form antiderivative of i over region boundaries (test oracle)."""
    sn = math.sqrt(dist.n_gates)
    p = dist.p
    pref = dist.alpha * dist.k_effective * dist.tau

    def region1(x):
        return 0.5 * (
            x ** (2 * p) / (6 * p)
            - 2 * sn * x ** (2 * p - 1) / (2 * p - 1)
            + sn * sn * x ** (2 * p - 2) / (p - 1)
        )

    def region2(x):
        return (
            8 * sn**3 * x ** (2 * p - 3) / (2 * p - 3)
            - 12 * sn**2 * x ** (2 * p - 2) / (2 * p - 2)
            + 6 * sn * x ** (2 * p - 1) / (2 * p - 1)
            - x ** (2 * p) / (2 * p)
        ) / 6.0

    if l <= sn:
        return pref * (region1(l) - region1(1.0))
    return pref * (region1(sn) - region1(1.0) + region2(l) - region2(sn))


class TestNormalization:
    def test_numeric_tau_frozen(self):
        assert normalization_tau(1024, 0.6) == pytest.approx(0.9138591322577596, rel=1e-9)

    def test_numeric_matches_closed_form_within_one_percent(self):
        # dual-method comparison; they actually agree to machine precision
        numeric = normalization_tau(1024, 0.6)
        closed = tau_closed_form(1024, 0.6)
        assert numeric == pytest.approx(closed, rel=0.01)
        assert numeric == pytest.approx(closed, rel=1e-10)

    @pytest.mark.parametrize("n,p", [(1e4, 0.35), (1e6, 0.66), (5e7, 0.8)])
    def test_closed_form_cross_check(self, n, p):
        assert normalization_tau(n, p) == pytest.approx(tau_closed_form(n, p), rel=1e-9)

    def test_degenerate_exponent_rejected(self):
        with pytest.raises(DegenerateExponentError):
            normalization_tau(1024, 0.5)

    def test_small_designs_rejected(self):
        with pytest.raises(DomainValidationError):
            normalization_tau(3, 0.6)

    def test_normalization_invariant_by_construction(self):
        total = DIST.cumulative_count(DIST.domain[1])
        assert total == pytest.approx(DIST.total_count, rel=1e-6)

    def test_conservation_against_scipy(self):
        sn = DIST.sqrt_n
        total, _ = quad(
            lambda l: density_reference(DIST, l), 1.0, 2 * sn, points=[sn], limit=400
        )
        assert total == pytest.approx(DIST.total_count, rel=1e-8)


class TestDensity:
    def test_zero_at_domain_end(self):
        assert DIST.density(DIST.domain[1]) == 0.0

    def test_region_boundary_continuity(self):
        # both region expressions, evaluated independently at sqrt(N)
        sn = DIST.sqrt_n
        p = DIST.p
        pref = DIST.alpha * DIST.k_effective * DIST.tau
        region1 = pref / 2.0 * (sn**3 / 3.0 - 2.0 * sn**3 + 2.0 * sn**3) * sn ** (2 * p - 4)
        region2 = pref / 6.0 * sn**3 * sn ** (2 * p - 4)
        assert region1 == pytest.approx(region2, rel=1e-9)
        assert DIST.density(sn) == pytest.approx(region2, rel=1e-9)

    def test_frozen_density_regressions(self):
        # recorded after verifying the normalization invariant against scipy
        assert DIST.density(1.0) == pytest.approx(2425348.8385162516, rel=1e-9)
        assert DIST.density(10.0) == pytest.approx(38093.52457752867, rel=1e-9)
        assert DIST.density(1000.0) == pytest.approx(1.6108585295646711, rel=1e-9)

    def test_matches_reference_formula(self):
        for l in (1.0, 7.3, 999.0, 1001.0, 1500.0, 1999.0):
            assert DIST.density(l) == pytest.approx(density_reference(DIST, l), rel=1e-12)

    def test_out_of_domain_rejected(self):
        with pytest.raises(OutOfDomainError):
            DIST.density(0.5)
        with pytest.raises(OutOfDomainError):
            DIST.density(2001.0)

    def test_vectorized_matches_scalar(self):
        ls = np.geomspace(1.0, 2000.0, 37)
        many = DIST.density_many(ls)
        for l, v in zip(ls, many):
            assert v == pytest.approx(DIST.density(float(l)), rel=1e-12)

    def test_nonnegative_everywhere(self):
        ls = np.linspace(1.0, 2000.0, 501)
        assert np.all(DIST.density_many(ls) >= 0.0)


class TestCumulatives:
    def test_empty_interval(self):
        assert DIST.cumulative_count(1.0) == 0.0
        assert DIST.cumulative_length(1.0) == 0.0

    def test_total_count_frozen(self):
        assert DIST.cumulative_count(2000.0) == pytest.approx(2988056.7848833953, rel=1e-9)

    def test_total_length_frozen(self):
        assert DIST.cumulative_length(2000.0) == pytest.approx(29169000.109002106, rel=1e-9)

    def test_mean_length_bounds(self):
        mean = DIST.cumulative_length(2000.0) / DIST.cumulative_count(2000.0)
        assert 1.0 < mean < 2000.0

    @pytest.mark.parametrize("l", [2.0, 10.0, 500.0, 1000.0, 1500.0])
    def test_against_scipy(self, l):
        sn = DIST.sqrt_n
        pts = [sn] if l > sn else None
        count, _ = quad(lambda z: density_reference(DIST, z), 1.0, l, points=pts, limit=400)
        length, _ = quad(lambda z: z * density_reference(DIST, z), 1.0, l, points=pts, limit=400)
        assert DIST.cumulative_count(l) == pytest.approx(count, rel=1e-8)
        assert DIST.cumulative_length(l) == pytest.approx(length, rel=1e-8)

    @pytest.mark.parametrize("l", [2.0, 10.0, 500.0, 1000.0, 1500.0, 2000.0])
    def test_count_against_closed_form_antiderivative(self, l):
        assert DIST.cumulative_count(l) == pytest.approx(antiderivative_count(DIST, l), rel=1e-9)

    def test_monotone_nondecreasing(self):
        ls = np.geomspace(1.0, 2000.0, 24)
        counts = [DIST.cumulative_count(float(l)) for l in ls]
        lengths = [DIST.cumulative_length(float(l)) for l in ls]
        assert all(b >= a for a, b in zip(counts, counts[1:]))
        assert all(b >= a for a, b in zip(lengths, lengths[1:]))


class TestFabricScaling:
    def test_pointwise_density_ratio(self):
        n_layers = 10
        p = 0.6
        fabric = WirelengthDistribution.build(1e6, 4.0 * n_layers ** (p - 1.0), p, 0.75)
        expected = n_layers ** (p - 1.0)
        for l in (1.0, 5.0, 100.0, 1000.0, 1700.0):
            assert fabric.density(l) / DIST.density(l) == pytest.approx(expected, rel=1e-9)
        for l in (10.0, 1000.0, 2000.0):
            ratio = fabric.cumulative_count(l) / DIST.cumulative_count(l)
            assert ratio == pytest.approx(expected, rel=1e-9)


class TestGridPairHistogram:
    def test_single_cell_has_no_pairs(self):
        assert grid_pair_histogram(1) == GridPairHistogram(side=1, counts={})

    def test_side_two_exact(self):
        assert grid_pair_histogram(2).counts == {1: 4, 2: 2}

    def test_side_three_exact(self):
        assert grid_pair_histogram(3).counts == {1: 12, 2: 14, 3: 8, 4: 2}

    def test_brute_force_oracle_side_five(self):
        side = 5
        cells = [(x, y) for x in range(side) for y in range(side)]
        expected: dict[int, int] = {}
        for i, (x1, y1) in enumerate(cells):
            for x2, y2 in cells[i + 1 :]:
                d = abs(x1 - x2) + abs(y1 - y2)
                expected[d] = expected.get(d, 0) + 1
        assert grid_pair_histogram(side).counts == expected

    @pytest.mark.parametrize("side", [2, 3, 4, 8, 17, 32])
    def test_total_pairs_and_max_distance(self, side):
        hist = grid_pair_histogram(side)
        n = side * side
        assert hist.total_pairs == n * (n - 1) // 2
        assert max(hist.counts) == 2 * (side - 1)

    def test_rejects_bad_side(self):
        with pytest.raises(DomainValidationError):
            grid_pair_histogram(0)

    def test_continuous_polynomial_ladder(self):
        # mid-domain deviation of the continuous pair-count polynomial
        # shrinks monotonically with the grid side
        deviations = []
        for side in range(4, 33):
            hist = grid_pair_histogram(side)
            l = side
            approx = continuous_pair_count(float(l), float(side))
            dev = abs(approx - hist.counts[l]) / hist.counts[l]
            deviations.append(dev)
        assert deviations[0] <= 0.25
        assert deviations[-1] <= 0.05
        assert all(b <= a * (1 + 1e-12) for a, b in zip(deviations, deviations[1:]))

    @pytest.mark.parametrize("side", [4, 8, 16, 32])
    def test_polynomial_tracks_counts_across_mid_domain(self, side):
        # around the region boundary the continuous approximation stays
        # within the coarse-grid tolerance (it degrades only at the far tail)
        hist = grid_pair_histogram(side)
        tolerance = 0.25 if side <= 8 else 0.10
        for l in range(max(side // 2, 2), side + side // 4 + 1):
            approx = continuous_pair_count(float(l), float(side))
            assert approx == pytest.approx(hist.counts[l], rel=tolerance)
