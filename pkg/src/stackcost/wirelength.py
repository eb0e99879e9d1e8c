"""Closed-form two-region stochastic wirelength distribution.

The density i(l) of a square gate array is a piecewise polynomial times
l^(2p-4), normalized so its integral over [1, 2*sqrt(N)] reproduces the
Rent-based total interconnect count. The normalization factor tau is
computed numerically (integrate and divide); the published closed form is
kept as a cross-check only, because the printed version of that expression
is easy to garble and the numeric route is what actually guarantees
conservation.

Also hosts the exhaustive Manhattan grid-pair oracle used to validate the
polynomial structure against discrete placements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import DegenerateExponentError, DomainValidationError, OutOfDomainError
from .rent import RentParameters

#: Default target relative error for all cumulative quadratures.
QUADRATURE_REL_TOL = 1e-10

_POLE_EPS = 1e-9


def _check_exponent(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainValidationError(f"Rent exponent p must lie in (0, 1), got {p}")
    if abs(p - 0.5) < _POLE_EPS:
        raise DegenerateExponentError(
            "p = 0.5 is a pole of the closed-form normalization; "
            "perturb the exponent away from 0.5"
        )


def normalization_tau(n_gates: float, p: float, rel_tol: float = QUADRATURE_REL_TOL) -> float:
    """Normalization factor making the density integrate to the Rent total.

    Computed as N*(1 - N^(p-1)) divided by the numeric integral of the
    unnormalized shape; :func:`tau_closed_form` cross-checks the value.
    """
    if not n_gates >= 4:
        raise DomainValidationError(f"n_gates must be >= 4 for a distribution, got {n_gates}")
    _check_exponent(p)
    sqrt_n = math.sqrt(n_gates)
    shape_integral = kernels.moment_integral(1.0, 2.0 * sqrt_n, sqrt_n, p, 0, rel_tol)
    return n_gates * (1.0 - n_gates ** (p - 1.0)) / shape_integral


def tau_closed_form(n_gates: float, p: float) -> float:
    """Closed-form normalization factor (cross-check for the numeric route)."""
    if not n_gates >= 4:
        raise DomainValidationError(f"n_gates must be >= 4 for a distribution, got {n_gates}")
    _check_exponent(p)
    n = float(n_gates)
    denominator = (
        -(n**p) * (1.0 + 2.0 * p - 2.0 ** (2.0 * p - 1.0)) / (p * (2 * p - 1) * (p - 1) * (2 * p - 3))
        - 1.0 / (6.0 * p)
        + 2.0 * math.sqrt(n) / (2 * p - 1)
        - n / (p - 1)
    )
    return 2.0 * n * (1.0 - n ** (p - 1.0)) / denominator


@dataclass(frozen=True)
class WirelengthDistribution:
    """Evaluator for i(l), I(l) and L(l) over [1, 2*sqrt(N)] in gate pitches.

    k_effective is the per-block terminal count actually feeding metal
    wiring: the plain Rent k for 2-D and TSV stacking, k*2^(p-1) for a
    two-tier monolithic stack, k*n^(p-1) for an n-layer nanowire fabric.
    """

    n_gates: float
    k_effective: float
    p: float
    alpha: float
    tau: float

    @classmethod
    def build(
        cls,
        n_gates: float,
        k_effective: float,
        p: float,
        alpha: float,
        rel_tol: float = QUADRATURE_REL_TOL,
    ) -> "WirelengthDistribution":
        if k_effective <= 0:
            raise DomainValidationError(f"k_effective must be > 0, got {k_effective}")
        if not 0.0 < alpha < 1.0:
            raise DomainValidationError(f"alpha must lie in (0, 1), got {alpha}")
        tau = normalization_tau(n_gates, p, rel_tol)
        return cls(n_gates=float(n_gates), k_effective=k_effective, p=p, alpha=alpha, tau=tau)

    @classmethod
    def from_rent(
        cls, n_gates: float, rent: RentParameters, k_effective: float | None = None
    ) -> "WirelengthDistribution":
        return cls.build(
            n_gates,
            rent.k if k_effective is None else k_effective,
            rent.p,
            rent.alpha,
        )

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.n_gates)

    @property
    def domain(self) -> tuple[float, float]:
        """Closed support of the density, in gate pitches."""
        return 1.0, 2.0 * self.sqrt_n

    @property
    def _prefactor(self) -> float:
        return self.alpha * self.k_effective * self.tau

    def _check_l(self, l: float) -> float:
        lo, hi = self.domain
        if not lo <= l <= hi * (1.0 + 1e-12):
            raise OutOfDomainError(f"length {l} outside the distribution domain [{lo}, {hi}]")
        return min(float(l), hi)

    def density(self, l: float) -> float:
        """Interconnect density i(l), wires per unit gate-pitch length."""
        l = self._check_l(l)
        return self._prefactor * kernels.density_shape(l, self.sqrt_n, self.p)

    def density_many(self, ls: np.ndarray) -> np.ndarray:
        """Vectorized i(l) for curve export."""
        ls = np.asarray(ls, dtype=np.float64)
        lo, hi = self.domain
        if np.any(ls < lo) or np.any(ls > hi * (1.0 + 1e-12)):
            raise OutOfDomainError("length sample outside the distribution domain")
        return self._prefactor * kernels.density_shape_array(np.minimum(ls, hi), self.sqrt_n, self.p)

    def count_between(self, a: float, b: float) -> float:
        """Wires with length in [a, b]: integral of i."""
        a = self._check_l(a)
        b = self._check_l(b)
        return self._prefactor * kernels.moment_integral(a, b, self.sqrt_n, self.p, 0)

    def length_between(self, a: float, b: float) -> float:
        """Total wire length (gate pitches) contributed by lengths in [a, b]."""
        a = self._check_l(a)
        b = self._check_l(b)
        return self._prefactor * kernels.moment_integral(a, b, self.sqrt_n, self.p, 1)

    def cumulative_count(self, l: float) -> float:
        """I(l): number of wires no longer than l."""
        return self.count_between(1.0, l)

    def cumulative_length(self, l: float) -> float:
        """L(l): total gate-pitch length of wires no longer than l."""
        return self.length_between(1.0, l)

    @property
    def total_count(self) -> float:
        """Rent-based total the density is normalized to."""
        return (
            self.alpha
            * self.k_effective
            * self.n_gates
            * (1.0 - self.n_gates ** (self.p - 1.0))
        )

    @cached_property
    def total_length(self) -> float:
        """L at the domain end, in gate pitches."""
        return self.cumulative_length(self.domain[1])


@dataclass(frozen=True)
class GridPairHistogram:
    """Exhaustive unordered-pair counts of a side x side array, by distance."""

    side: int
    counts: dict[int, int]

    def __post_init__(self) -> None:
        n = self.side * self.side
        if sum(self.counts.values()) != n * (n - 1) // 2:
            raise DomainValidationError("histogram does not cover every unordered pair")
        if self.counts and max(self.counts) > 2 * (self.side - 1):
            raise DomainValidationError("histogram contains an impossible distance")

    @property
    def total_pairs(self) -> int:
        return sum(self.counts.values())


def grid_pair_histogram(side: int) -> GridPairHistogram:
    """Enumerate all unordered cell pairs and bin them by Manhattan distance."""
    if not (isinstance(side, int) and side >= 1):
        raise DomainValidationError(f"side must be an integer >= 1, got {side}")
    raw = kernels.grid_pair_counts(side)
    counts = {int(d): int(c) for d, c in enumerate(raw) if d > 0 and c > 0}
    return GridPairHistogram(side=side, counts=counts)


def continuous_pair_count(l: float, side: float) -> float:
    """Continuous approximation of the unordered pair count at distance l.

    This is the polynomial core of the density (without Rent weighting and
    without the per-wire sharing factor 1/2): l^3/3 - 2*side*l^2 + 2*N*l up
    to the region boundary, (2*side - l)^3 / 3 above it.
    """
    n_cells = side * side
    if l <= side:
        return l**3 / 3.0 - 2.0 * side * l * l + 2.0 * n_cells * l
    return max(2.0 * side - l, 0.0) ** 3 / 3.0
