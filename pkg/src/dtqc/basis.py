"""Blockade-constrained Hilbert space of an open chain.

Configurations are integer bitmasks with bit ``i`` set when site ``i`` is in
the Rydberg state. When written as a string the leftmost character is site 0,
so ``"1010"`` means sites 0 and 2 are excited (integer value 5).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConsistencyError, NamingError, PartitionError, SizeError

MAX_SITES = kernels.MAX_SITES
NAMED_STATES = ("Z2", "Z2prime", "Z3", "ground")
REGIONS = ("left", "right")


def is_legal(bits: int) -> bool:
    return bits & (bits >> 1) == 0


@dataclass(frozen=True)
class SiteConfiguration:
    bits: int
    n_sites: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise SizeError(f"n_sites must be >= 1, got {self.n_sites}")
        if not 0 <= self.bits < (1 << self.n_sites):
            raise ConsistencyError(f"bits {self.bits} do not fit in {self.n_sites} sites")
        if not is_legal(self.bits):
            raise ConsistencyError(f"{self.pattern()} has adjacent excitations")

    @classmethod
    def from_pattern(cls, pattern: str) -> SiteConfiguration:
        bits = sum(1 << i for i, ch in enumerate(pattern) if ch == "1")
        return cls(bits, len(pattern))

    @classmethod
    def from_sites(cls, sites, n_sites: int) -> SiteConfiguration:
        return cls(sum(1 << i for i in sites), n_sites)

    def pattern(self) -> str:
        return format_pattern(self.bits, self.n_sites)

    def excited_sites(self) -> list[int]:
        return [i for i in range(self.n_sites) if self.bits >> i & 1]

    def popcount(self) -> int:
        return bin(self.bits).count("1")


def format_pattern(bits: int, n_sites: int) -> str:
    return "".join("1" if bits >> i & 1 else "0" for i in range(n_sites))


@dataclass(frozen=True, eq=False)
class ConstrainedBasis:
    """Sorted list of legal configurations for an ``n_sites`` chain split at
    ``n_left`` into a left (sites ``< n_left``) and right region.

    Read-only after construction; the arrays are flagged non-writeable so the
    object can be shared between threads and forked workers.
    """

    n_sites: int
    n_left: int
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.states.flags.writeable = False

    @property
    def n_right(self) -> int:
        return self.n_sites - self.n_left

    @property
    def dim(self) -> int:
        return int(self.states.size)

    def __len__(self):
        return self.dim

    def __contains__(self, bits) -> bool:
        if isinstance(bits, SiteConfiguration):
            bits = bits.bits
        k = int(np.searchsorted(self.states, bits))
        return k < self.dim and int(self.states[k]) == bits

    def index_of(self, bits) -> int:
        """Position of a configuration (bitmask or SiteConfiguration)."""
        if isinstance(bits, SiteConfiguration):
            if bits.n_sites != self.n_sites:
                raise ConsistencyError("configuration and basis differ in n_sites")
            bits = bits.bits
        k = int(np.searchsorted(self.states, bits))
        if k >= self.dim or int(self.states[k]) != bits:
            raise NamingError(f"{format_pattern(bits, self.n_sites)} is not in the basis")
        return k

    def configuration(self, k: int) -> SiteConfiguration:
        return SiteConfiguration(int(self.states[k]), self.n_sites)

    def pattern(self, k: int) -> str:
        return format_pattern(int(self.states[k]), self.n_sites)

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, n_sites) 0/1 matrix of site occupations."""
        occ = kernels.occupations(self.states, self.n_sites)
        occ.flags.writeable = False
        return occ

    def region_counts(self, region: str) -> np.ndarray:
        lo, hi = _region_bounds(region, self.n_left, self.n_sites)
        return kernels.region_counts(self.states, lo, hi)

    def same_as(self, other: ConstrainedBasis) -> bool:
        return (
            self is other
            or (self.n_sites == other.n_sites and self.n_left == other.n_left)
        )

    @cached_property
    def heatmap_order(self) -> np.ndarray:
        """Row order for overlap heatmaps: ascending Hamming distance from the
        Z2 pattern, ties broken by bitmask value."""
        z2 = named_pattern("Z2", self.n_sites)
        dist = np.array([bin(int(s) ^ z2).count("1") for s in self.states])
        order = np.lexsort((self.states, dist))
        order.flags.writeable = False
        return order


def enumerate_basis(n_sites: int, n_left: int) -> ConstrainedBasis:
    """Enumerate every blockade-legal configuration of an open chain.

    Parameters
    ----------
    n_sites : int
        Chain length, ``2 <= n_sites <= MAX_SITES`` (32).
    n_left : int
        Size of the left region, ``1 <= n_left < n_sites``.

    Returns
    -------
    ConstrainedBasis
        ``Fib(n_sites + 2)`` configurations sorted by bitmask value.
    """
    if not 2 <= n_sites <= MAX_SITES:
        raise SizeError(f"n_sites must be in [2, {MAX_SITES}], got {n_sites}")
    if not 1 <= n_left < n_sites:
        raise PartitionError(f"n_left must satisfy 1 <= n_left < {n_sites}, got {n_left}")
    states = np.ascontiguousarray(kernels.enumerate_constrained(n_sites), dtype=np.int64)
    return ConstrainedBasis(int(n_sites), int(n_left), states)


def named_pattern(name: str, n_sites: int) -> int:
    if name == "Z2":
        sites = range(0, n_sites, 2)
    elif name == "Z2prime":
        sites = range(1, n_sites, 2)
    elif name == "Z3":
        sites = range(0, n_sites, 3)
    elif name == "ground":
        sites = ()
    else:
        raise NamingError(f"unknown state {name!r}; expected one of {', '.join(NAMED_STATES)}")
    return sum(1 << i for i in sites)


def named_state(basis: ConstrainedBasis, name: str):
    """Product state ``Z2``, ``Z2prime``, ``Z3`` or ``ground`` as a StateVector."""
    from .propagator import StateVector

    k = basis.index_of(named_pattern(name, basis.n_sites))
    amps = np.zeros(basis.dim, dtype=complex)
    amps[k] = 1.0
    return StateVector(amps, basis)


def _region_bounds(region: str, n_left: int, n_sites: int) -> tuple[int, int]:
    if region == "left":
        return 0, n_left
    if region == "right":
        return n_left, n_sites
    if region == "both":
        return 0, n_sites
    raise NamingError(f"unknown region {region!r}")


def region_excitation_count(config: SiteConfiguration, region: str, n_left: int) -> int:
    lo, hi = _region_bounds(region, n_left, config.n_sites)
    return sum(config.bits >> i & 1 for i in range(lo, hi))
