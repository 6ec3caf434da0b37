"""Bipartite PXP Hamiltonian and the two delta-kick trains."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import kernels
from .basis import NAMED_STATES, ConstrainedBasis, _region_bounds
from .errors import ConsistencyError, NamingError, PartitionError, SizeError, ValidationError

GOLDEN_RATIO = (math.sqrt(5.0) + 1.0) / 2.0
COINCIDENCE_TOL = 1e-9


@dataclass(frozen=True)
class ChainParameters:
    """Physical parameters of one run.

    Times are in units of ``1/omega_left`` when ``omega_left = 1``. Drive
    frequencies are angular: ``f_left = 2*pi/period_left``.
    """

    n_sites: int
    n_left: int
    omega_left: float = 1.0
    omega_right: float = GOLDEN_RATIO
    period_left: float = 4.74
    period_right: float = 4.74 / GOLDEN_RATIO
    theta_left: float = math.pi
    theta_right: float = math.pi
    initial_state: str = "Z2"

    def __post_init__(self):
        if not 2 <= self.n_sites <= kernels.MAX_SITES:
            raise SizeError(f"n_sites must be in [2, {kernels.MAX_SITES}], got {self.n_sites}")
        if not 1 <= self.n_left < self.n_sites:
            raise PartitionError(
                f"n_left must satisfy 1 <= n_left < n_sites={self.n_sites}, got {self.n_left}"
            )
        for name in ("omega_left", "omega_right", "period_left", "period_right"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive and finite, got {value}")
        for name in ("theta_left", "theta_right"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.initial_state not in NAMED_STATES:
            raise NamingError(f"unknown initial state {self.initial_state!r}")

    @property
    def n_right(self):
        return self.n_sites - self.n_left

    @property
    def f_left(self):
        return 2 * math.pi / self.period_left

    @property
    def f_right(self):
        return 2 * math.pi / self.period_right

    @property
    def ratio(self):
        return self.period_left / self.period_right

    def hamiltonian_key(self):
        return (self.n_sites, self.n_left, float(self.omega_left), float(self.omega_right))

    def replace(self, **changes) -> ChainParameters:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def golden_chain(n_sites, *, n_left=None, period_left=4.74, theta=math.pi,
                 omega_left=1.0, initial_state="Z2") -> ChainParameters:
    """Bipartite chain with ``omega_right/omega_left = T_L/T_R = r`` (golden)."""
    return ChainParameters(
        n_sites=n_sites,
        n_left=n_sites // 2 if n_left is None else n_left,
        omega_left=omega_left,
        omega_right=omega_left * GOLDEN_RATIO,
        period_left=period_left,
        period_right=period_left / GOLDEN_RATIO,
        theta_left=theta,
        theta_right=theta,
        initial_state=initial_state,
    )


def uniform_chain(n_sites, *, n_left=None, period=4.74, theta=math.pi,
                  omega=1.0, initial_state="Z2") -> ChainParameters:
    """Uniform Rabi frequency and a single (coincident) kick train."""
    return ChainParameters(
        n_sites=n_sites,
        n_left=n_sites // 2 if n_left is None else n_left,
        omega_left=omega,
        omega_right=omega,
        period_left=period,
        period_right=period,
        theta_left=theta,
        theta_right=theta,
        initial_state=initial_state,
    )


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Real symmetric matrix in coordinate form; both (i, j) and (j, i) stored."""

    dim: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        for a in (self.rows, self.cols, self.values):
            a.flags.writeable = False

    @property
    def nnz(self):
        return int(self.values.size)

    def entries(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist()))

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=(self.dim, self.dim))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        out[self.rows, self.cols] = self.values
        return out

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.nnz else 0.0


def build_pxp(basis: ConstrainedBasis, params: ChainParameters) -> SparseHamiltonian:
    """PXP Hamiltonian with Rabi frequency ``omega_left`` on sites ``< n_left``
    and ``omega_right`` elsewhere. Open boundaries: the missing neighbour of an
    end site imposes no constraint."""
    if basis.n_sites != params.n_sites or basis.n_left != params.n_left:
        raise ConsistencyError(
            f"basis ({basis.n_sites}, {basis.n_left}) does not match parameters "
            f"({params.n_sites}, {params.n_left})"
        )
    rows, cols, vals = kernels.pxp_coo(
        basis.states, basis.n_sites, basis.n_left,
        float(params.omega_left), float(params.omega_right),
    )
    keep = vals != 0.0
    return SparseHamiltonian(
        basis.dim,
        np.ascontiguousarray(rows[keep]),
        np.ascontiguousarray(cols[keep]),
        np.ascontiguousarray(vals[keep]),
    )


@dataclass(frozen=True)
class KickEvent:
    time: float
    regions: frozenset

    def __post_init__(self):
        if not self.time > 0:
            raise ValidationError(f"kick time must be positive, got {self.time}")
        if not self.regions or not set(self.regions) <= {"left", "right"}:
            raise ValidationError(f"bad kick regions {self.regions!r}")


@dataclass(frozen=True)
class KickSchedule:
    events: tuple
    t_max: float

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def times(self):
        return np.array([e.time for e in self.events])


def _comb(period, t_max):
    # k*T rather than cumulative sums: no drift over ~1e3 periods
    count = int(math.floor(t_max / period + COINCIDENCE_TOL / period))
    return [k * period for k in range(1, count + 1)]


def build_kick_schedule(params: ChainParameters, t_max: float) -> KickSchedule:
    """Kick times ``k*T_L`` (left) and ``k*T_R`` (right) for ``k >= 1`` up to
    ``t_max``. Left and right kicks closer than 1e-9 become one event."""
    if not t_max >= 0:
        raise ValidationError(f"t_max must be non-negative, got {t_max}")
    raw = [(t, "left") for t in _comb(params.period_left, t_max)]
    raw += [(t, "right") for t in _comb(params.period_right, t_max)]
    raw.sort(key=lambda e: e[0])
    merged: list[list] = []
    for t, region in raw:
        if merged and t - merged[-1][0] < COINCIDENCE_TOL:
            merged[-1][1].add(region)
        else:
            merged.append([t, {region}])
    events = tuple(KickEvent(t, frozenset(regions)) for t, regions in merged)
    return KickSchedule(events, float(t_max))


def kick_phases(basis: ConstrainedBasis, theta: float, region: str) -> np.ndarray:
    """Diagonal of ``exp(-i theta n_region)``; region is left, right or both."""
    lo, hi = _region_bounds(region, basis.n_left, basis.n_sites)
    counts = kernels.region_counts(basis.states, lo, hi)
    return np.exp(-1j * theta * counts)


def event_phases(basis: ConstrainedBasis, params: ChainParameters, regions) -> np.ndarray:
    """Combined phase table of one (possibly merged) kick event."""
    phases = np.ones(basis.dim, dtype=complex)
    if "left" in regions:
        phases *= kick_phases(basis, params.theta_left, "left")
    if "right" in regions:
        phases *= kick_phases(basis, params.theta_right, "right")
    return phases
