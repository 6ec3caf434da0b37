"""Exact time evolution through free-evolution segments and instantaneous kicks.

Between kicks the Hamiltonian is constant, so each segment is propagated
exactly with one eigendecomposition, ``psi(t) = V exp(-i E t) V^T psi``.
The sampled states of a segment are produced together as one real matrix
product. There is no time step in the usual sense: ``sample_dt`` only sets
where observables are recorded.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import ConstrainedBasis, enumerate_basis, named_state
from .errors import ConsistencyError, NumericalError, SizeError, ValidationError
from .model import (
    COINCIDENCE_TOL,
    ChainParameters,
    SparseHamiltonian,
    build_kick_schedule,
    build_pxp,
    event_phases,
)
from .observables import Observables

log = logging.getLogger(__name__)

DENSE_CAP = 4096
NORM_TOL = 1e-9
DEFAULT_SAMPLE_DT = 0.05


@dataclass(eq=False)
class StateVector:
    amplitudes: np.ndarray
    basis: ConstrainedBasis

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ConsistencyError(
                f"amplitude vector has shape {self.amplitudes.shape}, basis has {self.basis.dim}"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise ConsistencyError(f"state is not normalized (norm {norm!r})")

    @classmethod
    def from_unnormalized(cls, amplitudes, basis):
        a = np.asarray(amplitudes, dtype=complex)
        return cls(a / np.linalg.norm(a), basis)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.size


def _real_matmul(real_matrix, z):
    """``real_matrix @ z`` for complex ``z`` without promoting the matrix."""
    z = np.ascontiguousarray(z)
    if z.ndim == 1:
        return real_matrix @ z.real + 1j * (real_matrix @ z.imag)
    out = real_matrix @ z.view(np.float64)
    return out.view(np.complex128)


def decompose(h: SparseHamiltonian, *, dense_cap: int = DENSE_CAP,
              check: bool = True) -> SpectralDecomposition:
    """Full eigendecomposition ``H = V diag(E) V^T`` of a real symmetric H."""
    if h.dim > dense_cap:
        raise SizeError(f"dimension {h.dim} exceeds the dense cap {dense_cap}; use the Krylov engine")
    dense = h.to_dense()
    try:
        evals, evecs = scipy.linalg.eigh(dense, driver="evd")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"eigendecomposition of {h.dim}x{h.dim} PXP matrix failed: {exc}") from exc
    if check:
        scale = h.max_abs()
        recon = np.abs((evecs * evals) @ evecs.T - dense).max()
        ortho = np.abs(evecs.T @ evecs - np.eye(h.dim)).max()
        if recon > 1e-9 * max(scale, 1.0) or ortho > 1e-9:
            raise NumericalError(
                f"eigendecomposition inaccurate: reconstruction {recon:.3e}, "
                f"orthogonality {ortho:.3e} (dim {h.dim}, max|H| {scale:.3e})"
            )
    evals.flags.writeable = False
    evecs.flags.writeable = False
    return SpectralDecomposition(evals, evecs)


def evolve_interval(decomp: SpectralDecomposition, psi: StateVector, dt: float) -> StateVector:
    if dt < 0:
        raise ValidationError(f"dt must be non-negative, got {dt}")
    v = decomp.eigenvectors
    coeff = _real_matmul(v.T, psi.amplitudes)
    coeff *= np.exp(-1j * decomp.eigenvalues * dt)
    return StateVector(_real_matmul(v, coeff), psi.basis)


def apply_kick(psi: StateVector, phases: np.ndarray) -> StateVector:
    phases = np.asarray(phases)
    if phases.shape != psi.amplitudes.shape:
        raise ConsistencyError(f"phase table length {phases.size} != dimension {psi.basis.dim}")
    return StateVector(psi.amplitudes * phases, psi.basis)


# -- Krylov engine ------------------------------------------------------------

def krylov_expm(h_csr, psi: np.ndarray, dt: float, *, tol: float = 1e-10,
                max_dim: int = 40) -> np.ndarray:
    """``exp(-i H dt) psi`` by Lanczos with adaptive sub-stepping.

    Each sub-step uses the standard a-posteriori bound
    ``beta_m |[exp(-i T tau)]_{m,0}|`` on the truncation error; the step is
    halved until the bound is below ``tol * tau / dt``.
    """
    if dt == 0:
        return psi.copy()
    out = np.asarray(psi, dtype=complex).copy()
    remaining = dt
    step = dt
    while remaining > 0:
        step = min(step, remaining)
        nrm = np.linalg.norm(out)
        basis = np.zeros((max_dim + 1, out.size), dtype=complex)
        alpha = np.zeros(max_dim)
        beta = np.zeros(max_dim)
        basis[0] = out / nrm
        m = max_dim
        for j in range(max_dim):
            w = h_csr @ basis[j]
            alpha[j] = np.vdot(basis[j], w).real
            w -= alpha[j] * basis[j]
            if j > 0:
                w -= beta[j - 1] * basis[j - 1]
            # full reorthogonalization; max_dim is small
            w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-14:
                m = j + 1
                break
            basis[j + 1] = w / beta[j]
        while True:
            evals, evecs = scipy.linalg.eigh_tridiagonal(alpha[:m], beta[: m - 1])
            small = evecs @ (np.exp(-1j * evals * step) * evecs[0])
            err = beta[m - 1] * abs(small[m - 1]) if m == max_dim else 0.0
            if err <= tol * step / dt or step < 1e-12 * dt:
                break
            step /= 2
        out = nrm * (basis[:m].T @ small)
        remaining -= step
        step *= 1.5
    return out


# -- runs ---------------------------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    """Observables on the uniform grid ``t_k = k * sample_dt``."""

    sample_times: np.ndarray
    sample_dt: float
    series: dict = field(default_factory=dict)
    states: np.ndarray | None = None
    params: ChainParameters | None = None
    basis: ConstrainedBasis | None = None

    def __getitem__(self, name):
        return self.series[name]

    def __len__(self):
        return self.sample_times.size

    def state_at(self, k: int) -> StateVector:
        if self.states is None:
            raise ValidationError("trajectory was run without keep_states=True")
        return StateVector(self.states[k], self.basis)


def sample_grid(t_max: float, sample_dt: float) -> np.ndarray:
    if not sample_dt > 0:
        raise ValidationError(f"sample_dt must be positive, got {sample_dt}")
    if not t_max >= 0:
        raise ValidationError(f"t_max must be non-negative, got {t_max}")
    count = int(math.floor(t_max / sample_dt + 1e-9)) + 1
    return np.arange(count) * sample_dt


def _choose_engine(engine, dim, dense_cap):
    if engine == "auto":
        return "dense" if dim <= dense_cap else "krylov"
    if engine not in ("dense", "krylov"):
        raise ValidationError(f"unknown engine {engine!r}; use auto, dense or krylov")
    return engine


def run(params: ChainParameters, t_max: float, sample_dt: float = DEFAULT_SAMPLE_DT,
        observables=("m", "fidelity", "entropy"), *, engine: str = "auto",
        decomposition: SpectralDecomposition | None = None,
        initial: StateVector | None = None, keep_states: bool = False,
        entropy_cut: int | None = None, dense_cap: int = DENSE_CAP,
        block_size: int = 1024) -> Trajectory:
    """Evolve ``params.initial_state`` to ``t_max`` and record observables.

    Kicks that fall on a sample time are applied after the sample is taken.
    ``fidelity`` is measured against the initial state.

    Parameters
    ----------
    decomposition : SpectralDecomposition, optional
        Reuse a decomposition of the same Hamiltonian (sweeps share one
        across all cells with equal Rabi frequencies).
    keep_states : bool
        Store every sampled state in ``Trajectory.states``.
    """
    basis = enumerate_basis(params.n_sites, params.n_left)
    h = build_pxp(basis, params)
    psi0 = named_state(basis, params.initial_state) if initial is None else initial
    if not psi0.basis.same_as(basis):
        raise ConsistencyError("initial state basis does not match the parameters")
    times = sample_grid(t_max, sample_dt)
    schedule = build_kick_schedule(params, t_max)
    evaluator = Observables(basis, observables, reference=psi0,
                            entropy_cut=entropy_cut, hamiltonian=h)
    kick_tables = {}

    def phases_for(regions):
        if regions not in kick_tables:
            kick_tables[regions] = event_phases(basis, params, regions)
        return kick_tables[regions]

    chosen = _choose_engine(engine, basis.dim, dense_cap)
    collected: dict[str, list] = {n: [] for n in evaluator.names}
    kept = [] if keep_states else None

    def record(block):
        for name, values in evaluator.evaluate(block).items():
            collected[name].append(values)
        if kept is not None:
            kept.append(block.copy())

    if chosen == "dense":
        if decomposition is None:
            decomposition = decompose(h, dense_cap=dense_cap)
        elif decomposition.dim != basis.dim:
            raise ConsistencyError("decomposition does not match the basis dimension")
        _run_dense(decomposition, psi0.amplitudes, times, schedule, phases_for, record, block_size)
    else:
        _run_krylov(h.to_csr(), psi0.amplitudes, times, schedule, phases_for, record)

    series = {}
    for name, chunks in collected.items():
        series[name] = np.concatenate(chunks, axis=0) if chunks else np.empty(0)
    states = np.concatenate(kept, axis=0) if kept else None
    return Trajectory(times, float(sample_dt), series, states, params, basis)


def _run_dense(decomp, psi0, times, schedule, phases_for, record, block_size):
    evals = decomp.eigenvalues
    v = decomp.eigenvectors
    coeff = _real_matmul(v.T, psi0)
    t_ref = 0.0
    j = 0
    if times.size and times[0] == 0.0:
        # the t = 0 sample is the initial state itself, free of eigenbasis round-off
        record(np.asarray(psi0, dtype=complex)[None, :])
        j = 1
    boundaries = [(ev.time, ev.regions) for ev in schedule] + [(math.inf, None)]
    for t_kick, regions in boundaries:
        # sample first, then kick: include samples up to the kick time
        stop = int(np.searchsorted(times, t_kick + COINCIDENCE_TOL, side="right"))
        while j < stop:
            nxt = min(stop, j + block_size)
            phase = np.exp(-1j * np.outer(evals, times[j:nxt] - t_ref))
            phase *= coeff[:, None]
            record(np.ascontiguousarray(_real_matmul(v, phase).T))
            j = nxt
        if regions is None:
            break
        psi = _real_matmul(v, coeff * np.exp(-1j * evals * (t_kick - t_ref)))
        psi *= phases_for(regions)
        coeff = _real_matmul(v.T, psi)
        t_ref = t_kick


def _run_krylov(h_csr, psi0, times, schedule, phases_for, record):
    events = [(t, 0, None) for t in times]
    events += [(ev.time, 1, ev.regions) for ev in schedule]
    # same tie rule as the dense engine: a sample within the coincidence
    # tolerance of a kick is taken before it
    events.sort(key=lambda e: (e[0] - (COINCIDENCE_TOL if e[1] == 0 else 0.0), e[1]))
    psi = psi0.astype(complex)
    t_now = 0.0
    for t, kind, regions in events:
        if t > t_now:
            psi = krylov_expm(h_csr, psi, t - t_now)
            t_now = t
        if kind == 0:
            record(psi[None, :])
        else:
            psi = psi * phases_for(regions)
