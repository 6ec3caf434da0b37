"""Measured quantities of a chain state.

Per-state functions take a :class:`~dtqc.propagator.StateVector`. The
:class:`Observables` evaluator computes the same quantities for a block of
states at once (rows of a 2-D amplitude array); the propagator uses it on every
batch of sampled states.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .basis import ConstrainedBasis, enumerate_basis
from .errors import ConsistencyError, NamingError, ValidationError

ENTROPY_CUTOFF = 1e-14

SCALAR_OBSERVABLES = ("m", "m_density", "m_signed", "fidelity", "entropy", "energy", "norm")
VECTOR_OBSERVABLES = ("densities", "overlaps")
KNOWN_OBSERVABLES = SCALAR_OBSERVABLES + VECTOR_OBSERVABLES


def _staggered_weights(basis: ConstrainedBasis, convention: str) -> np.ndarray:
    signs = (-1.0) ** np.arange(basis.n_sites)
    occ = basis.occupations.astype(float)
    if convention == "spin":
        return (2.0 * occ - 1.0) @ signs
    if convention == "density":
        return occ @ signs
    raise NamingError(f"unknown convention {convention!r}; use 'spin' or 'density'")


def staggered_magnetization(psi, convention: str = "spin", *, signed: bool = False) -> float:
    """Antiferromagnetic order parameter ``|sum_i (-1)^i <s_i>| / N``.

    ``convention="spin"`` uses ``s_i = 2 n_i - 1`` (Z2 gives 1);
    ``convention="density"`` uses ``s_i = n_i`` (Z2 gives 1/2 for even N).
    With ``signed=True`` the modulus is dropped, which keeps the sign flip
    between Z2 and Z2' visible.
    """
    w = _staggered_weights(psi.basis, convention)
    value = float(np.clip(np.abs(psi.amplitudes) ** 2 @ w / psi.basis.n_sites, -1.0, 1.0))
    return value if signed else abs(value)


def fidelity(psi, reference) -> float:
    if not psi.basis.same_as(reference.basis):
        raise ConsistencyError("states live on different bases")
    return float(min(1.0, abs(np.vdot(reference.amplitudes, psi.amplitudes))))


def site_densities(psi) -> np.ndarray:
    return np.clip(np.abs(psi.amplitudes) ** 2 @ psi.basis.occupations.astype(float), 0.0, 1.0)


def basis_overlaps(psi, order=None) -> np.ndarray:
    """|amplitude| per configuration, in heatmap row order by default."""
    if order is None:
        order = psi.basis.heatmap_order
    return np.abs(psi.amplitudes)[order]


@lru_cache(maxsize=64)
def schmidt_layout(n_sites: int, n_left: int, cut: int):
    """Row/column indices placing each basis amplitude in the (left, right)
    coefficient matrix for a bipartition at ``cut``.

    Returns ``(rows, cols, d_left, d_right)``; ``d_left`` and ``d_right`` are
    the constrained dimensions of the two open sub-chains.
    """
    basis = enumerate_basis(n_sites, n_left)
    if not 1 <= cut <= n_sites - 1:
        raise ValidationError(f"cut must be in [1, {n_sites - 1}], got {cut}")
    left = basis.states & ((1 << cut) - 1)
    right = basis.states >> cut
    left_vals, rows = np.unique(left, return_inverse=True)
    right_vals, cols = np.unique(right, return_inverse=True)
    for a in (rows, cols):
        a.flags.writeable = False
    return rows, cols, left_vals.size, right_vals.size


def _check_cut(basis, cut):
    if cut is None:
        cut = basis.n_left
    if not 1 <= cut <= basis.n_sites - 1:
        raise ValidationError(f"cut must be in [1, {basis.n_sites - 1}], got {cut}")
    return cut


def _entropy_from_svals(svals: np.ndarray) -> np.ndarray:
    p = svals ** 2
    terms = np.where(p > ENTROPY_CUTOFF, -p * np.log(np.where(p > ENTROPY_CUTOFF, p, 1.0)), 0.0)
    # a single Schmidt value of 1 + eps would give -eps
    return np.maximum(terms.sum(axis=-1), 0.0)


def entanglement_entropy(psi, cut: int | None = None, *, side: str | None = None) -> float:
    """Von Neumann entropy (nats) across the bond between sites ``cut-1`` and
    ``cut`` (default: the left/right region boundary).

    By default the entropy comes from the singular values of the coefficient
    matrix. ``side="left"`` or ``"right"`` instead diagonalizes the reduced
    density matrix of that sub-chain; all three agree to rounding.
    """
    basis = psi.basis
    cut = _check_cut(basis, cut)
    rows, cols, d_l, d_r = schmidt_layout(basis.n_sites, basis.n_left, cut)
    m = np.zeros((d_l, d_r), dtype=complex)
    m[rows, cols] = psi.amplitudes
    if side is None:
        return float(_entropy_from_svals(np.linalg.svd(m, compute_uv=False)))
    if side == "right":
        rho = m.conj().T @ m
    elif side == "left":
        rho = m @ m.conj().T
    else:
        raise NamingError(f"side must be 'left' or 'right', got {side!r}")
    p = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    return float(_entropy_from_svals(np.sqrt(p)))


def max_entropy(basis: ConstrainedBasis, cut: int | None = None) -> float:
    """Upper bound ``ln(min(d_left, d_right))`` for :func:`entanglement_entropy`."""
    cut = _check_cut(basis, cut)
    _, _, d_l, d_r = schmidt_layout(basis.n_sites, basis.n_left, cut)
    return float(np.log(min(d_l, d_r)))


class Observables:
    """Block evaluator: ``evaluate(amps)`` with ``amps`` of shape (batch, dim)."""

    def __init__(self, basis, names, *, reference=None, entropy_cut=None,
                 hamiltonian=None, overlap_order=None):
        unknown = [n for n in names if n not in KNOWN_OBSERVABLES]
        if unknown:
            raise NamingError(f"unknown observable(s) {unknown}; known: {list(KNOWN_OBSERVABLES)}")
        self.basis = basis
        self.names = tuple(dict.fromkeys(names))
        if "fidelity" in self.names and reference is None:
            raise ValidationError("fidelity requires a reference state")
        self._reference = None if reference is None else np.conj(reference.amplitudes)
        self._spin = _staggered_weights(basis, "spin") / basis.n_sites
        self._density = _staggered_weights(basis, "density") / basis.n_sites
        self._occ = basis.occupations.astype(float)
        self.entropy_cut = _check_cut(basis, entropy_cut)
        if "energy" in self.names and hamiltonian is None:
            raise ValidationError("energy requires the Hamiltonian")
        self._h = None if hamiltonian is None else hamiltonian.to_csr()
        self._order = basis.heatmap_order if overlap_order is None else overlap_order

    def evaluate(self, amps: np.ndarray) -> dict:
        out = {}
        probs = None
        if any(n in self.names for n in ("m", "m_density", "m_signed", "densities", "norm")):
            probs = amps.real ** 2 + amps.imag ** 2
        for name in self.names:
            # clipping only removes rounding excursions past the exact bounds
            if name == "m":
                out[name] = np.minimum(np.abs(probs @ self._spin), 1.0)
            elif name == "m_signed":
                out[name] = np.clip(probs @ self._spin, -1.0, 1.0)
            elif name == "m_density":
                out[name] = np.minimum(np.abs(probs @ self._density), 1.0)
            elif name == "fidelity":
                out[name] = np.minimum(np.abs(amps @ self._reference), 1.0)
            elif name == "entropy":
                out[name] = self._entropy(amps)
            elif name == "densities":
                out[name] = np.clip(probs @ self._occ, 0.0, 1.0)
            elif name == "overlaps":
                out[name] = np.abs(amps)[:, self._order]
            elif name == "energy":
                hpsi = (self._h @ amps.T).T
                out[name] = np.einsum("ij,ij->i", amps.conj(), hpsi).real
            elif name == "norm":
                out[name] = np.sqrt(probs.sum(axis=1))
        return out

    def _entropy(self, amps):
        rows, cols, d_l, d_r = schmidt_layout(
            self.basis.n_sites, self.basis.n_left, self.entropy_cut)
        m = np.zeros((amps.shape[0], d_l, d_r), dtype=complex)
        m[:, rows, cols] = amps
        svals = np.linalg.svd(m, compute_uv=False)
        return _entropy_from_svals(svals)
