import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtqc.basis import enumerate_basis, named_pattern, named_state
from dtqc.errors import ConsistencyError, NamingError, ValidationError
from dtqc.model import golden_chain
from dtqc.observables import (
    Observables,
    basis_overlaps,
    entanglement_entropy,
    fidelity,
    max_entropy,
    site_densities,
    staggered_magnetization,
)
from dtqc.propagator import StateVector, run


def superposition(basis, names, weights=None):
    amps = np.zeros(basis.dim, dtype=complex)
    for name, w in zip(names, weights or [1] * len(names)):
        amps[basis.index_of(named_pattern(name, basis.n_sites))] = w
    return StateVector.from_unnormalized(amps, basis)


def random_state(basis, seed):
    rng = np.random.default_rng(seed)
    return StateVector.from_unnormalized(rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim), basis)


def test_magnetization_examples():
    b = enumerate_basis(10, 5)
    z2 = named_state(b, "Z2")
    assert staggered_magnetization(z2) == 1.0
    assert staggered_magnetization(z2, "density") == 0.5
    assert staggered_magnetization(named_state(b, "ground")) == 0.0
    assert staggered_magnetization(superposition(b, ["Z2", "Z2prime"])) == pytest.approx(0, abs=1e-15)
    assert staggered_magnetization(named_state(b, "Z2prime"), signed=True) == -1.0
    with pytest.raises(NamingError):
        staggered_magnetization(z2, "ising")


def test_fidelity_examples():
    b = enumerate_basis(8, 4)
    z2 = named_state(b, "Z2")
    assert fidelity(z2, z2) == 1.0
    assert fidelity(z2, named_state(b, "Z2prime")) == 0.0
    with pytest.raises(ConsistencyError):
        fidelity(z2, named_state(enumerate_basis(8, 3), "Z2"))


def test_entropy_examples():
    b = enumerate_basis(10, 5)
    assert entanglement_entropy(named_state(b, "Z2")) == 0.0
    cat = superposition(b, ["Z2", "Z2prime"])
    assert entanglement_entropy(cat, 5) == pytest.approx(math.log(2), abs=1e-14)
    with pytest.raises(ValidationError):
        entanglement_entropy(cat, 0)
    with pytest.raises(ValidationError):
        entanglement_entropy(cat, 10)


def test_densities_and_overlaps():
    b4 = enumerate_basis(4, 2)
    assert site_densities(named_state(b4, "Z2")).tolist() == [1, 0, 1, 0]
    assert site_densities(named_state(b4, "ground")).tolist() == [0, 0, 0, 0]
    b2 = enumerate_basis(2, 1)
    amps = np.zeros(3, dtype=complex)
    amps[[1, 2]] = 1
    assert site_densities(StateVector.from_unnormalized(amps, b2)) == pytest.approx([0.5, 0.5])
    z2 = named_state(enumerate_basis(9, 5), "Z2")
    ov = basis_overlaps(z2)
    assert ov[0] == 1 and ov[1:].sum() == 0


@given(st.integers(4, 12), st.integers(0, 2**31), st.data())
@settings(max_examples=40, deadline=None)
def test_observable_ranges_and_invariances(n, seed, data):
    nl = data.draw(st.integers(1, n - 1))
    b = enumerate_basis(n, nl)
    psi = random_state(b, seed)
    cut = data.draw(st.integers(1, n - 1))
    m_spin = staggered_magnetization(psi)
    assert 0 <= m_spin <= 1
    if n % 2 == 0:
        assert m_spin == pytest.approx(2 * staggered_magnetization(psi, "density"), abs=1e-14)
    s = entanglement_entropy(psi, cut)
    assert 0 <= s <= max_entropy(b, cut) + 1e-12
    phase = np.exp(1j * data.draw(st.floats(0, 2 * math.pi)))
    rotated = StateVector(psi.amplitudes * phase, b)
    assert entanglement_entropy(rotated, cut) == pytest.approx(s, abs=1e-12)
    for side in ("left", "right"):
        assert entanglement_entropy(psi, cut, side=side) == pytest.approx(s, abs=1e-10)
    other = random_state(b, seed + 1)
    assert fidelity(psi, other) == pytest.approx(fidelity(other, psi), abs=1e-15)
    assert fidelity(rotated, other) == pytest.approx(fidelity(psi, other), abs=1e-14)
    dens = site_densities(psi)
    assert np.all((dens >= 0) & (dens <= 1))
    assert np.sum(basis_overlaps(psi) ** 2) == pytest.approx(1, abs=1e-12)


def test_entropy_independent_of_basis_order():
    # the Schmidt matrix is assembled from bit patterns, so any permutation of
    # the stored order that keeps amplitudes attached to patterns is invisible
    b = enumerate_basis(8, 4)
    psi = random_state(b, 3)
    rows = {int(s): a for s, a in zip(b.states, psi.amplitudes)}
    rebuilt = StateVector(np.array([rows[int(s)] for s in b.states]), b)
    assert entanglement_entropy(rebuilt) == entanglement_entropy(psi)


def test_block_evaluator_matches_single_state_functions():
    b = enumerate_basis(10, 5)
    states = np.array([random_state(b, k).amplitudes for k in range(5)])
    ref = named_state(b, "Z2")
    ev = Observables(b, ("m", "m_density", "m_signed", "fidelity", "entropy", "densities",
                         "overlaps", "norm"), reference=ref)
    out = ev.evaluate(states)
    for k, amps in enumerate(states):
        psi = StateVector(amps, b)
        assert out["m"][k] == pytest.approx(staggered_magnetization(psi), abs=1e-14)
        assert out["m_density"][k] == pytest.approx(staggered_magnetization(psi, "density"), abs=1e-14)
        assert out["fidelity"][k] == pytest.approx(fidelity(psi, ref), abs=1e-14)
        assert out["entropy"][k] == pytest.approx(entanglement_entropy(psi), abs=1e-12)
        assert out["densities"][k] == pytest.approx(site_densities(psi), abs=1e-14)
        assert out["overlaps"][k] == pytest.approx(basis_overlaps(psi), abs=1e-15)


def test_evaluator_errors():
    b = enumerate_basis(6, 3)
    with pytest.raises(NamingError):
        Observables(b, ("magnetisation",))
    with pytest.raises(ValidationError):
        Observables(b, ("fidelity",))
    with pytest.raises(ValidationError):
        Observables(b, ("energy",))


def test_entropy_matches_reduced_density_on_trajectory():
    traj = run(golden_chain(10), 100.0, 0.5, ("entropy",), keep_states=True)
    for k in range(0, len(traj), 37):
        psi = traj.state_at(k)
        left = entanglement_entropy(psi, side="left")
        right = entanglement_entropy(psi, side="right")
        assert abs(left - right) < 1e-10
        assert abs(traj["entropy"][k] - right) < 1e-10


def test_heatmap_migrates_between_neel_states():
    traj = run(golden_chain(9, n_left=5), 30.0, 0.05, ("overlaps",))
    b = traj.basis
    top = [b.pattern(int(b.heatmap_order[j])) for j in traj["overlaps"].argmax(axis=1)]
    assert top[0] == "101010101"
    first_prime = top.index("010101010")
    assert "101010101" in top[first_prime:]
