import itertools
import math

import numpy as np
import pytest

from entpump.channels import make_pump_map, superoperator
from entpump.circuits import (
    Circuit,
    Gate,
    build_bell_cooling_circuit,
    build_cooling_circuit,
    build_ghz_cooling_circuit,
    build_pump_circuit,
    circuit_superoperator,
    draw_counts,
    run_density,
    sample,
    theta_for,
)
from entpump.noise import NoiseModel
from entpump.pauli import bit_to_sign
from entpump.qmat import (
    basis_state,
    bell_state,
    check_density,
    ghz_state,
    maximally_mixed,
    population,
    projector,
    purity,
    random_density,
    random_state,
)
from entpump.tables import BELL, GHZ

ALL_MAPS = [(fam, m) for fam in (BELL, GHZ) for m in fam.maps]


@pytest.mark.parametrize("fam, spec", ALL_MAPS, ids=[f"{f.system}-{m.name}" for f, m in ALL_MAPS])
@pytest.mark.parametrize("bit", [0, 1])
@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_circuit_matches_kraus_map(fam, spec, bit, p):
    c = build_pump_circuit(spec.stabilizer, spec.flip_qubit, spec.flip_letter, theta_for(p), bit)
    kmap = make_pump_map(spec.stabilizer, spec.flip_qubit, spec.flip_letter, p, bit_to_sign(bit))
    s = circuit_superoperator(c)
    assert s.shape == ((1 << fam.n_qubits) ** 2,) * 2
    assert np.max(np.abs(s - superoperator(kmap))) < 1e-10


def test_theta_zero_is_identity():
    s = circuit_superoperator(build_bell_cooling_circuit(0, 1, 0.0))
    assert np.max(np.abs(s - np.eye(16))) < 1e-12


@pytest.mark.parametrize("bits, label", [((0, 0), "phi+"), ((0, 1), "phi-"), ((1, 0), "psi+"), ((1, 1), "psi-")])
def test_bell_cooling_one_cycle(bits, label):
    out = run_density(build_bell_cooling_circuit(*bits, math.pi / 2), maximally_mixed(2))
    assert population(out, bell_state(label)) == pytest.approx(1.0, abs=1e-10)


def test_bell_cooling_half_probability():
    out = run_density(build_bell_cooling_circuit(0, 0, theta_for(0.5)), maximally_mixed(2))
    assert population(out, bell_state("phi+")) == pytest.approx(0.5625, abs=1e-12)


def test_ghz_from_mixed_and_identity():
    out = run_density(build_ghz_cooling_circuit((0, 0, 0, 0), math.pi / 2), maximally_mixed(4))
    assert population(out, ghz_state()) == pytest.approx(1.0, abs=1e-10)
    out = run_density(build_ghz_cooling_circuit((0, 0, 0, 0), 0.0), maximally_mixed(4))
    assert population(out, ghz_state()) == pytest.approx(0.0625, abs=1e-12)


@pytest.mark.parametrize("bits", ["".join(b) for b in itertools.product("01", repeat=4)])
def test_ghz_from_every_basis_state(bits):
    out = run_density(build_ghz_cooling_circuit((0, 0, 0, 0), math.pi / 2), projector(basis_state(bits)))
    assert population(out, ghz_state()) == pytest.approx(1.0, abs=1e-10)


def test_empty_circuit(rng):
    rho = random_density(2, rng)
    assert np.allclose(run_density(Circuit(2, 0, ()), rho), rho, atol=1e-15)


def test_bell_circuit_on_01():
    out = run_density(build_bell_cooling_circuit(0, 0, math.pi / 2), projector(basis_state("01")))
    assert np.allclose(out, projector(bell_state("phi+")), atol=1e-12)


def test_full_depolarizing_on_touched_qubit():
    c = Circuit(2, 0, (Gate("x", (0,)),))
    out = run_density(c, projector(basis_state("00")), NoiseModel(depolarizing_1q=1.0))
    assert np.allclose(out, np.kron(np.eye(2) / 2, np.diag([1, 0])), atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        run_density(build_bell_cooling_circuit(0, 0, 1.0), maximally_mixed(3))


def test_unsupported_stabilizer():
    from entpump.channels import PumpConstructionError

    with pytest.raises(PumpConstructionError):
        build_pump_circuit("XZ", 0, "Z", 1.0)
    with pytest.raises(PumpConstructionError):
        build_pump_circuit("ZZ", 0, "Z", 1.0)


def test_sample_all_counts_on_00():
    assert sample(Circuit(2, 0, ()), projector(basis_state("00")), 1000, seed=1) == {"00": 1000}


def test_sample_is_deterministic():
    c = build_bell_cooling_circuit(0, 1, 0.7)
    a = sample(c, maximally_mixed(2), 5000, seed=42)
    assert a == sample(c, maximally_mixed(2), 5000, seed=42)
    assert a != sample(c, maximally_mixed(2), 5000, seed=43)


def test_sample_bell_statistics():
    counts = sample(Circuit(2, 0, ()), projector(bell_state("phi+")), 10**6, seed=7)
    assert set(counts) == {"00", "11"}
    assert counts["00"] / 1e6 == pytest.approx(0.5, abs=0.002)
    assert counts["11"] / 1e6 == pytest.approx(0.5, abs=0.002)


def test_counts_independent_of_workers():
    probs = np.full(16, 1 / 16)
    a = draw_counts(probs, 50_000, seed=3, workers=1)
    b = draw_counts(probs, 50_000, seed=3, workers=4)
    assert np.array_equal(a, b) and a.sum() == 50_000


def test_sample_rejects_zero_shots():
    with pytest.raises(ValueError):
        sample(Circuit(2, 0, ()), maximally_mixed(2), 0)


def test_purity_preserved_at_theta_zero(rng):
    psi = random_state(4, rng)
    out = run_density(build_ghz_cooling_circuit((1, 0, 1, 0), 0.0), projector(psi))
    assert purity(out) == pytest.approx(1.0, abs=1e-12)


def test_fresh_ancillas_per_cycle():
    # Two consecutive ZZ cycles must act like two applications of the map,
    # which only holds if the second cycle has its own clean ancilla.
    c = build_cooling_circuit(BELL, ("zz", "zz"), (0, 0), theta_for(0.5))
    assert c.n_ancilla == 2
    out = run_density(c, maximally_mixed(2))
    zz_plus = population(out, bell_state("phi+")) + population(out, bell_state("phi-"))
    assert zz_plus == pytest.approx(1 - 0.25 / 2, abs=1e-12)


@pytest.mark.parametrize("noise", [None, NoiseModel(0.001, 0.01, (0.03, 0.03)), NoiseModel(0.2, 0.4)])
def test_outputs_are_valid_densities(noise, rng):
    c = build_ghz_cooling_circuit((0, 1, 1, 0), theta_for(0.6))
    out = run_density(c, random_density(4, rng), noise)
    check_density(out)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.max(np.abs(out - out.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("swap", (0,))
    with pytest.raises(ValueError):
        Gate("cnot", (0,), (0,))
