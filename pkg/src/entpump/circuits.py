"""Ancilla-mediated pump circuits and their density-matrix execution.

A pump cycle for stabilizer ``S`` uses one fresh ancilla:

1. map the ``S`` parity onto the ancilla (CNOTs from the support, with
   Hadamard conjugation for X-type stabilizers), so the ancilla reads 1
   exactly on the wrong eigenspace;
2. apply ``exp(-i theta F)`` to the flip qubit, controlled on the ancilla,
   which moves population with probability ``sin(theta)**2``;
3. undo the mapping.

Tracing out the ancilla leaves the two-operator pump map with
``p = sin(theta)**2``. The ancilla's initial bit picks the target sign.

System qubits are ``0 .. n_system-1``; ancillas follow them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .channels import PumpConstructionError
from .noise import NoiseModel, build_confusion
from .pauli import PauliString, as_pauli, letters_anticommute
from .qmat import H, X, Z, basis_state, num_qubits, partial_trace, projector
from .tables import BELL, GHZ, Family

SHOT_CHUNK = 4096

_SINGLE = {"h": H, "x": X, "z": Z}
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def rx_pump(theta: float) -> np.ndarray:
    """``exp(-i theta X)``; flips with probability ``sin(theta)**2``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def theta_for(p: float) -> float:
    """Pump angle with flip probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"pump probability p={p} outside [0, 1]")
    return math.asin(math.sqrt(p))


@dataclass(frozen=True)
class Gate:
    """One circuit instruction.

    ``kind`` is one of ``h``, ``x``, ``z``, ``cnot``, ``cz``, ``crx`` or
    ``measure``. For ``crx`` the target receives ``exp(-i theta X)`` when the
    control is 1. ``measure`` dephases its target in the computational basis.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    theta: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        n_ctrl = {"h": 0, "x": 0, "z": 0, "measure": 0, "cnot": 1, "cz": 1, "crx": 1}
        if kind not in n_ctrl:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != 1 or len(self.controls) != n_ctrl[kind]:
            raise ValueError(f"{kind} takes one target and {n_ctrl[kind]} control(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{kind} gate acts twice on one qubit: {self.qubits}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_unitary(self) -> bool:
        return self.kind != "measure"

    def matrix(self) -> np.ndarray:
        """Unitary on ``controls + targets`` (controls most significant)."""
        if self.kind in _SINGLE:
            return _SINGLE[self.kind]
        if self.kind == "cnot":
            return _CNOT
        if self.kind == "cz":
            return _CZ
        if self.kind == "crx":
            u = np.eye(4, dtype=complex)
            u[2:, 2:] = rx_pump(self.theta)
            return u
        raise ValueError("measurement has no unitary matrix")


@dataclass(frozen=True)
class Circuit:
    n_system: int
    n_ancilla: int
    gates: tuple[Gate, ...] = ()
    ancilla_init: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        init = tuple(int(b) for b in self.ancilla_init) if self.ancilla_init else (0,) * self.n_ancilla
        if len(init) != self.n_ancilla or any(b not in (0, 1) for b in init):
            raise ValueError(f"ancilla_init {init} must hold {self.n_ancilla} bits")
        object.__setattr__(self, "ancilla_init", init)
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g.kind} on qubit {q} outside a {self.n_qubits}-qubit circuit")

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_ancilla

    def __add__(self, other: "Circuit") -> "Circuit":
        """Gates of ``self`` then ``other``; both must share the register layout."""
        if (self.n_system, self.n_ancilla, self.ancilla_init) != (other.n_system, other.n_ancilla, other.ancilla_init):
            raise ValueError("circuits have different registers")
        return Circuit(self.n_system, self.n_ancilla, self.gates + other.gates, self.ancilla_init)

    def prepend(self, gates: Sequence[Gate]) -> "Circuit":
        return Circuit(self.n_system, self.n_ancilla, tuple(gates) + self.gates, self.ancilla_init)

    def append(self, gates: Sequence[Gate]) -> "Circuit":
        return Circuit(self.n_system, self.n_ancilla, self.gates + tuple(gates), self.ancilla_init)


def _pump_gates(stab: PauliString, flip_qubit: int, flip_letter: str, theta: float, ancilla: int) -> list[Gate]:
    support = stab.support
    kinds = {stab.letter(q) for q in support}
    if not support or len(kinds) != 1 or kinds - {"X", "Z"}:
        raise PumpConstructionError(f"only pure Z- or X-type stabilizers can be mapped, got {stab}")
    flip_letter = flip_letter.upper()
    if flip_letter not in ("X", "Z"):
        raise PumpConstructionError(f"flip letter must be X or Z, got {flip_letter!r}")
    if not letters_anticommute(flip_letter, stab.letter(flip_qubit)):
        raise PumpConstructionError(f"{flip_letter} on qubit {flip_qubit} commutes with {stab}")

    mapping: list[Gate] = []
    x_type = kinds == {"X"}
    if x_type:
        mapping += [Gate("h", (q,)) for q in support]
    mapping += [Gate("cnot", (ancilla,), (q,)) for q in support]
    if x_type:
        mapping += [Gate("h", (q,)) for q in support]

    pump = [Gate("crx", (flip_qubit,), (ancilla,), theta)]
    if flip_letter == "Z":
        pump = [Gate("h", (flip_qubit,))] + pump + [Gate("h", (flip_qubit,))]
    # All mapping gates are self-inverse, so reversing the list undoes the mapping.
    return mapping + pump + mapping[::-1]


def build_pump_circuit(
    stab: PauliString | str, flip_qubit: int, flip_letter: str, theta: float, ancilla_bit: int = 0
) -> Circuit:
    """Single pump cycle with one ancilla; bit 0 targets the +1 eigenspace, bit 1 the -1."""
    stab = as_pauli(stab)
    n = stab.n_qubits
    if not 0 <= flip_qubit < n:
        raise ValueError(f"flip qubit {flip_qubit} out of range")
    gates = _pump_gates(stab, flip_qubit, flip_letter, theta, n)
    return Circuit(n, 1, tuple(gates), (ancilla_bit,))


def build_cooling_circuit(fam: Family, maps: Sequence[str], bits: Sequence[int], theta: float) -> Circuit:
    """Pump cycles for ``maps`` in order, each with its own fresh ancilla."""
    if len(maps) != len(bits):
        raise ValueError(f"{len(maps)} maps but {len(bits)} ancilla bits")
    n = fam.n_qubits
    gates: list[Gate] = []
    for i, name in enumerate(maps):
        spec = fam.map(name)
        gates += _pump_gates(spec.stabilizer, spec.flip_qubit, spec.flip_letter, theta, n + i)
    return Circuit(n, len(maps), tuple(gates), tuple(bits))


def build_bell_cooling_circuit(a_zz: int, a_xx: int, theta: float) -> Circuit:
    """ZZ pump then XX pump on two system qubits with ancillas ``a_zz`` and ``a_xx``."""
    return build_cooling_circuit(BELL, ("zz", "xx"), (a_zz, a_xx), theta)


def build_ghz_cooling_circuit(bits: Sequence[int], theta: float) -> Circuit:
    """Z1Z2, Z2Z3, Z3Z4 then X1X2X3X4 pumps, each with a fresh ancilla from ``bits``."""
    return build_cooling_circuit(GHZ, GHZ.map_names, tuple(bits), theta)


def preparation_gates(bits: str | Sequence[int]) -> list[Gate]:
    """X gates taking ``|0...0>`` to the computational basis state ``bits``."""
    return [Gate("x", (q,)) for q, b in enumerate(bits) if int(b)]


def _dephase(rho: np.ndarray, qubit: int, n: int) -> np.ndarray:
    bit = (np.arange(1 << n) >> (n - 1 - qubit)) & 1
    return rho * (bit[:, None] == bit[None, :])


def _run_full(c: Circuit, rho: np.ndarray, noise: NoiseModel | None) -> np.ndarray:
    n = c.n_qubits
    gate_noise = noise is not None and noise.has_gate_noise
    for g in c.gates:
        if g.is_unitary:
            rho = kernels.apply_gate(rho, g.matrix(), np.array(g.qubits, dtype=np.int64), n)
        else:
            rho = _dephase(rho, g.targets[0], n)
        if gate_noise:
            lam = noise.gate_lambda(len(g.qubits))
            if lam > 0:
                rho = kernels.depolarize(rho, np.array(g.qubits, dtype=np.int64), lam, n)
    return rho


def evolve_operator(c: Circuit, op_system: np.ndarray, noise: NoiseModel | None = None) -> np.ndarray:
    """Linear action of the circuit on any system operator (no density-matrix checks)."""
    op_system = np.asarray(op_system, dtype=complex)
    if op_system.shape != (1 << c.n_system, 1 << c.n_system):
        raise ValueError(f"input shape {op_system.shape} does not match {c.n_system} system qubits")
    if c.n_ancilla:
        anc = projector(basis_state(c.ancilla_init))
        full = np.kron(op_system, anc)
    else:
        full = op_system
    out = _run_full(c, full, noise)
    if c.n_ancilla:
        out = partial_trace(out, range(c.n_system))
    return out


def run_density(c: Circuit, rho0_system: np.ndarray, noise: NoiseModel | None = None) -> np.ndarray:
    """Run ``c`` on ``rho0_system`` with ancillas in ``c.ancilla_init`` and trace them out.

    With ``noise``, each gate is followed by depolarization of its own qubits.
    """
    rho0_system = np.asarray(rho0_system, dtype=complex)
    if rho0_system.ndim != 2 or rho0_system.shape != (1 << c.n_system, 1 << c.n_system):
        raise ValueError(f"density matrix shape {rho0_system.shape} does not match {c.n_system} system qubits")
    out = evolve_operator(c, rho0_system, noise)
    return 0.5 * (out + out.conj().T)


def circuit_superoperator(c: Circuit, noise: NoiseModel | None = None) -> np.ndarray:
    """Matrix ``S`` with ``vec(C(|i><j|)) = S[:, i*d + j]`` (row-major vec)."""
    d = 1 << c.n_system
    s = np.empty((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            s[:, i * d + j] = evolve_operator(c, unit, noise).reshape(-1)
    return s


def outcome_probabilities(rho: np.ndarray, noise: NoiseModel | None = None) -> np.ndarray:
    """Computational-basis distribution of ``rho``, passed through readout error if any."""
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    probs = probs / probs.sum()
    if noise is not None and noise.has_readout_noise:
        probs = build_confusion(noise, num_qubits(rho.shape[0])) @ probs
    return probs


def draw_counts(probs: np.ndarray, shots: int, seed: int, workers: int = 1) -> np.ndarray:
    """Multinomial counts over ``probs``.

    Shots are cut into fixed chunks of ``SHOT_CHUNK``; chunk ``k`` draws from the
    substream ``SeedSequence(seed, spawn_key=(k,))``. The result therefore does
    not depend on how chunks are spread over ``workers``.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    sizes = [SHOT_CHUNK] * (shots // SHOT_CHUNK)
    if shots % SHOT_CHUNK:
        sizes.append(shots % SHOT_CHUNK)

    def chunk(k: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        return rng.multinomial(sizes[k], probs)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, range(len(sizes))))
    else:
        parts = [chunk(k) for k in range(len(sizes))]
    return np.sum(parts, axis=0)


def counts_dict(counts: np.ndarray, n_qubits: int) -> dict[str, int]:
    return {format(i, f"0{n_qubits}b"): int(c) for i, c in enumerate(counts) if c}


def sample(
    c: Circuit,
    rho0: np.ndarray,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    workers: int = 1,
) -> dict[str, int]:
    """Shot histogram of the system register after running ``c``; deterministic in ``seed``."""
    rho = run_density(c, rho0, noise)
    probs = outcome_probabilities(rho, noise)
    return counts_dict(draw_counts(probs, shots, seed, workers), c.n_system)
