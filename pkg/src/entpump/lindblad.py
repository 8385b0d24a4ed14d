"""Markovian limit of the pump maps: Lindblad evolution with stabilizer jump operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from ._kernels_py import lindblad_rhs
from .channels import apply, compose_all, flip_operator, make_pump_map
from .pauli import PauliString, as_pauli, bit_to_sign, stabilizer_projector
from .qmat import BELL_LABELS, bell_state, dagger, maximally_mixed, population
from .tables import BELL, Family

STABILITY_LIMIT = 0.1
TRACE_DRIFT_TOL = 1e-9


class StabilityError(ValueError):
    """Time step too large for the jump rates (``dt * gamma * ||c^dagger c|| > 0.1``)."""


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Generator ``-i[H, rho] + sum_k gamma_k (c rho c^dagger - {c^dagger c, rho}/2)``.

    ``hamiltonian`` defaults to zero (purely dissipative dynamics); ``rates``
    default to 1 for every jump operator.
    """

    jumps: tuple[np.ndarray, ...]
    rates: tuple[float, ...] | None = None
    hamiltonian: np.ndarray | None = None
    dim: int = field(init=False)

    def __post_init__(self):
        jumps = tuple(np.asarray(c, dtype=complex) for c in self.jumps)
        if not jumps:
            raise ValueError("at least one jump operator is required")
        d = jumps[0].shape[0]
        if any(c.shape != (d, d) for c in jumps):
            raise ValueError("jump operators must share one square shape")
        rates = tuple(1.0 for _ in jumps) if self.rates is None else tuple(float(g) for g in self.rates)
        if len(rates) != len(jumps):
            raise ValueError(f"{len(rates)} rates for {len(jumps)} jump operators")
        if any(g < 0 or not np.isfinite(g) for g in rates):
            raise ValueError(f"rates must be finite and non-negative, got {rates}")
        h = np.zeros((d, d), dtype=complex) if self.hamiltonian is None else np.asarray(self.hamiltonian, dtype=complex)
        if h.shape != (d, d):
            raise ValueError(f"Hamiltonian shape {h.shape} does not match jumps {(d, d)}")
        if np.max(np.abs(h - dagger(h))) > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "dim", d)

    def with_rates(self, rates: Sequence[float]) -> "LindbladModel":
        return LindbladModel(self.jumps, tuple(rates), self.hamiltonian)

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        return lindblad_rhs(np.asarray(rho, dtype=complex), self.hamiltonian, self.jumps, self.rates)


def pump_jump(stab: PauliString | str, flip_qubit: int, flip_letter: str, sign: int = 1) -> np.ndarray:
    """Jump operator ``F (1 - sign*S) / 2``: flip out of the wrong eigenspace."""
    stab = as_pauli(stab)
    return flip_operator(stab.n_qubits, flip_qubit, flip_letter) @ stabilizer_projector(stab, -sign)


def jump_operators_bell(sign_zz: int = 1, sign_xx: int = 1) -> list[np.ndarray]:
    zz, xx = BELL.maps
    return [
        pump_jump(zz.stabilizer, zz.flip_qubit, zz.flip_letter, sign_zz),
        pump_jump(xx.stabilizer, xx.flip_qubit, xx.flip_letter, sign_xx),
    ]


def jump_operators(fam: Family, bits: Sequence[int]) -> list[np.ndarray]:
    """One jump operator per map of ``fam``, with target signs chosen by ancilla ``bits``."""
    if len(bits) != len(fam.maps):
        raise ValueError(f"{fam.system} needs {len(fam.maps)} ancilla bits, got {len(bits)}")
    return [pump_jump(m.stabilizer, m.flip_qubit, m.flip_letter, bit_to_sign(b)) for m, b in zip(fam.maps, bits)]


def _nsteps(t_final: float, dt: float) -> tuple[int, float]:
    if dt <= 0 or not np.isfinite(dt):
        raise ValueError(f"dt must be positive, got {dt}")
    if t_final < 0 or not np.isfinite(t_final):
        raise ValueError(f"t_final must be non-negative, got {t_final}")
    if t_final == 0:
        return 0, dt
    if dt > t_final:
        raise ValueError(f"dt={dt} exceeds t_final={t_final}")
    n = int(np.ceil(t_final / dt - 1e-9))
    return n, t_final / n


def check_stability(model: LindbladModel, dt: float) -> float:
    """Largest ``dt * gamma_k * ||c_k^dagger c_k||``; raises StabilityError above the limit."""
    worst = 0.0
    for c, g in zip(model.jumps, model.rates):
        worst = max(worst, dt * g * np.linalg.norm(dagger(c) @ c, 2))
    if worst > STABILITY_LIMIT + 1e-15:
        raise StabilityError(f"dt * gamma * ||c^dagger c|| = {worst:.4g} exceeds {STABILITY_LIMIT}")
    return worst


def trajectory(model: LindbladModel, rho0: np.ndarray, t_final: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Times and states of a fixed-step RK4 integration from ``rho0``.

    The step is shrunk (never grown) so that an integer number of steps lands
    exactly on ``t_final``.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise ValueError(f"rho0 shape {rho0.shape} does not match model dimension {model.dim}")
    nsteps, h = _nsteps(t_final, dt)
    check_stability(model, h)
    states = kernels.lindblad_rk4(rho0, model.hamiltonian, np.array(model.jumps), np.array(model.rates), h, nsteps)
    drift = np.max(np.abs(np.trace(states, axis1=1, axis2=2) - np.trace(rho0)))
    if drift > TRACE_DRIFT_TOL:
        raise FloatingPointError(f"trace drifted by {drift:.3e} during integration")
    return np.linspace(0.0, nsteps * h, nsteps + 1), states


def evolve(model: LindbladModel, rho0: np.ndarray, t_final: float, dt: float) -> np.ndarray:
    """State at ``t_final`` under the master equation, re-Hermitized."""
    _, states = trajectory(model, rho0, t_final, dt)
    out = states[-1]
    return 0.5 * (out + dagger(out))


def is_dark_state(psi: np.ndarray, model: LindbladModel, tol: float = 1e-12) -> bool:
    """True iff every jump annihilates ``psi`` and ``psi`` is an eigenvector of H."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (model.dim,):
        raise ValueError(f"state dimension {psi.shape} does not match model dimension {model.dim}")
    for c in model.jumps:
        if np.linalg.norm(c @ psi) > tol:
            return False
    hpsi = model.hamiltonian @ psi
    energy = np.vdot(psi, hpsi)
    return bool(np.linalg.norm(hpsi - energy * psi) <= tol)


@dataclass
class ConsistencyReport:
    """Populations per cycle from the repeated Kraus map and the master equation."""

    p: float
    steps: int
    labels: tuple[str, ...]
    kraus: np.ndarray
    lindblad: np.ndarray

    @property
    def divergence(self) -> np.ndarray:
        return np.max(np.abs(self.kraus - self.lindblad), axis=1)

    @property
    def max_divergence(self) -> float:
        return float(self.divergence.max())


def kraus_lindblad_consistency(
    p_small: float,
    steps: int,
    sign_zz: int = 1,
    sign_xx: int = 1,
    rho0: np.ndarray | None = None,
) -> ConsistencyReport:
    """Compare ``steps`` cycles of the Bell composite pump at probability ``p_small``
    with master-equation evolution at unit rates over time ``p_small`` per cycle.

    Matching ``gamma * dt = p`` per cycle is a first-order correspondence, so
    the returned divergence is expected to scale linearly in ``p_small``.
    """
    if not 0.0 <= p_small <= 0.05:
        raise ValueError(f"p_small must lie in [0, 0.05], got {p_small}")
    if steps < 1:
        raise ValueError("steps must be positive")
    rho0 = maximally_mixed(2) if rho0 is None else np.asarray(rho0, dtype=complex)
    states = [bell_state(lab) for lab in BELL_LABELS]

    def pops(rho):
        return [population(rho, s) for s in states]

    zz, xx = BELL.maps
    cycle = compose_all(
        [
            make_pump_map(zz.stabilizer, zz.flip_qubit, zz.flip_letter, p_small, sign_zz),
            make_pump_map(xx.stabilizer, xx.flip_qubit, xx.flip_letter, p_small, sign_xx),
        ]
    )
    kraus = np.empty((steps + 1, 4))
    rho = rho0.copy()
    kraus[0] = pops(rho)
    for m in range(1, steps + 1):
        rho = apply(cycle, rho)
        kraus[m] = pops(rho)

    lind = np.empty((steps + 1, 4))
    if p_small == 0.0:
        lind[:] = kraus[0]
    else:
        model = LindbladModel(tuple(jump_operators_bell(sign_zz, sign_xx)))
        _, traj = trajectory(model, rho0, steps * p_small, p_small)
        for m in range(steps + 1):
            lind[m] = pops(traj[m])
    return ConsistencyReport(p_small, steps, BELL_LABELS, kraus, lind)


def bell_model(sign_zz: int = 1, sign_xx: int = 1, gamma: float = 1.0) -> LindbladModel:
    return LindbladModel(tuple(jump_operators_bell(sign_zz, sign_xx)), (gamma, gamma))


def family_model(fam: Family, bits: Sequence[int], gamma: float = 1.0) -> LindbladModel:
    jumps = jump_operators(fam, bits)
    return LindbladModel(tuple(jumps), tuple(gamma for _ in jumps))

