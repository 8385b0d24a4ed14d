"""Kraus maps and the stabilizer pump maps built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliString, as_pauli, letters_anticommute, pauli_matrix, stabilizer_projector
from .qmat import ATOL, dagger, embed, num_qubits, X, Y, Z

_FLIP = {"X": X, "Y": Y, "Z": Z}


class PumpConstructionError(ValueError):
    """The flip operator commutes with the stabilizer, so the map would not pump."""


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Channel ``rho -> sum_k E_k rho E_k^dagger`` on ``n_qubits`` qubits."""

    operators: tuple[np.ndarray, ...]
    n_qubits: int = field(init=False)

    def __post_init__(self):
        ops = tuple(np.asarray(e, dtype=complex) for e in self.operators)
        if not ops:
            raise ValueError("a Kraus map needs at least one operator")
        d = ops[0].shape[0]
        for e in ops:
            if e.shape != (d, d):
                raise ValueError(f"Kraus operator shape {e.shape} differs from {(d, d)}")
        for e in ops:
            e.setflags(write=False)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "n_qubits", num_qubits(d))

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)


def identity_map(n_qubits: int) -> KrausMap:
    return KrausMap((np.eye(1 << n_qubits, dtype=complex),))


def apply(kmap: KrausMap, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (kmap.dim, kmap.dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match map dimension {kmap.dim}")
    out = np.zeros_like(rho)
    for e in kmap.operators:
        out += e @ rho @ dagger(e)
    return out


def completeness_residual(kmap: KrausMap) -> float:
    acc = sum(dagger(e) @ e for e in kmap.operators)
    return float(np.max(np.abs(acc - np.eye(kmap.dim))))


def is_cptp(kmap: KrausMap, tol: float = ATOL) -> bool:
    """True iff ``sum_k E_k^dagger E_k`` equals the identity entrywise within ``tol``."""
    return completeness_residual(kmap) <= tol


def compose(outer: KrausMap, inner: KrausMap) -> KrausMap:
    """Map applying ``inner`` first, then ``outer``."""
    if outer.dim != inner.dim:
        raise ValueError(f"cannot compose maps of dimension {outer.dim} and {inner.dim}")
    return KrausMap(tuple(o @ i for o in outer.operators for i in inner.operators))


def compose_all(maps: Sequence[KrausMap]) -> KrausMap:
    """Sequential composition; ``maps[0]`` acts first."""
    out = maps[0]
    for m in maps[1:]:
        out = compose(m, out)
    return out


def flip_operator(n: int, flip_qubit: int, flip_letter: str) -> np.ndarray:
    try:
        single = _FLIP[flip_letter.upper()]
    except KeyError:
        raise ValueError(f"flip letter must be X, Y or Z, got {flip_letter!r}") from None
    return embed(single, [flip_qubit], n)


def make_pump_map(
    stab: PauliString | str,
    flip_qubit: int,
    flip_letter: str,
    p: float,
    target_sign: int = 1,
) -> KrausMap:
    """Two-operator pump into the ``target_sign`` eigenspace of ``stab``.

    ``E1 = sqrt(p) F P_wrong`` moves wrong-eigenspace population across with
    probability ``p``; ``E2 = P_right + sqrt(1-p) P_wrong`` leaves the target
    eigenspace untouched. ``F`` is ``flip_letter`` on ``flip_qubit``.

    Raises:
        ValueError: if ``p`` is outside [0, 1] or ``target_sign`` is not +-1.
        PumpConstructionError: if ``F`` commutes with ``stab``.
    """
    stab = as_pauli(stab)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"pump probability p={p} outside [0, 1]")
    if target_sign not in (1, -1):
        raise ValueError(f"target_sign must be +1 or -1, got {target_sign!r}")
    if not 0 <= flip_qubit < stab.n_qubits:
        raise ValueError(f"flip qubit {flip_qubit} out of range for {stab}")
    if not letters_anticommute(flip_letter.upper(), stab.letter(flip_qubit)):
        raise PumpConstructionError(
            f"{flip_letter} on qubit {flip_qubit} commutes with {stab}; it cannot leave the wrong eigenspace"
        )
    n = stab.n_qubits
    p_right = stabilizer_projector(stab, target_sign)
    p_wrong = stabilizer_projector(stab, -target_sign)
    f = flip_operator(n, flip_qubit, flip_letter)
    e1 = np.sqrt(p) * f @ p_wrong
    e2 = p_right + np.sqrt(1.0 - p) * p_wrong
    return KrausMap((e1, e2))


def eigenspace_population(rho: np.ndarray, stab: PauliString | str, sign: int = 1) -> float:
    return float(np.real(np.trace(stabilizer_projector(stab, sign) @ rho)))


def stabilizer_expectation(rho: np.ndarray, stab: PauliString | str) -> float:
    return float(np.real(np.trace(pauli_matrix(stab) @ rho)))


def superoperator(kmap: KrausMap) -> np.ndarray:
    """Matrix acting on row-major ``vec(rho)``: ``sum_k E_k (x) conj(E_k)``."""
    return sum(np.kron(e, e.conj()) for e in kmap.operators)
