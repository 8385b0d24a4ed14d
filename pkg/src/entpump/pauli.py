"""Pauli strings, stabilizer projectors and joint-eigenstate extraction."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .qmat import ATOL, I2, X, Y, Z, kron

_LETTER_MATRIX = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DegeneracyError(ValueError):
    """The requested joint eigenspace is not one-dimensional."""


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, one letter per qubit.

    >>> PauliString("ZZII").support
    (0, 1)
    """

    letters: str

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or set(letters) - set("IXYZ"):
            raise ValueError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_sites(cls, n: int, letter: str, sites: Sequence[int]) -> "PauliString":
        """``letter`` on every qubit in ``sites``, identity elsewhere."""
        chars = ["I"] * n
        for q in sites:
            chars[q] = letter
        return cls("".join(chars))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    def letter(self, qubit: int) -> str:
        return self.letters[qubit]

    def commutes_with(self, other: "PauliString") -> bool:
        if other.n_qubits != self.n_qubits:
            raise ValueError("Pauli strings act on different numbers of qubits")
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def __str__(self) -> str:
        return self.letters


def as_pauli(s: PauliString | str) -> PauliString:
    return s if isinstance(s, PauliString) else PauliString(s)


def pauli_matrix(s: PauliString | str) -> np.ndarray:
    s = as_pauli(s)
    return kron(*(_LETTER_MATRIX[c] for c in s.letters))


def letters_anticommute(a: str, b: str) -> bool:
    return a != "I" and b != "I" and a != b


def stabilizer_projector(s: PauliString | str, sign: int = 1) -> np.ndarray:
    """Projector ``(1 + sign*S)/2`` onto the ``sign`` eigenspace of ``S``."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    m = pauli_matrix(s)
    return 0.5 * (np.eye(m.shape[0], dtype=complex) + sign * m)


def fix_global_phase(psi: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    """Rotate ``psi`` so that its first non-negligible amplitude is real and positive."""
    psi = np.asarray(psi, dtype=complex)
    idx = int(np.argmax(np.abs(psi) > atol))
    phase = psi[idx] / abs(psi[idx])
    out = psi / phase
    out[idx] = abs(out[idx])
    return out


def simultaneous_eigenstate(stabs: Sequence[PauliString | str], signs: Sequence[int]) -> np.ndarray:
    """Unique normalized state with ``S_i |psi> = signs[i] |psi>`` for every stabilizer.

    The joint eigenspace is found by multiplying the individual projectors and
    reading off the rank-one range. Phase convention: the first nonzero
    amplitude is real and positive.

    Raises:
        ValueError: if the stabilizers do not mutually commute or the lengths differ.
        DegeneracyError: if the joint eigenspace is not one-dimensional.
    """
    stabs = [as_pauli(s) for s in stabs]
    if len(stabs) != len(signs):
        raise ValueError("need exactly one sign per stabilizer")
    if not stabs:
        raise ValueError("empty stabilizer list")
    for i, a in enumerate(stabs):
        for b in stabs[i + 1:]:
            if not a.commutes_with(b):
                raise ValueError(f"stabilizers {a} and {b} do not commute")
    proj = reduce(np.matmul, (stabilizer_projector(s, g) for s, g in zip(stabs, signs)))
    rank = int(round(np.trace(proj).real))
    if rank != 1:
        raise DegeneracyError(f"joint eigenspace has dimension {rank}, expected 1")
    # Column of largest norm is proportional to the range vector.
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    psi = proj[:, col]
    psi = psi / np.linalg.norm(psi)
    return fix_global_phase(psi)


def eigen_signs(stabs: Sequence[PauliString | str], psi: np.ndarray, atol: float = ATOL) -> tuple[int, ...] | None:
    """Stabilizer eigenvalues of ``psi``, or None if it is not a joint eigenstate."""
    out = []
    for s in stabs:
        v = pauli_matrix(s) @ psi
        if np.linalg.norm(v - psi) < atol:
            out.append(1)
        elif np.linalg.norm(v + psi) < atol:
            out.append(-1)
        else:
            return None
    return tuple(out)


def bit_to_sign(bit: int) -> int:
    """Ancilla bit 0 selects the +1 eigenspace, bit 1 the -1 eigenspace."""
    if bit not in (0, 1):
        raise ValueError(f"ancilla bit must be 0 or 1, got {bit!r}")
    return 1 - 2 * bit
