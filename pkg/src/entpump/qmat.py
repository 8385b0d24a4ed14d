"""Dense linear algebra on multi-qubit Hilbert spaces.

States and operators are plain ``numpy`` arrays of dtype ``complex128``.
Qubits are numbered from 0 and ordered big-endian: in the ket ``|q0 q1 ... q(n-1)>``
qubit 0 is the leftmost symbol and carries weight ``2**(n-1)`` in the basis index.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-12
PSD_ATOL = 1e-10
MAX_QUBITS = 8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class DensityMatrixError(ValueError):
    """Raised when an array fails the density-matrix invariants."""


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors, left to right."""
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis ket from a bitstring such as ``"0110"``."""
    bits = [int(b) for b in bits]
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"invalid bit {b!r}")
        idx = (idx << 1) | b
    psi = np.zeros(1 << len(bits), dtype=complex)
    psi[idx] = 1.0
    return psi


def ket_from_terms(terms: dict[str, complex]) -> np.ndarray:
    """Normalized superposition, e.g. ``{"00": 1, "11": 1}``."""
    psi = sum(c * basis_state(b) for b, c in terms.items())
    return psi / np.linalg.norm(psi)


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed(n: int) -> np.ndarray:
    d = 1 << n
    return np.eye(d, dtype=complex) / d


BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def bell_state(label: str) -> np.ndarray:
    terms = {
        "phi+": {"00": 1, "11": 1},
        "phi-": {"00": 1, "11": -1},
        "psi+": {"01": 1, "10": 1},
        "psi-": {"01": 1, "10": -1},
    }
    try:
        return ket_from_terms(terms[label])
    except KeyError:
        raise ValueError(f"unknown Bell state {label!r}") from None


def ghz_state(n: int = 4, sign: int = 1) -> np.ndarray:
    return ket_from_terms({"0" * n: 1, "1" * n: sign})


def _check_qubits(qubits: Iterable[int], n: int) -> list[int]:
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit index in {qubits}")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    return qubits


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep``.

    The kept qubits appear in the output in increasing index order.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    keep = sorted(_check_qubits(keep, n))
    if not keep:
        raise ValueError("keep must name at least one qubit")
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    # Contract each traced row axis with its column axis.
    row_axes = list(range(n))
    col_axes = list(range(n, 2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEF"
    in_sub = [letters[i] for i in row_axes] + [letters[i] for i in col_axes]
    for q in traced:
        in_sub[n + q] = in_sub[q]
    out_sub = [in_sub[q] for q in keep] + [in_sub[n + q] for q in keep]
    out = np.einsum("".join(in_sub) + "->" + "".join(out_sub), t)
    d = 1 << len(keep)
    return out.reshape(d, d)


def population(rho: np.ndarray, psi: np.ndarray) -> float:
    """Overlap ``<psi|rho|psi>`` as a real number in [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.shape[0], psi.shape[0]):
        raise ValueError(f"dimension mismatch: rho {rho.shape}, psi {psi.shape}")
    val = float(np.real(np.vdot(psi, rho @ psi)))
    if -PSD_ATOL <= val < 0.0:
        return 0.0
    if 1.0 < val <= 1.0 + PSD_ATOL:
        return 1.0
    return val


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + dagger(rho))


def check_density(rho: np.ndarray, atol: float = ATOL, psd_atol: float = PSD_ATOL) -> np.ndarray:
    """Validate the density-matrix invariants and return ``rho`` as complex128.

    Raises:
        DensityMatrixError: on non-finite entries, a non power-of-two shape,
            Hermiticity drift, trace error, or an eigenvalue below ``-psd_atol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DensityMatrixError(f"not a square matrix: shape {rho.shape}")
    try:
        n = num_qubits(rho.shape[0])
    except ValueError as exc:
        raise DensityMatrixError(str(exc)) from None
    if n > MAX_QUBITS:
        raise DensityMatrixError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    if not np.all(np.isfinite(rho)):
        raise DensityMatrixError("non-finite entries")
    herm = np.max(np.abs(rho - dagger(rho)))
    if herm > atol:
        raise DensityMatrixError(f"not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise DensityMatrixError(f"trace {tr.real:.15g} differs from 1")
    lam = np.linalg.eigvalsh(hermitize(rho)).min()
    if lam < -psd_atol:
        raise DensityMatrixError(f"negative eigenvalue {lam:.3e}")
    return rho


def is_density(rho: np.ndarray, atol: float = ATOL, psd_atol: float = PSD_ATOL) -> bool:
    try:
        check_density(rho, atol, psd_atol)
    except DensityMatrixError:
        return False
    return True


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random full-rank (or given-rank) density matrix from a Ginibre draw."""
    d = 1 << n
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ dagger(g)
    return hermitize(rho / np.trace(rho))


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    d = 1 << n
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def embed(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full ``2**n`` matrix of a ``k``-qubit operator acting on ``targets``.

    ``targets[0]`` is the most significant qubit of ``op``.
    """
    targets = _check_qubits(targets, n)
    k = len(targets)
    op = np.asarray(op, dtype=complex)
    if op.shape != (1 << k, 1 << k):
        raise ValueError(f"operator shape {op.shape} does not match {k} targets")
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(1 << len(rest), dtype=complex))
    # full acts on ordering targets + rest; permute back to 0..n-1.
    order = list(targets) + rest
    t = full.reshape((2,) * (2 * n))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(1 << n, 1 << n)
