"""Gate and readout noise, plus readout-error mitigation by confusion-matrix inversion."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .qmat import num_qubits

MAX_CONDITION = 1e6


class ConditioningError(ValueError):
    """Confusion matrix too close to singular to invert reliably."""


def _prob(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}={value} outside [0, 1]")
    return value


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing noise after every gate and bit-flip readout error.

    ``readout_flip`` is ``(eps01, eps10)``: the probability of reading 1 when
    the qubit is 0, and of reading 0 when it is 1. Give one pair for all
    qubits or a sequence of pairs, one per measured qubit.
    """

    depolarizing_1q: float = 0.0
    depolarizing_2q: float = 0.0
    readout_flip: tuple = (0.0, 0.0)

    def __post_init__(self):
        _prob("depolarizing_1q", self.depolarizing_1q)
        _prob("depolarizing_2q", self.depolarizing_2q)
        ro = tuple(self.readout_flip)
        uniform = len(ro) == 2 and all(np.isscalar(x) for x in ro)
        pairs = [ro] if uniform else list(ro)
        for pair in pairs:
            if np.isscalar(pair) or len(pair) != 2:
                raise ValueError(f"readout_flip entries must be (eps01, eps10) pairs, got {pair!r}")
        pairs = [(_prob("readout_flip", a), _prob("readout_flip", b)) for a, b in pairs]
        object.__setattr__(self, "readout_flip", pairs[0] if uniform else tuple(pairs))

    def readout_pair(self, qubit: int) -> tuple[float, float]:
        ro = self.readout_flip
        if np.isscalar(ro[0]):
            return ro
        return ro[qubit]

    @property
    def has_gate_noise(self) -> bool:
        return self.depolarizing_1q > 0 or self.depolarizing_2q > 0

    @property
    def has_readout_noise(self) -> bool:
        ro = self.readout_flip
        pairs = [ro] if np.isscalar(ro[0]) else ro
        return any(x > 0 for pair in pairs for x in pair)

    @property
    def is_ideal(self) -> bool:
        return not (self.has_gate_noise or self.has_readout_noise)

    def gate_lambda(self, n_gate_qubits: int) -> float:
        if n_gate_qubits == 1:
            return self.depolarizing_1q
        return self.depolarizing_2q

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


PRESETS: dict[str, NoiseModel] = {
    "ideal": NoiseModel(),
    "hardware-like": NoiseModel(depolarizing_1q=0.001, depolarizing_2q=0.01, readout_flip=(0.03, 0.03)),
}


def noise_preset(name: str, overrides: Mapping[str, object] | None = None) -> NoiseModel:
    """Named preset with optional per-parameter overrides."""
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown noise preset {name!r} (expected one of {sorted(PRESETS)})") from None
    if not overrides:
        return base
    known = {f.name for f in fields(NoiseModel)}
    bad = set(overrides) - known
    if bad:
        raise ValueError(f"unknown noise parameter(s) {sorted(bad)}")
    return replace(base, **overrides)


def depolarize(rho: np.ndarray, qubits: Sequence[int], lam: float) -> np.ndarray:
    """Mix the given qubits toward the maximally mixed state with weight ``lam``."""
    lam = _prob("lambda", lam)
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < n for q in qubits):
        raise ValueError(f"invalid qubit set {qubits} for {n} qubits")
    return kernels.depolarize(rho, np.array(qubits, dtype=np.int64), lam, n)


def build_confusion(noise: NoiseModel, n_qubits: int) -> np.ndarray:
    """Column-stochastic ``P(measured | true)`` over ``n_qubits`` big-endian bitstrings."""
    m = np.ones((1, 1))
    for q in range(n_qubits):
        e01, e10 = noise.readout_pair(q)
        single = np.array([[1.0 - e01, e10], [e01, 1.0 - e10]])
        m = np.kron(m, single)
    return m


def counts_to_vector(counts: Mapping[str, int] | np.ndarray, n_qubits: int) -> np.ndarray:
    """Normalized frequency vector indexed by the bitstring's integer value."""
    if isinstance(counts, Mapping):
        vec = np.zeros(1 << n_qubits)
        for bits, c in counts.items():
            if len(bits) != n_qubits:
                raise ValueError(f"bitstring {bits!r} does not have {n_qubits} bits")
            vec[int(bits, 2)] += c
    else:
        vec = np.asarray(counts, dtype=float).copy()
    total = vec.sum()
    if total <= 0:
        raise ValueError("empty histogram")
    return vec / total


@dataclass
class MitigationResult:
    quasi: np.ndarray
    probabilities: np.ndarray


def mitigate(counts: Mapping[str, int] | np.ndarray, m: np.ndarray) -> MitigationResult:
    """Invert the confusion matrix on a measured histogram.

    Returns the raw quasi-probabilities ``M^-1 p`` and the distribution obtained
    by clipping negative entries to zero and renormalizing.

    Raises:
        ConditioningError: if ``cond(M) >= 1e6``.
    """
    m = np.asarray(m, dtype=float)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise ConditioningError(f"confusion matrix condition number {cond:.3g} is too large")
    n = num_qubits(m.shape[0])
    p = counts_to_vector(counts, n)
    quasi = np.linalg.solve(m, p)
    clipped = np.clip(quasi, 0.0, None)
    s = clipped.sum()
    probs = clipped / s if s > 0 else np.full_like(clipped, 1.0 / clipped.size)
    return MitigationResult(quasi, probs)
