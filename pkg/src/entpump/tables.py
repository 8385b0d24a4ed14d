"""Stabilizer families for the Bell and four-qubit GHZ targets.

Each family lists its pump maps in the canonical order, the stabilizer each one
pumps, and the qubit/letter used to flip population out of the wrong eigenspace.
``ghz_table`` derives the 16-row ancilla-pattern -> target-state table from the
stabilizer conditions alone; ``REFERENCE_GHZ_TABLE`` holds the previously
tabulated rows so they can be checked against it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .pauli import PauliString, bit_to_sign, eigen_signs, simultaneous_eigenstate
from .qmat import BELL_LABELS, bell_state, ket_from_terms


@dataclass(frozen=True)
class MapSpec:
    name: str
    stabilizer: PauliString
    flip_qubit: int
    flip_letter: str


@dataclass(frozen=True)
class Family:
    system: str
    n_qubits: int
    maps: tuple[MapSpec, ...]

    def map(self, name: str) -> MapSpec:
        for m in self.maps:
            if m.name == name:
                return m
        names = ", ".join(m.name for m in self.maps)
        raise ValueError(f"unknown map {name!r} for {self.system} (expected one of {names})")

    @property
    def map_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.maps)

    @property
    def stabilizers(self) -> tuple[PauliString, ...]:
        return tuple(m.stabilizer for m in self.maps)

    def target_state(self, bits) -> np.ndarray:
        """Joint eigenstate selected by one ancilla bit per map (all maps, canonical order)."""
        return simultaneous_eigenstate(self.stabilizers, [bit_to_sign(b) for b in bits])

    def basis(self) -> list[tuple[str, np.ndarray]]:
        """The labelled orthonormal basis of joint eigenstates tracked in population curves."""
        if self.system == "bell":
            return [(lab, bell_state(lab)) for lab in BELL_LABELS]
        return [(lab, ghz_family_state(lab)) for lab in ghz_labels(self.n_qubits)]


BELL = Family(
    "bell",
    2,
    (
        MapSpec("zz", PauliString("ZZ"), 0, "X"),
        MapSpec("xx", PauliString("XX"), 0, "Z"),
    ),
)

# The chain maps flip the higher-index qubit so one p=1 sweep copies qubit 0
# down the chain.
GHZ = Family(
    "ghz",
    4,
    (
        MapSpec("z12", PauliString("ZZII"), 1, "X"),
        MapSpec("z23", PauliString("IZZI"), 2, "X"),
        MapSpec("z34", PauliString("IIZZ"), 3, "X"),
        MapSpec("xxxx", PauliString("XXXX"), 0, "Z"),
    ),
)

FAMILIES = {"bell": BELL, "ghz": GHZ}


def family(system: str) -> Family:
    try:
        return FAMILIES[system]
    except KeyError:
        raise ValueError(f"unknown system {system!r} (expected 'bell' or 'ghz')") from None


def _complement(bits: str) -> str:
    return "".join("1" if b == "0" else "0" for b in bits)


def ghz_labels(n: int = 4) -> list[str]:
    """Labels ``0b+1b'`` / ``0b-1b'`` for the GHZ-type basis, ``b'`` the complement of ``b``."""
    out = []
    for tail in itertools.product("01", repeat=n - 1):
        low = "0" + "".join(tail)
        for sign in "+-":
            out.append(f"{low}{sign}{_complement(low)}")
    return out


def ghz_family_state(label: str) -> np.ndarray:
    low, high = label[: len(label) // 2], label[len(label) // 2 + 1:]
    sign = 1 if label[len(low)] == "+" else -1
    return ket_from_terms({low: 1, high: sign})


def ghz_label_of(psi: np.ndarray, atol: float = 1e-9) -> str | None:
    """Label of ``psi`` if it is (up to global phase) one of the GHZ-type basis states."""
    n = int(np.log2(psi.shape[0]))
    for lab in ghz_labels(n):
        if abs(abs(np.vdot(ghz_family_state(lab), psi)) - 1.0) < atol:
            return lab
    return None


TABLE1 = {
    (0, 0): "phi+",
    (0, 1): "phi-",
    (1, 0): "psi+",
    (1, 1): "psi-",
}

# (a_z12, a_z23, a_z34, a_xxxx) -> state, exactly as previously tabulated.
# Several rows repeat a pattern or violate their own stabilizer signs.
REFERENCE_GHZ_TABLE: tuple[tuple[tuple[int, int, int, int], str], ...] = (
    ((0, 0, 0, 0), "0000+1111"),
    ((1, 0, 0, 0), "1010+0101"),
    ((0, 1, 0, 0), "0010+1101"),
    ((0, 0, 1, 0), "0001+1110"),
    ((0, 0, 0, 1), "0000-1111"),
    ((1, 1, 0, 0), "0111+1000"),
    ((1, 0, 1, 0), "1011+0100"),
    ((1, 0, 1, 1), "1010-0101"),
    ((0, 1, 0, 1), "0010-1101"),
    ((0, 0, 1, 1), "0001-1110"),
    ((1, 1, 1, 0), "0110+1001"),
    ((0, 1, 1, 1), "0011-1100"),
    ((1, 0, 1, 1), "1011-0100"),
    ((1, 1, 0, 1), "0111-1000"),
    ((1, 0, 1, 1), "1011-0100"),
    ((1, 1, 1, 1), "0110-1001"),
)


def _parse_pair(label: str) -> np.ndarray:
    a, sign, b = label[:4], label[4], label[5:]
    return ket_from_terms({a: 1, b: 1 if sign == "+" else -1})


def ghz_table() -> list[tuple[tuple[int, ...], str, np.ndarray]]:
    """All 16 ancilla patterns with their derived target state and its label."""
    rows = []
    for bits in itertools.product((0, 1), repeat=4):
        psi = GHZ.target_state(bits)
        rows.append((bits, ghz_label_of(psi), psi))
    return rows


@dataclass(frozen=True)
class TableCheck:
    bits: tuple[int, ...]
    listed: str
    derived: str
    consistent: bool
    listed_signs: tuple[int, ...] | None
    duplicate: bool


def check_reference_table() -> list[TableCheck]:
    """Compare every reference row against the stabilizer-derived state for its pattern."""
    derived = {bits: lab for bits, lab, _ in ghz_table()}
    seen: set[tuple[int, ...]] = set()
    out = []
    for bits, listed in REFERENCE_GHZ_TABLE:
        psi = _parse_pair(listed)
        signs = eigen_signs(GHZ.stabilizers, psi)
        ok = signs == tuple(bit_to_sign(b) for b in bits)
        out.append(TableCheck(bits, listed, derived[bits], ok, signs, bits in seen))
        seen.add(bits)
    return out


def render_ghz_table_markdown() -> str:
    """Markdown document with the derived table and the row-by-row check."""
    lines = [
        "# Four-qubit target states by ancilla pattern",
        "",
        "Derived by projecting onto the joint eigenspace of Z1Z2, Z2Z3, Z3Z4, X1X2X3X4",
        "with signs (+1 for ancilla bit 0, -1 for bit 1). Labels `abcd+efgh` denote",
        "(|abcd> + |efgh>)/sqrt(2).",
        "",
        "| a_z12 | a_z23 | a_z34 | a_xxxx | target |",
        "|---|---|---|---|---|",
    ]
    for bits, lab, _ in ghz_table():
        lines.append("| " + " | ".join(str(b) for b in bits) + f" | {lab} |")
    lines += [
        "",
        "## Check of the previously tabulated rows",
        "",
        "| pattern | listed | derived | consistent | listed state's signs | repeated pattern |",
        "|---|---|---|---|---|---|",
    ]
    for c in check_reference_table():
        signs = "not an eigenstate" if c.listed_signs is None else "".join("+" if s > 0 else "-" for s in c.listed_signs)
        lines.append(
            f"| {''.join(map(str, c.bits))} | {c.listed} | {c.derived} | "
            f"{'yes' if c.consistent else 'no'} | {signs} | {'yes' if c.duplicate else 'no'} |"
        )
    return "\n".join(lines) + "\n"
