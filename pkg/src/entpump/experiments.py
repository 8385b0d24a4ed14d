"""Population-vs-pump-probability sweeps and their on-disk reports."""

from __future__ import annotations

import datetime as _dt
import json
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__, kernels
from .circuits import (
    Circuit,
    Gate,
    build_cooling_circuit,
    draw_counts,
    outcome_probabilities,
    preparation_gates,
    run_density,
    theta_for,
)
from .noise import NoiseModel, build_confusion, mitigate as mitigate_counts, noise_preset
from .pauli import bit_to_sign, eigen_signs
from .qmat import basis_state, maximally_mixed, population, projector
from .tables import Family, family

DEFAULT_P_STEPS = 21
LINEARITY_TOL = 1e-10


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def uniform_grid(steps: int = DEFAULT_P_STEPS) -> tuple[float, ...]:
    if steps < 2:
        raise ConfigError("p_steps", f"need at least 2 grid points, got {steps}")
    return tuple(float(x) for x in np.linspace(0.0, 1.0, steps))


@dataclass(frozen=True)
class ExperimentConfig:
    system: str = "bell"
    maps: tuple[str, ...] | None = None
    ancilla_bits: tuple[int, ...] | None = None
    p_grid: tuple[float, ...] = field(default_factory=uniform_grid)
    shots: int | None = None
    noise: str = "ideal"
    noise_params: Mapping[str, Any] = field(default_factory=dict)
    mitigate: bool = False
    seed: int = 0

    def __post_init__(self):
        try:
            fam = family(self.system)
        except ValueError as exc:
            raise ConfigError("system", str(exc)) from None
        maps = fam.map_names if self.maps is None else tuple(self.maps)
        if not maps:
            raise ConfigError("maps", "at least one map is required")
        for m in maps:
            if m not in fam.map_names:
                raise ConfigError("maps", f"unknown map {m!r} for {self.system} (expected {', '.join(fam.map_names)})")
        if len(set(maps)) != len(maps):
            raise ConfigError("maps", f"repeated map in {maps}")
        bits = (0,) * len(maps) if self.ancilla_bits is None else tuple(self.ancilla_bits)
        if len(bits) != len(maps):
            raise ConfigError("ancilla_bits", f"{len(bits)} bits for {len(maps)} maps")
        if any(b not in (0, 1) or isinstance(b, bool) for b in bits):
            raise ConfigError("ancilla_bits", f"bits must be 0 or 1, got {list(bits)}")
        try:
            grid = tuple(float(p) for p in self.p_grid)
        except (TypeError, ValueError):
            raise ConfigError("p_grid", f"not a list of numbers: {self.p_grid!r}") from None
        if not grid:
            raise ConfigError("p_grid", "empty grid")
        for p in grid:
            if not np.isfinite(p) or not 0.0 <= p <= 1.0:
                raise ConfigError("p_grid", f"value {p} outside [0, 1]")
        if self.shots is not None and (isinstance(self.shots, bool) or not isinstance(self.shots, int) or self.shots < 1):
            raise ConfigError("shots", f"must be a positive integer or null for exact mode, got {self.shots!r}")
        try:
            noise_preset(self.noise, dict(self.noise_params))
        except (TypeError, ValueError) as exc:
            name = "noise" if self.noise not in ("ideal", "hardware-like") else "noise_params"
            raise ConfigError(name, str(exc)) from None
        if not isinstance(self.mitigate, bool):
            raise ConfigError("mitigate", f"must be true or false, got {self.mitigate!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "ancilla_bits", bits)
        object.__setattr__(self, "p_grid", grid)
        object.__setattr__(self, "noise_params", dict(self.noise_params))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config", "top level must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        kwargs = dict(data)
        for key in ("maps", "ancilla_bits", "p_grid"):
            if key in kwargs and kwargs[key] is not None:
                if isinstance(kwargs[key], (str, bytes)) or not isinstance(kwargs[key], Sequence):
                    raise ConfigError(key, f"must be a list, got {kwargs[key]!r}")
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["maps"] = list(self.maps)
        d["ancilla_bits"] = list(self.ancilla_bits)
        d["p_grid"] = list(self.p_grid)
        d["noise_params"] = dict(self.noise_params)
        return d

    @property
    def family(self) -> Family:
        return family(self.system)

    @property
    def noise_model(self) -> NoiseModel:
        return noise_preset(self.noise, self.noise_params)

    @property
    def exact(self) -> bool:
        return self.shots is None


def measurement_gates(fam: Family) -> list[Gate]:
    """Basis change sending each tracked entangled state to one computational basis state.

    CNOTs from qubit 0 onto the others followed by H on qubit 0.
    """
    return [Gate("cnot", (q,), (0,)) for q in range(1, fam.n_qubits)] + [Gate("h", (0,))]


def outcome_index(fam: Family) -> dict[str, int]:
    """Measured basis index for each tracked state after ``measurement_gates``."""
    c = Circuit(fam.n_qubits, 0, tuple(measurement_gates(fam)))
    out = {}
    for lab, psi in fam.basis():
        rho = run_density(c, projector(psi))
        idx = int(np.argmax(np.real(np.diag(rho))))
        if abs(rho[idx, idx] - 1.0) > 1e-12:
            raise RuntimeError(f"measurement circuit does not resolve {lab}")
        out[lab] = idx
    return out


def target_selection(fam: Family, maps: Sequence[str], bits: Sequence[int]) -> list[str]:
    """Tracked states lying in the eigenspace selected by ``bits`` on ``maps``."""
    stabs = [fam.map(m).stabilizer for m in maps]
    want = tuple(bit_to_sign(b) for b in bits)
    return [lab for lab, psi in fam.basis() if eigen_signs(stabs, psi) == want]


@dataclass
class AveragedRun:
    p: float
    labels: tuple[str, ...]
    populations: np.ndarray
    direct: np.ndarray | None = None

    @property
    def linearity_gap(self) -> float | None:
        if self.direct is None:
            return None
        return float(np.max(np.abs(self.populations - self.direct)))


def _substream_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def averaged_mixed_run(config: ExperimentConfig, p: float, grid_index: int = 0) -> AveragedRun:
    """Average the tracked populations over every computational basis input.

    Ideal exact mode computes the populations from the output density matrix
    and also runs the maximally mixed input directly (``direct``); the two must
    agree by linearity. Otherwise each input is prepared with X gates from
    ``|0...0>``, rotated into the measurement basis and read out, with gate
    noise, readout error, finite shots and mitigation as configured.
    """
    fam = config.family
    circuit = build_cooling_circuit(fam, config.maps, config.ancilla_bits, theta_for(p))
    basis = fam.basis()
    labels = tuple(lab for lab, _ in basis)
    n = fam.n_qubits
    d = 1 << n
    noise = config.noise_model
    ideal_exact = config.exact and noise.is_ideal

    rows = np.empty((d, len(labels)))
    if ideal_exact:
        for b in range(d):
            rho = run_density(circuit, projector(basis_state(format(b, f"0{n}b"))))
            rows[b] = [population(rho, psi) for _, psi in basis]
        rho_mixed = run_density(circuit, maximally_mixed(n))
        direct = np.array([population(rho_mixed, psi) for _, psi in basis])
        return AveragedRun(p, labels, rows.mean(axis=0), direct)

    idx = outcome_index(fam)
    readout = circuit.append(measurement_gates(fam))
    confusion = build_confusion(noise, n) if config.mitigate else None
    zero = projector(basis_state("0" * n))
    for b in range(d):
        bits = format(b, f"0{n}b")
        rho = run_density(readout.prepend(preparation_gates(bits)), zero, noise)
        probs = outcome_probabilities(rho, noise)
        if not config.exact:
            probs = draw_counts(probs, config.shots, _substream_seed(config.seed, grid_index, b)).astype(float)
            probs /= probs.sum()
        if confusion is not None:
            probs = mitigate_counts(probs, confusion).probabilities
        rows[b] = [probs[idx[lab]] for lab in labels]
    return AveragedRun(p, labels, rows.mean(axis=0))


@dataclass
class PopulationCurve:
    p: np.ndarray
    labels: tuple[str, ...]
    populations: np.ndarray
    target_labels: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def target_population(self) -> np.ndarray:
        cols = [self.labels.index(lab) for lab in self.target_labels]
        return self.populations[:, cols].sum(axis=1)

    def column(self, label: str) -> np.ndarray:
        return self.populations[:, self.labels.index(label)]

    def to_csv(self) -> str:
        lines = [",".join(("p",) + self.labels)]
        for p, row in zip(self.p, self.populations):
            lines.append(",".join(f"{v:.12g}" for v in (p, *row)))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "p": [float(x) for x in self.p],
            "labels": list(self.labels),
            "populations": {lab: [float(x) for x in self.column(lab)] for lab in self.labels},
            "target_labels": list(self.target_labels),
            "target_population": [float(x) for x in self.target_population],
        }


def sweep(config: ExperimentConfig, workers: int = 1) -> PopulationCurve:
    """``averaged_mixed_run`` at every grid point.

    Grid points run concurrently when ``workers > 1``; each point draws from its
    own seed substream, so the curve is identical for any worker count.
    """
    tasks = list(enumerate(config.p_grid))

    def one(task):
        i, p = task
        return averaged_mixed_run(config, p, i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, tasks))
    else:
        runs = [one(t) for t in tasks]

    gaps = [r.linearity_gap for r in runs if r.linearity_gap is not None]
    meta = {
        "seed": config.seed,
        "mode": "exact" if config.exact else f"{config.shots} shots",
        "max_linearity_gap": max(gaps) if gaps else None,
    }
    return PopulationCurve(
        np.array(config.p_grid),
        runs[0].labels,
        np.vstack([r.populations for r in runs]),
        tuple(target_selection(config.family, config.maps, config.ancilla_bits)),
        meta,
    )


def manifest(config: ExperimentConfig, curve: PopulationCurve, workers: int) -> dict:
    return {
        "library": "entpump",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "seed": config.seed,
        "workers": workers,
        "grid_points": len(config.p_grid),
        "noise_model": config.noise_model.to_dict(),
        "max_linearity_gap": curve.metadata.get("max_linearity_gap"),
    }


def write_report(config: ExperimentConfig, curve: PopulationCurve, out_dir: str | Path, workers: int = 1) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / "populations.csv",
        "json": out / "report.json",
        "manifest": out / "manifest.json",
    }
    man = manifest(config, curve, workers)
    paths["csv"].write_text(curve.to_csv())
    report = {"config": config.to_dict(), "curve": curve.to_dict(), "manifest": man}
    paths["json"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    paths["manifest"].write_text(json.dumps({"config": config.to_dict(), **man}, indent=2, sort_keys=True) + "\n")
    return paths


def run_experiment(config_path: str | Path, out_dir: str | Path | None = None, workers: int = 1) -> dict[str, Path]:
    """Load a JSON config, run the sweep and write CSV, JSON report and manifest.

    The outputs go to ``out_dir`` (default: next to the config, in a directory
    named after it).
    """
    config_path = Path(config_path)
    config = ExperimentConfig.from_json(config_path)
    curve = sweep(config, workers=workers)
    if out_dir is None:
        out_dir = config_path.with_suffix("")
    return write_report(config, curve, out_dir, workers)
