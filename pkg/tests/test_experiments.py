import json
from pathlib import Path

import numpy as np
import pytest

from entpump.cli import main
from entpump.experiments import (
    ConfigError,
    ExperimentConfig,
    averaged_mixed_run,
    outcome_index,
    run_experiment,
    sweep,
    target_selection,
)
from entpump.tables import BELL, GHZ, TABLE1

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_bell_averaged_run_endpoints():
    cfg = ExperimentConfig("bell", ("zz", "xx"), (0, 0), (0.0, 1.0))
    end = averaged_mixed_run(cfg, 1.0)
    assert end.populations[end.labels.index("phi+")] == pytest.approx(1.0, abs=1e-10)
    start = averaged_mixed_run(cfg, 0.0)
    assert np.allclose(start.populations, 0.25, atol=1e-12)
    assert end.linearity_gap < 1e-10 and start.linearity_gap < 1e-10


def test_ghz_averaged_run_at_zero():
    run = averaged_mixed_run(ExperimentConfig("ghz", p_grid=(0.0,)), 0.0)
    assert run.populations[run.labels.index("0000+1111")] == pytest.approx(0.0625, abs=1e-12)
    assert run.linearity_gap < 1e-10


def test_bell_sweep_closed_form():
    curve = sweep(ExperimentConfig("bell", p_grid=(0.0, 0.5, 1.0)))
    assert np.allclose(curve.target_population, [0.25, 0.5625, 1.0], atol=1e-10)
    assert np.allclose(curve.populations.sum(axis=1), 1.0, atol=1e-9)
    assert curve.metadata["max_linearity_gap"] < 1e-10


def test_zz_only_sweep():
    curve = sweep(ExperimentConfig("bell", ("zz",), (0,), (0.0, 1.0)))
    assert set(curve.target_labels) == {"phi+", "phi-"}
    assert np.allclose(curve.target_population, [0.5, 1.0], atol=1e-10)


def test_ghz_three_zz_sweep_reaches_span():
    curve = sweep(ExperimentConfig("ghz", ("z12", "z23", "z34"), (0, 0, 0), (1.0,)))
    assert set(curve.target_labels) == {"0000+1111", "0000-1111"}
    assert curve.target_population[0] == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("bits, label", sorted(TABLE1.items()))
def test_bell_monotone_in_p(bits, label):
    curve = sweep(ExperimentConfig("bell", ancilla_bits=bits))
    assert curve.target_labels == (label,)
    assert np.all(np.diff(curve.target_population) >= -1e-12)


def test_ghz_monotone_in_p():
    curve = sweep(ExperimentConfig("ghz", ancilla_bits=(0, 1, 0, 1), p_grid=(0.0, 0.3, 0.6, 1.0)))
    assert np.all(np.diff(curve.target_population) >= -1e-12)
    assert curve.target_population[-1] == pytest.approx(1.0, abs=1e-10)


def test_outcome_index_is_a_permutation():
    for fam in (BELL, GHZ):
        idx = outcome_index(fam)
        assert sorted(idx.values()) == list(range(1 << fam.n_qubits))


def test_target_selection_single_state_for_full_maps():
    assert target_selection(GHZ, GHZ.map_names, (0, 0, 0, 0)) == ["0000+1111"]


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"p_grid": (0.2, 1.5)}, "p_grid"),
        ({"p_grid": ()}, "p_grid"),
        ({"system": "w"}, "system"),
        ({"maps": ("zz", "yy")}, "maps"),
        ({"ancilla_bits": (0,)}, "ancilla_bits"),
        ({"ancilla_bits": (0, 2)}, "ancilla_bits"),
        ({"shots": 0}, "shots"),
        ({"noise": "lab"}, "noise"),
        ({"noise_params": {"t1": 1}}, "noise_params"),
        ({"seed": -1}, "seed"),
    ],
)
def test_config_validation_names_field(kwargs, field):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig(**kwargs)
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_config_round_trip(tmp_path):
    cfg = ExperimentConfig("ghz", ("z12", "xxxx"), (1, 0), (0.0, 0.5), 100, "hardware-like", {"depolarizing_2q": 0.02}, True, 5)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(path) == cfg


def test_unknown_config_key():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"system": "bell", "pgrid": [0.1]})
    assert info.value.field == "pgrid"


def test_run_experiment_writes_outputs(tmp_path):
    paths = run_experiment(CONFIGS / "table1_01.json", tmp_path / "out")
    csv = paths["csv"].read_text().splitlines()
    assert csv[0] == "p,phi+,phi-,psi+,psi-"
    assert len(csv) == 22
    last = dict(zip(csv[0].split(","), csv[-1].split(",")))
    assert float(last["phi-"]) == pytest.approx(1.0, abs=1e-10)
    report = json.loads(paths["json"].read_text())
    assert set(report) == {"config", "curve", "manifest"}
    assert report["curve"]["target_labels"] == ["phi-"]
    man = json.loads(paths["manifest"].read_text())
    assert man["seed"] == 0 and man["library"] == "entpump" and "version" in man


@pytest.mark.parametrize("bits", ["00", "01", "10", "11"])
def test_table1_configs(bits, tmp_path):
    cfg = ExperimentConfig.from_json(CONFIGS / f"table1_{bits}.json")
    curve = sweep(cfg)
    label = TABLE1[tuple(int(b) for b in bits)]
    assert curve.column(label)[-1] == pytest.approx(1.0, abs=1e-10)


def test_csv_identical_across_workers():
    cfg = ExperimentConfig("bell", p_grid=(0.0, 0.3, 0.6, 1.0), shots=3000, noise="hardware-like", mitigate=True, seed=11)
    assert sweep(cfg, workers=1).to_csv() == sweep(cfg, workers=4).to_csv()


def test_noisy_mitigated_beats_unmitigated():
    base = dict(system="bell", p_grid=(1.0,), shots=8192, noise="hardware-like", seed=3)
    raw = sweep(ExperimentConfig(**base)).target_population[0]
    mit = sweep(ExperimentConfig(**base, mitigate=True)).target_population[0]
    assert mit > raw
    assert raw < 0.97


def test_cli_bell_stdout(capsys):
    assert main(["bell", "--p-list", "0,0.5,1", "--exact"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "p,phi+,phi-,psi+,psi-"
    assert lines[2].split(",")[1] == "0.5625"


def test_cli_ghz_to_dir(tmp_path, capsys):
    assert main(["ghz", "--ancilla", "0000", "--p-steps", "2", "--out", str(tmp_path)]) == 0
    csv = (tmp_path / "populations.csv").read_text().splitlines()
    assert csv[0].startswith("p,0000+1111,0000-1111")
    assert float(csv[-1].split(",")[1]) == pytest.approx(1.0, abs=1e-10)


def test_cli_bad_grid_names_field(capsys):
    assert main(["bell", "--p-list", "0.2,1.5"]) == 2
    assert "p_grid" in capsys.readouterr().err


def test_cli_run_and_table2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": "bell", "p_grid": [0, 1]}))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "c" / "populations.csv").exists()
    assert main(["table2", "--out", str(tmp_path / "t.md")]) == 0
    assert "0000+1111" in (tmp_path / "t.md").read_text()


def test_cli_run_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"system": "bell", "shots": -5}))
    assert main(["run", str(cfg)]) == 2
    assert "shots" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_cli_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["bell", "--ancilla", "0a"])
    assert info.value.code == 2
