import json
from pathlib import Path

import numpy as np
import pytest

from arlat import config as cfgmod
from arlat.cli import main
from arlat.config import RunConfig, build_model, parse_complex, parse_profile, profile_to_json
from arlat.errors import InvalidInputError
from arlat.profiles import Constant, Cosine, PiecewiseLinear

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def base(**over):
    data = {"schema_version": 1, "model": "chain", "params": {"n": 6, "tau": 1.0, "beta": 1.0, "kappa": 7 ** 0.5}}
    data.update(over)
    return data


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    return header, np.genfromtxt(path, delimiter=",", skip_header=1, ndmin=2)


def test_example_configs_load():
    for path in sorted(CONFIGS.glob("*.json")):
        cfg = cfgmod.load(path)
        build_model(cfg)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_round_trip(path):
    cfg = cfgmod.load(path)
    again = RunConfig.from_dict(json.loads(cfgmod.dumps(cfg)))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_complex_and_profile_parsing():
    assert parse_complex([1, -2]) == 1 - 2j
    assert parse_complex(3) == 3
    with pytest.raises(InvalidInputError):
        parse_complex("1")
    with pytest.raises(InvalidInputError):
        parse_complex(True)
    for p in (Constant(2 + 1j), Cosine(1.0, 0.5, 2.0, 0.1), PiecewiseLinear(((0, 1), (1, 2j)))):
        assert parse_profile(json.loads(json.dumps(profile_to_json(p)))) == p
    with pytest.raises(InvalidInputError):
        parse_profile({"sine": {}})
    with pytest.raises(InvalidInputError):
        parse_profile({"piecewise_linear": [[1, 0], [0, 1]]})


@pytest.mark.parametrize(
    "data",
    [
        base(schema_version=2),
        base(model="lattice"),
        base(params={"n": 6, "tau": 1.0, "beta": 1.0}),
        base(params={"n": 6, "tau": 1.0, "beta": 1.0, "kappa": 1.0, "extra": 1}),
        base(params={"n": 1.5, "tau": 1.0, "beta": 1.0, "kappa": 1.0}),
        base(params={"n": 6, "tau": -1.0, "beta": 1.0, "kappa": 1.0}),
        base(feedback={"factor": 1.5}),
        base(source=[1, 0]),
        base(integrator={"scheme": "euler"}),
        base(solver={"rcond_min": "x"}),
        base(verify={"tolerances": {"speed": 1}}),
        base(output={"format": "xml"}),
        base(sweep={"parameter": "params.kappa", "count": 1}),
        base(unknown=1),
    ],
)
def test_invalid_configs_rejected(data):
    with pytest.raises(InvalidInputError):
        RunConfig.from_dict(data)


def test_with_value_paths():
    cfg = RunConfig.from_dict(base())
    assert cfg.with_value("params.kappa", 2.0).params["kappa"] == 2.0
    assert cfg.with_value("feedback.factor", 0.5).feedback["factor"] == 0.5
    with pytest.raises(InvalidInputError):
        cfg.with_value("params.omega", 1.0)


def test_feedback_entries_and_source_override():
    cfg = RunConfig.from_dict(base(feedback={"entries": [[2, 1, [0, 1]]], "factor": 0.5}, source=[0, 1, 0, 0, 0, 0]))
    _, f, src = build_model(cfg)
    assert f.entries == ((2, 1, 0.5j),)
    np.testing.assert_array_equal(src.array, np.eye(6)[1])


def test_custom_model():
    data = {
        "schema_version": 1,
        "model": "custom",
        "params": {
            "n_modes": 3, "tau": 1.0, "rails": 1, "diagonal": [1, 1, 1],
            "couplings": [[1, 2, 2.0], [2, 3, {"cosine": {"base": 1, "amplitude": 0.5, "frequency": 2}}]],
            "concat_map": [[1, 1], [1, 2], [1, 3]], "links": [[2, 1], [3, 2]],
        },
    }
    chip, f, _ = build_model(RunConfig.from_dict(data))
    assert len(chip.couplings) == 4 and f.entries == ((2, 1, 1), (3, 2, 1))


def test_solve_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", write(tmp_path, base()), "--out", str(out)]) == 0
    header, rows = read_csv(out / "solution.csv")
    assert header == ["t", "variable_id", "re", "im", "intensity", "mode", "segment"]
    assert rows.shape == (1201, 7)
    np.testing.assert_allclose(rows[:, 4], rows[:, 2] ** 2 + rows[:, 3] ** 2, rtol=1e-14)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["fixed_point_residual"] <= 1e-10
    assert summary["symmetry_gap"] <= 1e-6 and summary["periodicity_gap"] <= 1e-6
    assert RunConfig.from_dict(json.loads((out / "config.json").read_text())) == RunConfig.from_dict(base())
    wg_header, wg = read_csv(out / "waveguides.csv")
    assert wg_header == ["z", "mode", "re", "im", "intensity"] and wg.shape == (6 * 201, 5)


def test_outputs_are_byte_identical(tmp_path):
    cfg = write(tmp_path, base())
    for name in ("a", "b"):
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    for f in ("solution.csv", "waveguides.csv", "summary.json", "config.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    raw = (tmp_path / "a" / "solution.csv").read_bytes()
    assert b"\r" not in raw
    # 17 significant digits in scientific notation
    assert raw.splitlines()[1].split(b",")[0] == b"0.0000000000000000e+00"


def test_json_format(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", write(tmp_path, base()), "--out", str(out), "--format", "json"]) == 0
    data = json.loads((out / "solution.json").read_text())
    assert data["columns"][0] == "t" and len(data["rows"]) == 1201


def test_single_guide_constant_intensity(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", str(CONFIGS / "single_guide.json"), "--out", str(out)]) == 0
    _, rows = read_csv(out / "solution.csv")
    np.testing.assert_allclose(rows[:, 4], 1.0, atol=1e-12)


def test_qubit_solve_two_variables(tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--config", str(CONFIGS / "qubit5.json"), "--out", str(out)]) == 0
    _, rows = read_csv(out / "solution.csv")
    assert set(rows[:, 1]) == {1.0, 2.0}


def test_resonance_exit_code(tmp_path, capsys):
    data = {
        "schema_version": 1, "model": "custom",
        "params": {"n_modes": 1, "tau": 1.0, "rails": 1, "diagonal": [0.0], "couplings": [],
                   "concat_map": [[1, 1]], "links": [[1, 1]]},
    }
    assert main(["solve", "--config", write(tmp_path, data), "--out", str(tmp_path / "o")]) == 2
    assert "condition estimate" in capsys.readouterr().err


def test_invalid_input_exit_code(tmp_path):
    assert main(["solve", "--config", write(tmp_path, base(schema_version=3)), "--out", str(tmp_path / "o")]) == 1
    assert main(["solve", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["solve", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1


def test_transient_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["transient", "--config", str(CONFIGS / "chain6.json"), "--out", str(out)]) == 0
    header, rows = read_csv(out / "transient.csv")
    assert header == ["run", "k", "error", "log10_error", "remaining_population"]
    assert set(rows[:, 0]) == {1.0, 2.0, 3.0}
    summary = json.loads((out / "summary.json").read_text())
    assert 0 < summary["spectral_radius"] < 1
    rates = [r["decay_rate"] for r in summary["runs"]]
    assert max(rates) / min(rates) - 1 <= 0.05
    assert all(r["status"] == "converged" for r in summary["runs"])


def test_transient_without_feedback_single_row(tmp_path):
    out = tmp_path / "out"
    assert main(["transient", "--config", write(tmp_path, base(feedback={"factor": 0.0})), "--out", str(out)]) == 0
    lines = (out / "transient.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].split(",")[2] == "0.0000000000000000e+00"


def test_verify_passes_and_fails(tmp_path):
    ok = tmp_path / "ok"
    assert main(["verify", "--config", str(CONFIGS / "chain6.json"), "--out", str(ok)]) == 0
    report = json.loads((ok / "summary.json").read_text())
    assert report["passed"]
    gap = [c for c in report["checks"] if c["check"] == "oracle_gap"][0]
    assert gap["value"] <= 5e-3
    lossy = tmp_path / "lossy"
    assert main(["verify", "--config", str(CONFIGS / "chain6_lossy.json"), "--out", str(lossy)]) == 3
    report = json.loads((lossy / "summary.json").read_text())
    failed = {c["check"] for c in report["checks"] if not c["passed"]}
    assert "periodicity" in failed


def test_verify_qubit_bound(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--config", str(CONFIGS / "qubit5.json"), "--out", str(out)]) == 0
    checks = {c["check"]: c for c in json.loads((out / "summary.json").read_text())["checks"]}
    assert checks["oracle_gap"]["value"] < 1e-2
    assert not checks["symmetry"]["asserted"]


def test_verify_custom_tolerance_can_fail(tmp_path):
    data = base(verify={"tolerances": {"oracle_gap": 1e-9}, "oracle_step": 0.001})
    assert main(["verify", "--config", write(tmp_path, data), "--out", str(tmp_path / "o")]) == 3


def test_sweep_no_feedback_is_flat(tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(CONFIGS / "no_feedback_kappa_sweep.json"), "--out", str(out)]) == 0
    header, rows = read_csv(out / "sweep.csv")
    assert header == ["value", "norm_a0", "condition_estimate", "spectral_radius", "resonance"]
    assert rows.shape[0] == 21
    np.testing.assert_array_equal(rows[:, 1], 1.0)
    assert np.all(np.diff(rows[:, 0]) > 0)


def test_sweep_loss_always_solvable(tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(CONFIGS / "chain6_loss_sweep.json"), "--out", str(out)]) == 0
    _, rows = read_csv(out / "sweep.csv")
    assert np.all(rows[:, 4] == 0) and np.all(np.isfinite(rows[:, 1]))
    assert np.all(rows[:, 3] < 1)


def test_sweep_parallel_matches_serial(tmp_path):
    data = base(sweep={"parameter": "params.kappa", "start": 0.5, "stop": 3.0, "count": 6})
    cfg = write(tmp_path, data)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "p"), "--jobs", "2"]) == 0
    assert (tmp_path / "s" / "sweep.csv").read_bytes() == (tmp_path / "p" / "sweep.csv").read_bytes()


def test_sweep_flags_resonance(tmp_path):
    data = {
        "schema_version": 1, "model": "custom",
        "params": {"n_modes": 1, "tau": 1.0, "rails": 1, "diagonal": [0.0], "couplings": [],
                   "concat_map": [[1, 1]], "links": [[1, 1]]},
        "sweep": {"parameter": "feedback.factor", "start": 0.5, "stop": 1.0, "count": 3},
    }
    out = tmp_path / "out"
    assert main(["sweep", "--config", write(tmp_path, data), "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[-1].split(",")[1] == "nan" and lines[-1].endswith(",1")
    assert lines[1].endswith(",0")


def test_sweep_invalid_path(tmp_path):
    data = base(sweep={"parameter": "params.omega", "start": 0, "stop": 1, "count": 3})
    assert main(["sweep", "--config", write(tmp_path, data), "--out", str(tmp_path / "o")]) == 1
    assert main(["sweep", "--config", write(tmp_path, base()), "--out", str(tmp_path / "o")]) == 1


def test_sweep_invalid_jobs(tmp_path):
    data = base(sweep={"parameter": "params.kappa", "start": 0, "stop": 1, "count": 3})
    assert main(["sweep", "--config", write(tmp_path, data), "--out", str(tmp_path / "o"), "--jobs", "0"]) == 1
