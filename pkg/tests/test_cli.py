import csv
import io
import json
import math

import pytest

from korobov_exp import cli


@pytest.fixture
def space_files(tmp_path):
    unit = tmp_path / "unit.json"
    unit.write_text(json.dumps({"s": 1, "omega": 0.5, "a": [1], "b": [1]}))
    spt = tmp_path / "spt.json"
    spt.write_text(json.dumps({"s": 2, "omega": 0.5, "a": {"family": "exponential", "delta": 1},
                               "b": {"family": "power", "kappa": 2}}))
    return unit, spt


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_complexity_eps_one(capsys, space_files):
    code, out = run(capsys, "complexity", "--space", space_files[0], "--eps", "1")
    assert code == 0
    assert rows(out.out)[0]["n"] == "3"


def test_spectrum_verify(capsys, space_files):
    code, out = run(capsys, "spectrum", "--space", space_files[1], "--k", "50", "--verify")
    assert code == 0 and len(rows(out.out)) == 50


def test_tractability_report_spt(capsys):
    code, out = run(capsys, "tractability-report", "--format", "json",
                    "--a", '{"family": "exponential", "delta": 1}',
                    "--b", '{"family": "power", "kappa": 2}')
    doc = json.loads(out.out)
    spt = next(r for r in doc["table"] if r["property"] == "EC-SPT")
    assert code == 0 and spt["linf"] == "true"
    lo, hi = doc["tau_star_linf"]
    assert lo == pytest.approx(math.pi ** 2 / 6) and hi == pytest.approx(math.pi ** 2 / 6 + math.log(3))
    assert "open question" in doc["open_question"]


def test_outputs_are_byte_identical(capsys, space_files, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.json"
        code, _ = run(capsys, "spline-demo", "--space", space_files[1], "--mesh", "5,3",
                      "--function", "trig:1,1=2;0,0=1", "--seed", "3", "--format", "json",
                      "--out", path, "--verify")
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["residual_max"] < 1e-8 and doc["wc_lower"] <= doc["wc_upper_mass"]
    assert doc["sampled_error_max"] <= doc["sampled_error_bound"]


def test_errors_std_brackets(capsys, space_files):
    code, out = run(capsys, "errors", "--space", space_files[1], "--n", "0,1,4,9", "--class", "std")
    assert code == 0
    for r in rows(out.out):
        assert float(r["lower"]) <= float(r["upper"]) * (1 + 1e-12)


def test_grid_design_and_sweep(capsys, space_files):
    code, out = run(capsys, "grid-design", "--space", space_files[1], "--eps", "1e-3:1e-1:3",
                    "--s", "1,2")
    assert code == 0
    for r in rows(out.out):
        assert float(r["bound_fn"]) <= float(r["eps"])
    code, out = run(capsys, "grid-design", "--space", space_files[1], "--eps", "0.01",
                    "--construction", "spt", "--beta", "0.5")
    # log(1e4)/log 2 = 13.29: m_1 = 2*ceil(13.29/e**0.5) - 1, m_2 = 2*ceil((13.29/e)**0.25) - 1
    assert code == 0 and rows(out.out)[0]["mesh"] == "17 3"


def test_convergence_study(capsys, space_files):
    code, out = run(capsys, "convergence-study", "--space", space_files[0], "--n-max", "10000")
    assert code == 0
    p = float(rows(out.out)[0]["fitted_p"])
    assert abs(p - 1) < 0.15


def test_usage_errors_have_distinct_codes(capsys, space_files, tmp_path):
    code, _ = run(capsys, "complexity", "--space", tmp_path / "missing.json", "--eps", "0.1")
    assert code == cli.EXIT_USAGE
    code, _ = run(capsys, "complexity", "--space", space_files[0], "--eps", "2")
    assert code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        cli.main(["nonsense"])
    assert info.value.code == cli.EXIT_USAGE


def test_resource_cap_exit_code(capsys, tmp_path):
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"s": 3, "omega": 0.5, "a": [1, 1, 1], "b": [1, 1, 1]}))
    code, _ = run(capsys, "spectrum", "--space", big, "--k", "5000000")
    assert code == cli.EXIT_RESOURCE


def test_certification_failure_exit_code(capsys, space_files, monkeypatch):
    from korobov_exp import minimal_errors as me

    def stall(*a, **k):
        raise me.CertificationStall(4, 6)

    monkeypatch.setattr(me, "complexity", stall)
    code, out = run(capsys, "complexity", "--space", space_files[0], "--eps", "0.1")
    assert code == cli.EXIT_CERTIFICATION and "[4, 6]" in out.err
