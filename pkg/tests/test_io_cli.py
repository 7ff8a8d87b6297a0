import io
import json
from pathlib import Path

import numpy as np
import pytest

from pispec.cli import COMMANDS, run_command
from pispec.errors import LoadError
from pispec.gallery import CanonicalSpec, canonical_pair, sip
from pispec.io import load_problem, make_report, margin_csv, report_to_json, save_problem

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def run(argv):
    buf = io.StringIO()
    code = run_command([str(a) for a in argv], stdout=buf)
    text = buf.getvalue()
    return code, (json.loads(text) if text else None), text


def write_problem(tmp_path, name, A, G):
    p = tmp_path / name
    save_problem(p, A, G)
    return p


def test_minimal_json_loads(tmp_path):
    p = write_problem(tmp_path, "d.json", np.diag([2.0, 3.0]), np.diag([1.0, -1.0]))
    prob = load_problem(p)
    assert prob.n == 2 and prob.warnings == [] and prob.ga_residual == 0


def test_matrix_market_pair_loads():
    prob = load_problem(PROBLEMS / "mm")
    assert prob.n == 3
    again = load_problem(PROBLEMS / "mm" / "a.mtx", PROBLEMS / "mm" / "g.mtx")
    assert np.array_equal(prob.A, again.A)


def test_non_hermitian_gram_rejected(tmp_path):
    p = write_problem(tmp_path, "g.json", np.eye(2), np.array([[1.0, 1e-2], [0.0, -1.0]]))
    with pytest.raises(LoadError) as info:
        load_problem(p)
    assert info.value.code == "gram-not-hermitian"


def test_size_mismatch(tmp_path):
    d = {"schema": "pispec-1", "n": 2, "matrix_a": {"re": [[1.0]]}, "gram_g": {"re": [[1, 0], [0, 1]]}}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    with pytest.raises(LoadError) as info:
        load_problem(p)
    assert info.value.code == "size-mismatch"


def test_schema_violation(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"schema": "other", "n": 1}))
    with pytest.raises(LoadError) as info:
        load_problem(p)
    assert info.value.code == "schema-violation"


def test_ga_checks(tmp_path):
    G = np.diag([1.0, -1.0])
    p = write_problem(tmp_path, "warn.json", np.array([[1.0, 1e-6], [-1e-6, 2.0]]) + np.array([[0, 1e-6], [0, 0]]), G)
    assert load_problem(p).warnings
    p = write_problem(tmp_path, "bad.json", np.array([[1.0, 1.0], [0.0, 2.0]]), G)
    with pytest.raises(LoadError) as info:
        load_problem(p)
    assert info.value.code == "ga-not-hermitian"


def test_round_trip_complex(tmp_path):
    A, space, _ = canonical_pair(CanonicalSpec([(1 + 1j, 2), (1 - 1j, 2), (0.3, 1, -1)], 5))
    p = write_problem(tmp_path, "c.json", A, space)
    prob = load_problem(p)
    assert np.abs(prob.A - A).max() <= 1e-15 and np.abs(prob.space.G - space.G).max() <= 1e-15


def test_report_schema_and_margin_header():
    rep = make_report("classify", {"x": np.inf, "z": 1j}, {"r": 0.0})
    d = json.loads(report_to_json(rep))
    assert d["schema"] == "pispec-report-1" and d["results"]["x"] == "inf"
    assert margin_csv([(0.5, 1e-3, 0, 0.25)]).splitlines()[0] == "lambda_re,lambda_im,epsilon,k,nu"


def test_classify_sip_block():
    code, rep, _ = run(["classify", "--problem", PROBLEMS / "sip_jordan.json", "--lambda", "0", "--epsilon", "1e-3"])
    assert code == 0
    r = rep["results"]
    assert r["pi_plus"] and r["budget_plus"] == 1 and r["verdict"] == "pi_plus_not_pp"


def test_spectral_function_diag_example():
    code, rep, _ = run(["spectral-function", "--problem", PROBLEMS / "diag123.json", "--interval", "0.5,2.5"])
    assert code == 0 and rep["results"]["rank"] == 2
    assert all(v <= 1e-8 for v in rep["residuals"].values())


def test_perturb_singular_gram_exit_two(capsys):
    code, rep, _ = run(["perturb", "--problem", PROBLEMS / "singular_g.json", "--lambda", "1"])
    assert code == 2 and rep["status"] == "refused"
    assert rep["error"]["message"] == "hypothesis violated: ker G ≠ {0}"


@pytest.mark.parametrize("argv", [
    ["classify", "--problem", "nope.json", "--lambda", "0"],
    ["classify", "--problem", PROBLEMS / "diag23.json"],
    ["scan", "--problem", PROBLEMS / "diag23.json", "--interval", "3,1"],
    ["bogus"],
    ["classify", "--problem", PROBLEMS / "diag23.json", "--lambda", "x"],
])
def test_input_errors_exit_one(argv):
    assert run(argv)[0] == 1


def test_every_subcommand_runs(tmp_path):
    calls = {
        "classify": ["--problem", PROBLEMS / "mixed.json", "--lambda", "1", "--budget", "1"],
        "scan": ["--problem", PROBLEMS / "canonical_mixed.json", "--interval", "-2,3"],
        "aps": ["--problem", PROBLEMS / "sip_jordan.json", "--lambda", "0"],
        "perturb": ["--problem", PROBLEMS / "canonical_mixed.json", "--lambda", "1"],
        "spectral-function": ["--problem", PROBLEMS / "mm", "--interval", "0.5,2.5"],
        "axioms": ["--problem", PROBLEMS / "diag123.json", "--interval", "0.5,2.5", "--interval", "2.5,3.5"],
        "resolvent": ["--problem", PROBLEMS / "sip_jordan.json", "--lambda", "0", "--plots", tmp_path / "g.csv"],
        "margin-field": ["--problem", PROBLEMS / "diag23.json", "--interval", "1,4", "--grid", "7",
                         "--plots", tmp_path / "m.csv"],
        "gallery": ["--spec", PROBLEMS / "gallery_spec.json", "--save-problem", tmp_path / "gal.json"],
    }
    assert set(calls) == set(COMMANDS)
    for cmd, extra in calls.items():
        code, rep, _ = run([cmd, *extra])
        assert code == 0, cmd
        assert rep["command"] == cmd and rep["status"] == "ok"
    assert (tmp_path / "g.csv").read_text().startswith("t,norm,fit\n")
    assert (tmp_path / "m.csv").read_text().startswith("lambda_re,lambda_im,epsilon,k,nu\n")
    assert load_problem(tmp_path / "gal.json").n == 6


def test_out_file_and_determinism(tmp_path):
    for cmd, extra in [("gallery", ["--seed", "7"]),
                       ("axioms", ["--problem", PROBLEMS / "canonical_mixed.json", "--interval", "0.5,2.5", "--seed", "3"])]:
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run([cmd, *extra, "--out", a])[0] == 0
        assert run([cmd, *extra, "--out", b])[0] == 0
        assert a.read_bytes() == b.read_bytes()


def test_gallery_seed_changes_output():
    _, _, t1 = run(["gallery", "--seed", "1"])
    _, _, t2 = run(["gallery", "--seed", "2"])
    assert t1 != t2


def test_negative_interval_values_parse(tmp_path):
    p = write_problem(tmp_path, "s.json", np.array([[0.0, 1.0], [0.0, 0.0]]), sip(2))
    code, rep, _ = run(["spectral-function", "--problem", p, "--interval", "-0.5,0.5"])
    assert code == 0 and rep["results"]["range_inertia"] == [1, 1, 0]


def test_unwritable_out_is_input_error(tmp_path):
    code, _, _ = run(["classify", "--problem", PROBLEMS / "diag23.json", "--lambda", "2",
                      "--out", tmp_path / "missing" / "x.json"])
    assert code == 1


def test_classify_with_gallery_problem(tmp_path):
    A, space, _ = canonical_pair(CanonicalSpec([(1, 1, 1), (1, 1, -1)], 4))
    p = write_problem(tmp_path, "m.json", A, space)
    code, rep, _ = run(["classify", "--problem", p, "--lambda", "1"])
    assert code == 0 and rep["results"]["verdict"] == "mixed_pi"
    assert rep["results"]["kernel_inertia"] == [1, 1, 0]
