"""End-to-end command-line checks (in-process, plus one console-script run)."""

import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from weylcone import cli
from weylcone import polyhedra as PH

SQUARE_H = PH.HPolyhedron.from_pairs(
    [((F(1), F(0)), F(0)), ((F(0), F(1)), F(0)), ((F(-1), F(0)), F(1)), ((F(0), F(-1)), F(1))],
    2,
)

DECOMPOSE_ARGS = [
    "regions", "decompose", "--type", "A", "--rank", "2", "--rep", "adjoint",
    "--P", "", "--Q", "a2", "--eps", "1/4", "--T", "8,8", "--S", "1/2,1/2",
]


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_rootdatum_json(capsys):
    code, out = run(["rootdatum", "--type", "A", "--rank", "2", "--rep", "adjoint"], capsys)
    assert code == 0
    blob = json.loads(out)
    assert blob["type"] == "A" and blob["rank"] == 2
    assert blob["simple_roots"] == [["2", "-1"], ["-1", "2"]]
    assert len(blob["weights"]) == 6


def test_gamma_values(capsys):
    base = ["gamma", "--type", "A", "--rank", "1", "--P", "", "--Q", "a1", "--T", "2"]
    assert run(base + ["--X", "1/2"], capsys) == (0, '{\n "exact": true,\n "value": 1\n}\n')
    code, out = run(base + ["--X", "3"], capsys)
    assert code == 0 and json.loads(out)["value"] == 0
    code, out = run(base + ["--X", "0"], capsys)
    assert code == 0 and json.loads(out)["value"] == "boundary"


def test_gamma_containment_is_domain_error(capsys):
    code, out = run(
        ["gamma", "--type", "A", "--rank", "2", "--P", "a1", "--Q", "",
         "--X", "1,1", "--T", "2,2"],
        capsys,
    )
    assert code == 1
    assert json.loads(out)["error"]["kind"] == "domain"


def test_bv_interval_exact_terms(capsys):
    code, out = run(
        ["bv", "--normals", "1;-1", "--x", "0,1", "--mu", "2"], capsys
    )
    assert code == 0
    blob = json.loads(out)
    assert blob["kind"] == "exp_sum" and blob["maximal"] is True
    assert blob["result"]["terms"] == [
        {"coeff": "-1/2", "exponent": "-2"},
        {"coeff": "1/2", "exponent": "0"},
    ]
    assert abs(blob["float_value"] - 0.43233235838169365) < 1e-15


def test_bv_limit_volume_polynomial(capsys):
    code, out = run(
        ["bv", "--normals", "1;-1", "--x", "0,1", "--mu", "0", "--limit"], capsys
    )
    assert code == 0
    blob = json.loads(out)
    assert blob["kind"] == "tfinite" and blob["float_value"] == 1.0


def test_bv_degenerate_mu_is_domain_error(capsys):
    code, out = run(
        ["bv", "--normals", "1,0;0,1;-1,0;0,-1", "--x", "0,0,2,3", "--mu", "1,0"],
        capsys,
    )
    assert code == 1
    assert "generic" in json.loads(out)["error"]["message"]


def test_bv_arity_is_argument_error(capsys):
    code, out = run(["bv", "--normals", "1;-1", "--x", "0", "--mu", "2"], capsys)
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "argument"


def test_bad_rational_is_argument_error(capsys):
    code, out = run(
        ["gamma", "--type", "A", "--rank", "1", "--P", "", "--Q", "a1",
         "--X", "1/0", "--T", "2"],
        capsys,
    )
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "argument"


def test_usage_error_exits_via_argparse():
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2


def test_cones_family(capsys):
    code, out = run(["cones", "--type", "A", "--rank", "2", "--rep", "standard"], capsys)
    assert code == 0
    blob = json.loads(out)
    assert blob["walls"] == [["1", "-1"]]
    assert [c["signs"] for c in blob["cells"]] == [[1], [-1]]
    assert blob["epsilon"] is None and blob["suggested_epsilon"]


def test_regions_decompose(capsys):
    code, out = run(DECOMPOSE_ARGS, capsys)
    assert code == 0
    blob = json.loads(out)
    assert blob["epsilon"] == "1/4" and blob["kappa_sq"] == "2"
    assert blob["b_functional"] == ["1/8", "-1/16"]
    assert len(blob["regions"]) == 2


def test_regions_decompose_deterministic_and_parallel(capsys):
    _, first = run(DECOMPOSE_ARGS, capsys)
    _, second = run(DECOMPOSE_ARGS, capsys)
    _, parallel = run(DECOMPOSE_ARGS + ["--jobs", "2"], capsys)
    assert first == second == parallel


def test_seed_does_not_change_deterministic_output(capsys, monkeypatch):
    monkeypatch.setenv("WEYLCONE_SEED", "7")
    _, first = run(DECOMPOSE_ARGS, capsys)
    monkeypatch.setenv("WEYLCONE_SEED", "8")
    _, second = run(["--seed", "9"] + DECOMPOSE_ARGS, capsys)
    assert first == second


def test_regions_refine(capsys):
    code, out = run(
        ["regions", "refine"] + DECOMPOSE_ARGS[2:] + ["--region-index", "1", "--pi-one", "2,3"],
        capsys,
    )
    assert code == 0
    blob = json.loads(out)
    assert len(blob["refinements"]) == 1
    ref = blob["refinements"][0]
    assert ref["delta_prime"] == "1/2" and ref["signs"] == [1]
    assert ref["basis"] == [2] and ref["pi_one"] == [2, 3]


def test_regions_slice_with_integral(capsys):
    code, out = run(
        ["regions", "slice"] + DECOMPOSE_ARGS[2:]
        + ["--region-index", "1", "--pi-one", "2,3", "--ref-index", "0",
           "--X", "97/12,197/48", "--mu", "1,1"],
        capsys,
    )
    assert code == 0
    blob = json.loads(out)
    assert blob["vertices"] == [["-1/24"], ["5/24"]]
    assert abs(blob["integral"] - 0.3285830182825423) < 1e-12


def test_regions_slice_outside_x_is_domain_error(capsys):
    code, out = run(
        ["regions", "slice"] + DECOMPOSE_ARGS[2:]
        + ["--region-index", "1", "--pi-one", "2,3", "--X", "100,0"],
        capsys,
    )
    assert code == 1
    assert json.loads(out)["error"]["kind"] == "domain"


def test_asymptote_toy_csv(capsys):
    code, out = run(["asymptote", "toy", "--T-list", "2,3"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "T,integral,profile,residual"
    assert len(lines) == 3 and lines[1].startswith("2.0,")


def test_oracle_vertices_json_and_off(tmp_path, capsys):
    src = tmp_path / "square.json"
    src.write_text(PH.h_to_json(SQUARE_H), encoding="utf-8")
    code, out = run(["oracle", "vertices", "--in", str(src)], capsys)
    assert code == 0
    assert len(json.loads(out)["V"]) == 4
    axis = lambda i, s: tuple(F(s) if j == i else F(0) for j in range(3))
    cube = PH.HPolyhedron.from_pairs(
        [(axis(i, 1), F(0)) for i in range(3)] + [(axis(i, -1), F(1)) for i in range(3)],
        3,
    )
    src3 = tmp_path / "cube.json"
    src3.write_text(PH.h_to_json(cube), encoding="utf-8")
    code, out = run(["oracle", "vertices", "--in", str(src3), "--format", "off"], capsys)
    assert code == 0 and out.startswith("OFF\n")


def test_oracle_integrate(tmp_path, capsys):
    src = tmp_path / "square_v.json"
    src.write_text(PH.v_to_json(PH.vertices(SQUARE_H)), encoding="utf-8")
    code, out = run(["oracle", "integrate", "--in", str(src), "--mu", "0,0"], capsys)
    assert code == 0
    blob = json.loads(out)
    assert abs(blob["value"] - 1.0) < 1e-12


def test_oracle_malformed_input_is_argument_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2, "rows": []}', encoding="utf-8")
    code, out = run(["oracle", "vertices", "--in", str(bad)], capsys)
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "argument"


def test_oracle_missing_file_is_argument_error(capsys):
    code, out = run(["oracle", "vertices", "--in", "/nonexistent/x.json"], capsys)
    assert code == 2
    assert json.loads(out)["error"]["kind"] == "argument"


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "weylcone.cli", "rootdatum", "--type", "A", "--rank", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rank"] == 1
