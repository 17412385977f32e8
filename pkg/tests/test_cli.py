import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fracred.frontend.cli import main
from fracred.solve import Trajectory

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"
MULTI_TERM, TWO_ORDER = str(PROBLEMS / "multi_term.json"), str(PROBLEMS / "two_order.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestReduce:
    def test_multi_term(self, capsys):
        code, out, _ = run(capsys, "reduce", MULTI_TERM)
        assert code == 0
        assert "characteristic polynomial: lambda^3 - lambda^2" in out

    def test_json(self, capsys):
        code, out, _ = run(capsys, "reduce", MULTI_TERM, "--json")
        d = json.loads(out)
        assert d["gamma"] == "1/2" and d["N"] == 3
        assert d["matrix"] == [[0, 1, 0], [0, 0, 1], [0, 0, 1]]
        assert d["characteristic_polynomial"] == [1, -1, 0, 0]

    def test_multi_order_route(self, capsys):
        code, out, _ = run(capsys, "reduce", MULTI_TERM, "--to", "multi_order", "--json")
        d = json.loads(out)
        assert d["kind"] == "multi_order" and d["component_orders"] == ["1", "1/2"]

    def test_two_order(self, capsys):
        code, out, _ = run(capsys, "reduce", TWO_ORDER, "--json")
        assert json.loads(out)["matrix"] == [[0, 1, 0], [1e-5, 0, 1], [-0.0022, 0, 0.1]]


class TestSolve:
    def test_stdout_csv(self, capsys):
        code, out, _ = run(capsys, "solve", MULTI_TERM, "--h", "0.0625", "--t-end", "1")
        assert code == 0
        meta, t, values = Trajectory.read_csv(out)
        assert values.shape == (17, 3) and t[-1] == 1.0
        assert values[0].tolist() == [0.0, 0.0, 1.0]
        assert "multi_term.json" in meta["reduction"]

    def test_file_csv(self, capsys, tmp_path):
        path = tmp_path / "out.csv"
        code, out, _ = run(capsys, "solve", TWO_ORDER, "--h", "0.125", "--csv", str(path))
        assert code == 0 and "17 rows" in out
        _, t, values = Trajectory.read_csv(path.read_text())
        assert np.all(np.isfinite(values)) and values.shape == (17, 3)

    def test_bad_step(self, capsys):
        code, _, err = run(capsys, "solve", MULTI_TERM, "--h", "0.3")
        assert code == 1 and "error" in err


class TestStability:
    def test_two_order(self, capsys):
        code, out, _ = run(capsys, "stability", TWO_ORDER)
        assert code == 0
        assert out.splitlines()[0] == "STABLE gamma=1/4"

    def test_equation_form_agrees(self, capsys):
        _, a, _ = run(capsys, "stability", TWO_ORDER, "--json")
        _, b, _ = run(capsys, "stability", str(PROBLEMS / "two_order_equations.json"), "--json")
        assert json.loads(a) == json.loads(b)

    def test_multi_term(self, capsys):
        code, out, _ = run(capsys, "stability", MULTI_TERM)
        assert out.startswith("UNSTABLE gamma=1/2")

    def test_nonlinear_is_domain_error(self, capsys, tmp_path):
        p = tmp_path / "nl.json"
        p.write_text(json.dumps({"version": 1, "kind": "single_term", "interval": {"a": 0, "b": 1},
                                 "orders": ["1/2"], "equations": [{"rhs": "x1^2"}], "initial": [1]}))
        code, _, err = run(capsys, "stability", str(p))
        assert code == 1 and "linear" in err


class TestMlAndVerify:
    def test_ml(self, capsys):
        code, out, _ = run(capsys, "ml", "--alpha", "1", "--beta", "1", "--z", "1")
        assert code == 0 and out.startswith("2.718281828459")

    def test_ml_several(self, capsys):
        code, out, _ = run(capsys, "ml", "--alpha", "0.5", "--z", "1", "-1", "--digits", "10")
        assert out.split() == ["5.008980081", "0.4275835762"]

    def test_ml_domain_error(self, capsys):
        code, _, err = run(capsys, "ml", "--alpha", "0.5", "--z", "1e6")
        assert code == 1 and "|z|" in err

    def test_verify_violated(self, capsys):
        code, out, _ = run(capsys, "verify", "--mode", "caputo", "--f", "(t)^0.5", "--beta", "0.5", "--gamma", "0.5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("VIOLATED")
        assert any(line.startswith("outer") and line.endswith("= 0  [Continuous(value_at_a=0)]") for line in lines)
        assert any(line.startswith("direct") and "t^(-1/2)" in line for line in lines)

    def test_verify_holds(self, capsys):
        code, out, _ = run(capsys, "verify", "--f", "t^2", "--beta", "1/2", "--gamma", "1/2")
        assert out.startswith("HOLDS")

    def test_verify_bad_expression(self, capsys):
        code, _, err = run(capsys, "verify", "--f", "t^", "--beta", "1/2", "--gamma", "1/2")
        assert code == 1 and "byte 2" in err


class TestExitCodes:
    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["ml"], ["ml", "--alpha", "x", "--z", "1"],
                                      ["verify", "--f", "t", "--beta", "-1", "--gamma", "1"],
                                      ["--seed", "3", "ml", "--alpha", "1", "--z", "1"]])
    def test_usage(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2

    def test_seed_message(self, capsys):
        with pytest.raises(SystemExit):
            main(["--seed", "1", "ml", "--alpha", "1", "--z", "1"])
        assert "deterministic" in capsys.readouterr().err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "reduce", str(tmp_path / "nope.json"))
        assert code == 1 and "cannot read" in err

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fracred", "stability", TWO_ORDER], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("STABLE gamma=1/4")
        proc = subprocess.run([sys.executable, "-m", "fracred", "--seed", "1", "ml"], capture_output=True, text=True)
        assert proc.returncode == 2
