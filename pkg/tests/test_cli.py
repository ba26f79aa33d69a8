import csv
import io
import json
import math
import os
import subprocess
import sys

import pytest

from sphereheat.cli import build_config, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_process(*argv, env=None):
    merged = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "sphereheat.cli", *argv], capture_output=True, text=True, env=merged)


class TestEval:
    def test_circle(self, capsys):
        code, out, err = run(["eval", "--dim", "1", "--time", "1", "--angle", "0"], capsys)
        rec = json.loads(out)
        assert code == 0 and err == ""
        assert rec["value"] == pytest.approx(0.2821240, abs=1e-7)
        assert rec["method"] == "theta"

    def test_three_sphere(self, capsys):
        _, out, _ = run(["eval", "--dim", "3", "--time", "1", "--angle", "1.5707963"], capsys)
        assert json.loads(out)["value"] == pytest.approx(0.05061, abs=1e-4)

    def test_log_output(self, capsys):
        _, out, _ = run(["eval", "--dim", "1", "--time", "1e-4", "--angle", "3.14159265", "--log"], capsys)
        rec = json.loads(out)
        assert rec["sign"] == 1
        assert rec["log_value"] == pytest.approx(-24676, abs=10)

    def test_degrees_and_csv(self, capsys):
        _, out, _ = run(["--format", "csv", "eval", "--dim", "2", "--time", "0.5", "--angle", "90", "--degrees"],
                        capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert float(rows[0]["phi"]) == pytest.approx(math.pi / 2, rel=1e-15)
        assert rows[0]["method"] == "reduction"

    def test_derivative(self, capsys):
        _, out, _ = run(["eval", "--dim", "1", "--time", "1", "--angle", str(math.pi / 2), "--derivative"], capsys)
        rec = json.loads(out)
        assert rec["quantity"] == "derivative" and rec["value"] == pytest.approx(-0.116981, abs=1e-6)

    def test_underflow_is_diagnosed_on_stderr(self, capsys):
        code, out, err = run(["eval", "--dim", "1", "--time", "1e-4", "--angle", "3.14159265"], capsys)
        assert code == 0 and json.loads(out)["value"] == 0.0 and "underflow" in err


class TestExitCodes:
    def test_domain(self, capsys):
        assert run(["eval", "--dim", "0", "--time", "1", "--angle", "0"], capsys)[0] == 2
        assert run(["eval", "--dim", "2", "--time", "1", "--angle", "0", "--method", "theta"], capsys)[0] == 2

    def test_capability(self, capsys):
        code, out, err = run(["eval", "--dim", "41", "--time", "0.1", "--angle", "1"], capsys)
        assert code == 3 and out == "" and "cap" in err

    def test_io(self, capsys, tmp_path):
        code, _, _ = run(["scan", "--dim", "1", "--t-points", "2", "--phi-points", "16",
                          "--out", str(tmp_path / "missing" / "x.csv")], capsys)
        assert code == 5

    def test_accuracy(self, capsys, monkeypatch):
        from sphereheat import sphere_kernel
        from sphereheat.errors import AccuracyError

        def boom(*a, **k):
            raise AccuracyError("no convergence")

        monkeypatch.setattr(sphere_kernel, "evaluate", boom)
        assert run(["eval", "--dim", "2", "--time", "0.3", "--angle", "1"], capsys)[0] == 4

    def test_console_entry_point(self):
        res = run_process("eval", "--dim", "0", "--time", "1", "--angle", "0")
        assert res.returncode == 2 and res.stdout == "" and "error" in res.stderr


class TestScan:
    def test_header_rows_and_determinism(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p, threads in zip(paths, ("1", "4")):
            code, out, _ = run(["--threads", threads, "scan", "--dim", "2", "--t-min", "1e-4", "--t-max", "1",
                                "--t-points", "3", "--phi-points", "20", "--out", str(p)], capsys)
            assert code == 0 and out == ""
        text = paths[0].read_text()
        assert text.splitlines()[0] == "d,t,phi,log_kernel,log_envelope,ratio"
        assert len(text.splitlines()) == 1 + 3 * 20
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(["scan", "--dim", "1", "--t-points", "1", "--phi-points", "16"], capsys)
        row = out.splitlines()[2].split(",")
        assert float(row[2]) == pytest.approx(1e-6) and len(row[3].replace("-", "").replace(".", "")) >= 16


class TestVerify:
    def test_quick_passes(self, capsys):
        code, out, err = run(["verify", "--dims", "1", "--profile", "quick"], capsys)
        summary = json.loads(out)
        assert code == 0 and summary["passed"]
        assert set(summary["per_dimension"]["1"]) >= {"inf_ratio", "sup_ratio"}
        assert "PASS" in err

    def test_corrupted_exponent_fails(self, capsys):
        code, out, _ = run(["verify", "--dims", "1", "--envelope-exponent-scale", "1.01"], capsys)
        assert code == 1 and not json.loads(out)["passed"]

    def test_dimension_list(self, capsys):
        code, out, _ = run(["verify", "--dims", "1,3"], capsys)
        assert code == 0 and json.loads(out)["dims"] == [1, 3]


class TestSample:
    def test_seeded_files_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["sample", "--dim", "2", "--time", "0.5", "--n", "1000", "--seed", "7", "--out", str(a)], capsys)
        run(["--seed", "7", "sample", "--dim", "2", "--time", "0.5", "--n", "1000", "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0] == "step,x0,x1,x2" and len(lines) == 1002


class TestOther:
    def test_selftest(self, capsys):
        code, out, _ = run(["selftest"], capsys)
        assert code == 0 and json.loads(out)["passed"]

    def test_phi_table(self, capsys):
        code, out, _ = run(["phi", "--order", "2"], capsys)
        assert code == 0 and "Phi[2,1]" in out and "Phi[2,2]" in out

    def test_bench(self, capsys):
        code, out, _ = run(["bench", "--points", "2000"], capsys)
        rows = json.loads(out)["rows"]
        assert code == 0 and {r["method"] for r in rows} == {"theta", "reduction", "series"}


class TestConfig:
    def test_unknown_key_rejected(self, capsys, tmp_path):
        ini = tmp_path / "c.ini"
        ini.write_text("eps_rel = 1e-10\nnot_a_key = 3\n")
        code, _, err = run(["--config", str(ini), "eval", "--dim", "1", "--time", "1", "--angle", "0"], capsys)
        assert code == 2 and "not_a_key" in err

    def test_precedence(self, capsys, tmp_path, monkeypatch):
        env_ini = tmp_path / "env.ini"
        env_ini.write_text("[sphereheat]\nformat = csv\n")
        monkeypatch.setenv("SPHEREHEAT_CONFIG", str(env_ini))
        _, out, _ = run(["eval", "--dim", "1", "--time", "1", "--angle", "0"], capsys)
        assert out.startswith("d,t,phi")
        _, out, _ = run(["--format", "json", "eval", "--dim", "1", "--time", "1", "--angle", "0"], capsys)
        assert out.startswith("{")

    def test_typed_values(self):
        cfg, run_opts = build_config({"theta_hp_fallback": "no", "quad_nodes_max": "512",
                                      "theta_overlap_band": "0.4, 1.2", "threads": "2"})
        assert cfg.theta.hp_fallback is False and cfg.quad_nodes_max == 512
        assert cfg.theta.overlap_band == (0.4, 1.2) and run_opts["threads"] == 2

    def test_invalid_value(self, capsys):
        assert run(["--set", "eps_rel=-1", "eval", "--dim", "1", "--time", "1", "--angle", "0"], capsys)[0] == 2
