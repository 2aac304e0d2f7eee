import json
import subprocess
import sys

import numpy as np
import pytest

import freetop as ft
from freetop import serialize as ser
from freetop.cli import main

from conftest import random_skew


@pytest.fixture
def rng():
    return np.random.default_rng(5)


def write(path, doc):
    ser.write_json(path, doc)
    return str(path)


@pytest.fixture
def body3_path(tmp_path):
    return write(tmp_path / "body3.json",
                 {"spec_version": "1", "eigenvalues": [1.0, 2.0, 3.0]})


@pytest.fixture
def body4_path(tmp_path):
    return write(tmp_path / "body4.json",
                 {"spec_version": "1", "eigenvalues": [1.0, 2.0, 3.0, 4.0]})


def spinning_book_scenario(tmp_path, **integrator):
    # Rotation near the middle axis of a book-shaped body, slightly kicked.
    m = np.zeros((3, 3))
    m[0, 2] = 4.0
    m[2, 0] = -4.0
    m[0, 1] = 0.01
    m[1, 0] = -0.01
    settings = {"dt": 0.001, "t_end": 1.0, "record_every": 100}
    settings.update(integrator)
    doc = {
        "spec_version": "1",
        "seed": 0,
        "body": {"eigenvalues": [1.0, 2.0, 3.0]},
        "initial": {"matrix": {"n": 3, "kind": "skew", "rows": m.tolist()}},
        "integrator": settings,
        "outputs": {"trajectory_csv": "traj.csv", "invariants_json": "drift.json",
                    "report_json": "report.json"},
    }
    return write(tmp_path / "scenario.json", doc)


class TestHelp:
    def test_top_level_help(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for cmd in ("simulate", "classify", "generate", "stability"):
            assert cmd in out

    @pytest.mark.parametrize("cmd,flags", [
        ("simulate", ["--tol", "--seed", "--output-dir"]),
        ("classify", ["--cluster-tol", "--out"]),
        ("generate", ["--out-momentum", "--out-structure"]),
        ("stability", ["--spectrum", "--kernel", "--probe", "--rank-tol",
                       "--eps", "--horizon", "--exit-factor", "--dt", "--curve-out"]),
    ])
    def test_subcommand_help_lists_flags(self, capsys, cmd, flags):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for flag in flags:
            assert flag in out


class TestSimulate:
    def test_spinning_book_smoke(self, tmp_path):
        scenario = spinning_book_scenario(tmp_path)
        assert main(["simulate", scenario, "--output-dir", str(tmp_path)]) == 0
        lines = (tmp_path / "traj.csv").read_text().strip().split("\n")
        t_vals = [float(line.split(",")[0]) for line in lines[1:]]
        assert t_vals == sorted(t_vals) and len(t_vals) == 11
        drift = json.loads((tmp_path / "drift.json").read_text())
        assert drift["drift"]["energy"] < 1e-10
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["n"] == 3 and report["samples"] == 11

    def test_equilibrium_recipe_scenario(self, tmp_path):
        doc = {
            "spec_version": "1",
            "seed": 12,
            "body": {"eigenvalues": [1.0, 2.0, 3.0, 4.0]},
            "initial": {"recipe": {
                "spec_version": "1",
                "blocks": [{"omega": 1.0, "axes": [0, 1, 2, 3],
                            "structure_source": "random"}],
                "fixed_axes": [],
            }},
            "integrator": {"dt": 0.001, "t_end": 10.0, "record_every": 500},
            "outputs": {"invariants_json": "drift.json"},
        }
        scenario = write(tmp_path / "eq.json", doc)
        assert main(["simulate", scenario, "--output-dir", str(tmp_path)]) == 0
        drift = json.loads((tmp_path / "drift.json").read_text())
        assert drift["momentum_displacement"] <= 1e-8

    def test_malformed_json_names_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{\n  broken\n}")
        assert main(["simulate", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "line 2" in err

    def test_missing_field_named(self, tmp_path, capsys):
        doc = {"spec_version": "1", "body": {"eigenvalues": [1.0, 2.0]},
               "initial": {"matrix": {"n": 2, "kind": "skew",
                                      "rows": [[0.0, 1.0], [-1.0, 0.0]]}}}
        scenario = write(tmp_path / "s.json", doc)
        assert main(["simulate", scenario]) == 2
        assert "integrator" in capsys.readouterr().err

    def test_unknown_major_version(self, tmp_path, capsys):
        scenario = spinning_book_scenario(tmp_path)
        doc = json.loads(open(scenario).read())
        doc["spec_version"] = "9"
        write(tmp_path / "v9.json", doc)
        assert main(["simulate", str(tmp_path / "v9.json")]) == 2
        assert "version" in capsys.readouterr().err

    def test_guard_rejection_is_numeric_exit(self, tmp_path, capsys):
        scenario = spinning_book_scenario(tmp_path, dt=0.5, t_end=10.0,
                                          record_every=1)
        assert main(["simulate", scenario, "--output-dir", str(tmp_path)]) == 3
        assert "guard" in capsys.readouterr().err

    def test_nonexistent_file(self, capsys):
        assert main(["simulate", "/nonexistent/scenario.json"]) == 2

    def test_rerun_overwrites_byte_identically(self, tmp_path):
        scenario = spinning_book_scenario(tmp_path)
        assert main(["simulate", scenario, "--output-dir", str(tmp_path)]) == 0
        first = [(tmp_path / name).read_bytes()
                 for name in ("traj.csv", "drift.json", "report.json")]
        assert main(["simulate", scenario, "--output-dir", str(tmp_path)]) == 0
        second = [(tmp_path / name).read_bytes()
                  for name in ("traj.csv", "drift.json", "report.json")]
        assert first == second


class TestClassify:
    def make_equilibrium(self, tmp_path, body4_path, exotic=False):
        body = ser.read_body(body4_path)
        if exotic:
            recipe = ft.GeneratorRecipe(
                blocks=(ft.RecipeBlock(axes=(0, 1, 2, 3), omega=1.5,
                                       structure_source="random"),), seed=42)
        else:
            recipe = ft.GeneratorRecipe(
                blocks=(ft.RecipeBlock(axes=(0, 1), omega=1.0),
                        ft.RecipeBlock(axes=(2, 3), omega=2.0)))
        m, _ = ft.generate(recipe, body)
        path = tmp_path / ("exotic.json" if exotic else "regular.json")
        ser.write_matrix(path, m)
        return str(path)

    def test_regular_fixture(self, tmp_path, body4_path, capsys):
        m_path = self.make_equilibrium(tmp_path, body4_path)
        assert main(["classify", m_path, body4_path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["regular"] is True
        assert len(doc["blocks"]) == 2

    def test_exotic_fixture(self, tmp_path, body4_path, capsys):
        m_path = self.make_equilibrium(tmp_path, body4_path, exotic=True)
        assert main(["classify", m_path, body4_path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["regular"] is False

    def test_random_momentum_exit4(self, tmp_path, body4_path, capsys, rng):
        path = tmp_path / "random.json"
        ser.write_matrix(path, random_skew(4, rng))
        assert main(["classify", str(path), body4_path]) == 4
        assert "residual" in capsys.readouterr().err

    def test_ambiguous_exit5(self, tmp_path, body4_path, capsys):
        body = ser.read_body(body4_path)
        om = np.zeros((4, 4))
        om[0, 1], om[1, 0] = 1.0, -1.0
        om[2, 3], om[3, 2] = 1.0 + 5e-8, -(1.0 + 5e-8)
        m = ft.inertia_apply(ft.SkewMatrix(om), body)
        path = tmp_path / "close.json"
        ser.write_matrix(path, m)
        assert main(["classify", str(path), body4_path]) == 5
        assert "undecided" in capsys.readouterr().err

    def test_out_file(self, tmp_path, body4_path):
        m_path = self.make_equilibrium(tmp_path, body4_path)
        out = tmp_path / "structure.json"
        assert main(["classify", m_path, body4_path, "--out", str(out),
                     "--output-dir", str(tmp_path)]) == 0
        doc = json.loads(out.read_text())
        assert doc["regular"] is True

    def test_inputs_not_mutated(self, tmp_path, body4_path):
        m_path = self.make_equilibrium(tmp_path, body4_path)
        before = open(m_path, "rb").read(), open(body4_path, "rb").read()
        main(["classify", m_path, body4_path, "--out", str(tmp_path / "o.json"),
              "--output-dir", str(tmp_path)])
        after = open(m_path, "rb").read(), open(body4_path, "rb").read()
        assert before == after


class TestGenerateAndStability:
    @pytest.fixture
    def recipe_path(self, tmp_path):
        return write(tmp_path / "recipe.json", {
            "spec_version": "1",
            "blocks": [{"omega": 1.5, "axes": [0, 1, 2, 3],
                        "structure_source": "random"}],
            "fixed_axes": [],
        })

    def test_generate_writes_outputs(self, tmp_path, body4_path, recipe_path):
        out = tmp_path / "out"
        assert main(["generate", recipe_path, body4_path, "--seed", "42",
                     "--output-dir", str(out)]) == 0
        m = ser.read_matrix(out / "momentum.json")
        body = ser.read_body(body4_path)
        ok, _ = ft.is_equilibrium(m, body, tol=1e-10)
        assert ok
        structure = json.loads((out / "structure.json").read_text())
        assert structure["regular"] is False

    def test_generate_deterministic_bytes(self, tmp_path, body4_path, recipe_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert main(["generate", recipe_path, body4_path, "--seed", "7",
                         "--output-dir", str(out)]) == 0
        assert (out1 / "momentum.json").read_bytes() == (out2 / "momentum.json").read_bytes()
        assert (out1 / "structure.json").read_bytes() == (out2 / "structure.json").read_bytes()

    def test_kernel_gap_regular_vs_exotic(self, tmp_path, body4_path, recipe_path,
                                          capsys):
        out = tmp_path / "out"
        main(["generate", recipe_path, body4_path, "--seed", "42",
              "--output-dir", str(out)])
        assert main(["stability", str(out / "momentum.json"), body4_path,
                     "--kernel"]) == 0
        exotic_doc = json.loads(capsys.readouterr().out)
        assert exotic_doc["excess_kernel_dim"] >= 1

        regular = write(tmp_path / "reg_recipe.json", {
            "spec_version": "1",
            "blocks": [{"omega": 1.0, "axes": [0, 1]},
                       {"omega": 2.0, "axes": [2, 3]}],
            "fixed_axes": [],
        })
        out2 = tmp_path / "out2"
        main(["generate", regular, body4_path, "--output-dir", str(out2)])
        assert main(["stability", str(out2 / "momentum.json"), body4_path,
                     "--kernel"]) == 0
        regular_doc = json.loads(capsys.readouterr().out)
        assert regular_doc["excess_kernel_dim"] == 0
        assert regular_doc["kernel_dim"] < exotic_doc["kernel_dim"]

    def test_spectrum_report(self, tmp_path, body3_path, capsys):
        body = ser.read_body(body3_path)
        m = ft.inertia_apply(ft.SkewMatrix.rotation_generator(3, 0, 2, 1.0), body)
        path = tmp_path / "mid.json"
        ser.write_matrix(path, m)
        assert main(["stability", str(path), body3_path, "--spectrum"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["max_real_part"] > 0.05
        assert len(doc["spectrum"]) == 3

    def test_probe_with_curve(self, tmp_path, body3_path, capsys):
        body = ser.read_body(body3_path)
        m = ft.inertia_apply(ft.SkewMatrix.rotation_generator(3, 0, 2, 1.0), body)
        path = tmp_path / "mid.json"
        ser.write_matrix(path, m)
        curve = tmp_path / "curve.csv"
        assert main(["stability", str(path), body3_path, "--probe",
                     "--horizon", "60", "--curve-out", str(curve),
                     "--output-dir", str(tmp_path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["escaped"] is True
        lines = curve.read_text().strip().split("\n")
        assert lines[0] == "t,deviation" and len(lines) > 2

    def test_stability_requires_equilibrium(self, tmp_path, body4_path, rng):
        path = tmp_path / "r.json"
        ser.write_matrix(path, random_skew(4, rng))
        assert main(["stability", str(path), body4_path, "--spectrum"]) == 4

    def test_output_dir_env(self, tmp_path, body4_path, recipe_path, monkeypatch):
        target = tmp_path / "from_env"
        monkeypatch.setenv("FREETOP_OUTPUT_DIR", str(target))
        assert main(["generate", recipe_path, body4_path, "--seed", "1"]) == 0
        assert (target / "momentum.json").exists()


class TestConsoleScript:
    def test_module_entrypoint(self):
        proc = subprocess.run([sys.executable, "-m", "freetop.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "simulate" in proc.stdout
