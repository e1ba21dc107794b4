import json
import math
import os

import pytest

from graphrothe.cli import main
from helpers import path_graph
from graphrothe import fileio


def write_p5_graph(tmp_path):
    path = tmp_path / "p5.txt"
    fileio.write_graph_file(path_graph(5), str(path))
    return str(path)


def write_domain_123(tmp_path):
    path = tmp_path / "dom.txt"
    path.write_text("omega 1\nomega 2\nomega 3\n")
    return str(path)


def heat_config(tmp_path, **overrides):
    cfg = {
        "graph": {"file": write_p5_graph(tmp_path)},
        "domain": {"file": write_domain_123(tmp_path)},
        "problem": {
            "kind": "heat",
            "p": 1.0,
            "horizon": 1.0,
            "steps": 40,
            "initial": {"values": {"2": 1.0}},
        },
        "output": str(tmp_path / "out"),
    }
    cfg["problem"].update(overrides.pop("problem", {}))
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path), cfg


class TestRunHeat:
    def test_outputs_and_manifest(self, tmp_path):
        cfg_path, cfg = heat_config(tmp_path)
        assert main(["run", cfg_path]) == 0
        out = tmp_path / "out"
        for name in ("trajectory.csv", "estimates.csv", "norms.csv",
                     "manifest.json"):
            assert (out / name).exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["outputs"]) == {"trajectory.csv",
                                            "estimates.csv", "norms.csv"}
        assert manifest["diagnostics"]["max_energy_defect"] <= 1e-10

    def test_deterministic_reruns(self, tmp_path):
        cfg_path, cfg = heat_config(tmp_path)
        assert main(["run", cfg_path]) == 0
        out = tmp_path / "out"
        first = {name: (out / name).read_bytes()
                 for name in os.listdir(out)}
        assert main(["run", cfg_path]) == 0
        second = {name: (out / name).read_bytes()
                  for name in os.listdir(out)}
        assert first == second

    def test_compare_oracle_order(self, tmp_path):
        cfg_path, cfg = heat_config(
            tmp_path,
            problem={"steps_list": [125, 250, 500, 1000],
                     "compare_oracle": True})
        assert main(["run", cfg_path]) == 0
        text = (tmp_path / "out" / "oracle_error.csv").read_text()
        rows = [line.split(",") for line in text.splitlines()[1:]]
        orders = [float(r[4]) for r in rows if r[4]]
        assert all(0.8 <= o <= 1.2 for o in orders)

    def test_exhaustion_run(self, tmp_path):
        cfg = {
            "graph": {"generative": "lattice_z", "params": {}},
            "domain": "all",
            "problem": {
                "kind": "heat",
                "p": 1.0,
                "horizon": 1.0,
                "steps": 50,
                "initial": {"values": {"0": 1.0}},
                "exhaustion": {"seeds": ["0"], "levels": [4, 8, 12]},
            },
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", str(cfg_path)]) == 0
        text = (tmp_path / "out" / "levels.csv").read_text()
        lines = text.splitlines()
        assert lines[0] == "m,interior_size,l2_terminal,delta_prev"
        assert len(lines) == 4


class TestRunVi:
    def test_obstacle_run(self, tmp_path, capsys):
        cfg = {
            "graph": {"file": write_p5_graph(tmp_path)},
            "domain": {"file": write_domain_123(tmp_path)},
            "problem": {
                "kind": "vi",
                "horizon": 1.0,
                "steps": 20,
                "initial": {"values": {"2": 1.0}},
                "forcing": {"kind": "separable",
                            "field": {"values": {"2": -5.0}},
                            "time": "1 + 0.1*t"},
                "constraint": {"kind": "obstacle",
                               "psi": {"values": {"2": 0.0}}},
            },
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", str(cfg_path)]) == 0
        err = capsys.readouterr().err
        assert "no declared Lipschitz bound" in err
        reports = (tmp_path / "out" / "vi_reports.csv").read_text()
        header = reports.splitlines()[0].split(",")
        assert "complementarity" in header and "beta" in header

    def test_lipschitz_violation_downgrades(self, tmp_path):
        cfg = {
            "graph": {"file": write_p5_graph(tmp_path)},
            "domain": {"file": write_domain_123(tmp_path)},
            "problem": {
                "kind": "vi",
                "horizon": 1.0,
                "steps": 32,
                "initial": {"values": {"2": 1.0}},
                "forcing": {"kind": "separable",
                            "field": {"values": {"2": 1.0}},
                            "time": "t**0.5"},
                "lipschitz_bound": 0.5,
            },
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", str(cfg_path)]) == 0
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["diagnostics"]["lipschitz"]["violated"]
        assert "downgraded" in manifest["diagnostics"]["convergence_claims"]


class TestValidation:
    def test_ok(self, tmp_path, capsys):
        cfg_path, _ = heat_config(tmp_path)
        assert main(["validate-config", cfg_path]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_p_below_one_exit_2(self, tmp_path, capsys):
        cfg_path, _ = heat_config(tmp_path, problem={"p": 0.5})
        assert main(["validate-config", cfg_path]) == 2
        assert capsys.readouterr().err.startswith("error[CONFIG]:")

    def test_missing_reference_exit_4(self, tmp_path, capsys):
        cfg_path, cfg = heat_config(tmp_path)
        data = json.loads(open(cfg_path).read())
        data["graph"] = {"file": str(tmp_path / "missing.txt")}
        open(cfg_path, "w").write(json.dumps(data))
        assert main(["validate-config", cfg_path]) == 4
        assert capsys.readouterr().err.startswith("error[IO]:")

    def test_invalid_json_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["run", str(path)]) == 2
        assert capsys.readouterr().err.startswith("error[CONFIG]:")

    def test_no_partial_output_on_invalid_config(self, tmp_path):
        cfg_path, cfg = heat_config(tmp_path, problem={"p": 0.5})
        assert main(["run", cfg_path]) == 2
        assert not (tmp_path / "out").exists()

    def test_solve_error_exit_3(self, tmp_path, capsys):
        # explicit oracle cannot resolve a graph with huge weights
        g = path_graph(3, w=1e9)
        gpath = tmp_path / "stiff.txt"
        fileio.write_graph_file(g, str(gpath))
        cfg = {
            "graph": {"file": str(gpath)},
            "domain": "all",
            "problem": {"kind": "heat", "p": 3.0, "horizon": 1.0,
                        "steps": 10, "initial": {"values": {"1": 1.0}},
                        "compare_oracle": True},
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", str(cfg_path)]) == 3
        assert capsys.readouterr().err.startswith("error[SOLVE]:")


class TestRunSpectral:
    def test_basis_outputs(self, tmp_path):
        cfg = {
            "graph": {"file": write_p5_graph(tmp_path)},
            "domain": {"file": write_domain_123(tmp_path)},
            "problem": {"kind": "spectral"},
            "output": str(tmp_path / "out"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", str(cfg_path)]) == 0
        out = tmp_path / "out"
        basis = (out / "basis.csv").read_text().splitlines()
        assert basis[0] == "j,lambda"
        assert float(basis[1].split(",")[1]) == pytest.approx(2.0, abs=1e-12)
        assert (out / "basis_field_1.txt").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        diag = manifest["diagnostics"]
        assert diag["max_eigen_residual"] <= 1e-10 * 3.0
        assert diag["max_orthonormality_defect"] <= 1e-10


class TestGraphInfo:
    def test_info(self, tmp_path, capsys):
        gpath = write_p5_graph(tmp_path)
        dpath = write_domain_123(tmp_path)
        assert main(["graph-info", gpath, "--domain", dpath]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["num_vertices"] == 5
        assert info["max_degree"] == 2
        assert info["interior_size"] == 1


class TestCompare:
    def _run(self, tmp_path, steps, outname):
        cfg_path, _ = heat_config(tmp_path,
                                  problem={"steps": steps},
                                  output=str(tmp_path / outname))
        cfg = json.loads(open(cfg_path).read())
        cfg["output"] = str(tmp_path / outname)
        open(cfg_path, "w").write(json.dumps(cfg))
        assert main(["run", cfg_path]) == 0
        return str(tmp_path / outname / "trajectory.csv")

    def test_self_comparison_zero(self, tmp_path, capsys):
        traj = self._run(tmp_path, 8, "out_a")
        gpath = str(tmp_path / "p5.txt")
        dpath = str(tmp_path / "dom.txt")
        out = str(tmp_path / "cmp.csv")
        assert main(["compare", traj, traj, "--graph", gpath,
                     "--domain", dpath, "--output", out]) == 0
        rows = open(out).read().splitlines()[1:]
        for row in rows:
            _, l2, sup = row.split(",")
            assert float(l2) == 0.0 and float(sup) == 0.0
        assert "max_l2_diff 0.0" in capsys.readouterr().out

    def test_dyadic_errors_halve(self, tmp_path, capsys):
        traj_a = self._run(tmp_path, 50, "out_a")
        traj_b = self._run(tmp_path, 100, "out_b")
        gpath = str(tmp_path / "p5.txt")
        dpath = str(tmp_path / "dom.txt")
        # difference between n and 2n runs is dominated by the coarser
        # run's first-order error
        assert main(["compare", traj_a, traj_b, "--graph", gpath,
                     "--domain", dpath, "--times", "1.0"]) == 0
        out_ab = capsys.readouterr().out
        diff_ab = float(out_ab.splitlines()[-1].split()[-1])
        exact = math.exp(-3.0)
        endpoint_a = (1.0 + 3.0 / 50.0) ** -50
        endpoint_b = (1.0 + 3.0 / 100.0) ** -100
        assert diff_ab == pytest.approx(endpoint_a - endpoint_b, abs=1e-12)
        assert abs(endpoint_a - exact) / abs(endpoint_b - exact) \
            == pytest.approx(2.0, abs=0.1)

    def test_graph_mismatch(self, tmp_path, capsys):
        traj = self._run(tmp_path, 8, "out_a")
        other = path_graph(4)
        gpath = str(tmp_path / "p4.txt")
        fileio.write_graph_file(other, gpath)
        assert main(["compare", traj, traj, "--graph", gpath]) == 2
        assert capsys.readouterr().err.startswith("error[CONFIG]:")
