from __future__ import annotations

import json
import subprocess
import sys

import pytest

from bioforge.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, run_cli
from bioforge.validate import read_stl

GOOD = "design cube {\n  primitive {\n    size 2\n  }\n}\n"


@pytest.fixture
def design(tmp_path):
    path = tmp_path / "d.bgs"
    path.write_text(GOOD)
    return path


def test_compile_writes_artifacts(design, tmp_path, capsys):
    out = tmp_path / "out"
    assert run_cli(["compile", str(design), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["executed"] and report["mesh_count"] == 1
    assert (out / "program.bgs").read_text().startswith("design cube {")
    _, tris = read_stl(out / "scene.stl")
    assert (out / "scene.stl").stat().st_size == 84 + 50 * len(tris)


def test_compile_domain_error(tmp_path):
    path = tmp_path / "bad.bgs"
    path.write_text("design a { helical { plies 0 } }")
    out = tmp_path / "out"
    assert run_cli(["compile", str(path), "--out", str(out)]) == EXIT_DOMAIN
    report = json.loads((out / "report.json").read_text())
    assert report["error"]["code"] == "ValueOutOfRange"


def test_render(design, tmp_path):
    out = tmp_path / "r"
    assert run_cli(["render", str(design), "--view", "top", "--out", str(out)]) == EXIT_OK
    assert (out / "render_top.ppm").read_bytes().startswith(b"P6\n1280 720\n")


def test_validate(design, tmp_path, capsys):
    assert run_cli(["validate", str(design)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["watertight_per_mesh"] == [True]
    path = tmp_path / "float.bgs"
    path.write_text("design a {\n  primitive { }\n  primitive { offset_x 20 }\n}\n")
    assert run_cli(["validate", str(path)]) == EXIT_DOMAIN


@pytest.mark.parametrize("argv", [
    ["compile"], ["frobnicate"], ["agent", "--prompt", "x", "--k", "0"],
    ["agent", "--prompt", "x", "--max-iters", "-1"], ["bench", "--mode", "best"],
    ["render", "x.bgs", "--view", "side"],
])
def test_usage_errors(argv):
    assert run_cli(argv) == EXIT_USAGE


def test_missing_file(tmp_path):
    assert run_cli(["validate", str(tmp_path / "none.bgs")]) == EXIT_DOMAIN


def test_bad_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"agent": {"k": 0}}))
    assert run_cli(["agent", "--prompt", "foam", "--config", str(cfg),
                    "--out", str(tmp_path)]) == EXIT_USAGE


def test_agent_run(tmp_path, capsys):
    code = run_cli(["agent", "--prompt", "voronoi foam with 10 cells", "--mode", "final",
                    "--out", str(tmp_path)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "terminal: Accepted" in text and "final_render" in text
    runs = list(tmp_path.glob("run_*"))
    assert len(runs) == 1 and (runs[0] / "final.json").exists()


def test_agent_config_sections(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"agent": {"accept_threshold": 1.01, "max_iterations": 2}}))
    assert run_cli(["agent", "--prompt", "voronoi foam", "--config", str(cfg),
                    "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("\niter ") == 2 and "MaxIters" in out


def test_dataset_command(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"pipeline": {"variants_per_query": 1, "render": False,
                                            "composition": {"bio": 0.5, "general": 0.5}}}))
    assert run_cli(["dataset", "--config", str(cfg), "--seed", "2",
                    "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "dataset.jsonl").read_text().splitlines()
    assert len(lines) == 16
    assert (tmp_path / "composition.png").exists()
    assert "total" in capsys.readouterr().out


def test_bench_command(tmp_path, capsys):
    code = run_cli(["bench", "--difficulty", "easy", "--limit", "3", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert "overall" in capsys.readouterr().out
    doc = json.loads((tmp_path / "bench_builtin" / "results.json").read_text())
    assert doc["aggregates"]["n"] == 3


def test_bench_bad_suite(tmp_path):
    bad = tmp_path / "s.json"
    bad.write_text("[]")
    assert run_cli(["bench", "--suite", str(bad), "--out", str(tmp_path)]) == EXIT_DOMAIN


def test_module_entry_point(design):
    proc = subprocess.run([sys.executable, "-m", "bioforge", "validate", str(design)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["executed"]
