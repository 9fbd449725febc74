"""Command-line behaviour: exit codes, determinism, input immutability."""

import hashlib
from pathlib import Path

import pytest

from vaxsel.cli import main
from tests.conftest import packaged


def tree_digest(root: Path) -> dict:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


def test_replicate_happy_path(tmp_path):
    out = tmp_path / "out"
    assert main(["replicate", "--out", str(out)]) == 0
    files = {str(p.relative_to(out)) for p in out.rglob("*") if p.is_file()}
    expected = {
        "tables/table1.md", "tables/table1.csv",
        "tables/table2.md", "tables/table2.csv",
        "tables/table3.md", "tables/table3.csv",
        "tables/table4.md", "tables/table4.csv",
        "figures/fig1.csv", "figures/fig1.svg",
        "figures/fig2.csv", "figures/fig2.svg",
        "figures/fig3.csv", "figures/fig3.svg",
        "figures/figA1.csv", "figures/figA1.svg",
        "report/replication_diff.md", "report/audit.log",
    }
    assert files == expected


def test_replicate_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["replicate", "--out", str(out1)]) == 0
    assert main(["replicate", "--out", str(out2)]) == 0
    assert tree_digest(out1) == tree_digest(out2)


def test_simulate_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--rho", "0.5", "--n", "500", "--reps", "60", "--seed", "7"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert tree_digest(out1) == tree_digest(out2)
    assert (out1 / "recovery.csv").exists()
    assert (out1 / "recovery.md").exists()


def test_describe(tmp_path):
    out = tmp_path / "out"
    assert main(["describe", "--out", str(out)]) == 0
    text = (out / "tables" / "table1.md").read_text()
    assert "Descriptive statistics" in text


def test_fit_single_model_with_filter(tmp_path):
    out = tmp_path / "out"
    assert main(["fit", "--model", "2", "--filter", "table4", "--out", str(out)]) == 0
    text = (out / "tables" / "fit_2.csv").read_text()
    assert "observations,model2:selection,184" in text


def test_fit_heckman_vcov(tmp_path):
    out = tmp_path / "out"
    assert main(["fit", "--model", "1", "--vcov", "heckman", "--out", str(out)]) == 0
    assert "heckman_corrected" in (out / "tables" / "fit_1.md").read_text()


def test_missing_data_file_exits_1(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["replicate", "--data", "/nonexistent/snapshot.csv", "--out", str(out)])
    assert code == 1
    err = capsys.readouterr().err
    assert "/nonexistent/snapshot.csv" in err


def test_usage_error_exits_2(capsys):
    assert main(["replicate"]) == 2  # --out is required
    assert main(["frobnicate"]) == 2


def test_inputs_not_mutated(tmp_path):
    data = packaged("snapshot.csv")
    before = data.read_bytes()
    assert main(["replicate", "--out", str(tmp_path / "out")]) == 0
    assert data.read_bytes() == before


def test_figures_only(tmp_path):
    out = tmp_path / "out"
    assert main(["figures", "--grid", "25", "--out", str(out)]) == 0
    lines = (out / "figures" / "fig2.csv").read_text().splitlines()
    points = [l for l in lines[1:] if l and not l.startswith("#")]
    assert len(points) == 25
