import csv
import json
import shutil
from pathlib import Path

import pytest

from vecopt import cli
from vecopt.errors import SchemaMismatch

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def workdir(tmp_path):
    for name in ("example.json", "toy3.csv"):
        shutil.copy(CONFIGS / name, tmp_path / name)
    return tmp_path


def edit_config(path, **changes):
    cfg = json.loads(path.read_text())
    for dotted, value in changes.items():
        node = cfg
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node[key]
        node[leaf] = value
    path.write_text(json.dumps(cfg))
    return path


def seed_files(exp_dir):
    return {
        str(p.relative_to(exp_dir)): p.read_bytes()
        for p in sorted(exp_dir.rglob("*"))
        if p.is_file() and p.parent != exp_dir
    }


def test_example_run(workdir):
    assert cli.main(["run", str(workdir / "example.json")]) == 0
    exp = workdir / "results" / "toy3_naive"
    rows = list(csv.DictReader((exp / "aggregate.csv").open()))
    assert len(rows) == 2
    assert [float(r["eps_f1"]) for r in rows] == [1.0, 1.0]
    for seed in (0, 1):
        lines = (exp / f"seed{seed}" / "rounds.csv").read_text().splitlines()
        assert lines[0] == "t,samples_used,S_size,P_size,max_diameter"
        summary = json.loads((exp / f"seed{seed}" / "summary.json").read_text())
        assert summary["predicted"] == [0, 1] and summary["status"] == "ok"
        assert "wall_ms" not in summary
    timing = json.loads((exp / "timing.json").read_text())
    assert set(timing) == {"seed0", "seed1"}
    agg = json.loads((exp / "aggregate.json").read_text())
    assert agg["n_failed"] == 0 and agg["metrics"]["eps_f1"]["mean"] == 1.0


def test_rerun_is_byte_identical(workdir, tmp_path_factory):
    out_a, out_b = tmp_path_factory.mktemp("a"), tmp_path_factory.mktemp("b")
    assert cli.main(["run", str(workdir / "example.json"), "--output-dir", str(out_a)]) == 0
    assert cli.main(["run", str(workdir / "example.json"), "--output-dir", str(out_b), "--jobs", "2"]) == 0
    a, b = seed_files(out_a / "toy3_naive"), seed_files(out_b / "toy3_naive")
    assert set(a) == {"seed0/rounds.csv", "seed0/summary.json", "seed1/rounds.csv", "seed1/summary.json"}
    assert a == b
    for name in ("aggregate.csv", "aggregate.json"):
        assert (out_a / "toy3_naive" / name).read_bytes() == (out_b / "toy3_naive" / name).read_bytes()


def test_unknown_algorithm(workdir, capsys):
    cfg = edit_config(workdir / "example.json", **{"algorithm.name": "simulated_annealing"})
    assert cli.main(["run", str(cfg)]) == 1
    assert "simulated_annealing" in capsys.readouterr().err


def test_unknown_key(workdir, capsys):
    cfg = edit_config(workdir / "example.json", **{"algorithm.temperature": 3})
    assert cli.main(["run", str(cfg)]) == 1
    assert "temperature" in capsys.readouterr().err


@pytest.mark.parametrize(
    "change",
    [{"trials.seeds": [1, 1]}, {"order.type": "lexicographic"}, {"order.theta": 200, "order.type": "theta2d"}],
)
def test_invalid_configs(workdir, change):
    assert cli.main(["run", str(edit_config(workdir / "example.json", **change))]) == 1


def test_not_json(workdir):
    (workdir / "broken.json").write_text("{ nope")
    assert cli.main(["run", str(workdir / "broken.json")]) == 1


def test_failed_seed_is_isolated(workdir, monkeypatch, tmp_path_factory):
    clean = tmp_path_factory.mktemp("clean")
    assert cli.main(["run", str(workdir / "example.json"), "--output-dir", str(clean)]) == 0
    real = cli.ALGORITHMS["naive"]

    def flaky(problem, order, config):
        if config.seed == 1:
            raise RuntimeError("boom")
        return real(problem, order, config)

    monkeypatch.setitem(cli.ALGORITHMS, "naive", flaky)
    out = tmp_path_factory.mktemp("flaky")
    assert cli.main(["run", str(workdir / "example.json"), "--output-dir", str(out)]) == 2
    exp = out / "toy3_naive"
    for name in ("rounds.csv", "summary.json"):
        assert (exp / "seed0" / name).read_bytes() == (clean / "toy3_naive" / "seed0" / name).read_bytes()
    failed = json.loads((exp / "seed1" / "summary.json").read_text())
    assert failed["status"] == "failed" and "boom" in failed["error"]
    agg = json.loads((exp / "aggregate.json").read_text())
    assert agg["n_failed"] == 1 and agg["n_seeds"] == 2


def write_agg(path, name, f1):
    metrics = {k: {"mean": v, "std": 0.0} for k, v in (("eps_f1", f1), ("hv_discrepancy", 0.25), ("samples_used", 30))}
    path.write_text(json.dumps({"name": name, "n_seeds": 2, "n_failed": 0, "metrics": metrics}))
    return str(path)


def test_compare(tmp_path, capsys):
    a = write_agg(tmp_path / "a.json", "alpha", 0.875)
    b = write_agg(tmp_path / "b.json", "beta", 0.5)
    one = cli.compare([a]).splitlines()
    assert len(one) == 2 and one[1].startswith("alpha")
    two = cli.compare([a, b]).splitlines()
    assert len(two) == 3
    assert "0.875 ± 0.0" in two[1] and "0.5 ± 0.0" in two[2]
    assert cli.main(["compare", a, b]) == 0
    assert "beta" in capsys.readouterr().out


def test_compare_corrupted(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaMismatch, match="bad.json"):
        cli.compare([str(bad)])
    (tmp_path / "wrong.json").write_text('{"name": "x"}')
    with pytest.raises(SchemaMismatch, match="wrong.json"):
        cli.compare([str(tmp_path / "wrong.json")])
    assert cli.main(["compare", str(bad)]) == 1
    assert "bad.json" in capsys.readouterr().err


def test_pareto_command(workdir, capsys):
    (workdir / "problem.json").write_text(
        json.dumps({"path": "toy3.csv", "design_cols": ["x"], "objective_cols": ["f1", "f2"]})
    )
    (workdir / "order.json").write_text(json.dumps({"type": "componentwise", "dim": 2}))
    assert cli.main(["pareto", str(workdir / "problem.json"), str(workdir / "order.json")]) == 0
    assert capsys.readouterr().out.split() == ["0", "1"]
    assert cli.main(["pareto", str(workdir / "missing.json"), str(workdir / "order.json")]) == 1
