"""
Testes da CLI: saídas reprodutíveis e códigos de saída
"""
import json
import pytest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))


@pytest.fixture
def f1_path(tmp_path, f1):
    from utils.data_loader import save_instance

    return str(save_instance(f1, tmp_path / "f1.json"))


def _run(*argv):
    from pandora_cli import main

    return main([str(a) for a in argv])


class TestOutputs:
    """Testes das saídas dos subcomandos"""

    def test_generate_is_byte_reproducible(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert _run("generate", "--n", 3, "--max-processing", 1, "--seed", 9, "--out", first) == 0
        assert _run("generate", "--n", 3, "--max-processing", 1, "--seed", 9, "--out", second) == 0
        assert first.read_bytes() == second.read_bytes()
        assert b"\r\n" not in first.read_bytes()
        assert json.loads(first.read_text(encoding="utf-8"))["format"] == "pandora-time/1"

    def test_generate_count_writes_directory(self, tmp_path):
        out = tmp_path / "batch"
        assert _run("generate", "--classic", "--count", 3, "--seed", 2, "--out", out) == 0
        assert sorted(p.name for p in out.glob("*.json")) == ["gen-2-0.json", "gen-2-1.json", "gen-2-2.json"]

    def test_hypergraph_csv(self, f1_path, capsys):
        assert _run("hypergraph", f1_path) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "i,j,span_end,cost,r,E[Y]"
        assert len(lines) == 5

    def test_reservation_csv(self, f1_path, tmp_path):
        out = tmp_path / "r.csv"
        assert _run("reservation", f1_path, "--out", out) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "i,t,cost,r,E[Y],residual"
        assert lines[1].startswith("0,1,1,8,4,")

    def test_run_exact_json(self, f1_path, tmp_path, capsys):
        traces = tmp_path / "traces.csv"
        assert _run("run", f1_path, "--strategy", "weitzman", "--exact", "--dump-traces", traces) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["value"] == "7"
        assert report["mode"] == "exact"
        assert traces.read_text(encoding="utf-8").splitlines()[0].startswith("trial,probability,")

    def test_run_monte_carlo_reproducible(self, f1_path, capsys):
        assert _run("run", f1_path, "--strategy", "fixed", "--trials", 500, "--seed", 3) == 0
        first = capsys.readouterr().out
        assert _run("run", f1_path, "--strategy", "fixed", "--trials", 500, "--seed", 3) == 0
        assert capsys.readouterr().out == first

    def test_oracle_verify_chain(self, f1_path, capsys):
        assert _run("oracle", f1_path, "--verify", "--chain", "--probe") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["optimal_value"] == "7"
        assert report["recomputed_value"] == "7"
        assert report["upper_bound_chain"]["holds"] is True

    def test_compare_csv_reproducible(self, f1_path, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["compare", f1_path, "--strategies", "main", "fixed", "--steps", 20, "--rounding-repeats", 5]
        assert _run(*argv, "--out", first) == 0
        assert _run(*argv, "--out", second) == 0
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text(encoding="utf-8").splitlines()[0].startswith("instance_id,strategy,mode,value")

    def test_pipeline_json(self, f1_path, capsys):
        assert _run("pipeline", f1_path, "--oracle", "--steps", 20, "--rounding-repeats", 5) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["all_pass"] is True
        assert report["oracle_value"] == "7"


class TestExitCodes:
    """Testes dos códigos de saída"""

    def test_invalid_instance_is_2(self, tmp_path, two_point):
        from core.instance import BoxSpec, Instance
        from utils.data_loader import save_instance

        bad = Instance(boxes=(BoxSpec.constant(1, two_point, 1, processing_time=1),), horizon=1)
        path = save_instance(bad, tmp_path / "bad.json")
        assert _run("hypergraph", path) == 2

    def test_malformed_json_is_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert _run("hypergraph", path) == 2

    def test_missing_file_is_2(self, tmp_path):
        assert _run("oracle", tmp_path / "nowhere.json") == 2

    def test_invalid_solver_params_is_2(self, f1_path):
        assert _run("solve", f1_path, "--b", "3/2") == 2

    def test_oracle_guard_is_3(self, tmp_path):
        out = tmp_path / "big.json"
        assert _run("generate", "--n", 4, "--classic", "--seed", 1, "--out", out) == 0
        assert _run("oracle", out) == 3

    def test_unsafe_bypasses_guard(self, tmp_path, capsys):
        out = tmp_path / "big.json"
        assert _run("generate", "--n", 4, "--classic", "--support", 1, "--seed", 1, "--out", out) == 0
        capsys.readouterr()
        assert _run("oracle", out, "--unsafe", "--prune-idle") == 0
        assert "optimal_value" in json.loads(capsys.readouterr().out)

    def test_unexpected_error_is_4(self, f1_path, monkeypatch):
        """Exceção fora da hierarquia vira código 4 em vez de traceback"""
        import pandora_cli

        def broken(instance):
            raise RuntimeError("falha interna")

        monkeypatch.setattr(pandora_cli, "build", broken)
        assert _run("hypergraph", f1_path) == 4


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
