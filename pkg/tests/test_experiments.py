"""
Testes para o gerador de instâncias, o pipeline e os experimentos em lote
"""
import pytest
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))


@pytest.fixture
def fast_solver():
    from solver.submodular import SolverConfig

    return SolverConfig(mcg_steps=20, rounding_repeats=10)


class TestGenerator:
    """Testes de generate_instance e generate_batch"""

    def test_reproducible_and_valid(self):
        from core.instance import validate
        from experiments.generator import GeneratorParams, generate_instance

        params = GeneratorParams(n=3, max_processing=1, horizon=5)
        first = generate_instance(params, 11)
        assert first == generate_instance(params, 11)
        assert validate(first) == []
        assert first.name == "gen-11"
        assert first.horizon >= first.n + first.total_processing

    def test_fixed_tables_are_constant(self):
        from core.instance import VariantTag
        from experiments.generator import GeneratorParams, generate_instance

        instance = generate_instance(GeneratorParams(n=2, variant=VariantTag.FIXED, max_processing=1), 3)
        assert instance.variant is VariantTag.FIXED
        assert all(box.is_time_invariant() for box in instance.boxes)

    def test_classic(self):
        from experiments.generator import GeneratorParams, generate_instance

        instance = generate_instance(GeneratorParams(n=3, classic=True, horizon=9), 0)
        assert instance.is_classic()
        assert instance.horizon == 3

    def test_invalid_params(self):
        """INSTANT com p > 0 e chaves desconhecidas"""
        from core.instance import VariantTag
        from experiments.generator import GeneratorParams, generate_instance
        from utils.errors import ValidationError

        with pytest.raises(ValidationError):
            generate_instance(GeneratorParams(variant=VariantTag.INSTANT, max_processing=1), 0)
        with pytest.raises(ValidationError):
            GeneratorParams.from_dict({"n": 2, "boxes": 3})
        with pytest.raises(ValidationError):
            GeneratorParams.from_dict({"variant": "sometimes"})

    def test_params_dict(self):
        from core.instance import DiscountKind
        from experiments.generator import GeneratorParams

        params = GeneratorParams(n=4, discount_kind=DiscountKind.TABLE)
        data = params.to_dict()
        assert data["discount_kind"] == "table"
        assert GeneratorParams.from_dict(data) == params

    def test_batch(self):
        from experiments.generator import GeneratorParams, generate_batch

        params = GeneratorParams(n=2)
        batch = generate_batch(params, 3, seed=7)
        assert [instance.name for instance in batch] == ["gen-7-0", "gen-7-1", "gen-7-2"]
        assert batch == generate_batch(params, 3, seed=7)
        assert generate_batch(params, 0, seed=7) == []


class TestPipeline:
    """Testes de run_pipeline"""

    def test_f1_with_oracle(self, f1, fast_solver):
        from experiments.pipeline import PipelineConfig, run_pipeline

        report = run_pipeline(f1, PipelineConfig(solver=fast_solver, oracle=True))
        names = [check["name"] for check in report["checks"]]
        assert names == ["half_matching", "main_guarantee", "matching_upper_bound", "alpha_bound"]
        assert report["all_pass"]
        assert report["oracle_value"] == 7
        assert report["max_f"] == 7
        assert report["threshold"] == report["f_value"] / 2
        assert report["evaluation"]["mode"] == "exact"
        assert "oracle" in report["evaluation"]["ratios"]

    def test_monte_carlo_mode(self, overlapping, fast_solver):
        from experiments.pipeline import PipelineConfig, run_pipeline

        report = run_pipeline(overlapping, PipelineConfig(solver=fast_solver, exact=False, trials=2000, seed=4))
        assert report["evaluation"]["mode"] == "monte_carlo"
        assert report["evaluation"]["trials"] == 2000
        assert report["all_pass"]
        assert "oracle_value" not in report

    def test_invalid_instance(self, two_point):
        """Instância inválida -> StageError no estágio validate, código 2"""
        from core.instance import BoxSpec, Instance
        from experiments.pipeline import run_pipeline
        from utils.errors import StageError

        boxes = (BoxSpec.constant(1, two_point, 1, processing_time=1),)
        with pytest.raises(StageError) as info:
            run_pipeline(Instance(boxes=boxes, horizon=1))
        assert info.value.stage == "validate"
        assert info.value.exit_code == 2

    def test_stage_label_on_guard(self, f1, fast_solver):
        """Guard do oráculo estourado -> StageError no estágio oracle, código 3"""
        from engine.oracle import OracleGuards
        from experiments.pipeline import PipelineConfig, run_pipeline
        from utils.errors import StageError

        config = PipelineConfig(solver=fast_solver, oracle=True, guards=OracleGuards(boxes=1, horizon=6, support=3))
        with pytest.raises(StageError) as info:
            run_pipeline(f1, config)
        assert info.value.stage == "oracle"
        assert info.value.exit_code == 3


class TestCompare:
    """Testes de compare_strategies"""

    def test_f1(self, f1, fast_solver):
        """instant é pulada (F1 é FIXED); Weitzman atinge o ótimo"""
        from experiments.batch import COMPARE_COLUMNS, compare_strategies

        frame = compare_strategies(f1, ["main", "instant", "fixed", "weitzman"], config=fast_solver)
        assert list(frame.columns) == COMPARE_COLUMNS
        assert list(frame["strategy"]) == ["main", "fixed", "weitzman"]
        rows = frame.set_index("strategy")
        assert rows.loc["weitzman", "ratio"] == 1.0
        assert rows.loc["fixed", "reference"] == "expected_max_y"
        assert rows.loc["main", "reference"] == "oracle"
        assert rows.loc["fixed", "value_exact"] == "7"
        assert frame["pass"].all()

    def test_guarantee_for(self):
        from experiments.batch import guarantee_for
        from solver.submodular import SolverConfig

        config = SolverConfig()
        assert guarantee_for("main", config) == Fraction(10, 213)
        assert guarantee_for("instant", config) == Fraction(2, 17)
        assert guarantee_for("fixed", config) == Fraction(1, 2)
        assert guarantee_for("fixed_heuristic", config) is None


class TestBatch:
    """Testes de ExperimentConfig e run_batch"""

    def _write_yaml(self, tmp_path, **overrides):
        import yaml

        data = {
            "generator": {"params": {"n": 2, "classic": True}, "count": 2},
            "strategies": ["fixed", "weitzman"],
            "seeds": [0, 1],
            "trials": 100,
            "solver": {"mcg_steps": 20, "rounding_repeats": 5, "b": "1/2"},
        }
        data.update(overrides)
        path = tmp_path / "experiment.yaml"
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    def test_from_yaml_and_run(self, tmp_path):
        from experiments.batch import BATCH_COLUMNS, ExperimentConfig, run_batch

        config = ExperimentConfig.from_yaml(self._write_yaml(tmp_path))
        assert config.solver_config(3).b == Fraction(1, 2)
        assert config.solver_config(3).seed == 3
        frame = run_batch(config)
        assert list(frame.columns) == BATCH_COLUMNS
        assert len(frame) == 2 * 2 * 2
        assert list(frame["seed"][:2]) == [0, 0]

    def test_reproducible_and_parallel(self, tmp_path):
        """Mesma configuração -> mesmo resultado, com ou sem processos"""
        import pandas as pd
        from experiments.batch import ExperimentConfig, run_batch

        config = ExperimentConfig.from_yaml(self._write_yaml(tmp_path))
        parallel = ExperimentConfig.from_yaml(self._write_yaml(tmp_path, workers=2))
        pd.testing.assert_frame_equal(run_batch(config), run_batch(config))
        pd.testing.assert_frame_equal(run_batch(config), run_batch(parallel))

    def test_instance_files(self, tmp_path, f1):
        from experiments.batch import ExperimentConfig, run_batch
        from utils.data_loader import save_instance

        path = save_instance(f1, tmp_path / "f1.json")
        config = ExperimentConfig(instances=[str(path)], strategies=["weitzman"], seeds=[0])
        frame = run_batch(config)
        assert list(frame["instance_id"]) == ["f1"]
        assert frame["value_exact"][0] == "7"

    def test_empty_batch(self):
        from experiments.batch import BATCH_COLUMNS, ExperimentConfig, run_batch

        frame = run_batch(ExperimentConfig())
        assert frame.empty
        assert list(frame.columns) == BATCH_COLUMNS

    def test_invalid_config(self, tmp_path):
        from experiments.batch import ExperimentConfig
        from utils.errors import ValidationError

        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict({"strategies": ["oraculo"]})
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict({"colors": 3})
        with pytest.raises(ValidationError):
            ExperimentConfig.from_yaml(self._write_yaml(tmp_path, trials=0))

    def test_summarize_ratios(self, tmp_path):
        from experiments.batch import ExperimentConfig, run_batch, summarize_ratios

        frame = run_batch(ExperimentConfig.from_yaml(self._write_yaml(tmp_path)))
        summary = summarize_ratios(frame)
        assert set(summary["strategy"]) == {"fixed", "weitzman"}
        assert summary.set_index("strategy").loc["weitzman", "min"] == 1.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
