"""
Geração de instâncias, pipeline de pi_main e experimentos em lote
"""
from experiments.generator import GeneratorParams, generate_batch, generate_instance
from experiments.pipeline import PipelineConfig, run_pipeline
from experiments.batch import ExperimentConfig, compare_strategies, run_batch, summarize_ratios

__all__ = [
    "GeneratorParams",
    "generate_batch",
    "generate_instance",
    "PipelineConfig",
    "run_pipeline",
    "ExperimentConfig",
    "compare_strategies",
    "run_batch",
    "summarize_ratios",
]
