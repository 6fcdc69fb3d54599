"""
Experimentos em lote: comparação de estratégias contra o oráculo e
arquivos YAML de experimento
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from core.distributions import format_fraction
from core.instance import Instance, validate
from engine.evaluation import evaluate
from engine.oracle import OracleGuards, optimal_adaptive_oracle
from experiments.generator import GeneratorParams, generate_batch
from solver.submodular import SolverConfig
from strategies.threshold import STRATEGY_NAMES, build_strategy
from utils.data_loader import load_instance, load_yaml
from utils.errors import CapacityError, PreconditionError, ValidationError

try:
    from config import DEFAULT_SEED, GUARANTEES, MC_TRIALS
    from utils.logger import get_logger, log_check
except ImportError:
    DEFAULT_SEED = 0
    GUARANTEES = {"main": Fraction(10, 213), "instant_base": Fraction(8),
                  "fixed": Fraction(1, 2), "weitzman": Fraction(1)}
    MC_TRIALS = 100000
    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_check(logger, name, passed, lhs, rhs):
        logger.info(f"CHECK | name={name} | passed={passed}")

logger = get_logger(__name__)

COMPARE_COLUMNS = [
    "instance_id", "strategy", "mode", "value", "value_exact", "stderr",
    "reference", "oracle", "ratio", "guarantee_bound", "pass",
]
BATCH_COLUMNS = ["seed"] + COMPARE_COLUMNS

# Folga de Monte Carlo (em erros padrão) na coluna pass
MC_SIGMAS = 4


def guarantee_for(strategy: str, config: SolverConfig) -> Optional[Fraction]:
    """Fração do valor de referência garantida pela estratégia (None = descritiva)"""
    if strategy == "main":
        return GUARANTEES["main"]
    if strategy == "instant":
        return 1 / (GUARANTEES["instant_base"] + config.local_search_epsilon)
    if strategy == "fixed":
        return GUARANTEES["fixed"]
    if strategy == "weitzman":
        return GUARANTEES["weitzman"]
    return None


def compare_strategies(
    instance: Instance,
    strategies: Sequence[str],
    config: Optional[SolverConfig] = None,
    exact: bool = True,
    trials: int = MC_TRIALS,
    seed: int = DEFAULT_SEED,
    guards: Optional[OracleGuards] = None,
    oracle: bool = True,
) -> pd.DataFrame:
    """
    Avalia cada estratégia e compara com o valor de referência

    A referência é o ótimo adaptativo (oráculo), exceto para pi_fixed, que
    se compara com E[max Y]. Estratégias inaplicáveis à variante são puladas.

    Returns:
        DataFrame com as colunas COMPARE_COLUMNS
    """
    config = config or SolverConfig(seed=seed)
    opt: Optional[Fraction] = None
    if oracle:
        try:
            opt = optimal_adaptive_oracle(instance, guards or OracleGuards.from_config()).optimal_value
        except CapacityError as exc:
            logger.warning(f"Oráculo indisponível para '{instance.name}': {exc}")

    rows: List[Dict[str, Any]] = []
    for name in strategies:
        try:
            strategy, aux = build_strategy(name, instance, config)
        except PreconditionError as exc:
            logger.warning(f"Estratégia '{name}' pulada em '{instance.name}': {exc}")
            continue
        report = evaluate(instance, strategy, exact=exact, trials=trials, seed=seed)

        if name.startswith("fixed"):
            reference_name, reference = "expected_max_y", aux["expected_max_y"]
        else:
            reference_name, reference = "oracle", opt
        bound = guarantee_for(name, config)

        ratio = report.compare(reference_name, reference) if reference is not None else None
        passed: Optional[bool] = None
        if ratio is not None and bound is not None:
            if report.value is not None:
                passed = report.value >= bound * reference
            else:
                passed = report.mean + MC_SIGMAS * report.stderr >= float(bound * reference)
            log_check(logger, f"{name}_guarantee", passed, report.estimate, bound * reference)

        rows.append({
            "instance_id": instance.name,
            "strategy": name,
            "mode": report.mode,
            "value": report.mean,
            "value_exact": "" if report.value is None else format_fraction(report.value),
            "stderr": report.stderr,
            "reference": reference_name,
            "oracle": None if opt is None else float(opt),
            "ratio": None if ratio is None else float(ratio),
            "guarantee_bound": None if bound is None else float(bound),
            "pass": passed,
        })
    return pd.DataFrame(rows, columns=COMPARE_COLUMNS)


@dataclass
class ExperimentConfig:
    """
    Experimento em lote lido de YAML

    Exemplo:
        instances: [data/instances/f1.json]
        generator: {params: {n: 3, horizon: 6}, count: 10}
        strategies: [main, fixed]
        seeds: [0, 1]
        trials: 10000
        exact: true
        oracle: true
        output: data/results/batch.csv
    """

    instances: List[str] = field(default_factory=list)
    generator: Optional[GeneratorParams] = None
    count: int = 0
    strategies: List[str] = field(default_factory=lambda: ["main"])
    seeds: List[int] = field(default_factory=lambda: [DEFAULT_SEED])
    trials: int = MC_TRIALS
    exact: bool = True
    oracle: bool = True
    unsafe: bool = False
    output: Optional[str] = None
    workers: int = 1
    solver: Dict[str, Any] = field(default_factory=dict)

    def violations(self) -> List[str]:
        problems = []
        unknown = [s for s in self.strategies if s not in STRATEGY_NAMES]
        if unknown:
            problems.append(f"estratégias desconhecidas: {unknown}")
        if not self.seeds:
            problems.append("lista de seeds vazia")
        if self.trials < 1:
            problems.append(f"trials deve ser >= 1, recebido {self.trials}")
        if self.count < 0:
            problems.append(f"count negativo: {self.count}")
        if self.count and self.generator is None:
            problems.append("count > 0 exige bloco generator")
        if self.workers < 1:
            problems.append(f"workers deve ser >= 1, recebido {self.workers}")
        if self.generator is not None:
            problems.extend(self.generator.violations())
        return problems

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        values = dict(data)
        generator = values.pop("generator", None)
        count = 0
        params = None
        if generator:
            params = GeneratorParams.from_dict(generator.get("params", {}))
            count = int(generator.get("count", 1))
        known = {"instances", "strategies", "seeds", "trials", "exact", "oracle", "unsafe",
                 "output", "workers", "solver"}
        unknown = set(values) - known
        if unknown:
            raise ValidationError(f"Chaves desconhecidas na configuração: {sorted(unknown)}", sorted(unknown))
        config = cls(generator=params, count=count, **values)
        problems = config.violations()
        if problems:
            raise ValidationError(f"Configuração de experimento inválida: {'; '.join(problems)}", problems)
        return config

    @classmethod
    def from_yaml(cls, path: Any) -> "ExperimentConfig":
        return cls.from_dict(load_yaml(path))

    def solver_config(self, seed: int) -> SolverConfig:
        options = dict(self.solver)
        options["seed"] = seed
        for key in ("b", "local_search_epsilon"):
            if key in options:
                options[key] = Fraction(str(options[key]))
        if "lp_mode" in options:
            from solver.submodular import LpMode
            options["lp_mode"] = LpMode(options["lp_mode"])
        return SolverConfig(**options)

    def load_instances(self) -> List[Instance]:
        instances = [load_instance(Path(path)) for path in self.instances]
        if self.generator is not None and self.count:
            instances.extend(generate_batch(self.generator, self.count, self.seeds[0]))
        for instance in instances:
            problems = validate(instance)
            if problems:
                raise ValidationError(f"Instância '{instance.name}' inválida", problems)
        return instances


def _batch_job(job: Tuple[Instance, ExperimentConfig, int]) -> pd.DataFrame:
    instance, config, seed = job
    frame = compare_strategies(
        instance,
        config.strategies,
        config=config.solver_config(seed),
        exact=config.exact,
        trials=config.trials,
        seed=seed,
        guards=OracleGuards.from_config(unsafe=config.unsafe),
        oracle=config.oracle,
    )
    frame.insert(0, "seed", seed)
    return frame


def run_batch(config: ExperimentConfig) -> pd.DataFrame:
    """
    Executa o experimento: uma linha por (instância, seed, estratégia)

    Com workers > 1 as instâncias rodam em processos separados; a ordem
    das linhas não depende do paralelismo.

    Returns:
        DataFrame com BATCH_COLUMNS (só cabeçalho quando não há instâncias)
    """
    instances = config.load_instances()
    jobs = [(instance, config, seed) for instance in instances for seed in config.seeds]
    logger.info(f"Lote: {len(instances)} instâncias x {len(config.seeds)} seeds x {len(config.strategies)} estratégias")
    if not jobs:
        return pd.DataFrame(columns=BATCH_COLUMNS)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            frames = list(pool.map(_batch_job, jobs))
    else:
        frames = [_batch_job(job) for job in jobs]
    frames = [frame for frame in frames if not frame.empty]
    if not frames:
        return pd.DataFrame(columns=BATCH_COLUMNS)
    return pd.concat(frames, ignore_index=True)[BATCH_COLUMNS]


def summarize_ratios(frame: pd.DataFrame) -> pd.DataFrame:
    """Distribuição das razões por estratégia (describe do pandas)"""
    if frame.empty:
        return pd.DataFrame()
    ratios = frame.dropna(subset=["ratio"])
    return ratios.groupby("strategy")["ratio"].describe().reset_index()
