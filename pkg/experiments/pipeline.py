"""
Pipeline completo de pi_main com rótulos de estágio e verificação das
garantias de aproximação
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from core.indices import indices_for_instance
from core.instance import Instance, validate
from engine.evaluation import EvalReport, evaluate
from engine.oracle import OracleGuards, optimal_adaptive_oracle
from solver.crs import DEFAULT_SCHEME, CrsScheme, round_fractional
from solver.hypergraph import build
from solver.submodular import (
    SolverConfig,
    SubmodularObjective,
    brute_force_best_matching,
    measured_continuous_greedy,
)
from strategies.threshold import ScheduleStrategy, pi_main_schedule
from utils.errors import PandoraError, StageError, ValidationError

try:
    from config import DEFAULT_SEED, GUARANTEES, MC_TRIALS
    from utils.logger import get_logger, log_check, log_stage
except ImportError:
    DEFAULT_SEED = 0
    GUARANTEES = {"main": Fraction(10, 213)}
    MC_TRIALS = 100000
    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_check(logger, name, passed, lhs, rhs):
        logger.info(f"CHECK | name={name} | passed={passed}")

    def log_stage(logger, stage, **fields):
        logger.info(f"STAGE | stage={stage} | {fields}")

logger = get_logger(__name__)

# Folga de Monte Carlo nas verificações (em erros padrão)
MC_SIGMAS = 4


@dataclass
class PipelineConfig:
    """Configuração do solver + modo de avaliação + oráculo opcional"""

    solver: SolverConfig = field(default_factory=SolverConfig)
    exact: bool = True
    trials: int = MC_TRIALS
    seed: int = DEFAULT_SEED
    oracle: bool = False
    guards: Optional[OracleGuards] = None
    scheme: CrsScheme = DEFAULT_SCHEME


def _run_stage(stage: str, fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except PandoraError as exc:
        logger.error(f"Estágio '{stage}' falhou: {exc}")
        raise StageError(stage, exc) from exc


def _check(name: str, lhs: Any, rhs: Any, slack: float = 0.0) -> Dict[str, Any]:
    """lhs >= rhs; com slack > 0 a comparação é em ponto flutuante"""
    if slack:
        passed = float(lhs) + slack >= float(rhs)
    else:
        passed = lhs >= rhs
    log_check(logger, name, passed, lhs, rhs)
    return {"name": name, "lhs": lhs, "rhs": rhs, "pass": bool(passed)}


def run_pipeline(instance: Instance, config: Optional[PipelineConfig] = None) -> Dict[str, Any]:
    """
    validate -> build -> indices -> mcg -> round -> schedule -> evaluate [-> oracle]

    Args:
        instance: Instância
        config: Configuração do pipeline

    Returns:
        Relatório com todos os valores intermediários e as verificações
    """
    config = config or PipelineConfig()

    problems = validate(instance)
    if problems:
        raise StageError("validate", ValidationError(f"Instância inválida: {problems[0]}", problems))
    log_stage(logger, "validate", n=instance.n, horizon=instance.horizon, variant=instance.variant.value)

    h = _run_stage("build", build, instance)
    log_stage(logger, "build", edges=len(h.edges), density=f"{float(h.density()):.4f}")

    indices = _run_stage("indices", indices_for_instance, instance)
    log_stage(logger, "indices", slots=len(indices))

    obj = SubmodularObjective.from_hypergraph(h)
    solution = _run_stage("mcg", measured_continuous_greedy, obj, h, config.solver)
    matching = _run_stage("round", round_fractional, obj, h, solution,
                          config.solver.rounding_repeats, config.solver.seed, config.scheme)
    schedule = _run_stage("schedule", pi_main_schedule, instance, matching, h)
    log_stage(logger, "schedule", slots=len(schedule.slots), tau=f"{float(schedule.threshold):.6f}")

    strategy = ScheduleStrategy(schedule, "main")
    evaluation: EvalReport = _run_stage("evaluate", evaluate, instance, strategy,
                                        exact=config.exact, trials=config.trials, seed=config.seed)

    exact = evaluation.value is not None
    value = evaluation.value if exact else evaluation.mean
    slack = 0.0 if exact else MC_SIGMAS * evaluation.stderr
    f_value = schedule.matching_value
    checks: List[Dict[str, Any]] = [_check("half_matching", value, f_value / 2, slack)]

    report: Dict[str, Any] = {
        "instance": instance.name,
        "n": instance.n,
        "horizon": instance.horizon,
        "variant": instance.variant.value,
        "edges": len(h.edges),
        "density": h.density(),
        "fractional_value": solution.value,
        "heuristic_direction": solution.heuristic_direction,
        "matching": matching.to_json(),
        "f_value": f_value,
        "threshold": schedule.threshold,
        "schedule": schedule.to_json(),
    }

    if config.oracle:
        guards = config.guards or OracleGuards.from_config()
        oracle = _run_stage("oracle", optimal_adaptive_oracle, instance, guards)
        _, max_f = _run_stage("oracle", brute_force_best_matching, obj, h)
        opt = oracle.optimal_value
        report["oracle_value"] = opt
        report["max_f"] = max_f
        report["ratio"] = evaluation.compare("oracle", opt)
        checks.append(_check("main_guarantee", value, opt * GUARANTEES["main"], slack))
        checks.append(_check("matching_upper_bound", 2 * max_f, opt))
        if f_value > 0:
            alpha = max_f / f_value
            report["alpha_observed"] = alpha
            checks.append(_check("alpha_bound", value, opt / (4 * alpha), slack))

    report["evaluation"] = evaluation.to_dict()
    report["checks"] = checks
    report["all_pass"] = all(check["pass"] for check in checks)
    return report
