"""
Motores de avaliação: esperança exata por enumeração da árvore de
realizações e estimativa Monte Carlo com erro padrão
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from core.distributions import format_fraction
from core.instance import Instance
from strategies.realization import BranchSource, RngSource
from strategies.threshold import Strategy, StrategyTrace
from utils.errors import CapacityError, ContractViolation, RealizationExhausted, StructuralError

try:
    from config import DEFAULT_SEED, EXACT_LEAF_GUARD
    from utils.logger import get_logger, log_guard, log_stage
except ImportError:
    DEFAULT_SEED = 0
    EXACT_LEAF_GUARD = 10 ** 6
    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_guard(logger, guard, limit, observed):
        logger.warning(f"GUARD | guard={guard} | limit={limit} | observed={observed}")

    def log_stage(logger, stage, **fields):
        logger.info(f"STAGE | stage={stage} | {fields}")

logger = get_logger(__name__)


@dataclass
class EvalReport:
    """
    Resultado de uma avaliação

    Modo exact: value é racional, stderr = 0. Modo monte_carlo: value é
    None e mean/stderr vêm da amostra.
    """

    strategy_id: str
    mode: str  # exact | monte_carlo
    value: Optional[Fraction]
    mean: float
    stderr: float
    trials: int
    ratios: Dict[str, Any] = field(default_factory=dict)

    @property
    def estimate(self) -> Any:
        return self.value if self.value is not None else self.mean

    def compare(self, name: str, reference: Any) -> Any:
        """Registra a razão valor / referência (1 quando ambos são 0)"""
        estimate = self.estimate
        if reference == 0:
            ratio = Fraction(1) if estimate == 0 else float("inf")
        elif isinstance(estimate, Fraction) and isinstance(reference, Fraction):
            ratio = estimate / reference
        else:
            ratio = float(estimate) / float(reference)
        self.ratios[name] = ratio
        return ratio

    def to_dict(self) -> Dict[str, Any]:
        result = {
            "strategy_id": self.strategy_id,
            "mode": self.mode,
            "mean": self.mean,
            "stderr": self.stderr,
            "trials": self.trials,
        }
        if self.value is not None:
            result["value"] = format_fraction(self.value)
            result["value_float"] = float(self.value)
        result["ratios"] = {
            key: (format_fraction(v) if isinstance(v, Fraction) else v) for key, v in self.ratios.items()
        }
        return result


def enumerate_outcomes(
    instance: Instance,
    strategy: Strategy,
    guard: int = EXACT_LEAF_GUARD,
) -> List[Tuple[Fraction, StrategyTrace]]:
    """
    Enumera todos os ramos de realização de uma estratégia

    Busca em profundidade sobre prefixos de escolhas de átomos: cada prefixo
    é reexecutado com BranchSource e, ao pedir um sorteio novo, ramifica
    sobre o suporte da lei.

    Args:
        instance: Instância
        strategy: Estratégia determinística dado o fluxo de valores
        guard: Máximo de folhas

    Returns:
        Lista de (probabilidade, traço) com probabilidades somando 1
    """
    outcomes: List[Tuple[Fraction, StrategyTrace]] = []
    stack: List[Tuple[int, ...]] = [()]
    while stack:
        choices = stack.pop()
        source = BranchSource(choices)
        try:
            trace = strategy.execute(instance, source)
        except RealizationExhausted as exc:
            if exc.law is None:
                raise
            stack.extend(choices + (k,) for k in reversed(range(len(exc.law))))
            continue
        outcomes.append((source.probability, trace))
        if len(outcomes) > guard:
            log_guard(logger, "exact_leaves", guard, len(outcomes))
            raise CapacityError("exact_leaves", guard, len(outcomes), hint="use monte_carlo")

    total = sum((prob for prob, _ in outcomes), Fraction(0))
    if total != 1:
        raise ContractViolation(f"Probabilidades dos ramos somam {total}, esperado 1")
    return outcomes


def exact_expected_utility(
    instance: Instance,
    strategy: Strategy,
    guard: int = EXACT_LEAF_GUARD,
) -> Fraction:
    """E[u] exato: soma de probabilidade do ramo x utilidade do traço"""
    outcomes = enumerate_outcomes(instance, strategy, guard)
    return sum((prob * trace.utility for prob, trace in outcomes), Fraction(0))


def exact_report(instance: Instance, strategy: Strategy, guard: int = EXACT_LEAF_GUARD) -> EvalReport:
    value = exact_expected_utility(instance, strategy, guard)
    log_stage(logger, "evaluate", mode="exact", strategy=strategy.strategy_id, value=f"{float(value):.6f}")
    return EvalReport(
        strategy_id=strategy.strategy_id,
        mode="exact",
        value=value,
        mean=float(value),
        stderr=0.0,
        trials=0,
    )


def monte_carlo(
    instance: Instance,
    strategy: Strategy,
    trials: int,
    seed: int = DEFAULT_SEED,
    keep_traces: bool = False,
) -> Tuple[EvalReport, List[StrategyTrace]]:
    """
    Estimativa Monte Carlo de E[u]

    Cada tentativa usa um subfluxo próprio de SeedSequence(seed).spawn,
    então o resultado é reprodutível por seed.

    Args:
        instance: Instância
        strategy: Estratégia
        trials: Número de tentativas (>= 1)
        seed: Semente
        keep_traces: Devolve os traços das tentativas

    Returns:
        (EvalReport, traços ou lista vazia)
    """
    if trials < 1:
        raise StructuralError(f"monte_carlo exige trials >= 1, recebido {trials}")

    utilities = np.empty(trials, dtype=float)
    traces: List[StrategyTrace] = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        trace = strategy.execute(instance, RngSource(np.random.default_rng(child)))
        utilities[k] = float(trace.utility)
        if keep_traces:
            traces.append(trace)

    mean = float(utilities.mean())
    stderr = float(stats.sem(utilities)) if trials > 1 else 0.0
    if np.isnan(stderr):
        stderr = 0.0
    log_stage(logger, "evaluate", mode="monte_carlo", strategy=strategy.strategy_id,
              trials=trials, mean=f"{mean:.6f}", stderr=f"{stderr:.6f}")
    report = EvalReport(
        strategy_id=strategy.strategy_id,
        mode="monte_carlo",
        value=None,
        mean=mean,
        stderr=stderr,
        trials=trials,
    )
    return report, traces


def evaluate(
    instance: Instance,
    strategy: Strategy,
    exact: bool = True,
    trials: int = 10000,
    seed: int = DEFAULT_SEED,
    guard: int = EXACT_LEAF_GUARD,
) -> EvalReport:
    """
    Avalia exatamente quando pedido e dentro do guard; senão cai para Monte Carlo
    """
    if exact:
        try:
            return exact_report(instance, strategy, guard)
        except CapacityError as exc:
            logger.warning(f"Avaliação exata inviável ({exc}); usando Monte Carlo com {trials} tentativas")
    report, _ = monte_carlo(instance, strategy, trials, seed)
    return report
