"""
Estratégias de limiar executáveis
Inclui pi_main (cronograma via Submodular Block Matching), a variante de
inspeção instantânea, pi_fixed (limiar de profeta) e a baseline de Weitzman
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import pandas as pd

from core.distributions import DiscreteDistribution, expectation_of_max, format_fraction
from core.indices import ReservationIndex, prophet_indices
from core.instance import Instance, VariantTag
from solver.crs import DEFAULT_SCHEME, CrsScheme, solve_block_matching
from solver.hypergraph import BlockHypergraph, HyperEdge, Matching, build, is_matching
from solver.submodular import SolverConfig, SubmodularObjective, local_search_bipartite
from strategies.realization import RealizationSource
from utils.errors import ContractViolation, PreconditionError, StructuralError

try:
    from config import LOCAL_SEARCH_EPSILON
    from utils.logger import get_logger, log_stage
except ImportError:
    LOCAL_SEARCH_EPSILON = Fraction(1, 2)
    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_stage(logger, stage, **fields):
        logger.info(f"STAGE | stage={stage} | {fields}")

logger = get_logger(__name__)


class OrderMode(Enum):
    """Ordem de inspeção de pi_fixed"""
    HALF_THRESHOLD = "half_threshold"    # ordem dos índices, tau = E[max Y]/2
    HEURISTIC_ORDER = "heuristic_order"  # E[Y] decrescente (heurística rotulada)


# === Traços ===

@dataclass(frozen=True)
class InspectionRecord:
    box: int
    time: int
    value: Fraction
    cost: Fraction


@dataclass(frozen=True)
class StrategyTrace:
    """
    Registro de uma execução: inspeções, instante de parada T e coleta

    utility = valor descontado coletado - soma dos custos pagos
    """

    strategy_id: str
    inspected: Tuple[InspectionRecord, ...]
    halted_at: int
    collected: Optional[Tuple[int, Fraction]]
    utility: Fraction

    @property
    def collected_box(self) -> Optional[int]:
        return None if self.collected is None else self.collected[0]

    @property
    def inspected_boxes(self) -> List[int]:
        return [record.box for record in self.inspected]

    @property
    def decay_loss(self) -> Fraction:
        """V - valor descontado da caixa coletada (0 sem decaimento)"""
        if self.collected is None:
            return Fraction(0)
        record = next(rec for rec in self.inspected if rec.box == self.collected[0])
        return record.value - self.collected[1]

    def flags(self, n: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Indicadores (I, A) por caixa"""
        inspected = tuple(1 if i in self.inspected_boxes else 0 for i in range(n))
        accepted = tuple(1 if i == self.collected_box else 0 for i in range(n))
        return inspected, accepted

    def recompute_utility(self, instance: Instance) -> Fraction:
        """Rededuz a utilidade do log, com custos lidos da instância"""
        best = Fraction(0)
        paid = Fraction(0)
        for record in self.inspected:
            box = instance.boxes[record.box]
            cost = box.cost_at(record.time)
            if cost is None:
                raise ContractViolation(f"Inspeção da caixa {record.box} em t={record.time} com custo ausente")
            paid += cost
            best = max(best, box.discount.apply(record.value, self.halted_at - record.time))
        return best - paid

    def to_rows(self, trial: int = 0) -> List[Dict[str, Any]]:
        rows = []
        for step, record in enumerate(self.inspected):
            rows.append({
                "trial": trial,
                "strategy": self.strategy_id,
                "step": step,
                "box": record.box,
                "time": record.time,
                "value": format_fraction(record.value),
                "cost": format_fraction(record.cost),
                "halted_at": self.halted_at,
                "collected_box": "" if self.collected is None else self.collected[0],
                "utility": format_fraction(self.utility),
            })
        if not rows:
            rows.append({
                "trial": trial, "strategy": self.strategy_id, "step": "", "box": "", "time": "",
                "value": "", "cost": "", "halted_at": self.halted_at, "collected_box": "",
                "utility": format_fraction(self.utility),
            })
        return rows


def make_trace(
    instance: Instance,
    strategy_id: str,
    records: Sequence[InspectionRecord],
    halted_at: int,
) -> StrategyTrace:
    """
    Fecha um traço: coleta o maior valor descontado disponível em T

    Desempate pela inspeção mais recente: com decaimento nulo, a caixa
    coletada é a que acabou de ser aberta.
    """
    collected = None
    best_key = None
    for record in records:
        discounted = instance.boxes[record.box].discount.apply(record.value, halted_at - record.time)
        key = (discounted, record.time)
        if best_key is None or key > best_key:
            best_key = key
            collected = (record.box, discounted)
    reward = collected[1] if collected else Fraction(0)
    utility = reward - sum((record.cost for record in records), Fraction(0))
    return StrategyTrace(
        strategy_id=strategy_id,
        inspected=tuple(records),
        halted_at=halted_at,
        collected=collected,
        utility=utility,
    )


def traces_frame(traces: Sequence[StrategyTrace]) -> pd.DataFrame:
    rows = [row for trial, trace in enumerate(traces) for row in trace.to_rows(trial)]
    return pd.DataFrame(rows, columns=["trial", "strategy", "step", "box", "time", "value", "cost",
                                       "halted_at", "collected_box", "utility"])


class Strategy:
    """Base das estratégias: execute(instance, source) -> StrategyTrace"""

    strategy_id = "strategy"

    def execute(self, instance: Instance, source: RealizationSource) -> StrategyTrace:
        raise NotImplementedError

    def iter_traces(self, instance: Instance, sources: Iterator[RealizationSource]) -> Iterator[StrategyTrace]:
        for source in sources:
            yield self.execute(instance, source)


# === pi_main: cronograma + limiar ===

@dataclass(frozen=True)
class ScheduleSlot:
    box: int
    time: int
    r: Fraction
    y_law: DiscreteDistribution


@dataclass(frozen=True)
class Schedule:
    """Slots com t estritamente crescente e limiar tau"""

    slots: Tuple[ScheduleSlot, ...]
    threshold: Fraction
    matching_value: Fraction = Fraction(0)

    def violations(self, h: BlockHypergraph) -> List[str]:
        problems = []
        times = [slot.time for slot in self.slots]
        if any(a >= b for a, b in zip(times, times[1:])):
            problems.append("slots fora de ordem estritamente crescente de t")
        try:
            if not is_matching(h, [h.edge(slot.box, slot.time) for slot in self.slots]):
                problems.append("arestas induzidas não formam emparelhamento")
        except StructuralError as exc:
            problems.append(str(exc))
        return problems

    def to_json(self) -> Dict[str, Any]:
        return {
            "threshold": format_fraction(self.threshold),
            "matching_value": format_fraction(self.matching_value),
            "slots": [{"box": s.box, "time": s.time, "r": format_fraction(s.r)} for s in self.slots],
        }


def pi_main_schedule(
    instance: Instance,
    matching: Union[Matching, Sequence[HyperEdge]],
    h: Optional[BlockHypergraph] = None,
) -> Schedule:
    """
    Fase 1 de pi_main: ordena o emparelhamento por início e fixa tau = f(M)/2

    Args:
        instance: Instância
        matching: Emparelhamento de H(instance)
        h: Hipergrafo já construído (opcional)

    Returns:
        Schedule
    """
    h = h or build(instance)
    edges = list(matching.edges if isinstance(matching, Matching) else matching)
    if not is_matching(h, edges):
        raise StructuralError("pi_main_schedule: arestas não formam emparelhamento")
    obj = SubmodularObjective.from_hypergraph(h)
    value = obj.evaluate(edges)
    ordered = sorted(edges, key=lambda e: (e.start, e.box))
    slots = tuple(ScheduleSlot(box=e.box, time=e.start, r=e.r, y_law=e.y_law) for e in ordered)
    return Schedule(slots=slots, threshold=value / 2, matching_value=value)


def pi_main_execute(
    instance: Instance,
    schedule: Schedule,
    source: RealizationSource,
    strategy_id: str = "main",
) -> StrategyTrace:
    """
    Fase 2 de pi_main

    Pula slots com r < tau; nos demais paga o custo, sorteia V e para
    coletando se V >= tau. Sem aceitação, para na última inspeção e coleta
    o melhor valor descontado.
    """
    tau = schedule.threshold
    records: List[InspectionRecord] = []
    for slot in schedule.slots:
        if slot.r < tau:
            continue
        box = instance.boxes[slot.box]
        cost = box.cost_at(slot.time)
        if cost is None:
            raise ContractViolation(f"Slot ({slot.box}, {slot.time}) sem custo presente")
        value = source.draw(slot.box, slot.time, box.reward_at(slot.time))
        records.append(InspectionRecord(box=slot.box, time=slot.time, value=value, cost=cost))
        if value >= tau:
            return make_trace(instance, strategy_id, records, slot.time)
    halted_at = records[-1].time if records else 0
    return make_trace(instance, strategy_id, records, halted_at)


class ScheduleStrategy(Strategy):
    """Executa um Schedule (pi_main ou pi_instant)"""

    def __init__(self, schedule: Schedule, strategy_id: str = "main"):
        self.schedule = schedule
        self.strategy_id = strategy_id

    def execute(self, instance: Instance, source: RealizationSource) -> StrategyTrace:
        return pi_main_execute(instance, self.schedule, source, self.strategy_id)


def pi_main(
    instance: Instance,
    config: Optional[SolverConfig] = None,
    scheme: CrsScheme = DEFAULT_SCHEME,
    oracle: bool = False,
) -> Tuple[ScheduleStrategy, Dict[str, Any]]:
    """
    pi_main completo: H(I) -> MCG -> arredondamento -> cronograma

    Returns:
        (estratégia, relatório do solver)
    """
    h = build(instance)
    solved = solve_block_matching(h, config, oracle=oracle, scheme=scheme)
    schedule = pi_main_schedule(instance, solved["matching"], h)
    report = dict(solved["report"])
    report["threshold"] = schedule.threshold
    log_stage(logger, "schedule", slots=len(schedule.slots), tau=f"{float(schedule.threshold):.6f}")
    return ScheduleStrategy(schedule, "main"), report


def pi_instant(instance: Instance, epsilon: Any = LOCAL_SEARCH_EPSILON) -> Schedule:
    """
    Cronograma da variante de inspeção instantânea (busca local bipartida)

    Args:
        instance: Instância INSTANT
        epsilon: Tolerância da busca local

    Returns:
        Schedule executado por pi_main_execute
    """
    if instance.variant is not VariantTag.INSTANT:
        raise PreconditionError(f"pi_instant exige variante INSTANT, recebido {instance.variant.value}")
    h = build(instance)
    obj = SubmodularObjective.from_hypergraph(h)
    matching = local_search_bipartite(obj, h.edges, epsilon)
    return pi_main_schedule(instance, matching, h)


# === pi_fixed: ordem fixa com limiar de profeta ===

def prophet_threshold(indices: Sequence[ReservationIndex]) -> Fraction:
    """tau = E[max_i Y_i] / 2"""
    laws = [index.y_law for index in indices]
    return expectation_of_max(laws, [1] * len(laws)) / 2


class FixedOrderStrategy(Strategy):
    """
    pi_fixed: percorre as caixas numa ordem fixa com limiar tau

    Caixa com r < tau é pulada sem custo; após inspecionar a caixa i o
    relógio avança 1 + p_i rodadas.
    """

    def __init__(self, instance: Instance, order_mode: OrderMode = OrderMode.HALF_THRESHOLD):
        if instance.variant is not VariantTag.FIXED:
            raise PreconditionError(f"pi_fixed exige variante FIXED, recebido {instance.variant.value}")
        self.order_mode = order_mode
        self.indices = prophet_indices(instance)
        self.threshold = prophet_threshold(self.indices)
        self.max_y = 2 * self.threshold
        if order_mode is OrderMode.HEURISTIC_ORDER:
            self.order = sorted(range(instance.n), key=lambda i: (-self.indices[i].expected_y, i))
        else:
            self.order = list(range(instance.n))
        self.strategy_id = "fixed" if order_mode is OrderMode.HALF_THRESHOLD else "fixed_heuristic"

    def execute(self, instance: Instance, source: RealizationSource) -> StrategyTrace:
        tau = self.threshold
        t = 1
        records: List[InspectionRecord] = []
        for i in self.order:
            if self.indices[i].r < tau:
                continue
            box = instance.boxes[i]
            cost = box.cost_at(t)
            if cost is None:
                continue
            value = source.draw(i, t, box.reward_at(t))
            records.append(InspectionRecord(box=i, time=t, value=value, cost=cost))
            if value >= tau:
                return make_trace(instance, self.strategy_id, records, t)
            t += 1 + box.processing_time
        halted_at = records[-1].time if records else 0
        return make_trace(instance, self.strategy_id, records, halted_at)


def pi_fixed(instance: Instance, order_mode: OrderMode = OrderMode.HALF_THRESHOLD) -> FixedOrderStrategy:
    return FixedOrderStrategy(instance, order_mode)


# === Baseline clássica ===

class WeitzmanStrategy(Strategy):
    """
    Regra de Weitzman para o Pandora clássico: inspeciona em ordem
    decrescente de r enquanto r > 0 e r > melhor valor observado
    """

    strategy_id = "weitzman"

    def __init__(self, instance: Instance):
        if not instance.is_classic():
            raise PreconditionError("weitzman_baseline exige instância clássica (FIXED, identidade, p = 0)")
        self.indices = prophet_indices(instance)
        self.order = sorted(range(instance.n), key=lambda i: (-self.indices[i].r, i))

    def execute(self, instance: Instance, source: RealizationSource) -> StrategyTrace:
        records: List[InspectionRecord] = []
        best: Optional[Fraction] = None
        t = 1
        for i in self.order:
            r = self.indices[i].r
            if r <= 0 or (best is not None and best >= r):
                break
            box = instance.boxes[i]
            cost = box.cost_at(t)
            if cost is None:
                continue
            value = source.draw(i, t, box.reward_at(t))
            records.append(InspectionRecord(box=i, time=t, value=value, cost=cost))
            best = value if best is None else max(best, value)
            t += 1
        halted_at = records[-1].time if records else 0
        return make_trace(instance, self.strategy_id, records, halted_at)


def weitzman_baseline(instance: Instance) -> WeitzmanStrategy:
    return WeitzmanStrategy(instance)


# === Funções de conveniência ===

STRATEGY_NAMES = ("main", "instant", "fixed", "fixed_heuristic", "weitzman")


def build_strategy(
    name: str,
    instance: Instance,
    config: Optional[SolverConfig] = None,
) -> Tuple[Strategy, Dict[str, Any]]:
    """
    Constrói uma estratégia pelo nome usado na CLI

    Returns:
        (estratégia, relatório auxiliar)
    """
    config = config or SolverConfig()
    if name == "main":
        return pi_main(instance, config)
    if name == "instant":
        schedule = pi_instant(instance, config.local_search_epsilon)
        return ScheduleStrategy(schedule, "instant"), {"threshold": schedule.threshold,
                                                       "f_value": schedule.matching_value}
    if name == "fixed":
        strategy = pi_fixed(instance, OrderMode.HALF_THRESHOLD)
        return strategy, {"threshold": strategy.threshold, "expected_max_y": strategy.max_y}
    if name == "fixed_heuristic":
        strategy = pi_fixed(instance, OrderMode.HEURISTIC_ORDER)
        return strategy, {"threshold": strategy.threshold, "expected_max_y": strategy.max_y}
    if name == "weitzman":
        return weitzman_baseline(instance), {}
    raise StructuralError(f"Estratégia desconhecida: {name!r} (opções: {', '.join(STRATEGY_NAMES)})")
