"""
Oráculo de força bruta: estratégia adaptativa ótima por expectimax
memoizado, sonda do gap de adaptatividade e cadeia de limites superiores
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from core.distributions import DiscreteDistribution, expectation_of_max, format_fraction
from core.indices import prophet_indices, reservation_index
from core.instance import BoxSpec, DiscountRule, Instance, VariantTag
from solver.hypergraph import build
from solver.submodular import SubmodularObjective, brute_force_best_matching
from strategies.realization import RealizationSource
from strategies.threshold import InspectionRecord, Strategy, StrategyTrace, make_trace
from utils.errors import CapacityError, ContractViolation

try:
    from config import GUARD_OVERRIDE, ORACLE_GUARDS, parse_guard_override
    from utils.logger import get_logger, log_check, log_guard, log_stage
except ImportError:
    GUARD_OVERRIDE = ""
    ORACLE_GUARDS = {"boxes": 3, "horizon": 6, "support": 3}

    def parse_guard_override(raw):
        return dict(ORACLE_GUARDS)

    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_check(logger, name, passed, lhs, rhs):
        logger.info(f"CHECK | name={name} | passed={passed}")

    def log_guard(logger, guard, limit, observed):
        logger.warning(f"GUARD | guard={guard} | limit={limit} | observed={observed}")

    def log_stage(logger, stage, **fields):
        logger.info(f"STAGE | stage={stage} | {fields}")

logger = get_logger(__name__)

# (caixa, instante, valor) ordenados por caixa
Records = Tuple[Tuple[int, int, Fraction], ...]
# (rodada t, rodada em que a próxima inspeção é permitida, registros)
State = Tuple[int, int, Records]

HALT = ("halt", None)
IDLE = ("idle", None)


def inspect_action(box: int) -> Tuple[str, int]:
    return ("inspect", box)


@dataclass(frozen=True)
class OracleGuards:
    boxes: int
    horizon: int
    support: int
    unsafe: bool = False

    @classmethod
    def from_config(cls, unsafe: bool = False, override: Optional[str] = None) -> "OracleGuards":
        raw = GUARD_OVERRIDE if override is None else override
        for item in raw.split(","):
            key = item.split("=", 1)[0].strip()
            if key and key not in ORACLE_GUARDS:
                logger.warning(f"PANDORA_GUARD_OVERRIDE: chave desconhecida '{key}' ignorada")
        guards = parse_guard_override(raw)
        return cls(boxes=guards["boxes"], horizon=guards["horizon"], support=guards["support"], unsafe=unsafe)

    def check(self, instance: Instance) -> None:
        if self.unsafe:
            return
        for guard, limit, observed in (
            ("oracle_boxes", self.boxes, instance.n),
            ("oracle_horizon", self.horizon, instance.horizon),
            ("oracle_support", self.support, instance.max_support),
        ):
            if observed > limit:
                log_guard(logger, guard, limit, observed)
                raise CapacityError(guard, limit, observed, hint="use --unsafe ou PANDORA_GUARD_OVERRIDE")


def halt_value(instance: Instance, records: Records, t: int) -> Fraction:
    """Melhor valor descontado coletável parando no início da rodada t (T = t - 1)"""
    best = Fraction(0)
    for box, time, value in records:
        best = max(best, instance.boxes[box].discount.apply(value, t - 1 - time))
    return best


def _idle_dominated(instance: Instance, t: int, ready: int, inspected: set) -> bool:
    if ready > t:
        return False
    for i, box in enumerate(instance.boxes):
        if i in inspected:
            continue
        for s in range(t + 1, instance.horizon + 1):
            if box.cost_at(s) != box.cost_at(t) or box.reward_at(s) != box.reward_at(t):
                return False
    return True


@dataclass
class OracleResult:
    """Valor ótimo e tabela de decisões estado -> ação para auditoria"""

    optimal_value: Fraction
    policy: Dict[State, Tuple[str, Optional[int]]]
    states: int

    def recompute_value(self, instance: Instance) -> Fraction:
        """Reavalia a política guardada por enumeração exata, sem o memo do oráculo"""
        from engine.evaluation import exact_expected_utility

        value = exact_expected_utility(instance, PolicyStrategy(self.policy))
        if value != self.optimal_value:
            raise ContractViolation(
                f"Política do oráculo vale {value}, expectimax informou {self.optimal_value}"
            )
        return value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "optimal_value": format_fraction(self.optimal_value),
            "optimal_value_float": float(self.optimal_value),
            "states": self.states,
            "root_action": _format_action(self.policy.get((1, 1, ()), HALT)),
        }


def _format_action(action: Tuple[str, Optional[int]]) -> str:
    kind, box = action
    return kind if box is None else f"{kind}:{box}"


def optimal_adaptive_oracle(
    instance: Instance,
    guards: Optional[OracleGuards] = None,
    prune_idle: bool = False,
) -> OracleResult:
    """
    Estratégia adaptativa ótima por expectimax

    Estado: (t, ready, registros). Ações: parar (coleta o melhor valor
    descontado com T = t - 1), esperar uma rodada, ou inspecionar uma caixa
    ainda fechada com custo presente em t >= ready. Em t = H + 1 só resta
    parar. Desempate: parar, inspecionar por id de caixa, esperar.

    Args:
        instance: Instância pequena
        guards: Limites de tamanho
        prune_idle: Descarta a espera quando nada muda esperando

    Returns:
        OracleResult
    """
    guards = guards or OracleGuards.from_config()
    guards.check(instance)
    memo: Dict[State, Fraction] = {}
    policy: Dict[State, Tuple[str, Optional[int]]] = {}
    horizon = instance.horizon

    def solve(t: int, ready: int, records: Records) -> Fraction:
        state = (t, ready, records)
        if state in memo:
            return memo[state]

        best_value = halt_value(instance, records, t)
        best_action = HALT
        if t <= horizon:
            inspected = {box for box, _, _ in records}
            if t >= ready:
                for i, box in enumerate(instance.boxes):
                    if i in inspected:
                        continue
                    cost = box.cost_at(t)
                    if cost is None:
                        continue
                    value = -cost
                    for v, prob in box.reward_at(t).support:
                        nxt = tuple(sorted(records + ((i, t, v),)))
                        value += prob * solve(t + 1, t + 1 + box.processing_time, nxt)
                    if value > best_value:
                        best_value, best_action = value, inspect_action(i)
            if not (prune_idle and _idle_dominated(instance, t, ready, inspected)):
                value = solve(t + 1, ready, records)
                if value > best_value:
                    best_value, best_action = value, IDLE

        memo[state] = best_value
        policy[state] = best_action
        return best_value

    value = solve(1, 1, ())
    log_stage(logger, "oracle", value=f"{float(value):.6f}", states=len(memo))
    return OracleResult(optimal_value=value, policy=policy, states=len(memo))


class PolicyStrategy(Strategy):
    """Executa uma tabela de decisões do oráculo"""

    strategy_id = "oracle"

    def __init__(self, policy: Dict[State, Tuple[str, Optional[int]]]):
        self.policy = policy

    def execute(self, instance: Instance, source: RealizationSource) -> StrategyTrace:
        t, ready = 1, 1
        state_records: Records = ()
        log: List[InspectionRecord] = []
        while True:
            state = (t, ready, state_records)
            if state not in self.policy:
                raise ContractViolation(f"Estado sem decisão na política: t={t}, ready={ready}")
            kind, box_id = self.policy[state]
            if kind == "halt":
                return make_trace(instance, self.strategy_id, log, t - 1)
            if kind == "idle":
                t += 1
                continue
            box = instance.boxes[box_id]
            value = source.draw(box_id, t, box.reward_at(t))
            log.append(InspectionRecord(box=box_id, time=t, value=value, cost=box.cost_at(t)))
            state_records = tuple(sorted(state_records + ((box_id, t, value),)))
            ready = t + 1 + box.processing_time
            t += 1


# === Verificações de limites ===

def zero_cost_capped(instance: Instance) -> Instance:
    """
    Instância restrita: recompensas Y_it, custo 0 onde presente, desconto
    identidade; p e H inalterados
    """
    boxes = []
    for i, box in enumerate(instance.boxes):
        costs, rewards = [], []
        for t in range(1, instance.horizon + 1):
            cost = box.cost_at(t)
            if cost is None:
                costs.append(None)
                rewards.append(box.reward_at(t))
                continue
            costs.append(Fraction(0))
            rewards.append(reservation_index(box.reward_at(t), cost, key=(i, t)).y_law)
        boxes.append(BoxSpec(costs=tuple(costs), processing_time=box.processing_time,
                             rewards=tuple(rewards), discount=DiscountRule.identity()))
    return Instance(boxes=tuple(boxes), horizon=instance.horizon, variant=instance.variant,
                    name=f"{instance.name}-capped" if instance.name else "capped")


def adaptivity_gap_probe(instance: Instance, guards: Optional[OracleGuards] = None) -> Dict[str, Any]:
    """
    Compara o ótimo adaptativo da instância restrita com o melhor emparelhamento

    Returns:
        Dicionário com adaptive_opt, best_matching_value, ratio e holds
        (best_matching >= adaptive / 2)
    """
    restricted = zero_cost_capped(instance)
    adaptive = optimal_adaptive_oracle(restricted, guards).optimal_value
    h = build(instance)
    _, best = brute_force_best_matching(SubmodularObjective.from_hypergraph(h), h)
    ratio = best / adaptive if adaptive else Fraction(1)
    holds = 2 * best >= adaptive
    log_check(logger, "adaptivity_gap", holds, 2 * best, adaptive)
    return {"adaptive_opt": adaptive, "best_matching_value": best, "ratio": ratio, "holds": holds}


def upper_bound_chain(instance: Instance, guards: Optional[OracleGuards] = None) -> Dict[str, Any]:
    """
    OPT <= 2 max_M f(M) em aritmética exata; em instâncias FIXED também
    OPT <= E[max Y]
    """
    oracle_value = optimal_adaptive_oracle(instance, guards).optimal_value
    h = build(instance)
    _, best = brute_force_best_matching(SubmodularObjective.from_hypergraph(h), h)
    result: Dict[str, Any] = {
        "oracle_value": oracle_value,
        "max_f": best,
        "upper_bound": 2 * best,
        "holds": oracle_value <= 2 * best,
    }
    log_check(logger, "matching_upper_bound", result["holds"], 2 * best, oracle_value)
    if instance.variant is VariantTag.FIXED:
        laws: List[DiscreteDistribution] = [index.y_law for index in prophet_indices(instance)]
        expected_max = expectation_of_max(laws, [1] * len(laws))
        result["expected_max_y"] = expected_max
        result["prophet_holds"] = oracle_value <= expected_max
        log_check(logger, "prophet_upper_bound", result["prophet_holds"], expected_max, oracle_value)
    return result
