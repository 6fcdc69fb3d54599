"""
Valores de reserva, leis capadas Y = min(V, r) e a identidade de Kleinberg
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, List, Tuple

from scipy import optimize

from core.distributions import DiscreteDistribution, capped, to_fraction
from core.instance import Instance, VariantTag
from utils.errors import ContractViolation, PreconditionError

try:
    from config import BISECTION_MAX_ITER, RESERVATION_TOLERANCE
    from utils.logger import get_logger
except ImportError:
    BISECTION_MAX_ITER = 200
    RESERVATION_TOLERANCE = 1e-9
    import logging

    def get_logger(name):
        return logging.getLogger(name)

logger = get_logger(__name__)


class ReservationMethod(Enum):
    """Método de cálculo da raiz de E[(V - r)^+] = c"""
    EXACT = "exact"          # raiz racional no segmento linear
    BISECTION = "bisection"  # scipy.optimize.bisect


@dataclass(frozen=True)
class ReservationIndex:
    """Índice de reserva de um slot (i, t) ou de uma caixa i"""
    key: Hashable
    r: Fraction
    y_law: DiscreteDistribution
    residual: Fraction = Fraction(0)

    @property
    def expected_y(self) -> Fraction:
        return self.y_law.expectation()


def _exact_root(dist: DiscreteDistribution, cost: Fraction) -> Fraction:
    # E[(V - r)^+] é linear por partes com quebras no suporte: no segmento
    # abaixo de v_k vale S - P*r, com S e P acumulados dos átomos acima.
    atoms = list(reversed(dist.support))
    partial_sum, partial_prob = Fraction(0), Fraction(0)
    for index, (value, prob) in enumerate(atoms):
        partial_sum += value * prob
        partial_prob += prob
        lower = atoms[index + 1][0] if index + 1 < len(atoms) else None
        if lower is None or partial_sum - partial_prob * lower >= cost:
            return (partial_sum - cost) / partial_prob
    return dist.expectation() - cost


def _bisection_root(dist: DiscreteDistribution, cost: Fraction) -> Fraction:
    target = float(cost)
    low = float(dist.expectation() - cost)
    high = float(dist.max_value)
    if low >= high:
        return Fraction(high)

    def residual(r: float) -> float:
        return float(dist.expected_excess(Fraction(r))) - target

    # Inclinação de E[(V-r)^+] tem módulo <= 1: xtol também limita o resíduo
    root = optimize.bisect(residual, low, high, xtol=RESERVATION_TOLERANCE / 2,
                           maxiter=BISECTION_MAX_ITER)
    return Fraction(root)


def reservation_value(
    dist: DiscreteDistribution,
    cost: Any,
    method: ReservationMethod = ReservationMethod.EXACT,
) -> Fraction:
    """
    Resolve E[(V - r)^+] = c

    c = 0 devolve o maior valor do suporte; c > E[V] devolve a raiz
    negativa E[V] - c do ramo linear.

    Args:
        dist: Lei de V
        cost: Custo de inspeção
        method: EXACT (padrão) ou BISECTION

    Returns:
        Valor de reserva r
    """
    cost = to_fraction(cost)
    if cost == 0:
        return dist.max_value
    mean = dist.expectation()
    if cost >= mean:
        return mean - cost
    if method is ReservationMethod.BISECTION:
        return _bisection_root(dist, cost)
    return _exact_root(dist, cost)


def reservation_index(
    dist: DiscreteDistribution,
    cost: Any,
    key: Hashable = None,
    method: ReservationMethod = ReservationMethod.EXACT,
) -> ReservationIndex:
    """
    Constrói o índice de reserva completo de um slot

    Args:
        dist: Lei de V
        cost: Custo
        key: Identificador (i, t) ou i
        method: Método da raiz

    Returns:
        ReservationIndex com Y = min(V, max(r, 0)) e resíduo da equação
    """
    cost = to_fraction(cost)
    r = reservation_value(dist, cost, method)
    residual = dist.expected_excess(r) - cost if 0 <= cost <= dist.expectation() else Fraction(0)
    if abs(residual) > RESERVATION_TOLERANCE:
        logger.warning(f"Resíduo de reserva acima da tolerância: key={key} | residual={float(residual):.3e}")
    return ReservationIndex(key=key, r=r, y_law=capped(dist, max(r, Fraction(0))), residual=residual)


def indices_for_instance(instance: Instance) -> Dict[Tuple[int, int], ReservationIndex]:
    """Índices de todos os slots (i, t) com custo presente"""
    indices = {}
    for i, box in enumerate(instance.boxes):
        for t in range(1, instance.horizon + 1):
            cost = box.cost_at(t)
            if cost is None:
                continue
            indices[(i, t)] = reservation_index(box.reward_at(t), cost, key=(i, t))
    logger.debug(f"Índices calculados: {len(indices)} slots em n={instance.n}, H={instance.horizon}")
    return indices


def prophet_indices(instance: Instance) -> List[ReservationIndex]:
    """
    Índices por caixa de uma instância FIXED (a instância de profeta Y_i)

    Caixas sem custo presente recebem r = -inf efetivo (Y = 0 e nunca inspecionadas).
    """
    if instance.variant is not VariantTag.FIXED:
        raise PreconditionError(f"prophet_indices exige variante FIXED, recebido {instance.variant.value}")
    result = []
    for i, box in enumerate(instance.boxes):
        cost = box.cost_at(1)
        if cost is None:
            result.append(ReservationIndex(key=i, r=Fraction(-1), y_law=DiscreteDistribution.point_mass(0)))
            continue
        result.append(reservation_index(box.reward_at(1), cost, key=i))
    return result


def kleinberg_surrogate(
    weighted_traces: Iterable[Tuple[Fraction, Any]],
    reservations: Dict[Tuple[int, int], ReservationIndex],
) -> Fraction:
    """
    E[soma_i A_i * Y_i] sobre uma distribuição enumerada de traços

    Cada traço expõe `inspected` (registros com box, time, value) e
    `collected_box`. Y do box aceito é min(V, r) do slot em que foi inspecionado.

    Args:
        weighted_traces: Pares (probabilidade, traço)
        reservations: Índices por slot (i, t)

    Returns:
        Valor exato do substituto
    """
    total = Fraction(0)
    for prob, trace in weighted_traces:
        accepted = trace.collected_box
        if accepted is None:
            continue
        record = next((rec for rec in trace.inspected if rec.box == accepted), None)
        if record is None:
            raise ContractViolation(f"Traço aceita a caixa {accepted} sem inspecioná-la (A > I)")
        index = reservations[(record.box, record.time)]
        total += prob * min(record.value, index.r)
    return total
