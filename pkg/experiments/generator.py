"""
Gerador reprodutível de instâncias aleatórias
"""
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np

from core.distributions import DiscreteDistribution
from core.instance import BoxSpec, DiscountKind, DiscountRule, Instance, VariantTag, validate
from utils.errors import ValidationError

try:
    from utils.logger import get_logger
except ImportError:
    import logging

    def get_logger(name):
        return logging.getLogger(name)

logger = get_logger(__name__)


@dataclass(frozen=True)
class GeneratorParams:
    """
    Parâmetros do gerador

    Args:
        n: Número de caixas
        horizon: H pedido (elevado a n + soma(p) quando menor; None = mínimo)
        support_size: Átomos por lei
        value_max: Valores inteiros em [0, value_max]
        cost_max: Custos em [0, cost_max] com denominador cost_denominator
        cost_denominator: Granularidade dos custos
        max_processing: p_i sorteado em [0, max_processing]
        discount_kind: Tipo de desconto de todas as caixas
        variant: GENERAL, INSTANT ou FIXED
        absent_rate: Probabilidade de um custo AUSENTE (slot indisponível)
        classic: Pandora clássico (FIXED, identidade, p = 0, H = n)
    """

    n: int = 3
    horizon: Optional[int] = None
    support_size: int = 2
    value_max: int = 10
    cost_max: int = 3
    cost_denominator: int = 2
    max_processing: int = 0
    discount_kind: DiscountKind = DiscountKind.IDENTITY
    variant: VariantTag = VariantTag.GENERAL
    absent_rate: float = 0.0
    classic: bool = False

    def violations(self) -> List[str]:
        problems = []
        if self.n < 1:
            problems.append(f"n deve ser >= 1, recebido {self.n}")
        if self.horizon is not None and self.horizon < 1:
            problems.append(f"horizon deve ser >= 1, recebido {self.horizon}")
        if not 1 <= self.support_size <= self.value_max + 1:
            problems.append(f"support_size deve estar em [1, value_max + 1], recebido {self.support_size}")
        if self.cost_max < 0 or self.cost_denominator < 1:
            problems.append("cost_max >= 0 e cost_denominator >= 1 são obrigatórios")
        if self.max_processing < 0:
            problems.append(f"max_processing negativo: {self.max_processing}")
        if not 0 <= self.absent_rate < 1:
            problems.append(f"absent_rate deve estar em [0, 1), recebido {self.absent_rate}")
        if self.variant is VariantTag.INSTANT and self.max_processing > 0:
            problems.append("variante INSTANT exige max_processing = 0")
        if self.classic and (self.max_processing > 0 or self.discount_kind is not DiscountKind.IDENTITY):
            problems.append("classic exige max_processing = 0 e desconto identidade")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["discount_kind"] = self.discount_kind.value
        data["variant"] = self.variant.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneratorParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"Parâmetros de gerador desconhecidos: {sorted(unknown)}", sorted(unknown))
        values = dict(data)
        try:
            if "discount_kind" in values:
                values["discount_kind"] = DiscountKind(values["discount_kind"])
            if "variant" in values:
                values["variant"] = VariantTag(values["variant"])
        except ValueError as exc:
            raise ValidationError(f"Parâmetro de gerador inválido: {exc}", [str(exc)]) from exc
        return cls(**values)


def _random_law(rng: np.random.Generator, params: GeneratorParams) -> DiscreteDistribution:
    values = rng.choice(params.value_max + 1, size=params.support_size, replace=False)
    weights = rng.integers(1, 5, size=params.support_size)
    total = int(weights.sum())
    return DiscreteDistribution.from_pairs(
        (int(v), Fraction(int(w), total)) for v, w in zip(values, weights)
    )


def _random_cost(rng: np.random.Generator, params: GeneratorParams) -> Optional[Fraction]:
    if params.absent_rate and rng.random() < params.absent_rate:
        return None
    return Fraction(int(rng.integers(0, params.cost_max * params.cost_denominator + 1)), params.cost_denominator)


def _random_discount(rng: np.random.Generator, kind: DiscountKind, horizon: int) -> DiscountRule:
    if kind is DiscountKind.COMMIT:
        return DiscountRule.commit()
    if kind is DiscountKind.MULTIPLICATIVE:
        k = int(rng.integers(1, 5))
        return DiscountRule.multiplicative(Fraction(k, k + 1))
    if kind is DiscountKind.TABLE:
        multipliers = [Fraction(1)]
        for _ in range(horizon - 1):
            drop = Fraction(int(rng.integers(0, 3)), 4)
            multipliers.append(max(Fraction(0), multipliers[-1] - drop * multipliers[-1]))
        return DiscountRule.table(multipliers)
    return DiscountRule.identity()


def generate_instance(params: GeneratorParams, seed: int, name: str = "") -> Instance:
    """
    Gera uma instância reprodutível a partir de default_rng(seed)

    Args:
        params: Parâmetros validados
        seed: Semente
        name: Nome da instância

    Returns:
        Instância que passa em core.instance.validate
    """
    problems = params.violations()
    if problems:
        raise ValidationError(f"Parâmetros de gerador inválidos: {'; '.join(problems)}", problems)

    rng = np.random.default_rng(seed)
    variant = VariantTag.FIXED if params.classic else params.variant
    processing = [
        0 if variant is VariantTag.INSTANT else int(rng.integers(0, params.max_processing + 1))
        for _ in range(params.n)
    ]
    if params.classic:
        horizon = params.n
    else:
        horizon = max(params.horizon or 0, params.n + sum(processing))

    boxes = []
    for i in range(params.n):
        discount = _random_discount(rng, params.discount_kind, horizon)
        if variant is VariantTag.FIXED:
            law = _random_law(rng, params)
            cost = _random_cost(rng, params)
            costs = (cost,) * horizon
            rewards = (law,) * horizon
        else:
            costs = tuple(_random_cost(rng, params) for _ in range(horizon))
            rewards = tuple(_random_law(rng, params) for _ in range(horizon))
        boxes.append(BoxSpec(costs=costs, processing_time=processing[i], rewards=rewards, discount=discount))

    instance = Instance(boxes=tuple(boxes), horizon=horizon, variant=variant, name=name or f"gen-{seed}")
    problems = validate(instance)
    if problems:
        raise ValidationError("Instância gerada inválida", problems)
    logger.debug(f"Instância gerada: seed={seed}, n={params.n}, H={horizon}, variante={variant.value}")
    return instance


def generate_batch(params: GeneratorParams, count: int, seed: int) -> List[Instance]:
    """Gera `count` instâncias com sementes derivadas de SeedSequence(seed)"""
    seeds = np.random.SeedSequence(seed).generate_state(count) if count else []
    return [generate_instance(params, int(s), name=f"gen-{seed}-{k}") for k, s in enumerate(seeds)]
