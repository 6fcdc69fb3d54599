"""
Modelo de instância do Pandora Over Time
Caixas com custos e leis dependentes do tempo, tempos de processamento e desconto de valor
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core.distributions import DiscreteDistribution, format_fraction, to_fraction
from utils.errors import StructuralError


class DiscountKind(Enum):
    """Tipos de desconto aplicados ao valor realizado"""
    IDENTITY = "identity"
    COMMIT = "commit"                  # 0 para tau > 0
    MULTIPLICATIVE = "multiplicative"  # gamma^tau
    TABLE = "table"                    # multiplicador explícito por tau


class VariantTag(Enum):
    """Variantes do problema"""
    GENERAL = "general"
    INSTANT = "instant"  # todos os p_i = 0
    FIXED = "fixed"      # custos e leis constantes no tempo


@dataclass(frozen=True)
class Violation:
    """Violação de invariante (dado, não exceção)"""
    field: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: [{self.rule}] {self.message}"


@dataclass(frozen=True)
class DiscountRule:
    """Regra de desconto v(V, tau) com v(V, 0) = V e não crescente em tau"""

    kind: DiscountKind = DiscountKind.IDENTITY
    factor: Optional[Fraction] = None
    multipliers: Tuple[Fraction, ...] = ()

    @classmethod
    def identity(cls) -> "DiscountRule":
        return cls(DiscountKind.IDENTITY)

    @classmethod
    def commit(cls) -> "DiscountRule":
        return cls(DiscountKind.COMMIT)

    @classmethod
    def multiplicative(cls, factor: Any) -> "DiscountRule":
        return cls(DiscountKind.MULTIPLICATIVE, factor=to_fraction(factor))

    @classmethod
    def table(cls, multipliers: Sequence[Any]) -> "DiscountRule":
        return cls(DiscountKind.TABLE, multipliers=tuple(to_fraction(m) for m in multipliers))

    def multiplier(self, elapsed: int) -> Fraction:
        if elapsed < 0:
            raise StructuralError(f"Tempo decorrido negativo: {elapsed}")
        if self.kind is DiscountKind.IDENTITY:
            return Fraction(1)
        if self.kind is DiscountKind.COMMIT:
            return Fraction(1) if elapsed == 0 else Fraction(0)
        if self.kind is DiscountKind.MULTIPLICATIVE:
            return Fraction(self.factor) ** elapsed
        # Tabela além do comprimento fica presa no último valor
        return self.multipliers[min(elapsed, len(self.multipliers) - 1)]

    def apply(self, value: Fraction, elapsed: int) -> Fraction:
        """Valor descontado após `elapsed` rodadas entre inspeção e coleta"""
        return value * self.multiplier(elapsed)

    def violations(self, prefix: str) -> List[Violation]:
        problems = []
        if self.kind is DiscountKind.MULTIPLICATIVE:
            if self.factor is None or not (0 <= self.factor <= 1):
                problems.append(Violation(prefix, "range", f"fator gamma fora de [0,1]: {self.factor}"))
        elif self.kind is DiscountKind.TABLE:
            table = self.multipliers
            if not table:
                problems.append(Violation(prefix, "identity", "tabela de desconto vazia"))
                return problems
            if table[0] != 1:
                problems.append(Violation(prefix, "identity", f"multiplicador em tau=0 deve ser 1, recebido {table[0]}"))
            if any(m < 0 for m in table):
                problems.append(Violation(prefix, "range", "multiplicador negativo"))
            if any(b > a for a, b in zip(table, table[1:])):
                problems.append(Violation(prefix, "monotonicity", "tabela de desconto crescente em tau"))
        return problems

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind is DiscountKind.MULTIPLICATIVE:
            data["factor"] = format_fraction(self.factor)
        elif self.kind is DiscountKind.TABLE:
            data["multipliers"] = [format_fraction(m) for m in self.multipliers]
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "DiscountRule":
        try:
            kind = DiscountKind(data.get("kind", "identity"))
        except ValueError as exc:
            raise StructuralError(f"Tipo de desconto desconhecido: {data.get('kind')!r}") from exc
        if kind is DiscountKind.MULTIPLICATIVE:
            return cls.multiplicative(data["factor"])
        if kind is DiscountKind.TABLE:
            return cls.table(data["multipliers"])
        return cls(kind)


@dataclass(frozen=True)
class BoxSpec:
    """
    Caixa i: custo c_i(t) (None = AUSENTE), tempo de processamento p_i,
    lei V_i(t) e desconto. Tabelas indexadas por t-1, t em [1..H].
    """

    costs: Tuple[Optional[Fraction], ...]
    processing_time: int
    rewards: Tuple[DiscreteDistribution, ...]
    discount: DiscountRule = field(default_factory=DiscountRule.identity)

    @classmethod
    def constant(cls, cost: Any, law: DiscreteDistribution, horizon: int,
                 processing_time: int = 0,
                 discount: Optional[DiscountRule] = None) -> "BoxSpec":
        return cls(
            costs=tuple(to_fraction(cost) for _ in range(horizon)),
            processing_time=processing_time,
            rewards=tuple(law for _ in range(horizon)),
            discount=discount or DiscountRule.identity(),
        )

    def cost_at(self, t: int) -> Optional[Fraction]:
        if t < 1 or t > len(self.costs):
            return None
        return self.costs[t - 1]

    def reward_at(self, t: int) -> DiscreteDistribution:
        return self.rewards[t - 1]

    def is_available(self, t: int) -> bool:
        return self.cost_at(t) is not None

    def is_time_invariant(self) -> bool:
        return len(set(self.costs)) <= 1 and len(set(self.rewards)) <= 1


@dataclass(frozen=True)
class Instance:
    """Instância I = (c_i, p_i, (V_it), v_i) com horizonte H"""

    boxes: Tuple[BoxSpec, ...]
    horizon: int
    variant: VariantTag = VariantTag.GENERAL
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.boxes)

    @property
    def total_processing(self) -> int:
        return sum(box.processing_time for box in self.boxes)

    @property
    def max_processing(self) -> int:
        return max((box.processing_time for box in self.boxes), default=0)

    @property
    def max_support(self) -> int:
        return max((len(law) for box in self.boxes for law in box.rewards), default=0)

    @classmethod
    def classic(cls, costs: Sequence[Any], laws: Sequence[DiscreteDistribution],
                name: str = "") -> "Instance":
        """Pandora clássico: FIXED, desconto identidade, p = 0, H = n"""
        if len(costs) != len(laws):
            raise StructuralError("Instance.classic: custos e leis com tamanhos diferentes")
        horizon = max(len(costs), 1)
        boxes = tuple(BoxSpec.constant(c, law, horizon) for c, law in zip(costs, laws))
        return cls(boxes=boxes, horizon=horizon, variant=VariantTag.FIXED, name=name)

    def is_classic(self) -> bool:
        return (
            self.variant is VariantTag.FIXED
            and all(box.processing_time == 0 for box in self.boxes)
            and all(box.discount.kind is DiscountKind.IDENTITY for box in self.boxes)
        )


def validate(instance: Instance) -> List[Violation]:
    """
    Verifica todos os invariantes da instância

    Args:
        instance: Instância a verificar

    Returns:
        Lista de violações (vazia se a instância é bem formada)
    """
    problems: List[Violation] = []
    horizon = instance.horizon

    if horizon < 1:
        problems.append(Violation("horizon", "positive", f"H deve ser positivo, recebido {horizon}"))
    required = instance.n + instance.total_processing
    if horizon < required:
        problems.append(Violation(
            "horizon", "horizon-bound",
            f"H = {horizon} < n + soma(p) = {required}"
        ))

    for i, box in enumerate(instance.boxes):
        prefix = f"boxes[{i}]"
        if len(box.costs) != horizon:
            problems.append(Violation(f"{prefix}.cost", "length", f"{len(box.costs)} entradas, esperado {horizon}"))
        if len(box.rewards) != horizon:
            problems.append(Violation(f"{prefix}.rewards", "length", f"{len(box.rewards)} entradas, esperado {horizon}"))
        if not isinstance(box.processing_time, int) or box.processing_time < 0:
            problems.append(Violation(f"{prefix}.p", "nonnegative-integer", f"p inválido: {box.processing_time!r}"))
        for t, cost in enumerate(box.costs, start=1):
            if cost is not None and cost < 0:
                problems.append(Violation(f"{prefix}.cost[{t}]", "nonnegative", f"custo negativo {cost}"))
        for t, law in enumerate(box.rewards, start=1):
            for message in law.violations():
                problems.append(Violation(f"{prefix}.rewards[{t}]", "distribution", message))
        problems.extend(box.discount.violations(f"{prefix}.discount"))

        if instance.variant is VariantTag.FIXED and not box.is_time_invariant():
            problems.append(Violation(prefix, "fixed-variant", "custos/leis variam no tempo em instância FIXED"))
        if instance.variant is VariantTag.INSTANT and box.processing_time != 0:
            problems.append(Violation(f"{prefix}.p", "instant-variant", f"p = {box.processing_time} em instância INSTANT"))

    return problems
