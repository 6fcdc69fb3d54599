"""
Núcleo: distribuições discretas, modelo de instância e índices de reserva
"""
from core.distributions import DiscreteDistribution, capped, expectation_of_max
from core.instance import BoxSpec, DiscountKind, DiscountRule, Instance, VariantTag, validate
from core.indices import ReservationIndex, kleinberg_surrogate, reservation_index, reservation_value

__all__ = [
    "DiscreteDistribution",
    "capped",
    "expectation_of_max",
    "BoxSpec",
    "DiscountKind",
    "DiscountRule",
    "Instance",
    "VariantTag",
    "validate",
    "ReservationIndex",
    "kleinberg_surrogate",
    "reservation_index",
    "reservation_value",
]
