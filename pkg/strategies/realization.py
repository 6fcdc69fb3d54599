"""
Fontes de realização: de onde as estratégias tiram os valores V sorteados
Uma mesma implementação de estratégia serve à simulação e à enumeração exata
"""
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

import numpy as np

from core.distributions import DiscreteDistribution, to_fraction
from utils.errors import RealizationExhausted


class RealizationSource:
    """Interface: draw(box, t, law) devolve o valor realizado"""

    def draw(self, box: int, t: int, law: DiscreteDistribution) -> Fraction:
        raise NotImplementedError


class RngSource(RealizationSource):
    """Amostra de um gerador numpy (simulação)"""

    def __init__(self, rng: Optional[np.random.Generator] = None, seed: Optional[int] = None):
        self.rng = rng if rng is not None else np.random.default_rng(seed)

    def draw(self, box: int, t: int, law: DiscreteDistribution) -> Fraction:
        return law.sample(self.rng)


class ScriptedSource(RealizationSource):
    """Devolve valores fixados, em ordem"""

    def __init__(self, values: Iterable):
        self.values: List[Fraction] = [to_fraction(v) for v in values]
        self.position = 0

    def draw(self, box: int, t: int, law: DiscreteDistribution) -> Fraction:
        if self.position >= len(self.values):
            raise RealizationExhausted(f"Fonte roteirizada esgotada na caixa {box}, t={t}", law)
        value = self.values[self.position]
        self.position += 1
        return value


class BranchSource(RealizationSource):
    """
    Reproduz uma sequência fixa de índices de átomos.

    Ao pedir um sorteio além das escolhas conhecidas, levanta
    RealizationExhausted carregando a lei: o enumerador ramifica ali.
    """

    def __init__(self, choices: Sequence[int] = ()):
        self.choices = list(choices)
        self.position = 0
        self.probability = Fraction(1)

    def draw(self, box: int, t: int, law: DiscreteDistribution) -> Fraction:
        if self.position >= len(self.choices):
            raise RealizationExhausted(f"Ramo novo na caixa {box}, t={t}", law)
        value, prob = law.support[self.choices[self.position]]
        self.position += 1
        self.probability *= prob
        return value
