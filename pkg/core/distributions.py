"""
Distribuições discretas de suporte finito com aritmética racional exata
Inclui o núcleo de E[max] usado por f(M) e pela extensão multilinear
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Sequence, Tuple, Union

from utils.errors import StructuralError

Number = Union[int, Fraction]


def to_fraction(value: Any) -> Fraction:
    """
    Converte valores de entrada em racional exato

    Args:
        value: int, Fraction, texto "a/b" ou decimal, ou float

    Returns:
        Fraction equivalente
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise StructuralError(f"Valor booleano não é numérico: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # repr mais curto evita ruído binário (0.1 -> 1/10)
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise StructuralError(f"Número inválido: '{value}'") from exc
    raise StructuralError(f"Tipo numérico não suportado: {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    """Serializa racional como "num/den" (ou inteiro)"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class DiscreteDistribution:
    """
    Lei de recompensa de suporte finito.

    support guarda pares (valor, probabilidade) ordenados por valor.
    A construção direta não valida; use from_pairs + violations().
    """

    support: Tuple[Tuple[Fraction, Fraction], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[Any]]) -> "DiscreteDistribution":
        """Normaliza pares: funde valores repetidos, remove átomos nulos, ordena"""
        merged = {}
        for pair in pairs:
            if len(pair) != 2:
                raise StructuralError(f"Átomo deve ser (valor, prob): {pair!r}")
            value, prob = to_fraction(pair[0]), to_fraction(pair[1])
            merged[value] = merged.get(value, Fraction(0)) + prob
        atoms = tuple((v, p) for v, p in sorted(merged.items()) if p != 0)
        return cls(support=atoms)

    @classmethod
    def point_mass(cls, value: Any) -> "DiscreteDistribution":
        return cls(support=((to_fraction(value), Fraction(1)),))

    # === Consultas ===

    @property
    def values(self) -> List[Fraction]:
        return [v for v, _ in self.support]

    @property
    def probs(self) -> List[Fraction]:
        return [p for _, p in self.support]

    @property
    def max_value(self) -> Fraction:
        return self.support[-1][0] if self.support else Fraction(0)

    def __len__(self) -> int:
        return len(self.support)

    def is_deterministic(self) -> bool:
        return len(self.support) == 1

    def expectation(self) -> Fraction:
        return sum((v * p for v, p in self.support), Fraction(0))

    def tail_prob(self, threshold: Number) -> Fraction:
        """P(V > threshold)"""
        return sum((p for v, p in self.support if v > threshold), Fraction(0))

    def cdf(self, threshold: Number) -> Fraction:
        """P(V <= threshold)"""
        return 1 - self.tail_prob(threshold)

    def expected_excess(self, r: Number) -> Fraction:
        """E[(V - r)^+]"""
        return sum(((v - r) * p for v, p in self.support if v > r), Fraction(0))

    def map_values(self, fn) -> "DiscreteDistribution":
        return DiscreteDistribution.from_pairs((fn(v), p) for v, p in self.support)

    def violations(self) -> List[str]:
        """
        Verifica os invariantes da lei

        Returns:
            Lista de mensagens (vazia se válida)
        """
        problems = []
        if not self.support:
            problems.append("suporte vazio")
            return problems
        total = sum(self.probs, Fraction(0))
        if total != 1:
            problems.append(f"probabilidades somam {total}, esperado 1")
        for value, prob in self.support:
            if value < 0:
                problems.append(f"valor negativo {value}")
            if prob <= 0 or prob > 1:
                problems.append(f"probabilidade fora de (0,1]: {prob}")
        values = self.values
        if any(a >= b for a, b in zip(values, values[1:])):
            problems.append("valores do suporte não estritamente crescentes")
        return problems

    def sample(self, rng) -> Fraction:
        """
        Sorteia um valor por CDF inversa

        O float do gerador é convertido exatamente em racional, então o
        resultado depende apenas do estado do gerador.
        """
        u = Fraction(float(rng.random()))
        cumulative = Fraction(0)
        for value, prob in self.support:
            cumulative += prob
            if u < cumulative:
                return value
        return self.support[-1][0]

    # === Serialização ===

    def to_json(self) -> List[List[str]]:
        return [[format_fraction(v), format_fraction(p)] for v, p in self.support]

    @classmethod
    def from_json(cls, data: Any) -> "DiscreteDistribution":
        if not isinstance(data, list):
            raise StructuralError(f"Distribuição deve ser lista de pares, recebido {type(data).__name__}")
        return cls.from_pairs(data)

    def __str__(self) -> str:
        atoms = ", ".join(f"({format_fraction(v)}, {format_fraction(p)})" for v, p in self.support)
        return "{" + atoms + "}"


def capped(dist: DiscreteDistribution, cap: Number) -> DiscreteDistribution:
    """
    Lei de min(V, cap); átomos acima do teto se fundem em um átomo no teto

    Args:
        dist: Lei de V
        cap: Teto

    Returns:
        Nova distribuição
    """
    cap = to_fraction(cap)
    return dist.map_values(lambda v: min(v, cap))


def expectation_of_max(
    dists: Sequence[DiscreteDistribution],
    inclusion_probs: Sequence[Any],
) -> Fraction:
    """
    E[max] sobre elementos presentes independentemente com prob q_e

    Varre a união dos suportes com P(max <= v) = prod_e (1 - q_e * P(V_e > v)),
    com max do conjunto vazio = 0 e valores não negativos:
    E[M] = soma_k (g_k - g_{k-1}) * P(M > g_{k-1}), g_0 = 0.

    Args:
        dists: Leis dos elementos
        inclusion_probs: Probabilidades de inclusão (racionais em [0,1])

    Returns:
        Valor esperado exato
    """
    if len(dists) != len(inclusion_probs):
        raise StructuralError(
            f"expectation_of_max: {len(dists)} leis para {len(inclusion_probs)} probabilidades"
        )
    probs = [to_fraction(q) for q in inclusion_probs]
    if any(q < 0 or q > 1 for q in probs):
        raise StructuralError("expectation_of_max: probabilidade de inclusão fora de [0,1]")

    active = [(d, q) for d, q in zip(dists, probs) if q != 0]
    if not active:
        return Fraction(0)

    grid = sorted({v for d, _ in active for v in d.values if v > 0})
    total = Fraction(0)
    previous = Fraction(0)
    for point in grid:
        no_exceed = Fraction(1)
        for dist, q in active:
            no_exceed *= 1 - q * dist.tail_prob(previous)
        total += (point - previous) * (1 - no_exceed)
        previous = point
    return total
