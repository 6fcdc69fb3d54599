"""
Hipergrafo bipartido em blocos H(I) e seus emparelhamentos
Também a correspondência com a instância proxy (uma caixa por slot (i, t))
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from core.distributions import DiscreteDistribution, format_fraction
from core.indices import ReservationIndex, reservation_index
from core.instance import Instance
from utils.errors import CapacityError, StructuralError

try:
    from config import MATCHING_EDGE_GUARD
    from utils.logger import get_logger, log_guard
except ImportError:
    MATCHING_EDGE_GUARD = 40
    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_guard(logger, guard, limit, observed):
        logger.warning(f"GUARD | guard={guard} | limit={limit} | observed={observed}")

logger = get_logger(__name__)

EdgeId = Tuple[int, int]


@dataclass(frozen=True)
class HyperEdge:
    """
    Hiperaresta e(i, j): vértice esquerdo i e bloco de rodadas [j .. j + p_i]

    box é 0-based; start/end são rodadas 1-based.
    """

    box: int
    start: int
    end: int
    cost: Fraction
    r: Fraction
    y_law: DiscreteDistribution = field(compare=False, hash=False)

    @property
    def edge_id(self) -> EdgeId:
        return (self.box, self.start)

    @property
    def span(self) -> range:
        return range(self.start, self.end + 1)

    def covers(self, t: int) -> bool:
        return self.start <= t <= self.end

    def overlaps(self, other: "HyperEdge") -> bool:
        return self.start <= other.end and other.start <= self.end

    def conflicts(self, other: "HyperEdge") -> bool:
        return self.box == other.box or self.overlaps(other)

    def __str__(self) -> str:
        return f"e({self.box},{self.start})"


def edge_key(edge: HyperEdge) -> EdgeId:
    return edge.edge_id


@dataclass(frozen=True)
class Matching:
    """Conjunto de hiperarestas disjuntas"""

    edges: frozenset = frozenset()

    @classmethod
    def of(cls, edges: Iterable[HyperEdge]) -> "Matching":
        return cls(frozenset(edges))

    def sorted_edges(self) -> List[HyperEdge]:
        return sorted(self.edges, key=lambda e: (e.start, e.box))

    def encode(self) -> Tuple[EdgeId, ...]:
        """Codificação lexicográfica usada em desempates"""
        return tuple(sorted(e.edge_id for e in self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.sorted_edges())

    def to_json(self) -> List[List[int]]:
        return [[e.box, e.start] for e in sorted(self.edges, key=edge_key)]


@dataclass(frozen=True)
class BlockHypergraph:
    """H(I) = (L, R, E) com R estendido até H_ext = H + max p"""

    left_count: int
    right_count: int
    edges: Tuple[HyperEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {e.edge_id: pos for pos, e in enumerate(self.edges)})

    def __len__(self) -> int:
        return len(self.edges)

    def edge(self, box: int, start: int) -> HyperEdge:
        try:
            return self.edges[self._index[(box, start)]]
        except KeyError as exc:
            raise StructuralError(f"Aresta desconhecida e({box},{start})") from exc

    def position(self, edge: HyperEdge) -> int:
        pos = self._index.get(edge.edge_id)
        if pos is None or self.edges[pos] != edge:
            raise StructuralError(f"Aresta {edge} não pertence ao hipergrafo")
        return pos

    def contains(self, edge: HyperEdge) -> bool:
        pos = self._index.get(edge.edge_id)
        return pos is not None and self.edges[pos] == edge

    def edges_of_box(self, box: int) -> List[HyperEdge]:
        return [e for e in self.edges if e.box == box]

    def edges_covering(self, t: int) -> List[HyperEdge]:
        return [e for e in self.edges if e.covers(t)]

    def constraint_rows(self) -> List[List[int]]:
        """Linhas do politopo P: uma por vértice esquerdo e uma por rodada"""
        rows = []
        for box in range(self.left_count):
            rows.append([pos for pos, e in enumerate(self.edges) if e.box == box])
        for t in range(1, self.right_count + 1):
            rows.append([pos for pos, e in enumerate(self.edges) if e.covers(t)])
        return [row for row in rows if row]

    def density(self) -> Fraction:
        """d(P) = min sobre as linhas de b_linha / soma dos coeficientes"""
        rows = self.constraint_rows()
        if not rows:
            return Fraction(1)
        return Fraction(1, max(len(row) for row in rows))

    def frame(self) -> pd.DataFrame:
        """Arestas em formato tabular (i, j, span_end, cost, r, E[Y])"""
        return pd.DataFrame(
            [{
                "i": e.box,
                "j": e.start,
                "span_end": e.end,
                "cost": format_fraction(e.cost),
                "r": format_fraction(e.r),
                "E[Y]": format_fraction(e.y_law.expectation()),
            } for e in self.edges],
            columns=["i", "j", "span_end", "cost", "r", "E[Y]"],
        )


def build(instance: Instance) -> BlockHypergraph:
    """
    Constrói H(I): uma aresta por (i, j) com custo presente

    Args:
        instance: Instância validada

    Returns:
        BlockHypergraph com arestas ordenadas por (i, j)
    """
    right_count = instance.horizon + instance.max_processing
    edges = []
    for i, box in enumerate(instance.boxes):
        for j in range(1, instance.horizon + 1):
            cost = box.cost_at(j)
            if cost is None:
                continue
            end = j + box.processing_time
            if end > right_count:
                continue
            index: ReservationIndex = reservation_index(box.reward_at(j), cost, key=(i, j))
            edges.append(HyperEdge(box=i, start=j, end=end, cost=cost, r=index.r, y_law=index.y_law))
    edges.sort(key=edge_key)
    logger.debug(f"H(I) construído: |L|={instance.n}, |R|={right_count}, |E|={len(edges)}")
    return BlockHypergraph(left_count=instance.n, right_count=right_count, edges=tuple(edges))


def _check_members(h: BlockHypergraph, edges: Iterable[HyperEdge]) -> List[HyperEdge]:
    members = list(edges)
    for e in members:
        if not h.contains(e):
            raise StructuralError(f"Aresta {e} não pertence ao hipergrafo")
    return members


def is_matching(h: BlockHypergraph, edges: Iterable[HyperEdge]) -> bool:
    """
    Verifica se as arestas são duas a duas disjuntas

    Args:
        h: Hipergrafo
        edges: Subconjunto de h.edges

    Returns:
        True se não há vértice esquerdo compartilhado nem blocos sobrepostos
    """
    members = _check_members(h, edges)
    if len({e.box for e in members}) != len(members):
        return False
    ordered = sorted(members, key=lambda e: e.start)
    return all(prev.end < cur.start for prev, cur in zip(ordered, ordered[1:]))


def enumerate_matchings(h: BlockHypergraph, max_edges: Optional[int] = None) -> Iterator[Matching]:
    """
    Enumera todos os emparelhamentos com no máximo max_edges arestas

    Args:
        h: Hipergrafo (|E| <= guard)
        max_edges: Tamanho máximo (None = sem limite)

    Yields:
        Cada emparelhamento exatamente uma vez
    """
    if len(h.edges) > MATCHING_EDGE_GUARD:
        log_guard(logger, "matching_edges", MATCHING_EDGE_GUARD, len(h.edges))
        raise CapacityError("matching_edges", MATCHING_EDGE_GUARD, len(h.edges))
    limit = len(h.edges) if max_edges is None else max_edges
    edges = h.edges

    def extend(position: int, chosen: List[HyperEdge]) -> Iterator[Matching]:
        yield Matching.of(chosen)
        if len(chosen) >= limit:
            return
        for nxt in range(position, len(edges)):
            candidate = edges[nxt]
            if any(candidate.conflicts(e) for e in chosen):
                continue
            chosen.append(candidate)
            yield from extend(nxt + 1, chosen)
            chosen.pop()

    return extend(0, [])


def proxy_feasible_prefix(h: BlockHypergraph, ordered_edges: Sequence[HyperEdge]) -> bool:
    """Tupla pertence a F: emparelhamento com inícios estritamente crescentes"""
    if not all(h.contains(e) for e in ordered_edges):
        return False
    starts = [e.start for e in ordered_edges]
    if any(a >= b for a, b in zip(starts, starts[1:])):
        return False
    return is_matching(h, ordered_edges)


def induced_edges(h: BlockHypergraph, trace: Any) -> Tuple[HyperEdge, ...]:
    """
    Estratégia proxy de um traço: arestas e(i, t_i) na ordem de inspeção

    Args:
        h: Hipergrafo da instância
        trace: StrategyTrace (registros com box e time)

    Returns:
        Tupla de arestas
    """
    return tuple(h.edge(record.box, record.time) for record in trace.inspected)


def proxy_utility(trace: Any) -> Fraction:
    """Valor não descontado do traço na instância proxy: max V - soma dos custos"""
    best = max((record.value for record in trace.inspected), default=Fraction(0))
    return max(best, Fraction(0)) - sum((record.cost for record in trace.inspected), Fraction(0))
