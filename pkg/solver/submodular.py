"""
Submodular Block Matching: objetivo f(M) = E[max Y], extensão multilinear exata,
Measured Continuous Greedy sobre o politopo de emparelhamentos e baselines
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from core.distributions import expectation_of_max, to_fraction
from solver import simplex
from solver.hypergraph import BlockHypergraph, HyperEdge, Matching, edge_key, enumerate_matchings
from utils.errors import ContractViolation, PreconditionError, StructuralError

try:
    from config import DEFAULT_B, LOCAL_SEARCH_EPSILON, LP_MODE, MCG_STEPS, ROUNDING_REPEATS, DEFAULT_SEED
    from utils.logger import get_logger, log_stage
except ImportError:
    DEFAULT_B = Fraction(5227, 10000)
    LOCAL_SEARCH_EPSILON = Fraction(1, 2)
    LP_MODE = "exact_lp"
    MCG_STEPS = 100
    ROUNDING_REPEATS = 50
    DEFAULT_SEED = 0
    import logging

    def get_logger(name):
        return logging.getLogger(name)

    def log_stage(logger, stage, **fields):
        logger.info(f"STAGE | stage={stage} | {fields}")

logger = get_logger(__name__)

Vector = Union[Sequence[Any], Mapping[HyperEdge, Any]]


class LpMode(Enum):
    """Como a direção do MCG é obtida"""
    EXACT_LP = "exact_lp"                  # simplex racional próprio
    GREEDY_DIRECTION = "greedy_direction"  # heurística (sinalizada no relatório)
    HIGHS = "highs"                        # scipy.optimize.linprog, verificado exatamente


@dataclass(frozen=True)
class SolverConfig:
    """Parâmetros do solver de Submodular Block Matching"""

    b: Fraction = DEFAULT_B
    mcg_steps: int = MCG_STEPS
    lp_mode: LpMode = LpMode(LP_MODE)
    rounding_repeats: int = ROUNDING_REPEATS
    local_search_epsilon: Fraction = LOCAL_SEARCH_EPSILON
    seed: int = DEFAULT_SEED

    def violations(self) -> List[str]:
        problems = []
        if not (0 < self.b <= 1):
            problems.append(f"b deve estar em (0, 1], recebido {self.b}")
        if self.mcg_steps < 10:
            problems.append(f"mcg_steps deve ser >= 10, recebido {self.mcg_steps}")
        if self.rounding_repeats < 1:
            problems.append(f"rounding_repeats deve ser >= 1, recebido {self.rounding_repeats}")
        if self.local_search_epsilon <= 0:
            problems.append(f"epsilon deve ser positivo, recebido {self.local_search_epsilon}")
        return problems


class SubmodularObjective:
    """
    f(M) = E[max_{e em M} Y_e] sobre o conjunto base de arestas.

    Avaliações são memorizadas por conjunto de ids de aresta.
    """

    def __init__(self, edges: Sequence[HyperEdge]):
        self.edges: Tuple[HyperEdge, ...] = tuple(edges)
        self._positions = {e.edge_id: pos for pos, e in enumerate(self.edges)}
        self._cache: Dict[frozenset, Fraction] = {}
        self._float_kernel: Optional["_FloatKernel"] = None

    @classmethod
    def from_hypergraph(cls, h: BlockHypergraph) -> "SubmodularObjective":
        return cls(h.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def position(self, edge: HyperEdge) -> int:
        pos = self._positions.get(edge.edge_id)
        if pos is None or self.edges[pos] != edge:
            raise StructuralError(f"Aresta {edge} fora do conjunto base")
        return pos

    def evaluate(self, members: Iterable[HyperEdge]) -> Fraction:
        members = list(members)
        key = frozenset(self.edges[self.position(e)].edge_id for e in members)
        cached = self._cache.get(key)
        if cached is None:
            laws = [self.edges[self._positions[k]].y_law for k in sorted(key)]
            cached = expectation_of_max(laws, [1] * len(laws))
            self._cache[key] = cached
        return cached

    def as_vector(self, x: Vector) -> List[Fraction]:
        if isinstance(x, Mapping):
            vector = [Fraction(0)] * len(self.edges)
            for edge, value in x.items():
                vector[self.position(edge)] = to_fraction(value)
            return vector
        if len(x) != len(self.edges):
            raise StructuralError(f"Vetor com {len(x)} entradas para {len(self.edges)} arestas")
        return [to_fraction(v) for v in x]

    def float_kernel(self) -> "_FloatKernel":
        if self._float_kernel is None:
            self._float_kernel = _FloatKernel(self.edges)
        return self._float_kernel


class _FloatKernel:
    # F(x) = soma_k gap_k * (1 - prod_e (1 - x_e * tail[e, k])) em precisão dupla

    def __init__(self, edges: Sequence[HyperEdge]):
        grid = sorted({v for e in edges for v in e.y_law.values if v > 0})
        previous = [Fraction(0)] + grid[:-1]
        self.gaps = np.array([float(g - p) for g, p in zip(grid, previous)], dtype=float)
        self.tails = np.array(
            [[float(e.y_law.tail_prob(p)) for p in previous] for e in edges],
            dtype=float,
        ).reshape(len(edges), len(grid))

    def value(self, x: np.ndarray) -> float:
        if self.tails.size == 0:
            return 0.0
        factors = 1.0 - x[:, None] * self.tails
        return float(np.dot(self.gaps, 1.0 - np.prod(factors, axis=0)))

    def marginals(self, x: np.ndarray) -> np.ndarray:
        """F(x; x_e <- 1) - F(x) para toda aresta e"""
        m = len(x)
        if m == 0 or self.tails.size == 0:
            return np.zeros(m)
        factors = 1.0 - x[:, None] * self.tails
        ones = np.ones((1, factors.shape[1]))
        # prefix[e] = prod_{f < e} fator_f ; suffix[e] = prod_{f > e} fator_f
        prefix = np.cumprod(np.vstack([ones, factors[:-1]]), axis=0)
        suffix = np.vstack([np.cumprod(factors[::-1], axis=0)[::-1][1:], ones])
        leave_one_out = prefix * suffix
        gain = leave_one_out * self.tails * (1.0 - x)[:, None]
        return gain @ self.gaps


def f_eval(obj: SubmodularObjective, members: Iterable[HyperEdge]) -> Fraction:
    """
    Valor exato f(M) = E[max Y] (M não precisa ser emparelhamento)

    Args:
        obj: Objetivo
        members: Subconjunto do conjunto base

    Returns:
        f(M) racional
    """
    return obj.evaluate(members)


def multilinear_eval(obj: SubmodularObjective, x: Vector) -> Fraction:
    """F(x) = E[f(R(x))] exato, pela varredura de produtos de CDF"""
    vector = obj.as_vector(x)
    if any(v < 0 or v > 1 for v in vector):
        raise StructuralError("multilinear_eval: entradas fora de [0,1]")
    return expectation_of_max([e.y_law for e in obj.edges], vector)


def partial_derivative(obj: SubmodularObjective, x: Vector, edge: HyperEdge) -> Fraction:
    """F(x; x_e <- 1) - F(x; x_e <- 0)"""
    vector = obj.as_vector(x)
    pos = obj.position(edge)
    high, low = list(vector), list(vector)
    high[pos], low[pos] = Fraction(1), Fraction(0)
    laws = [e.y_law for e in obj.edges]
    return expectation_of_max(laws, high) - expectation_of_max(laws, low)


@dataclass(frozen=True)
class FractionalSolution:
    """Ponto x em bP sobre as arestas do hipergrafo"""

    edges: Tuple[HyperEdge, ...]
    x: Tuple[Fraction, ...]
    b: Fraction
    value: Optional[Fraction] = None
    lp_mode: LpMode = LpMode.EXACT_LP
    heuristic_direction: bool = False

    def as_dict(self) -> Dict[HyperEdge, Fraction]:
        return dict(zip(self.edges, self.x))

    @cached_property
    def positions(self) -> Dict[Tuple[int, int], int]:
        return {e.edge_id: pos for pos, e in enumerate(self.edges)}

    @cached_property
    def x_float(self) -> Dict[Tuple[int, int], float]:
        return {e.edge_id: float(v) for e, v in zip(self.edges, self.x)}

    @cached_property
    def block_mass_float(self) -> Dict[int, float]:
        mass: Dict[int, float] = {}
        for e, v in zip(self.edges, self.x):
            mass[e.box] = mass.get(e.box, 0.0) + float(v)
        return mass

    def support(self) -> List[HyperEdge]:
        return [e for e, v in zip(self.edges, self.x) if v > 0]

    def violations(self, h: BlockHypergraph) -> List[str]:
        """Verificação exata de x em bP (as duas famílias de desigualdades)"""
        problems = []
        if len(self.x) != len(h.edges):
            return [f"x com {len(self.x)} entradas para {len(h.edges)} arestas"]
        for e, v in zip(h.edges, self.x):
            if v < 0 or v > 1:
                problems.append(f"x[{e}] = {v} fora de [0,1]")
        for box in range(h.left_count):
            load = sum((v for e, v in zip(h.edges, self.x) if e.box == box), Fraction(0))
            if load > self.b:
                problems.append(f"vértice esquerdo {box}: soma {load} > b")
        for t in range(1, h.right_count + 1):
            load = sum((v for e, v in zip(h.edges, self.x) if e.covers(t)), Fraction(0))
            if load > self.b:
                problems.append(f"rodada {t}: soma {load} > b")
        return problems


# === Direção de LP ===

def _greedy_direction(h: BlockHypergraph, weights: Sequence[float]) -> List[Fraction]:
    order = sorted((pos for pos, w in enumerate(weights) if w > 0),
                   key=lambda pos: (-weights[pos], h.edges[pos].edge_id))
    chosen: List[HyperEdge] = []
    direction = [Fraction(0)] * len(h.edges)
    for pos in order:
        edge = h.edges[pos]
        if any(edge.conflicts(other) for other in chosen):
            continue
        chosen.append(edge)
        direction[pos] = Fraction(1)
    return direction


def _lp_rows(h: BlockHypergraph, columns: Sequence[int]) -> List[List[int]]:
    rows = []
    for box in range(h.left_count):
        row = [1 if h.edges[pos].box == box else 0 for pos in columns]
        if any(row):
            rows.append(row)
    for t in range(1, h.right_count + 1):
        row = [1 if h.edges[pos].covers(t) else 0 for pos in columns]
        if any(row):
            rows.append(row)
    return rows


def _in_polytope(h: BlockHypergraph, direction: Sequence[Fraction]) -> bool:
    return not FractionalSolution(edges=h.edges, x=tuple(direction), b=Fraction(1)).violations(h)


def lp_max_direction(
    h: BlockHypergraph,
    weights: Sequence[Any],
    mode: LpMode = LpMode.EXACT_LP,
) -> Tuple[Fraction, ...]:
    """
    Vértice de P que maximiza <weights, x>

    Arestas com peso <= 0 ficam em zero.

    Args:
        h: Hipergrafo
        weights: Pesos por aresta (ordem de h.edges)
        mode: EXACT_LP, GREEDY_DIRECTION ou HIGHS

    Returns:
        Vetor direção (racional)
    """
    if len(weights) != len(h.edges):
        raise StructuralError(f"{len(weights)} pesos para {len(h.edges)} arestas")
    float_weights = [float(w) for w in weights]
    columns = [pos for pos, w in enumerate(float_weights) if w > 0]
    direction = [Fraction(0)] * len(h.edges)
    if not columns:
        return tuple(direction)

    if mode is LpMode.GREEDY_DIRECTION:
        return tuple(_greedy_direction(h, float_weights))

    rows = _lp_rows(h, columns)
    if mode is LpMode.HIGHS:
        result = optimize.linprog(
            c=[-float_weights[pos] for pos in columns],
            A_ub=rows, b_ub=[1] * len(rows), bounds=(0, 1), method="highs",
        )
        if result.status == 0:
            for pos, value in zip(columns, result.x):
                direction[pos] = Fraction(float(value)).limit_denominator(1000)
            if _in_polytope(h, direction):
                return tuple(direction)
        logger.warning("Solução HiGHS não verificada exatamente; usando simplex racional")
        direction = [Fraction(0)] * len(h.edges)

    objective = [Fraction(float_weights[pos]).limit_denominator(10 ** 9) for pos in columns]
    result = simplex.maximize(objective, rows, [1] * len(rows))
    if result.status != "optimal":
        raise ContractViolation(f"LP da direção terminou com status {result.status}")
    for pos, value in zip(columns, result.x):
        direction[pos] = value
    return tuple(direction)


# === Measured Continuous Greedy ===

def measured_continuous_greedy(
    obj: SubmodularObjective,
    h: BlockHypergraph,
    config: Optional[SolverConfig] = None,
) -> FractionalSolution:
    """
    Measured Continuous Greedy discretizado em T passos de tamanho b/T

    Em cada passo: pesos w_e = F(x; x_e <- 1) - F(x) (precisão dupla),
    direção d = lp_max_direction(w) e x_e <- x_e + (b/T) d_e (1 - x_e) em racionais.

    Args:
        obj: Objetivo sobre h.edges
        h: Hipergrafo
        config: Parâmetros do solver

    Returns:
        FractionalSolution em bP com F(x) exato
    """
    config = config or SolverConfig()
    problems = config.violations()
    if problems:
        raise PreconditionError("; ".join(problems))
    if obj.edges != h.edges:
        raise StructuralError("Objetivo e hipergrafo com conjuntos base diferentes")

    m = len(h.edges)
    step = config.b / config.mcg_steps
    x = [Fraction(0)] * m
    kernel = obj.float_kernel()
    heuristic = config.lp_mode is LpMode.GREEDY_DIRECTION

    for _ in range(config.mcg_steps if m else 0):
        current = np.array([float(v) for v in x], dtype=float)
        weights = kernel.marginals(current)
        direction = lp_max_direction(h, weights, config.lp_mode)
        for pos, d in enumerate(direction):
            if d:
                x[pos] += step * d * (1 - x[pos])

    value = multilinear_eval(obj, x) if m else Fraction(0)
    solution = FractionalSolution(
        edges=h.edges, x=tuple(x), b=config.b, value=value,
        lp_mode=config.lp_mode, heuristic_direction=heuristic,
    )
    problems = solution.violations(h)
    if problems:
        raise ContractViolation(f"MCG produziu x fora de bP: {problems[:3]}")
    log_stage(logger, "mcg", edges=m, steps=config.mcg_steps, b=float(config.b),
              lp_mode=config.lp_mode.value, F=f"{float(value):.6f}")
    return solution


# === Baselines e oráculo ===

def brute_force_best_matching(obj: SubmodularObjective, h: BlockHypergraph) -> Tuple[Matching, Fraction]:
    """
    Melhor emparelhamento por enumeração exaustiva

    Desempate pela menor codificação lexicográfica.

    Returns:
        (emparelhamento, f do emparelhamento)
    """
    best, best_value = Matching(), Fraction(0)
    for matching in enumerate_matchings(h):
        value = obj.evaluate(matching.edges)
        if value > best_value or (value == best_value and matching.encode() < best.encode()):
            best, best_value = matching, value
    return best, best_value


def greedy_matching(obj: SubmodularObjective, h: BlockHypergraph) -> Matching:
    """Guloso por ganho marginal restrito a adições viáveis"""
    chosen: List[HyperEdge] = []
    current = Fraction(0)
    while True:
        best_gain, best_edge = Fraction(0), None
        for edge in h.edges:
            if edge in chosen or any(edge.conflicts(other) for other in chosen):
                continue
            gain = obj.evaluate(chosen + [edge]) - current
            if gain > best_gain:
                best_gain, best_edge = gain, edge
        if best_edge is None:
            return Matching.of(chosen)
        chosen.append(best_edge)
        current += best_gain


def _repair(members: Iterable[HyperEdge], added: Sequence[HyperEdge]) -> Optional[List[HyperEdge]]:
    for first in range(len(added)):
        for second in range(first + 1, len(added)):
            if added[first].conflicts(added[second]):
                return None
    kept = [e for e in members if not any(e.conflicts(a) for a in added)]
    return sorted(kept + list(added), key=edge_key)


def local_search_bipartite(
    obj: SubmodularObjective,
    edges: Sequence[HyperEdge],
    epsilon: Any = LOCAL_SEARCH_EPSILON,
) -> Matching:
    """
    Busca local para emparelhamento bipartido (inspeção instantânea)

    Movimentos: adicionar uma aresta removendo seus conflitos, ou adicionar
    duas arestas compatíveis removendo os conflitos delas. Um movimento só é
    aceito se melhora f por um fator (1 + eps/|E|).

    Args:
        obj: Objetivo
        edges: Arestas candidatas (todas com bloco unitário)
        epsilon: Tolerância de melhoria

    Returns:
        Emparelhamento localmente ótimo
    """
    edges = sorted(edges, key=edge_key)
    for edge in edges:
        if edge.end != edge.start:
            raise PreconditionError(f"Busca local exige blocos unitários; {edge} cobre {edge.start}..{edge.end}")
    if not edges:
        return Matching()

    factor = 1 + to_fraction(epsilon) / len(edges)
    current = min(edges, key=lambda e: (-obj.evaluate([e]), e.edge_id))
    members = [current]
    value = obj.evaluate(members)

    improved = True
    rounds = 0
    while improved:
        improved = False
        rounds += 1
        outside = [e for e in edges if e not in members]
        moves = [(e,) for e in outside]
        moves += [(a, c) for idx, a in enumerate(outside) for c in outside[idx + 1:]]
        for added in moves:
            candidate = _repair(members, added)
            if candidate is None:
                continue
            candidate_value = obj.evaluate(candidate)
            if candidate_value > value * factor or (value == 0 and candidate_value > 0):
                members, value = candidate, candidate_value
                improved = True
                break

    logger.debug(f"Busca local: {rounds} rodadas, |M|={len(members)}, f={float(value):.6f}")
    return Matching.of(members)
