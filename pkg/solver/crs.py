"""
Esquemas de resolução de contenção (CRS) para o politopo de emparelhamentos
em blocos: matroide de partição (vértices esquerdos), intervalos (rodadas)
e a composição por interseção, mais o arredondamento e a auditoria de balanço
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from statsmodels.stats.proportion import proportion_confint

from solver.hypergraph import BlockHypergraph, HyperEdge, Matching, edge_key, is_matching
from solver.submodular import (
    FractionalSolution,
    SolverConfig,
    SubmodularObjective,
    brute_force_best_matching,
    greedy_matching,
    measured_continuous_greedy,
)
from utils.errors import CapacityError, ContractViolation

try:
    from config import AUDIT_TRIALS, BALANCE_ENUM_GUARD
    from utils.logger import get_logger, log_check, log_guard, log_stage
except ImportError:
    AUDIT_TRIALS = 100000
    BALANCE_ENUM_GUARD = 16
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


class MatroidRule(Enum):
    """Regra por bloco (vértice esquerdo)"""
    FAIR = "fair"        # CRS justo de posto 1: balanço (1 - e^{-b})/b
    UNIFORM = "uniform"  # sobrevivente uniforme via prioridades aleatórias


class IntervalRule(Enum):
    """Regra para blocos de rodadas sobrepostos"""
    MARKED = "marked"  # marcação com prob (1 - e^{-x})/x: balanço e^{-b}
    PLAIN = "plain"    # descarta se algum ativo anterior sobrepõe


class SchemeTag(Enum):
    MATROID = "matroid"
    INTERVAL = "interval"
    COMPOSED = "composed"


@dataclass(frozen=True)
class CrsScheme:
    matroid_rule: MatroidRule = MatroidRule.FAIR
    interval_rule: IntervalRule = IntervalRule.MARKED
    tag: SchemeTag = SchemeTag.COMPOSED

    def balance_constant(self, b: Fraction) -> Optional[float]:
        """
        Constante c do balanço certificado (None para as regras literais)

        Args:
            b: Escala do politopo

        Returns:
            c tal que Pr[e mantida] >= c * x_e
        """
        b = float(b)
        matroid = (1 - math.exp(-b)) / b if self.matroid_rule is MatroidRule.FAIR else None
        interval = math.exp(-b) if self.interval_rule is IntervalRule.MARKED else None
        if self.tag is SchemeTag.MATROID:
            return matroid
        if self.tag is SchemeTag.INTERVAL:
            return interval
        if matroid is None or interval is None:
            return None
        return matroid * interval


DEFAULT_SCHEME = CrsScheme()


@dataclass(frozen=True)
class ActiveSet:
    """R(x): cada aresta incluída independentemente com probabilidade x_e"""
    sampled: frozenset
    seed: Any = None


@dataclass(frozen=True)
class CrsTape:
    """Fitas de aleatoriedade de um ensaio: por bloco e por aresta"""
    block: np.ndarray
    priority: np.ndarray
    mark: np.ndarray

    @classmethod
    def draw(cls, rng: np.random.Generator, h: BlockHypergraph) -> "CrsTape":
        return cls(
            block=rng.random(h.left_count),
            priority=rng.random(len(h.edges)),
            mark=rng.random(len(h.edges)),
        )


@dataclass(frozen=True)
class CrsOutcome:
    kept: frozenset
    scheme_tag: SchemeTag


def sample_active_set(solution: FractionalSolution, rng: np.random.Generator, seed: Any = None) -> ActiveSet:
    draws = rng.random(len(solution.edges))
    sampled = frozenset(e for e, x, u in zip(solution.edges, solution.x, draws) if x > 0 and u < float(x))
    return ActiveSet(sampled=sampled, seed=seed)


def _positions(solution: FractionalSolution) -> Dict[Tuple[int, int], int]:
    return solution.positions


def _block_mass(solution: FractionalSolution, box: int) -> Fraction:
    return sum((x for e, x in zip(solution.edges, solution.x) if e.box == box), Fraction(0))


# === Probabilidades condicionais exatas ===

def matroid_keep_probability(
    solution: FractionalSolution,
    active: frozenset,
    edge: HyperEdge,
    rule: MatroidRule = MatroidRule.FAIR,
) -> Fraction:
    """
    Pr[e sobrevive no seu bloco | conjunto ativo]

    FAIR: q_e(A) = (1/X) (soma_{f em A-e} x_f/(|A|-1) + soma_{f fora de A} x_f/|A|)
    """
    if edge not in active:
        return Fraction(0)
    block = sorted((e for e in active if e.box == edge.box), key=edge_key)
    k = len(block)
    if k == 1:
        return Fraction(1)
    if rule is MatroidRule.UNIFORM:
        return Fraction(1, k)
    x = solution.as_dict()
    total = _block_mass(solution, edge.box)
    inside = sum((x[f] for f in block if f != edge), Fraction(0))
    outside = total - inside - x[edge]
    return (inside / (k - 1) + outside / k) / total


def mark_probability(x_e: Any) -> float:
    x_e = float(x_e)
    return 1.0 if x_e <= 0 else (1.0 - math.exp(-x_e)) / x_e


def interval_keep_probability(
    solution: FractionalSolution,
    active: frozenset,
    edge: HyperEdge,
    rule: IntervalRule = IntervalRule.MARKED,
) -> float:
    """Pr[e sobrevive à regra de intervalos | conjunto ativo]"""
    if edge not in active:
        return 0.0
    x = solution.x_float
    blockers = [f for f in active if f != edge and edge_key_start(f) < edge_key_start(edge) and f.overlaps(edge)]
    if rule is IntervalRule.PLAIN:
        return 0.0 if blockers else 1.0
    prob = mark_probability(x[edge.edge_id])
    for f in blockers:
        prob *= 1.0 - mark_probability(x[f.edge_id])
    return prob


def edge_key_start(edge: HyperEdge) -> Tuple[int, int]:
    return (edge.start, edge.box)


def keep_probability(
    solution: FractionalSolution,
    active: frozenset,
    edge: HyperEdge,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> float:
    """Pr[e em pi_x(A)] do esquema dado o conjunto ativo A"""
    matroid = float(matroid_keep_probability(solution, active, edge, scheme.matroid_rule))
    interval = interval_keep_probability(solution, active, edge, scheme.interval_rule)
    if scheme.tag is SchemeTag.MATROID:
        return matroid
    if scheme.tag is SchemeTag.INTERVAL:
        return interval
    return matroid * interval


# === Esquemas ===

def crs_matroid(
    solution: FractionalSolution,
    active: ActiveSet,
    tape: CrsTape,
    rule: MatroidRule = MatroidRule.FAIR,
) -> CrsOutcome:
    """
    Mantém no máximo uma aresta ativa por vértice esquerdo

    Args:
        solution: x em bP
        active: R(x)
        tape: Aleatoriedade do ensaio
        rule: FAIR (padrão) ou UNIFORM

    Returns:
        CrsOutcome (tag MATROID)
    """
    positions = _positions(solution)
    blocks: Dict[int, List[HyperEdge]] = {}
    for e in active.sampled:
        blocks.setdefault(e.box, []).append(e)

    kept = []
    for box, members in blocks.items():
        members.sort(key=edge_key)
        if len(members) == 1:
            kept.append(members[0])
            continue
        if rule is MatroidRule.UNIFORM:
            kept.append(min(members, key=lambda e: (tape.priority[positions[e.edge_id]], e.edge_id)))
            continue
        x = solution.x_float
        total = solution.block_mass_float[box]
        active_mass = sum(x[e.edge_id] for e in members)
        k = len(members)
        u = float(tape.block[box])
        cumulative = 0.0
        choice = members[-1]
        for e in members:
            inside = active_mass - x[e.edge_id]
            cumulative += (inside / (k - 1) + (total - active_mass) / k) / total
            if u < cumulative:
                choice = e
                break
        kept.append(choice)
    return CrsOutcome(kept=frozenset(kept), scheme_tag=SchemeTag.MATROID)


def crs_interval(
    solution: FractionalSolution,
    active: ActiveSet,
    tape: CrsTape,
    rule: IntervalRule = IntervalRule.MARKED,
) -> CrsOutcome:
    """
    Mantém arestas ativas cujos blocos não são sobrepostos por uma
    aresta (marcada) de início anterior; empates pelo id da aresta

    Returns:
        CrsOutcome (tag INTERVAL)
    """
    positions = _positions(solution)
    x = solution.x_float
    ordered = sorted(active.sampled, key=edge_key_start)
    if rule is IntervalRule.MARKED:
        ordered = [e for e in ordered if tape.mark[positions[e.edge_id]] < mark_probability(x[e.edge_id])]

    kept = []
    reach = 0
    for e in ordered:
        # Blocos são contíguos: basta o maior fim entre os marcados anteriores
        if e.start > reach:
            kept.append(e)
        reach = max(reach, e.end)
    return CrsOutcome(kept=frozenset(kept), scheme_tag=SchemeTag.INTERVAL)


def crs_composed(
    solution: FractionalSolution,
    active: ActiveSet,
    tape: CrsTape,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> CrsOutcome:
    """Interseção dos dois esquemas (aleatoriedade independente nas fitas)"""
    matroid = crs_matroid(solution, active, tape, scheme.matroid_rule)
    interval = crs_interval(solution, active, tape, scheme.interval_rule)
    return CrsOutcome(kept=matroid.kept & interval.kept, scheme_tag=SchemeTag.COMPOSED)


def apply_scheme(
    solution: FractionalSolution,
    active: ActiveSet,
    tape: CrsTape,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> CrsOutcome:
    if scheme.tag is SchemeTag.MATROID:
        return crs_matroid(solution, active, tape, scheme.matroid_rule)
    if scheme.tag is SchemeTag.INTERVAL:
        return crs_interval(solution, active, tape, scheme.interval_rule)
    return crs_composed(solution, active, tape, scheme)


# === Arredondamento ===

def round_fractional(
    obj: SubmodularObjective,
    h: BlockHypergraph,
    solution: FractionalSolution,
    repeats: int,
    seed: int = 0,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> Matching:
    """
    Amostra R(x) e aplica o CRS composto `repeats` vezes

    Cada ensaio usa uma subsequência própria de SeedSequence(seed);
    a redução escolhe o maior f, com desempate lexicográfico.

    Returns:
        Melhor emparelhamento encontrado
    """
    best, best_value = Matching(), Fraction(0)
    for child in np.random.SeedSequence(seed).spawn(repeats):
        rng = np.random.default_rng(child)
        active = sample_active_set(solution, rng, seed=child.spawn_key)
        tape = CrsTape.draw(rng, h)
        outcome = crs_composed(solution, active, tape, scheme)
        if not is_matching(h, outcome.kept):
            raise ContractViolation(f"CRS composto devolveu conjunto não disjunto: {sorted(map(str, outcome.kept))}")
        candidate = Matching(outcome.kept)
        value = obj.evaluate(candidate.edges)
        if value > best_value or (value == best_value and candidate.encode() < best.encode()):
            best, best_value = candidate, value
    return best


# === Auditorias ===

def exact_balance(
    h: BlockHypergraph,
    solution: FractionalSolution,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> Dict[HyperEdge, float]:
    """
    Pr[e em pi_x(R(x))] exato, enumerando todos os conjuntos ativos

    Args:
        h: Hipergrafo
        solution: x em bP
        scheme: Esquema

    Returns:
        Probabilidade de manutenção por aresta do suporte
    """
    support = solution.support()
    if len(support) > BALANCE_ENUM_GUARD:
        log_guard(logger, "balance_enumeration", BALANCE_ENUM_GUARD, len(support))
        raise CapacityError("balance_enumeration", BALANCE_ENUM_GUARD, len(support), "use crs_audit")
    x = solution.as_dict()
    result = {e: 0.0 for e in support}
    for pattern in product((False, True), repeat=len(support)):
        weight = 1.0
        for e, present in zip(support, pattern):
            weight *= float(x[e]) if present else 1.0 - float(x[e])
        if weight == 0.0:
            continue
        active = frozenset(e for e, present in zip(support, pattern) if present)
        for e in active:
            result[e] += weight * keep_probability(solution, active, e, scheme)
    return result


def monotonicity_check(
    h: BlockHypergraph,
    solution: FractionalSolution,
    samples: int,
    seed: int = 0,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> Dict[str, int]:
    """
    Verifica Pr[e em pi(A)] >= Pr[e em pi(B)] para A contido em B

    B = R(x) e A = subconjunto aleatório de B. Com a mesma fita, as regras
    determinísticas dada a fita (MARKED, PLAIN, UNIFORM) são checadas
    ponto a ponto; as probabilidades condicionais são comparadas sempre.

    Returns:
        Contagens {"samples", "pointwise_violations", "probability_violations"}
    """
    pointwise = probability = 0
    for child in np.random.SeedSequence(seed).spawn(samples):
        rng = np.random.default_rng(child)
        larger = sample_active_set(solution, rng)
        keep_draws = rng.random(len(solution.edges))
        positions = _positions(solution)
        smaller = ActiveSet(frozenset(e for e in larger.sampled if keep_draws[positions[e.edge_id]] < 0.5))
        tape = CrsTape.draw(rng, h)

        interval_big = crs_interval(solution, larger, tape, scheme.interval_rule).kept
        interval_small = crs_interval(solution, smaller, tape, scheme.interval_rule).kept
        pointwise += sum(1 for e in smaller.sampled if e in interval_big and e not in interval_small)
        if scheme.matroid_rule is MatroidRule.UNIFORM:
            matroid_big = crs_matroid(solution, larger, tape, scheme.matroid_rule).kept
            matroid_small = crs_matroid(solution, smaller, tape, scheme.matroid_rule).kept
            pointwise += sum(1 for e in smaller.sampled if e in matroid_big and e not in matroid_small)

        for e in smaller.sampled:
            if (keep_probability(solution, smaller.sampled, e, scheme)
                    < keep_probability(solution, larger.sampled, e, scheme) - 1e-12):
                probability += 1
    return {"samples": samples, "pointwise_violations": pointwise, "probability_violations": probability}


def crs_audit(
    h: BlockHypergraph,
    solution: FractionalSolution,
    trials: int = AUDIT_TRIALS,
    seed: int = 0,
    scheme: CrsScheme = DEFAULT_SCHEME,
    sigmas: float = 3.0,
) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """
    Auditoria Monte Carlo do balanço: Pr[e em pi_x(R(x))] >= c x_e

    O critério usa o erro padrão sob a hipótese nula (taxa = c x_e), que
    continua informativo quando a taxa observada é 0.

    Args:
        h: Hipergrafo
        solution: x em bP
        trials: Número de ensaios
        seed: Semente mestre
        scheme: Esquema auditado
        sigmas: Folga em desvios padrão

    Returns:
        (DataFrame por aresta, resumo com taxa de emparelhamentos)
    """
    constant = scheme.balance_constant(solution.b)
    counts = np.zeros(len(solution.edges), dtype=np.int64)
    positions = _positions(solution)
    matchings = 0

    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        active = sample_active_set(solution, rng)
        tape = CrsTape.draw(rng, h)
        outcome = apply_scheme(solution, active, tape, scheme)
        if is_matching(h, outcome.kept):
            matchings += 1
        for e in outcome.kept:
            counts[positions[e.edge_id]] += 1

    rows = []
    for pos, (edge, x_e) in enumerate(zip(solution.edges, solution.x)):
        rate = counts[pos] / trials
        bound = (constant or 0.0) * float(x_e)
        null_stderr = math.sqrt(bound * (1 - bound) / trials)
        low, _ = proportion_confint(int(counts[pos]), trials, alpha=0.05, method="wilson")
        rows.append({
            "edge": str(edge),
            "i": edge.box,
            "j": edge.start,
            "x_e": float(x_e),
            "empirical_keep_rate": rate,
            "stderr": math.sqrt(rate * (1 - rate) / trials),
            "wilson_low": float(low),
            "bound": bound,
            "pass": bool(rate >= bound - sigmas * null_stderr),
        })
    frame = pd.DataFrame(rows, columns=["edge", "i", "j", "x_e", "empirical_keep_rate", "stderr",
                                        "wilson_low", "bound", "pass"])
    summary = {
        "trials": trials,
        "scheme": f"{scheme.tag.value}:{scheme.matroid_rule.value}/{scheme.interval_rule.value}",
        "balance_constant": constant,
        "certified": constant is not None,
        "matching_rate": matchings / trials if trials else 1.0,
        "all_pass": bool(frame["pass"].all()) if len(frame) else True,
    }
    log_check(logger, "crs_balance", summary["all_pass"], summary["matching_rate"], 1.0)
    return frame, summary


# === Funções de conveniência ===

def solve_block_matching(
    h: BlockHypergraph,
    config: Optional[SolverConfig] = None,
    oracle: bool = False,
    scheme: CrsScheme = DEFAULT_SCHEME,
) -> Dict[str, Any]:
    """
    Resolve Submodular Block Matching: MCG + arredondamento por CRS

    Args:
        h: Hipergrafo
        config: Parâmetros
        oracle: Compara com a enumeração exaustiva
        scheme: CRS usado no arredondamento

    Returns:
        Relatório com fractional_value, matching, f_value e, com oráculo,
        oracle_value e ratio
    """
    config = config or SolverConfig()
    obj = SubmodularObjective.from_hypergraph(h)
    solution = measured_continuous_greedy(obj, h, config)
    matching = round_fractional(obj, h, solution, config.rounding_repeats, config.seed, scheme)
    f_value = obj.evaluate(matching.edges)
    greedy = greedy_matching(obj, h)

    b = float(config.b)
    report: Dict[str, Any] = {
        "fractional_value": solution.value,
        "matching": matching.to_json(),
        "f_value": f_value,
        "greedy_value": obj.evaluate(greedy.edges),
        "certified_lower_bound": (1 - math.exp(-b)) * float(max(f_value, obj.evaluate(greedy.edges))),
        "b": config.b,
        "mcg_steps": config.mcg_steps,
        "lp_mode": config.lp_mode.value,
        "heuristic_direction": solution.heuristic_direction,
        "density": h.density(),
    }
    if oracle:
        _, best_value = brute_force_best_matching(obj, h)
        report["oracle_value"] = best_value
        report["ratio"] = (f_value / best_value) if best_value else Fraction(1)
    log_stage(logger, "round", f=f"{float(f_value):.6f}", edges=len(matching))
    return {"report": report, "solution": solution, "matching": matching, "objective": obj}
