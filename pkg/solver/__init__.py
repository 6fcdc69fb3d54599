"""
Solver de Submodular Block Matching: hipergrafo de blocos, greedy contínuo
medido e arredondamento por esquemas de resolução de contenção
"""
from solver.hypergraph import BlockHypergraph, HyperEdge, Matching, build, enumerate_matchings, is_matching
from solver.submodular import (
    FractionalSolution,
    LpMode,
    SolverConfig,
    SubmodularObjective,
    brute_force_best_matching,
    local_search_bipartite,
    measured_continuous_greedy,
)
from solver.crs import CrsScheme, crs_audit, round_fractional, solve_block_matching

__all__ = [
    "BlockHypergraph",
    "HyperEdge",
    "Matching",
    "build",
    "enumerate_matchings",
    "is_matching",
    "FractionalSolution",
    "LpMode",
    "SolverConfig",
    "SubmodularObjective",
    "brute_force_best_matching",
    "local_search_bipartite",
    "measured_continuous_greedy",
    "CrsScheme",
    "crs_audit",
    "round_fractional",
    "solve_block_matching",
]
