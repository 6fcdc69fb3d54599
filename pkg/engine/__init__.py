"""
Avaliação exata, Monte Carlo e oráculo adaptativo
"""
from engine.evaluation import EvalReport, enumerate_outcomes, exact_expected_utility, monte_carlo
from engine.oracle import (
    OracleGuards,
    OracleResult,
    PolicyStrategy,
    adaptivity_gap_probe,
    optimal_adaptive_oracle,
    upper_bound_chain,
)

__all__ = [
    "EvalReport",
    "enumerate_outcomes",
    "exact_expected_utility",
    "monte_carlo",
    "OracleGuards",
    "OracleResult",
    "PolicyStrategy",
    "adaptivity_gap_probe",
    "optimal_adaptive_oracle",
    "upper_bound_chain",
]
