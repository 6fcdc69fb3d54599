"""
Testes para os esquemas de resolução de contenção e o arredondamento
"""
import math
import pytest
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))


def _uniform_solution(h, b=Fraction(1, 2)):
    """x_e = b / 3 em todas as arestas do grid 2x3 (fica em bP)"""
    from solver.submodular import FractionalSolution

    return FractionalSolution(edges=h.edges, x=tuple(b / 3 for _ in h.edges), b=b)


@pytest.fixture
def grid_h(grid_2x3):
    from solver.hypergraph import build

    return build(grid_2x3)


@pytest.fixture
def tape_for():
    import numpy as np
    from solver.crs import CrsTape

    def make(h, seed=0):
        return CrsTape.draw(np.random.default_rng(seed), h)

    return make


class TestMatroidRule:
    """Testes da regra por bloco"""

    def test_single_active_edge_kept(self, grid_h, tape_for):
        """Bloco com uma única aresta ativa sempre a mantém"""
        from solver.crs import ActiveSet, MatroidRule, crs_matroid, matroid_keep_probability

        solution = _uniform_solution(grid_h)
        edge = grid_h.edge(0, 2)
        active = ActiveSet(frozenset([edge]))
        for rule in MatroidRule:
            assert crs_matroid(solution, active, tape_for(grid_h), rule).kept == {edge}
            assert matroid_keep_probability(solution, active.sampled, edge, rule) == 1

    def test_uniform_rule(self, grid_h):
        """UNIFORM com k ativos -> 1/k"""
        from solver.crs import MatroidRule, matroid_keep_probability

        solution = _uniform_solution(grid_h)
        active = frozenset(grid_h.edges_of_box(0))
        for edge in active:
            assert matroid_keep_probability(solution, active, edge, MatroidRule.UNIFORM) == Fraction(1, 3)

    def test_fair_probabilities_sum_to_one(self, grid_h):
        """FAIR: as probabilidades do bloco somam exatamente 1"""
        from solver.crs import matroid_keep_probability
        from solver.submodular import FractionalSolution

        x = (Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(1, 6), Fraction(1, 6), Fraction(1, 6))
        solution = FractionalSolution(edges=grid_h.edges, x=x, b=Fraction(3, 5))
        active = frozenset([grid_h.edge(0, 1), grid_h.edge(0, 3)])
        total = sum(matroid_keep_probability(solution, active, e) for e in active)
        assert total == 1
        assert matroid_keep_probability(solution, active, grid_h.edge(0, 2)) == 0

    def test_at_most_one_per_box(self, grid_h):
        """Para várias fitas, no máximo uma aresta por vértice esquerdo"""
        import numpy as np
        from solver.crs import ActiveSet, CrsTape, crs_matroid

        solution = _uniform_solution(grid_h)
        active = ActiveSet(frozenset(grid_h.edges))
        rng = np.random.default_rng(4)
        for _ in range(50):
            kept = crs_matroid(solution, active, CrsTape.draw(rng, grid_h)).kept
            assert len({e.box for e in kept}) == len(kept) == 2


class TestIntervalRule:
    """Testes da regra de intervalos"""

    def test_plain_keeps_earlier(self, overlapping, tape_for):
        """PLAIN: e(0,1) cobre 1..2 e bloqueia e(1,2)"""
        from solver.crs import ActiveSet, IntervalRule, crs_interval, interval_keep_probability
        from solver.hypergraph import build
        from solver.submodular import FractionalSolution

        h = build(overlapping)
        solution = FractionalSolution(edges=h.edges, x=tuple(Fraction(1, 4) for _ in h.edges), b=Fraction(1))
        first, second = h.edge(0, 1), h.edge(1, 2)
        active = ActiveSet(frozenset([first, second]))
        assert crs_interval(solution, active, tape_for(h), IntervalRule.PLAIN).kept == {first}
        assert interval_keep_probability(solution, active.sampled, second, IntervalRule.PLAIN) == 0
        assert interval_keep_probability(solution, active.sampled, first, IntervalRule.PLAIN) == 1

    def test_marked_probability(self, overlapping):
        """MARKED: (1 - e^{-x})/x vezes a chance dos anteriores não marcarem"""
        from solver.crs import IntervalRule, interval_keep_probability, mark_probability
        from solver.hypergraph import build
        from solver.submodular import FractionalSolution

        h = build(overlapping)
        solution = FractionalSolution(edges=h.edges, x=tuple(Fraction(1, 4) for _ in h.edges), b=Fraction(1))
        first, second = h.edge(0, 1), h.edge(1, 2)
        active = frozenset([first, second])
        mark = (1 - math.exp(-0.25)) / 0.25
        assert mark_probability(0) == 1.0
        assert interval_keep_probability(solution, active, first, IntervalRule.MARKED) == pytest.approx(mark)
        assert interval_keep_probability(solution, active, second, IntervalRule.MARKED) == pytest.approx(mark * (1 - mark))


class TestComposed:
    """Testes do esquema composto e do arredondamento"""

    def test_empty_active_set(self, grid_h, tape_for):
        from solver.crs import ActiveSet, crs_composed

        outcome = crs_composed(_uniform_solution(grid_h), ActiveSet(frozenset()), tape_for(grid_h))
        assert outcome.kept == frozenset()

    def test_matching_survives_fair_plain(self, grid_h, tape_for):
        """Conjunto ativo já disjunto passa inteiro com (FAIR, PLAIN)"""
        from solver.crs import ActiveSet, CrsScheme, IntervalRule, MatroidRule, crs_composed

        scheme = CrsScheme(matroid_rule=MatroidRule.FAIR, interval_rule=IntervalRule.PLAIN)
        members = frozenset([grid_h.edge(0, 1), grid_h.edge(1, 3)])
        outcome = crs_composed(_uniform_solution(grid_h), ActiveSet(members), tape_for(grid_h), scheme)
        assert outcome.kept == members

    def test_output_is_subset_and_matching(self, grid_h):
        """pi(A) contido em A e sempre emparelhamento"""
        import numpy as np
        from solver.crs import CrsTape, crs_composed, sample_active_set
        from solver.hypergraph import is_matching

        solution = _uniform_solution(grid_h)
        rng = np.random.default_rng(12)
        for _ in range(100):
            active = sample_active_set(solution, rng)
            kept = crs_composed(solution, active, CrsTape.draw(rng, grid_h)).kept
            assert kept <= active.sampled
            assert is_matching(grid_h, kept)

    def test_round_zero_solution(self, grid_h):
        """x = 0 -> emparelhamento vazio"""
        from solver.crs import round_fractional
        from solver.submodular import FractionalSolution, SubmodularObjective

        solution = FractionalSolution(edges=grid_h.edges, x=tuple(Fraction(0) for _ in grid_h.edges), b=Fraction(1))
        obj = SubmodularObjective.from_hypergraph(grid_h)
        assert len(round_fractional(obj, grid_h, solution, repeats=5)) == 0

    def test_round_integral_solution(self, f1):
        """x indicador de um emparelhamento -> o próprio emparelhamento"""
        from solver.crs import CrsScheme, IntervalRule, MatroidRule, round_fractional
        from solver.hypergraph import build
        from solver.submodular import FractionalSolution, SubmodularObjective

        h = build(f1)
        chosen = {h.edge(0, 1), h.edge(1, 2)}
        x = tuple(Fraction(1) if e in chosen else Fraction(0) for e in h.edges)
        solution = FractionalSolution(edges=h.edges, x=x, b=Fraction(1))
        scheme = CrsScheme(matroid_rule=MatroidRule.UNIFORM, interval_rule=IntervalRule.PLAIN)
        matching = round_fractional(SubmodularObjective.from_hypergraph(h), h, solution, 3, scheme=scheme)
        assert matching.edges == chosen

    def test_round_is_reproducible(self, grid_h):
        """Mesma semente -> mesmo emparelhamento"""
        from solver.crs import round_fractional
        from solver.submodular import SubmodularObjective

        obj = SubmodularObjective.from_hypergraph(grid_h)
        solution = _uniform_solution(grid_h)
        first = round_fractional(obj, grid_h, solution, repeats=20, seed=3)
        second = round_fractional(obj, grid_h, solution, repeats=20, seed=3)
        assert first.encode() == second.encode()


class TestBalance:
    """Testes das constantes de balanço e das auditorias"""

    def test_balance_constant(self):
        """Composto padrão: (1 - e^{-b})/b * e^{-b}"""
        from solver.crs import CrsScheme, IntervalRule, MatroidRule, SchemeTag

        b = 0.5227
        expected = (1 - math.exp(-b)) / b * math.exp(-b)
        assert CrsScheme().balance_constant(Fraction(5227, 10000)) == pytest.approx(expected)
        assert expected == pytest.approx(0.4618, abs=1e-3)
        assert CrsScheme(tag=SchemeTag.INTERVAL).balance_constant(Fraction(1, 2)) == pytest.approx(math.exp(-0.5))
        assert CrsScheme(matroid_rule=MatroidRule.UNIFORM).balance_constant(Fraction(1, 2)) is None
        assert CrsScheme(interval_rule=IntervalRule.PLAIN).balance_constant(Fraction(1, 2)) is None

    def test_exact_balance(self, grid_h):
        """Pr[e mantida] >= c x_e por enumeração exata"""
        from solver.crs import CrsScheme, exact_balance

        solution = _uniform_solution(grid_h)
        scheme = CrsScheme()
        constant = scheme.balance_constant(solution.b)
        balance = exact_balance(grid_h, solution, scheme)
        assert set(balance) == set(grid_h.edges)
        for edge, prob in balance.items():
            assert prob >= constant * float(solution.as_dict()[edge]) - 1e-12

    def test_exact_balance_guard(self, two_point):
        """Suporte acima do limite -> CapacityError"""
        from core.instance import BoxSpec, Instance
        from solver.crs import exact_balance
        from solver.hypergraph import build
        from solver.submodular import FractionalSolution
        from utils.errors import CapacityError

        boxes = tuple(BoxSpec.constant(1, two_point, 6) for _ in range(3))
        h = build(Instance(boxes=boxes, horizon=6))
        solution = FractionalSolution(edges=h.edges, x=tuple(Fraction(1, 18) for _ in h.edges), b=Fraction(1, 3))
        with pytest.raises(CapacityError):
            exact_balance(h, solution)

    def test_audit(self, grid_h):
        """Auditoria Monte Carlo: todas as arestas passam e sempre há emparelhamento"""
        from solver.crs import crs_audit

        frame, summary = crs_audit(grid_h, _uniform_solution(grid_h), trials=2000, seed=1)
        assert len(frame) == 6
        assert summary["certified"]
        assert summary["all_pass"]
        assert summary["matching_rate"] == 1.0
        assert (frame["wilson_low"] <= frame["empirical_keep_rate"]).all()

    def test_monotonicity(self, grid_h):
        """Regras monótonas: nenhuma violação"""
        from solver.crs import monotonicity_check

        counts = monotonicity_check(grid_h, _uniform_solution(grid_h), samples=200, seed=2)
        assert counts["samples"] == 200
        assert counts["pointwise_violations"] == 0
        assert counts["probability_violations"] == 0

    def test_audit_generated(self):
        """Auditoria e monotonicidade sobre a saída do MCG em hipergrafos gerados"""
        from experiments.generator import GeneratorParams, generate_instance
        from solver.crs import crs_audit, monotonicity_check
        from solver.hypergraph import build
        from solver.submodular import SolverConfig, SubmodularObjective, measured_continuous_greedy

        params = GeneratorParams(n=3, support_size=2, max_processing=1)
        for seed in range(4):
            h = build(generate_instance(params, seed))
            solution = measured_continuous_greedy(SubmodularObjective.from_hypergraph(h), h,
                                                  SolverConfig(mcg_steps=20))
            frame, summary = crs_audit(h, solution, trials=2000, seed=seed)
            assert len(frame) == len(h.edges)
            assert summary["all_pass"]
            assert summary["matching_rate"] == 1.0
            counts = monotonicity_check(h, solution, samples=100, seed=seed)
            assert counts["pointwise_violations"] == 0
            assert counts["probability_violations"] == 0


class TestSolveBlockMatching:
    """Teste ponta a ponta do solver"""

    def test_f1_with_oracle(self, f1):
        from solver.crs import solve_block_matching
        from solver.hypergraph import build, is_matching
        from solver.submodular import SolverConfig

        h = build(f1)
        result = solve_block_matching(h, SolverConfig(mcg_steps=20, rounding_repeats=10), oracle=True)
        report = result["report"]
        assert is_matching(h, result["matching"].edges)
        assert report["oracle_value"] == 7
        assert 0 <= report["ratio"] <= 1
        assert report["f_value"] == result["objective"].evaluate(result["matching"].edges)
        assert report["density"] == Fraction(1, 2)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
