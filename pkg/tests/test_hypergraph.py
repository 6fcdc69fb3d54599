"""
Testes para o hipergrafo em blocos e a enumeração de emparelhamentos
"""
import pytest
import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))


class TestBuild:
    """Testes de build(instance)"""

    def test_one_box_two_rounds(self, two_point):
        """n=1, H=2, p=0 -> arestas e(0,1), e(0,2)"""
        from core.instance import BoxSpec, Instance
        from solver.hypergraph import build

        h = build(Instance(boxes=(BoxSpec.constant(1, two_point, 2),), horizon=2))
        assert [e.edge_id for e in h.edges] == [(0, 1), (0, 2)]
        assert all(e.start == e.end for e in h.edges)

    def test_processing_time_spans(self, two_point):
        """n=2, H=4, p=(1,0): caixa 0 cobre duas rodadas, caixa 1 uma"""
        from core.instance import BoxSpec, Instance
        from solver.hypergraph import build

        boxes = (BoxSpec.constant(1, two_point, 4, processing_time=1), BoxSpec.constant(1, two_point, 4))
        h = build(Instance(boxes=boxes, horizon=4))
        assert h.right_count == 5
        assert [list(e.span) for e in h.edges_of_box(0)] == [[1, 2], [2, 3], [3, 4], [4, 5]]
        assert [list(e.span) for e in h.edges_of_box(1)] == [[1], [2], [3], [4]]

    def test_absent_cost_has_no_edge(self, two_point):
        """Custo ausente em t=1 -> sem e(0,1)"""
        from core.instance import BoxSpec, Instance
        from solver.hypergraph import build
        from utils.errors import StructuralError

        box = BoxSpec(costs=(None, Fraction(1)), processing_time=0, rewards=(two_point, two_point))
        h = build(Instance(boxes=(box,), horizon=2))
        assert [e.edge_id for e in h.edges] == [(0, 2)]
        with pytest.raises(StructuralError):
            h.edge(0, 1)

    def test_edge_carries_index(self, single_box):
        """Aresta guarda r e a lei Y do slot"""
        from solver.hypergraph import build

        edge = build(single_box).edge(0, 1)
        assert edge.r == 8
        assert edge.y_law.expectation() == 4
        assert str(edge) == "e(0,1)"

    def test_density_and_frame(self, grid_2x3):
        """d(P) = 1 / maior linha; frame com as colunas documentadas"""
        from solver.hypergraph import build

        h = build(grid_2x3)
        assert h.density() == Fraction(1, 3)
        frame = h.frame()
        assert list(frame.columns) == ["i", "j", "span_end", "cost", "r", "E[Y]"]
        assert len(frame) == 6

    def test_density_random(self):
        """d(P) <= 1/n em hipergrafos de instâncias geradas"""
        from core.instance import VariantTag
        from experiments.generator import GeneratorParams, generate_instance
        from solver.hypergraph import build

        for variant in (VariantTag.GENERAL, VariantTag.INSTANT, VariantTag.FIXED):
            for n in (1, 2, 4):
                processing = 0 if variant is VariantTag.INSTANT else 2
                params = GeneratorParams(n=n, max_processing=processing, variant=variant)
                for seed in range(10):
                    assert build(generate_instance(params, seed)).density() <= Fraction(1, n)


class TestMatchings:
    """Testes de is_matching e enumerate_matchings"""

    def test_is_matching_examples(self, overlapping):
        """Vazio, vértice esquerdo compartilhado e blocos sobrepostos"""
        from solver.hypergraph import build, is_matching

        h = build(overlapping)
        assert is_matching(h, [])
        assert not is_matching(h, [h.edge(0, 1), h.edge(0, 2)])
        assert not is_matching(h, [h.edge(0, 1), h.edge(1, 2)])
        assert is_matching(h, [h.edge(0, 1), h.edge(1, 3)])

    def test_foreign_edge(self, overlapping, f1):
        """Aresta de outro hipergrafo é erro estrutural"""
        from solver.hypergraph import build, is_matching
        from utils.errors import StructuralError

        with pytest.raises(StructuralError):
            is_matching(build(overlapping), [build(f1).edge(0, 1)])

    def test_two_disjoint_edges(self, two_point):
        """2 arestas disjuntas -> 4 emparelhamentos"""
        from core.instance import BoxSpec, Instance
        from solver.hypergraph import build, enumerate_matchings

        boxes = (
            BoxSpec(costs=(Fraction(1), None), processing_time=0, rewards=(two_point, two_point)),
            BoxSpec(costs=(None, Fraction(1)), processing_time=0, rewards=(two_point, two_point)),
        )
        h = build(Instance(boxes=boxes, horizon=2))
        assert len(list(enumerate_matchings(h))) == 4

    def test_two_conflicting_edges(self, two_point):
        """2 arestas da mesma caixa -> 3 emparelhamentos"""
        from core.instance import BoxSpec, Instance
        from solver.hypergraph import build, enumerate_matchings

        h = build(Instance(boxes=(BoxSpec.constant(1, two_point, 2),), horizon=2))
        assert len(list(enumerate_matchings(h))) == 3

    def test_grid_has_13_matchings(self, grid_2x3):
        """n=2, H=3, p=0 -> 13 emparelhamentos distintos"""
        from solver.hypergraph import build, enumerate_matchings, is_matching

        h = build(grid_2x3)
        matchings = list(enumerate_matchings(h))
        assert len(matchings) == 13
        assert len({m.encode() for m in matchings}) == 13
        assert all(is_matching(h, m.edges) for m in matchings)

    def test_max_edges(self, grid_2x3):
        """max_edges=1 -> vazio + 6 unitários"""
        from solver.hypergraph import build, enumerate_matchings

        assert len(list(enumerate_matchings(build(grid_2x3), max_edges=1))) == 7

    def test_guard(self, two_point):
        """Mais de 40 arestas -> CapacityError"""
        from core.instance import BoxSpec, Instance
        from solver.hypergraph import build, enumerate_matchings
        from utils.errors import CapacityError

        boxes = tuple(BoxSpec.constant(1, two_point, 14) for _ in range(3))
        h = build(Instance(boxes=boxes, horizon=14))
        assert len(h.edges) == 42
        with pytest.raises(CapacityError):
            enumerate_matchings(h)


class TestProxy:
    """Testes da instância proxy"""

    def test_feasible_prefix(self, grid_2x3):
        """Ordem das tuplas segue os inícios"""
        from solver.hypergraph import build, proxy_feasible_prefix

        h = build(grid_2x3)
        a, b = h.edge(0, 1), h.edge(1, 3)
        assert proxy_feasible_prefix(h, (a, b))
        assert not proxy_feasible_prefix(h, (b, a))
        assert proxy_feasible_prefix(h, (a,))
        assert proxy_feasible_prefix(h, ())

    def test_induced_edges_and_proxy_utility(self, f1):
        """Traço -> arestas e(i, t_i) e valor proxy"""
        from solver.hypergraph import build, induced_edges, is_matching, proxy_utility
        from strategies.threshold import InspectionRecord, make_trace

        h = build(f1)
        records = [
            InspectionRecord(box=0, time=1, value=Fraction(0), cost=Fraction(1)),
            InspectionRecord(box=1, time=2, value=Fraction(6), cost=Fraction(0)),
        ]
        trace = make_trace(f1, "t", records, 2)
        edges = induced_edges(h, trace)
        assert [e.edge_id for e in edges] == [(0, 1), (1, 2)]
        assert is_matching(h, edges)
        assert proxy_utility(trace) == 5


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
