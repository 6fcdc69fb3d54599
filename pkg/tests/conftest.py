"""
Fixtures compartilhadas dos testes
"""
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from core.distributions import DiscreteDistribution  # noqa: E402
from core.instance import BoxSpec, Instance, VariantTag  # noqa: E402


@pytest.fixture
def two_point():
    """V = {(0, 1/2), (10, 1/2)}"""
    return DiscreteDistribution.from_pairs([(0, Fraction(1, 2)), (10, Fraction(1, 2))])


@pytest.fixture
def single_box(two_point):
    """Pandora clássico com uma caixa, c = 1 (r = 8, E[Y] = 4)"""
    return Instance.classic([1], [two_point], name="single")


@pytest.fixture
def f1(two_point):
    """
    Fixture F1: duas caixas clássicas, H = 2

    Caixa 0: V = {0, 10} uniforme, c = 1 -> Y = {0, 8}
    Caixa 1: V = 6 determinístico, c = 0 -> Y = 6
    Melhor emparelhamento: f = 7
    """
    return Instance.classic([1, 0], [two_point, DiscreteDistribution.point_mass(6)], name="f1")


@pytest.fixture
def overlapping(two_point):
    """Caixa 0 com p = 1 (blocos de duas rodadas) e caixa 1 instantânea, H = 3"""
    six = DiscreteDistribution.point_mass(6)
    boxes = (
        BoxSpec.constant(1, two_point, 3, processing_time=1),
        BoxSpec.constant(0, six, 3),
    )
    return Instance(boxes=boxes, horizon=3, variant=VariantTag.GENERAL, name="overlapping")


@pytest.fixture
def grid_2x3(two_point):
    """n = 2, H = 3, p = 0, todos os slots presentes (13 emparelhamentos)"""
    three = DiscreteDistribution.from_pairs([(1, Fraction(1, 3)), (4, Fraction(2, 3))])
    boxes = (
        BoxSpec.constant(1, two_point, 3),
        BoxSpec.constant(Fraction(1, 2), three, 3),
    )
    return Instance(boxes=boxes, horizon=3, variant=VariantTag.GENERAL, name="grid")
