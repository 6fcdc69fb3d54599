"""
Simplex primal exato em racionais (regra de Bland)
Resolve max c.x sujeito a A x <= b, x >= 0, com b >= 0 (origem viável)
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

from utils.errors import StructuralError

try:
    from utils.logger import get_logger
except ImportError:
    import logging

    def get_logger(name):
        return logging.getLogger(name)

logger = get_logger(__name__)


@dataclass(frozen=True)
class SimplexResult:
    status: str  # optimal | unbounded
    x: Tuple[Fraction, ...]
    value: Fraction
    pivots: int


class SimplexTableau:
    """
    Tableau compacto: x_B = b - A x_N, z = z0 + c . x_N

    Variáveis 0..n-1 são as originais; n..n+m-1 as folgas.
    """

    def __init__(self, c: Sequence[Fraction], A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]):
        self.m = len(A)
        self.n = len(c)
        if any(len(row) != self.n for row in A) or len(b) != self.m:
            raise StructuralError("Dimensões inconsistentes no LP")
        if any(Fraction(v) < 0 for v in b):
            raise StructuralError("Simplex exige b >= 0 (origem viável)")
        self.A = [[Fraction(v) for v in row] for row in A]
        self.b = [Fraction(v) for v in b]
        self.c = [Fraction(v) for v in c]
        self.z0 = Fraction(0)
        self.nb_vars = list(range(self.n))
        self.b_vars = list(range(self.n, self.n + self.m))
        self.pivots = 0

    def pivot(self, i: int, j: int) -> None:
        piv = self.A[i][j]
        delta = self.c[j] / piv
        self.z0 += delta * self.b[i]
        for col in range(self.n):
            self.c[col] -= delta * self.A[i][col]
        self.c[j] = -delta

        row = self.A[i]
        for col in range(self.n):
            row[col] = 1 / piv if col == j else row[col] / piv
        self.b[i] /= piv

        for k in range(self.m):
            if k == i:
                continue
            f = self.A[k][j]
            if f == 0:
                continue
            target = self.A[k]
            for col in range(self.n):
                target[col] = -f / piv if col == j else target[col] - f * row[col]
            self.b[k] -= f * self.b[i]

        self.nb_vars[j], self.b_vars[i] = self.b_vars[i], self.nb_vars[j]
        self.pivots += 1

    def bland_step(self) -> str:
        entering = [(self.nb_vars[j], j) for j in range(self.n) if self.c[j] > 0]
        if not entering:
            return "optimal"
        _, j = min(entering)
        ratios = [(self.b[i] / self.A[i][j], self.b_vars[i], i)
                  for i in range(self.m) if self.A[i][j] > 0]
        if not ratios:
            return "unbounded"
        _, _, i = min(ratios)
        self.pivot(i, j)
        return "go_on"

    def solve(self) -> SimplexResult:
        while True:
            status = self.bland_step()
            if status != "go_on":
                break
        x = [Fraction(0)] * self.n
        for row, var in enumerate(self.b_vars):
            if var < self.n:
                x[var] = self.b[row]
        logger.debug(f"Simplex {status} após {self.pivots} pivôs (m={self.m}, n={self.n})")
        return SimplexResult(status=status, x=tuple(x), value=self.z0, pivots=self.pivots)


def maximize(c: Sequence[Fraction], A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> SimplexResult:
    """
    Maximiza c.x em {x >= 0 : A x <= b}

    Args:
        c: Vetor objetivo
        A: Matriz de restrições (linhas)
        b: Lado direito não negativo

    Returns:
        SimplexResult com solução básica ótima
    """
    if not c:
        return SimplexResult(status="optimal", x=(), value=Fraction(0), pivots=0)
    return SimplexTableau(c, A, b).solve()
