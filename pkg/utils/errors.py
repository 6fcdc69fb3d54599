"""
Hierarquia de exceções do toolkit e códigos de saída da CLI
"""
from typing import Any, List, Optional


class PandoraError(Exception):
    """Erro base do toolkit"""

    exit_code = 1


class StructuralError(PandoraError):
    """Entrada estruturalmente inválida (tamanhos, arestas desconhecidas, arquivos)"""

    exit_code = 2


class ValidationError(PandoraError):
    """Instância, parâmetros ou configuração violam invariantes"""

    exit_code = 2

    def __init__(self, message: str, violations: Optional[List[Any]] = None):
        super().__init__(message)
        self.violations = list(violations or [])


class PreconditionError(PandoraError):
    """Operação chamada fora da variante suportada"""

    exit_code = 2


class CapacityError(PandoraError):
    """Guard de capacidade excedido"""

    exit_code = 3

    def __init__(self, guard: str, limit: int, observed: int, hint: str = ""):
        message = f"Guard '{guard}' excedido: {observed} > {limit}"
        if hint:
            message = f"{message} ({hint})"
        super().__init__(message)
        self.guard = guard
        self.limit = limit
        self.observed = observed


class ContractViolation(PandoraError):
    """Invariante interno violado"""

    exit_code = 4


class RealizationExhausted(PandoraError):
    """A fonte de realizações não tem mais valores"""

    exit_code = 4

    def __init__(self, message: str, law: Any = None):
        super().__init__(message)
        self.law = law


class StageError(PandoraError):
    """Erro de um módulo rotulado com o estágio do pipeline"""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 4)


def exit_code_for(exc: BaseException) -> int:
    """Código de saída da CLI para uma exceção"""
    return getattr(exc, "exit_code", 4) if isinstance(exc, PandoraError) else 4
