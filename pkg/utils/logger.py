"""
Sistema de logging estruturado para o toolkit Pandora Over Time
"""
import logging
import sys
from pathlib import Path
from typing import Any, Optional

# Importar configurações
try:
    from config import LOG_LEVEL, LOG_FILE, LOGS_DIR
except ImportError:
    LOG_LEVEL = "INFO"
    LOG_FILE = Path("logs/app.log")
    LOGS_DIR = Path("logs")


KINDS = ("STAGE", "CHECK", "GUARD")


def record_kind(message: str) -> str:
    """Tipo do registro estruturado pelo prefixo da mensagem (LOG quando livre)"""
    head = message.split(" | ", 1)[0]
    return head if head in KINDS else "LOG"


class RecordKindFilter(logging.Filter):
    """Anexa `kind` e `failed` ao registro para os formatters"""

    def filter(self, record):
        message = record.getMessage()
        record.kind = record_kind(message)
        record.failed = "status=FAIL" in message
        return True


class KindFormatter(logging.Formatter):
    """
    Console: cor pelo tipo do registro

    STAGE em azul, CHECK aprovado em verde, GUARD em amarelo; CHECK
    reprovado e erros em vermelho. Registros livres abaixo de ERROR
    saem sem cor.
    """

    KIND_COLORS = {
        "STAGE": '\033[34m',
        "CHECK": '\033[32m',
        "GUARD": '\033[33m',
    }
    FAIL = '\033[31m'
    RESET = '\033[0m'

    def format(self, record):
        if not hasattr(record, "kind"):
            RecordKindFilter().filter(record)
        text = super().format(record)
        if record.failed or record.levelno >= logging.ERROR:
            color = self.FAIL
        else:
            color = self.KIND_COLORS.get(record.kind)
        return f"{color}{text}{self.RESET}" if color else text


CONSOLE_FORMAT = '%(asctime)s %(kind)-5s %(name)s :: %(message)s'
FILE_FORMAT = '%(asctime)s | %(levelname)s | %(kind)s | %(name)s:%(lineno)d | %(message)s'


def get_logger(name: str, log_file: Optional[Path] = None) -> logging.Logger:
    """
    Logger com console colorido em stderr e arquivo sem ANSI

    stdout fica reservado para CSV/JSON da CLI, que precisam ser
    reprodutíveis byte a byte. Os dois handlers recebem o campo `kind`
    (STAGE, CHECK, GUARD ou LOG).

    Args:
        name: Nome do logger (geralmente __name__)
        log_file: Arquivo de log opcional (usa padrão se não especificado)

    Returns:
        Logger configurado
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    logger.setLevel(getattr(logging, LOG_LEVEL.upper(), logging.INFO))
    logger.propagate = False
    LOGS_DIR.mkdir(parents=True, exist_ok=True)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.addFilter(RecordKindFilter())
    console_handler.setFormatter(KindFormatter(CONSOLE_FORMAT, datefmt='%H:%M:%S'))
    logger.addHandler(console_handler)

    file_handler = logging.FileHandler(log_file or LOG_FILE, encoding='utf-8')
    file_handler.addFilter(RecordKindFilter())
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    logger.addHandler(file_handler)

    return logger


def _fields(data: dict) -> str:
    return " | ".join(f"{key}={value}" for key, value in data.items())


def log_stage(logger: logging.Logger, stage: str, **fields: Any) -> None:
    """
    Loga a conclusão de um estágio do pipeline de forma estruturada

    Args:
        logger: Logger a ser usado
        stage: Nome do estágio (build, indices, mcg, round, schedule, evaluate, oracle)
        **fields: Valores intermediários relevantes
    """
    suffix = f" | {_fields(fields)}" if fields else ""
    logger.info(f"STAGE | stage={stage}{suffix}")


def log_check(logger: logging.Logger, name: str, passed: bool, lhs: Any, rhs: Any) -> None:
    """
    Loga a verificação de uma garantia de aproximação (lhs >= rhs)

    Args:
        logger: Logger a ser usado
        name: Nome da verificação
        passed: Resultado
        lhs: Lado esquerdo da desigualdade
        rhs: Lado direito da desigualdade
    """
    status = "PASS" if passed else "FAIL"
    message = f"CHECK | name={name} | status={status} | lhs={float(lhs):.6f} | rhs={float(rhs):.6f}"
    if passed:
        logger.info(message)
    else:
        logger.warning(message)


def log_guard(logger: logging.Logger, guard: str, limit: int, observed: int) -> None:
    """
    Loga um guard de capacidade excedido

    Args:
        logger: Logger a ser usado
        guard: Nome do guard
        limit: Limite configurado
        observed: Valor observado
    """
    logger.warning(f"GUARD | guard={guard} | limit={limit} | observed={observed}")
