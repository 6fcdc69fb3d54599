"""
Utilitários do toolkit Pandora Over Time
"""
from utils.logger import get_logger
from utils.errors import PandoraError

__all__ = ["get_logger", "PandoraError"]
