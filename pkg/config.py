"""
Configurações globais do toolkit Pandora Over Time
"""
import os
from fractions import Fraction
from pathlib import Path
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()

# === Diretórios ===
BASE_DIR = Path(__file__).parent
DATA_DIR = Path(os.getenv("PANDORA_DATA_DIR", str(BASE_DIR / "data")))
LOGS_DIR = Path(os.getenv("PANDORA_LOGS_DIR", str(BASE_DIR / "logs")))

# Criar diretórios se não existirem
DATA_DIR.mkdir(parents=True, exist_ok=True)
LOGS_DIR.mkdir(parents=True, exist_ok=True)

# === Formato de arquivos ===
INSTANCE_FORMAT = "pandora-time/1"
CSV_LINE_TERMINATOR = "\n"

# === Solver (Submodular Block Matching) ===
DEFAULT_B = Fraction(os.getenv("PANDORA_B", "5227/10000"))
MCG_STEPS = int(os.getenv("PANDORA_MCG_STEPS", "100"))
ROUNDING_REPEATS = int(os.getenv("PANDORA_ROUNDING_REPEATS", "50"))
LOCAL_SEARCH_EPSILON = Fraction(os.getenv("PANDORA_LS_EPSILON", "1/2"))
LP_MODE = os.getenv("PANDORA_LP_MODE", "exact_lp")

# === Valores de reserva ===
RESERVATION_TOLERANCE = float(os.getenv("PANDORA_RESERVATION_TOLERANCE", "1e-9"))
BISECTION_MAX_ITER = int(os.getenv("PANDORA_BISECTION_MAX_ITER", "200"))

# === Limites de capacidade (guards) ===
EXACT_LEAF_GUARD = int(os.getenv("PANDORA_EXACT_LEAF_GUARD", str(10 ** 6)))
MATCHING_EDGE_GUARD = int(os.getenv("PANDORA_MATCHING_EDGE_GUARD", "40"))
BALANCE_ENUM_GUARD = int(os.getenv("PANDORA_BALANCE_ENUM_GUARD", "16"))

ORACLE_GUARDS = {
    "boxes": 3,
    "horizon": 6,
    "support": 3,
}
# Formato: "boxes=4,horizon=8,support=3"
GUARD_OVERRIDE = os.getenv("PANDORA_GUARD_OVERRIDE", "")

# === Simulação ===
MC_TRIALS = int(os.getenv("PANDORA_MC_TRIALS", "100000"))
AUDIT_TRIALS = int(os.getenv("PANDORA_AUDIT_TRIALS", "100000"))
DEFAULT_SEED = int(os.getenv("PANDORA_SEED", "0"))

# === Garantias de aproximação ===
GUARANTEES = {
    "main": Fraction(10, 213),       # 1/21.3
    "instant_base": Fraction(8),     # 1/(8 + eps)
    "fixed": Fraction(1, 2),         # relativo a E[max Y]
    "weitzman": Fraction(1),
}

# === Configurações de Aplicação ===
APP_ENV = os.getenv("APP_ENV", "development")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = LOGS_DIR / "app.log"


def parse_guard_override(raw: str) -> dict:
    """
    Interpreta PANDORA_GUARD_OVERRIDE sobre os guards padrão do oráculo

    Args:
        raw: Texto no formato "boxes=4,horizon=8"

    Returns:
        Dicionário de guards com os valores substituídos
    """
    guards = dict(ORACLE_GUARDS)
    if not raw.strip():
        return guards

    for item in raw.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ValueError(f"PANDORA_GUARD_OVERRIDE malformado: '{item}'")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in guards:
            # Chave desconhecida é ignorada (o logger avisa em engine.oracle)
            continue
        try:
            guards[key] = int(value)
        except ValueError as exc:
            raise ValueError(f"Guard '{key}' exige inteiro, recebido '{value}'") from exc
    return guards
