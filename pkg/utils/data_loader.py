"""
Persistência do toolkit: codec JSON de instâncias (pandora-time/1),
relatórios CSV/JSON e arquivos YAML de experimento
"""
import io
import json
import sys
from contextlib import contextmanager
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, TextIO, Union

import pandas as pd
import yaml

from core.distributions import DiscreteDistribution, format_fraction, to_fraction
from core.instance import BoxSpec, DiscountRule, Instance, VariantTag
from utils.errors import StructuralError

try:
    from config import CSV_LINE_TERMINATOR, DATA_DIR, INSTANCE_FORMAT
    from utils.logger import get_logger
except ImportError:
    CSV_LINE_TERMINATOR = "\n"
    DATA_DIR = Path("data")
    INSTANCE_FORMAT = "pandora-time/1"
    from logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


# === Codec de instâncias ===

def _encode_table(values: List[Any], encode) -> Dict[str, Any]:
    if values and all(v == values[0] for v in values):
        return {"const": None if values[0] is None else encode(values[0])}
    return {str(t): encode(v) for t, v in enumerate(values, start=1) if v is not None}


def _decode_table(data: Dict[str, Any], horizon: int, decode, field: str) -> List[Any]:
    if not isinstance(data, dict):
        raise StructuralError(f"Campo '{field}' deve ser objeto, recebido {type(data).__name__}")
    if "const" in data:
        value = None if data["const"] is None else decode(data["const"])
        return [value] * horizon
    table: List[Any] = [None] * horizon
    for key, raw in data.items():
        try:
            t = int(key)
        except ValueError as exc:
            raise StructuralError(f"Índice de tempo inválido em '{field}': {key!r}") from exc
        if not 1 <= t <= horizon:
            raise StructuralError(f"Tempo {t} fora de [1..{horizon}] em '{field}'")
        table[t - 1] = None if raw is None else decode(raw)
    return table


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    """Serializa a instância no formato pandora-time/1"""
    boxes = []
    for box in instance.boxes:
        boxes.append({
            "cost": _encode_table(list(box.costs), format_fraction),
            "p": box.processing_time,
            "rewards": _encode_table(list(box.rewards), lambda law: law.to_json()),
            "discount": box.discount.to_json(),
        })
    data: Dict[str, Any] = {
        "format": INSTANCE_FORMAT,
        "horizon": instance.horizon,
        "variant": instance.variant.value,
    }
    if instance.name:
        data["name"] = instance.name
    data["boxes"] = boxes
    return data


def instance_from_dict(data: Dict[str, Any]) -> Instance:
    """
    Lê uma instância do formato pandora-time/1

    Args:
        data: Dicionário JSON

    Returns:
        Instance (sem validação de invariantes; use core.instance.validate)
    """
    if not isinstance(data, dict):
        raise StructuralError("Instância deve ser um objeto JSON")
    fmt = data.get("format", INSTANCE_FORMAT)
    if fmt != INSTANCE_FORMAT:
        raise StructuralError(f"Formato não suportado: {fmt!r} (esperado {INSTANCE_FORMAT})")
    try:
        horizon = int(data["horizon"])
        raw_boxes = data["boxes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"Instância sem 'horizon'/'boxes' válidos: {exc}") from exc
    try:
        variant = VariantTag(data.get("variant", "general"))
    except ValueError as exc:
        raise StructuralError(f"Variante desconhecida: {data.get('variant')!r}") from exc

    boxes = []
    for i, raw in enumerate(raw_boxes):
        costs = _decode_table(raw.get("cost", {}), horizon, to_fraction, f"boxes[{i}].cost")
        rewards = _decode_table(raw.get("rewards", {}), horizon, DiscreteDistribution.from_json,
                                f"boxes[{i}].rewards")
        if any(law is None for law in rewards):
            raise StructuralError(f"boxes[{i}].rewards sem lei para algum t em [1..{horizon}]")
        p = raw.get("p", 0)
        if not isinstance(p, int) or isinstance(p, bool):
            raise StructuralError(f"boxes[{i}].p deve ser inteiro, recebido {p!r}")
        boxes.append(BoxSpec(
            costs=tuple(costs),
            processing_time=p,
            rewards=tuple(rewards),
            discount=DiscountRule.from_json(raw.get("discount", {"kind": "identity"})),
        ))
    return Instance(boxes=tuple(boxes), horizon=horizon, variant=variant, name=data.get("name", ""))


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, ensure_ascii=False) + "\n"


def load_instance(path: PathLike) -> Instance:
    """Carrega instância de arquivo JSON"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError as exc:
        raise StructuralError(f"Arquivo de instância não encontrado: {path}") from exc
    except json.JSONDecodeError as exc:
        raise StructuralError(f"JSON inválido em {path}: {exc}") from exc
    instance = instance_from_dict(data)
    if not instance.name:
        instance = Instance(boxes=instance.boxes, horizon=instance.horizon,
                            variant=instance.variant, name=path.stem)
    logger.debug(f"Instância carregada: {path} (n={instance.n}, H={instance.horizon})")
    return instance


def save_instance(instance: Instance, path: PathLike) -> Path:
    """Grava instância em JSON (LF, UTF-8)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_instance(instance))
    logger.info(f"Instância gravada: {path}")
    return path


# === Relatórios ===

def jsonable(value: Any) -> Any:
    """Converte racionais, enums e containers em tipos JSON"""
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    return value


def frame_to_csv(frame: pd.DataFrame) -> str:
    """CSV com cabeçalho, aspas RFC e terminador LF"""
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator=CSV_LINE_TERMINATOR)
    return buffer.getvalue()


def report_to_json(report: Any) -> str:
    return json.dumps(jsonable(report), indent=2, ensure_ascii=False) + "\n"


@contextmanager
def open_output(path: Optional[PathLike]) -> Iterator[TextIO]:
    """Abre o destino de saída (stdout quando path é None)"""
    if path is None:
        yield sys.stdout
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        yield handle


def write_output(content: str, path: Optional[PathLike] = None) -> None:
    with open_output(path) as handle:
        handle.write(content)
    if path is not None:
        logger.info(f"Saída gravada: {path}")


def load_yaml(path: PathLike) -> Dict[str, Any]:
    """Carrega arquivo YAML de experimento"""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
    except FileNotFoundError as exc:
        raise StructuralError(f"Arquivo de configuração não encontrado: {path}") from exc
    except yaml.YAMLError as exc:
        raise StructuralError(f"YAML inválido em {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise StructuralError(f"Configuração YAML deve ser um mapeamento: {path}")
    return data


class InstanceStore:
    """Diretório de instâncias JSON (padrão: DATA_DIR/instances)"""

    def __init__(self, root: Optional[PathLike] = None):
        self.root = Path(root) if root else DATA_DIR / "instances"
        self.root.mkdir(parents=True, exist_ok=True)
        logger.debug(f"InstanceStore em {self.root}")

    def path_for(self, name: str) -> Path:
        return self.root / f"{name}.json"

    def save(self, instance: Instance, name: Optional[str] = None) -> Path:
        return save_instance(instance, self.path_for(name or instance.name or "instance"))

    def load(self, name: str) -> Instance:
        return load_instance(self.path_for(name))

    def list_names(self) -> List[str]:
        return sorted(path.stem for path in self.root.glob("*.json"))
