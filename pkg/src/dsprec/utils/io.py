"""Text serialization: instance files, sweep CSVs and JSON manifests.

Floats are written with 17 significant digits so every double round-trips.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from ..problem import ProblemInstance
from .exceptions import InstanceFormatError
from .log import get_logger

logger = get_logger("io")

MAGIC = "DSPREC"
FORMAT_VERSION = "v1"

CSV_COLUMNS = (
    "param",
    "value",
    "dist_l1",
    "dist_l2",
    "dist_linf",
    "dist_gd",
    "iters",
    "final_loss",
    "converged",
)
# Appended by the step-size sweep: distance to the reference limit and its norm
ETA_COLUMNS = ("dist_ref", "ref_norm")


def format_float(value: float) -> str:
    return f"{float(value):.17g}"


def _format_matrix(m: np.ndarray) -> list[str]:
    return [" ".join(format_float(v) for v in row) for row in np.asarray(m)]


def dumps_instance(p: ProblemInstance) -> str:
    """Header ``DSPREC v1 n d k seed noise`` then X, Y, W₀, W_true, blank-line separated."""
    seed = "none" if p.seed is None else str(p.seed)
    header = f"{MAGIC} {FORMAT_VERSION} {p.n} {p.d} {p.k} {seed} {format_float(p.noise)}"
    blocks = [_format_matrix(m) for m in (p.x, p.y, p.w0)]
    blocks.append(["none"] if p.w_true is None else _format_matrix(p.w_true))
    return header + "\n" + "\n\n".join("\n".join(block) for block in blocks) + "\n"


def _parse_block(lines: list[str], rows: int, cols: int, name: str) -> np.ndarray:
    if len(lines) != rows:
        raise InstanceFormatError(f"{name}: expected {rows} rows, found {len(lines)}")
    try:
        data = [[float(tok) for tok in line.split()] for line in lines]
    except ValueError as e:
        raise InstanceFormatError(f"{name}: {e}") from e
    if any(len(row) != cols for row in data):
        raise InstanceFormatError(f"{name}: expected {cols} columns on every row")
    return np.array(data, dtype=np.float64).reshape(rows, cols)


def loads_instance(text: str) -> ProblemInstance:
    lines = text.splitlines()
    if not lines:
        raise InstanceFormatError("empty instance file")
    head = lines[0].split()
    if len(head) != 7 or head[0] != MAGIC or head[1] != FORMAT_VERSION:
        raise InstanceFormatError(f"bad header: {lines[0]!r}")
    try:
        n, d, k = (int(tok) for tok in head[2:5])
        seed = None if head[5] == "none" else int(head[5])
        noise = float(head[6])
    except ValueError as e:
        raise InstanceFormatError(f"bad header: {e}") from e

    blocks: list[list[str]] = [[]]
    for line in lines[1:]:
        if line.strip():
            blocks[-1].append(line)
        elif blocks[-1]:
            blocks.append([])
    if blocks and not blocks[-1]:
        blocks.pop()
    if len(blocks) != 4:
        raise InstanceFormatError(f"expected 4 matrices, found {len(blocks)}")

    x = _parse_block(blocks[0], n, d, "X")
    y = _parse_block(blocks[1], n, k, "Y")
    w0 = _parse_block(blocks[2], d, k, "W0")
    w_true = None if blocks[3] == ["none"] else _parse_block(blocks[3], d, k, "W_true")
    return ProblemInstance(x=x, y=y, w0=w0, w_true=w_true, seed=seed, noise=noise)


def save_instance(p: ProblemInstance, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_instance(p))
    logger.debug("wrote instance to %s", path)
    return path


def load_instance(path: Path) -> ProblemInstance:
    try:
        text = path.read_text()
    except OSError as e:
        raise InstanceFormatError(f"cannot read instance {path}: {e}") from e
    return loads_instance(text)


def instance_checksum(p: ProblemInstance) -> str:
    """SHA-256 of the text serialization."""
    return hashlib.sha256(dumps_instance(p).encode()).hexdigest()


def save_matrix(path: Path, m: np.ndarray) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(_format_matrix(m)) + "\n")
    return path


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return format_float(float(value))
    return str(value)


def dumps_csv(rows: Iterable[Mapping[str, Any]], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({col: _cell(row.get(col)) for col in columns})
    return buf.getvalue()


def write_csv(
    path: Path, rows: Sequence[Mapping[str, Any]], columns: Sequence[str] = CSV_COLUMNS
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_csv(rows, columns))
    logger.debug("wrote %d rows to %s", len(rows), path)
    return path


def read_csv(text: str) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ())[: len(CSV_COLUMNS)] != CSV_COLUMNS:
        raise InstanceFormatError(f"unexpected CSV header: {reader.fieldnames}")
    return list(reader)


def write_manifest(path: Path, manifest: Mapping[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")
