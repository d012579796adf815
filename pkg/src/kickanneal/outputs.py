"""CSV/JSON emission with atomic writes and exact float round trips."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .observables import RunResult

CSV_COLUMNS = ("t", "energy", "scaled_energy", "p_all0", "p_all1", "order_prob", "fidelity", "norm")
_RESULT_ATTR = {"t": "times"}


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    # repr gives the shortest string that parses back to the same double
    return repr(x)


def _parse(s: str) -> float:
    return float("nan") if s == "" else float(s)


def atomic_write_text(path: Path | str, text: str) -> Path:
    """Write via a temporary sibling file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def result_csv_text(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    cols = []
    for name in CSV_COLUMNS:
        arr = getattr(result, _RESULT_ATTR.get(name, name))
        cols.append([None] * len(result.times) if arr is None else list(arr))
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_result_csv(result: RunResult, path: Path | str) -> Path:
    return atomic_write_text(path, result_csv_text(result))


def read_result_csv(path: Path | str) -> RunResult:
    """Inverse of :func:`write_result_csv`; all-empty optional columns come back as None."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [[_parse(s) for s in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(CSV_COLUMNS))
    cols = {name: data[:, k] for k, name in enumerate(CSV_COLUMNS)}
    optional = {}
    for name in ("p_all0", "p_all1", "fidelity"):
        optional[name] = None if np.all(np.isnan(cols[name])) else cols[name]
    return RunResult(
        times=cols["t"],
        energy=cols["energy"],
        scaled_energy=cols["scaled_energy"],
        order_prob=cols["order_prob"],
        norm=cols["norm"],
        **optional,
    )


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def json_text(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(payload: dict, path: Path | str) -> Path:
    return atomic_write_text(path, json_text(payload))


def table_csv_text(rows: Sequence[dict], columns: Optional[Iterable[str]] = None) -> str:
    columns = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else _fmt(v) for v in (row.get(c) for c in columns)])
    return buf.getvalue()


def write_table_csv(rows: Sequence[dict], path: Path | str, columns: Optional[Iterable[str]] = None) -> Path:
    return atomic_write_text(path, table_csv_text(rows, columns))
