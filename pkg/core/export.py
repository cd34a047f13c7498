"""Writers and readers for the CSV/JSON artifacts."""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Union

from core.config import SCHEMA_VERSION, VERSION
from core.experiments import FenceStats

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FENCE_FLOAT_FIELDS = ("mean_A", "stderr_A", "scaled", "mean_root_visits")
FENCE_INT_FIELDS = ("d", "k", "reps", "aborted")


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def with_schema(kind: str, payload: Dict) -> Dict:
    return {"schema_version": SCHEMA_VERSION, "version": VERSION, "kind": kind, **payload}


def dumps_json(payload: Dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path: PathLike, payload: Dict) -> Path:
    path = _prepare(path)
    with open(path, "w") as f:
        f.write(dumps_json(payload))
    logger.debug("wrote %s", path)
    return path


def read_json(path: PathLike) -> Dict:
    with open(path, "r") as f:
        data = json.load(f)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {data.get('schema_version')!r}")
    return data


def fence_csv_text(stats: FenceStats) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(FenceStats.CSV_HEADER)
    for row in stats.rows():
        writer.writerow([
            f"{row[name]:.10g}" if name in FENCE_FLOAT_FIELDS else row[name]
            for name in FenceStats.CSV_HEADER
        ])
    return buffer.getvalue()


def write_fence_csv(path: PathLike, stats: FenceStats) -> Path:
    path = _prepare(path)
    with open(path, "w", newline="") as f:
        f.write(fence_csv_text(stats))
    return path


def read_fence_csv(path: PathLike) -> List[Dict]:
    with open(path, "r", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != FenceStats.CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        rows = []
        for raw in reader:
            row: Dict = {}
            for name in FENCE_INT_FIELDS:
                row[name] = int(raw[name])
            for name in FENCE_FLOAT_FIELDS:
                row[name] = float(raw[name])
            rows.append(row)
    return rows


def write_text(path: PathLike, text: str) -> Path:
    path = _prepare(path)
    with open(path, "w") as f:
        f.write(text)
    return path
