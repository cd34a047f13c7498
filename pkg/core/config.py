import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from core.errors import UsageError

VERSION = "0.1.0"
SCHEMA_VERSION = 1

ENV_SEED = "FROGTREES_SEED"
ENV_OUTPUT_DIR = "FROGTREES_OUTPUT_DIR"
DEFAULT_SEED = 20170101
DEFAULT_OUTPUT_DIR = "results"


def parse_rational(text: str, flag: str = "value") -> Fraction:
    """Parse "p/q" or an integer; the error names the flag it came from."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"{flag}: expected a rational like 1/3, got {text!r}") from e
    return value


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def default_seed() -> int:
    raw = os.environ.get(ENV_SEED)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        seed = int(raw, 0)
    except ValueError as e:
        raise UsageError(f"{ENV_SEED}: expected an integer, got {raw!r}") from e
    if not 0 <= seed < 1 << 64:
        raise UsageError(f"{ENV_SEED}: seed must be an unsigned 64-bit integer")
    return seed


def default_output_dir() -> Path:
    return Path(os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def _canonical(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    return value


@dataclass
class CliConfig:
    """Validated parameters of one command-line run."""

    subcommand: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    output: Optional[Path] = None
    output_format: str = "json"
    parallel: int = 1
    report: bool = False

    def canonical(self) -> Dict[str, Any]:
        """Everything that determines the data payload (paths and worker counts excluded)."""
        return {
            "version": VERSION,
            "subcommand": self.subcommand,
            "params": _canonical(self.params),
            "seed": self.seed,
            "format": self.output_format,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def header_lines(self) -> List[str]:
        return [
            f"# frogtrees {VERSION}",
            f"# seed {self.seed if self.seed is not None else '-'}",
            f"# config {self.config_hash()}",
        ]

    def output_path(self) -> Path:
        if self.output is not None:
            return Path(self.output)
        suffix = "csv" if self.output_format == "csv" else "json"
        return default_output_dir() / f"{self.subcommand}_{self.config_hash()[:12]}.{suffix}"
