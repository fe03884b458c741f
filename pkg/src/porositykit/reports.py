"""Machine-readable reports shared by the CLI and the acceptance suite."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

SCHEMA_VERSION = "1.0.0"


def report_schema_version() -> str:
    return SCHEMA_VERSION


def _clean(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return v


@dataclass
class Report:
    """``{schema_version, config, results: [{name, paper_ref, value, bound, pass}]}``."""

    command: str
    config: dict = field(default_factory=dict)
    results: list[dict] = field(default_factory=list)

    def add(self, name: str, ref: str, value, bound=None, passed: bool | None = None,
            **extra) -> dict:
        row = {"name": name, "paper_ref": ref, "value": value, "bound": bound,
               "pass": passed}
        row.update(extra)
        self.results.append(row)
        return row

    @property
    def failed(self) -> list[dict]:
        return [r for r in self.results if r["pass"] is False]

    def as_dict(self, timestamp: bool = True) -> dict:
        out = {"schema_version": SCHEMA_VERSION, "command": self.command,
               "config": self.config, "results": self.results}
        if timestamp:
            out["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return _clean(out)

    def dumps(self, timestamp: bool = True) -> str:
        return json.dumps(self.as_dict(timestamp), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path | None, timestamp: bool = True) -> str:
        text = self.dumps(timestamp)
        if path is not None:
            Path(path).write_text(text)
        return text
