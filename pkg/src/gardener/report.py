"""Machine-readable outputs: canonical JSON, CSV, atomic file writes."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .blocks import BlockModel
from .exceptions import IoError
from .ranking import ScoreTable
from .scoring import BlockStatistics

SCHEMA_VERSION = "1"
TOOL = f"gardener {__version__}"


def _clean(obj):
    """Replace non-finite floats with None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps_json(obj) -> str:
    """Canonical JSON: sorted keys, 2-space indent, trailing newline. Parse + re-dump is byte-identical."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def write_csv(path, header, rows) -> None:
    atomic_write_text(path, csv_text(header, rows))


@dataclass
class AnalysisReport:
    model: dict
    score_tables: dict[str, ScoreTable]
    histograms: dict[int, dict]
    block_stats: dict[int, dict]
    errors: dict[str, str] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @classmethod
    def build(cls, model: BlockModel, stats: BlockStatistics, tables: dict[str, ScoreTable], config: dict) -> "AnalysisReport":
        hists = {
            b: {"counts": h.counts.tolist(), "edges": h.edges.tolist(), "total": h.total}
            for b, h in stats.histograms.items()
        }
        return cls(
            model=model.summary(),
            score_tables=tables,
            histograms=hists,
            block_stats=stats.basic,
            errors={k: f"{type(e).__name__}: {e}" for k, e in stats.errors.items()},
            config={**config, "global_range": list(stats.global_range) if stats.global_range else None},
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": TOOL,
            "config": self.config,
            "model": self.model,
            "score_tables": {k: t.to_dict() for k, t in sorted(self.score_tables.items())},
            "block_stats": {str(b): s for b, s in sorted(self.block_stats.items())},
            "histograms": {str(b): h for b, h in sorted(self.histograms.items())},
            "errors": self.errors,
        }

    def scores_csv(self) -> str:
        rows = []
        for name, t in sorted(self.score_tables.items()):
            for b in sorted(t.raw):
                rows.append([name, b, t.raw[b], t.normalized[b], t.rank[b]])
        return csv_text(["criterion", "block", "raw", "normalized", "rank"], rows)

    def histogram_csv(self) -> str:
        rows = []
        for b, h in sorted(self.histograms.items()):
            edges = h["edges"]
            for i, c in enumerate(h["counts"]):
                rows.append([b, i, edges[i], edges[i + 1], c])
        return csv_text(["block", "bin", "left", "right", "count"], rows)


def format_table(header: list[str], rows) -> str:
    """Plain fixed-width table for terminal output."""
    cells = [[str(h) for h in header]] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if v is None:
        return "-"
    return str(v)
