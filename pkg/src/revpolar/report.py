"""CSV, JSON and text-table report writers."""

from __future__ import annotations

import csv
import io
import json
from enum import Enum
from pathlib import Path
from typing import Sequence

from .metrics import EvalReport

CSV_COLUMNS = ("model", "domain", "scheme", "corrected", "precision", "recall", "f1", "n_test")


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    TEXT = "text"


class ReportError(OSError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def render_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        metrics = [_fmt(r.precision), _fmt(r.recall), _fmt(r.f1)] if r.ok else ["", "", ""]
        writer.writerow([r.model, r.domain, r.scheme, str(r.corrected).lower(), *metrics, r.n_test])
    return buf.getvalue()


def render_json(reports: Sequence[EvalReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def render_table(reports: Sequence[EvalReport]) -> str:
    """Model / Pr. / Rc. / F-1 with one block per (domain, learner)."""
    width = max([len(r.model) for r in reports] + [len("Model")]) + 2
    rule = "-" * (width + 18)
    lines = []
    block = None
    for r in reports:
        key = (r.domain, r.kind)
        if key != block:
            if block is not None:
                lines.append(rule)
            if block is None or block[0] != r.domain:
                lines.append(f"[{r.domain}]")
                lines.append(f"{'Model':<{width}}{'Pr.':>6}{'Rc.':>6}{'F-1':>6}")
                lines.append(rule)
            block = key
        if r.ok:
            lines.append(f"{r.model:<{width}}{r.precision:>6.2f}{r.recall:>6.2f}{r.f1:>6.2f}")
        else:
            lines.append(f"{r.model:<{width}}  FAILED: {r.error}")
    if block is not None:
        lines.append(rule)
    return "\n".join(lines) + "\n"


_RENDERERS = {ReportFormat.CSV: render_csv, ReportFormat.JSON: render_json, ReportFormat.TEXT: render_table}


def emit_report(reports: Sequence[EvalReport], fmt: ReportFormat | str, path: str | Path) -> Path:
    path = Path(path)
    text = _RENDERERS[ReportFormat(fmt)](reports)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot write report {path}: {exc}") from exc
    return path
