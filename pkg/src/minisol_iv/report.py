"""Reports: JSON and text renderings of diagnostics, plus the --dump-states view."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

from minisol_iv import __version__
from minisol_iv.cfg import Cfg, Index, Place, instr_text, place_text
from minisol_iv.detectors import SEVERITIES, Diagnostic
from minisol_iv.domain import AbstractValue, ArrayValue, MappingValue, Scalar, StructValue, render
from minisol_iv.engine import AbstractState, AnalysisResult, Transfer
from minisol_iv.frontend.resolver import MSG_SENDER, MSG_VALUE


@dataclass
class FileReport:
    path: str
    diagnostics: List[Diagnostic] = field(default_factory=list)


@dataclass
class Report:
    files: List[FileReport] = field(default_factory=list)
    version: str = __version__
    # Per function: (visits of the busiest block, total iterations, widenings).
    convergence: Dict[str, Tuple[int, int, int]] = field(default_factory=dict)

    def sort(self) -> None:
        self.files.sort(key=lambda f: f.path)
        for f in self.files:
            f.diagnostics.sort(key=Diagnostic.sort_key)

    def summary(self) -> Dict[str, int]:
        counts = {s: 0 for s in SEVERITIES}
        for f in self.files:
            for d in f.diagnostics:
                counts[d.severity] += 1
        return counts

    def diagnostics(self):
        for f in self.files:
            for d in f.diagnostics:
                yield f.path, d


def _diag_json(d: Diagnostic) -> dict:
    return {
        "detector": d.detector,
        "severity": d.severity,
        "line": d.span.line,
        "column": d.span.column,
        "endLine": d.span.end_line,
        "endColumn": d.span.end_column,
        "message": d.message,
        "evidence": dict(d.evidence),
    }


def render_json(report: Report) -> str:
    doc = {
        "version": report.version,
        "files": [{"path": f.path, "diagnostics": [_diag_json(d) for d in f.diagnostics]} for f in report.files],
        "summary": report.summary(),
    }
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))


_COLORS = {"error": "\033[31m", "warning": "\033[33m", "info": "\033[36m"}


def use_color(stream: Optional[TextIO]) -> bool:
    if os.environ.get("MINISOL_IV_NO_COLOR") is not None:
        return False
    return stream is not None and hasattr(stream, "isatty") and stream.isatty()


def format_diagnostic(path: str, d: Diagnostic, color: bool = False) -> str:
    sev = f"{_COLORS[d.severity]}{d.severity}\033[0m" if color else d.severity
    line = f"{path}:{d.span.line}:{d.span.column}: {sev}[{d.detector}]: {d.message}"
    if d.evidence:
        line += " (" + ", ".join(f"{k} ∈ {v}" for k, v in d.evidence) + ")"
    return line


def render_text(report: Report, color: bool = False) -> str:
    lines = [format_diagnostic(p, d, color) for p, d in report.diagnostics()]
    s = report.summary()
    lines.append(f"{s['error']} error(s), {s['warning']} warning(s), {s['info']} info")
    return "\n".join(lines) + "\n"


# --- state dumps -----------------------------------------------------------------------------


def flatten(name: str, v: AbstractValue) -> List[Tuple[str, str]]:
    """`name ∈ [lo, hi]` rows for a value; composites expand to .length, [*] and fields."""
    if isinstance(v, Scalar):
        return [(name, render(v.iv))]
    if isinstance(v, ArrayValue):
        return [(f"{name}.length", render(v.length))] + flatten(f"{name}[*]", v.elem)
    if isinstance(v, MappingValue):
        return flatten(f"{name}[*]", v.value)
    assert isinstance(v, StructValue)
    rows = []
    for fname, fv in v.fields:
        rows += flatten(f"{name}.{fname}", fv)
    return rows


def tracked_places(cfg: Cfg) -> List[Place]:
    """Indexed places the function touches with a named (non-temporary) index, e.g. `_votes[msg.sender]`."""
    seen: Dict[str, Place] = {}
    for _, _, ins in cfg.instructions():
        cands = list(ins.reads())
        if ins.dest_place() is not None:
            cands.append(ins.dest_place())
        for p in cands:
            if not isinstance(p, Place) or p.is_temp:
                continue
            idx = [e for e in p.path if isinstance(e, Index)]
            if idx and all(isinstance(e.operand, Place) and not e.operand.is_temp or not isinstance(e.operand, Place)
                           for e in idx):
                seen.setdefault(place_text(p, cfg.display), p)
    return list(seen.values())


def state_rows(state: AbstractState, cfg: Cfg, tr: Optional[Transfer] = None) -> List[Tuple[str, str]]:
    if not state.reachable:
        return []
    tr = tr or Transfer(cfg)
    order = list(cfg.state_vars) + [MSG_SENDER, MSG_VALUE] + cfg.params + cfg.returns + cfg.locals
    rows: List[Tuple[str, str]] = []
    done = set()
    for key in order:
        if key in done or key not in state.values:
            continue
        done.add(key)
        rows += flatten(cfg.display.get(key, key), state.values[key])
    for p in tracked_places(cfg):
        if p.root in state.values:
            rows += flatten(place_text(p, cfg.display), tr.read(state, p))
    return rows


def _block(rows: Sequence[Tuple[str, str]], ascii_only: bool) -> List[str]:
    if not rows:
        return ["  unreachable"]
    sym = "in" if ascii_only else "∈"
    return [f"  {name} {sym} {iv}" for name, iv in rows]


def dump_states(result: AnalysisResult, ascii_only: bool = False) -> str:
    """In-state before every instruction, then the state at function end."""
    cfg = result.cfg
    tr = Transfer(cfg)
    out = [f"states {cfg.name}"]
    for b, i, ins in cfg.instructions():
        st = result.state_before(b, i)
        out.append(f"B{b}.{i} line {ins.span.line}: {instr_text(ins, cfg)}")
        out += _block(state_rows(st, cfg, tr), ascii_only)
    out.append("end:")
    out += _block(state_rows(result.end, cfg, tr), ascii_only)
    return "\n".join(out) + "\n"
