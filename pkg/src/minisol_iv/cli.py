"""Command-line driver: sources in, diagnostics and an exit code out."""

from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple

from minisol_iv import __version__
from minisol_iv.cfg import dump_cfg
from minisol_iv.detectors import SEVERITIES, SEVERITY_RANK, DetectorConfig, run_detectors
from minisol_iv.engine import DEFAULT_WIDEN_DELAY, analyze_contract
from minisol_iv.errors import ConfigError, MiniSolError
from minisol_iv.frontend import parse_source, resolve
from minisol_iv.report import FileReport, Report, dump_states, render_json, render_text, use_color

EXIT_CLEAN, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    paths: List[str]
    format: str = "text"
    detectors: DetectorConfig = field(default_factory=DetectorConfig)
    widen_delay: int = DEFAULT_WIDEN_DELAY
    dump_cfg: bool = False
    dump_states: bool = False
    fail_on: str = "warning"

    def __post_init__(self):
        if not self.paths:
            raise ConfigError("at least one input path is required")
        if self.widen_delay < 1:
            raise ConfigError("--widen-delay must be at least 1")
        if self.format not in ("text", "json"):
            raise ConfigError(f"unknown format '{self.format}'")
        if self.fail_on not in SEVERITIES:
            raise ConfigError(f"unknown severity '{self.fail_on}'")


def collect_sources(paths: Sequence[str]) -> List[Path]:
    """Expand directories recursively to their `.sol` files; result is sorted and unique."""
    found = set()
    for p in map(Path, paths):
        if p.is_dir():
            found.update(q for q in p.rglob("*.sol") if q.is_file())
        elif p.exists():
            found.add(p)
        else:
            raise FileNotFoundError(f"{p}: no such file or directory")
    return sorted(found, key=lambda q: q.as_posix())


def analyze_file(path: Path, cfg: RunConfig, dumps: Optional[List[str]] = None) -> FileReport:
    try:
        unit = parse_source(path.read_text(encoding="utf-8"))
        table = resolve(unit)
    except MiniSolError as e:
        e.path = path.as_posix()
        raise
    rep = FileReport(path.as_posix())
    for contract in unit.contracts:
        analysis = analyze_contract(table.contract(contract), cfg.widen_delay)
        if dumps is not None:
            for name, g in analysis.cfgs.items():
                if cfg.dump_cfg:
                    dumps.append(dump_cfg(g))
                if cfg.dump_states and name in analysis.results:
                    dumps.append(dump_states(analysis.results[name]))
        rep.diagnostics += run_detectors(analysis, cfg.detectors)
    return rep


def run(cfg: RunConfig, dumps: Optional[List[str]] = None) -> Tuple[Report, int]:
    """Analyze every input; raises MiniSolError / OSError on bad input."""
    report = Report()
    for path in collect_sources(cfg.paths):
        report.files.append(analyze_file(path, cfg, dumps))
    report.sort()
    threshold = SEVERITY_RANK[cfg.fail_on]
    failing = any(SEVERITY_RANK[d.severity] >= threshold for _, d in report.diagnostics())
    return report, EXIT_FINDINGS if failing else EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minisol-iv", description="Interval-analysis vulnerability scanner for MiniSol contracts.")
    ap.add_argument("paths", nargs="+", help=".sol files or directories (searched recursively)")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--detectors", default=None, help="comma-separated ids, e.g. d1,d2 (default: all)")
    ap.add_argument("--widen-delay", type=int, default=DEFAULT_WIDEN_DELAY)
    ap.add_argument("--dump-cfg", action="store_true")
    ap.add_argument("--dump-states", action="store_true")
    ap.add_argument("--fail-on", choices=SEVERITIES, default="warning")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
         stderr: Optional[TextIO] = None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_CLEAN if e.code == 0 else EXIT_ERROR
    try:
        cfg = RunConfig(args.paths, args.format, DetectorConfig.parse(args.detectors), args.widen_delay,
                        args.dump_cfg, args.dump_states, args.fail_on)
        dumps: List[str] = []
        report, code = run(cfg, dumps)
    except MiniSolError as e:
        where = getattr(e, "path", None)
        print(f"{where}:{e}" if where else f"minisol-iv: {e}", file=err)
        return EXIT_ERROR
    except ConfigError as e:
        print(f"minisol-iv: {e}", file=err)
        return EXIT_ERROR
    except OSError as e:
        print(f"minisol-iv: {e}", file=err)
        return EXIT_ERROR
    # Dumps never mix into the JSON document.
    dump_stream = err if cfg.format == "json" else out
    for d in dumps:
        dump_stream.write(d + "\n")
    if cfg.format == "json":
        out.write(render_json(report) + "\n")
    else:
        out.write(render_text(report, use_color(out)))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
