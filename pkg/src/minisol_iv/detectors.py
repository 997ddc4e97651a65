"""The six detectors, turning analysis events (and AST facts) into diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from minisol_iv.cfg import Assert, BinOp, Cfg, Index, Place, Require, UnOp
from minisol_iv.domain import FALSE, TRUE, Interval, Scalar, render
from minisol_iv.engine import (
    AnalysisEvent, ConditionVerdict, ContractAnalysis, DivisorInterval, EnumCastSource,
    IndexAccess, ValueTransferOfQuotient,
)
from minisol_iv.errors import ConfigError
from minisol_iv.frontend.resolver import MSG_SENDER
from minisol_iv.frontend.span import Span
from minisol_iv.frontend.types import AddressType, ArrayType, BoolType, EnumType, IntType

D1 = "D1-tautology-contradiction"
D2 = "D2-div-by-zero"
D3 = "D3-division-remainder"
D4 = "D4-uninitialized-variable"
D5 = "D5-unvalidated-input"
D6 = "D6-unmatched-type"
DETECTOR_IDS = (D1, D2, D3, D4, D5, D6)
SEVERITIES = ("error", "warning", "info")
SEVERITY_RANK = {"info": 0, "warning": 1, "error": 2}


@dataclass(frozen=True)
class Diagnostic:
    detector: str
    severity: str
    span: Span
    message: str
    evidence: Tuple[Tuple[str, str], ...] = ()
    function: str = ""

    def sort_key(self):
        return (self.span.start, self.detector)


def detector_id(name: str) -> str:
    """Accept `d1`, `D1` or the full id; reject anything else."""
    key = name.strip()
    for full in DETECTOR_IDS:
        if key.lower() in (full.lower(), full.split("-")[0].lower()):
            return full
    raise ConfigError(f"unknown detector id '{name}'")


@dataclass(frozen=True)
class DetectorConfig:
    enabled: frozenset = frozenset(DETECTOR_IDS)
    severity: Mapping[str, str] = field(default_factory=dict)

    @staticmethod
    def parse(selection: Optional[str] = None, overrides: Optional[Mapping[str, str]] = None) -> "DetectorConfig":
        enabled = frozenset(DETECTOR_IDS)
        if selection:
            enabled = frozenset(detector_id(s) for s in selection.split(",") if s.strip())
            if not enabled:
                raise ConfigError("no detectors selected")
        sev = {}
        for k, v in (overrides or {}).items():
            if v not in SEVERITIES:
                raise ConfigError(f"unknown severity '{v}'")
            sev[detector_id(k)] = v
        return DetectorConfig(enabled, sev)


def _evidence(*pairs: Tuple[str, Interval]) -> Tuple[Tuple[str, str], ...]:
    out: Dict[str, str] = {}
    for name, iv in pairs:
        key, n = name, 2
        while key in out and out[key] != render(iv):
            key = f"{name}#{n}"
            n += 1
        out[key] = render(iv)
    return tuple(out.items())


# --- event-based detectors ---------------------------------------------------------------


def d1_tautology_contradiction(events: Iterable[AnalysisEvent]) -> List[Diagnostic]:
    out = []
    for e in events:
        if not isinstance(e, ConditionVerdict):
            continue
        ev = _evidence(*e.operands, ("condition", e.verdict))
        if e.site in ("require", "assert"):
            if e.verdict == FALSE:
                out.append(Diagnostic(D1, "error", e.span, "contradiction: transaction can never complete", ev))
            elif e.verdict == TRUE:
                out.append(Diagnostic(D1, "warning", e.span, "tautology: condition always true", ev))
        elif e.origin == "if":
            if e.verdict == FALSE:
                out.append(Diagnostic(D1, "info", e.span, "condition always false: branch is dead code", ev))
            elif e.verdict == TRUE:
                out.append(Diagnostic(D1, "info", e.span, "condition always true: else path is dead code", ev))
    return out


def d2_division_by_zero(events: Iterable[AnalysisEvent]) -> List[Diagnostic]:
    out = []
    for e in events:
        if not isinstance(e, DivisorInterval) or e.divisor.is_bottom:
            continue
        ev = _evidence((e.texts[0], e.dividend), (e.texts[1], e.divisor))
        what = "division" if e.op == "div" else "modulo"
        if e.divisor == FALSE:
            out.append(Diagnostic(D2, "error", e.span, f"{what} by zero certain", ev))
        elif e.divisor.contains(0):
            out.append(Diagnostic(D2, "warning", e.span, f"{what} by zero possible", ev))
    return out


def _remainder_provably_zero(dividend: Interval, divisor: Interval) -> bool:
    if divisor.leq(TRUE) or dividend == FALSE:
        return True
    return dividend.is_singleton and divisor.is_singleton and dividend.lo % divisor.lo == 0


def d3_division_remainder(events: Iterable[AnalysisEvent], cfg: Cfg) -> List[Diagnostic]:
    mods = {(ins.lhs, ins.rhs) for _, _, ins in cfg.instructions() if isinstance(ins, BinOp) and ins.op == "mod"}
    out = []
    for e in events:
        if not isinstance(e, ValueTransferOfQuotient):
            continue
        if e.divisor.is_bottom or e.dividend.is_bottom:
            continue
        # A divisor that may be zero is reported by D2; here it must be proven non-zero.
        if e.divisor.lo < 1:
            continue
        if _remainder_provably_zero(e.dividend, e.divisor) or e.operands in mods:
            continue
        out.append(Diagnostic(
            D3, "info", e.div_span,
            f"remainder of {e.texts[0]} / {e.texts[1]} is dropped; the quotient is transferred "
            "and the rest stays locked in the contract",
            _evidence((e.texts[0], e.dividend), (e.texts[1], e.divisor))))
    return out


def d5_unvalidated_input(events: Iterable[AnalysisEvent]) -> List[Diagnostic]:
    out = []
    for e in events:
        if not isinstance(e, IndexAccess) or e.guarded or e.index.is_bottom or e.length.is_bottom:
            continue
        if e.index.hi >= e.length.lo:
            out.append(Diagnostic(
                D5, "warning", e.span,
                f"index {e.index_text} may be out of bounds for {e.array_text}",
                _evidence((e.index_text, e.index), (f"{e.array_text}.length", e.length))))
    return out


def d6_unmatched_type(events: Iterable[AnalysisEvent]) -> List[Diagnostic]:
    out = []
    for e in events:
        if not isinstance(e, EnumCastSource) or not e.assigned_to_variable or e.source.is_bottom:
            continue
        rng = Interval(0, e.variants - 1)
        if not e.source.leq(rng):
            out.append(Diagnostic(
                D6, "warning", e.span,
                f"{e.text} ranges over {render(e.source)} but {e.enum_name} only admits {render(rng)}; "
                "the conversion reverts for out-of-range values",
                _evidence((e.text, e.source), ("enumRange", rng))))
    return out


# --- D4 (syntactic) ---------------------------------------------------------------------


def _roots(x) -> Set[str]:
    if not isinstance(x, Place):
        return set()
    out = {x.root}
    for elem in x.path:
        if isinstance(elem, Index):
            out |= _roots(elem.operand)
    return out


def _condition_roots(cfg: Cfg, cond, defs) -> Tuple[Set[str], bool]:
    """Variables feeding a comparison inside `cond`, and whether msg.sender is compared."""
    seen: Set[str] = set()
    sender = False
    stack = [cond]
    in_compare: Set[str] = set()
    while stack:
        x = stack.pop()
        if not isinstance(x, Place) or x.root in seen:
            continue
        seen.add(x.root)
        d = defs.get(x.root) if x.is_temp else None
        if isinstance(d, BinOp):
            if d.op in ("lt", "le", "gt", "ge", "eq", "ne"):
                roots = _roots(d.lhs) | _roots(d.rhs)
                in_compare |= roots
                sender = sender or MSG_SENDER in roots
            stack.extend((d.lhs, d.rhs))
        elif isinstance(d, UnOp):
            stack.append(d.src)
    return in_compare, sender


def _default_text(ty) -> str:
    if isinstance(ty, AddressType):
        return "zero address"
    if isinstance(ty, BoolType):
        return "false"
    if isinstance(ty, (IntType, EnumType)):
        return "0"
    if isinstance(ty, ArrayType) and ty.length is None:
        return "an empty array"
    return "its default value"


def _enclosing(contract, span: Span) -> str:
    for m in contract.modifiers:
        if m.span.start <= span.start < m.span.end:
            return f"modifier {m.name}"
    for fn in contract.functions:
        if fn.span.start <= span.start < fn.span.end:
            return "the constructor" if fn.is_constructor else f"function {fn.name}"
    return "the contract"


def d4_uninitialized_variable(analysis: ContractAnalysis) -> List[Diagnostic]:
    contract = analysis.symbols.contract
    written: Set[str] = set()
    read: Set[str] = set()
    checked: Dict[str, Tuple[Span, bool]] = {}
    for cfg in analysis.cfgs.values():
        defs = cfg.temp_defs()
        for _, _, ins in cfg.instructions():
            d = ins.dest_place()
            if d is not None:
                written.add(d.root)
                for elem in d.path:
                    if isinstance(elem, Index):
                        read |= _roots(elem.operand)
            for x in ins.reads():
                read |= _roots(x)
            if isinstance(ins, (Require, Assert)):
                roots, sender = _condition_roots(cfg, ins.cond, defs)
                for r in roots:
                    checked.setdefault(r, (ins.span, sender))
    initial = None
    for res in analysis.results.values():
        if not res.cfg.is_constructor:
            initial = res.initial
            break
    out = []
    for v in contract.state_vars:
        key = v.symbol.key
        if v.init is not None or key in written or key not in read:
            continue
        value = initial.get(key) if initial is not None else None
        ev = _evidence((v.name, value.iv)) if isinstance(value, Scalar) else ()
        stuck = _default_text(v.symbol.ty)
        if key in checked:
            span, sender = checked[key]
            where = _enclosing(contract, span)
            if sender:
                msg = f"{v.name} stuck at {stuck}; {where.split(' ', 1)[-1]} can never pass for a real sender"
            else:
                msg = f"{v.name} is never assigned and stays {stuck}; the check in {where} always sees that value"
            out.append(Diagnostic(D4, "error", v.span, msg, ev))
        else:
            out.append(Diagnostic(D4, "warning", v.span, f"{v.name} is never assigned and stays stuck at {stuck}", ev))
    return out


# --- driver ------------------------------------------------------------------------------


def run_detectors(analysis: ContractAnalysis, config: DetectorConfig = DetectorConfig()) -> List[Diagnostic]:
    """All enabled findings for one contract, de-duplicated by (detector, span) and sorted."""
    found: List[Diagnostic] = []
    for name, res in analysis.results.items():
        fn = f"{analysis.name}.{name}"
        batch: List[Diagnostic] = []
        if D1 in config.enabled:
            batch += d1_tautology_contradiction(res.events)
        if D2 in config.enabled:
            batch += d2_division_by_zero(res.events)
        if D3 in config.enabled:
            batch += d3_division_remainder(res.events, res.cfg)
        if D5 in config.enabled:
            batch += d5_unvalidated_input(res.events)
        if D6 in config.enabled:
            batch += d6_unmatched_type(res.events)
        found += [_with_function(d, fn) for d in batch]
    if D4 in config.enabled:
        found += [_with_function(d, analysis.name) for d in d4_uninitialized_variable(analysis)]
    return finalize(found, config)


def _with_function(d: Diagnostic, fn: str) -> Diagnostic:
    return Diagnostic(d.detector, d.severity, d.span, d.message, d.evidence, fn)


def finalize(diags: Sequence[Diagnostic], config: DetectorConfig = DetectorConfig()) -> List[Diagnostic]:
    seen = set()
    out = []
    for d in sorted(diags, key=lambda d: (d.sort_key(), d.function)):
        key = (d.detector, d.span.start, d.span.end)
        if key in seen:
            continue
        seen.add(key)
        sev = config.severity.get(d.detector, d.severity)
        out.append(d if sev == d.severity else Diagnostic(d.detector, sev, d.span, d.message, d.evidence, d.function))
    return out
