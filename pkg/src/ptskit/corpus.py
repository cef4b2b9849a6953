"""Judgement files and the property report the CLI's verify runs.

A judgement file holds one judgement: a ``ctx:`` section with one
binding per line, a blank line, a ``term:`` section, and optionally a
``type:`` section.  Terms may wrap across lines inside a section.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .syntax import (
    CC,
    App,
    BVar,
    Context,
    Expr,
    Lam,
    ParseError,
    Pi,
    PtsSpec,
    SIGMA_NODES,
    SortE,
    Var,
    parse_context,
    parse_expr,
    print_expr,
)
from .reduction import (
    DEFAULT_FUEL,
    FuelExhausted,
    beta_eq,
    normalize,
    reducts_within,
    step_all,
)
from .typecheck import TypeCheckError, check_type, classify, infer_type, wf_context
from .translate import (
    CheckEntry,
    check_reduction_preservation,
    check_translation,
)
from .labeled import (
    erase,
    label_context,
    label_term,
    labeled_infer,
    tight_step_all,
)


@dataclass(frozen=True)
class Judgement:
    name: str
    ctx: Context
    term: Expr
    ty: Expr | None


def _mentions_sigma(e: Expr) -> bool:
    if isinstance(e, SIGMA_NODES):
        return True
    match e:
        case SortE() | Var() | BVar():
            return False
        case Pi(_, a, b) | Lam(_, a, b) | App(a, b):
            return _mentions_sigma(a) or _mentions_sigma(b)
        case _:
            return True


def judgement_uses_sigma(j: Judgement) -> bool:
    exprs = [j.term] + [ty for _, ty in j.ctx]
    if j.ty is not None:
        exprs.append(j.ty)
    return any(_mentions_sigma(e) for e in exprs)


def parse_judgement(text: str, sigma_enabled: bool = False, name: str = "<judgement>") -> Judgement:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.endswith(":") and line[:-1] in ("ctx", "term", "type"):
            current = line[:-1]
            sections[current] = []
            continue
        if not line:
            continue
        if current is None:
            raise ParseError("expected 'ctx:', 'term:' or 'type:'", lineno, 1)
        sections[current].append(line)
    if "term" not in sections:
        raise ParseError("judgement has no 'term:' section", 1, 1)
    ctx = parse_context("\n".join(sections.get("ctx", [])), sigma_enabled)
    term = parse_expr(" ".join(sections["term"]), sigma_enabled)
    ty = None
    if "type" in sections:
        ty = parse_expr(" ".join(sections["type"]), sigma_enabled)
    return Judgement(name, ctx, term, ty)


def load_judgement_file(path: str, sigma_enabled: bool = False) -> Judgement:
    with open(path, encoding="utf-8") as fh:
        return parse_judgement(fh.read(), sigma_enabled, name=os.path.basename(path))


def load_corpus_dir(path: str, sigma_enabled: bool = False) -> list[Judgement]:
    out = []
    for entry in sorted(os.listdir(path)):
        full = os.path.join(path, entry)
        if os.path.isfile(full) and entry.endswith(".judg"):
            out.append(load_judgement_file(full, sigma_enabled))
    if not out:
        raise ValueError(f"no .judg files in {path}")
    return out


# ---------------------------------------------------------------------------
# The property battery


def run_report(
    judgements: list[Judgement],
    spec: PtsSpec | None = None,
    fuel: int = DEFAULT_FUEL,
    depth: int = 12,
) -> list[CheckEntry]:
    """Run every per-judgement property; one PASS/FAIL entry per check.

    Typing, preservation and normalization run for any system; the
    classification, translation, simulation and labeling checks are
    CC-specific and are skipped for sigma-using judgements, which the
    translation does not cover.
    """
    spec = spec or CC
    entries: list[CheckEntry] = []
    for j in judgements:
        entries.extend(_report_one(j, spec, fuel, depth))
    return entries


def _entry(ok: bool, name: str, j: Judgement, extra: str = "") -> CheckEntry:
    detail = f"{j.name}: {print_expr(j.term)}"
    if extra:
        detail += f" ({extra})"
    return CheckEntry(ok, name, detail)


def _report_one(j: Judgement, spec: PtsSpec, fuel: int, depth: int) -> list[CheckEntry]:
    entries: list[CheckEntry] = []
    try:
        wf_context(spec, j.ctx, fuel)
        entries.append(_entry(True, "ctx-wf", j))
    except TypeCheckError as err:
        return [_entry(False, "ctx-wf", j, str(err))]

    try:
        inferred = infer_type(spec, j.ctx, j.term, fuel)
        if j.ty is not None:
            check_type(spec, j.ctx, j.term, j.ty, fuel)
        entries.append(_entry(True, "typing", j))
    except TypeCheckError as err:
        entries.append(_entry(False, "typing", j, str(err)))
        return entries

    ok = True
    why = ""
    try:
        for reduct in reducts_within(j.term, 3) - {j.term}:
            r = beta_eq(infer_type(spec, j.ctx, reduct, fuel), inferred, fuel)
            if r is not True:
                ok = False
                why = f"type changed across {print_expr(j.term)} ~>* {print_expr(reduct)}"
                break
    except TypeCheckError as err:
        ok, why = False, str(err)
    entries.append(_entry(ok, "preservation", j, why))

    try:
        normalize(j.term, fuel)
        entries.append(_entry(True, "normalizes", j))
    except FuelExhausted:
        entries.append(_entry(False, "normalizes", j, f"no normal form within {fuel} steps"))

    cc_like = spec.sorts == CC.sorts and spec.rules == CC.rules
    if not cc_like:
        return entries

    try:
        classify(j.ctx, j.term, fuel, spec)
        entries.append(_entry(True, "classification", j))
    except TypeCheckError as err:
        entries.append(_entry(False, "classification", j, str(err)))

    if judgement_uses_sigma(j):
        return entries

    entries.extend(check_translation(j.ctx, j.term, fuel))
    entries.extend(check_reduction_preservation(j.ctx, j.term, depth, fuel))

    try:
        la = label_term(CC, j.ctx, j.term, fuel)
        entries.append(_entry(erase(la) == j.term, "labeled-roundtrip", j))
        lctx = label_context(CC, j.ctx, fuel)
        labeled_infer(CC, lctx, la, fuel)
        plain = step_all(j.term)
        sim_ok = all(
            erase(r) == j.term or erase(r) in plain for r in tight_step_all(la)
        )
        entries.append(_entry(sim_ok, "tight-erasure", j))
    except TypeCheckError as err:
        entries.append(_entry(False, "labeled-roundtrip", j, str(err)))
    return entries
