"""Syntax-directed inference and checking for an arbitrary PTS.

Conversion is folded into the application and checking sites via
bounded beta-equality; with confluence and normalization of well-typed
terms this recovers the declarative conversion rule for the built-in
systems.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass

from .syntax import (
    BOX,
    STAR,
    App,
    BVar,
    Context,
    Expr,
    Lam,
    Pair,
    Pi,
    Proj1,
    Proj2,
    PtsSpec,
    Sigma,
    SortE,
    Var,
    BUILTIN_SPECS,
    close_binder,
    free_vars,
    fresh_name,
    instantiate,
    open_binder,
    print_expr,
)
from .reduction import DEFAULT_FUEL, UNDETERMINED, FuelExhausted, beta_eq, normalize, whnf


class ErrorKind(enum.Enum):
    UNBOUND_VARIABLE = "UnboundVariable"
    NO_AXIOM = "NoAxiom"
    NO_RULE = "NoRule"
    NOT_A_FUNCTION = "NotAFunction"
    MISMATCH = "Mismatch"
    ILL_FORMED_CONTEXT = "IllFormedContext"
    SORT_UNTYPEABLE = "SortUntypeable"
    FUEL_EXHAUSTED = "FuelExhausted"
    SIGMA_DISABLED = "SigmaDisabled"
    DIRECTED_CONVERSION_UNDETERMINED = "DirectedConversionUndetermined"


class TypeCheckError(Exception):
    def __init__(self, kind: ErrorKind, message: str):
        super().__init__(f"{kind.value}: {message}")
        self.kind = kind
        self.message = message


def _fail(kind: ErrorKind, message: str):
    raise TypeCheckError(kind, message)


def _fresh_for(ctx: Context, hint: str, *exprs: Expr) -> str:
    avoid = ctx.names()
    for e in exprs:
        avoid |= free_vars(e)
    return fresh_name(hint, avoid)


def _as_sort(spec: PtsSpec, ty: Expr, fuel: int, subject: Expr) -> str:
    """Normalize ``ty`` and require it to be a sort of ``spec``."""
    try:
        n = normalize(ty, fuel)
    except FuelExhausted:
        _fail(ErrorKind.FUEL_EXHAUSTED, f"normalizing the type of {print_expr(subject)}")
    if isinstance(n, SortE) and n.name in spec.sorts:
        return n.name
    _fail(
        ErrorKind.SORT_UNTYPEABLE,
        f"{print_expr(subject)} is classified by {print_expr(n)}, not a sort",
    )


def _convertible(a: Expr, b: Expr, fuel: int, where: str) -> None:
    r = beta_eq(a, b, fuel)
    if r is True:
        return
    if r is UNDETERMINED:
        _fail(ErrorKind.FUEL_EXHAUSTED, f"conversion undecided in {where}")
    _fail(ErrorKind.MISMATCH, f"{where}: {print_expr(a)} is not convertible with {print_expr(b)}")


def wf_context(spec: PtsSpec, ctx: Context, fuel: int = DEFAULT_FUEL) -> None:
    """Check names are distinct and every binding type has a sort."""
    prefix = Context()
    for name, ty in ctx:
        if name in prefix.names():
            _fail(ErrorKind.ILL_FORMED_CONTEXT, f"duplicate binding for {name!r}")
        try:
            ty_of_ty = infer_type(spec, prefix, ty, fuel)
            _as_sort(spec, ty_of_ty, fuel, ty)
        except TypeCheckError as err:
            _fail(
                ErrorKind.ILL_FORMED_CONTEXT,
                f"binding {name} : {print_expr(ty)} is ill-formed ({err})",
            )
        prefix = prefix.extend(name, ty)


def infer_type(spec: PtsSpec, ctx: Context, e: Expr, fuel: int = DEFAULT_FUEL) -> Expr:
    """Return a type A with ctx |- e : A, or raise TypeCheckError."""
    match e:
        case SortE(s):
            if s not in spec.sorts:
                _fail(ErrorKind.SORT_UNTYPEABLE, f"unknown sort {s}")
            s2 = spec.axiom_for(s)
            if s2 is None:
                _fail(ErrorKind.NO_AXIOM, f"sort {s} has no type")
            return SortE(s2)
        case Var(name):
            ty = ctx.lookup(name)
            if ty is None:
                _fail(ErrorKind.UNBOUND_VARIABLE, f"unbound variable {name}")
            return ty
        case BVar():
            raise ValueError("dangling bound variable reached the type checker")
        case Pi(h, dom, cod):
            s1 = _as_sort(spec, infer_type(spec, ctx, dom, fuel), fuel, dom)
            x = _fresh_for(ctx, h, dom, cod)
            cod_x = open_binder(cod, x)
            s2 = _as_sort(spec, infer_type(spec, ctx.extend(x, dom), cod_x, fuel), fuel, cod_x)
            s3 = spec.rule_for(s1, s2)
            if s3 is None:
                _fail(ErrorKind.NO_RULE, f"no rule ({s1},{s2},_) to form {print_expr(e)}")
            return SortE(s3)
        case Lam(h, annot, body):
            x = _fresh_for(ctx, h, annot, body)
            body_ty = infer_type(spec, ctx.extend(x, annot), open_binder(body, x), fuel)
            pi = Pi(h, annot, close_binder(body_ty, x))
            # TLam demands the synthesized product itself be well-sorted.
            infer_type(spec, ctx, pi, fuel)
            return pi
        case App(fun, arg):
            fun_ty = infer_type(spec, ctx, fun, fuel)
            try:
                head = whnf(fun_ty, fuel)
            except FuelExhausted:
                _fail(ErrorKind.FUEL_EXHAUSTED, f"exposing the type of {print_expr(fun)}")
            if not isinstance(head, Pi):
                _fail(
                    ErrorKind.NOT_A_FUNCTION,
                    f"{print_expr(fun)} has type {print_expr(fun_ty)}, which is not a function type",
                )
            arg_ty = infer_type(spec, ctx, arg, fuel)
            _convertible(arg_ty, head.dom, fuel, f"argument of {print_expr(fun)}")
            return instantiate(head.cod, arg)
        case Sigma(h, first, second):
            _require_sigma(spec, e)
            first_sort = _as_sort(spec, infer_type(spec, ctx, first, fuel), fuel, first)
            if first_sort != STAR:
                _fail(
                    ErrorKind.MISMATCH,
                    f"Sig first component {print_expr(first)} must be a type, has sort {first_sort}",
                )
            x = _fresh_for(ctx, h, first, second)
            second_x = open_binder(second, x)
            s = _as_sort(spec, infer_type(spec, ctx.extend(x, first), second_x, fuel), fuel, second_x)
            return SortE(s)
        case Pair(first, second, annot):
            _require_sigma(spec, e)
            try:
                head = whnf(annot, fuel)
            except FuelExhausted:
                _fail(ErrorKind.FUEL_EXHAUSTED, f"exposing the pair annotation {print_expr(annot)}")
            if not isinstance(head, Sigma):
                _fail(ErrorKind.MISMATCH, f"pair annotation {print_expr(annot)} is not a Sig type")
            first_ty = infer_type(spec, ctx, first, fuel)
            _convertible(first_ty, head.first, fuel, "first pair component")
            second_ty = infer_type(spec, ctx, second, fuel)
            _convertible(second_ty, instantiate(head.second, first), fuel, "second pair component")
            infer_type(spec, ctx, annot, fuel)
            return annot
        case Proj1(p):
            _require_sigma(spec, e)
            head = _sigma_head(spec, ctx, p, fuel)
            return head.first
        case Proj2(p):
            _require_sigma(spec, e)
            head = _sigma_head(spec, ctx, p, fuel)
            return instantiate(head.second, Proj1(p))
        case _:
            raise TypeError(f"not an expression: {e!r}")


def _require_sigma(spec: PtsSpec, e: Expr) -> None:
    if not spec.sigma_enabled:
        _fail(ErrorKind.SIGMA_DISABLED, f"sigma extension is disabled: {print_expr(e)}")


def _sigma_head(spec: PtsSpec, ctx: Context, p: Expr, fuel: int) -> Sigma:
    ty = infer_type(spec, ctx, p, fuel)
    try:
        head = whnf(ty, fuel)
    except FuelExhausted:
        _fail(ErrorKind.FUEL_EXHAUSTED, f"exposing the type of {print_expr(p)}")
    if not isinstance(head, Sigma):
        _fail(ErrorKind.MISMATCH, f"{print_expr(p)} has type {print_expr(ty)}, not a Sig type")
    return head


def check_type(spec: PtsSpec, ctx: Context, e: Expr, ty: Expr, fuel: int = DEFAULT_FUEL) -> None:
    """Check ctx |- e : ty; ty itself must be well-sorted.

    A sort with no successor axiom (box in the built-ins) is accepted as
    the classifier of kinds even though it has no type itself.
    """
    inferred = infer_type(spec, ctx, e, fuel)
    top_sort = isinstance(ty, SortE) and ty.name in spec.sorts and spec.axiom_for(ty.name) is None
    if not top_sort:
        _as_sort(spec, infer_type(spec, ctx, ty, fuel), fuel, ty)
    _convertible(inferred, ty, fuel, f"checking {print_expr(e)}")


# ---------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class Kind:
    pass


@dataclass(frozen=True)
class GammaConstructor:
    is_type: bool


@dataclass(frozen=True)
class GammaTerm:
    pass


Classification = Kind | GammaConstructor | GammaTerm

_CC = BUILTIN_SPECS["cc"]


def classify(ctx: Context, e: Expr, fuel: int = DEFAULT_FUEL, spec: PtsSpec | None = None) -> Classification:
    """Sort a typeable CC expression into kind / constructor / term."""
    spec = spec or _CC
    ty = infer_type(spec, ctx, e, fuel)
    try:
        nty = normalize(ty, fuel)
    except FuelExhausted:
        _fail(ErrorKind.FUEL_EXHAUSTED, f"normalizing the type of {print_expr(e)}")
    if nty == SortE(BOX):
        return Kind()
    ty_of_ty = infer_type(spec, ctx, ty, fuel)
    s = _as_sort(spec, ty_of_ty, fuel, ty)
    if s == BOX:
        return GammaConstructor(is_type=nty == SortE(STAR))
    if s == STAR:
        return GammaTerm()
    _fail(ErrorKind.SORT_UNTYPEABLE, f"type of {print_expr(e)} is classified by {s}")


# ---------------------------------------------------------------------------
# PTS spec files


def parse_spec_text(text: str, sigma_enabled: bool = False) -> PtsSpec:
    """Parse "sort/axiom/rule" lines; a line starting with '#' is a comment.

    Comments are only recognized at the start of a line so that '#'
    remains usable as a sort name in axiom and rule fields.
    """
    sorts: set[str] = set()
    axioms: set[tuple[str, str]] = set()
    rules: set[tuple[str, str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "sort" and len(parts) == 2:
                sorts.add(parts[1])
            elif parts[0] == "axiom" and len(parts) == 3:
                axioms.add((parts[1], parts[2]))
            elif parts[0] == "rule" and len(parts) == 4:
                rules.add((parts[1], parts[2], parts[3]))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"spec line {lineno}: expected 'sort s', 'axiom s1 s2' or 'rule s1 s2 s3'")
    try:
        return PtsSpec(frozenset(sorts), frozenset(axioms), frozenset(rules), sigma_enabled)
    except ValueError as err:
        raise ValueError(f"bad spec: {err}") from err


def load_spec_file(path: str, sigma_enabled: bool = False) -> PtsSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read(), sigma_enabled)


def resolve_spec(name_or_path: str, sigma_enabled: bool = False) -> PtsSpec:
    """A built-in name ("stlc", "f", "fomega", "cc") or a spec file path."""
    if name_or_path in BUILTIN_SPECS:
        return BUILTIN_SPECS[name_or_path].with_sigma(sigma_enabled)
    if os.path.exists(name_or_path):
        return load_spec_file(name_or_path, sigma_enabled)
    raise ValueError(f"unknown system {name_or_path!r} (not a built-in, not a file)")
