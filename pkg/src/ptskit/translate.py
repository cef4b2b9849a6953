"""Dependency-erasing translation from CC into F-omega.

Three mutually supporting maps do the work:

* a kind map that forgets dependency, sending both sorts to ``*`` and
  keeping only kind-level arrows;
* a type translation that replaces both sorts by the fixed type
  variable ``_0`` and doubles kind-level products with an extra
  non-dependent argument;
* a term translation that lowers constructors to the term level while
  keeping every redex of the source alive (extra ``_y`` redexes hold
  translations that would otherwise be erased).

Translated contexts start with ``_0 : *`` and ``_z : (x:*) -> x``; the
latter manufactures a canonical inhabitant for any type.  Every
kind-level binding ``x`` gains a term-level companion ``_w$x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    STAR,
    App,
    BVar,
    Context,
    Expr,
    Lam,
    Pi,
    RESERVED_PREFIX,
    SortE,
    Var,
    close_binder,
    free_vars,
    fresh_name,
    open_binder,
    print_expr,
    subst,
    SIGMA_NODES,
    FOMEGA,
    CC,
)
from .reduction import DEFAULT_FUEL, beta_eq, reachable, step_all
from .typecheck import (
    GammaConstructor,
    GammaTerm,
    Kind,
    TypeCheckError,
    check_type,
    classify,
    infer_type,
    wf_context,
)

ZERO = "_0"
Z = "_z"
W_PREFIX = "_w$"
Y_PREFIX = "_y"

_ZERO_VAR = Var(ZERO)
_Z_TYPE = Pi("x", SortE(STAR), BVar(0))


class ReservedNameError(ValueError):
    """Input mentions a generated name; such inputs are rejected, not renamed."""


def _check_input(e: Expr) -> None:
    bad = sorted(n for n in free_vars(e) if n.startswith(RESERVED_PREFIX))
    if bad:
        raise ReservedNameError(f"input mentions reserved names: {', '.join(bad)}")


def _check_context(ctx: Context) -> None:
    for name, ty in ctx:
        if name.startswith(RESERVED_PREFIX):
            raise ReservedNameError(f"context binds reserved name {name!r}")
        _check_input(ty)


@dataclass
class TransEnv:
    """Context index for the translation plus a fresh-name supply.

    Child environments created by ``extended`` share the counter and the
    canonical-inhabitant log, so one translation run is deterministic
    and auditable end to end.
    """

    cc_context: Context
    fuel: int = DEFAULT_FUEL
    _counter: list[int] = field(default_factory=lambda: [0])
    canonical_log: list[tuple[Context, Expr]] = field(default_factory=list)

    def __post_init__(self):
        _check_context(self.cc_context)

    def extended(self, name: str, ty: Expr) -> TransEnv:
        child = TransEnv.__new__(TransEnv)
        child.cc_context = self.cc_context.extend(name, ty)
        child.fuel = self.fuel
        child._counter = self._counter
        child.canonical_log = self.canonical_log
        return child

    def fresh_y(self) -> str:
        self._counter[0] += 1
        return f"{Y_PREFIX}{self._counter[0]}"

    def fresh_binder(self, hint: str, *exprs: Expr) -> str:
        avoid = self.cc_context.names()
        for e in exprs:
            avoid |= free_vars(e)
        return fresh_name(hint, avoid)


def is_cc_kind(e: Expr) -> bool:
    """Kinds need no context: they are ``*`` under a spine of products."""
    match e:
        case SortE(name):
            return name == STAR
        case Pi(_, _, cod):
            return is_cc_kind(cod)
        case _:
            return False


def erase_kind(a: Expr) -> Expr:
    """Map a CC sort or kind to the corresponding F-omega kind.

    Both sorts land on ``*``; a product keeps its domain only when the
    domain is itself a kind.  The result never mentions variables.
    """
    match a:
        case SortE():
            return SortE(STAR)
        case Pi(_, dom, cod) if is_cc_kind(a):
            if is_cc_kind(dom):
                return Pi("_", erase_kind(dom), erase_kind(cod))
            return erase_kind(cod)
        case _:
            raise ValueError(f"not a sort or kind: {print_expr(a)}")


def _is_fomega_kind(e: Expr) -> bool:
    match e:
        case SortE(name):
            return name == STAR
        case Pi(_, dom, cod):
            return _is_fomega_kind(dom) and _is_fomega_kind(cod)
        case _:
            return False


def canonical_inhabitant(env: TransEnv, b: Expr) -> Expr:
    """A closed-form inhabitant of any valid F-omega type or kind.

    Types are inhabited through ``_z``; kinds structurally, ending in
    ``_0``.  Every request is logged so the inhabitants can be re-checked.
    """
    env.canonical_log.append((env.cc_context, b))
    return _canonical(b)


def _canonical(b: Expr) -> Expr:
    if _is_fomega_kind(b):
        if b == SortE(STAR):
            return _ZERO_VAR
        return Lam(b.hint, b.dom, _canonical(b.cod))
    if isinstance(b, (SortE, Lam)):
        raise ValueError(f"no canonical inhabitant for {print_expr(b)}")
    return App(Var(Z), b)


def translate_type(env: TransEnv, a: Expr) -> Expr:
    """The type translation; defined on sorts, kinds and constructors."""
    _check_input(a)
    return _trans_type(env, a)


def _trans_type(env: TransEnv, a: Expr) -> Expr:
    ctx = env.cc_context
    match a:
        case SortE():
            return _ZERO_VAR
        case Var():
            return a
        case Pi(h, dom, cod):
            x = env.fresh_binder(h, dom, cod)
            inner = env.extended(x, dom)
            tb = _trans_type(inner, open_binder(cod, x))
            if isinstance(classify(ctx, dom, env.fuel), Kind):
                doubled = Pi("_", _trans_type(env, dom), tb)
                return Pi(h, erase_kind(dom), close_binder(doubled, x))
            return Pi(h, _trans_type(env, dom), close_binder(tb, x))
        case Lam(h, annot, body):
            x = env.fresh_binder(h, annot, body)
            inner = env.extended(x, annot)
            tb = _trans_type(inner, open_binder(body, x))
            if isinstance(classify(ctx, annot, env.fuel), Kind):
                return Lam(h, erase_kind(annot), close_binder(tb, x))
            # A term-level binder contributes nothing to the erased type.
            if x in free_vars(tb):
                raise AssertionError(f"term binder {x} survived type translation")
            return tb
        case App(fun, arg):
            cls = classify(ctx, arg, env.fuel)
            if isinstance(cls, GammaConstructor):
                return App(_trans_type(env, fun), _trans_type(env, arg))
            if isinstance(cls, GammaTerm):
                return _trans_type(env, fun)
            raise ValueError(f"application argument {print_expr(arg)} classifies as a kind")
        case _ if isinstance(a, SIGMA_NODES):
            raise ValueError("the translation covers core CC only, not the sigma extension")
        case _:
            raise ValueError(f"not a sort, kind or constructor: {print_expr(a)}")


def translate_context(ctx: Context, fuel: int = DEFAULT_FUEL) -> Context:
    """Translate a CC context to its F-omega counterpart.

    ``_0`` and ``_z`` go in front; a kind-level binding ``x : A``
    becomes the type variable ``x`` of kind ``erase_kind(A)`` plus the
    term companion ``_w$x`` of type ``translate_type(A)``; a type-level
    binding keeps its name at the translated type.
    """
    _check_context(ctx)
    out = Context().extend(ZERO, SortE(STAR)).extend(Z, _Z_TYPE)
    prefix = Context()
    for name, ty in ctx:
        env = TransEnv(prefix, fuel)
        if isinstance(classify(prefix, ty, fuel), Kind):
            out = out.extend(name, erase_kind(ty))
            out = out.extend(W_PREFIX + name, _trans_type(env, ty))
        else:
            out = out.extend(name, _trans_type(env, ty))
        prefix = prefix.extend(name, ty)
    return out


def translate_term(env: TransEnv, a: Expr) -> Expr:
    """The term translation; keeps every reduction of the source alive."""
    _check_input(a)
    return _trans_term(env, a)


_C_FN_TYPE = Pi("_", _ZERO_VAR, Pi("_", _ZERO_VAR, _ZERO_VAR))


def _trans_term(env: TransEnv, a: Expr) -> Expr:
    ctx = env.cc_context
    match a:
        case SortE(name):
            if name != STAR:
                raise ValueError(f"{name} is not a typeable subject, cannot translate it")
            return canonical_inhabitant(env, _ZERO_VAR)
        case Var(name):
            ty = ctx.lookup(name)
            if ty is None:
                raise KeyError(f"variable {name} not bound in the translation context")
            if isinstance(classify(ctx, ty, env.fuel), Kind):
                return Var(W_PREFIX + name)
            return a
        case Pi(h, dom, cod):
            c_fn = canonical_inhabitant(env, _C_FN_TYPE)
            t_dom = _trans_term(env, dom)
            x = env.fresh_binder(h, dom, cod)
            inner = env.extended(x, dom)
            t_cod = _trans_term(inner, open_binder(cod, x))
            if isinstance(classify(ctx, dom, env.fuel), Kind):
                t_cod = subst(t_cod, x, canonical_inhabitant(env, erase_kind(dom)))
                t_cod = subst(t_cod, W_PREFIX + x, canonical_inhabitant(env, _trans_type(env, dom)))
            else:
                t_cod = subst(t_cod, x, canonical_inhabitant(env, _trans_type(env, dom)))
            return App(App(c_fn, t_dom), t_cod)
        case Lam(h, annot, body):
            y = env.fresh_y()
            t_annot = _trans_term(env, annot)
            x = env.fresh_binder(h, annot, body)
            inner = env.extended(x, annot)
            t_body = _trans_term(inner, open_binder(body, x))
            if isinstance(classify(ctx, annot, env.fuel), Kind):
                w = W_PREFIX + x
                wrapped = Lam(w, _trans_type(env, annot), close_binder(t_body, w))
                wrapped = Lam(h, erase_kind(annot), close_binder(wrapped, x))
            else:
                wrapped = Lam(h, _trans_type(env, annot), close_binder(t_body, x))
            return App(Lam(y, _ZERO_VAR, wrapped), t_annot)
        case App(fun, arg):
            t_fun = _trans_term(env, fun)
            cls = classify(ctx, arg, env.fuel)
            if isinstance(cls, GammaConstructor):
                return App(App(t_fun, _trans_type(env, arg)), _trans_term(env, arg))
            if isinstance(cls, GammaTerm):
                return App(t_fun, _trans_term(env, arg))
            raise ValueError(f"application argument {print_expr(arg)} classifies as a kind")
        case _ if isinstance(a, SIGMA_NODES):
            raise ValueError("the translation covers core CC only, not the sigma extension")
        case _:
            raise ValueError(f"cannot translate {print_expr(a)}")


# ---------------------------------------------------------------------------
# Executable checks


@dataclass(frozen=True)
class CheckEntry:
    ok: bool
    name: str
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name} {self.detail}"


def render_report(entries) -> str:
    return "\n".join(entry.line() for entry in entries)


def check_translation(ctx: Context, a: Expr, fuel: int = DEFAULT_FUEL) -> list[CheckEntry]:
    """Re-check the translated judgement with the F-omega checker."""
    entries: list[CheckEntry] = []
    try:
        wf_context(CC, ctx, fuel)
        a_ty = infer_type(CC, ctx, a, fuel)
        tctx = translate_context(ctx, fuel)
        ta = translate_term(TransEnv(ctx, fuel), a)
        t_ty = translate_type(TransEnv(ctx, fuel), a_ty)
    except (TypeCheckError, ValueError, KeyError) as err:
        return [CheckEntry(False, "translation", f"setup failed: {err}")]

    judgement = f"|- {print_expr(ta)} : {print_expr(t_ty)}"
    try:
        check_type(FOMEGA, tctx, ta, t_ty, fuel)
        entries.append(CheckEntry(True, "term-translation", judgement))
    except TypeCheckError as err:
        entries.append(CheckEntry(False, "term-translation", f"{judgement} ({err})"))

    cls = classify(ctx, a, fuel)
    if not isinstance(cls, GammaTerm):
        try:
            t_a = translate_type(TransEnv(ctx, fuel), a)
            v_ty = erase_kind(a_ty)
            judgement = f"|- {print_expr(t_a)} : {print_expr(v_ty)}"
            check_type(FOMEGA, tctx, t_a, v_ty, fuel)
            entries.append(CheckEntry(True, "type-translation", judgement))
        except (TypeCheckError, ValueError) as err:
            entries.append(CheckEntry(False, "type-translation", str(err)))
    return entries


def check_reduction_preservation(
    ctx: Context, a: Expr, max_depth: int = 12, fuel: int = DEFAULT_FUEL
) -> list[CheckEntry]:
    """Every source step must be simulated by >= 1 translated steps."""
    entries: list[CheckEntry] = []
    try:
        ta = translate_term(TransEnv(ctx, fuel), a)
    except (TypeCheckError, ValueError, KeyError) as err:
        return [CheckEntry(False, "simulation", f"setup failed: {err}")]
    for reduct in sorted(step_all(a), key=print_expr):
        detail = f"{print_expr(a)} ~> {print_expr(reduct)}"
        try:
            t_reduct = translate_term(TransEnv(ctx, fuel), reduct)
        except (TypeCheckError, ValueError, KeyError) as err:
            entries.append(CheckEntry(False, "simulation", f"{detail} ({err})"))
            continue
        ok = reachable(ta, t_reduct, max_depth, min_steps=1)
        entries.append(CheckEntry(ok, "simulation", detail))
    return entries


def check_subst_lemmas(
    ctx: Context, a: Expr, x: str, b: Expr, fuel: int = DEFAULT_FUEL
) -> list[CheckEntry]:
    """Substitution commutes with both translations, verbatim equalities.

    Hypotheses: ``x`` is bound in ``ctx``, ``b`` has x's type there, and
    ``b`` does not itself mention ``x`` (the shape in which the results
    are ever used).
    """
    entries: list[CheckEntry] = []
    b_ty = ctx.lookup(x)
    if b_ty is None:
        return [CheckEntry(False, "subst-hypotheses", f"{x} not bound in context")]
    if x in free_vars(b):
        return [CheckEntry(False, "subst-hypotheses", f"replacement mentions {x}")]
    try:
        inferred = infer_type(CC, ctx, b, fuel)
        if beta_eq(inferred, b_ty, fuel) is not True:
            return [CheckEntry(False, "subst-hypotheses", f"replacement is not of {x}'s type")]
        binding_is_kind = isinstance(classify(ctx, b_ty, fuel), Kind)
        a_cls = classify(ctx, a, fuel)
    except TypeCheckError as err:
        return [CheckEntry(False, "subst-hypotheses", str(err))]
    entries.append(CheckEntry(True, "subst-hypotheses", f"[{print_expr(b)}/{x}]"))

    substituted = subst(a, x, b)
    if not isinstance(a_cls, GammaTerm):
        try:
            lhs = translate_type(TransEnv(ctx, fuel), substituted)
            rhs = translate_type(TransEnv(ctx, fuel), a)
            if binding_is_kind:
                rhs = subst(rhs, x, translate_type(TransEnv(ctx, fuel), b))
            ok = lhs == rhs
            entries.append(
                CheckEntry(ok, "type-subst", f"[{print_expr(b)}/{x}]{print_expr(a)}")
            )
        except (TypeCheckError, ValueError) as err:
            entries.append(CheckEntry(False, "type-subst", str(err)))

    try:
        lhs = translate_term(TransEnv(ctx, fuel), substituted)
        rhs = translate_term(TransEnv(ctx, fuel), a)
        if binding_is_kind:
            rhs = subst(rhs, W_PREFIX + x, translate_term(TransEnv(ctx, fuel), b))
            rhs = subst(rhs, x, translate_type(TransEnv(ctx, fuel), b))
        else:
            rhs = subst(rhs, x, translate_term(TransEnv(ctx, fuel), b))
        ok = lhs == rhs
        entries.append(CheckEntry(ok, "term-subst", f"[{print_expr(b)}/{x}]{print_expr(a)}"))
    except (TypeCheckError, ValueError) as err:
        entries.append(CheckEntry(False, "term-subst", str(err)))
    return entries


def check_canonical_inhabitants(env: TransEnv, fuel: int = DEFAULT_FUEL) -> list[CheckEntry]:
    """Re-check every canonical inhabitant logged during a translation."""
    entries: list[CheckEntry] = []
    for cc_ctx, b in env.canonical_log:
        detail = f"c^{print_expr(b)}"
        try:
            tctx = translate_context(cc_ctx, fuel)
            check_type(FOMEGA, tctx, _canonical(b), b, fuel)
            entries.append(CheckEntry(True, "canonical", detail))
        except (TypeCheckError, ValueError) as err:
            entries.append(CheckEntry(False, "canonical", f"{detail} ({err})"))
    return entries
