"""Term language shared by every system the kernel handles.

One grammar covers terms, types and kinds.  Binding uses a locally
nameless representation: bound variables are de Bruijn indices, free
variables are names.  Binder names are kept only as printing hints and
are excluded from equality, so ``==`` on expressions *is*
alpha-equivalence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

STAR = "*"
BOX = "#"

# Identifiers beginning with "_" are producible only by the tool (the
# translation owns "_0", "_z", "_w$x", "_y1", ...).  parse_expr rejects
# them unless explicitly told otherwise.
RESERVED_PREFIX = "_"


class Expr:
    """Base class for expressions; all nodes are immutable."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_expr(self)


@dataclass(frozen=True)
class SortE(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    """A free variable occurrence."""

    name: str


@dataclass(frozen=True)
class BVar(Expr):
    """A bound variable as an index into the enclosing binders."""

    index: int


@dataclass(frozen=True)
class Pi(Expr):
    hint: str = field(compare=False)
    dom: Expr
    cod: Expr  # binds one variable


@dataclass(frozen=True)
class Lam(Expr):
    hint: str = field(compare=False)
    annot: Expr
    body: Expr  # binds one variable


@dataclass(frozen=True)
class App(Expr):
    fun: Expr
    arg: Expr


@dataclass(frozen=True)
class Sigma(Expr):
    hint: str = field(compare=False)
    first: Expr
    second: Expr  # binds one variable


@dataclass(frozen=True)
class Pair(Expr):
    """A dependent pair.

    Pairs carry their full Sigma type so that checking stays
    syntax-directed: the second component's type is not recoverable
    from the pair alone.
    """

    first: Expr
    second: Expr
    annot: Expr


@dataclass(frozen=True)
class Proj1(Expr):
    pair: Expr


@dataclass(frozen=True)
class Proj2(Expr):
    pair: Expr


SIGMA_NODES = (Sigma, Pair, Proj1, Proj2)


def alpha_eq(a: Expr, b: Expr) -> bool:
    """Equality up to bound-variable names (structural under the hood)."""
    return a == b


def free_vars(e: Expr) -> frozenset[str]:
    out: set[str] = set()
    _free_vars(e, out)
    return frozenset(out)


def _free_vars(e: Expr, out: set[str]) -> None:
    match e:
        case Var(name):
            out.add(name)
        case SortE() | BVar():
            pass
        case Pi(_, dom, cod):
            _free_vars(dom, out)
            _free_vars(cod, out)
        case Lam(_, annot, body):
            _free_vars(annot, out)
            _free_vars(body, out)
        case App(fun, arg):
            _free_vars(fun, out)
            _free_vars(arg, out)
        case Sigma(_, first, second):
            _free_vars(first, out)
            _free_vars(second, out)
        case Pair(first, second, annot):
            _free_vars(first, out)
            _free_vars(second, out)
            _free_vars(annot, out)
        case Proj1(p) | Proj2(p):
            _free_vars(p, out)
        case _:
            raise TypeError(f"not an expression: {e!r}")


def size(e: Expr) -> int:
    match e:
        case SortE() | Var() | BVar():
            return 1
        case Pi(_, a, b) | Lam(_, a, b) | Sigma(_, a, b) | App(a, b):
            return 1 + size(a) + size(b)
        case Pair(a, b, t):
            return 1 + size(a) + size(b) + size(t)
        case Proj1(p) | Proj2(p):
            return 1 + size(p)
        case _:
            raise TypeError(f"not an expression: {e!r}")


def _shift(e: Expr, by: int, cutoff: int) -> Expr:
    """Add ``by`` to every dangling index >= cutoff."""
    match e:
        case BVar(i):
            return BVar(i + by) if i >= cutoff else e
        case SortE() | Var():
            return e
        case Pi(h, dom, cod):
            return Pi(h, _shift(dom, by, cutoff), _shift(cod, by, cutoff + 1))
        case Lam(h, annot, body):
            return Lam(h, _shift(annot, by, cutoff), _shift(body, by, cutoff + 1))
        case App(f, a):
            return App(_shift(f, by, cutoff), _shift(a, by, cutoff))
        case Sigma(h, a, b):
            return Sigma(h, _shift(a, by, cutoff), _shift(b, by, cutoff + 1))
        case Pair(a, b, t):
            return Pair(_shift(a, by, cutoff), _shift(b, by, cutoff), _shift(t, by, cutoff))
        case Proj1(p):
            return Proj1(_shift(p, by, cutoff))
        case Proj2(p):
            return Proj2(_shift(p, by, cutoff))
        case _:
            raise TypeError(f"not an expression: {e!r}")


def instantiate(body: Expr, arg: Expr, depth: int = 0) -> Expr:
    """Remove the innermost binder of ``body``, replacing its variable by ``arg``."""
    match body:
        case BVar(i):
            if i == depth:
                return _shift(arg, depth, 0) if depth else arg
            return BVar(i - 1) if i > depth else body
        case SortE() | Var():
            return body
        case Pi(h, dom, cod):
            return Pi(h, instantiate(dom, arg, depth), instantiate(cod, arg, depth + 1))
        case Lam(h, annot, b):
            return Lam(h, instantiate(annot, arg, depth), instantiate(b, arg, depth + 1))
        case App(f, a):
            return App(instantiate(f, arg, depth), instantiate(a, arg, depth))
        case Sigma(h, a, b):
            return Sigma(h, instantiate(a, arg, depth), instantiate(b, arg, depth + 1))
        case Pair(a, b, t):
            return Pair(instantiate(a, arg, depth), instantiate(b, arg, depth), instantiate(t, arg, depth))
        case Proj1(p):
            return Proj1(instantiate(p, arg, depth))
        case Proj2(p):
            return Proj2(instantiate(p, arg, depth))
        case _:
            raise TypeError(f"not an expression: {body!r}")


def open_binder(body: Expr, name: str) -> Expr:
    """Instantiate the innermost binder with the free variable ``name``."""
    return instantiate(body, Var(name))


def close_binder(e: Expr, name: str, depth: int = 0) -> Expr:
    """Abstract free occurrences of ``name`` into the binder being built.

    ``e`` must not contain dangling indices of its own.
    """
    match e:
        case Var(n):
            return BVar(depth) if n == name else e
        case SortE() | BVar():
            return e
        case Pi(h, dom, cod):
            return Pi(h, close_binder(dom, name, depth), close_binder(cod, name, depth + 1))
        case Lam(h, annot, body):
            return Lam(h, close_binder(annot, name, depth), close_binder(body, name, depth + 1))
        case App(f, a):
            return App(close_binder(f, name, depth), close_binder(a, name, depth))
        case Sigma(h, a, b):
            return Sigma(h, close_binder(a, name, depth), close_binder(b, name, depth + 1))
        case Pair(a, b, t):
            return Pair(close_binder(a, name, depth), close_binder(b, name, depth), close_binder(t, name, depth))
        case Proj1(p):
            return Proj1(close_binder(p, name, depth))
        case Proj2(p):
            return Proj2(close_binder(p, name, depth))
        case _:
            raise TypeError(f"not an expression: {e!r}")


def subst(target: Expr, name: str, replacement: Expr) -> Expr:
    """Capture-avoiding substitution of ``replacement`` for free ``name``.

    Capture is impossible by construction: bound variables are indices,
    and the free variables of ``replacement`` stay free.
    """
    match target:
        case Var(n):
            return replacement if n == name else target
        case SortE() | BVar():
            return target
        case Pi(h, dom, cod):
            return Pi(h, subst(dom, name, replacement), subst(cod, name, replacement))
        case Lam(h, annot, body):
            return Lam(h, subst(annot, name, replacement), subst(body, name, replacement))
        case App(f, a):
            return App(subst(f, name, replacement), subst(a, name, replacement))
        case Sigma(h, a, b):
            return Sigma(h, subst(a, name, replacement), subst(b, name, replacement))
        case Pair(a, b, t):
            return Pair(subst(a, name, replacement), subst(b, name, replacement), subst(t, name, replacement))
        case Proj1(p):
            return Proj1(subst(p, name, replacement))
        case Proj2(p):
            return Proj2(subst(p, name, replacement))
        case _:
            raise TypeError(f"not an expression: {target!r}")


def fresh_name(base: str, avoid) -> str:
    name = base if base and base != "_" else "x"
    while name in avoid:
        name += "'"
    return name


# ---------------------------------------------------------------------------
# PTS specifications


@dataclass(frozen=True)
class PtsSpec:
    """A pure type system: sorts, axioms over them, and product rules."""

    sorts: frozenset[str]
    axioms: frozenset[tuple[str, str]]
    rules: frozenset[tuple[str, str, str]]
    sigma_enabled: bool = False

    def __post_init__(self):
        mentioned = {s for ax in self.axioms for s in ax}
        mentioned.update(s for r in self.rules for s in r)
        stray = mentioned - self.sorts
        if stray:
            raise ValueError(f"axioms/rules mention undeclared sorts: {sorted(stray)}")

    def axiom_for(self, s: str) -> str | None:
        for s1, s2 in self.axioms:
            if s1 == s:
                return s2
        return None

    def rule_for(self, s1: str, s2: str) -> str | None:
        for r1, r2, r3 in self.rules:
            if r1 == s1 and r2 == s2:
                return r3
        return None

    def with_sigma(self, enabled: bool = True) -> PtsSpec:
        return replace(self, sigma_enabled=enabled)


def _spec(rules) -> PtsSpec:
    return PtsSpec(
        sorts=frozenset({STAR, BOX}),
        axioms=frozenset({(STAR, BOX)}),
        rules=frozenset(rules),
    )


STLC = _spec({(STAR, STAR, STAR)})
SYSTEM_F = _spec({(STAR, STAR, STAR), (BOX, STAR, STAR)})
FOMEGA = _spec({(STAR, STAR, STAR), (BOX, STAR, STAR), (BOX, BOX, BOX)})
CC = _spec({(STAR, STAR, STAR), (BOX, STAR, STAR), (BOX, BOX, BOX), (STAR, BOX, BOX)})

BUILTIN_SPECS = {"stlc": STLC, "f": SYSTEM_F, "fomega": FOMEGA, "cc": CC}


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class Context:
    """An ordered telescope of name : type bindings."""

    bindings: tuple[tuple[str, Expr], ...] = ()

    def lookup(self, name: str) -> Expr | None:
        for n, ty in self.bindings:
            if n == name:
                return ty
        return None

    def extend(self, name: str, ty: Expr) -> Context:
        return Context(self.bindings + ((name, ty),))

    def names(self) -> set[str]:
        return {n for n, _ in self.bindings}

    def __iter__(self):
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    def __str__(self) -> str:
        return print_context(self)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<proj>\.[12](?![A-Za-z0-9'$_]))
  | (?P<ident>[A-Za-z][A-Za-z0-9']*)
  | (?P<reserved>_[A-Za-z0-9'$_]*)
  | (?P<punct>[*\#()\\.:<>,@\[\]])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"Sig"}


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Tok:
    kind: str  # arrow | proj | ident | reserved | punct | eof | sig
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "ws":
            if kind == "ident" and lexeme in _KEYWORDS:
                kind = "sig"
            toks.append(_Tok(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], sigma_enabled: bool, allow_reserved: bool):
        self.toks = toks
        self.pos = 0
        self.sigma = sigma_enabled
        self.allow_reserved = allow_reserved

    def peek(self, ahead: int = 0) -> _Tok:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, message: str, tok: _Tok | None = None):
        t = tok or self.peek()
        raise ParseError(message, t.line, t.col)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            self.error(f"expected {want!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> str:
        t = self.peek()
        if t.kind == "ident":
            return self.next().text
        if t.kind == "reserved":
            if self.allow_reserved:
                return self.next().text
            self.error("identifiers starting with '_' are reserved for generated names")
        self.error(f"expected an identifier, found {t.text or 'end of input'!r}")

    def expr(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.text == "\\":
            self.next()
            name = self.ident()
            self.expect("punct", ":")
            annot = self.expr()
            self.expect("punct", ".")
            body = self.expr()
            return Lam(name, annot, close_binder(body, name))
        if t.kind == "sig":
            if not self.sigma:
                self.error("'Sig' requires the sigma extension")
            self.next()
            name = self.ident()
            self.expect("punct", ":")
            first = self.expr()
            self.expect("punct", ".")
            second = self.expr()
            return Sigma(name, first, close_binder(second, name))
        return self.arrow()

    def arrow(self) -> Expr:
        if self.at_pi_start():
            self.next()
            name = self.ident()
            self.expect("punct", ":")
            dom = self.expr()
            self.expect("punct", ")")
            self.expect("arrow")
            cod = self.expr()
            return Pi(name, dom, close_binder(cod, name))
        left = self.app()
        if self.peek().kind == "arrow":
            self.next()
            return Pi("_", left, self.expr())
        return left

    def at_pi_start(self) -> bool:
        t0, t1, t2 = self.peek(0), self.peek(1), self.peek(2)
        return (
            t0.kind == "punct"
            and t0.text == "("
            and t1.kind in ("ident", "reserved")
            and t2.kind == "punct"
            and t2.text == ":"
        )

    def app(self) -> Expr:
        e = self.postfix()
        while self.at_atom_start():
            if self.at_pi_start():
                self.error("parenthesize a dependent function type used as an argument")
            e = App(e, self.postfix())
        return e

    def at_atom_start(self) -> bool:
        t = self.peek()
        if t.kind in ("ident", "reserved"):
            return True
        return t.kind == "punct" and t.text in ("*", "#", "(", "<")

    def postfix(self) -> Expr:
        e = self.atom()
        while self.peek().kind == "proj":
            t = self.next()
            if not self.sigma:
                self.error("projections require the sigma extension", t)
            e = Proj1(e) if t.text == ".1" else Proj2(e)
        return e

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.text == "*":
            self.next()
            return SortE(STAR)
        if t.kind == "punct" and t.text == "#":
            self.next()
            return SortE(BOX)
        if t.kind in ("ident", "reserved"):
            return Var(self.ident())
        if t.kind == "punct" and t.text == "(":
            self.next()
            e = self.expr()
            self.expect("punct", ")")
            return e
        if t.kind == "punct" and t.text == "<":
            if not self.sigma:
                self.error("pair syntax requires the sigma extension")
            self.next()
            first = self.expr()
            self.expect("punct", ",")
            second = self.expr()
            self.expect("punct", ">")
            self.expect("punct", ":")
            annot = self.expr()
            return Pair(first, second, annot)
        self.error(f"expected an expression, found {t.text or 'end of input'!r}")


def parse_expr(text: str, sigma_enabled: bool = False, allow_reserved: bool = False) -> Expr:
    """Parse surface syntax into an expression.

    Raises ParseError with line/column on bad input; identifiers in the
    reserved "_" namespace are rejected unless ``allow_reserved``.
    """
    p = _Parser(_tokenize(text), sigma_enabled, allow_reserved)
    e = p.expr()
    t = p.peek()
    if t.kind != "eof":
        p.error(f"unexpected trailing input {t.text!r}")
    return e


def parse_context(text: str, sigma_enabled: bool = False, allow_reserved: bool = False) -> Context:
    """Parse a context given one "name : type" binding per line."""
    ctx = Context()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        name_part, sep, ty_part = line.partition(":")
        name = name_part.strip()
        if not sep or not name:
            raise ParseError("expected 'name : type'", lineno, 1)
        ok = re.fullmatch(r"[A-Za-z][A-Za-z0-9']*", name)
        if not ok:
            if allow_reserved and re.fullmatch(r"_[A-Za-z0-9'$_]*", name):
                pass
            else:
                raise ParseError(f"bad binding name {name!r}", lineno, 1)
        try:
            ty = parse_expr(ty_part, sigma_enabled, allow_reserved)
        except ParseError as err:
            raise ParseError(f"in binding {name!r}: {err}", lineno, 1) from err
        ctx = ctx.extend(name, ty)
    return ctx


# ---------------------------------------------------------------------------
# Printing

_PREC_ARROW = 0
_PREC_APP = 1
_PREC_ARG = 2


def _mentions_bound(e: Expr, depth: int = 0) -> bool:
    match e:
        case BVar(i):
            return i == depth
        case SortE() | Var():
            return False
        case Pi(_, a, b) | Lam(_, a, b) | Sigma(_, a, b):
            return _mentions_bound(a, depth) or _mentions_bound(b, depth + 1)
        case App(a, b):
            return _mentions_bound(a, depth) or _mentions_bound(b, depth)
        case Pair(a, b, t):
            return any(_mentions_bound(x, depth) for x in (a, b, t))
        case Proj1(p) | Proj2(p):
            return _mentions_bound(p, depth)
        case _:
            raise TypeError(f"not an expression: {e!r}")


def _pick_name(hint: str, body: Expr, names: list[str]) -> str:
    avoid = set(free_vars(body)) | set(names)
    return fresh_name(hint, avoid)


def _pp(e: Expr, names: list[str], prec: int) -> str:
    match e:
        case SortE(name):
            return name
        case Var(name):
            return name
        case BVar(i):
            return names[-1 - i] if i < len(names) else f"?{i}"
        case Pi(hint, dom, cod):
            if _mentions_bound(cod):
                x = _pick_name(hint, cod, names)
                names.append(x)
                body = _pp(cod, names, _PREC_ARROW)
                names.pop()
                s = f"({x}:{_pp(dom, names, _PREC_ARROW)}) -> {body}"
            else:
                names.append("")  # placeholder: codomain never looks at it
                body = _pp(cod, names, _PREC_ARROW)
                names.pop()
                s = f"{_pp(dom, names, _PREC_APP)} -> {body}"
            return f"({s})" if prec > _PREC_ARROW else s
        case Lam(hint, annot, body):
            x = _pick_name(hint, body, names)
            names.append(x)
            b = _pp(body, names, _PREC_ARROW)
            names.pop()
            s = f"\\{x}:{_pp(annot, names, _PREC_ARROW)}. {b}"
            return f"({s})" if prec > _PREC_ARROW else s
        case Sigma(hint, first, second):
            x = _pick_name(hint, second, names)
            names.append(x)
            b = _pp(second, names, _PREC_ARROW)
            names.pop()
            s = f"Sig {x}:{_pp(first, names, _PREC_ARROW)}. {b}"
            return f"({s})" if prec > _PREC_ARROW else s
        case App(fun, arg):
            s = f"{_pp(fun, names, _PREC_APP)} {_pp(arg, names, _PREC_ARG)}"
            return f"({s})" if prec > _PREC_APP else s
        case Pair(first, second, annot):
            s = f"<{_pp(first, names, _PREC_ARROW)}, {_pp(second, names, _PREC_ARROW)}> : {_pp(annot, names, _PREC_ARROW)}"
            return f"({s})" if prec > _PREC_ARROW else s
        case Proj1(p):
            return f"{_pp(p, names, _PREC_ARG)}.1"
        case Proj2(p):
            return f"{_pp(p, names, _PREC_ARG)}.2"
        case _:
            raise TypeError(f"not an expression: {e!r}")


def print_expr(e: Expr) -> str:
    """Render an expression; the output re-parses to an alpha-equal term."""
    return _pp(e, [], _PREC_ARROW)


def print_context(ctx: Context) -> str:
    return "\n".join(f"{name} : {print_expr(ty)}" for name, ty in ctx)
