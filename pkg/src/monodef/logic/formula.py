"""First-order formulas over the signature {<=, =} with element parameters,
plus an s-expression reader and printer.

    (forall y (-> (le x y) (le z y)))      variables are bare symbols
    (eq x @17)                             @id is the element with that id
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

from ..errors import FormulaSyntaxError
from ..order import Element


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    ident: int


Term = Union[Var, Param]


@dataclass(frozen=True)
class Le:
    a: Term
    b: Term


@dataclass(frozen=True)
class Eq:
    a: Term
    b: Term


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Not:
    a: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    a: "Formula"
    b: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Le, Eq, TrueF, FalseF, Not, And, Or, Implies, Exists, Forall]
TRUE = TrueF()
FALSE = FalseF()


# -- constructors -------------------------------------------------------------------


def term(t) -> Term:
    if isinstance(t, (Var, Param)):
        return t
    if isinstance(t, Element):
        return Param(t.id)
    if isinstance(t, str):
        return Var(t)
    if isinstance(t, int):
        return Param(t)
    raise TypeError(f"not a term: {t!r}")


def le(a, b) -> Le:
    return Le(term(a), term(b))


def eq(a, b) -> Eq:
    return Eq(term(a), term(b))


def lt(a, b) -> Formula:
    return And((le(a, b), Not(eq(a, b))))


def neq(a, b) -> Formula:
    return Not(eq(a, b))


def conj(*args: Formula) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif isinstance(a, FalseF):
            return FALSE
        elif not isinstance(a, TrueF):
            flat.append(a)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args: Formula) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif isinstance(a, TrueF):
            return TRUE
        elif not isinstance(a, FalseF):
            flat.append(a)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def exists(names: str | Iterable[str], body: Formula) -> Formula:
    names = [names] if isinstance(names, str) else list(names)
    for v in reversed(names):
        body = Exists(v, body)
    return body


def forall(names: str | Iterable[str], body: Formula) -> Formula:
    names = [names] if isinstance(names, str) else list(names)
    for v in reversed(names):
        body = Forall(v, body)
    return body


class Fresh:
    """Source of bound-variable names that cannot clash with user variables."""

    def __init__(self, prefix: str = "v"):
        self.prefix = prefix
        self.n = 0

    def __call__(self, hint: str | None = None) -> str:
        self.n += 1
        return f"{hint or self.prefix}_{self.n}"


# -- structure ------------------------------------------------------------------------


def free_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, (Le, Eq)):
        return frozenset(t.name for t in (phi.a, phi.b) if isinstance(t, Var))
    if isinstance(phi, (TrueF, FalseF)):
        return frozenset()
    if isinstance(phi, Not):
        return free_vars(phi.a)
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for a in phi.args:
            out |= free_vars(a)
        return out
    if isinstance(phi, Implies):
        return free_vars(phi.a) | free_vars(phi.b)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def parameters(phi: Formula) -> frozenset[int]:
    if isinstance(phi, (Le, Eq)):
        return frozenset(t.ident for t in (phi.a, phi.b) if isinstance(t, Param))
    if isinstance(phi, (TrueF, FalseF)):
        return frozenset()
    if isinstance(phi, Not):
        return parameters(phi.a)
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for a in phi.args:
            out |= parameters(a)
        return out
    if isinstance(phi, Implies):
        return parameters(phi.a) | parameters(phi.b)
    return parameters(phi.body)


def size(phi: Formula) -> int:
    if isinstance(phi, (Le, Eq, TrueF, FalseF)):
        return 1
    if isinstance(phi, Not):
        return 1 + size(phi.a)
    if isinstance(phi, (And, Or)):
        return 1 + sum(size(a) for a in phi.args)
    if isinstance(phi, Implies):
        return 1 + size(phi.a) + size(phi.b)
    return 1 + size(phi.body)


def quantifier_depth(phi: Formula) -> int:
    if isinstance(phi, (Le, Eq, TrueF, FalseF)):
        return 0
    if isinstance(phi, Not):
        return quantifier_depth(phi.a)
    if isinstance(phi, (And, Or)):
        return max((quantifier_depth(a) for a in phi.args), default=0)
    if isinstance(phi, Implies):
        return max(quantifier_depth(phi.a), quantifier_depth(phi.b))
    return 1 + quantifier_depth(phi.body)


# -- printing and parsing ---------------------------------------------------------


def _term_str(t: Term) -> str:
    return t.name if isinstance(t, Var) else f"@{t.ident}"


def to_sexpr(phi: Formula) -> str:
    if isinstance(phi, Le):
        return f"(le {_term_str(phi.a)} {_term_str(phi.b)})"
    if isinstance(phi, Eq):
        return f"(eq {_term_str(phi.a)} {_term_str(phi.b)})"
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, FalseF):
        return "false"
    if isinstance(phi, Not):
        return f"(not {to_sexpr(phi.a)})"
    if isinstance(phi, And):
        return "(and " + " ".join(to_sexpr(a) for a in phi.args) + ")"
    if isinstance(phi, Or):
        return "(or " + " ".join(to_sexpr(a) for a in phi.args) + ")"
    if isinstance(phi, Implies):
        return f"(-> {to_sexpr(phi.a)} {to_sexpr(phi.b)})"
    if isinstance(phi, Exists):
        return f"(exists {phi.var} {to_sexpr(phi.body)})"
    if isinstance(phi, Forall):
        return f"(forall {phi.var} {to_sexpr(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")


def _tokens(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"cannot tokenize at offset {pos}", pos)
        out.append(m.group(1))
        pos = m.end()
    return out


def _read(tokens: list[str], i: int):
    if i >= len(tokens):
        raise FormulaSyntaxError("unexpected end of input")
    tok = tokens[i]
    if tok == ")":
        raise FormulaSyntaxError("unexpected ')'", i)
    if tok != "(":
        return tok, i + 1
    items = []
    i += 1
    while True:
        if i >= len(tokens):
            raise FormulaSyntaxError("missing ')'")
        if tokens[i] == ")":
            return items, i + 1
        item, i = _read(tokens, i)
        items.append(item)


def _to_term(x) -> Term:
    if not isinstance(x, str):
        raise FormulaSyntaxError(f"expected a term, got {x!r}")
    if x.startswith("@"):
        try:
            return Param(int(x[1:]))
        except ValueError:
            raise FormulaSyntaxError(f"bad parameter {x!r}") from None
    if not _NAME.match(x):
        raise FormulaSyntaxError(f"bad variable name {x!r}")
    return Var(x)


def _to_formula(x) -> Formula:
    if x == "true":
        return TRUE
    if x == "false":
        return FALSE
    if isinstance(x, str) or not x:
        raise FormulaSyntaxError(f"expected a formula, got {x!r}")
    head, *rest = x
    if head in ("le", "eq", "lt"):
        if len(rest) != 2:
            raise FormulaSyntaxError(f"({head} a b) takes two terms")
        a, b = (_to_term(t) for t in rest)
        return {"le": Le, "eq": Eq}[head](a, b) if head != "lt" else lt(a, b)
    if head == "not":
        if len(rest) != 1:
            raise FormulaSyntaxError("(not phi) takes one formula")
        return Not(_to_formula(rest[0]))
    if head in ("and", "or"):
        args = tuple(_to_formula(a) for a in rest)
        if not args:
            return TRUE if head == "and" else FALSE
        return (And if head == "and" else Or)(args)
    if head == "->":
        if len(rest) != 2:
            raise FormulaSyntaxError("(-> a b) takes two formulas")
        return Implies(_to_formula(rest[0]), _to_formula(rest[1]))
    if head in ("exists", "forall"):
        if len(rest) != 2:
            raise FormulaSyntaxError(f"({head} v body) takes a variable and a body")
        names = rest[0] if isinstance(rest[0], list) else [rest[0]]
        for v in names:
            if not isinstance(v, str) or not _NAME.match(v):
                raise FormulaSyntaxError(f"bad bound variable {v!r}")
        body = _to_formula(rest[1])
        return (exists if head == "exists" else forall)(names, body)
    raise FormulaSyntaxError(f"unknown operator {head!r}")


def parse(text: str) -> Formula:
    tokens = _tokens(text)
    tree, i = _read(tokens, 0)
    if i != len(tokens):
        raise FormulaSyntaxError("trailing input after formula", i)
    return _to_formula(tree)
