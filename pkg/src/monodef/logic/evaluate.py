"""Model checking over finite posets.

``evaluate_naive`` / ``extension_naive`` are the textbook recursion and serve
as the reference.  ``evaluate`` / ``extension`` run the same semantics through
a backtracking solver: conjunctions are flattened (existentials pulled out
under fresh names), each variable is bound through the cheapest guard atom
available (``le`` against a bound term ranges over an up- or down-set,
``eq`` pins a single value), and results of closed subformulas are memoized
on the values of their free variables.  Only when no guard exists does a
variable range over the whole carrier.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

from ..errors import BudgetExceeded, UnboundVariable, UnknownElement
from ..order import Element, Poset
from .formula import (And, Eq, Exists, FalseF, Forall, Formula, Implies, Le, Not, Or, Param,
                      TrueF, free_vars)

DEFAULT_BUDGET = 50_000_000


# -- reference semantics ------------------------------------------------------------


def _naive_term(t, P: Poset, env: Mapping[str, Element]) -> Element:
    if isinstance(t, Param):
        return P.by_id(t.ident)
    try:
        return env[t.name]
    except KeyError:
        raise UnboundVariable(f"variable {t.name!r} is unbound", t.name) from None


def evaluate_naive(phi: Formula, P: Poset, env: Mapping[str, Element]) -> bool:
    if isinstance(phi, Le):
        return P.leq(_naive_term(phi.a, P, env), _naive_term(phi.b, P, env))
    if isinstance(phi, Eq):
        return _naive_term(phi.a, P, env) == _naive_term(phi.b, P, env)
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Not):
        return not evaluate_naive(phi.a, P, env)
    if isinstance(phi, And):
        return all(evaluate_naive(a, P, env) for a in phi.args)
    if isinstance(phi, Or):
        return any(evaluate_naive(a, P, env) for a in phi.args)
    if isinstance(phi, Implies):
        return not evaluate_naive(phi.a, P, env) or evaluate_naive(phi.b, P, env)
    if isinstance(phi, Exists):
        return any(evaluate_naive(phi.body, P, {**env, phi.var: x}) for x in P)
    if isinstance(phi, Forall):
        return all(evaluate_naive(phi.body, P, {**env, phi.var: x}) for x in P)
    raise TypeError(f"not a formula: {phi!r}")


def extension_naive(phi: Formula, P: Poset, variables: Sequence[str] | None = None) -> frozenset:
    variables = tuple(sorted(free_vars(phi))) if variables is None else tuple(variables)
    missing = free_vars(phi) - set(variables)
    if missing:
        raise UnboundVariable(f"free variables {sorted(missing)} not listed", sorted(missing))
    out = set()
    for values in product(P.elements, repeat=len(variables)):
        if evaluate_naive(phi, P, dict(zip(variables, values))):
            out.add(values)
    return frozenset(out)


# -- compiled form ---------------------------------------------------------------------


class _Node:
    __slots__ = ("kind", "kids", "var", "a", "b", "free", "uid", "cheap")

    def __init__(self, kind, kids=(), var=None, a=None, b=None):
        self.kind = kind
        self.kids = tuple(kids)
        # atoms and negated atoms cost one bit test once their variables are bound
        self.cheap = kind in ("le", "eq", "true", "false") or (
            kind == "not" and self.kids[0].kind in ("le", "eq"))
        self.var = var
        self.a = a
        self.b = b
        self.uid = -1
        self.free: tuple[str, ...] = ()


class _Compiler:
    """Alpha-renames bound variables, resolves parameters to indices, and
    normalizes ``->`` / double negation."""

    def __init__(self, P: Poset):
        self.P = P
        self.count = 0
        self.nodes: list[_Node] = []

    def term(self, t, scope):
        if isinstance(t, Param):
            try:
                return ("c", self.P.index(self.P.by_id(t.ident)))
            except UnknownElement:
                raise UnknownElement(f"parameter @{t.ident} is not in the structure", t.ident) from None
        return ("v", scope.get(t.name, t.name))

    def fresh(self, name: str) -> str:
        self.count += 1
        return f"{name}#{self.count}"

    def finish(self, node: _Node) -> _Node:
        if node.kind in ("le", "eq"):
            fv = {t[1] for t in (node.a, node.b) if t[0] == "v"}
        elif node.kind == "exists":
            fv = set(node.kids[0].free)
            fv.discard(node.var)
        else:
            fv = set()
            for k in node.kids:
                fv |= set(k.free)
        node.free = tuple(sorted(fv))
        node.uid = len(self.nodes)
        self.nodes.append(node)
        return node

    def compile(self, phi: Formula, scope: dict[str, str], neg: bool = False) -> _Node:
        """Compile ``phi`` (or its negation when ``neg``), pushing negations inward
        through connectives so guards stay visible."""
        if isinstance(phi, Not):
            return self.compile(phi.a, scope, not neg)
        if isinstance(phi, (Le, Eq)):
            node = self.finish(_Node("le" if isinstance(phi, Le) else "eq",
                                     a=self.term(phi.a, scope), b=self.term(phi.b, scope)))
            return self.finish(_Node("not", (node,))) if neg else node
        if isinstance(phi, (TrueF, FalseF)):
            val = isinstance(phi, TrueF) != neg
            return self.finish(_Node("true" if val else "false"))
        if isinstance(phi, (And, Or)):
            is_and = isinstance(phi, And) != neg
            kids = []
            kind = "and" if is_and else "or"
            for a in phi.args:
                k = self.compile(a, scope, neg)
                kids.extend(k.kids if k.kind == kind else (k,))
            return self.finish(_Node(kind, kids))
        if isinstance(phi, Implies):
            return self.compile(Or((Not(phi.a), phi.b)), scope, neg)
        if isinstance(phi, (Exists, Forall)):
            # forall v. A is compiled as not exists v. not A, so the negated body
            # (with negations pushed inward) supplies the guards for v
            v = self.fresh(phi.var)
            inner = {**scope, phi.var: v}
            is_forall = isinstance(phi, Forall)
            body = self.compile(phi.body, inner, is_forall)
            node = self.finish(_Node("exists", (body,), var=v))
            if is_forall != neg:
                return self.finish(_Node("not", (node,)))
            return node
        raise TypeError(f"not a formula: {phi!r}")


# -- solver -------------------------------------------------------------------------------


class _Solver:
    def __init__(self, P: Poset, budget: int | None):
        self.P = P
        self.n = len(P)
        self.upeq = [row | 1 << i for i, row in enumerate(P._up)]
        self.downeq = [row | 1 << i for i, row in enumerate(P._down)]
        self.all_bits = (1 << self.n) - 1
        self.memo: dict = {}
        self.exist_memo: dict = {}
        self.names_memo: dict = {}
        self.steps = 0
        self.budget = budget

    def tick(self, k: int = 1) -> None:
        self.steps += k
        if self.budget is not None and self.steps > self.budget:
            raise BudgetExceeded(f"evaluation exceeded {self.budget} steps", self.steps)

    @staticmethod
    def val(t, env):
        return t[1] if t[0] == "c" else env.get(t[1])

    # closed evaluation

    def holds(self, node: _Node, env: dict) -> bool:
        k = node.kind
        if k == "le":
            return bool(self.upeq[self.val(node.a, env)] >> self.val(node.b, env) & 1)
        if k == "eq":
            return self.val(node.a, env) == self.val(node.b, env)
        if k == "true":
            return True
        if k == "false":
            return False
        if k == "not":
            return not self.holds(node.kids[0], env)
        key = (node.uid, tuple(env[v] for v in node.free))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.tick()
        if k == "and":
            res = all(self.holds(c, env) for c in node.kids) if not any(
                c.kind == "exists" for c in node.kids) else self.exists_solution(list(node.kids), env)
        elif k == "or":
            res = any(self.holds(c, env) for c in node.kids)
        elif k == "exists":
            res = self.exists_solution([node], env)
        else:
            raise AssertionError(k)
        self.memo[key] = res
        return res

    # enumeration

    def _flatten(self, conjs: Iterable[_Node]) -> list[_Node]:
        out = []
        todo = list(conjs)
        while todo:
            c = todo.pop()
            if c.kind == "and":
                todo.extend(c.kids)
            elif c.kind == "exists":
                todo.append(c.kids[0])
            elif c.kind == "true":
                continue
            else:
                out.append(c)
        out.reverse()
        return out

    def _candidates(self, node: _Node, env: dict):
        """(var, bitset, exact) when ``node`` pins one unbound variable by a guard, else None.

        ``exact`` means the bitset is precisely the satisfying set, so the
        node need not be re-tested on the values it yields.
        """
        k = node.kind
        if k in ("le", "eq"):
            a, b = self.val(node.a, env), self.val(node.b, env)
            if a is None and b is not None:
                var, bound, up = node.a[1], b, False
            elif b is None and a is not None:
                var, bound, up = node.b[1], a, True
            else:
                return None
            if node.a == node.b:
                return None
            if k == "eq":
                return var, 1 << bound, True
            return var, (self.upeq[bound] if up else self.downeq[bound]), True
        if k == "not" and node.kids[0].kind in ("le", "eq"):
            c = self._candidates(node.kids[0], env)
            if c is None:
                return None
            return c[0], self.all_bits & ~c[1], True
        if k == "or":
            unbound = [v for v in node.free if v not in env]
            if len(unbound) != 1:
                return None
            var = unbound[0]
            bits, exact = 0, True
            for kid in node.kids:
                if var not in kid.free:
                    if self.holds(kid, env):
                        return var, self.all_bits, True
                    continue
                c = self._candidates(kid, env)
                if c is None:
                    return None
                bits |= c[1]
                exact = exact and c[2]
            return var, bits, exact
        return None

    def _score(self, node: _Node, env: dict, n_unbound: int):
        cand = self._candidates(node, env) if n_unbound == 1 else None
        if cand is not None:
            return (1, cand[1].bit_count()), cand
        if node.kind == "or":
            return (2, self.n ** n_unbound), None
        return (3, self.n ** n_unbound), None

    def _bits(self, mask: int) -> Iterator[int]:
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def _gen(self, node: _Node, env: dict, cand) -> Iterator[dict]:
        """Extend ``env`` to all unbound free variables of ``node`` satisfying it."""
        if cand is not None:
            var, mask, exact = cand
            for i in self._bits(mask):
                self.tick()
                env2 = {**env, var: i}
                if exact or self.holds(node, env2):
                    yield env2
            return
        unbound = tuple(v for v in node.free if v not in env)
        if node.kind == "or":
            seen = set()
            for kid in node.kids:
                for env2 in self.solve([kid], env, tuple(v for v in unbound if v in kid.free)):
                    rest = tuple(v for v in unbound if v not in env2)
                    for env3 in self._complete(env2, rest):
                        key = tuple(env3[v] for v in unbound)
                        if key not in seen:
                            seen.add(key)
                            yield {**env, **dict(zip(unbound, key))}
            return
        for env2 in self._complete(env, unbound):
            if self.holds(node, env2):
                yield env2

    def _complete(self, env: dict, names: Sequence[str]) -> Iterator[dict]:
        if not names:
            yield env
            return
        for values in product(range(self.n), repeat=len(names)):
            self.tick()
            yield {**env, **dict(zip(names, values))}

    def solve(self, conjs: Sequence[_Node], env: dict, out: Sequence[str]) -> Iterator[dict]:
        """Assignments of the ``out`` variables (plus ``env``) satisfying all conjuncts."""
        flat = self._flatten(conjs)
        out = tuple(v for v in out if v not in env)
        seen = set()
        for env2 in self._search(flat, env, out):
            key = tuple(env2[v] for v in out)
            if key in seen:
                continue
            seen.add(key)
            yield {**env, **dict(zip(out, key))}

    def exists_solution(self, conjs: Sequence[_Node], env: dict) -> bool:
        flat = self._flatten(conjs)
        return self._exists(flat, env)

    def _exists(self, flat: list[_Node], env: dict) -> bool:
        if not flat:
            return True
        uids = tuple(c.uid for c in flat)
        names = self.names_memo.get(uids)
        if names is None:
            names = sorted({v for c in flat for v in c.free})
            self.names_memo[uids] = names
        key = (uids, tuple(env.get(v) for v in names))
        hit = self.exist_memo.get(key)
        if hit is not None:
            return hit
        res = next(self._search(flat, env, ()), None) is not None
        self.exist_memo[key] = res
        return res

    def _search(self, flat: list[_Node], env: dict, out: tuple[str, ...]) -> Iterator[dict]:
        if out and all(v in env for v in out):
            if self._exists(flat, env):
                yield env
            return
        if not flat:
            rest = tuple(v for v in out if v not in env)
            yield from self._complete(env, rest)
            return
        # every conjunct whose variables are all bound is a filter: test them now,
        # atoms first, and only pick a generator among the rest
        open_, late, counts = [], [], []
        for c in flat:
            k = 0
            for v in c.free:
                if v not in env:
                    k += 1
            if not k:
                if c.cheap:
                    if not self.holds(c, env):
                        return
                else:
                    late.append(c)
            else:
                open_.append(c)
                counts.append(k)
        if late:
            self.tick(len(late))
            for c in late:
                if not self.holds(c, env):
                    return
        if not open_:
            yield from self._search((), env, out)
            return
        best = None
        for i, c in enumerate(open_):
            score, cand = self._score(c, env, counts[i])
            if best is None or score < best[0]:
                best = (score, i, cand)
                if score[0] == 1 and score[1] <= 1:
                    break
        score, i, cand = best
        node = open_[i]
        rest = open_[:i] + open_[i + 1:]
        if cand is not None:
            # fold every other exact guard on the same variable into the mask
            var, mask, exact = cand
            keep = []
            for c in rest:
                if var in c.free and all(v == var or v in env for v in c.free):
                    other = self._candidates(c, env)
                    if other is not None and other[2]:
                        mask &= other[1]
                        continue
                keep.append(c)
            if len(keep) != len(rest):
                self.tick(len(rest) - len(keep))
                cand, rest = (var, mask, exact), keep
            if not mask:
                return
        for env2 in self._gen(node, env, cand):
            yield from self._search(rest, env2, out)


def _prepare(phi: Formula, P: Poset):
    comp = _Compiler(P)
    root = comp.compile(phi, {})
    return root


def evaluate(phi: Formula, P: Poset, env: Mapping[str, Element], *,
             budget: int | None = DEFAULT_BUDGET) -> bool:
    """Truth of ``phi`` under ``env`` (every free variable must be assigned)."""
    missing = free_vars(phi) - set(env)
    if missing:
        raise UnboundVariable(f"free variables {sorted(missing)} are unbound", sorted(missing))
    root = _prepare(phi, P)
    s = _Solver(P, budget)
    ienv = {name: P.index(x) for name, x in env.items() if name in root.free}
    return s.holds(root, ienv)


def extension(phi: Formula, P: Poset, variables: Sequence[str] | None = None, *,
              budget: int | None = DEFAULT_BUDGET) -> frozenset:
    """All tuples (in ``variables`` order) satisfying ``phi``."""
    fv = free_vars(phi)
    variables = tuple(sorted(fv)) if variables is None else tuple(variables)
    missing = fv - set(variables)
    if missing:
        raise UnboundVariable(f"free variables {sorted(missing)} not listed", sorted(missing))
    root = _prepare(phi, P)
    s = _Solver(P, budget)
    e = P.elements
    out = set()
    for env in s.solve([root], {}, variables):
        out.add(tuple(e[env[v]] for v in variables))
    return frozenset(out)
