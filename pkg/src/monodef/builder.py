"""Finite simulation of the step forcing: conditions, requirements, the filter
builder, and the exactness audit of the generic creature.

Conditions grow upwards only.  Each extension either adds one element
requirement's closure (the element, its Omega-mates, its ground down-set and
every F-value it makes defined) or one witness "twin" above the F-closed
down-closure of a pair.  New elements are never placed below old ones, so
every intermediate condition is the final creature restricted to a prefix
of the insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterable, Iterator

from .coder import StepContext
from .creature import (Creature, Report, Violation, creature_leq, is_separated_extension, pair,
                       validate_creature)
from .errors import (BudgetExceeded, DepthExceeded, MonodefError, PreconditionFailed, SparePoolExhausted,
                     UnknownElement)
from .order import DEFAULT_LIMIT, Element, Poset, is_end_extension, umub_map, witness_tag
from .rng import named_rng

DEFAULT_DEPTH = 3
POLICIES = ("bounded", "all")


# -- conditions ---------------------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    c: Creature
    ctx: StepContext


def _in_enlarged(ctx: StepContext, x: Element) -> bool:
    return x in ctx.fspec.carrier or x.id in ctx.alloc.spares


def is_condition(c: Creature | Condition, ctx: StepContext | None = None) -> Report:
    """Per-clause check of the condition axioms; an empty report means valid."""
    if isinstance(c, Condition):
        c, ctx = c.c, c.ctx
    ground = ctx.ground
    out: list[Violation] = []
    for v in validate_creature(c, check_local_finiteness=False).violations:
        out.append(Violation(f"creature: {v.axiom}", v.witness))
    gpart = frozenset(x for x in c.carrier if x in ground.order)
    low = c.restrict(gpart)
    if not creature_leq(low, ground):
        out.append(Violation("ground restriction", ()))
    for x in sorted(c.carrier):
        if not _in_enlarged(ctx, x):
            out.append(Violation("carrier", (x,)))
    for x in sorted(c.carrier - gpart):
        missing = ctx.alloc.omega(x) - c.carrier
        if missing:
            out.append(Violation("omega closure", (x, min(missing))))
    carrier = c.carrier
    for x in sorted(carrier):
        for key in ctx.fspec.pairs_of(x):
            if key <= carrier and min(key) == x:
                want = ctx.fspec[key]
                got = c.F.get(key)
                if got != want:
                    out.append(Violation("F agreement", (*sorted(key), want)))
    for key, z in c.F.items():
        if key not in ctx.fspec:
            out.append(Violation("F agreement", (*sorted(key), z)))
    try:
        if not is_end_extension(low.order, c.order):
            out.append(Violation("end extension", ()))
        else:
            sep = is_separated_extension(low, c)
            if not sep:
                out.append(Violation(f"separation {sep.clause}", ()))
    except PreconditionFailed as exc:
        out.append(Violation("separation precondition", (str(exc),)))
    return Report(tuple(out))


def minimal_condition(ctx: StepContext) -> Condition:
    """The weakest condition: just the step's e-point."""
    return Condition(Creature(Poset((ctx.e,))), ctx)


# -- requirements -------------------------------------------------------------------


@dataclass(frozen=True)
class Requirement:
    kind: str
    args: tuple[Element, ...]
    k: int = 1
    status: str = "unmet"

    def describe(self) -> str:
        ids = ",".join(str(a.id) for a in self.args)
        extra = f"#{self.k}" if self.kind == "pair_witness" else ""
        return f"{self.kind}({ids}){extra}"


@dataclass(frozen=True)
class LogEntry:
    index: int
    requirement: str
    action: str
    added: tuple[int, ...] = ()

    def line(self) -> str:
        tail = " +" + ",".join(map(str, self.added)) if self.added else ""
        return f"{self.index:05d} {self.requirement} -> {self.action}{tail}"


class _State:
    """Mutable growing condition with insertion-indexed bitsets."""

    def __init__(self, ctx: StepContext, rng=None, limit: int = DEFAULT_LIMIT):
        self.ctx = ctx
        self.rng = rng
        self.limit = limit
        self.elems: list[Element] = []
        self.idx: dict[Element, int] = {}
        self.down: list[int] = []
        self.up: list[int] = []
        self.H: dict[frozenset, list[Element]] = {}
        self.ground_twins: dict[frozenset, list[Element]] = {}
        self.ground_H: dict[frozenset, list[Element]] = {}
        for x, y, z in ctx.ground.H:
            if x.id < y.id:
                self.ground_H.setdefault(pair(x, y), []).append(z)
        self.used_spares: set[int] = set()
        self.prefixes: list[int] = []

    @classmethod
    def from_creature(cls, c: Creature, ctx: StepContext, rng=None) -> "_State":
        st = cls(ctx, rng)
        for x in sorted(c.carrier, key=lambda x: (len(c.order.down(x)), x.id)):
            st._add(x, c.order.down(x))
        for x, y, z in c.H:
            if x.id < y.id and z not in ctx.ground.order:
                st.H.setdefault(pair(x, y), []).append(z)
        spares = ctx.alloc.spares
        st.used_spares = {x.id for x in c.carrier if x.id in spares}
        st.prefixes.append(len(st.elems))
        return st

    def _add(self, x: Element, below: Iterable[Element]) -> None:
        if len(self.elems) >= self.limit:
            raise BudgetExceeded(f"condition exceeds {self.limit} elements", len(self.elems))
        i = len(self.elems)
        bits = 0
        for y in below:
            bits |= 1 << self.idx[y]
        self.elems.append(x)
        self.idx[x] = i
        self.down.append(bits)
        self.up.append(0)
        b = bits
        while b:
            low = b & -b
            self.up[low.bit_length() - 1] |= 1 << i
            b ^= low

    def members(self, bits: int) -> list[Element]:
        out = []
        while bits:
            low = bits & -bits
            out.append(self.elems[low.bit_length() - 1])
            bits ^= low
        return out

    def less(self, x: Element, y: Element) -> bool:
        return bool(self.down[self.idx[y]] >> self.idx[x] & 1)

    def comparable(self, x: Element, y: Element) -> bool:
        return x == y or self.less(x, y) or self.less(y, x)

    def has_common_ub(self, x: Element, y: Element) -> bool:
        return bool(self.up[self.idx[x]] & self.up[self.idx[y]])

    def witness_count(self, x: Element, y: Element) -> int:
        key = pair(x, y)
        return (len(self.H.get(key, ())) + len(self.ground_twins.get(key, ()))
                + sum(1 for z in self.ground_H.get(key, ()) if z in self.idx))

    def creature(self) -> Creature:
        order = Poset(self.elems, ((y, x) for x in self.elems for y in self.members(self.down[self.idx[x]])),
                      limit=max(self.limit, len(self.elems)))
        fs = self.ctx.fspec
        keep = set(self.idx)
        F = {}
        for x in self.elems:
            for key in fs.pairs_of(x):
                if key <= keep:
                    F[key] = fs[key]
        H = [(x, y, z) for key, zs in self.H.items() for z in zs for x, y in [sorted(key)]]
        H += [t for t in self.ctx.ground.H if t[0] in keep and t[1] in keep and t[2] in keep]
        return Creature(order, F, H)

    # spares

    def fresh_spare(self, kind: str) -> Element:
        pool = self.ctx.alloc.spares
        if len(self.used_spares) >= pool.size:
            raise SparePoolExhausted("spare pool exhausted", pool.size)
        if self.rng is None:
            off = 0
            while pool.start + off in self.used_spares:
                off += 1
        else:
            off = self.rng.randrange(pool.size)
            while pool.start + off in self.used_spares:
                off = self.rng.randrange(pool.size)
        ident = pool.start + off
        self.used_spares.add(ident)
        return Element(ident, witness_tag(kind), self.ctx.alloc.step)


# -- extension steps ----------------------------------------------------------------


def _base_below(ctx: StepContext, x: Element) -> frozenset[Element]:
    """Lower covers required by the gadget wiring (ground elements use the ground order)."""
    if x in ctx.ground.order:
        return ctx.ground.order.down(x)
    g = ctx.alloc.gadget_of(x)
    if g is None:
        return frozenset()
    alpha, beta = g.pair
    if x == g.a:
        return frozenset((alpha, *g.A))
    if x == g.b:
        return frozenset((beta, *g.B))
    if x == g.c:
        return frozenset((ctx.e, *g.C))
    if x == g.gamma:
        return frozenset(g.Delta)
    return frozenset()


def _element_closure(st: _State, x: Element) -> list[Element]:
    ctx = st.ctx
    fs = ctx.fspec
    new: set[Element] = set()
    todo = [x]
    while todo:
        y = todo.pop()
        if y in st.idx or y in new:
            continue
        if y not in fs.carrier and y not in ctx.ground.order:
            raise UnknownElement(f"{y!r} is not in the enlarged carrier", y)
        new.add(y)
        todo.extend(_base_below(ctx, y))
        if y not in ctx.ground.order:
            todo.extend(ctx.alloc.omega(y))
        for key in fs.pairs_of(y):
            if all(w in st.idx or w in new for w in key):
                todo.append(fs[key])
    return sorted(new, key=lambda e: e.id)


@dataclass
class _StepOutcome:
    added: list[Element] = field(default_factory=list)
    met_extra: list[tuple] = field(default_factory=list)
    truncated: list[tuple] = field(default_factory=list)
    hazards: list[tuple] = field(default_factory=list)


def _down_sets(st: _State, new: list[Element], forced: dict[Element, set[Element]]) -> dict[Element, frozenset]:
    """Full strict down-sets of the new elements; raises ValueError on a cycle."""
    ctx = st.ctx
    newset = set(new)
    memo: dict[Element, frozenset] = {}
    active: set[Element] = set()

    def down(z: Element) -> frozenset:
        if z in memo:
            return memo[z]
        if z in active:
            raise ValueError(z)
        active.add(z)
        acc: set[Element] = set()
        for y in _base_below(ctx, z) | forced.get(z, set()):
            acc.add(y)
            if y in newset:
                acc |= down(y)
            else:
                acc.update(st.members(st.down[st.idx[y]]))
        active.discard(z)
        memo[z] = frozenset(acc)
        return memo[z]

    for z in new:
        down(z)
    return memo


def _add_elements(st: _State, new: list[Element], depth_budget: int) -> _StepOutcome:
    ctx = st.ctx
    fs = ctx.fspec
    out = _StepOutcome()
    forced: dict[Element, set[Element]] = {}
    rounds = 0
    while True:
        downs = _down_sets(st, new, forced)
        found = []
        for z in new:
            if z in ctx.ground.order:
                continue
            D = downs[z]
            for u in D:
                for key in fs.pairs_of(u):
                    if key <= D and min(key, key=lambda e: e.id) == u:
                        w = fs[key]
                        if w != z and w not in D:
                            x, y = sorted(key, key=lambda e: e.id)
                            found.append((x, y, z, w))
        if not found:
            break
        found.sort(key=lambda t: tuple(e.id for e in t))
        if rounds >= depth_budget:
            out.truncated.extend(found)
            break
        rounds += 1
        progress = False
        for x, y, z, w in found:
            trial = {**forced, z: forced.get(z, set()) | {w}}
            try:
                _down_sets(st, new, trial)
            except ValueError:
                out.hazards.append((x, y, z, w))
                continue
            forced = trial
            out.met_extra.append((x, y, z, w))
            progress = True
        if not progress:
            break
    downs = _down_sets(st, new, forced)
    for z in sorted(new, key=lambda e: (len(downs[e]), e.id)):
        st._add(z, downs[z])
    st.prefixes.append(len(st.elems))
    out.added = list(new)
    return out


def _witness_base(st: _State, x: Element, y: Element) -> int:
    """Bitset of the F-closed down-closure of {x, y} inside the condition."""
    fs = st.ctx.fspec
    i, j = st.idx[x], st.idx[y]
    bits = st.down[i] | st.down[j] | 1 << i | 1 << j
    changed = True
    while changed:
        changed = False
        for u in st.members(bits):
            for key in fs.pairs_of(u):
                if all(w in st.idx and bits >> st.idx[w] & 1 for w in key):
                    w = fs[key]
                    k = st.idx.get(w)
                    if k is not None and not bits >> k & 1:
                        bits |= 1 << k | st.down[k]
                        changed = True
    return bits


def _is_core_pair(st: _State, u: Element, v: Element) -> bool:
    return u.kind != "witness" and v.kind != "witness"


def _add_twin(st: _State, x: Element, y: Element) -> tuple[str, Element | None, int]:
    """Place one witness above the F-closed down-closure of {x, y}."""
    ctx = st.ctx
    fs = ctx.fspec
    base = _witness_base(st, x, y)
    i, j = st.idx[x], st.idx[y]
    if st.up[i] & st.up[j] & base:
        return "hazard", None, 0
    ground = ctx.ground.order
    kind = "ground_pair" if x in ground and y in ground else "pair"
    z = st.fresh_spare(kind)
    members = st.members(base)
    st._add(z, members)
    st.prefixes.append(len(st.elems))
    covered = 0
    for u, v in combinations(sorted(members, key=lambda e: e.id), 2):
        if not _is_core_pair(st, u, v) or st.comparable(u, v) or pair(u, v) in fs:
            continue
        if st.up[st.idx[u]] & st.up[st.idx[v]] & base:
            continue
        key = pair(u, v)
        if u in ground and v in ground:
            st.ground_twins.setdefault(key, []).append(z)
        else:
            st.H.setdefault(key, []).append(z)
        covered += 1
    return "met", z, covered


# -- scheduling ---------------------------------------------------------------------


def _skeleton(ctx: StepContext, core: Iterable[Element], depth_budget: int = DEFAULT_DEPTH,
              rng=None, log: list | None = None) -> tuple[_State, list[Requirement]]:
    st = _State.from_creature(minimal_condition(ctx).c, ctx, rng)
    reqs = []
    for x in sorted(core, key=lambda e: e.id):
        req = Requirement("element", (x,))
        if x in st.idx:
            reqs.append(replace(req, status="met"))
            if log is not None:
                log.append(LogEntry(len(log), req.describe(), "already present"))
            continue
        outcome = _add_elements(st, _element_closure(st, x), depth_budget)
        reqs.append(replace(req, status="met"))
        if log is not None:
            log.append(LogEntry(len(log), req.describe(), "added closure",
                                tuple(e.id for e in outcome.added)))
        for t in outcome.met_extra:
            reqs.append(Requirement("extra_ub", t[:3], status="met"))
            if log is not None:
                log.append(LogEntry(len(log), Requirement("extra_ub", t[:3]).describe(),
                                    f"placed {t[3].id} below {t[2].id}"))
        for t in outcome.truncated:
            reqs.append(Requirement("extra_ub", t[:3], status="truncated"))
            if log is not None:
                log.append(LogEntry(len(log), Requirement("extra_ub", t[:3]).describe(),
                                    "truncated by depth budget"))
        for t in outcome.hazards:
            reqs.append(Requirement("extra_ub", t[:3], status="hazard"))
            if log is not None:
                log.append(LogEntry(len(log), Requirement("extra_ub", t[:3]).describe(),
                                    "hazard: would create a cycle"))
    return st, reqs


def _pair_requirements(st: _State, core: Iterable[Element], policy: str) -> list[Requirement]:
    if policy not in POLICIES:
        raise ValueError(f"unknown witness policy {policy!r}")
    fs = st.ctx.fspec
    xs = sorted((x for x in core if x in st.idx and x.kind != "witness"), key=lambda e: e.id)
    keyed = []
    for x, y in combinations(xs, 2):
        if st.comparable(x, y) or pair(x, y) in fs:
            continue
        if policy == "bounded" and not st.has_common_ub(x, y):
            continue
        size = _witness_base(st, x, y).bit_count()
        keyed.append(((-size, x.id, y.id), x, y))
    keyed.sort(key=lambda t: t[0])
    out = []
    for _, x, y in keyed:
        out.append(Requirement("pair_witness", (x, y), 1))
        out.append(Requirement("pair_witness", (x, y), 2))
    return out


def schedule_requirements(ctx: StepContext, core: Iterable[Element], *, policy: str = "all",
                          depth_budget: int = DEFAULT_DEPTH) -> list[Requirement]:
    """Element requirements for the core, then two witness requirements per pair.

    Incomparability is judged in the order the element requirements produce.
    ``policy="bounded"`` keeps only pairs that already have a common upper
    bound there (the others have no minimal upper bound at all).
    Pairs are ordered by decreasing witness base so that one pair of twins
    serves as H-witness for every pair it covers.
    """
    core = frozenset(core)
    if not core:
        return []
    st, reqs = _skeleton(ctx, core, depth_budget)
    return reqs + _pair_requirements(st, core, policy)


def extend_to_meet(cond: Condition, req: Requirement, depth_budget: int = DEFAULT_DEPTH,
                   *, rng=None) -> Condition:
    """A stronger condition meeting ``req``."""
    ctx = cond.ctx
    st = _State.from_creature(cond.c, ctx, rng)
    if req.kind == "element":
        (x,) = req.args
        if x in st.idx:
            return cond
        outcome = _add_elements(st, _element_closure(st, x), depth_budget)
        if outcome.truncated:
            raise DepthExceeded("upper-bound chain exceeds the depth budget",
                                tuple(outcome.truncated[0]))
    elif req.kind == "pair_witness":
        x, y = req.args
        if st.comparable(x, y) or pair(x, y) in ctx.fspec:
            raise PreconditionFailed("pair_witness needs an incomparable pair outside dom F", (x, y))
        status, _, _ = _add_twin(st, x, y)
        if status == "hazard":
            raise PreconditionFailed("witness would not be a minimal upper bound", (x, y))
    elif req.kind == "extra_ub":
        x, y, z = req.args
        w = ctx.fspec.get(pair(x, y))
        if w is None or w not in st.idx or z not in st.idx:
            raise PreconditionFailed("extra_ub needs a defined F-pair inside the condition", req.args)
        if st.less(w, z) or w == z:
            return cond
        if depth_budget < 1:
            raise DepthExceeded("upper-bound chain exceeds the depth budget", req.args)
        raise PreconditionFailed("conditions grow upwards: old upper bounds cannot be moved",
                                 req.args)
    else:
        raise ValueError(f"unknown requirement kind {req.kind!r}")
    return Condition(st.creature(), ctx)


# -- the builder --------------------------------------------------------------------


@dataclass
class BuildResult:
    MG: Creature
    log: list[LogEntry]
    requirements: list[Requirement]
    insertion: tuple[Element, ...]
    prefixes: tuple[int, ...]
    seed: int
    policy: str

    def log_lines(self) -> list[str]:
        return [e.line() for e in self.log]

    def conditions(self) -> Iterator[Creature]:
        """Every intermediate condition, weakest first."""
        for n in self.prefixes:
            yield self.MG.restrict(self.insertion[:n])

    def pairs_with_status(self, kind: str, status: str) -> set[frozenset]:
        return {pair(*r.args[:2]) for r in self.requirements if r.kind == kind and r.status == status}


def build_generic(ctx: StepContext, core: Iterable[Element] | None = None, seed: int = 0,
                  depth_budget: int = DEFAULT_DEPTH, *, policy: str = "bounded",
                  limit: int = DEFAULT_LIMIT) -> BuildResult:
    """Meet the scheduled requirements in order and return the union creature."""
    core = ctx.default_core() if core is None else frozenset(core)
    rng = named_rng(seed, "spares", str(ctx.alloc.step))
    log: list[LogEntry] = []
    # ground elements outside the core still have to be present for an end extension
    everything = core | ctx.ground.carrier
    st, reqs = _skeleton(ctx, everything, depth_budget, rng, log)
    st.limit = limit
    for req in _pair_requirements(st, core, policy):
        x, y = req.args
        if st.witness_count(x, y) >= req.k:
            reqs.append(replace(req, status="met"))
            log.append(LogEntry(len(log), req.describe(), "already witnessed"))
            continue
        try:
            status, z, covered = _add_twin(st, x, y)
        except (BudgetExceeded, SparePoolExhausted) as exc:
            unmet = [r.describe() for r in reqs if r.status == "unmet"] + [req.describe()]
            raise type(exc)(f"{exc.args[0]}; unmet: {len(unmet)}", unmet) from None
        if status == "hazard":
            reqs.append(replace(req, status="hazard"))
            log.append(LogEntry(len(log), req.describe(),
                                "hazard: an upper bound lies in the witness base"))
            continue
        reqs.append(replace(req, status="met"))
        log.append(LogEntry(len(log), req.describe(), f"twin covering {covered} pairs", (z.id,)))
    MG = st.creature()
    return BuildResult(MG, log, reqs, tuple(st.elems), tuple(st.prefixes), seed, policy)


# -- exactness audit ----------------------------------------------------------------


@dataclass(frozen=True)
class Discrepancy:
    pair: tuple[Element, Element]
    expected: Element | None
    actual: Element | None
    classification: str

    def to_json(self) -> dict:
        return {"pair": [self.pair[0].id, self.pair[1].id],
                "expected": None if self.expected is None else self.expected.id,
                "actual": None if self.actual is None else self.actual.id,
                "class": self.classification}


@dataclass(frozen=True)
class ExactnessReport:
    discrepancies: tuple[Discrepancy, ...]
    separated: bool
    separation_clause: str | None
    end_extension: bool
    missing_core: tuple[Element, ...] = ()

    @property
    def ok(self) -> bool:
        return (not self.discrepancies and self.separated and self.end_extension
                and not self.missing_core)

    def classes(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for d in self.discrepancies:
            out[d.classification] = out.get(d.classification, 0) + 1
        return out

    def to_json(self) -> dict:
        return {"ok": self.ok, "separated": self.separated,
                "separation_clause": self.separation_clause,
                "end_extension": self.end_extension,
                "missing_core": [x.id for x in self.missing_core],
                "classes": dict(sorted(self.classes().items())),
                "discrepancies": [d.to_json() for d in self.discrepancies]}


def _classify(key: frozenset, build: BuildResult | None) -> str:
    if build is None:
        return "genuine"
    if key in build.pairs_with_status("extra_ub", "truncated"):
        return "chain-truncation"
    if key in build.pairs_with_status("pair_witness", "hazard") or \
            key in build.pairs_with_status("extra_ub", "hazard"):
        return "finite-obstruction"
    return "genuine"


def audit_exactness(MG: Creature, ctx: StepContext, core: Iterable[Element] | None = None, *,
                    build: BuildResult | None = None) -> ExactnessReport:
    """Compare the unique-minimal-upper-bound map of MG with the coded F on the core."""
    core = ctx.default_core() if core is None else frozenset(core)
    present = frozenset(x for x in core if x in MG.order)
    missing = tuple(sorted(core - present))
    umub = umub_map(MG.order, within=present)
    fs = ctx.fspec
    disc = []
    keys = set(umub.entries)
    for x in present:
        for key in fs.pairs_of(x):
            if key <= present and len(key) == 2:
                keys.add(key)
    for key in sorted(keys, key=lambda k: sorted(e.id for e in k)):
        want = fs.get(key)
        got = umub.entries.get(key)
        if want != got:
            x, y = sorted(key, key=lambda e: e.id)
            disc.append(Discrepancy((x, y), want, got, _classify(key, build)))
    ground = ctx.ground
    end_ok = False
    sep_ok = False
    clause = None
    try:
        end_ok = is_end_extension(ground.order, MG.order)
        if creature_leq(ground, MG) and end_ok:
            res = is_separated_extension(ground, MG)
            sep_ok, clause = res.ok, res.clause
        else:
            clause = "not an extension of the ground"
    except MonodefError as exc:
        clause = f"precondition: {exc}"
    return ExactnessReport(tuple(disc), sep_ok, clause, end_ok, missing)


__all__ = [
    "BuildResult",
    "Condition",
    "DEFAULT_DEPTH",
    "Discrepancy",
    "ExactnessReport",
    "LogEntry",
    "Requirement",
    "audit_exactness",
    "build_generic",
    "extend_to_meet",
    "is_condition",
    "minimal_condition",
    "schedule_requirements",
]
