"""Command-line front door over the JSON formats.

Exit codes: 0 ok, 1 a check failed, 2 bad input, 3 a budget ran out.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import io
from .amalgam import find_delta_system, scc_probe
from .audit import AuditConfig, audit_all, audit_c2_exhaustive, random_monotone_map
from .builder import DEFAULT_DEPTH, audit_exactness, build_generic
from .coder import DEFAULT_SPARE_FLOOR, StepInput, check_absoluteness, decode_relation, make_context
from .creature import Creature
from .errors import BadInput, MonodefError, PreconditionFailed
from .logic.definability import build_decoder_formula, synthesize_monotone_definition
from .logic.evaluate import DEFAULT_BUDGET, evaluate, extension
from .logic.formula import free_vars, parse, to_sexpr
from .order import Element, Poset
from .rng import derive_seed, named_rng

OK, FAILED, BAD_INPUT, BUDGET = 0, 1, 2, 3

SCHEMAS = """\
JSON documents (all carry "schema": "monodef/<kind>@1"; writers sort keys):
  poset     {"elements": [{"id": int, "tag": str, "step": int}, ...],
             "lt": [[a, b], ...]}            Hasse edges; the loader re-closes
  creature  poset fields plus "F": [[x, y, z], ...] (x < y by id) and
             "H": [[x, y, z], ...]
  step      {"ground": <creature>, "R": [[a, b], ...], "step": int?}
  fspec     {"e": id, "step": int, "spares": {"start": int, "size": int},
             "elements": [...], "F": [[x, y, z], ...]}
  map       {"map": [[x, g(x)], ...]}       must be total on the carrier
  family    {"sets": [[id, ...], ...]}      input of delta-system
  probe     {"M": <creature>, "X": [{"ids": [id, ...], "mark": id}, ...]}
  pipeline  {"seed": int, "policy": "bounded"|"all", "decode_fo": bool,
             "budgets": {"depth": int, "spares": int, "eval": int},
             "steps": [<step> | {"R": [...], "seed": int?, "depth": int?}
                       | "path/to/step.json", ...]}
            step 1 needs a ground; later steps default to the previous build
  report    {"schema": "monodef/report/<kind>@1", "seed": int?, ...}

Formulas are s-expressions over le, eq, lt, not, and, or, ->, exists,
forall; @17 names the element with id 17, e.g.
  (forall y (-> (le x y) (le z y)))
"""


# -- helpers ----------------------------------------------------------------------------


def _emit(doc: Mapping[str, Any], out: str | None) -> None:
    if out:
        io.write_json(out, doc)
    else:
        sys.stdout.write(io.dumps(doc))


def _load_structure(path: str) -> Creature:
    doc = io.read_json(path)
    schema = doc.get("schema", "") if isinstance(doc, dict) else ""
    if schema.startswith("monodef/poset@"):
        return Creature(io.poset_from_json(doc))
    return io.creature_from_json(doc)


def _element(P: Poset, ident) -> Element:
    try:
        return P.by_id(int(ident))
    except (MonodefError, ValueError):
        raise BadInput(f"no element with id {ident!r}") from None


def _pairs_json(pairs) -> list[list[int]]:
    return sorted([a.id, b.id] for a, b in pairs)


# -- single-module commands -------------------------------------------------------------


def cmd_encode(args) -> int:
    inp = io.step_from_json(io.read_json(args.input))
    ctx = make_context(inp, args.spares)
    _emit(io.fspec_to_json(ctx), args.out)
    return OK


def _core(args, ctx):
    if args.core in (None, "auto"):
        return None
    try:
        ids = [int(t) for t in args.core.split(",") if t.strip()]
    except ValueError:
        raise BadInput(f"--core takes 'auto' or a comma list of ids, got {args.core!r}") from None
    by_id = {x.id: x for x in ctx.ground.carrier | ctx.fspec.carrier}
    try:
        return frozenset(by_id[i] for i in ids)
    except KeyError as exc:
        raise BadInput(f"--core names unknown id {exc.args[0]}") from None


def cmd_build(args) -> int:
    inp = io.step_from_json(io.read_json(args.input))
    ctx = make_context(inp, args.spares)
    core = _core(args, ctx)
    res = build_generic(ctx, core, args.seed, args.depth, policy=args.policy)
    exact = audit_exactness(res.MG, ctx, core, build=res)
    io.write_json(args.out, io.creature_to_json(res.MG))
    if args.log:
        Path(args.log).write_text("".join(line + "\n" for line in res.log_lines()))
    if args.report:
        io.write_json(args.report, io.report("build", {"e": ctx.e.id, "exactness": exact.to_json(),
                                                      "elements": len(res.MG.order)}, seed=args.seed))
    return OK if exact.ok else FAILED


def cmd_decode(args) -> int:
    C = _load_structure(args.input)
    e = _element(C.order, args.e)
    R = decode_relation(C, e)
    _emit(io.report("decode", {"e": e.id, "R": _pairs_json(R)}), args.out)
    return OK


def cmd_decode_fo(args) -> int:
    C = _load_structure(args.input)
    e = _element(C.order, args.e)
    phi = build_decoder_formula(e)
    R = extension(phi, C.order, ("x", "y"), budget=args.budget)
    body = {"e": e.id, "R": _pairs_json(R)}
    status = OK
    if args.check:
        agree = R == decode_relation(C, e)
        body["agrees_with_decode"] = agree
        status = OK if agree else FAILED
    if args.print_formula:
        body["formula"] = to_sexpr(phi)
    _emit(io.report("decode-fo", body), args.out)
    return status


def cmd_eval(args) -> int:
    C = _load_structure(args.input)
    P = C.order
    text = Path(args.formula_file).read_text() if args.formula_file else args.formula
    if text is None:
        raise BadInput("give --formula or --formula-file")
    phi = parse(text)
    env = {}
    for item in args.assign or ():
        name, sep, ident = item.partition("=")
        if not sep:
            raise BadInput(f"--assign takes name=id, got {item!r}")
        env[name] = _element(P, ident)
    fv = free_vars(phi)
    if fv <= set(env):
        body = {"formula": to_sexpr(phi), "value": evaluate(phi, P, env, budget=args.budget)}
    else:
        names = tuple(args.vars.split(",")) if args.vars else tuple(sorted(fv - set(env)))
        pinned = [n for n in names if n in env]
        if pinned:
            raise BadInput(f"variables {pinned} are both listed and assigned")
        from .logic.formula import Eq, Param, Var, conj
        bound = conj(phi, *(Eq(Var(n), Param(x.id)) for n, x in sorted(env.items())))
        ext = extension(bound, P, names + tuple(sorted(env)), budget=args.budget)
        rows = sorted(sorted({tuple(x.id for x in t[:len(names)]) for t in ext}))
        body = {"formula": to_sexpr(phi), "variables": list(names), "extension": [list(r) for r in rows]}
    _emit(io.report("eval", body), args.out)
    return OK


def _load_map(args, P: Poset):
    if args.g:
        return io.map_from_json(io.read_json(args.g), P)
    if args.random_moves is None:
        return None
    return random_monotone_map(P, named_rng(args.seed, "map"), args.random_moves)


def cmd_define_monotone(args) -> int:
    C = _load_structure(args.input)
    P = C.order
    g = _load_map(args, P)
    if g is None:
        raise BadInput("give --g or --random-moves")
    cert = synthesize_monotone_definition(P, g, args.threshold, budget=args.budget)
    _emit(io.report("define-monotone", {"map": io.map_to_json(g)["map"], "certificate": cert.to_json()},
                    seed=args.seed), args.out)
    return OK if cert.verified else FAILED


def cmd_audit(args) -> int:
    C = _load_structure(args.input)
    P = C.order
    cfg = AuditConfig(args.threshold, args.budget)
    g = _load_map(args, P)
    full = audit_all(P, g, cfg, seed=args.seed, n_random=args.samples)
    body = full.to_json()
    if args.exhaustive_g:
        body["c2_all_maps"] = audit_c2_exhaustive(P, cfg).to_json()
    _emit(io.report("audit", body, seed=args.seed), args.out)
    return OK if full.ok else FAILED


def cmd_delta_system(args) -> int:
    doc = io.read_json(args.input)
    sets = doc.get("sets") if isinstance(doc, dict) else None
    if not isinstance(sets, list):
        raise BadInput("family document needs a 'sets' list")
    ds = find_delta_system(sets, args.min_size)
    body = {"indices": sorted(ds.indices), "heart": sorted(ds.heart), "exact": ds.exact,
            "checked": ds.check(sets)}
    _emit(io.report("delta-system", body), args.out)
    return OK


def cmd_probe_scc(args) -> int:
    doc = io.read_json(args.input)
    if not isinstance(doc, dict) or "M" not in doc or "X" not in doc:
        raise BadInput("probe document needs 'M' and 'X'")
    M = io.creature_from_json(doc["M"])
    X = []
    for item in doc["X"]:
        try:
            sub = [_element(M.order, i) for i in item["ids"]]
            mark = _element(M.order, item["mark"])
        except (KeyError, TypeError):
            raise BadInput(f"probe entries need 'ids' and 'mark', got {item!r}") from None
        X.append((M.restrict(sub), mark))
    res = scc_probe(M, X)
    body = {"status": res.status, "pair": list(res.pair) if res.pair else None,
            "amalgam": io.creature_to_json(res.amalgam) if res.amalgam else None,
            "rejected": [[a, b, why] for (a, b), why in sorted(res.rejected.items())]}
    _emit(io.report("probe-scc", body), args.out)
    return OK


# -- pipeline -----------------------------------------------------------------------------


@dataclass
class PipelineSpec:
    steps: list[dict]
    seed: int = 0
    policy: str = "bounded"
    depth: int = DEFAULT_DEPTH
    spares: int = DEFAULT_SPARE_FLOOR
    eval_budget: int | None = DEFAULT_BUDGET
    decode_fo: bool = True
    base: Path = field(default_factory=Path)

    @classmethod
    def from_json(cls, doc: Mapping, base: Path | None = None) -> "PipelineSpec":
        if not isinstance(doc, Mapping):
            raise BadInput("pipeline spec must be a JSON object")
        got = doc.get("schema")
        if got is not None and got != "monodef/pipeline@1":
            raise BadInput(f"expected schema monodef/pipeline@1, got {got}")
        steps = doc.get("steps", [])
        if not isinstance(steps, list):
            raise BadInput("'steps' must be a list")
        budgets = doc.get("budgets", {}) or {}
        policy = doc.get("policy", "bounded")
        if policy not in ("bounded", "all"):
            raise BadInput(f"unknown policy {policy!r}")
        try:
            return cls(list(steps), int(doc.get("seed", 0)), policy,
                       int(budgets.get("depth", DEFAULT_DEPTH)),
                       int(budgets.get("spares", DEFAULT_SPARE_FLOOR)),
                       budgets.get("eval", DEFAULT_BUDGET), bool(doc.get("decode_fo", True)),
                       base or Path("."))
        except (TypeError, ValueError) as exc:
            raise BadInput(f"bad pipeline spec: {exc}") from None


@dataclass
class StepOutcome:
    index: int
    e: Element
    MG: Creature
    R: frozenset
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _step_input(spec: PipelineSpec, k: int, prev: Creature | None) -> tuple[StepInput, dict]:
    entry = spec.steps[k]
    if isinstance(entry, str):
        entry = io.read_json(spec.base / entry)
    if not isinstance(entry, Mapping):
        raise BadInput(f"step {k + 1}: expected an object or a path")
    if "ground" in entry:
        ground = io.creature_from_json(entry["ground"])
        if prev is not None and ground != prev:
            raise BadInput(f"step {k + 1}: ground differs from the creature built at step {k}")
    elif prev is None:
        raise BadInput("step 1 needs a ground creature")
    else:
        ground = prev
    by_id = {x.id: x for x in ground.order}
    R = []
    for row in entry.get("R", []):
        if not isinstance(row, (list, tuple)) or len(row) != 2 or row[0] not in by_id or row[1] not in by_id:
            raise BadInput(f"step {k + 1}: bad R entry {row!r}")
        R.append((by_id[row[0]], by_id[row[1]]))
    # the previous build was validated when it was audited
    return StepInput(ground, frozenset(R), validate=prev is None), entry


def run_pipeline(spec: PipelineSpec, out_dir: str | Path | None) -> tuple[int, dict]:
    """encode, build, audit and decode each step; then re-decode every earlier step."""
    out = Path(out_dir) if out_dir is not None else None
    done: list[StepOutcome] = []
    summary: dict[str, Any] = {"seed": spec.seed, "steps": []}
    prev = None
    for k in range(len(spec.steps)):
        try:
            inp, entry = _step_input(spec, k, prev)
            seed = int(entry.get("seed", derive_seed(spec.seed, "step", str(k + 1))))
            depth = int(entry.get("depth", spec.depth))
            ctx = make_context(inp, spec.spares)
            res = build_generic(ctx, None, seed, depth, policy=spec.policy)
            exact = audit_exactness(res.MG, ctx, build=res)
            R = decode_relation(res.MG, ctx.e)
            checks = {"exact": exact.ok, "decode": R == inp.R}
            if spec.decode_fo:
                fo = extension(build_decoder_formula(ctx.e), res.MG.order, ("x", "y"), budget=spec.eval_budget)
                checks["decode_fo"] = fo == R
            for j, old in enumerate(done):
                try:
                    checks[f"absolute_{j + 1}"] = check_absoluteness(old.MG, res.MG, old.e)
                except PreconditionFailed:
                    checks[f"absolute_{j + 1}"] = False
        except MonodefError as exc:
            exc.args = (f"step {k + 1}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
        outcome = StepOutcome(k + 1, ctx.e, res.MG, inp.R, checks)
        done.append(outcome)
        prev = res.MG
        row = {"step": k + 1, "seed": seed, "e": ctx.e.id, "elements": len(res.MG.order),
               "R": _pairs_json(inp.R), "decoded": _pairs_json(R), "checks": dict(sorted(checks.items())),
               "exactness_classes": dict(sorted(exact.classes().items()))}
        summary["steps"].append(row)
        if out is not None:
            d = out / f"step-{k + 1}"
            d.mkdir(parents=True, exist_ok=True)
            io.write_json(d / "step.json", io.step_to_json(inp))
            io.write_json(d / "fspec.json", io.fspec_to_json(ctx))
            io.write_json(d / "mg.json", io.creature_to_json(res.MG))
            (d / "build.log").write_text("".join(line + "\n" for line in res.log_lines()))
            io.write_json(d / "report.json", io.report("step", {**row, "exactness": exact.to_json()}, seed=seed))
    summary["ok"] = all(o.ok for o in done)
    if out is not None and done:
        io.write_json(out / "pipeline.json", io.report("pipeline", summary, seed=spec.seed))
    return (OK if summary["ok"] else FAILED), summary


def cmd_pipeline(args) -> int:
    path = Path(args.spec)
    spec = PipelineSpec.from_json(io.read_json(path), path.parent)
    if args.seed is not None:
        spec.seed = args.seed
    if args.no_fo:
        spec.decode_fo = False
    status, summary = run_pipeline(spec, args.out)
    if args.out is None or not summary["steps"]:
        sys.stdout.write(io.dumps(io.report("pipeline", summary, seed=spec.seed)))
    return status


# -- argument parsing ---------------------------------------------------------------------


def _budget(p) -> None:
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="evaluator step budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monodef", description=__doc__, epilog=SCHEMAS,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, description=help_, epilog=SCHEMAS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(fn=fn)
        return p

    p = add("encode", cmd_encode, "allocate gadgets for a step and write the coded F")
    p.add_argument("--in", dest="input", required=True, help="step document")
    p.add_argument("--out", help="fspec document (default stdout)")
    p.add_argument("--spares", type=int, default=DEFAULT_SPARE_FLOOR, help="size of the spare id pool")

    p = add("build", cmd_build, "build the generic creature for a step")
    p.add_argument("--in", dest="input", required=True, help="step document")
    p.add_argument("--out", required=True, help="creature document for the result")
    p.add_argument("--core", default="auto", help="'auto' or a comma list of ids")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="upper-bound repair rounds per element")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=("bounded", "all"), default="bounded",
                   help="which incomparable pairs get witness twins")
    p.add_argument("--spares", type=int, default=DEFAULT_SPARE_FLOOR)
    p.add_argument("--log", help="line-oriented build log")
    p.add_argument("--report", help="exactness report")

    p = add("decode", cmd_decode, "read the coded relation at e from triangle counts")
    p.add_argument("--in", dest="input", required=True, help="creature document")
    p.add_argument("--e", required=True, help="id of the e-point")
    p.add_argument("--out")

    p = add("decode-fo", cmd_decode_fo, "decode with the first-order formula over <= alone")
    p.add_argument("--in", dest="input", required=True, help="creature or poset document")
    p.add_argument("--e", required=True, help="id of the e-point")
    p.add_argument("--check", action="store_true", help="compare with the combinatorial decoder")
    p.add_argument("--print-formula", action="store_true")
    p.add_argument("--out")
    _budget(p)

    p = add("eval", cmd_eval, "evaluate a formula, or list its extension")
    p.add_argument("--in", dest="input", required=True, help="creature or poset document")
    p.add_argument("--formula")
    p.add_argument("--formula-file")
    p.add_argument("--assign", action="append", help="name=id, repeatable")
    p.add_argument("--vars", help="comma list fixing the tuple order of the extension")
    p.add_argument("--out")
    _budget(p)

    for name, fn, help_ in (("define-monotone", cmd_define_monotone,
                             "synthesize and verify a definition of a monotone map"),
                            ("audit", cmd_audit, "audit the four smallness conditions")):
        p = add(name, fn, help_)
        p.add_argument("--in", dest="input", required=True, help="creature or poset document")
        p.add_argument("--threshold", type=int, required=True, help="size below which a set is small")
        p.add_argument("--g", help="map document")
        p.add_argument("--random-moves", type=int, help="generate a monotone map instead of --g")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        _budget(p)
        if name == "audit":
            p.add_argument("--samples", type=int, default=8, help="random pair-sets for the C4 audit")
            p.add_argument("--exhaustive-g", action="store_true", help="C2 over all maps (six elements at most)")

    p = add("delta-system", cmd_delta_system, "largest Delta-subsystem of a finite family")
    p.add_argument("--in", dest="input", required=True, help="family document")
    p.add_argument("--min-size", type=int, default=2)
    p.add_argument("--out")

    p = add("probe-scc", cmd_probe_scc, "look for two marked pieces whose amalgam sits inside M")
    p.add_argument("--in", dest="input", required=True, help="probe document")
    p.add_argument("--out")

    p = add("pipeline", cmd_pipeline, "run encode, build, audit and decode over several steps")
    p.add_argument("--spec", required=True, help="pipeline document")
    p.add_argument("--out", help="artifact directory")
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--no-fo", action="store_true", help="skip the first-order decode check")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MonodefError as exc:
        msg = exc.args[0] if exc.args else type(exc).__name__
        print(f"monodef {args.command}: {type(exc).__name__}: {msg}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"monodef {args.command}: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
