"""Command line workbench.

Exit codes: 0 success, 1 a checked property fails, 2 bad input (parse
errors, unknown names, budget exceeded).  ``--json`` prints one report
object carrying ``"schema_version": 1``.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .budget import SizeGuard, default_budget
from .category import check_amalgamation, check_joint_embedding, check_right_ore
from .fraisse import (ClassPropertyUnverified, HorizonTooShort, back_and_forth, build_limit,
                      check_limit_extension, get_class, verify_class_properties)
from .functors import check_functoriality
from .models import check_continuity, check_flatness, check_homogeneous, enumerate_models
from .sheaves import (NotASheaf, check_sheaf, enumerate_subterminal_sheaves, object_invariants,
                      site_invariants)
from .sieves import close_to_sieve
from .topologies import (enumerate_subtoposes, enumerate_topologies, generate_topology,
                         lattice_ops, validate_topology)
from .workspace import ParseError, parse_workspace

SCHEMA_VERSION = 1


class InputError(Exception):
    pass


def bundled(name: str) -> str:
    return resources.files("sitekit").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def _load(args):
    if args.workspace:
        try:
            text = Path(args.workspace).read_text(encoding="utf-8")
        except OSError as e:
            raise InputError(f"cannot read workspace: {e.strerror}") from e
    else:
        text = bundled("arrow.site")
    return parse_workspace(text, default_budget())


def _topo(J) -> dict:
    return {"covers": J.as_dict(), "count": J.count(), "degenerate": J.degenerate}


# ---------------------------------------------------------------------------
# handlers: each returns (exit code, payload, text lines)


def cmd_validate(args):
    ws = _load(args)
    items, ok = [], True
    for name in ws.categories:
        C = ws.category(name)
        items.append({"kind": "category", "name": name, "valid": True,
                      "objects": C.n_objects, "arrows": C.n_arrows})
    for name in ws.topologies:
        rep = validate_topology(ws.topology(name))
        items.append({"kind": "topology", "name": name, "valid": rep.valid,
                      "failed_axioms": rep.failed_axioms()})
        ok &= rep.valid
    for name in ws.sites:
        ws.site(name)
        items.append({"kind": "site", "name": name, "valid": True})
    for table, get in (("functors", ws.functor), ("presheaves", ws.presheaf)):
        for name in getattr(ws, table):
            rep = check_functoriality(get(name))
            items.append({"kind": table[:-1] if table == "functors" else "presheaf", "name": name,
                          "valid": rep.valid, "message": rep.message})
            ok &= rep.valid
    text = [f"{it['kind']} {it['name']}: {'ok' if it['valid'] else 'INVALID'}" for it in items]
    return (0 if ok else 1), {"valid": ok, "counts": ws.counts(), "items": items}, text


def cmd_props(args):
    ws = _load(args)
    C = ws.category(args.category)
    reps = {"right_ore": check_right_ore(C), "amalgamation": check_amalgamation(C),
            "joint_embedding": check_joint_embedding(C)}
    payload = {"category": C.name, **{k: r.holds for k, r in reps.items()},
               "witnesses": {k: [C.arrows[x] if r.property != "joint_embedding" else C.objects[x]
                                 for x in r.witness]
                             for k, r in reps.items() if not r.holds}}
    ok = all(r.holds for r in reps.values())
    text = [f"{k}: {'holds' if r.holds else 'fails'}" for k, r in reps.items()]
    return (0 if ok else 1), payload, text


def _parse_cover(C, item: str):
    obj, _, rest = item.partition(":")
    try:
        c = C.object_id(obj.strip())
        gens = [C.arrow_id(a) for a in rest.replace(",", " ").split()]
    except KeyError as e:
        raise InputError(f"unknown name {e.args[0]!r} in --cover {item!r}") from None
    return close_to_sieve(C, c, gens)


def cmd_topo(args):
    ws = _load(args)
    if args.action == "generate":
        C = ws.category(args.target)
        J = generate_topology(C, [_parse_cover(C, x) for x in args.cover or []], default_budget())
        payload = {"category": C.name, "topology": _topo(J)}
        text = [f"{o}: {s}" for o, s in J.as_dict().items()]
        return 0, payload, text
    if args.action in ("enumerate", "lattice"):
        C = ws.category(args.target)
        L = enumerate_topologies(C, budget=default_budget())
        payload = {"category": C.name, "count": len(L),
                   "topologies": [_topo(J) for J in L]}
        if args.action == "lattice":
            order = [[i, j] for i, J in enumerate(L) for j, K in enumerate(L) if i != j and J <= K]
            hasse = [[i, j] for i, j in order
                     if not any([i, k] in order and [k, j] in order for k in range(len(L)))]
            payload["hasse"] = hasse
            payload["bottom"] = L.index(L.bottom)
            payload["top"] = L.index(L.top)
        text = [f"{len(L)} topologies on {C.name}"] + [f"  #{i}: {J.as_dict()}" for i, J in enumerate(L)]
        return 0, payload, text
    # meet / join / implies on two named topologies
    if args.other is None:
        raise InputError(f"topo {args.action} needs two topology names")
    J, K = ws.topology(args.target), ws.topology(args.other)
    if J.category != K.category:
        raise InputError("the two topologies live on different categories")
    op = "implication" if args.action == "implies" else args.action
    R = lattice_ops(J, K, op)
    return 0, {"category": J.category.name, "operation": args.action, "operands": [args.target, args.other],
               "topology": _topo(R)}, [f"{o}: {s}" for o, s in R.as_dict().items()]


def cmd_subtoposes(args):
    ws = _load(args)
    J = ws.site(args.site)
    subs = enumerate_subtoposes(J.category, J)
    return 0, {"site": args.site, "count": len(subs), "topologies": [_topo(K) for K in subs]}, \
        [f"{len(subs)} topologies contain {args.site}"]


def cmd_sheaf(args):
    ws = _load(args)
    J, P = ws.site(args.site), ws.presheaf(args.presheaf)
    if P.category != J.category:
        raise InputError("presheaf and site are on different categories")
    try:
        rep = check_sheaf(J, P)
    except ValueError as e:
        return 1, {"site": args.site, "presheaf": args.presheaf, "is_sheaf": False, "problem": str(e)}, [str(e)]
    payload = {"site": args.site, "presheaf": args.presheaf, "is_sheaf": rep.is_sheaf}
    C = J.category
    if not rep.is_sheaf:
        payload["failure"] = {
            "object": C.objects[rep.object], "sieve": rep.sieve.names(C), "problem": rep.problem,
            "family": {C.arrows[f]: P.sets[C.src[f]][x] for f, x in sorted(rep.family.items())},
            "amalgamations": [P.sets[rep.object][x] for x in rep.amalgamations]}
    return (0 if rep.is_sheaf else 1), payload, [rep.describe(P)]


def cmd_subterminals(args):
    ws = _load(args)
    J = ws.site(args.site)
    C = J.category
    rep = enumerate_subterminal_sheaves(J, default_budget())
    assigns = [{C.objects[c]: v for c, v in enumerate(a)} for a in rep.assignments]
    return 0, {"site": args.site, "count": rep.count, "two_valued": rep.two_valued,
               "subterminals": assigns}, [f"{rep.count} subterminal sheaves"] + [f"  {a}" for a in assigns]


def cmd_invariants(args):
    ws = _load(args)
    J = ws.site(args.site)
    d = site_invariants(J, default_budget()).as_dict(J.category)
    return 0, {"site": args.site, **d}, [f"{k}: {v}" for k, v in d.items()]


def cmd_object_invariants(args):
    ws = _load(args)
    J, P = ws.site(args.site), ws.presheaf(args.presheaf)
    try:
        d = object_invariants(J, P).as_dict()
    except NotASheaf as e:
        return 1, {"site": args.site, "presheaf": args.presheaf, "is_sheaf": False, "problem": str(e)}, [str(e)]
    return 0, {"site": args.site, "presheaf": args.presheaf, "is_sheaf": True, **d}, \
        [f"{k}: {v}" for k, v in d.items()]


def cmd_model(args):
    ws = _load(args)
    J = ws.site(args.site)
    if args.action == "check":
        if not args.functor:
            raise InputError("model check needs a functor name")
        F = ws.functor(args.functor)
        if F.category != J.category:
            raise InputError("functor and site are on different categories")
        fun = check_functoriality(F)
        if not fun.valid:
            return 1, {"site": args.site, "functor": args.functor, "model": False,
                       "functorial": False, "problem": fun.message}, [fun.message]
        flat = check_flatness(F)
        cont = check_continuity(J, F, note_flatness=False)
        ok = flat.flat and cont.continuous
        payload = {"site": args.site, "functor": args.functor, "model": ok, "functorial": True,
                   "flatness": flat.as_dict(F), "continuity": cont.as_dict(F)}
        return (0 if ok else 1), payload, [f"flat: {flat.flat}", f"continuous: {cont.continuous}"]
    card = args.max_card if args.max_card is not None else 2
    models = enumerate_models(J, card, budget=default_budget())
    out = [M.as_dict() for M in models]
    return 0, {"site": args.site, "max_card": card, "count": len(out), "models": out}, \
        [f"{len(out)} models with sets of size <= {card}"]


def cmd_homogeneous(args):
    ws = _load(args)
    J = ws.site(args.site)
    M = ws.functor(args.model)
    names = [x for x in (args.fp or "").split(",") if x]
    fp = [ws.functor(x) for x in names]
    if any(F.category != J.category for F in [M, *fp]):
        raise InputError("functors and site are on different categories")
    rep = check_homogeneous(M, fp)
    payload = {"site": args.site, "model": args.model, "fp": names,
               "homogeneous": rep.homogeneous, "checked": rep.checked}
    if rep.failure:
        ia, ib, _, _ = rep.failure
        payload["failure"] = {"a": names[ia], "b": names[ib]}
    return (0 if rep.homogeneous else 1), payload, [f"homogeneous: {rep.homogeneous} ({rep.checked} lifts checked)"]


def cmd_fraisse(args):
    try:
        cls = get_class(args.cls)
    except ValueError as e:
        raise InputError(str(e)) from None
    if args.action == "verify":
        rep = verify_class_properties(cls, args.n, default_budget())
        return (0 if rep.ok else 1), rep.as_dict(), [
            f"{cls.name} up to size {rep.n}: AP {rep.amalgamation}, JEP {rep.joint_embedding}"]
    steps = args.steps if args.steps is not None else 100
    if args.action == "limit":
        chain = build_limit(cls, steps, args.seed)
        data = json.loads(chain.to_json())
        if args.log:
            Path(args.log).write_text(chain.to_json() + "\n", encoding="utf-8")
        payload = {"class": cls.name, "seed": args.seed, "steps": steps, "size": chain.size,
                   "pending": chain.pending, "exhausted": chain.exhausted, "chain": data}
        return 0, payload, [f"{chain.size} elements, {chain.pending} tasks pending"]
    if args.action == "extension":
        chain = build_limit(cls, steps, args.seed)
        depth = args.depth if args.depth is not None else 40
        size = args.size if args.size is not None else 3
        try:
            rep = check_limit_extension(chain, depth, size, cls, one_point=not args.all_extensions)
        except HorizonTooShort as e:
            rep = e.report
            payload = {"class": cls.name, "seed": args.seed, "steps": steps, **(rep.as_dict() if rep else {}),
                       "passed": False, "horizon": True, "message": str(e)}
            return 1, payload, [f"horizon too short: {e}"]
        return (0 if rep.passed else 1), {"class": cls.name, "seed": args.seed, "steps": steps, **rep.as_dict()}, \
            [f"extension property at depth {depth}, size {size}: {'pass' if rep.passed else 'FAIL'}"]
    # iso
    k = args.k if args.k is not None else 12
    L1 = build_limit(cls, steps, args.seed)
    L2 = build_limit(cls, steps, args.seed2)
    try:
        res = back_and_forth(L1, L2, k)
    except HorizonTooShort as e:
        return 1, {"class": cls.name, "seeds": [args.seed, args.seed2], "steps": steps, "found": False,
                   "k": k, "horizon": True, "message": str(e)}, [str(e)]
    payload = {"class": cls.name, "seeds": [args.seed, args.seed2], "steps": steps, **res.as_dict()}
    text = [f"partial isomorphism on the first {k} elements: {'found' if res.found else 'not found'}"]
    text += [f"  {x} -> {y}" for x, y in sorted(res.mapping.items())]
    return (0 if res.found else 1), payload, text


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-w", "--workspace", help="workspace file (default: bundled arrow example)")
    common.add_argument("--json", action="store_true", help="print a JSON report")

    p = argparse.ArgumentParser(prog="sitekit", description="Finite sites, sheaves and models.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common])
    s.set_defaults(func=cmd_validate)
    s = sub.add_parser("props", parents=[common])
    s.add_argument("category")
    s.set_defaults(func=cmd_props)
    s = sub.add_parser("topo", parents=[common])
    s.add_argument("action", choices=["generate", "enumerate", "lattice", "meet", "join", "implies"])
    s.add_argument("target", help="category (generate/enumerate/lattice) or first topology")
    s.add_argument("other", nargs="?", help="second topology for meet/join/implies")
    s.add_argument("--cover", action="append", help="generator as OBJECT:arrow,arrow (repeatable)")
    s.set_defaults(func=cmd_topo)
    s = sub.add_parser("subtoposes", parents=[common])
    s.add_argument("site")
    s.set_defaults(func=cmd_subtoposes)
    s = sub.add_parser("sheaf", parents=[common])
    s.add_argument("action", choices=["check"])
    s.add_argument("site")
    s.add_argument("presheaf")
    s.set_defaults(func=cmd_sheaf)
    s = sub.add_parser("subterminals", parents=[common])
    s.add_argument("site")
    s.set_defaults(func=cmd_subterminals)
    s = sub.add_parser("invariants", parents=[common])
    s.add_argument("site")
    s.set_defaults(func=cmd_invariants)
    s = sub.add_parser("object-invariants", parents=[common])
    s.add_argument("site")
    s.add_argument("presheaf")
    s.set_defaults(func=cmd_object_invariants)
    s = sub.add_parser("model", parents=[common])
    s.add_argument("action", choices=["check", "enumerate"])
    s.add_argument("site")
    s.add_argument("functor", nargs="?")
    s.add_argument("--max-card", type=int)
    s.set_defaults(func=cmd_model)
    s = sub.add_parser("homogeneous", parents=[common])
    s.add_argument("site")
    s.add_argument("model")
    s.add_argument("--fp", help="comma separated functor names")
    s.set_defaults(func=cmd_homogeneous)
    s = sub.add_parser("fraisse", parents=[common])
    s.add_argument("action", choices=["verify", "limit", "extension", "iso"])
    s.add_argument("--class", dest="cls", default="linord")
    s.add_argument("--n", type=int, help="size bound for verify")
    s.add_argument("--steps", type=int)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--seed2", type=int, default=2)
    s.add_argument("--depth", type=int)
    s.add_argument("--size", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--all-extensions", action="store_true",
                   help="check multi-point extensions too, not only one-point ones")
    s.add_argument("--log", help="write the chain's JSON log here")
    s.set_defaults(func=cmd_fraisse)
    return p


def _emit(args, code: int, payload: dict, text: list[str], out) -> None:
    if args.json:
        report = {"schema_version": SCHEMA_VERSION, "command": args.command,
                  "exit_code": code, **payload}
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(text) + "\n")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        code, payload, text = args.func(args)
    except ParseError as e:
        code, payload, text = 2, {"error": "parse", "message": e.message, "line": e.line,
                                  "column": e.column}, [f"error: {e}"]
    except SizeGuard as e:
        code, payload, text = 2, {"error": "budget", "message": str(e), "what": e.what,
                                  "count": e.count, "limit": e.limit}, [f"error: {e}"]
    except (InputError, ClassPropertyUnverified) as e:
        code, payload, text = 2, {"error": "input", "message": str(e)}, [f"error: {e}"]
    _emit(args, code, payload, text, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
