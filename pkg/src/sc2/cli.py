"""Command-line entry point: ``sc2 <command> <file> [options]``.

Exit codes: 0 success, 1 input or validation error, 2 a bound reported
"violated" (which signals a bug, since the inequalities are theorems).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import fixtures
from .analysis import analyze, complex_summary, group_summary, loop_summary
from .bounds import VIOLATED, verify_ball_bound, verify_corank_bound, verify_uniform_bound
from .errors import CycleDetected, SC2Error
from .group import DEFAULT_BUDGET, Budget, presentation
from .jsonout import dumps
from .metric import distance_field, level_set, refined
from .optimize import optimize
from .reeb import prune, reeb_graph
from .sc2io import format_sc2, load, write_sc2
from .surgery import SurgerySpec, copies_acyclic, cut_and_fold, select_unfree_component
from .systole import check_simple_structure, detect_loose, pointed_systole, systole


def parse_budget(text):
    """``N`` sets coset rows; ``rows=N,depth=D,states=S,quotient_rows=Q`` sets any field."""
    if text is None:
        return DEFAULT_BUDGET
    if text.isdigit():
        return Budget(rows=int(text))
    fields = {f.name for f in dataclasses.fields(Budget)}
    kw = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in fields or not value.strip().isdigit():
            raise argparse.ArgumentTypeError(f"bad budget item {part!r}")
        kw[key] = int(value)
    return Budget(**kw)


def _vertex(X, name):
    return X.vertex_index(name) if name is not None else 0


def _emit(args, payload):
    text = dumps(payload)
    if args.json:
        Path(args.json).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------


def cmd_analyze(args, X):
    rep = analyze(X, args.level, args.budget, r_factor=args.r_factor, fig0=args.fig0, timing=args.timing)
    _emit(args, rep)
    return 2 if any(b.verdict == VIOLATED for b in rep.bounds) else 0


def cmd_distances(args, X):
    p = _vertex(X, args.base)
    F = distance_field(X, p, args.level, steiner=args.steiner)
    R = F.complex
    _emit(
        args,
        {
            "base": X.vertex_names[p],
            "level": args.level,
            "refined_vertices": R.n_vertices,
            "max": F.max_value,
            "distances": {X.vertex_names[v]: F.values[v] for v in range(X.n_vertices)},
            "skeleton": {X.vertex_names[v]: F.skel[v] for v in range(X.n_vertices)},
        },
    )
    return 0


def cmd_levelset(args, X):
    F = distance_field(X, _vertex(X, args.base), args.level)
    _emit(args, level_set(F, args.r).summary())
    return 0


def cmd_reeb(args, X):
    F = distance_field(X, _vertex(X, args.base), args.level)
    G = reeb_graph(F)
    out = G.summary()
    try:
        pt = prune(G, args.r, presentation(X), args.budget)
        out["tree"], out["pruned"] = True, pt.summary()
    except CycleDetected as exc:
        out["tree"], out["pruned"], out["reason"] = False, None, str(exc)
    if args.dot:
        Path(args.dot).write_text(G.to_dot(), encoding="utf-8")
    _emit(args, out)
    return 0


def cmd_systole(args, X):
    R = refined(X, args.level)
    S = systole(X, args.level, args.budget, steiner=args.steiner)
    found = S
    if args.base is not None:
        found = pointed_systole(X, X.vertex_index(args.base), args.level, args.budget, steiner=args.steiner)
    loop = found.witness
    out = {
        "sys": [found.lower, found.upper],
        "witness": loop_summary(R, loop),
        "basepoint": R.vertex_names[loop.base] if loop is not None else None,
        "level": args.level,
        "steiner": args.steiner,
    }
    if args.base is not None:
        out["global_sys"] = list(S.bracket)
    if args.loose:
        out["loose"] = {"verdict": "inconclusive", "r": None, "components": [], "reason": "no skeleton witness"}
        if loop is not None and not args.steiner:
            F = distance_field(X, loop.base, args.level)
            rep = detect_loose(loop, F, S.bracket)
            out["loose"] = {"verdict": rep.verdict, "r": rep.r, "components": rep.components, "exhaustive": rep.exhaustive}
            try:
                check_simple_structure(loop, F, S.bracket)
                out["loose"]["structure"] = "ok"
            except SC2Error as exc:
                out["loose"]["structure"] = str(exc)
    _emit(args, out)
    return 0


def cmd_group(args, X):
    _emit(args, group_summary(presentation(X)))
    return 0


def cmd_surgery(args, X):
    F = distance_field(X, _vertex(X, args.base), args.level)
    G = reeb_graph(F)
    arcs = {a.id: a for a in G.arcs}
    if args.arc not in arcs:
        raise SC2Error(f"no Reeb arc {args.arc}; arcs are 0..{len(G.arcs) - 1}")
    arc = arcs[args.arc]
    if args.r is not None and not args.t < args.r:
        raise SC2Error(f"t={args.t} lies outside the ball of radius {args.r}")
    spec = SurgerySpec(X, F, arc, args.t, require_contractible=not args.allow_noncontractible, budget=args.budget)
    S = cut_and_fold(spec)
    out_path = args.out or str(Path(args.file).with_suffix("")) + ".surgered.sc2"
    write_sc2(S.Z, out_path, comment=f"surgery at t={args.t} on arc {args.arc} from {X.vertex_names[F.source]}")
    payload = {
        "output": out_path,
        "components": [complex_summary(C) for C in S.components],
        "areas": S.areas,
        "area_before": complex_summary(X)["area"],
        "h1_before": list(S.h1_before),
        "h1_after": [list(h) for h in S.h1_after],
        "copies_acyclic": copies_acyclic(S),
        "merges": S.merges,
        "level_value": S.level_value,
    }
    if args.select:
        try:
            ch = select_unfree_component(S, args.budget)
            payload["selected"] = {
                "index": ch.index,
                "fig": list(ch.fig),
                "free": ch.free,
                "flagged": ch.flagged,
                "candidates": ch.candidates,
            }
        except SC2Error as exc:
            payload["selected"] = {"error": str(exc)}
    _emit(args, payload)
    return 0


def cmd_verify(args, X):
    S = systole(X, args.level, args.budget)
    which = ["ball", "corank", "uniform"] if args.bound == "all" else [args.bound]
    runners = {
        "ball": lambda: verify_ball_bound(X, args.level, args.budget, fig0=args.fig0, sys=S),
        "corank": lambda: verify_corank_bound(X, args.level, args.budget, sys=S),
        "uniform": lambda: verify_uniform_bound(X, args.level, args.budget, sys=S),
    }
    reports = [runners[b]() for b in which]
    _emit(args, reports)
    return 2 if any(r.verdict == VIOLATED for r in reports) else 0


def cmd_optimize(args, X):
    res = optimize(X, args.iters, args.seed, args.level, args.chains, args.budget, steiner=args.steiner)
    out_path = args.out or str(Path(args.file).with_suffix("")) + ".best.sc2"
    Y = X.with_lengths(res.best.lengths)
    write_sc2(Y, out_path, comment=f"optimizer best metric (seed {args.seed}); {res.label}")
    _emit(
        args,
        {
            "label": res.label,
            "best": res.best,
            "chains": res.chains,
            "final": res.final,
            "trace": res.trace,
            "output": out_path,
        },
    )
    return 0


def cmd_gen(args):
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        try:
            params[key] = int(value)
        except ValueError:
            params[key] = float(value)
    X = fixtures.gen_fixture(args.name, **params)
    text = format_sc2(X, comment=f"fixture {args.name} {params}" if params else f"fixture {args.name}")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.json:
        Path(args.json).write_text(dumps(complex_summary(X)), encoding="utf-8")
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", type=int, default=None, help="refinement level")
    common.add_argument("--budget", type=parse_budget, default=DEFAULT_BUDGET, help="oracle budget")
    common.add_argument("--json", metavar="PATH", help="write JSON here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="sc2", description="Systolic invariants of piecewise flat 2-complexes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, level, help_, with_file=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        if with_file:
            p.add_argument("file")
        p.set_defaults(func=func, default_level=level)
        return p

    p = command("analyze", cmd_analyze, 2, "run the whole pipeline")
    p.add_argument("--r-factor", type=float, default=0.49)
    p.add_argument("--fig0", action="store_true", help="assert FIG(X) = 0")
    p.add_argument("--timing", action="store_true", help="include stage timings (breaks byte-identical output)")

    p = command("distances", cmd_distances, 0, "distance field from a vertex")
    p.add_argument("--base")
    p.add_argument("--steiner", type=int, default=1)

    p = command("levelset", cmd_levelset, 0, "level set of the distance field")
    p.add_argument("--base")
    p.add_argument("--r", type=float, required=True)

    p = command("reeb", cmd_reeb, 0, "Reeb graph and pruned ball tree")
    p.add_argument("--base")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--dot", metavar="PATH")

    p = command("systole", cmd_systole, 0, "systole bracket and witness")
    p.add_argument("--base")
    p.add_argument("--loose", action="store_true")
    p.add_argument("--steiner", type=int, default=0, help="loops may cross faces through this many points per edge")

    command("group", cmd_group, 0, "fundamental group summary")

    p = command("surgery", cmd_surgery, 0, "cut along a level component and fold")
    p.add_argument("--base")
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--arc", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--select", action="store_true", help="also pick the unfree component")
    p.add_argument("--allow-noncontractible", action="store_true")

    p = command("verify", cmd_verify, 2, "check the systolic inequalities")
    p.add_argument("--bound", choices=["ball", "corank", "uniform", "all"], default="all")
    p.add_argument("--fig0", action="store_true", help="assert FIG(X) = 0")

    p = command("optimize", cmd_optimize, 2, "anneal edge lengths")
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--steiner", type=int, default=1)
    p.add_argument("--out", metavar="PATH")

    p = command("gen", None, 0, "write a fixture as SC2", with_file=False)
    p.add_argument("name")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", metavar="PATH")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors are input errors; 2 is reserved for "violated"
        return 0 if exc.code in (0, None) else 1
    if args.level is None:
        args.level = args.default_level
    try:
        if args.command == "gen":
            return cmd_gen(args)
        X = load(args.file)
        return args.func(args, X)
    except (SC2Error, OSError, ValueError) as exc:
        print(f"sc2 {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
