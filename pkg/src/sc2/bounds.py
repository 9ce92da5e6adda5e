"""Conservative verifiers for the systolic inequalities.

Each verifier declares which side of each bracket it consumes.  A bound is
"verified" only if it holds for every value in the brackets, "violated"
only if it fails for every value, and "inconclusive" otherwise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .complex import area
from .errors import CycleDetected
from .group import DEFAULT_BUDGET, classify_cat, corank_bounds, fig_bounds, is_contractible, make_loop, presentation
from .metric import ball_area, distance_field, level_set
from .reeb import edge_pieces, prune, reeb_graph
from .surgery import edge_area_bound
from .systole import ball_systole, detect_loose, pointed_systole, systole
from .trees import root_decomposition, tree_energy

VERIFIED, VIOLATED, INCONCLUSIVE = "verified", "violated", "inconclusive"
REL = 1e-9  # relative slack for floating comparisons


@dataclass
class BoundReport:
    bound: str
    constant: float
    lhs: float
    rhs: float
    margin: float
    verdict: str
    sides: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    reason: str = ""

    def to_dict(self):
        return asdict(self)


def _at_least(lhs_lo, rhs_hi, rhs_lo):
    """Verdict for ``lhs >= rhs`` where rhs is only known within [rhs_lo, rhs_hi]."""
    if lhs_lo >= rhs_hi - REL * max(1.0, abs(rhs_hi)):
        return VERIFIED
    if lhs_lo < rhs_lo - REL * max(1.0, abs(rhs_lo)):
        return VIOLATED
    return INCONCLUSIVE


def _combine(verdicts):
    if VIOLATED in verdicts:
        return VIOLATED
    if all(v == VERIFIED for v in verdicts):
        return VERIFIED
    return INCONCLUSIVE


def systolic_ratio(X, level=0, budget=DEFAULT_BUDGET, sys=None):
    """[sys_lo^2, sys_hi^2] / area for this metric."""
    S = sys or systole(X, level, budget)
    A = area(X)
    return (S.lower**2 / A, S.upper**2 / A), S


def _unfree(P):
    cat = classify_cat(P)
    return cat["free"] == "no", cat


# -- small balls ------------------------------------------------------------------


def verify_ball_bound(X, level=2, budget=DEFAULT_BUDGET, radii=None, fig0=False, sys=None, sweep=16):
    """area B(x, r) >= (r - (sys(X,x) - sys(X))/2)^2 at a pointed systolic basepoint.

    Requires FIG(X) = 0 (oracle or assertion) and a not-loose witness.
    Sides: sys(X,x) uses the measured witness length, sys(X) its lower
    bracket in the radius range and upper bracket inside the square.
    """
    S = sys or systole(X, level, budget)
    P = presentation(X)
    fig = fig_bounds(P)
    rep = BoundReport("ball", 1.0, math.nan, math.nan, math.nan, INCONCLUSIVE)
    rep.inputs = {"level": level, "sys": [S.lower, S.upper], "fig": list(fig), "fig0_asserted": bool(fig0)}
    rep.sides = {"sys_in_radius_range": "lower", "sys_in_square": "upper", "area": "measured (clipped PL ball)"}
    if S.witness is None:
        rep.reason = "no noncontractible loop found"
        return rep
    if not (fig0 or fig[1] == 0):
        rep.reason = "FIG(X) not certified 0"
        return rep
    F = distance_field(X, S.basepoint, level)
    ps = pointed_systole(X, S.basepoint, level, budget)
    Lx = ps.upper
    loose = detect_loose(ps.witness, F, (S.lower, S.upper))
    rep.details["loose"] = {"verdict": loose.verdict, "r": loose.r, "exhaustive": loose.exhaustive}
    if loose.verdict != "not-loose":
        rep.reason = "loose" if loose.verdict == "loose" else "looseness undecided"
        return rep
    shift_hi = 0.5 * (Lx - S.lower)  # largest possible (L - sys)/2
    shift_lo = 0.5 * (Lx - S.upper)
    top = 0.5 * S.lower
    if radii is None:
        ev = F.events
        radii = sorted(set(np.linspace(0.0, top, sweep + 2)[1:-1]) | set(ev[(ev > 0) & (ev < top)][:64]))
    rows, verdicts = [], []
    worst = math.inf
    for r in radii:
        r = float(r)
        if not 0 < r < top:
            continue
        a = ball_area(F, r)
        rhs_hi = max(r - shift_lo, 0.0) ** 2
        rhs_lo = max(r - shift_hi, 0.0) ** 2
        v = _at_least(a, rhs_hi, rhs_lo)
        verdicts.append(v)
        worst = min(worst, a - rhs_hi)
        rows.append({"r": r, "area": a, "rhs": rhs_hi, "verdict": v})
    # level-length form on the scan range (L - sys)/2 < r < L/2
    length_rows = []
    for r in np.linspace(shift_hi, 0.5 * Lx, 10)[1:-1]:
        Ls = level_set(F, float(r))
        need_hi = 2 * Ls.value - Lx + S.upper
        need_lo = 2 * Ls.value - Lx + S.lower
        # the PL surrogate's level lengths carry no error bracket: diagnostic only
        v = VERIFIED if _at_least(Ls.length, need_hi, need_lo) == VERIFIED else "not-met"
        length_rows.append({"r": float(Ls.value), "length": Ls.length, "rhs": need_hi, "verdict": v})
    rep.details["radii"] = rows
    rep.details["level_length"] = length_rows
    rep.details["level_length_verdict"] = (
        VERIFIED if length_rows and all(x["verdict"] == VERIFIED for x in length_rows) else INCONCLUSIVE
    )
    if rows:
        r = rows[-1]
        rep.lhs, rep.rhs, rep.margin = r["area"], r["rhs"], worst
    rep.verdict = _combine(verdicts) if verdicts else INCONCLUSIVE
    # at r -> sys/2 the ball bound gives area(X) >= sys^2/4, i.e. SR <= 4
    sr = (S.upper**2 / area(X)) if math.isfinite(S.upper) else math.inf
    rep.details["sr_upper"] = sr
    rep.details["sr_le_4"] = bool(rep.verdict == VERIFIED and sr <= 4 + REL)
    return rep


# -- level graphs and noncontractible fibres -------------------------------------------


@dataclass
class LevelGraph:
    value: float
    nodes: list  # ("v", vertex) | ("x", edge, tau)
    links: list  # (i, j, pushed skeleton path from pos(i) to pos(j))
    pos: list  # skeleton vertex each node is pushed down to


def level_graph(F, rho, tol=1e-12):
    """The exact level set f = rho as a graph, with crossings pushed to lower endpoints."""
    R = F.complex
    f = F.values
    sgn = np.where(np.abs(f - rho) <= tol * max(1.0, abs(rho)), 0, np.sign(f - rho)).astype(int)
    nodes, pos, index = [], [], {}

    def vnode(v):
        key = ("v", int(v))
        if key not in index:
            index[key] = len(nodes)
            nodes.append(key)
            pos.append(int(v))
        return index[key]

    def xnode(e):
        key = ("x", int(e))
        if key not in index:
            a, b = int(R.src[e]), int(R.dst[e])
            tau = (rho - f[a]) / (f[b] - f[a])
            index[key] = len(nodes)
            nodes.append(("x", int(e), float(tau)))
            pos.append(a if f[a] < rho else b)
        return index[key]

    for v in np.nonzero(sgn == 0)[0]:
        vnode(v)
    links = []
    for e in range(R.n_edges):
        a, b = int(R.src[e]), int(R.dst[e])
        if sgn[a] == 0 and sgn[b] == 0 and a != b:
            links.append((vnode(a), vnode(b), [(e, 1)]))
        elif sgn[a] * sgn[b] < 0:
            xnode(e)
    for fc in range(R.n_faces):
        corners = R.face_corners[fc]
        s = sgn[corners]
        if (s == 0).all():
            continue  # flat face: its sides are flat edges
        pts = []
        for k in range(3):
            if s[k] == 0:
                pts.append(vnode(corners[k]))
            e = int(R.face_edge[fc, k])
            a, b = corners[k], corners[(k + 1) % 3]
            if sgn[a] * sgn[b] < 0:
                pts.append(xnode(e))
        pts = list(dict.fromkeys(pts))
        if len(pts) != 2:
            continue
        i, j = pts
        if nodes[i][0] == "v" and nodes[j][0] == "v":
            continue  # a flat side, already linked
        pi, pj = pos[i], pos[j]
        path = []
        if pi != pj:
            for k in range(3):
                e, sg = int(R.face_edge[fc, k]), int(R.face_sign[fc, k])
                ends = R.oriented_ends(e, sg)
                if ends == (pi, pj):
                    path = [(e, sg)]
                    break
                if ends == (pj, pi):
                    path = [(e, -sg)]
                    break
        links.append((i, j, path))
    return LevelGraph(float(rho), nodes, links, pos)


def fundamental_cycles(G):
    """Yield (root position, skeleton path, node sequence) per independent cycle."""
    n = len(G.nodes)
    adj = [[] for _ in range(n)]
    for li, (i, j, _) in enumerate(G.links):
        adj[i].append((li, j))
        adj[j].append((li, i))
    parent = [None] * n
    seen = [False] * n
    tree = set()
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [root]
        while stack:
            x = stack.pop()
            for li, y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    parent[y] = (x, li)
                    tree.add(li)
                    stack.append(y)

    def oriented(li, a):
        i, j, path = G.links[li]
        return path if a == i else [(e, -s) for e, s in reversed(path)]

    def up(x):
        path, seq = [], [x]
        while parent[x] is not None:
            y, li = parent[x]
            path += oriented(li, x)
            x = y
            seq.append(x)
        return path, seq

    for li, (i, j, _) in enumerate(G.links):
        if li in tree:
            continue
        pi, si = up(i)
        pj, sj = up(j)
        start = G.pos[si[-1]]
        down = [(e, -s) for e, s in reversed(pi)]
        # trim the common tail so the node sequence is an embedded cycle
        while len(si) > 1 and len(sj) > 1 and si[-2] == sj[-2]:
            si.pop()
            sj.pop()
        seq = list(reversed(si)) + sj[:-1]
        yield start, down + oriented(li, i) + pj, seq


@dataclass
class Fiber:
    rho: float
    graph: LevelGraph
    loop: object
    nodes: list
    verdict: object


def noncontractible_fiber(F, P=None, budget=DEFAULT_BUDGET, max_levels=400, max_cycles=200):
    """Scan event values (and regular values between them) for a level set containing a noncontractible loop."""
    R = F.complex
    P = P or presentation(F.base)
    ev = F.events
    mids = 0.5 * (ev[:-1] + ev[1:])
    vals = np.concatenate([ev[ev > 0], mids[mids > 0]])
    if len(vals) > max_levels:
        vals = vals[np.linspace(0, len(vals) - 1, max_levels).astype(int)]
    for rho in np.sort(vals):
        G = level_graph(F, float(rho))
        for k, (start, path, seq) in enumerate(fundamental_cycles(G)):
            if k >= max_cycles:
                break
            if not path:
                continue
            loop = make_loop(P, R, start, path)
            v = is_contractible(P, loop, budget)
            if v.noncontractible:
                return Fiber(float(rho), G, loop, seq, v)
    return None


def separated_set(X, F, fiber, n, sys_hi, level, candidates=8):
    """Greedy 1/n-separated set on the fibre loop, after scaling sys to 2.

    Points are taken where a 1-Lipschitz distance function d_B increases
    by 1/n along the loop, so separation follows from the triangle
    inequality (in the refined Steiner-graph metric).
    """
    R = F.complex
    scale = 2.0 / sys_hi
    anchors = list(dict.fromkeys(fiber.graph.pos[i] for i in fiber.nodes))[:candidates]
    best = None
    for B in anchors:
        d = distance_field(X, int(B), level).values
        vals = []
        for i in fiber.nodes:
            node = fiber.graph.nodes[i]
            if node[0] == "v":
                vals.append(float(d[node[1]]))
            else:
                _, e, tau = node
                vals.append(float((1 - tau) * d[R.src[e]] + tau * d[R.dst[e]]))
        spread = (max(vals) - min(vals)) * scale
        if best is None or spread > best[0]:
            best = (spread, int(B), vals)
    spread, B, vals = best
    count = int(math.floor(n * spread + 1e-12)) + 1
    lo = min(vals)
    points = [lo + i / (n * scale) for i in range(count)]
    return {"anchor": B, "spread_normalized": spread, "size": count, "n": n, "needed": n + 1, "levels": points}


def verify_corank_bound(X, level=2, budget=DEFAULT_BUDGET, sys=None, corank_witness=0):
    """SR(X) <= 16 (corank + 1)^2 with the fibre and separated-set audits.

    Sides: SR upper bracket (sys upper), corank upper bound.
    """
    S = sys or systole(X, level, budget)
    P = presentation(X)
    unfree, cat = _unfree(P)
    corank = corank_bounds(P, corank_witness)
    const = 16.0 * (corank[1] + 1) ** 2
    sr_hi = S.upper**2 / area(X) if math.isfinite(S.upper) else math.inf
    sr_lo = S.lower**2 / area(X) if math.isfinite(S.lower) else math.inf
    rep = BoundReport("corank", const, sr_hi, const, const - sr_hi, INCONCLUSIVE)
    rep.sides = {"sr": "upper", "corank": "upper"}
    rep.inputs = {"level": level, "sys": [S.lower, S.upper], "corank": list(corank), "free": cat["free"]}
    if not unfree:
        rep.reason = "hypothesis fails: complex not certified unfree"
        return rep
    p = S.basepoint if S.basepoint >= 0 else 0
    F = distance_field(X, p, level)
    fib = noncontractible_fiber(F, P, budget)
    if fib is None:
        rep.reason = "no noncontractible fiber"
        return rep
    n = corank[1] + 1
    sep = separated_set(X, F, fib, n, S.upper, level)
    rep.details = {
        "rho": fib.rho,
        "rho_minus_half_sys": fib.rho - 0.5 * S.upper,
        "fiber_loop_length": fib.loop.length,
        "separated_set": sep,
    }
    checks = [_at_least(const, sr_hi, sr_lo)]
    checks.append(VERIFIED if sep["size"] >= n + 1 else INCONCLUSIVE)
    rep.verdict = _combine(checks)
    if rep.verdict != VERIFIED:
        rep.reason = "separated set too small" if sep["size"] < n + 1 else ""
    return rep


# -- uniform bound -------------------------------------------------------------


def verify_uniform_bound(X, level=2, budget=DEFAULT_BUDGET, sys=None, r_factor=0.49, ball_sys=None):
    """SR(X) <= 12 plus the area ledger of its proof at r = 0.49 sys_lower.

    Sides: SR upper bracket; r from the lower chord-graph systole (the
    scale of the distance field's balls, see ``ball_systole``); areas measured by
    coarea over Reeb preimages (flat-face atoms dropped, so areas are
    under-estimates).
    """
    S = sys or systole(X, level, budget)
    P = presentation(X)
    unfree, cat = _unfree(P)
    A = area(X)
    sr_hi = S.upper**2 / A if math.isfinite(S.upper) else math.inf
    sr_lo = S.lower**2 / A if math.isfinite(S.lower) else math.inf
    rep = BoundReport("uniform", 12.0, sr_hi, 12.0, 12.0 - sr_hi, INCONCLUSIVE)
    rep.sides = {"sr": "upper", "r": "chord-graph sys lower", "areas": "measured lower estimates"}
    rep.inputs = {"level": level, "sys": [S.lower, S.upper], "free": cat["free"], "r_factor": r_factor}
    if not unfree:
        rep.reason = "hypothesis fails: complex not certified unfree"
        return rep
    checks = [_at_least(12.0, sr_hi, sr_lo)]
    B = ball_sys or ball_systole(X, level, budget)
    r = r_factor * B.lower
    p = S.basepoint if S.basepoint >= 0 else 0
    F = distance_field(X, p, level)
    ledger = {"r": r}
    try:
        G = reeb_graph(F)
        pt = prune(G, r, P, budget)
    except CycleDetected as exc:
        ledger["error"] = str(exc)
        checks.append(INCONCLUSIVE)
        pt = None
    if pt is not None:
        ell, branches = root_decomposition(pt.tree)
        energies = [tree_energy(b) for b in branches]
        need = ell * ell + 0.5 * sum(energies)
        ledger.update(
            {
                "root_length": ell,
                "branch_energies": energies,
                "ledger_rhs": need,
                "area": A,
                "third_r_squared": r * r / 3.0,
            }
        )
        pieces = edge_pieces(pt)
        audits = []
        root_kids = pt.tree.children[pt.tree.root]
        for v, pcs in pieces.items():
            rep_e = edge_area_bound(F, G, pcs, root=(len(root_kids) == 1 and v == root_kids[0]))
            audits.append(asdict(rep_e))
        ledger["edge_audits"] = audits
        checks.append(_at_least(A, need, need))
        checks.append(_at_least(A, r * r / 3.0, r * r / 3.0))
        ledger["ledger_verdict"] = checks[-2]
        ledger["third_verdict"] = checks[-1]
    rep.details = ledger
    rep.verdict = _combine(checks)
    return rep


def verify_all(X, level=2, budget=DEFAULT_BUDGET, fig0=False):
    S = systole(X, level, budget)
    return [
        verify_ball_bound(X, level, budget, fig0=fig0, sys=S),
        verify_corank_bound(X, level, budget, sys=S),
        verify_uniform_bound(X, level, budget, sys=S),
    ]
