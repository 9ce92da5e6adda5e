"""Reading and writing the line-oriented SC2 text format.

::

    # comment
    v <name>
    e <name> <v1> <v2> <length>
    f <name> <e1> <e2> <e3>

A face side may carry a ``-`` prefix (``f t a b -c``) to traverse the edge
from ``v2`` to ``v1``; ``+`` forces the stored direction.  Unsigned sides
get whichever orientation closes the chain, preferring the stored one.
Loop edges therefore usually need explicit signs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .complex import TwoComplex
from .errors import DanglingReference, ParseError, TriangleInequalityViolation


@dataclass
class RawComplex:
    """Parsed but unvalidated SC2 content, with source line numbers."""

    vertices: list = field(default_factory=list)  # (name, line)
    edges: list = field(default_factory=list)  # (name, v1, v2, length, line)
    faces: list = field(default_factory=list)  # (name, [(edge, sign|None)], line)
    path: str | None = None


def _check_name(tok, lineno, path):
    if tok[0] in "+-":
        raise ParseError(f"name {tok!r} may not start with '+' or '-'", lineno, path)


def parse_sc2(text, path=None):
    raw = RawComplex(path=path)
    seen = {"v": set(), "e": set(), "f": set()}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        toks = stripped.split()
        kind, args = toks[0], toks[1:]
        if kind not in seen:
            raise ParseError(f"unknown record type {kind!r}", lineno, path)
        expected = {"v": 1, "e": 4, "f": 4}[kind]
        if len(args) != expected:
            raise ParseError(f"'{kind}' record needs {expected} fields, got {len(args)}", lineno, path)
        name = args[0]
        _check_name(name, lineno, path)
        if name in seen[kind]:
            raise ParseError(f"duplicate {kind} name {name!r}", lineno, path)
        seen[kind].add(name)
        if kind == "v":
            raw.vertices.append((name, lineno))
        elif kind == "e":
            try:
                length = float(args[3])
            except ValueError:
                raise ParseError(f"bad edge length {args[3]!r}", lineno, path) from None
            if not math.isfinite(length) or length <= 0:
                raise ParseError(f"edge length must be finite and positive, got {args[3]}", lineno, path)
            raw.edges.append((name, args[1], args[2], length, lineno))
        else:
            sides = []
            for tok in args[1:]:
                sign = None
                if tok[0] in "+-":
                    sign = 1 if tok[0] == "+" else -1
                    tok = tok[1:]
                if not tok:
                    raise ParseError("empty edge reference", lineno, path)
                sides.append((tok, sign))
            raw.faces.append((name, sides, lineno))
    return raw


def read_sc2(path):
    with open(path, encoding="utf-8") as fh:
        return parse_sc2(fh.read(), path=str(path))


def _orient(ends, sides, name, lineno, path):
    choices = [(s,) if s is not None else (1, -1) for _, s in sides]
    for signs in itertools.product(*choices):
        oe = [ends[i] if s > 0 else ends[i][::-1] for i, s in zip(range(3), signs)]
        if all(oe[k][1] == oe[(k + 1) % 3][0] for k in range(3)):
            return signs
    raise ParseError(f"face {name!r}: sides do not close up into a triangle", lineno, path)


def build(raw, **kw):
    """Validate a :class:`RawComplex` and return a :class:`TwoComplex`."""
    vidx = {name: i for i, (name, _) in enumerate(raw.vertices)}
    eidx = {}
    edges, lengths = [], []
    for name, a, b, length, lineno in raw.edges:
        for v in (a, b):
            if v not in vidx:
                raise DanglingReference(f"{raw.path + ':' if raw.path else ''}{lineno}: edge {name!r} references unknown vertex {v!r}")
        eidx[name] = len(edges)
        edges.append((vidx[a], vidx[b]))
        lengths.append(length)
    faces = []
    for name, sides, lineno in raw.faces:
        for e, _ in sides:
            if e not in eidx:
                raise DanglingReference(f"{raw.path + ':' if raw.path else ''}{lineno}: face {name!r} references unknown edge {e!r}")
        ids = [eidx[e] for e, _ in sides]
        signs = _orient([edges[i] for i in ids], sides, name, lineno, raw.path)
        faces.append(list(zip(ids, signs)))
    try:
        return TwoComplex(
            [n for n, _ in raw.vertices],
            edges,
            lengths,
            faces,
            edge_names=[e[0] for e in raw.edges],
            face_names=[f[0] for f in raw.faces],
            **kw,
        )
    except TriangleInequalityViolation as exc:
        line = {name: lineno for name, _, lineno in raw.faces}.get(exc.face)
        where = f"{raw.path + ':' if raw.path else ''}{line}: " if line else ""
        raise TriangleInequalityViolation(exc.face, exc.lengths, where) from None


def load(path, **kw):
    return build(read_sc2(path), **kw)


def loads(text, **kw):
    return build(parse_sc2(text), **kw)


def format_sc2(X, comment=None):
    """Serialize with explicit face-side signs; lengths round-trip exactly."""
    out = []
    if comment:
        out += [f"# {line}" for line in comment.splitlines()]
    out += [f"v {n}" for n in X.vertex_names]
    for i in range(X.n_edges):
        out.append(
            f"e {X.edge_names[i]} {X.vertex_names[X.src[i]]} {X.vertex_names[X.dst[i]]} {float(X.lengths[i])!r}"
        )
    for f in range(X.n_faces):
        sides = [
            ("" if X.face_sign[f, k] > 0 else "-") + X.edge_names[X.face_edge[f, k]] for k in range(3)
        ]
        out.append(f"f {X.face_names[f]} {' '.join(sides)}")
    return "\n".join(out) + "\n"


def write_sc2(X, path, comment=None):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_sc2(X, comment))
