import pytest

from sc2 import fixtures as fx
from sc2.complex import area, euler_characteristic
from sc2.errors import DanglingReference, DisconnectedComplex, ParseError, TriangleInequalityViolation
from sc2.sc2io import format_sc2, load, loads, write_sc2

TORUS = """\
# unit square torus
v p
e a p p 1
e b p p 1
e c p p 1.4142135623730951
f lower +a +b -c
f upper +c -a -b
"""


def test_parse_torus():
    X = loads(TORUS)
    assert (X.n_vertices, X.n_edges, X.n_faces) == (1, 3, 2)
    assert euler_characteristic(X) == 0
    assert area(X) == pytest.approx(1.0, abs=1e-12)


def test_unsigned_sides_are_oriented():
    X = loads("v a\nv b\nv c\ne x a b 1\ne y c b 1\ne z c a 1\nf t x y z\n")
    assert [int(s) for s in X.face_sign[0]] == [1, -1, 1]


@pytest.mark.parametrize("name", sorted(fx.FIXTURES))
def test_round_trip_is_exact(name, tmp_path):
    X = fx.FIXTURES[name]()
    path = tmp_path / f"{name}.sc2"
    write_sc2(X, path, comment="round trip")
    Y = load(path)
    assert Y.vertex_names == X.vertex_names
    assert Y.edge_names == X.edge_names
    assert (Y.lengths == X.lengths).all()
    assert (Y.face_edge == X.face_edge).all() and (Y.face_sign == X.face_sign).all()
    assert format_sc2(Y) == format_sc2(X)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("v a\nx b\n", 2, "unknown record"),
        ("v a\nv a\n", 2, "duplicate"),
        ("v a\nv b\ne x a b\n", 3, "needs 4 fields"),
        ("v a\nv b\ne x a b nope\n", 3, "bad edge length"),
        ("v a\nv b\ne x a b -1\n", 3, "positive"),
        ("v a\nv b\ne x a b inf\n", 3, "finite"),
        ("v -a\n", 1, "may not start"),
        ("v a\nv b\nv c\ne x a b 1\ne y b c 1\ne z a c 1\n\n# gap\nf t x z y\nf u x y\n", 10, "needs 4 fields"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ParseError) as info:
        loads(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_sides_that_do_not_close():
    text = "v a\nv b\nv c\nv d\ne x a b 1\ne y b c 1\ne z c d 1\nf t x y z\n"
    with pytest.raises(ParseError, match="do not close"):
        loads(text)


def test_dangling_references_report_lines():
    with pytest.raises(DanglingReference, match="2: edge 'x'"):
        loads("v a\ne x a q 1\n")
    with pytest.raises(DanglingReference, match="face 't'"):
        loads("v a\nv b\ne x a b 1\nf t x y z\n")


def test_triangle_violation_reports_file_and_line(tmp_path):
    path = tmp_path / "bad.sc2"
    path.write_text("v a\nv b\nv c\ne x a b 1\ne y b c 1\ne z c a 3\n\nf t x y z\n")
    with pytest.raises(TriangleInequalityViolation) as info:
        load(path)
    assert f"{path}:8:" in str(info.value)


def test_disconnected_input():
    text = "v a\nv b\nv c\nv d\ne x a b 1\ne y c d 1\n"
    with pytest.raises(DisconnectedComplex):
        loads(text)


def test_isolated_edges_allowed():
    X = loads("v a\nv b\ne x a b 2.5\n")
    assert X.n_faces == 0 and area(X) == 0.0
    assert not X.is_pure
