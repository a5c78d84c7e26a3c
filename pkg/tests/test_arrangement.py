from fractions import Fraction

import pytest

from arrangement import (ArrangementError, ContainmentError, DegenerateParameterError, FamilyArrangement,
                         GeometryError, LineP3, Plane, degenerate_parameters, format_arrangement,
                         incidence_signature, instantiate, instantiate_at_infinity, is_octic_admissible,
                         load_arrangement, parse_arrangement, pencil_coordinate,
                         reduction_matches_special_fiber, span_line_line)
from expression_parser import ExpressionSyntaxError

TRIPLE_LINE = LineP3.from_points((0, 0, 1, 0), (0, 0, 0, 1))


def test_plane_canonical_form():
    assert Plane((2, 4, 0, 0)) == Plane((1, 2, 0, 0))
    assert Plane((-1, 0, 0, 0)).coeffs == (1, 0, 0, 0)
    assert Plane((Fraction(1, 2), Fraction(1, 3), 0, 0)).coeffs == (3, 2, 0, 0)
    assert Plane((1, -2, 0, 3)).to_text() == "x - 2y + 3v"
    assert Plane((3, 1, 0, 0), modulus=7).coeffs == (1, 5, 0, 0)
    with pytest.raises(DegenerateParameterError):
        Plane((0, 0, 0, 0))


def test_line_incidences():
    xy_line = LineP3.from_points((1, 0, 0, 0), (0, 1, 0, 0))
    assert xy_line == LineP3.from_planes(Plane((0, 0, 1, 0)), Plane((0, 0, 0, 1)))
    assert xy_line.contains_point((1, 1, 0, 0))
    assert xy_line.lies_on(Plane((0, 0, 1, 1)))
    assert not xy_line.lies_on(Plane((1, 0, 0, 0)))
    assert not xy_line.meets(TRIPLE_LINE)
    assert xy_line.meets(LineP3.from_points((1, 0, 0, 0), (0, 0, 1, 0)))


def test_degenerate_lines():
    with pytest.raises(GeometryError):
        LineP3.from_points((1, 2, 3, 4), (2, 4, 6, 8))
    with pytest.raises(GeometryError):
        LineP3.from_planes((1, 0, 0, 0), (2, 0, 0, 0))


def test_span_of_two_lines():
    a = LineP3.from_points((1, 0, 0, 0), (0, 1, 0, 0))
    b = LineP3.from_points((1, 0, 0, 0), (0, 0, 1, 0))
    assert span_line_line(a, b) == Plane((0, 0, 0, 1))
    with pytest.raises(GeometryError):
        span_line_line(a, TRIPLE_LINE)
    with pytest.raises(GeometryError):
        span_line_line(a, a)


def test_fourth_plane_of_the_pencil(special_planes):
    p4_p5 = LineP3.from_planes(special_planes[3], special_planes[4])
    plane = span_line_line(p4_p5, TRIPLE_LINE)
    assert plane == Plane((1, 2, 0, 0))
    assert [pencil_coordinate(TRIPLE_LINE, special_planes[i]) for i in range(3)] == [(1, 0), (0, 1), (1, 1)]
    assert pencil_coordinate(TRIPLE_LINE, plane) == (1, 2)
    with pytest.raises(ContainmentError):
        pencil_coordinate(TRIPLE_LINE, Plane((0, 0, 1, 0)))


def test_family_shape(family):
    assert len(family) == 8
    assert not family.is_constant()
    assert instantiate(family, 0)[4] == Plane((1, 2, 1, 0))
    assert instantiate(family, 3)[7] == Plane((1, 1, 1, 2))
    with pytest.raises(ArrangementError):
        FamilyArrangement([("1", "0", "0")])
    with pytest.raises(ArrangementError):
        FamilyArrangement([(1, 0, 0, Fraction(1, 2))])


def test_generic_census(generic_planes):
    sig = incidence_signature(generic_planes)
    assert sig.line_census == {3: 1, 2: 25}
    assert sig.point_census == {(4, False): 6, (4, True): 5}
    assert sig.fivefold_points == []
    [(members, line)] = sig.lines_of_multiplicity(3)
    assert members == frozenset({1, 2, 3})
    assert line == TRIPLE_LINE
    assert line.pencil_basis == ((1, 0, 0, 0), (0, 1, 0, 0))


def test_census_does_not_depend_on_the_generic_value(family):
    reference = incidence_signature(instantiate(family, 5))
    for t in (Fraction(-3), Fraction(1, 2), Fraction(7), Fraction(11, 3)):
        assert incidence_signature(instantiate(family, t)) == reference


def test_special_fibre_has_a_fivefold_point(special_planes):
    sig = incidence_signature(special_planes)
    assert ((0, 0, 0, 1), frozenset(range(1, 6))) in sig.fivefold_points
    assert {"point": [0, 0, 0, 1], "planes": [1, 2, 3, 4, 5]} in sig.to_dict()["fivefold_points"]


def test_admissibility(generic_planes):
    assert is_octic_admissible(generic_planes).admissible
    crowded = [Plane(c) for c in ((1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0), (1, 2, 0, 0),
                                  (0, 0, 1, 0), (0, 0, 0, 1), (1, 1, 1, 1), (1, 3, 5, 7))]
    report = is_octic_admissible(crowded)
    assert not report.admissible
    assert any(v["stratum"] == "line" and v["planes"] == [1, 2, 3, 4] for v in report.violations)
    with pytest.raises(ArrangementError):
        is_octic_admissible(crowded[:7])


def test_coinciding_planes_are_rejected():
    fam = FamilyArrangement([("1", "0", "0", "0"), ("t", "0", "0", "0")])
    with pytest.raises(DegenerateParameterError):
        instantiate(fam, 0)
    with pytest.raises(DegenerateParameterError):
        instantiate(fam, 2)


def test_degenerate_parameters(family):
    report = degenerate_parameters(family)
    assert report.values == [Fraction(0), Fraction(1), Fraction(2)]
    assert report.infinity
    assert report.to_dict()["values"] == ["0", "1", "2"]


def test_limit_planes(family):
    limit = instantiate_at_infinity(family)
    assert limit[4] == Plane((0, 0, 0, 1)) == limit[5]


def test_reduction_mod_p(family):
    assert instantiate(family, 7, modulus=7) == instantiate(family, 0, modulus=7)
    result = reduction_matches_special_fiber(family, 7)
    assert result["matches"]
    assert result["fivefold_point_mod_p"]
    with pytest.raises(DegenerateParameterError):
        instantiate(family, Fraction(1, 7), modulus=7)


ARRANGEMENT_TEXT = """\
# two planes through the z-axis and a moving one
t = 3/2
1 0 0 0
0 1 0 0
1 1 0 t-1   # last one moves
"""


def test_parse_and_format_arrangement():
    fam = parse_arrangement(ARRANGEMENT_TEXT)
    assert len(fam) == 3
    assert fam.pinned_t == Fraction(3, 2)
    assert fam.evaluate_row(2, Fraction(3)) == [1, 1, 0, 2]
    assert parse_arrangement(format_arrangement(fam)) == fam


def test_format_round_trips_the_built_in_family(family):
    assert parse_arrangement(format_arrangement(family)) == family


@pytest.mark.parametrize("text, line, column", [
    ("1 0 0 0\n1 1 1 t-\n", 2, 8),
    ("1 2 3\n", 1, 6),
    ("1 2 3 4 5\n", 1, 9),
    ("1/2 0 0 t\n", 1, 2),
    ("t = x\n1 0 0 0\n", 1, 5),
])
def test_parse_errors_carry_positions(text, line, column):
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_arrangement(text)
    assert (exc.value.line, exc.value.column) == (line, column)


def test_empty_arrangement_text():
    with pytest.raises(ArrangementError):
        parse_arrangement("# nothing here\n\n")


def test_load_arrangement(tmp_path, family):
    path = tmp_path / "octic.txt"
    path.write_text(format_arrangement(family))
    loaded = load_arrangement(str(path))
    assert loaded == family
    assert loaded.name == str(path)
    assert load_arrangement("paper-octic") == family
    assert load_arrangement("builtin-octic") == family
    assert family.name == "paper-octic"
