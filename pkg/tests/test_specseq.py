import json

import pytest

from specseq import (BettiTable, InconsistentLedgerError, SpecSeqError, StrataData, StrataDataError,
                     abutment_dims, build_E1, consistency_search, e2_entry, e2_frame,
                     euler_characteristic, octic_strata, strata_from_json)


@pytest.fixture(scope="module")
def page():
    return build_E1(octic_strata())


def test_e1_entries(page):
    assert [page.dim((0, h)) for h in range(7)] == [2, 0, None, 4, None, 0, 2]
    assert [page.dim((-1, q)) for q in range(2, 7)] == [1, 0, None, 0, 1]
    assert [page.dim((1, q)) for q in range(0, 5)] == [1, 0, None, 0, 1]
    assert page.dim((5, 5)) == 0


def test_twist_annotations(page):
    assert page.twists[(0, 3)] == ["H^3(Z1)(0)"]
    assert page.twists[(-1, 4)] == ["H^2(Z2)(-1)"]
    assert page.twists[(1, 0)] == ["H^0(Z2)(0)"]


def test_e1_frame(page):
    frame = page.to_frame()
    assert list(frame.columns) == [-1, 0, 1]
    assert frame.loc[3].tolist() == [0, 4, 0]
    assert frame.loc[0].tolist() == [0, 2, 1]
    assert frame.loc[4].tolist() == ["?", "?", 1]


def test_differentials_join_neighbouring_slots(page):
    sources = page.differentials()
    assert (-1, 3) in sources and (0, 3) in sources
    assert (1, 3) not in sources
    assert page.antidiagonal(3) == [(-1, 4), (0, 3), (1, 2)]


def test_e2_entries(page):
    assert e2_entry(page, (0, 3), {}) == 4
    assert e2_entry(page, (0, 0), {"d(0,0)": 1}) == 1
    assert e2_entry(page, (1, 2), {}) is None
    assert e2_entry(page, (1, 2), {"e(1,2)": 3}) == 3
    with pytest.raises(InconsistentLedgerError):
        e2_entry(page, (0, 0), {"d(0,0)": 3})


def test_abutment(page):
    dims = abutment_dims(page)
    assert dims[3] is None
    assert abutment_dims(page, {"e(-1,4)": 0, "e(1,2)": 0})[3] == 4
    with pytest.raises(InconsistentLedgerError):
        abutment_dims(page, {"d(0,0)": -1})


def test_e2_frame_marks_unresolved_slots(page):
    frame = e2_frame(page, {"d(0,0)": 1})
    assert frame.loc[0].tolist() == [0, 1, 0]
    assert frame.loc[4].tolist()[0] == "?"


def test_middle_degree_is_forced(page):
    result = consistency_search(page, {3: 4})
    assert result.variables == ["d(-1,3)", "d(0,3)", "e(-1,4)", "e(1,2)"]
    assert result.status == "unique"
    assert result.assignments == [{"d(-1,3)": 0, "d(0,3)": 0, "e(-1,4)": 0, "e(1,2)": 0}]


def test_odd_excess_is_unsatisfiable(page):
    result = consistency_search(page, {3: 5})
    assert not result.satisfiable
    assert result.status == "constraints unsatisfiable"
    assert abutment_dims(page, {"e(-1,4)": 0, "e(1,2)": 0})[3] == 4


def test_dropping_the_symmetry_admits_lopsided_contributions(page):
    relaxed = consistency_search(page, {3: 5}, monodromy_symmetry=False)
    assert len(relaxed) == 2
    assert relaxed.status == "2 assignments"
    assert sorted((a["e(-1,4)"], a["e(1,2)"]) for a in relaxed) == [(0, 1), (1, 0)]


def test_symmetric_excess_comes_in_pairs(page):
    result = consistency_search(page, {3: 6})
    assert result.status == "unique"
    assert result.assignments[0]["e(-1,4)"] == result.assignments[0]["e(1,2)"] == 1


def test_search_without_targets(page):
    result = consistency_search(page)
    assert len(result) == 4
    assert all(e2_entry(page, (0, 3), a) == 4 for a in result)
    assert result.to_dict()["targets"] == {}


def test_search_space_limit(page):
    with pytest.raises(SpecSeqError):
        consistency_search(page, {2: 1, 3: 4, 4: 1}, unknown_bound=10 ** 3)


def test_euler_characteristic():
    assert euler_characteristic({(0, 0): 2, (0, 1): 1, (1, 1): 3}) == 4
    assert euler_characteristic({(0, 0): 2, (0, 1): None}) is None


@pytest.mark.parametrize("dims", [[1, 0], [], [1, -1, 1], [0, 0, 0], [1, 2, 3]])
def test_bad_betti_tables(dims):
    with pytest.raises(StrataDataError):
        BettiTable(dims, "X")


def test_singular_strata_skip_the_symmetry_check():
    assert BettiTable([1, 2, 3], "X", smooth=False).b(2) == 3
    assert BettiTable([1, 0, 1]).b(7) == 0


def test_strata_dimensions_must_fit():
    curve = BettiTable([1, 2, 1])
    surface = BettiTable([1, 0, 1, 0, 1])
    with pytest.raises(StrataDataError):
        StrataData([])
    with pytest.raises(StrataDataError):
        StrataData([curve, surface])
    with pytest.raises(StrataDataError):
        StrataData([surface], [surface])
    assert StrataData([surface], [curve]).stratum(3) == []


def test_strata_from_json():
    data = {"components": {"R": [1, 0, None, 2, None, 0, 1], "Q": [1, 0, None, 2, None, 0, 1]},
            "intersection": {"C": [1, 0, None, 0, 1]}}
    from_text = strata_from_json(json.dumps(data))
    from_dict = strata_from_json(data)
    assert build_E1(from_text).entries == build_E1(from_dict).entries == build_E1(octic_strata()).entries
    with pytest.raises(StrataDataError):
        strata_from_json("[]")
    with pytest.raises(StrataDataError):
        strata_from_json({"components": {"R": 5}})
