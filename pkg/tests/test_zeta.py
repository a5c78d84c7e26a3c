import pytest

from counting import legendre_counts
from zeta import (ZetaDataError, ZetaError, ZetaFunction, cluster_roots, complex_roots, frobenius_trace,
                  functional_equation_ok, predict_count, projective_line_zeta, tate_twist,
                  weight3_obstruction, weight_buckets, weil_check, zeta_elliptic_from_count)


@pytest.fixture
def supersingular():
    return zeta_elliptic_from_count(8, 7)


def test_elliptic_zeta_from_one_count(supersingular):
    assert supersingular.numerator == [1, 0, 7]
    assert supersingular.denominator == [1, -8, 7]
    assert frobenius_trace(supersingular) == 0
    assert frobenius_trace(zeta_elliptic_from_count(5, 7)) == 3


def test_predicted_counts_match_the_counter(supersingular):
    counts = legendre_counts(-1, 7, degrees=(1, 2, 3))
    for k, n in counts.items():
        assert predict_count(supersingular, k) == n
    assert predict_count(supersingular, 2) == 64
    with pytest.raises(ZetaError):
        predict_count(supersingular, 0)


def test_projective_line():
    z = projective_line_zeta(7)
    assert [predict_count(z, k) for k in (1, 2, 3)] == [8, 50, 344]
    assert weight_buckets(z).populated() == set()


def test_functional_equation(supersingular):
    assert functional_equation_ok(supersingular)
    assert functional_equation_ok(zeta_elliptic_from_count(5, 7))
    assert not functional_equation_ok(ZetaFunction([1, 1], [1], 7))
    assert not functional_equation_ok(ZetaFunction([1, 0, 5], [1], 7))


def test_hasse_violation_is_rejected():
    with pytest.raises(ZetaDataError):
        zeta_elliptic_from_count(20, 7)
    with pytest.raises(ZetaDataError):
        zeta_elliptic_from_count(0, 7)


def test_malformed_zetas():
    with pytest.raises(ZetaDataError):
        ZetaFunction([2, 1], [1], 7)
    with pytest.raises(ZetaDataError):
        ZetaFunction([1], [1], 1)
    with pytest.raises(ZetaDataError):
        ZetaFunction([1, -1], [1, -8, 7], 7)


def test_weight_buckets(supersingular):
    buckets = weight_buckets(supersingular)
    assert buckets.cardinality(1) == 2
    assert buckets.to_dict()["buckets"] == {"1": 2}
    assert not buckets.unassigned
    assert weil_check(supersingular, [1])
    assert not weil_check(supersingular, [0, 2])


def test_tate_twist_moves_roots_up_two_weights(supersingular):
    twisted = tate_twist(supersingular, 1)
    assert twisted.numerator == [1, 0, 343]
    assert weight_buckets(twisted).cardinality(3) == 2
    assert weight_buckets(twisted).cardinality(1) == 0
    with pytest.raises(ZetaError):
        tate_twist(supersingular, -1)


def test_product_cancels_common_factors(supersingular):
    line_correction = ZetaFunction([1, -1], [1], 7)
    product = supersingular * line_correction
    assert product.numerator == [1, 0, 7]
    assert product.denominator == [1, -7]
    with pytest.raises(ZetaError):
        supersingular * projective_line_zeta(11)


def test_weight3_obstruction(supersingular):
    twisted = tate_twist(supersingular, 1)
    result = weight3_obstruction(twisted, supersingular)
    assert result == {"weight3_a": 2, "weight3_b": 0, "verdict": "obstructed", "obstructed": True}
    assert not weight3_obstruction(twisted, twisted)["obstructed"]
    # weight-1 corrections leave bucket 3 alone
    assert not weight3_obstruction(twisted * supersingular, twisted)["obstructed"]
    with pytest.raises(ZetaError):
        weight3_obstruction(supersingular, projective_line_zeta(11))


def test_complex_roots_with_multiplicity():
    roots = sorted(complex_roots([2, -3, 1]), key=lambda r: r.real)
    assert roots == pytest.approx([1, 2])
    double = complex_roots([1, -2, 1])
    assert double == pytest.approx([1, 1])
    assert cluster_roots(double)[0]["multiplicity"] == 2
    with pytest.raises(ZetaError):
        complex_roots([5])


def test_complex_roots_of_an_irreducible_quartic():
    roots = complex_roots([1, 0, 0, 0, 49])
    assert len(roots) == 4
    assert all(abs(abs(r) - 7 ** -0.5) < 1e-9 for r in roots)


@pytest.mark.parametrize("p", [7, 11, 19, 23])
def test_lambda_two_is_supersingular_when_p_is_3_mod_4(p):
    z = zeta_elliptic_from_count(legendre_counts(2, p, (1,))[1], p)
    assert frobenius_trace(z) == 0
    assert weight_buckets(z).to_dict()["buckets"] == {"1": 2}


@pytest.mark.parametrize("p", [7, 11])
def test_second_count_is_predicted(p):
    counts = legendre_counts(2, p)
    z = zeta_elliptic_from_count(counts[1], p)
    assert predict_count(z, 2) == counts[2]
