import logging
from fractions import Fraction

import pytest

from arrangement import instantiate
from counting import (OCTIC_RING, CountCache, CountResult, CountTask, CountTaskError, OracleRefusal,
                      PointCounter, count_affine_zeros, count_double_cover_P3, count_legendre_curve,
                      count_projective_hypersurface, count_summary_frame, legendre_counts, naive_oracle,
                      octic_factors, weil_bound_ok)
from finite_field import FieldSpec
from multipoly import SparsePolynomial, polynomial_ring


@pytest.fixture
def octic_vars():
    return polynomial_ring(" ".join(OCTIC_RING))


def test_affine_counts(xy, f7):
    x, y = xy
    assert count_affine_zeros([x ** 2 + y ** 2 - 1], f7) == 8
    assert count_affine_zeros([x * y], f7) == 13
    assert count_affine_zeros([x * y, x - y], f7) == 1


def test_projective_counts(f7):
    x, y, z = polynomial_ring("x y z")
    assert count_projective_hypersurface(x ** 2 + y ** 2 - z ** 2, f7) == 8
    a, b, c, d = polynomial_ring("a b c d")
    assert count_projective_hypersurface(a, f7) == 57


def test_double_cover_of_a_square(octic_vars, f7):
    x = octic_vars[0]
    # chi(x^8) = 1 off the plane x = 0
    assert count_double_cover_P3(x ** 8, f7) == 2 * 343 + 57
    assert count_double_cover_P3(3 * x ** 8, f7) == 57


def test_factored_and_expanded_octic_agree(family, f7):
    factors = octic_factors(instantiate(family, 0, modulus=7))
    expanded = factors[0]
    for g in factors[1:]:
        expanded = expanded * g
    assert count_double_cover_P3(None, f7, factors=factors) == count_double_cover_P3(expanded, f7)


def test_legendre_counts():
    assert legendre_counts(-1, 7) == {1: 8, 2: 64}
    assert legendre_counts(2, 7) == {1: 8, 2: 64}
    assert count_legendre_curve(Fraction(1, 2), FieldSpec(7)) == 8


@pytest.mark.parametrize("lam", [3, 4, 5, 6])
def test_legendre_counts_respect_the_hasse_bound(lam):
    n = count_legendre_curve(lam, FieldSpec(7))
    assert weil_bound_ok(n, 7)
    assert n % 4 == 0  # full 2-torsion is rational


def test_oracle_agrees_on_small_tasks(xy, f7, octic_vars):
    x, y = xy
    counter = PointCounter()
    assert counter.compare(CountTask("affine-zeros", f7, [x ** 2 + y ** 2 - 1]))["agree"]
    assert counter.compare(CountTask("legendre-curve", FieldSpec(7, 2), lam=-1))["agree"]
    assert counter.compare(CountTask("double-cover-P3", f7, [octic_vars[0] ** 8]))["agree"]
    u, v, w = polynomial_ring("u v w")
    assert counter.compare(CountTask("projective-hypersurface", f7, [u * v - w ** 2]))["agree"]


def test_oracle_on_the_special_fibre(family, f7):
    factors = octic_factors(instantiate(family, 0, modulus=7))
    task = CountTask("double-cover-P3", f7, factors=factors)
    # q^5 is small enough for the weighted enumeration
    assert task.domain_size() == 7 ** 5
    comparison = PointCounter().compare(task)
    assert comparison["agree"]
    assert comparison["oracle"] == naive_oracle(task)


def test_threads_do_not_change_the_count(octic_vars, f7):
    x, y, z, v = octic_vars
    f = x ** 8 + y ** 8 - z ** 4 * v ** 4 + 2 * x * y * z * v ** 5
    assert count_double_cover_P3(f, f7, jobs=3) == count_double_cover_P3(f, f7, jobs=1)


def test_oracle_refuses_large_domains(octic_vars, f7):
    task = CountTask("double-cover-P3", f7, [octic_vars[0] ** 8])
    with pytest.raises(OracleRefusal):
        PointCounter(oracle_limit=10).count(task, "oracle")
    with pytest.raises(OracleRefusal):
        naive_oracle(task, limit=100)


def test_cache_hits_and_persistence(xy, f7, cache_path):
    x, y = xy
    task = CountTask("affine-zeros", f7, [x ** 2 + y ** 2 - 1])
    counter = PointCounter(cache=CountCache(str(cache_path)))
    first = counter.count(task)
    second = counter.count(task)
    assert (first.engine, second.engine) == ("fast", "cache")
    assert second.N == first.N == 8

    reopened = PointCounter(cache=CountCache(str(cache_path)))
    assert reopened.count(task).engine == "cache"
    record = cache_path.read_text().splitlines()[0].split("\t")
    assert record[1:] == ["7", "8", "fast"]
    assert record[0] == task.key()


def test_corrupt_cache_lines_are_skipped(xy, f7, cache_path, caplog):
    x, y = xy
    task = CountTask("affine-zeros", f7, [x * y])
    good = f"{task.key()}\t7\t13\tfast\n"
    cache_path.write_text("not a record\n" + f"{task.key()}\tseven\t13\tfast\n" + good)
    cache = CountCache(str(cache_path))
    with caplog.at_level(logging.WARNING, logger="counting"):
        assert cache.get(task) == 13
    assert len(cache) == 1
    assert sum("corrupt cache record" in r.message for r in caplog.records) == 2


def test_cache_key_separates_fields(xy):
    x, y = xy
    f = x ** 2 + y ** 2 - 1
    assert CountTask("affine-zeros", FieldSpec(7), [f]).key() != CountTask("affine-zeros", FieldSpec(11), [f]).key()
    assert CountTask("affine-zeros", FieldSpec(7), [f]).key() != CountTask("affine-zeros", FieldSpec(7, 2), [f]).key()


def test_foreign_results_are_rejected(xy, f7):
    x, y = xy
    task = CountTask("affine-zeros", f7, [x])
    with pytest.raises(CountTaskError):
        CountCache().put(task, CountResult("0" * 64, 7, 7))
    with pytest.raises(CountTaskError):
        CountResult(task.key(), 7, -1)


def test_malformed_tasks(xy, f7, octic_vars):
    x, y = xy
    with pytest.raises(CountTaskError):
        CountTask("surface", f7, [x])
    with pytest.raises(CountTaskError):
        CountTask("legendre-curve", f7, lam=1)
    with pytest.raises(CountTaskError):
        CountTask("legendre-curve", f7)
    with pytest.raises(CountTaskError):
        CountTask("double-cover-P3", f7, [octic_vars[0] ** 7])
    with pytest.raises(CountTaskError):
        CountTask("double-cover-P3", f7, factors=octic_vars)
    with pytest.raises(CountTaskError):
        CountTask("projective-hypersurface", f7, [x + 1])
    with pytest.raises(CountTaskError):
        CountTask("affine-zeros", f7, [])
    a, = polynomial_ring("a")
    with pytest.raises(CountTaskError):
        CountTask("affine-zeros", f7, [x, a])
    with pytest.raises(CountTaskError):
        CountTask("affine-zeros", f7, [x * Fraction(1, 7)])
    with pytest.raises(CountTaskError):
        PointCounter(jobs=0)
    with pytest.raises(CountTaskError):
        PointCounter().count(CountTask("affine-zeros", f7, [x]), engine="magic")


def test_octic_factors_use_the_octic_ring(special_planes):
    forms = octic_factors(special_planes)
    assert len(forms) == 8
    assert all(f.variables == OCTIC_RING and f.total_degree() == 1 for f in forms)
    assert forms[0] == SparsePolynomial.variable(OCTIC_RING, "x")


def test_weil_bound():
    assert weil_bound_ok(8, 7)
    assert weil_bound_ok(64, 49)
    assert not weil_bound_ok(20, 7)


def test_count_summary_frame():
    frame = count_summary_frame([{"q": 49, "N": 64}, {"q": 7, "N": 8}])
    assert list(frame["q"]) == [7, 49]
    assert count_summary_frame([]).empty


@pytest.mark.slow
def test_special_fibre_over_the_cubic_extension(family):
    factors = octic_factors(instantiate(family, 0, modulus=7))
    n = count_double_cover_P3(None, FieldSpec(7, 3), factors=factors)
    assert n > 0
    assert n == count_double_cover_P3(None, FieldSpec(7, 3), factors=factors, jobs=2)


def _random_factors(rng):
    forms = []
    while len(forms) < 8:
        coeffs = tuple(rng.randrange(7) for _ in range(4))
        if any(coeffs):
            forms.append(coeffs)
    return octic_factors(forms)


@pytest.mark.parametrize("trials", [pytest.param(5), pytest.param(50, marks=pytest.mark.slow)])
def test_random_octics_agree_with_the_oracle(rng, f7, trials):
    counter = PointCounter()
    for _ in range(trials):
        task = CountTask("double-cover-P3", f7, factors=_random_factors(rng))
        assert counter.compare(task)["agree"]


@pytest.mark.slow
@pytest.mark.parametrize("t", [0, 5, 7])
@pytest.mark.parametrize("k", [1, 2])
def test_family_octics_agree_with_the_oracle(family, t, k):
    task = CountTask("double-cover-P3", FieldSpec(7, k), factors=octic_factors(instantiate(family, t, modulus=7)))
    assert PointCounter().compare(task)["agree"]
