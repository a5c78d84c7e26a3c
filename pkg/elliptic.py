"""
Elliptic Curves
Cross-ratios of four branch points, j-invariants and Legendre models over QQ and F_q
"""

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from sympy import Poly, Symbol

from finite_field import (FieldElement, FieldSpec, _poly_powmod_p, _trim,
                          is_squarefree_mod_p)
from multipoly import SparsePolynomial, rational_roots

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, FieldElement]
Point = Tuple[Scalar, Scalar]
Field = Optional[FieldSpec]

IDENTITY = (0, 1, 2, 3)


class EllipticError(Exception):
    """Base error for cross-ratio and j-invariant computations"""


class DegeneracyError(EllipticError):
    """Repeated branch points, lambda in {0, 1} or a non-squarefree quartic"""


class UnsupportedInputError(EllipticError):
    """Input outside what the exact machinery handles (irrational branch points, wrong degree)"""


def _field(field) -> Field:
    if field is None or isinstance(field, FieldSpec):
        return field
    return FieldSpec(int(field))


def _coerce(field: Field, value) -> Scalar:
    if field is None:
        if isinstance(value, FieldElement):
            raise EllipticError("finite-field element given for a rational computation")
        return Fraction(value)
    return field.element(value)


def _is_zero(x: Scalar) -> bool:
    return x.is_zero() if isinstance(x, FieldElement) else x == 0


def _det(a: Point, b: Point) -> Scalar:
    return a[0] * b[1] - a[1] * b[0]


def as_point(value, field: Field = None) -> Point:
    """ℙ¹ point from (a, b) meaning (a:b), a scalar z meaning (z:1), or None meaning (1:0)."""
    if value is None:
        return (_coerce(field, 1), _coerce(field, 0))
    if isinstance(value, tuple):
        a, b = (_coerce(field, v) for v in value)
        if _is_zero(a) and _is_zero(b):
            raise DegeneracyError("(0:0) is not a point of P^1")
        return (a, b)
    return (_coerce(field, value), _coerce(field, 1))


def affine_value(point: Point) -> Optional[Scalar]:
    """a/b for (a:b), None at infinity."""
    a, b = point
    return None if _is_zero(b) else a / b


class BranchQuadruple:
    """Four pairwise distinct points of ℙ¹ over QQ or a finite field"""

    def __init__(self, points: Sequence, field=None):
        self.field = _field(field)
        pts = [as_point(v, self.field) for v in points]
        if len(pts) != 4:
            raise UnsupportedInputError(f"a branch quadruple has 4 points, got {len(pts)}")
        for i in range(4):
            for j in range(i + 1, 4):
                if _is_zero(_det(pts[i], pts[j])):
                    raise DegeneracyError(f"branch points {i + 1} and {j + 1} coincide")
        self.points: List[Point] = pts

    @classmethod
    def from_pencil(cls, coords: Sequence[Tuple[int, int]], field=None) -> "BranchQuadruple":
        """Pencil coordinates (a : b) of four planes through a line, read as points of ℙ¹."""
        return cls([tuple(c) for c in coords], field)

    def __repr__(self):
        shown = ", ".join(f"({a}:{b})" for a, b in self.points)
        return f"BranchQuadruple({shown})"


def cross_ratio(q: BranchQuadruple, ordering: Sequence[int] = IDENTITY) -> Scalar:
    """
    Send the first three points (in `ordering`) to ∞, 0, 1 by a Möbius map and
    return the image of the fourth.
    """
    if sorted(ordering) != [0, 1, 2, 3]:
        raise UnsupportedInputError(f"{ordering} is not a permutation of 0..3")
    p1, p2, p3, p4 = (q.points[i] for i in ordering)
    return (_det(p4, p2) * _det(p3, p1)) / (_det(p4, p1) * _det(p3, p2))


def lambda_orbit(lam: Scalar) -> List[Scalar]:
    """The S3 orbit {λ, 1−λ, 1/λ, (λ−1)/λ, λ/(λ−1), 1/(1−λ)}."""
    if _is_zero(lam) or _is_zero(lam - 1):
        raise DegeneracyError("lambda must avoid 0 and 1")
    one = lam - lam + 1
    return [lam, one - lam, one / lam, (lam - 1) / lam, lam / (lam - 1), one / (one - lam)]


def j_from_lambda(lam: Scalar) -> Scalar:
    """j = 256 (λ² − λ + 1)³ / (λ² (λ − 1)²), normalised so the harmonic class has j = 1728."""
    if _is_zero(lam) or _is_zero(lam - 1):
        raise DegeneracyError(f"lambda = {lam} gives a singular curve")
    return 256 * (lam * lam - lam + 1) ** 3 / (lam * lam * (lam - 1) ** 2)


class LegendreCurve:
    """y² = x(x − 1)(x − λ)"""

    def __init__(self, lam, field=None):
        if isinstance(lam, FieldElement):
            self.field = lam.spec
            self.lam = lam
        else:
            self.field = _field(field)
            self.lam = _coerce(self.field, lam)
        if _is_zero(self.lam) or _is_zero(self.lam - 1):
            raise DegeneracyError(f"lambda = {self.lam} gives a singular curve")

    def branch_coefficients(self) -> List[Scalar]:
        """Coefficients of x(x − 1)(x − λ), constant term first."""
        lam = self.lam
        zero = lam - lam
        return [zero, lam, -(lam + 1), zero + 1]

    def model_text(self) -> str:
        if self.field is None or self.field.k == 1:
            domain_p = 0 if self.field is None else self.field.p
            coeffs = [c if self.field is None else int(c) for c in self.branch_coefficients()]
            poly = SparsePolynomial(("x",), {(i,): c for i, c in enumerate(coeffs)})
            if domain_p:
                poly = poly.reduce_mod(domain_p)
            return f"y^2 = {poly.to_text()}"
        return f"y^2 = x*(x - 1)*(x - {self.lam!r})"

    def j_invariant(self) -> Scalar:
        return j_from_lambda(self.lam)

    def __repr__(self):
        return f"LegendreCurve(lambda={self.lam}, field={self.field})"


def legendre_curve_of_quadruple(q: BranchQuadruple, ordering: Sequence[int] = IDENTITY) -> LegendreCurve:
    return LegendreCurve(cross_ratio(q, ordering), q.field)


def apply_mobius(q: BranchQuadruple, matrix: Sequence) -> BranchQuadruple:
    """Image of every point under (a:b) ↦ (m00·a + m01·b : m10·a + m11·b)."""
    m00, m01, m10, m11 = (_coerce(q.field, v) for v in matrix)
    if _is_zero(m00 * m11 - m01 * m10):
        raise DegeneracyError("Möbius matrix is singular")
    return BranchQuadruple([(m00 * a + m01 * b, m10 * a + m11 * b) for a, b in q.points], q.field)


# ---------------------------------------------------------------------------
# quartics
# ---------------------------------------------------------------------------

def _quartic_coefficients(q) -> List:
    if isinstance(q, SparsePolynomial):
        return list(q.univariate_coefficients())
    return list(q)


def _splitting_degree(coeffs: Sequence[int], p: int) -> int:
    """Least d with f | x^(p^d) − x, i.e. F_(p^d) splits the squarefree f."""
    f = _trim([c % p for c in coeffs])
    x = [0, 1]
    for d in range(1, 5):
        if _trim(_poly_powmod_p(x, p ** d, f, p)) == _trim(x):
            return d
    raise UnsupportedInputError("no splitting field of degree <= 4")


def _roots_in(coeffs: Sequence[int], spec: FieldSpec) -> List[FieldElement]:
    lifted = [spec.element(int(c)) for c in coeffs]
    roots = []
    for x in spec.elements():
        acc = spec.zero()
        for c in reversed(lifted):
            acc = acc * x + c
        if acc.is_zero():
            roots.append(x)
    return roots


def branch_points_of_quartic(q, field=None) -> BranchQuadruple:
    """
    Branch points of y² = q(x): the roots of q, plus ∞ when deg q = 3.

    Over F_p the points live in the splitting field of q (degree <= 4).
    """
    field = _field(field)
    coeffs = _quartic_coefficients(q)
    if field is None:
        coeffs = [Fraction(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        degree = len(coeffs) - 1
        if degree not in (3, 4):
            raise UnsupportedInputError(f"expected a cubic or quartic, got degree {degree}")
        s = Symbol("x")
        if not Poly(list(reversed(coeffs)), s, domain="QQ").is_sqf:
            raise DegeneracyError("quartic is not squarefree")
        poly = SparsePolynomial(("x",), {(i,): c for i, c in enumerate(coeffs)})
        roots = rational_roots(poly)
        if roots.residual:
            raise UnsupportedInputError("branch points are irrational; only rational branch data is supported")
        points = sorted(roots.roots)
        if degree == 3:
            points.append(None)
        return BranchQuadruple(points)

    p = field.p
    ints = _trim([int(c) % p for c in coeffs])
    degree = len(ints) - 1
    if degree not in (3, 4):
        raise UnsupportedInputError(f"expected a cubic or quartic mod {p}, got degree {degree}")
    if not is_squarefree_mod_p(ints, p):
        raise DegeneracyError(f"quartic is not squarefree mod {p}")
    k = _splitting_degree(ints, p)
    spec = FieldSpec(p, k)
    points: List = _roots_in(ints, spec)
    if degree == 3:
        points.append(None)
    logger.debug("branch points of %s mod %d live in F_%d", ints, p, spec.q)
    return BranchQuadruple(points, spec)


def j_from_quartic(q, field=None) -> Scalar:
    """
    j-invariant of the double cover y² = q(x) for a squarefree cubic or quartic.

    Over F_p the result is returned as an element of F_p even when the branch
    points need an extension.
    """
    field = _field(field)
    quad = branch_points_of_quartic(q, field)
    j = j_from_lambda(cross_ratio(quad))
    if field is None:
        return j
    if not j.in_prime_field():
        raise EllipticError(f"j = {j!r} is not in the prime field; computation is inconsistent")
    return field.element(int(j))


def quartic_invariants(q, field=None) -> Tuple[Scalar, Scalar]:
    """Classical invariants I, J of a0 + a1 x + ... + a4 x^4 (as a binary quartic)."""
    field = _field(field)
    coeffs = [_coerce(field, c) for c in _quartic_coefficients(q)]
    zero = _coerce(field, 0)
    coeffs += [zero] * (5 - len(coeffs))
    e, d, c, b, a = coeffs[:5]
    invariant_i = 12 * a * e - 3 * b * d + c * c
    invariant_j = 72 * a * c * e + 9 * b * c * d - 27 * a * d * d - 27 * e * b * b - 2 * c ** 3
    return invariant_i, invariant_j


def j_from_quartic_invariants(q, field=None) -> Scalar:
    """j = 6912 I³ / (4 I³ − J²), computed without locating branch points."""
    field = _field(field)
    invariant_i, invariant_j = quartic_invariants(q, field)
    disc = 4 * invariant_i ** 3 - invariant_j ** 2
    if _is_zero(disc):
        raise DegeneracyError("quartic has a repeated root")
    return 6912 * invariant_i ** 3 / disc


def is_harmonic(j: Scalar) -> bool:
    return _is_zero(j - 1728)

