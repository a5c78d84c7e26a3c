"""
Zeta Functions
Rational zeta functions from point counts, exact count prediction and weight buckets of reciprocal roots
"""

import logging
import math
from typing import Dict, Iterable, List, Sequence, Set

import numpy as np
from sympy import Poly, Symbol, factor_list, gcd

from multipoly import SparsePolynomial

logger = logging.getLogger(__name__)

T = Symbol("T")

MAX_ITERATIONS = 500
BUCKET_TOLERANCE = 1e-6
CLUSTER_RADIUS = 1e-7
RESIDUAL_TOLERANCE = 1e-10
WEIGHTS = range(0, 7)


class ZetaError(Exception):
    """Base error for zeta-function computations"""


class ZetaDataError(ZetaError):
    """Counts that no curve over F_q can have"""


class NumericalError(ZetaError):
    """Root iteration did not converge"""


def _trim(coeffs: Sequence[int]) -> List[int]:
    out = [int(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _to_sympy(coeffs: Sequence[int]) -> Poly:
    return Poly(list(reversed(coeffs)), T, domain="ZZ")


def _from_sympy(poly: Poly) -> List[int]:
    return _trim(list(reversed([int(c) for c in poly.all_coeffs()])))


def poly_text(coeffs: Sequence[int]) -> str:
    """Canonical text of an integer polynomial in T (coefficients constant first)."""
    return SparsePolynomial(("T",), {(i,): c for i, c in enumerate(coeffs) if c}).to_text()


class ZetaFunction:
    """
    Z(T) = numerator / denominator with integer polynomials in T, both with
    constant term 1, over F_q.
    """

    def __init__(self, numerator: Sequence[int], denominator: Sequence[int], q: int):
        self.numerator = _trim(numerator) if numerator else [1]
        self.denominator = _trim(denominator) if denominator else [1]
        self.q = int(q)
        if self.numerator[0] != 1 or self.denominator[0] != 1:
            raise ZetaDataError("numerator and denominator need constant term 1")
        if self.q < 2:
            raise ZetaDataError(f"q = {q} is not a prime power")
        common = gcd(_to_sympy(self.numerator), _to_sympy(self.denominator))
        if common.degree() > 0:
            raise ZetaDataError(f"numerator and denominator share the factor {common.as_expr()}")

    def __mul__(self, other: "ZetaFunction") -> "ZetaFunction":
        if other.q != self.q:
            raise ZetaError(f"cannot multiply zetas over F_{self.q} and F_{other.q}")
        num = _to_sympy(self.numerator) * _to_sympy(other.numerator)
        den = _to_sympy(self.denominator) * _to_sympy(other.denominator)
        common = gcd(num, den)
        if common.degree() > 0:
            num, den = num.exquo(common), den.exquo(common)
        num_c, den_c = _from_sympy(num), _from_sympy(den)
        if num_c[0] < 0:
            num_c, den_c = [-c for c in num_c], [-c for c in den_c]
        return ZetaFunction(num_c, den_c, self.q)

    def __eq__(self, other):
        return (isinstance(other, ZetaFunction) and self.q == other.q
                and self.numerator == other.numerator and self.denominator == other.denominator)

    def __hash__(self):
        return hash((tuple(self.numerator), tuple(self.denominator), self.q))

    def to_text(self) -> str:
        return f"num={poly_text(self.numerator)}; den={poly_text(self.denominator)}; q={self.q}"

    def __repr__(self):
        return f"ZetaFunction({self.to_text()})"


def projective_line_zeta(q: int) -> ZetaFunction:
    return ZetaFunction([1], [1, -(q + 1), q], q)


def zeta_elliptic_from_count(n1: int, p: int) -> ZetaFunction:
    """(1 - aT + pT^2) / ((1 - T)(1 - pT)) with a = p + 1 - N1."""
    a = p + 1 - n1
    if a * a > 4 * p:
        raise ZetaDataError(f"N1 = {n1} violates the Hasse bound over F_{p} (a = {a})")
    return ZetaFunction([1, -a, p], [1, -(p + 1), p], p)


def frobenius_trace(z: ZetaFunction) -> int:
    """a = -(linear coefficient of the numerator)."""
    return -z.numerator[1] if len(z.numerator) > 1 else 0


def _power_sums(coeffs: Sequence[int], k: int) -> List[int]:
    """
    Power sums s_1..s_k of the reciprocal roots of 1 + c1 T + ... + cn T^n,
    by Newton's identities in exact integers.
    """
    n = len(coeffs) - 1
    e = [1] + [(-1) ** i * coeffs[i] for i in range(1, n + 1)]
    sums = [0] * (k + 1)
    for m in range(1, k + 1):
        total = 0
        for i in range(1, min(m - 1, n) + 1):
            total += (-1) ** (i - 1) * e[i] * sums[m - i]
        if m <= n:
            total += (-1) ** (m - 1) * m * e[m]
        sums[m] = total
    return sums[1:]


def predict_count(z: ZetaFunction, k: int) -> int:
    """N_k = sum of k-th powers of the pole reciprocal roots minus those of the zero reciprocal roots."""
    if k < 1:
        raise ZetaError("k must be at least 1")
    return _power_sums(z.denominator, k)[k - 1] - _power_sums(z.numerator, k)[k - 1]


def functional_equation_ok(z: ZetaFunction) -> bool:
    """For a genus-g numerator of degree 2g: c_(2g-i) = q^(g-i) c_i."""
    num = z.numerator
    d = len(num) - 1
    if d % 2:
        return False
    g = d // 2
    return all(num[d - i] == z.q ** (g - i) * num[i] for i in range(g + 1))


def tate_twist(z: ZetaFunction, n: int) -> ZetaFunction:
    """Multiply every reciprocal root by q^n: P(T) -> P(q^n T)."""
    if n < 0:
        raise ZetaError("only non-negative twists keep integer coefficients")
    scale = z.q ** n
    return ZetaFunction([c * scale ** i for i, c in enumerate(z.numerator)],
                        [c * scale ** i for i, c in enumerate(z.denominator)], z.q)


# ---------------------------------------------------------------------------
# numerical roots
# ---------------------------------------------------------------------------

def _durand_kerner(coeffs: Sequence[int]) -> np.ndarray:
    """Roots of a squarefree integer polynomial (constant first) by simultaneous iteration."""
    c = np.array(coeffs, dtype=np.complex128)
    n = len(coeffs) - 1
    monic = c / c[-1]
    radius = 1 + float(np.max(np.abs(monic[:-1])))
    roots = radius * (0.4 + 0.9j) ** np.arange(n)
    for iteration in range(MAX_ITERATIONS):
        values = np.polyval(monic[::-1], roots)
        diffs = roots[:, None] - roots[None, :]
        np.fill_diagonal(diffs, 1)
        step = values / np.prod(diffs, axis=1)
        roots = roots - step
        if np.max(np.abs(step)) <= 1e-15 * max(1.0, float(np.max(np.abs(roots)))):
            break
    else:
        iteration = MAX_ITERATIONS
    scale = np.polyval(np.abs(c[::-1]), np.abs(roots))
    residual = np.abs(np.polyval(c[::-1], roots))
    if np.any(residual > RESIDUAL_TOLERANCE * np.maximum(scale, 1.0)):
        raise NumericalError(
            f"no convergence for {poly_text(coeffs)} after {iteration} iterations "
            f"(worst relative residual {float(np.max(residual / np.maximum(scale, 1.0))):.3e})")
    return roots


def complex_roots(coeffs: Sequence[int]) -> List[complex]:
    """
    All complex roots with multiplicity. The polynomial is split into
    irreducible factors over ZZ first; each factor is solved by Durand-Kerner.
    """
    coeffs = _trim(coeffs)
    if len(coeffs) < 2:
        raise ZetaError("complex_roots needs degree at least 1")
    _, factors = factor_list(_to_sympy(coeffs))
    roots: List[complex] = []
    for factor, multiplicity in factors:
        fc = _from_sympy(Poly(factor, T))
        if len(fc) < 2:
            continue
        if len(fc) == 2:
            found = np.array([-fc[0] / fc[1]], dtype=np.complex128)
        else:
            found = _durand_kerner(fc)
        roots.extend(complex(r) for r in found for _ in range(multiplicity))
    return roots


def cluster_roots(roots: Iterable[complex], radius: float = CLUSTER_RADIUS) -> List[Dict]:
    """Group numerically equal roots; returns [{'root': r, 'multiplicity': m}]."""
    clusters: List[Dict] = []
    for r in roots:
        for c in clusters:
            if abs(c["root"] - r) <= radius * max(1.0, abs(r)):
                c["multiplicity"] += 1
                break
        else:
            clusters.append({"root": r, "multiplicity": 1})
    return clusters


class WeightMultiset:
    """Numerator roots sorted into weight buckets |root| = q^(-i/2)"""

    def __init__(self, q: int, buckets: Dict[int, List[complex]], unassigned: List[complex]):
        self.q = q
        self.buckets = buckets
        self.unassigned = unassigned

    def cardinality(self, i: int) -> int:
        return len(self.buckets.get(i, []))

    def populated(self) -> Set[int]:
        return {i for i, roots in self.buckets.items() if roots}

    def to_dict(self) -> Dict:
        return {"q": self.q,
                "buckets": {str(i): len(r) for i, r in sorted(self.buckets.items()) if r},
                "unassigned": [[r.real, r.imag] for r in self.unassigned]}

    def __repr__(self):
        return f"WeightMultiset({self.to_dict()})"


def weight_buckets(z: ZetaFunction, tol: float = BUCKET_TOLERANCE) -> WeightMultiset:
    buckets: Dict[int, List[complex]] = {i: [] for i in WEIGHTS}
    unassigned: List[complex] = []
    if len(z.numerator) < 2:
        return WeightMultiset(z.q, buckets, unassigned)
    log_q = math.log(z.q)
    for root in complex_roots(z.numerator):
        magnitude = abs(root)
        if magnitude == 0:
            unassigned.append(root)
            continue
        weight = -2 * math.log(magnitude) / log_q
        i = round(weight)
        if i in buckets and abs(math.log(magnitude) + i * log_q / 2) <= tol:
            buckets[i].append(root)
        else:
            unassigned.append(root)
    if unassigned:
        logger.debug("%d roots of %s match no weight", len(unassigned), z.to_text())
    return WeightMultiset(z.q, buckets, unassigned)


def weil_check(z: ZetaFunction, expected_weights: Iterable[int]) -> bool:
    """Every numerator root sits in one of the expected weight buckets."""
    expected = set(expected_weights)
    multiset = weight_buckets(z)
    return not multiset.unassigned and multiset.populated() <= expected


def weight3_obstruction(z_a: ZetaFunction, z_b: ZetaFunction) -> Dict:
    """
    Compare the weight-3 bucket sizes of two zetas over the same q. Factors
    whose roots all have weight 0 or 1 never change bucket 3, so a size
    mismatch survives any such correction on either side.
    """
    if z_a.q != z_b.q:
        raise ZetaError(f"zetas over F_{z_a.q} and F_{z_b.q} cannot be compared")
    size_a = weight_buckets(z_a).cardinality(3)
    size_b = weight_buckets(z_b).cardinality(3)
    verdict = "obstructed" if size_a != size_b else "not obstructed"
    return {"weight3_a": size_a, "weight3_b": size_b, "verdict": verdict, "obstructed": size_a != size_b}
