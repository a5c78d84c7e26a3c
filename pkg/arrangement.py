"""
Plane Arrangements
Incidence census, admissibility and degenerations of parameterised octic arrangements in P^3
"""

import itertools
import logging
import math
import re
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import Matrix

from expression_parser import ExpressionSyntaxError, parse_polynomial
from multipoly import QQ, SparsePolynomial, rational_roots

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]
PARAMETER = ("t",)
_FIELD_RE = re.compile(r"\S+")


class ArrangementError(Exception):
    """Base error for arrangement operations"""


class DegenerateParameterError(ArrangementError):
    """The parameter value makes two planes coincide or a plane vanish"""


class GeometryError(ArrangementError):
    """Lines are skew or equal where a span was requested"""


class ContainmentError(ArrangementError):
    """A plane does not contain the line of a pencil"""


# ---------------------------------------------------------------------------
# exact linear algebra (sympy over QQ, elimination over F_p)
# ---------------------------------------------------------------------------

def _canonical(vec: Sequence, modulus: int = 0) -> Vector:
    if modulus:
        vals = [int(v) % modulus for v in vec]
        lead = next((v for v in vals if v), 0)
        if not lead:
            return tuple(vals)
        inv = pow(lead, -1, modulus)
        return tuple(v * inv % modulus for v in vals)
    fr = [Fraction(int(v.p), int(v.q)) if hasattr(v, "q") else Fraction(v) for v in vec]
    den = 1
    for f in fr:
        den = den * f.denominator // math.gcd(den, f.denominator)
    ints = [int(f * den) for f in fr]
    g = 0
    for i in ints:
        g = math.gcd(g, i)
    if g == 0:
        return tuple(ints)
    ints = [i // g for i in ints]
    lead = next(i for i in ints if i)
    if lead < 0:
        ints = [-i for i in ints]
    return tuple(ints)


def _rref_mod(rows: Sequence[Sequence[int]], p: int) -> Tuple[List[List[int]], List[int]]:
    m = [[int(v) % p for v in row] for row in rows]
    pivots: List[int] = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [v * inv % p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _rank(rows: Sequence[Sequence[int]], modulus: int = 0) -> int:
    if modulus:
        return len(_rref_mod(rows, modulus)[1])
    return Matrix([list(r) for r in rows]).rank()


def _nullspace(rows: Sequence[Sequence[int]], modulus: int = 0) -> List[Vector]:
    if modulus:
        reduced, pivots = _rref_mod(rows, modulus)
        ncols = len(rows[0])
        free = [c for c in range(ncols) if c not in pivots]
        basis = []
        for fcol in free:
            vec = [0] * ncols
            vec[fcol] = 1
            for row, pc in zip(reduced, pivots):
                vec[pc] = -row[fcol] % modulus
            basis.append(_canonical(vec, modulus))
        return basis
    return [_canonical(list(v), 0) for v in Matrix([list(r) for r in rows]).nullspace()]


def _dot(a: Sequence[int], b: Sequence[int], modulus: int = 0) -> int:
    s = sum(x * y for x, y in zip(a, b))
    return s % modulus if modulus else s


# ---------------------------------------------------------------------------
# planes and lines
# ---------------------------------------------------------------------------

class Plane:
    """Plane c_x*x + c_y*y + c_z*z + c_v*v = 0 with canonical coefficients"""

    __slots__ = ("coeffs", "modulus")

    def __init__(self, coeffs: Sequence, modulus: int = 0):
        if len(coeffs) != 4:
            raise ArrangementError("a plane needs four coefficients")
        canon = _canonical(coeffs, modulus)
        if not any(canon):
            raise DegenerateParameterError("all plane coefficients vanish")
        self.coeffs = canon
        self.modulus = modulus

    def contains_point(self, point: Sequence[int]) -> bool:
        return _dot(self.coeffs, point, self.modulus) == 0

    def __eq__(self, other):
        return isinstance(other, Plane) and (self.coeffs, self.modulus) == (other.coeffs, other.modulus)

    def __hash__(self):
        return hash((self.coeffs, self.modulus))

    def to_text(self) -> str:
        names = ("x", "y", "z", "v")
        parts = []
        for c, n in zip(self.coeffs, names):
            if c == 0:
                continue
            mag = abs(c)
            body = n if mag == 1 else f"{mag}{n}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        suffix = f" mod {self.modulus}" if self.modulus else ""
        return f"Plane({self.to_text()}{suffix})"


class LineP3:
    """Line of P^3 over QQ, stored by Pluecker coordinates and the pencil basis of planes through it"""

    __slots__ = ("plucker", "pencil_basis")

    PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

    def __init__(self, plucker: Sequence[int], pencil_basis: Tuple[Vector, Vector]):
        canon = _canonical(plucker)
        p01, p02, p03, p12, p13, p23 = canon
        if p01 * p23 - p02 * p13 + p03 * p12 != 0:
            raise GeometryError(f"{canon} violates the Pluecker relation")
        if not any(canon):
            raise GeometryError("degenerate Pluecker vector")
        self.plucker = canon
        self.pencil_basis = pencil_basis

    @classmethod
    def from_points(cls, a: Sequence[int], b: Sequence[int]) -> "LineP3":
        plucker = [a[i] * b[j] - a[j] * b[i] for i, j in cls.PAIRS]
        if not any(plucker):
            raise GeometryError("points do not span a line")
        planes = _nullspace([list(a), list(b)])
        return cls(plucker, cls._pencil_rref(planes))

    @classmethod
    def from_planes(cls, first: Union[Plane, Sequence[int]], second: Union[Plane, Sequence[int]]) -> "LineP3":
        a = first.coeffs if isinstance(first, Plane) else tuple(first)
        b = second.coeffs if isinstance(second, Plane) else tuple(second)
        if _rank([a, b]) != 2:
            raise GeometryError("planes coincide; they do not cut out a line")
        pts = _nullspace([list(a), list(b)])
        line = cls.from_points(pts[0], pts[1])
        return line

    @staticmethod
    def _pencil_rref(planes: Sequence[Vector]) -> Tuple[Vector, Vector]:
        reduced, _ = Matrix([list(p) for p in planes]).rref()
        rows = [_canonical(list(reduced.row(i))) for i in range(2)]
        return rows[0], rows[1]

    def points(self) -> List[Vector]:
        return _nullspace([list(self.pencil_basis[0]), list(self.pencil_basis[1])])

    def contains_point(self, point: Sequence[int]) -> bool:
        return all(_dot(b, point) == 0 for b in self.pencil_basis)

    def lies_on(self, plane: Plane) -> bool:
        return all(plane.contains_point(pt) for pt in self.points())

    def meets(self, other: "LineP3") -> bool:
        a, b = self.plucker, other.plucker
        # dual pairing of Pluecker vectors vanishes exactly for coplanar lines
        s = (a[0] * b[5] - a[1] * b[4] + a[2] * b[3]
             + a[3] * b[2] - a[4] * b[1] + a[5] * b[0])
        return s == 0

    def __eq__(self, other):
        return isinstance(other, LineP3) and self.plucker == other.plucker

    def __hash__(self):
        return hash(self.plucker)

    def __repr__(self):
        eqs = " = ".join(Plane(b).to_text() for b in self.pencil_basis)
        return f"LineP3({{{eqs} = 0}})"


def span_line_line(a: LineP3, b: LineP3) -> Plane:
    """The unique plane containing two distinct intersecting lines."""
    if a == b:
        raise GeometryError("lines are equal; the span is not a plane")
    if not a.meets(b):
        raise GeometryError("lines are skew")
    pts = a.points() + b.points()
    normals = _nullspace([list(p) for p in pts])
    if len(normals) != 1:
        raise GeometryError("lines do not span a plane")
    return Plane(normals[0])


def pencil_coordinate(line: LineP3, plane: Plane) -> Tuple[int, int]:
    """Coordinates (a : b) with plane = a*B1 + b*B2 in the line's pencil basis."""
    if not line.lies_on(plane):
        raise ContainmentError(f"{plane!r} does not contain {line!r}")
    b1, b2 = line.pencil_basis
    sol = _nullspace([[b1[i], b2[i], plane.coeffs[i]] for i in range(4)])
    if len(sol) != 1 or sol[0][2] == 0:
        raise ContainmentError(f"{plane!r} is not in the pencil of {line!r}")
    a, b, c = sol[0]
    return _canonical([Fraction(-a, c), Fraction(-b, c)])


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

class FamilyArrangement:
    """Planes whose coefficients are integer polynomials in the parameter t"""

    def __init__(self, planes: Sequence[Sequence[Union[SparsePolynomial, int, str]]],
                 pinned_t: Optional[Fraction] = None, name: str = "arrangement"):
        rows = []
        for row in planes:
            if len(row) != 4:
                raise ArrangementError("each plane needs four coefficient polynomials")
            entries = []
            for c in row:
                if isinstance(c, SparsePolynomial):
                    poly = c.with_variables(PARAMETER)
                elif isinstance(c, str):
                    poly = parse_polynomial(c, PARAMETER, allow_rationals=False)
                else:
                    poly = SparsePolynomial.constant(PARAMETER, c)
                if any(Fraction(v).denominator != 1 for _, v in poly.items()):
                    raise ArrangementError(f"coefficient {poly} is not an integer polynomial")
                entries.append(poly)
            rows.append(tuple(entries))
        if not rows:
            raise ArrangementError("an arrangement needs at least one plane")
        self.planes: List[Tuple[SparsePolynomial, ...]] = rows
        self.pinned_t = pinned_t
        self.name = name

    def __len__(self):
        return len(self.planes)

    def is_constant(self) -> bool:
        return all(c.is_constant() for row in self.planes for c in row)

    def evaluate_row(self, index: int, t: Fraction) -> List[Fraction]:
        return [c.evaluate({"t": t}) for c in self.planes[index]]

    def leading_rows(self) -> List[List[int]]:
        """Coefficient vectors of the top t-degree of each plane (the fibre at t = infinity)."""
        out = []
        for row in self.planes:
            d = max(c.degree("t") for c in row)
            out.append([int(c.coefficient((d,))) for c in row])
        return out

    def __eq__(self, other):
        return isinstance(other, FamilyArrangement) and self.planes == other.planes \
            and self.pinned_t == other.pinned_t

    def __repr__(self):
        return f"FamilyArrangement({self.name!r}, {len(self.planes)} planes)"


BUILTIN_ARRANGEMENT = "paper-octic"
BUILTIN_ALIASES = (BUILTIN_ARRANGEMENT, "builtin-octic")


def builtin_octic() -> FamilyArrangement:
    """u^2 = xy(x+y)z(x+2y+z+tv)v(y+z+v)(x+y+z+(t-1)v), planes in factor order."""
    rows = [
        ("1", "0", "0", "0"),
        ("0", "1", "0", "0"),
        ("1", "1", "0", "0"),
        ("0", "0", "1", "0"),
        ("1", "2", "1", "t"),
        ("0", "0", "0", "1"),
        ("0", "1", "1", "1"),
        ("1", "1", "1", "t-1"),
    ]
    return FamilyArrangement(rows, name=BUILTIN_ARRANGEMENT)


def instantiate(fam: FamilyArrangement, t, modulus: int = 0) -> List[Plane]:
    """Planes at parameter t (optionally reduced mod a prime), checked pairwise distinct."""
    t = Fraction(t)
    planes = []
    for i in range(len(fam)):
        vec = fam.evaluate_row(i, t)
        if modulus:
            den = 1
            for v in vec:
                den = den * v.denominator // math.gcd(den, v.denominator)
            if den % modulus == 0:
                raise DegenerateParameterError(f"t = {t} does not reduce modulo {modulus}")
            vec = [int(v * den) for v in vec]
        try:
            planes.append(Plane(vec, modulus))
        except DegenerateParameterError:
            raise DegenerateParameterError(f"plane P{i + 1} vanishes at t = {t}")
    _require_distinct(planes, f"t = {t}")
    return planes


def instantiate_at_infinity(fam: FamilyArrangement) -> List[Plane]:
    return [Plane(row) for row in fam.leading_rows()]


def _require_distinct(planes: Sequence[Plane], where: str):
    seen: Dict[Plane, int] = {}
    for i, plane in enumerate(planes):
        if plane in seen:
            raise DegenerateParameterError(
                f"planes P{seen[plane] + 1} and P{i + 1} coincide at {where}")
        seen[plane] = i


# ---------------------------------------------------------------------------
# incidence census
# ---------------------------------------------------------------------------

class IncidenceSignature:
    """Census of multiple lines and points of a plane arrangement"""

    def __init__(self, line_census: Dict[int, int], point_census: Dict[Tuple[int, bool], int],
                 triple_points: int, fivefold_points: List[Tuple[Vector, FrozenSet[int]]],
                 multiple_lines: List[Tuple[FrozenSet[int], Optional[LineP3]]],
                 modulus: int = 0):
        self.line_census = dict(line_census)
        self.point_census = dict(point_census)
        self.triple_points = triple_points
        self.fivefold_points = list(fivefold_points)
        self.multiple_lines = list(multiple_lines)
        self.modulus = modulus

    def lines_of_multiplicity(self, m: int) -> List[Tuple[FrozenSet[int], Optional[LineP3]]]:
        return [entry for entry in self.multiple_lines if len(entry[0]) == m]

    def census_key(self) -> tuple:
        return (tuple(sorted(self.line_census.items())),
                tuple(sorted(self.point_census.items())),
                self.triple_points)

    def __eq__(self, other):
        return isinstance(other, IncidenceSignature) and self.census_key() == other.census_key()

    def __hash__(self):
        return hash(self.census_key())

    def to_dict(self) -> Dict:
        return {
            "modulus": self.modulus,
            "lines": {str(m): n for m, n in sorted(self.line_census.items())},
            "points": {f"{l}{'-on-line' if on else '-off-line'}": n
                       for (l, on), n in sorted(self.point_census.items())},
            "triple_points": self.triple_points,
            "fivefold_points": [{"point": list(pt), "planes": sorted(planes)}
                                for pt, planes in self.fivefold_points],
            "triple_lines": [sorted(planes) for planes, _ in self.multiple_lines if len(planes) >= 3],
        }

    def __repr__(self):
        return f"IncidenceSignature({self.to_dict()})"


def incidence_signature(planes: Sequence[Plane], modulus: Optional[int] = None) -> IncidenceSignature:
    """
    Census of m-fold lines (m >= 2), l-fold points (l >= 4, split by whether the point
    lies on a line of multiplicity >= 3) and triple points. Plane indices are 1-based.
    """
    if modulus is None:
        modulus = planes[0].modulus if planes else 0
    _require_distinct(planes, "census input")
    coeffs = [p.coeffs for p in planes]
    n = len(coeffs)

    line_sets: Dict[FrozenSet[int], Tuple[int, int]] = {}
    for i, j in itertools.combinations(range(n), 2):
        members = frozenset(k for k in range(n) if _rank([coeffs[i], coeffs[j], coeffs[k]], modulus) == 2)
        if members not in line_sets:
            line_sets[members] = (i, j)
    line_census: Dict[int, int] = {}
    multiple_lines = []
    for members, (i, j) in sorted(line_sets.items(), key=lambda kv: sorted(kv[0])):
        m = len(members)
        line_census[m] = line_census.get(m, 0) + 1
        line = LineP3.from_planes(coeffs[i], coeffs[j]) if not modulus else None
        multiple_lines.append((frozenset(k + 1 for k in members), line))
    heavy_lines = [members for members in line_sets if len(members) >= 3]

    point_sets: Dict[FrozenSet[int], Vector] = {}
    for triple in itertools.combinations(range(n), 3):
        rows = [coeffs[k] for k in triple]
        if _rank(rows, modulus) != 3:
            continue
        pt = _nullspace(rows, modulus)[0]
        members = frozenset(k for k in range(n) if _dot(coeffs[k], pt, modulus) == 0)
        point_sets.setdefault(members, pt)

    point_census: Dict[Tuple[int, bool], int] = {}
    triple_points = 0
    fivefold = []
    for members, pt in sorted(point_sets.items(), key=lambda kv: sorted(kv[0])):
        l = len(members)
        if l == 3:
            triple_points += 1
            continue
        on_line = any(line <= members for line in heavy_lines)
        key = (l, on_line)
        point_census[key] = point_census.get(key, 0) + 1
        if l >= 5:
            fivefold.append((pt, frozenset(k + 1 for k in members)))
    return IncidenceSignature(line_census, point_census, triple_points, fivefold,
                              multiple_lines, modulus)


class AdmissibilityReport:
    def __init__(self, violations: List[Dict]):
        self.violations = violations

    @property
    def admissible(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.admissible

    def __repr__(self):
        return f"AdmissibilityReport(admissible={self.admissible}, violations={self.violations})"


def is_octic_admissible(planes: Sequence[Plane]) -> AdmissibilityReport:
    """No line on 4 or more planes and no point on 6 or more planes."""
    if len(planes) != 8:
        raise ArrangementError(f"an octic arrangement has 8 planes, got {len(planes)}")
    sig = incidence_signature(planes)
    violations = []
    for members, line in sig.multiple_lines:
        if len(members) >= 4:
            violations.append({"stratum": "line", "multiplicity": len(members),
                               "planes": sorted(members), "line": repr(line)})
    for pt, members in sig.fivefold_points:
        if len(members) >= 6:
            violations.append({"stratum": "point", "multiplicity": len(members),
                               "planes": sorted(members), "point": list(pt)})
    return AdmissibilityReport(violations)


# ---------------------------------------------------------------------------
# degenerations
# ---------------------------------------------------------------------------

def _det(matrix: List[List[SparsePolynomial]]) -> SparsePolynomial:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = SparsePolynomial.zero(PARAMETER)
    for col in range(n):
        entry = matrix[0][col]
        if entry.is_zero():
            continue
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        term = entry * _det(minor)
        total = total + term if col % 2 == 0 else total - term
    return total


class DegeneracyReport:
    def __init__(self, values: List[Fraction], infinity: bool, residual: bool,
                 reference_t: Fraction, candidates: List[Fraction]):
        self.values = values
        self.infinity = infinity
        self.residual = residual
        self.reference_t = reference_t
        self.candidates = candidates

    def to_dict(self) -> Dict:
        return {"values": [str(v) for v in self.values], "infinity": self.infinity,
                "irrational_candidates": self.residual, "reference_t": str(self.reference_t),
                "candidates": [str(c) for c in self.candidates]}

    def __repr__(self):
        return f"DegeneracyReport({self.to_dict()})"


def _signature_or_none(fam: FamilyArrangement, t) -> Optional[IncidenceSignature]:
    try:
        return incidence_signature(instantiate(fam, t))
    except DegenerateParameterError:
        return None


def degenerate_parameters(fam: FamilyArrangement) -> DegeneracyReport:
    """
    Rational parameters where the census differs from the generic one.

    Candidates are the rational roots of one nonzero maximal minor for every
    generically independent subset of 2..4 planes; each candidate is confirmed
    against a generic reference parameter.
    """
    n = len(fam)
    candidates = set()
    residual = False
    for size in (2, 3, 4):
        for subset in itertools.combinations(range(n), size):
            rows = [list(fam.planes[i]) for i in subset]
            for cols in itertools.combinations(range(4), size):
                minor = _det([[row[c] for c in cols] for row in rows])
                if minor.is_zero():
                    continue
                if minor.is_constant():
                    break
                roots = rational_roots(minor)
                candidates |= roots.roots
                residual = residual or roots.residual
                break
    ordered = sorted(candidates)
    reference = Fraction(1)
    while reference in candidates:
        reference += 1
    generic = incidence_signature(instantiate(fam, reference))
    logger.debug("degeneracy candidates %s, reference t = %s", ordered, reference)
    values = [c for c in ordered if _signature_or_none(fam, c) != generic]
    infinity = False
    if not fam.is_constant():
        limit = instantiate_at_infinity(fam)
        if len(set(limit)) != len(limit):
            infinity = True
        else:
            infinity = incidence_signature(limit) != generic
    return DegeneracyReport(values, infinity, residual, reference, ordered)


def reduction_matches_special_fiber(fam: FamilyArrangement, p: int) -> Dict:
    """
    The t = p planes mod p against the t = 0 planes mod p, plus the F_p census.

    `matches` needs identical reduced planes and the fivefold point (0:0:0:1)
    on P1..P5 in the F_p census; agreement of the whole census with t = 0 over
    QQ is reported as `census_matches_t0`.
    """
    at_p = instantiate(fam, p, modulus=p)
    at_zero_mod_p = instantiate(fam, 0, modulus=p)
    sig_p = incidence_signature(at_p)
    sig_zero = incidence_signature(instantiate(fam, 0))
    same = at_p == at_zero_mod_p
    fivefold = any(pt == (0, 0, 0, 1) and planes == frozenset(range(1, 6))
                   for pt, planes in sig_p.fivefold_points)
    return {
        "matches": same and fivefold,
        "same_planes_mod_p": same,
        "fivefold_point_mod_p": fivefold,
        "signature_mod_p": sig_p,
        "signature_t0": sig_zero,
        "census_matches_t0": sig_p == sig_zero,
    }


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def parse_arrangement(text: str) -> FamilyArrangement:
    """
    One plane per line as four whitespace-separated integer polynomials in t;
    an optional header `t = <rational>` pins the parameter; '#' starts a comment.
    """
    rows = []
    pinned = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("t") and "=" in stripped:
            value = stripped.split("=", 1)[1].strip()
            try:
                pinned = Fraction(value)
            except (ValueError, ZeroDivisionError):
                eq = line.index("=")
                col = line.index(value, eq) + 1 if value else len(line.rstrip()) + 1
                raise ExpressionSyntaxError(f"invalid rational {value!r}", lineno, col)
            continue
        fields = [(m.start(), m.group()) for m in _FIELD_RE.finditer(line)]
        if len(fields) != 4:
            col = fields[4][0] + 1 if len(fields) > 4 else len(line.rstrip()) + 1
            raise ExpressionSyntaxError(f"expected 4 coefficients, found {len(fields)}", lineno, col)
        entries = [parse_polynomial(text_, PARAMETER, allow_rationals=False,
                                    line=lineno, column_offset=start)
                   for start, text_ in fields]
        rows.append(entries)
    if not rows:
        raise ArrangementError("arrangement text contains no planes")
    return FamilyArrangement(rows, pinned_t=pinned)


def format_arrangement(fam: FamilyArrangement) -> str:
    lines = []
    if fam.pinned_t is not None:
        lines.append(f"t = {fam.pinned_t}")
    for row in fam.planes:
        lines.append(" ".join(c.to_text(compact=True) for c in row))
    return "\n".join(lines) + "\n"


def load_arrangement(source: str) -> FamilyArrangement:
    """`paper-octic` (alias `builtin-octic`) or a path to an arrangement file."""
    if source in BUILTIN_ALIASES:
        return builtin_octic()
    with open(source, "r", encoding="utf-8") as f:
        fam = parse_arrangement(f.read())
    fam.name = source
    return fam
