"""
Resolution Charts
Blow-ups of double covers in explicit affine charts, singular loci and transverse discriminants
"""

import itertools
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from sympy import Poly, Symbol

from arrangement import (ArrangementError, Plane, incidence_signature,
                         pencil_coordinate)
from finite_field import distinct_root_count, is_squarefree_mod_p, univariate_roots
from multipoly import (QQ, CoefficientReductionError, Ideal, MonomialOrder,
                       PrimeField, SparsePolynomial, buchberger, eliminate,
                       radical_membership, saturate_by)

logger = logging.getLogger(__name__)

PointTuple = Tuple[int, ...]


class ResolutionError(Exception):
    """Base error for blow-ups and chart certificates; `stage` names the pipeline step"""

    def __init__(self, message: str, stage: Optional[str] = None):
        self.stage = stage
        self.message = message
        super().__init__(f"[{stage}] {message}" if stage else message)


class UnsupportedCenterError(ResolutionError):
    pass


class EmptyBlowupError(ResolutionError):
    pass


class ReductionError(ResolutionError):
    pass


class UnsupportedShapeError(ResolutionError):
    pass


class NotSingularAlongLineError(ResolutionError):
    pass


def _var(ring: Sequence[str], name: str, domain=QQ) -> SparsePolynomial:
    return SparsePolynomial.variable(ring, name, domain)


def _product(factors: Sequence[SparsePolynomial], ring: Sequence[str], domain=QQ) -> SparsePolynomial:
    out = SparsePolynomial.constant(ring, 1, domain)
    for f in factors:
        out = out * f
    return out


def _factor_text(f: SparsePolynomial) -> str:
    text = f.to_text()
    return text if len(f) == 1 else f"({text})"


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

class BlowupRecord:
    """One step of a chart's history; line/point records carry the strict-transform data"""

    def __init__(self, kind: str, center: Tuple[str, ...] = (), chart_variable: Optional[str] = None,
                 substitution: Optional[Dict[str, SparsePolynomial]] = None, exponent: int = 0,
                 parent_branch: Optional[SparsePolynomial] = None,
                 child_branch: Optional[SparsePolynomial] = None, note: str = ""):
        self.kind = kind
        self.center = tuple(center)
        self.chart_variable = chart_variable
        self.substitution = substitution or {}
        self.exponent = exponent
        self.parent_branch = parent_branch
        self.child_branch = child_branch
        self.note = note

    def describe(self) -> Dict:
        out = {"kind": self.kind, "center": list(self.center)}
        if self.chart_variable:
            out["chart"] = self.chart_variable
        if self.substitution:
            out["substitution"] = {k: v.to_text() for k, v in sorted(self.substitution.items())}
        if self.exponent:
            out["exponent"] = self.exponent
        if self.note:
            out["note"] = self.note
        return out

    def __repr__(self):
        return f"BlowupRecord({self.describe()})"


class DoubleCoverChart:
    """Affine chart u^2 = f of a double cover; `factors` (when known) multiply to f"""

    def __init__(self, variables: Sequence[str], branch: SparsePolynomial, cover: str = "u",
                 exceptional: Optional[List[Tuple[str, int]]] = None,
                 history: Optional[List[BlowupRecord]] = None,
                 factors: Optional[List[SparsePolynomial]] = None, name: str = "chart"):
        variables = tuple(variables)
        if cover in variables:
            raise ResolutionError(f"cover variable {cover!r} clashes with a chart coordinate")
        if cover in branch.variables_used():
            raise ResolutionError(f"{cover} occurs in the branch polynomial")
        self.variables = variables
        self.cover = cover
        self.branch = branch.with_variables(variables)
        self.domain = branch.domain
        self.exceptional = list(exceptional or [])
        for var, _ in self.exceptional:
            if var not in variables:
                raise ResolutionError(f"exceptional marker {var!r} is not a chart coordinate")
        self.history = list(history or [])
        self.factors = None
        if factors is not None:
            self.factors = [f.with_variables(variables) for f in factors]
            if _product(self.factors, variables, self.domain) != self.branch:
                raise ResolutionError("chart factors do not multiply to the branch polynomial")
        self.name = name

    @property
    def ring(self) -> Tuple[str, ...]:
        return self.variables + (self.cover,)

    def equation(self) -> SparsePolynomial:
        """u^2 - f in the ring (chart coordinates, u)."""
        u = _var(self.ring, self.cover, self.domain)
        return u * u - self.branch.with_variables(self.ring)

    def equations(self) -> List[SparsePolynomial]:
        return [self.equation()]

    def to_text(self) -> str:
        if self.factors:
            body = "*".join(_factor_text(f) for f in self.factors if not f.is_constant())
            scalar = _product([f for f in self.factors if f.is_constant()], self.variables, self.domain)
            if scalar.constant_value() != scalar.domain.convert(1):
                body = f"{scalar.to_text()}*{body}"
            return f"{self.cover}^2 = {body or '1'}"
        return f"{self.cover}^2 = {self.branch.to_text()}"

    def __repr__(self):
        return f"DoubleCoverChart({self.name}: {self.to_text()})"


class IdealChart:
    """Affine chart cut out by an ideal; optionally saturated by a polynomial on construction"""

    def __init__(self, variables: Sequence[str], generators: Sequence[SparsePolynomial],
                 exceptional: Optional[List[Tuple[str, int]]] = None,
                 history: Optional[List[BlowupRecord]] = None, name: str = "chart",
                 saturate: Optional[SparsePolynomial] = None):
        self.variables = tuple(variables)
        gens = [g.with_variables(self.variables) for g in generators]
        if not gens:
            raise ResolutionError("an ideal chart needs generators")
        ideal = Ideal(gens)
        if saturate is not None:
            ideal = saturate_by(ideal, saturate.with_variables(self.variables))
        nonzero = [g for g in ideal.generators if not g.is_zero()]
        self.ideal = Ideal(nonzero) if nonzero else ideal
        self.domain = self.ideal.domain
        self.exceptional = list(exceptional or [])
        self.history = list(history or [])
        self.name = name

    @property
    def ring(self) -> Tuple[str, ...]:
        return self.variables

    def equations(self) -> List[SparsePolynomial]:
        return [g for g in self.ideal.generators if not g.is_zero()]

    def is_empty(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.ideal.generators)

    def to_text(self) -> str:
        return "; ".join(f"{g.to_text()} = 0" for g in self.equations()) or "0 = 0"

    def __repr__(self):
        return f"IdealChart({self.name}: {self.to_text()})"


Chart = Union[DoubleCoverChart, IdealChart]


def _pull_factors(factors: Optional[List[SparsePolynomial]], substitution: Dict[str, SparsePolynomial],
                  ring: Tuple[str, ...], xi: str, divide: int) -> Optional[List[SparsePolynomial]]:
    if factors is None:
        return None
    pulled = []
    leftover = -divide
    for f in factors:
        g = f.substitute(substitution, ring) if substitution else f
        k = g.vanishing_order(xi)
        if k > 0:
            g = g.exact_divide(xi, k)
            leftover += k
        if not (g.is_constant() and g.constant_value() == g.domain.convert(1)):
            pulled.append(g)
    domain = factors[0].domain if factors else QQ
    pulled.extend(_var(ring, xi, domain) for _ in range(leftover))
    return pulled


def blowup_double_cover(chart: DoubleCoverChart, center: Sequence[str]) -> List[DoubleCoverChart]:
    """
    Blow up the coordinate line (two coordinates) or point (three coordinates).

    In the chart of x_i every other centre coordinate x_j becomes x_i*x_j; the
    largest even power x_i^(2m) of the pulled-back branch moves into the cover
    variable (u -> x_i^m u) and any odd leftover stays in the branch.
    """
    center = tuple(center)
    if len(center) not in (2, 3) or len(set(center)) != len(center):
        raise UnsupportedCenterError(f"centre {center} is neither a coordinate line nor a coordinate point")
    for c in center:
        if c not in chart.variables:
            raise UnsupportedCenterError(f"{c!r} is not a coordinate of {chart.name}")
    ring = chart.variables
    dom = chart.domain
    if chart.branch.is_zero():
        raise ResolutionError("cannot blow up a double cover with zero branch")
    children = []
    for xi in center:
        xv = _var(ring, xi, dom)
        substitution = {xj: xv * _var(ring, xj, dom) for xj in center if xj != xi}
        pulled = chart.branch.substitute(substitution, ring)
        a = pulled.vanishing_order(xi)
        m = a // 2
        branch = pulled.exact_divide(xi, 2 * m) if m else pulled
        record = BlowupRecord("point" if len(center) == 3 else "line", center, xi, substitution,
                              2 * m, chart.branch, branch)
        children.append(DoubleCoverChart(
            ring, branch, chart.cover,
            exceptional=chart.exceptional + [(xi, a)],
            history=chart.history + [record],
            factors=_pull_factors(chart.factors, substitution, ring, xi, 2 * m),
            name=f"{chart.name}/{xi}-chart({','.join(center)})",
        ))
    logger.debug("blew up %s along %s into %d charts", chart.name, center, len(children))
    return children


def translate(chart: DoubleCoverChart, shifts: Dict[str, Fraction]) -> DoubleCoverChart:
    """Recentre the chart: v -> v + c for each shift."""
    ring = chart.variables
    dom = chart.domain
    substitution = {v: _var(ring, v, dom) + SparsePolynomial.constant(ring, c, dom)
                    for v, c in shifts.items() if c != 0}
    if not substitution:
        return chart
    branch = chart.branch.substitute(substitution, ring)
    factors = None
    if chart.factors is not None:
        factors = [f.substitute(substitution, ring) for f in chart.factors]
    record = BlowupRecord("translate", tuple(substitution), substitution=substitution)
    return DoubleCoverChart(ring, branch, chart.cover, chart.exceptional, chart.history + [record],
                            factors, name=f"{chart.name}+shift")


def localize(chart: DoubleCoverChart, p: Optional[int] = None) -> DoubleCoverChart:
    """
    Drop branch factors that do not vanish at the origin (mod p when given).

    The dropped product is a unit in the local ring of the integral model at
    the origin of the special fibre, so it is absorbed into the cover variable.
    """
    if chart.factors is None:
        raise ResolutionError(f"{chart.name} carries no factorisation to localise")
    kept, dropped = [], []
    for f in chart.factors:
        value = f.constant_value()
        if p is not None and chart.domain.characteristic == 0:
            vanishes = PrimeField(p).convert(Fraction(value)) == 0
        else:
            vanishes = chart.domain.is_zero(value)
        (kept if vanishes else dropped).append(f)
    branch = _product(kept, chart.variables, chart.domain)
    record = BlowupRecord("localize", note="units dropped: " + ", ".join(_factor_text(f) for f in dropped))
    return DoubleCoverChart(chart.variables, branch, chart.cover, chart.exceptional,
                            chart.history + [record], kept, name=f"{chart.name}/local")


def strict_transform_identity(record: BlowupRecord) -> bool:
    """parent(sigma) == x_i^(2m) * child as an exact polynomial identity."""
    if record.kind not in ("line", "point"):
        return True
    parent = record.parent_branch
    ring = record.child_branch.variables
    pulled = parent.substitute(record.substitution, ring)
    xv = _var(ring, record.chart_variable, parent.domain)
    return pulled == (xv ** record.exponent) * record.child_branch


def verify_history(chart: Chart) -> List[Tuple[str, bool]]:
    return [(f"{i}:{rec.kind}:{rec.chart_variable or '-'}", strict_transform_identity(rec))
            for i, rec in enumerate(chart.history) if rec.kind in ("line", "point")]


def overlap_identity(chart_a: DoubleCoverChart, chart_b: DoubleCoverChart, xi: str, xj: str) -> bool:
    """
    Gluing of the two charts of the line blow-up of (xi, xj).

    chart_a is the xi-chart and chart_b the xj-chart; on the overlap
    xi_b = 1/xj_a, xj_b = xi_a*xj_a, u_b = u_a/xj_a^m. Checked after clearing
    the powers of xj_a: xj^D * f_a == xj^(2m) * xj^D * f_b(sigma).
    """
    ring = chart_a.variables
    dom = chart_a.domain
    if chart_b.variables != ring:
        raise ResolutionError("overlap check needs charts over the same coordinate names")
    m_a = chart_a.history[-1].exponent // 2
    i_idx, j_idx = ring.index(xi), ring.index(xj)
    f_b = chart_b.branch
    d = f_b.degree(xi)
    acc: Dict[Tuple[int, ...], Fraction] = {}
    for mono, c in f_b.items():
        e_i, e_j = mono[i_idx], mono[j_idx]
        new = list(mono)
        new[i_idx] = e_j
        new[j_idx] = (d - e_i) + e_j
        key = tuple(new)
        acc[key] = dom.add(acc.get(key, dom.convert(0)), c)
    pulled_b = SparsePolynomial(ring, acc, dom)
    xjv = _var(ring, xj, dom)
    return (xjv ** d) * chart_a.branch == (xjv ** (2 * m_a)) * pulled_b


# ---------------------------------------------------------------------------
# graph-closure blow-up
# ---------------------------------------------------------------------------

RATIO_NAMES = ("X", "Y", "Z", "T")


def _base_equations(chart: Chart, ring: Tuple[str, ...]) -> List[SparsePolynomial]:
    return [g.with_variables(ring) for g in chart.equations() if not g.is_zero()]


def graph_closure_blowup(chart: Chart, generators: Sequence[SparsePolynomial],
                         ratio_names: Optional[Sequence[str]] = None,
                         indices: Optional[Sequence[int]] = None) -> List[IdealChart]:
    """
    Closure of the graph of (g_0 : ... : g_n) over the chart.

    Chart i adjoins ratio variables r_j (j != i) with relations g_j - r_j*g_i
    and is saturated by g_i.
    """
    gens = list(generators)
    if len(gens) < 2 or all(g.is_zero() for g in gens):
        raise ResolutionError("graph blow-up needs at least two generators, not all zero")
    if ratio_names is None:
        ratio_names = RATIO_NAMES if len(gens) == 4 else tuple(f"r{i}" for i in range(len(gens)))
    ratio_names = tuple(ratio_names)
    base_ring = chart.ring
    if set(ratio_names) & set(base_ring):
        raise ResolutionError(f"ratio names {ratio_names} clash with {base_ring}")
    if indices is None:
        indices = range(len(gens))
    out = []
    for i in indices:
        if gens[i].is_zero():
            continue
        extra = tuple(r for j, r in enumerate(ratio_names) if j != i)
        ring = base_ring + extra
        dom = chart.domain
        gi = gens[i].with_variables(ring)
        relations = _base_equations(chart, ring)
        for j, gj in enumerate(gens):
            if j == i:
                continue
            relations.append(gj.with_variables(ring) - _var(ring, ratio_names[j], dom) * gi)
        record = BlowupRecord("graph", tuple(ratio_names), ratio_names[i],
                              note="map (" + ", ".join(g.to_text() for g in gens) + ")")
        child = IdealChart(ring, relations, exceptional=chart.exceptional,
                           history=chart.history + [record],
                           name=f"{chart.name}/graph-{ratio_names[i]}", saturate=gi)
        logger.debug("graph chart %s: %d generators after saturation", child.name, len(child.equations()))
        if child.is_empty():
            logger.info("graph chart %s is empty", child.name)
            continue
        out.append(child)
    if not out:
        raise EmptyBlowupError("saturation gave the unit ideal in every chart")
    return out


def ratio_chart_eliminated(chart: DoubleCoverChart, index: int, line_variable: str,
                           ratio_names: Sequence[str] = RATIO_NAMES) -> List[str]:
    """
    Coordinates of graph chart `index` that are polynomials in the rest.

    The map is (f0*f1, f0*f2, f1*f2, u) with u^2 = f0*f1*f2. On the u-chart the
    two coordinate factors go; on a pair chart each other pair ratio equals
    T^2 times the factor the two pairs share, so those ratios go instead.
    """
    last = len(ratio_names) - 1
    if index == last:
        return [v for v in chart.variables if v != line_variable] + [chart.cover]
    return [chart.cover] + [r for j, r in enumerate(ratio_names[:last]) if j != index]


def project_graph(chart: IdealChart, eliminate: Sequence[str]) -> Tuple[IdealChart, Dict[str, SparsePolynomial]]:
    """
    Eliminate coordinates that the chart expresses as polynomials in the rest.

    Each eliminated v needs a Groebner element v - q(kept) for the block order
    with the eliminated block first; the projected chart is the ideal of the
    remaining elements.
    """
    eliminate = list(eliminate)
    kept = [v for v in chart.variables if v not in eliminate]
    ring = tuple(eliminate) + tuple(kept)
    order = MonomialOrder("block", len(eliminate))
    gb = Ideal([g.with_variables(ring) for g in chart.equations()]).groebner_basis(order)
    elim_set = set(eliminate)
    graph: Dict[str, SparsePolynomial] = {}
    for v in eliminate:
        mono = tuple(1 if w == v else 0 for w in ring)
        for g in gb:
            if g.leading_monomial(order) != mono:
                continue
            lc = g.leading_coefficient(order)
            rest = g - SparsePolynomial(ring, {mono: lc}, g.domain)
            if rest.variables_used() & elim_set:
                continue
            graph[v] = rest.scale(g.domain.div(g.domain.convert(-1), lc)).with_variables(kept)
            break
        else:
            raise UnsupportedShapeError(f"{v} is not a polynomial function on {chart.name}")
    survivors = [g.with_variables(kept) for g in gb if not (g.variables_used() & elim_set)]
    if not survivors:
        survivors = [SparsePolynomial.zero(kept, chart.domain)]
    record = BlowupRecord("project", tuple(eliminate),
                          substitution={v: q for v, q in graph.items()})
    projected = IdealChart(kept, survivors, exceptional=[(v, e) for v, e in chart.exceptional if v in kept],
                           history=chart.history + [record], name=f"{chart.name}/proj")
    return projected, graph


# ---------------------------------------------------------------------------
# reduction, singular loci and discriminants
# ---------------------------------------------------------------------------

def central_fiber(chart: Chart, p: int) -> Chart:
    """Coefficientwise reduction mod p."""
    try:
        if isinstance(chart, DoubleCoverChart):
            factors = None if chart.factors is None else [f.reduce_mod(p) for f in chart.factors]
            return DoubleCoverChart(chart.variables, chart.branch.reduce_mod(p), chart.cover,
                                    chart.exceptional, chart.history + [BlowupRecord("reduce", note=f"mod {p}")],
                                    factors, name=f"{chart.name} mod {p}")
        return IdealChart(chart.variables, [g.reduce_mod(p) for g in chart.equations()],
                          chart.exceptional, chart.history + [BlowupRecord("reduce", note=f"mod {p}")],
                          name=f"{chart.name} mod {p}")
    except CoefficientReductionError as e:
        raise ReductionError(f"{chart.name} does not reduce mod {p}: {e}")


def _det_poly(matrix: List[List[SparsePolynomial]]) -> SparsePolynomial:
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = SparsePolynomial.zero(matrix[0][0].variables, matrix[0][0].domain)
    for col in range(n):
        entry = matrix[0][col]
        if entry.is_zero():
            continue
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        term = entry * _det_poly(minor)
        total = total + term if col % 2 == 0 else total - term
    return total


def jacobian_ideal(chart: Chart) -> Ideal:
    """Equations plus all c x c minors of the Jacobian (c = number of equations, at most 2)."""
    eqs = chart.equations()
    if not eqs:
        raise UnsupportedShapeError(f"{chart.name} has no equations")
    c = len(eqs)
    if c > 2:
        raise UnsupportedShapeError(
            f"{chart.name} has {c} equations; only hypersurfaces and codimension-2 complete intersections are handled")
    ring = eqs[0].variables
    jac = [[e.partial(v) for v in ring] for e in eqs]
    minors = []
    for cols in itertools.combinations(range(len(ring)), c):
        m = _det_poly([[row[j] for j in cols] for row in jac])
        if not m.is_zero():
            minors.append(m)
    return Ideal(eqs + minors)


def singular_locus(chart: Chart) -> Ideal:
    """Reduced Groebner basis of the Jacobian ideal."""
    gb = buchberger(jacobian_ideal(chart))
    logger.debug("singular locus of %s: %d basis elements", chart.name, len(gb.generators))
    return gb


def is_smooth(chart: Chart) -> bool:
    return singular_locus(chart).is_unit()


def dominates_line(locus: Ideal, line_variable: str) -> bool:
    """V(locus) maps onto a dense part of the line coordinate: its elimination ideal is zero."""
    others = [v for v in locus.variables if v != line_variable]
    return eliminate(locus, others).is_zero()


def coordinate_ideal(ring: Sequence[str], names: Sequence[str], domain=QQ) -> Ideal:
    return Ideal([_var(ring, n, domain) for n in names])


def locus_equals(locus: Ideal, target: Ideal) -> Dict[str, bool]:
    """
    Set-theoretic equality V(locus) = V(target), certified in both directions:
    target generators lie in rad(locus) and locus generators lie in rad(target).
    """
    forward = all(radical_membership(g, locus) for g in target.generators)
    backward = all(radical_membership(g, target) for g in locus.generators)
    return {"target_in_radical": forward, "locus_in_radical_of_target": backward,
            "equal": forward and backward}


class TransverseDiscriminant:
    """Determinant of the transverse Hessian along a coordinate line, as a polynomial in the line parameter"""

    def __init__(self, poly: SparsePolynomial, line_variable: str, transverse: Sequence[str]):
        self.poly = poly
        self.line_variable = line_variable
        self.transverse = tuple(transverse)
        self.characteristic = poly.domain.characteristic

    @property
    def degree(self) -> int:
        return self.poly.total_degree()

    @property
    def leading_coefficient(self):
        return self.poly.univariate_coefficients()[-1]

    @property
    def squarefree(self) -> bool:
        if self.characteristic:
            return is_squarefree_mod_p(self.poly, self.characteristic)
        if self.poly.is_constant():
            return True
        return Poly(self._sympy_coeffs(), Symbol("s"), domain="QQ").is_sqf

    @property
    def pinch_count(self) -> int:
        """Distinct roots over the algebraic closure."""
        if self.characteristic:
            return distinct_root_count(self.poly, self.characteristic)
        if self.poly.is_constant():
            return 0
        return Poly(self._sympy_coeffs(), Symbol("s"), domain="QQ").sqf_part().degree()

    def _sympy_coeffs(self) -> List[Fraction]:
        return list(reversed(self.poly.univariate_coefficients()))

    def roots_mod_p(self) -> List[int]:
        """Roots in F_p (characteristic p only)."""
        if not self.characteristic:
            raise ResolutionError("roots_mod_p needs a discriminant over F_p")
        if self.poly.is_constant():
            return []
        return sorted(int(r.value) for r in univariate_roots(self.poly, self.characteristic, 1))

    def to_dict(self) -> Dict:
        return {"polynomial": self.poly.to_text(), "line_variable": self.line_variable,
                "degree": self.degree, "squarefree": self.squarefree, "pinch_count": self.pinch_count}

    def __repr__(self):
        return f"TransverseDiscriminant({self.to_dict()})"


def transverse_discriminant(chart: Chart, line_variable: str,
                            transverse: Sequence[str]) -> TransverseDiscriminant:
    """
    Second-order transverse jet along the line {transverse = 0}.

    The equation and its first-order transverse jet must vanish identically on
    the line; the result is det of the Hessian in the transverse coordinates.
    """
    eqs = chart.equations()
    if len(eqs) != 1:
        raise UnsupportedShapeError(f"{chart.name} is not a hypersurface chart")
    eq = eqs[0]
    ring = eq.variables
    transverse = tuple(transverse)
    if set(transverse) | {line_variable} != set(ring) or line_variable in transverse:
        raise ResolutionError(f"line {{{', '.join(transverse)} = 0}} is not a coordinate line of {ring}")
    on_line = {v: 0 for v in transverse}
    if not eq.partial_evaluate(on_line).is_zero():
        raise NotSingularAlongLineError(f"{chart.name} does not contain the line")
    for v in transverse:
        if not eq.partial(v).partial_evaluate(on_line).is_zero():
            raise NotSingularAlongLineError(f"d/d{v} does not vanish along the line on {chart.name}")
    line_ring = (line_variable,)
    hessian = [[eq.partial(a).partial(b).partial_evaluate(on_line).with_variables(line_ring)
                for b in transverse] for a in transverse]
    det = _det_poly(hessian)
    if det.is_zero():
        raise ResolutionError("transverse form is degenerate along the whole line")
    return TransverseDiscriminant(det, line_variable, transverse)


# ---------------------------------------------------------------------------
# brute-force oracles over F_p
# ---------------------------------------------------------------------------

def _compiled(poly: SparsePolynomial, p: int) -> List[Tuple[Tuple[int, ...], int]]:
    reduced = poly.reduce_mod(p)
    return list(reduced.items())


def _vanishes(compiled: List[Tuple[Tuple[int, ...], int]], point: PointTuple, p: int) -> bool:
    total = 0
    for mono, c in compiled:
        term = c
        for x, e in zip(point, mono):
            if e:
                term = term * pow(x, e, p) % p
        total += term
    return total % p == 0


def variety_points(polys: Sequence[SparsePolynomial], p: int) -> Set[PointTuple]:
    """All F_p points of the common zero set, by enumeration."""
    polys = [f for f in polys if not f.is_zero()]
    if not polys:
        raise ResolutionError("no equations to enumerate")
    n = len(polys[0].variables)
    compiled = [_compiled(f, p) for f in polys]
    return {pt for pt in itertools.product(range(p), repeat=n)
            if all(_vanishes(c, pt, p) for c in compiled)}


def singular_points_bruteforce(chart: Chart, p: int) -> Set[PointTuple]:
    """Points where the equations and every Jacobian minor vanish, straight from the definition."""
    return variety_points(jacobian_ideal(chart).generators, p)


# ---------------------------------------------------------------------------
# local models at the planes through the triple line
# ---------------------------------------------------------------------------

BASE_RING = ("x", "y", "z")
TRIPLE_LINE_CENTER = ("x", "y")


def octic_chart(planes: Sequence[Plane]) -> DoubleCoverChart:
    """u^2 = product of the planes in the affine chart v = 1, factors kept."""
    factors = []
    for plane in planes:
        cx, cy, cz, cv = plane.coeffs
        f = SparsePolynomial(BASE_RING, {(1, 0, 0): cx, (0, 1, 0): cy, (0, 0, 1): cz, (0, 0, 0): cv})
        if not (f.is_constant() and f.constant_value() == 1):
            factors.append(f)
    return DoubleCoverChart(BASE_RING, _product(factors, BASE_RING), factors=factors, name="octic")


class LocalModel:
    """Step-1 chart centred where the exceptional divisor over the triple line meets one plane"""

    def __init__(self, plane_index: int, pencil: Tuple[int, int], exceptional_variable: str,
                 pencil_variable: str, offset: Fraction, chart: DoubleCoverChart):
        self.plane_index = plane_index
        self.pencil = pencil
        self.exceptional_variable = exceptional_variable
        self.pencil_variable = pencil_variable
        self.offset = offset
        self.chart = chart

    @property
    def label(self) -> str:
        return f"P{self.plane_index}"

    def pencil_point(self, s, p: Optional[int] = None) -> Tuple:
        """Pencil coordinate (a : b) of the plane direction at pencil parameter s."""
        slope = Fraction(self.offset) + Fraction(s)
        if self.exceptional_variable == "x":
            point = (-slope, Fraction(1))
        else:
            point = (Fraction(1), -slope)
        if p is None:
            return point
        field = PrimeField(p)
        a, b = (field.convert(c) for c in point)
        if a:
            return (1, b * pow(a, -1, p) % p)
        return (0, 1)

    def __repr__(self):
        return f"LocalModel({self.label}: {self.chart.to_text()})"


def triple_line_planes(planes: Sequence[Plane]):
    sig = incidence_signature(planes)
    triple = sig.lines_of_multiplicity(3)
    if len(triple) != 1:
        raise UnsupportedCenterError(f"expected one triple line, found {len(triple)}")
    members, line = triple[0]
    if line.pencil_basis != ((1, 0, 0, 0), (0, 1, 0, 0)):
        raise UnsupportedCenterError(f"triple line {line!r} is not the coordinate line x = y = 0")
    return sorted(members), line


def local_models(planes: Sequence[Plane], p: int) -> List[LocalModel]:
    """
    Blow up the triple line x = y = 0 of the octic and centre a chart at each
    plane through it, dropping the factors that are units mod p.
    """
    members, line = triple_line_planes(planes)
    root = octic_chart(planes)
    x_chart, y_chart = blowup_double_cover(root, TRIPLE_LINE_CENTER)
    models = []
    for index in members:
        try:
            a, b = pencil_coordinate(line, planes[index - 1])
        except ArrangementError as e:
            raise ResolutionError(str(e), stage="local-model")
        if b != 0:
            chart, e_var, s_var, offset = x_chart, "x", "y", Fraction(-a, b)
        else:
            chart, e_var, s_var, offset = y_chart, "y", "x", Fraction(-b, a)
        local = localize(translate(chart, {s_var: offset}), p)
        local.name = f"P{index}-model"
        models.append(LocalModel(index, (a, b), e_var, s_var, offset, local))
    return models


def line_blowup_charts(model: LocalModel) -> Tuple[DoubleCoverChart, DoubleCoverChart]:
    """Blow-up of the double line {e = s = 0}; returns (chart e -> s*e, chart s -> e*s)."""
    e, s = model.exceptional_variable, model.pencil_variable
    e_chart, s_chart = blowup_double_cover(model.chart, (e, s))
    return s_chart, e_chart


def graph_generators(chart: DoubleCoverChart) -> List[SparsePolynomial]:
    """
    Pairwise products of the three branch factors and u, in the order
    (f0*f1, f0*f2, f1*f2, u) with coordinate factors first.
    """
    if chart.factors is None:
        raise ResolutionError(f"{chart.name} carries no factorisation")
    factors = [f for f in chart.factors if not f.is_constant()]
    if len(factors) != 3:
        raise UnsupportedShapeError(f"{chart.name} has {len(factors)} branch factors, expected 3")

    def sort_key(f):
        used = f.variables_used()
        if len(f) == 1 and len(used) == 1:
            return (0, chart.variables.index(next(iter(used))))
        return (1, 0)

    f0, f1, f2 = sorted(factors, key=sort_key)
    ring = chart.ring
    lift = [f.with_variables(ring) for f in (f0, f1, f2)]
    return [lift[0] * lift[1], lift[0] * lift[2], lift[1] * lift[2], _var(ring, chart.cover, chart.domain)]


# ---------------------------------------------------------------------------
# pinch points
# ---------------------------------------------------------------------------

def pencil_pinch_points(model: LocalModel, discriminant: TransverseDiscriminant, p: int) -> List[Tuple[int, int]]:
    """F_p roots of a chart discriminant, as pencil coordinates of the triple line."""
    return [model.pencil_point(r, p) for r in discriminant.roots_mod_p()]


def pinch_quartic(points: Sequence[Tuple[int, int]], p: int) -> SparsePolynomial:
    """
    Binary form prod(b_i*A - a_i*B) over the pinch points, dehomogenised by
    (A : B) = (w : 1 + c*w) with the least c for which (1 : c) is not a pinch
    point, so no root escapes to infinity.
    """
    field = PrimeField(p)
    canonical = sorted({(int(a) % p, int(b) % p) for a, b in points})
    c = next((c for c in range(p) if (1, c) not in canonical), None)
    if c is None:
        raise ResolutionError(f"every point of P^1(F_{p}) is a pinch point")
    ring = ("w",)
    w = SparsePolynomial.variable(ring, "w", field)
    one = SparsePolynomial.constant(ring, 1, field)
    quartic = one
    for a, b in canonical:
        quartic = quartic * (w.scale(b) - (one + w.scale(c)).scale(a))
    return quartic


def pinch_point_j_check(source, p: int) -> int:
    """
    j-invariant of the double cover of L branched at the pinch points.

    `source` is either a list of pencil points or a univariate quartic; the
    quartic has to be squarefree of degree 4.
    """
    from elliptic import j_from_quartic

    quartic = source if isinstance(source, SparsePolynomial) else pinch_quartic(source, p)
    quartic = quartic.reduce_mod(p)
    if quartic.total_degree() != 4:
        raise ResolutionError(f"pinch form has degree {quartic.total_degree()}, expected 4")
    if not is_squarefree_mod_p(quartic, p):
        raise ResolutionError("pinch points are not distinct")
    return int(j_from_quartic(quartic, p))
