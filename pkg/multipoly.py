"""
Multivariate Polynomials
Exact sparse polynomial arithmetic over QQ and F_p with a Groebner basis kernel
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from sympy import divisors

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]


class PolynomialError(Exception):
    """Base error for polynomial operations"""


class DomainMismatchError(PolynomialError):
    """Operands live over different variable lists or coefficient domains"""


class UnknownVariableError(DomainMismatchError):
    """A variable name is not part of the ambient variable list"""


class DivisibilityError(PolynomialError):
    """Exact division by a variable power failed"""


class CoefficientReductionError(PolynomialError):
    """A rational coefficient cannot be reduced modulo p"""


# ---------------------------------------------------------------------------
# Coefficient domains
# ---------------------------------------------------------------------------

class RationalField:
    """The rationals, stored as fractions.Fraction"""

    name = "QQ"
    characteristic = 0

    def convert(self, value) -> Fraction:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, bool):
            raise DomainMismatchError("booleans are not coefficients")
        if isinstance(value, (int, str)):
            return Fraction(value)
        raise DomainMismatchError(f"cannot convert {value!r} into QQ")

    def is_zero(self, c) -> bool:
        return c == 0

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero coefficient")
        return a / b

    def to_text(self, c) -> str:
        if c.denominator == 1:
            return str(c.numerator)
        return f"{c.numerator}/{c.denominator}"

    def is_negative(self, c) -> bool:
        return c < 0

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "QQ"


class PrimeField:
    """The prime field F_p with residues stored as ints in [0, p)"""

    def __init__(self, p: int):
        if p < 2:
            raise DomainMismatchError(f"invalid characteristic {p}")
        self.characteristic = p
        self.name = f"GF({p})"

    def convert(self, value) -> int:
        p = self.characteristic
        if isinstance(value, bool):
            raise DomainMismatchError("booleans are not coefficients")
        if isinstance(value, int):
            return value % p
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator % p == 0:
                raise CoefficientReductionError(
                    f"denominator {value.denominator} is divisible by {p}")
            return value.numerator * pow(value.denominator, -1, p) % p
        raise DomainMismatchError(f"cannot convert {value!r} into {self.name}")

    def is_zero(self, c) -> bool:
        return c == 0

    def add(self, a, b):
        return (a + b) % self.characteristic

    def sub(self, a, b):
        return (a - b) % self.characteristic

    def mul(self, a, b):
        return a * b % self.characteristic

    def neg(self, a):
        return -a % self.characteristic

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero coefficient")
        p = self.characteristic
        return a * pow(b, -1, p) % p

    def to_text(self, c) -> str:
        return str(c)

    def is_negative(self, c) -> bool:
        return False

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.characteristic == self.characteristic

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return self.name


QQ = RationalField()


# ---------------------------------------------------------------------------
# Monomial orders
# ---------------------------------------------------------------------------

def _degrevlex_key(m: Monomial) -> tuple:
    return (sum(m),) + tuple(-e for e in reversed(m))


class MonomialOrder:
    """
    Total monomial order. Larger keys mean larger monomials.

    kinds: degrevlex, lex, block (first `block_size` variables eliminated,
    degrevlex inside each block)
    """

    KINDS = ("degrevlex", "lex", "block")

    def __init__(self, kind: str = "degrevlex", block_size: int = 0):
        if kind not in self.KINDS:
            raise PolynomialError(f"unknown monomial order {kind!r}")
        if kind == "block" and block_size < 1:
            raise PolynomialError("block order needs a nonempty eliminated prefix")
        self.kind = kind
        self.block_size = block_size if kind == "block" else 0

    def key(self, m: Monomial) -> tuple:
        if self.kind == "degrevlex":
            return _degrevlex_key(m)
        if self.kind == "lex":
            return m
        k = self.block_size
        return (_degrevlex_key(m[:k]), _degrevlex_key(m[k:]))

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and other.kind == self.kind
                and other.block_size == self.block_size)

    def __hash__(self):
        return hash((self.kind, self.block_size))

    def __repr__(self):
        if self.kind == "block":
            return f"MonomialOrder('block', {self.block_size})"
        return f"MonomialOrder({self.kind!r})"


DEGREVLEX = MonomialOrder("degrevlex")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _mono_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def _mono_divides(b: Monomial, a: Monomial) -> bool:
    return all(y <= x for x, y in zip(a, b))


def _mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Sparse polynomials
# ---------------------------------------------------------------------------

class SparsePolynomial:
    """Immutable sparse polynomial in a fixed ordered list of variables"""

    __slots__ = ("variables", "domain", "_terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Optional[Mapping[Monomial, Scalar]] = None,
                 domain=QQ):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise DomainMismatchError(f"repeated variable in {self.variables}")
        self.domain = domain
        n = len(self.variables)
        clean: Dict[Monomial, Scalar] = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != n or any(e < 0 for e in mono):
                raise DomainMismatchError(f"monomial {mono} does not fit {self.variables}")
            c = domain.convert(coeff)
            if not domain.is_zero(c):
                if mono in clean:
                    c = domain.add(clean[mono], c)
                    if domain.is_zero(c):
                        del clean[mono]
                        continue
                clean[mono] = c
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def _raw(cls, variables: Tuple[str, ...], terms: Dict[Monomial, Scalar], domain) -> "SparsePolynomial":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.domain = domain
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, variables: Sequence[str], domain=QQ) -> "SparsePolynomial":
        return cls(variables, {}, domain)

    @classmethod
    def constant(cls, variables: Sequence[str], value, domain=QQ) -> "SparsePolynomial":
        return cls(variables, {(0,) * len(variables): value}, domain)

    @classmethod
    def variable(cls, variables: Sequence[str], name: str, domain=QQ) -> "SparsePolynomial":
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariableError(f"unknown variable {name!r}")
        mono = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {mono: 1}, domain)

    @classmethod
    def parse(cls, text: str, variables: Optional[Sequence[str]] = None, domain=QQ) -> "SparsePolynomial":
        """Parse polynomial text such as 'u^2 - x*y*z'."""
        from expression_parser import parse_polynomial
        return parse_polynomial(text, variables=variables, domain=domain)

    # basic accessors
    def terms(self) -> Dict[Monomial, Scalar]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, mono: Monomial):
        return self._terms.get(tuple(mono), self.domain.convert(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self._terms)

    def constant_value(self):
        return self._terms.get((0,) * len(self.variables), self.domain.convert(0))

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(m) for m in self._terms)

    def degree(self, var: str) -> int:
        i = self._index(var)
        if not self._terms:
            return -1
        return max(m[i] for m in self._terms)

    def variables_used(self) -> Set[str]:
        used = set()
        for mono in self._terms:
            for v, e in zip(self.variables, mono):
                if e:
                    used.add(v)
        return used

    def is_homogeneous(self) -> bool:
        degrees = {sum(m) for m in self._terms}
        return len(degrees) <= 1

    def _index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {var!r} (ambient {self.variables})")

    def _check_compatible(self, other: "SparsePolynomial"):
        if other.variables != self.variables:
            raise DomainMismatchError(f"variable lists differ: {self.variables} vs {other.variables}")
        if other.domain != self.domain:
            raise DomainMismatchError(f"coefficient domains differ: {self.domain} vs {other.domain}")

    def _coerce(self, other) -> "SparsePolynomial":
        if isinstance(other, SparsePolynomial):
            self._check_compatible(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return SparsePolynomial.constant(self.variables, other, self.domain)
        raise DomainMismatchError(f"cannot combine polynomial with {type(other).__name__}")

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        dom = self.domain
        out = dict(self._terms)
        for mono, c in other._terms.items():
            if mono in out:
                s = dom.add(out[mono], c)
                if dom.is_zero(s):
                    del out[mono]
                else:
                    out[mono] = s
            else:
                out[mono] = c
        return SparsePolynomial._raw(self.variables, out, dom)

    __radd__ = __add__

    def __neg__(self):
        dom = self.domain
        return SparsePolynomial._raw(self.variables, {m: dom.neg(c) for m, c in self._terms.items()}, dom)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        dom = self.domain
        out: Dict[Monomial, Scalar] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                c = dom.mul(c1, c2)
                if m in out:
                    c = dom.add(out[m], c)
                    if dom.is_zero(c):
                        del out[m]
                        continue
                out[m] = c
        return SparsePolynomial._raw(self.variables, out, dom)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise PolynomialError("polynomial powers must be non-negative integers")
        result = SparsePolynomial.constant(self.variables, 1, self.domain)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "SparsePolynomial":
        dom = self.domain
        c = dom.convert(c)
        if dom.is_zero(c):
            return SparsePolynomial.zero(self.variables, dom)
        return SparsePolynomial._raw(self.variables, {m: dom.mul(v, c) for m, v in self._terms.items()}, dom)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            try:
                other = SparsePolynomial.constant(self.variables, other, self.domain)
            except PolynomialError:
                return False
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return (self.variables == other.variables and self.domain == other.domain
                and self._terms == other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, self.domain, frozenset(self._terms.items())))
        return self._hash

    # order-dependent data
    def leading_monomial(self, order: MonomialOrder = DEGREVLEX) -> Monomial:
        if not self._terms:
            raise PolynomialError("zero polynomial has no leading term")
        return max(self._terms, key=order.key)

    def leading_coefficient(self, order: MonomialOrder = DEGREVLEX):
        return self._terms[self.leading_monomial(order)]

    def monic(self, order: MonomialOrder = DEGREVLEX) -> "SparsePolynomial":
        if not self._terms:
            return self
        lc = self.leading_coefficient(order)
        dom = self.domain
        return SparsePolynomial._raw(self.variables, {m: dom.div(c, lc) for m, c in self._terms.items()}, dom)

    def primitive(self, order: MonomialOrder = DEGREVLEX) -> "SparsePolynomial":
        """Integer-primitive form over QQ with positive leading coefficient; monic over F_p."""
        if not self._terms:
            return self
        if self.domain.characteristic:
            return self.monic(order)
        den = 1
        for c in self._terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        nums = [int(c * den) for c in self._terms.values()]
        g = 0
        for n in nums:
            g = math.gcd(g, n)
        factor = Fraction(den, g)
        if self.leading_coefficient(order) < 0:
            factor = -factor
        return SparsePolynomial._raw(self.variables, {m: c * factor for m, c in self._terms.items()}, QQ)

    def content(self) -> Fraction:
        """Positive rational content: self = content * (primitive integer polynomial)."""
        if self.domain.characteristic:
            raise DomainMismatchError("content is defined over QQ only")
        if not self._terms:
            return Fraction(0)
        prim = self.primitive()
        mono, c = next(iter(self._terms.items()))
        return abs(c / prim._terms[mono])

    # calculus and substitution
    def partial(self, var: str) -> "SparsePolynomial":
        i = self._index(var)
        dom = self.domain
        out: Dict[Monomial, Scalar] = {}
        for mono, c in self._terms.items():
            e = mono[i]
            if e == 0:
                continue
            c2 = dom.mul(c, dom.convert(e))
            if dom.is_zero(c2):
                continue
            new = mono[:i] + (e - 1,) + mono[i + 1:]
            out[new] = c2
        return SparsePolynomial._raw(self.variables, out, dom)

    def substitute(self, mapping: Mapping[str, "SparsePolynomial"],
                   target_variables: Optional[Sequence[str]] = None) -> "SparsePolynomial":
        """
        Compose with a substitution. Variables missing from `mapping` are sent
        to the variable of the same name in the target ring.
        """
        for name in mapping:
            self._index(name)
        if target_variables is None:
            images = list(mapping.values())
            target_variables = images[0].variables if images else self.variables
        target = tuple(target_variables)
        dom = self.domain
        full: List[SparsePolynomial] = []
        for v in self.variables:
            if v in mapping:
                img = mapping[v]
                if img.variables != target or img.domain != dom:
                    raise DomainMismatchError(f"image of {v} is not in the target ring {target}")
                full.append(img)
            else:
                if v not in target:
                    raise UnknownVariableError(f"variable {v!r} has no image in {target}")
                full.append(SparsePolynomial.variable(target, v, dom))
        powers: Dict[Tuple[int, int], SparsePolynomial] = {}

        def power(i: int, e: int) -> SparsePolynomial:
            key = (i, e)
            if key not in powers:
                powers[key] = full[i] ** e
            return powers[key]

        acc: Dict[Monomial, Scalar] = {}
        for mono, c in self._terms.items():
            term = SparsePolynomial.constant(target, c, dom)
            for i, e in enumerate(mono):
                if e:
                    term = term * power(i, e)
            for m, tc in term._terms.items():
                if m in acc:
                    s = dom.add(acc[m], tc)
                    if dom.is_zero(s):
                        del acc[m]
                    else:
                        acc[m] = s
                else:
                    acc[m] = tc
        return SparsePolynomial._raw(target, acc, dom)

    def exact_divide(self, var: str, power: int = 1) -> "SparsePolynomial":
        """Divide by var**power, which must divide every term."""
        i = self._index(var)
        out: Dict[Monomial, Scalar] = {}
        for mono, c in self._terms.items():
            if mono[i] < power:
                raise DivisibilityError(f"{var}^{power} does not divide {self.to_text()}")
            out[mono[:i] + (mono[i] - power,) + mono[i + 1:]] = c
        return SparsePolynomial._raw(self.variables, out, self.domain)

    def vanishing_order(self, var: str) -> int:
        """Largest k with var**k dividing self (infinite for zero is reported as -1)."""
        if not self._terms:
            return -1
        i = self._index(var)
        return min(m[i] for m in self._terms)

    def evaluate(self, point: Mapping[str, Scalar]):
        dom = self.domain
        values = []
        for v in self.variables:
            if v not in point:
                raise UnknownVariableError(f"no value for {v!r}")
            values.append(dom.convert(point[v]))
        total = dom.convert(0)
        for mono, c in self._terms.items():
            term = c
            for x, e in zip(values, mono):
                if e:
                    term = dom.mul(term, _dom_pow(dom, x, e))
            total = dom.add(total, term)
        return total

    def partial_evaluate(self, values: Mapping[str, Scalar]) -> "SparsePolynomial":
        """Substitute constants for some variables, keeping the ambient list."""
        idx = {self._index(v): self.domain.convert(c) for v, c in values.items()}
        dom = self.domain
        out: Dict[Monomial, Scalar] = {}
        for mono, c in self._terms.items():
            coeff = c
            new = list(mono)
            for i, x in idx.items():
                if mono[i]:
                    coeff = dom.mul(coeff, _dom_pow(dom, x, mono[i]))
                    new[i] = 0
            if dom.is_zero(coeff):
                continue
            key = tuple(new)
            if key in out:
                s = dom.add(out[key], coeff)
                if dom.is_zero(s):
                    del out[key]
                else:
                    out[key] = s
            else:
                out[key] = coeff
        return SparsePolynomial._raw(self.variables, out, dom)

    # change of ring
    def with_variables(self, variables: Sequence[str]) -> "SparsePolynomial":
        """Re-embed into another variable list containing every variable in use."""
        variables = tuple(variables)
        used = self.variables_used()
        missing = used - set(variables)
        if missing:
            raise UnknownVariableError(f"variables {sorted(missing)} are not in {variables}")
        positions = [variables.index(v) if v in variables else None for v in self.variables]
        out: Dict[Monomial, Scalar] = {}
        n = len(variables)
        for mono, c in self._terms.items():
            new = [0] * n
            for pos, e in zip(positions, mono):
                if e:
                    new[pos] = e
            out[tuple(new)] = c
        return SparsePolynomial._raw(variables, out, self.domain)

    def reduce_mod(self, p: int) -> "SparsePolynomial":
        """Coefficientwise reduction into F_p."""
        if self.domain.characteristic == p:
            return self
        if self.domain.characteristic:
            raise DomainMismatchError(f"cannot reduce {self.domain} coefficients modulo {p}")
        return SparsePolynomial(self.variables, self._terms, PrimeField(p))

    def univariate_coefficients(self) -> List[Scalar]:
        """Coefficients [c0, c1, ..., cn] of a polynomial in at most one variable."""
        used = self.variables_used()
        if len(used) > 1:
            raise DomainMismatchError(f"not univariate: uses {sorted(used)}")
        if not self._terms:
            return []
        i = self.variables.index(used.pop()) if used else 0
        deg = max(m[i] for m in self._terms) if self.variables else 0
        coeffs = [self.domain.convert(0)] * (deg + 1)
        for mono, c in self._terms.items():
            coeffs[mono[i] if self.variables else 0] = c
        return coeffs

    # text
    def sorted_terms(self, order: MonomialOrder = DEGREVLEX) -> List[Tuple[Monomial, Scalar]]:
        return sorted(self._terms.items(), key=lambda item: order.key(item[0]), reverse=True)

    def to_text(self, compact: bool = False) -> str:
        if not self._terms:
            return "0"
        dom = self.domain
        plus, minus = ("+", "-") if compact else (" + ", " - ")
        pieces: List[str] = []
        for idx, (mono, c) in enumerate(self.sorted_terms()):
            negative = dom.is_negative(c)
            mag = -c if negative else c
            factors = []
            for v, e in zip(self.variables, mono):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            mono_text = "*".join(factors)
            coeff_text = dom.to_text(mag)
            if not mono_text:
                body = coeff_text
            elif coeff_text == "1":
                body = mono_text
            else:
                body = f"{coeff_text}*{mono_text}"
            if idx == 0:
                pieces.append(("-" if negative else "") + body)
            else:
                pieces.append((minus if negative else plus) + body)
        return "".join(pieces)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"SparsePolynomial({self.to_text()!r}, variables={list(self.variables)}, domain={self.domain})"


def _dom_pow(dom, x, e: int):
    if dom.characteristic:
        return pow(x, e, dom.characteristic)
    return x ** e


def poly_arith(a: SparsePolynomial, b: SparsePolynomial, op: str) -> SparsePolynomial:
    """Apply add, sub or mul to two polynomials over the same ring."""
    a._check_compatible(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise PolynomialError(f"unknown operation {op!r}")


def substitute(f: SparsePolynomial, mapping: Mapping[str, SparsePolynomial],
               target_variables: Optional[Sequence[str]] = None) -> SparsePolynomial:
    return f.substitute(mapping, target_variables)


def partial_derivative(f: SparsePolynomial, var: str) -> SparsePolynomial:
    return f.partial(var)


def exact_divide(f: SparsePolynomial, var: str, power: int = 1) -> SparsePolynomial:
    return f.exact_divide(var, power)


def polynomial_ring(names: Union[str, Sequence[str]], domain=QQ) -> Tuple[SparsePolynomial, ...]:
    """Return the generator polynomials for a list of variable names ('x y z' also works)."""
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(SparsePolynomial.variable(names, v, domain) for v in names)


# ---------------------------------------------------------------------------
# Ideals and the Groebner kernel
# ---------------------------------------------------------------------------

class Ideal:
    """Ideal generated by polynomials over a common ring"""

    def __init__(self, generators: Iterable[SparsePolynomial]):
        gens = list(generators)
        if not gens:
            raise PolynomialError("an ideal needs at least one generator")
        first = gens[0]
        for g in gens[1:]:
            first._check_compatible(g)
        self.generators: List[SparsePolynomial] = gens
        self.variables = first.variables
        self.domain = first.domain
        self._gb_cache: Dict[MonomialOrder, List[SparsePolynomial]] = {}

    def groebner_basis(self, order: MonomialOrder = DEGREVLEX) -> List[SparsePolynomial]:
        if order not in self._gb_cache:
            self._gb_cache[order] = _buchberger(self.generators, order)
        return self._gb_cache[order]

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.generators)

    def is_unit(self) -> bool:
        gb = self.groebner_basis()
        return len(gb) == 1 and gb[0].is_constant() and not gb[0].is_zero()

    def contains(self, f: SparsePolynomial) -> bool:
        return ideal_membership(f, self)

    def radical_contains(self, f: SparsePolynomial) -> bool:
        return radical_membership(f, self)

    def __add__(self, other: "Ideal") -> "Ideal":
        return Ideal(self.generators + other.generators)

    def reduce_mod(self, p: int) -> "Ideal":
        return Ideal([g.reduce_mod(p) for g in self.generators])

    def with_variables(self, variables: Sequence[str]) -> "Ideal":
        return Ideal([g.with_variables(variables) for g in self.generators])

    def __repr__(self):
        return "Ideal(" + ", ".join(g.to_text() for g in self.generators) + ")"


def _normal_form_terms(terms: Dict[Monomial, Scalar], basis: Sequence[Tuple[Monomial, Dict[Monomial, Scalar]]],
                       key: Callable, dom) -> Dict[Monomial, Scalar]:
    """Fully reduce `terms` by monic basis elements given as (leading monomial, terms)."""
    p = dict(terms)
    remainder: Dict[Monomial, Scalar] = {}
    while p:
        m = max(p, key=key)
        c = p.pop(m)
        for lm, g in basis:
            if _mono_divides(lm, m):
                shift = _mono_div(m, lm)
                for gm, gc in g.items():
                    if gm == lm:
                        continue
                    t = _mono_mul(gm, shift)
                    v = dom.sub(p.get(t, dom.convert(0)), dom.mul(c, gc))
                    if dom.is_zero(v):
                        p.pop(t, None)
                    else:
                        p[t] = v
                break
        else:
            remainder[m] = c
    return remainder


def _monic_terms(terms: Dict[Monomial, Scalar], lm: Monomial, dom) -> Dict[Monomial, Scalar]:
    lc = terms[lm]
    return {m: dom.div(c, lc) for m, c in terms.items()}


def _buchberger(generators: Sequence[SparsePolynomial], order: MonomialOrder) -> List[SparsePolynomial]:
    """Reduced Groebner basis with Gebauer-Moeller pair criteria and normal selection."""
    if not generators:
        return []
    variables = generators[0].variables
    dom = generators[0].domain
    key = order.key

    f: List[Tuple[Monomial, Dict[Monomial, Scalar]]] = []
    for g in generators:
        if g.is_zero():
            continue
        t = dict(g.items())
        lm = max(t, key=key)
        f.append((lm, _monic_terms(t, lm, dom)))
    if not f:
        return [SparsePolynomial.zero(variables, dom)]

    # interreduce the input
    while True:
        before = [frozenset(t.items()) for _, t in f]
        reduced: List[Tuple[Monomial, Dict[Monomial, Scalar]]] = []
        for lm, t in f:
            r = _normal_form_terms(t, reduced, key, dom)
            if r:
                rlm = max(r, key=key)
                reduced.append((rlm, _monic_terms(r, rlm, dom)))
        f = reduced
        if [frozenset(t.items()) for _, t in f] == before:
            break

    def update(G: Set[int], B: Set[Tuple[int, int]], ih: int):
        mh = f[ih][0]
        C = set(G)
        D: Set[Tuple[int, int]] = set()
        while C:
            ig = C.pop()
            mg = f[ig][0]
            lcm_hg = _mono_lcm(mh, mg)

            def lcm_divides(ip: int) -> bool:
                return _mono_divides(_mono_lcm(mh, f[ip][0]), lcm_hg)

            if _mono_mul(mh, mg) == lcm_hg or (
                    not any(lcm_divides(ipx) for ipx in C)
                    and not any(lcm_divides(pr[1]) for pr in D)):
                D.add((ih, ig))

        E = set()
        while D:
            ih2, ig = D.pop()
            mg = f[ig][0]
            if _mono_mul(mh, mg) != _mono_lcm(mh, mg):
                E.add((ih2, ig))

        B_new = set()
        while B:
            ig1, ig2 = B.pop()
            mg1, mg2 = f[ig1][0], f[ig2][0]
            lcm12 = _mono_lcm(mg1, mg2)
            if (not _mono_divides(mh, lcm12) or _mono_lcm(mg1, mh) == lcm12
                    or _mono_lcm(mg2, mh) == lcm12):
                B_new.add((ig1, ig2))
        B_new |= E

        G_new = {ig for ig in G if not _mono_divides(mh, f[ig][0])}
        G_new.add(ih)
        return G_new, B_new

    G: Set[int] = set()
    CP: Set[Tuple[int, int]] = set()
    F = set(range(len(f)))
    while F:
        ih = min(F, key=lambda i: key(f[i][0]))
        F.remove(ih)
        G, CP = update(G, CP, ih)

    reductions_to_zero = 0
    while CP:
        pair = min(CP, key=lambda pr: key(_mono_lcm(f[pr[0]][0], f[pr[1]][0])))
        CP.remove(pair)
        i, j = pair
        (li, ti), (lj, tj) = f[i], f[j]
        lcm = _mono_lcm(li, lj)
        si, sj = _mono_div(lcm, li), _mono_div(lcm, lj)
        s: Dict[Monomial, Scalar] = {}
        for m, c in ti.items():
            if m != li:
                s[_mono_mul(m, si)] = c
        for m, c in tj.items():
            if m == lj:
                continue
            t = _mono_mul(m, sj)
            v = dom.sub(s.get(t, dom.convert(0)), c)
            if dom.is_zero(v):
                s.pop(t, None)
            else:
                s[t] = v
        basis = sorted(((f[g][0], f[g][1]) for g in G), key=lambda b: key(b[0]))
        h = _normal_form_terms(s, basis, key, dom) if s else {}
        if h:
            hlm = max(h, key=key)
            f.append((hlm, _monic_terms(h, hlm, dom)))
            G, CP = update(G, CP, len(f) - 1)
        else:
            reductions_to_zero += 1

    result: List[SparsePolynomial] = []
    for ig in G:
        others = [(f[g][0], f[g][1]) for g in G if g != ig]
        r = _normal_form_terms(f[ig][1], others, key, dom)
        if r:
            rlm = max(r, key=key)
            result.append(SparsePolynomial._raw(variables, _monic_terms(r, rlm, dom), dom))
    result.sort(key=lambda g: key(g.leading_monomial(order)), reverse=True)
    if any(g.is_constant() for g in result):
        result = [SparsePolynomial.constant(variables, 1, dom)]
    logger.debug("groebner basis: %d elements, %d zero reductions", len(result), reductions_to_zero)
    return [g.primitive(order) for g in result]


def buchberger(ideal: Ideal, order: MonomialOrder = DEGREVLEX) -> Ideal:
    """Reduced Groebner basis of `ideal` as a new Ideal (primitive integer form over QQ)."""
    return Ideal(ideal.groebner_basis(order))


def normal_form(f: SparsePolynomial, basis: Sequence[SparsePolynomial],
                order: MonomialOrder = DEGREVLEX) -> SparsePolynomial:
    """Remainder of f on division by `basis` (a Groebner basis for a unique answer)."""
    dom = f.domain
    key = order.key
    prepared = []
    for g in basis:
        f._check_compatible(g)
        if g.is_zero():
            continue
        t = dict(g.items())
        lm = max(t, key=key)
        prepared.append((lm, _monic_terms(t, lm, dom)))
    return SparsePolynomial._raw(f.variables, _normal_form_terms(dict(f.items()), prepared, key, dom), dom)


def ideal_membership(f: SparsePolynomial, ideal: Ideal) -> bool:
    gb = ideal.groebner_basis()
    return normal_form(f, gb).is_zero()


def _fresh_name(variables: Sequence[str], stem: str = "w") -> str:
    name = stem
    i = 0
    while name in variables:
        i += 1
        name = f"{stem}{i}"
    return name


def radical_membership(f: SparsePolynomial, ideal: Ideal) -> bool:
    """f lies in rad(I) iff 1 lies in I + (1 - w*f) for a fresh variable w."""
    f._check_compatible(ideal.generators[0])
    if f.is_zero():
        return True
    w = _fresh_name(ideal.variables)
    ring = (w,) + tuple(ideal.variables)
    gens = [g.with_variables(ring) for g in ideal.generators]
    wf = SparsePolynomial.variable(ring, w, ideal.domain) * f.with_variables(ring)
    gens.append(SparsePolynomial.constant(ring, 1, ideal.domain) - wf)
    return Ideal(gens).is_unit()


def eliminate(ideal: Ideal, names: Sequence[str]) -> Ideal:
    """I intersected with the subring in the variables not listed in `names`."""
    names = list(names)
    for n in names:
        if n not in ideal.variables:
            raise UnknownVariableError(f"cannot eliminate unknown variable {n!r}")
    kept = [v for v in ideal.variables if v not in names]
    ring = tuple(names) + tuple(kept)
    reordered = Ideal([g.with_variables(ring) for g in ideal.generators])
    gb = reordered.groebner_basis(MonomialOrder("block", len(names)))
    survivors = [g.with_variables(kept) for g in gb
                 if not (g.variables_used() & set(names))]
    if not survivors:
        survivors = [SparsePolynomial.zero(kept, ideal.domain)]
    return Ideal(survivors)


def saturate_by(ideal: Ideal, f: SparsePolynomial) -> Ideal:
    """(I : f^infinity) computed as eliminate(I + (1 - w*f), {w})."""
    f._check_compatible(ideal.generators[0])
    w = _fresh_name(ideal.variables)
    ring = (w,) + tuple(ideal.variables)
    gens = [g.with_variables(ring) for g in ideal.generators]
    wf = SparsePolynomial.variable(ring, w, ideal.domain) * f.with_variables(ring)
    gens.append(SparsePolynomial.constant(ring, 1, ideal.domain) - wf)
    return eliminate(Ideal(gens), [w])


# ---------------------------------------------------------------------------
# Rational roots
# ---------------------------------------------------------------------------

class RationalRoots:
    """Rational roots of a univariate polynomial with multiplicities and a residual flag"""

    def __init__(self, multiplicities: Dict[Fraction, int], degree: int):
        self.multiplicities = dict(multiplicities)
        self.degree = degree

    @property
    def roots(self) -> Set[Fraction]:
        return set(self.multiplicities)

    @property
    def residual(self) -> bool:
        """True when roots outside QQ remain."""
        return self.degree > sum(self.multiplicities.values())

    def __repr__(self):
        shown = ", ".join(str(r) for r in sorted(self.multiplicities))
        return f"RationalRoots({{{shown}}}, residual={self.residual})"


def _horner(coeffs: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deflate(coeffs: List[Fraction], r: Fraction) -> List[Fraction]:
    """Synthetic division by (x - r) for a polynomial with root r."""
    n = len(coeffs) - 1
    out = [Fraction(0)] * n
    acc = Fraction(0)
    for i in range(n, 0, -1):
        acc = acc * r + coeffs[i]
        out[i - 1] = acc
    return out


def rational_roots(f: SparsePolynomial) -> RationalRoots:
    """All rational roots by divisor search on the primitive integer form."""
    if f.domain.characteristic:
        raise DomainMismatchError("rational_roots works over QQ")
    if f.is_zero():
        raise DomainMismatchError("the zero polynomial has every root")
    coeffs = [Fraction(c) for c in f.primitive().univariate_coefficients()]
    degree = len(coeffs) - 1
    found: Dict[Fraction, int] = {}
    low = 0
    while coeffs[low] == 0:
        low += 1
    if low:
        found[Fraction(0)] = low
        coeffs = coeffs[low:]
    while len(coeffs) > 1:
        a0, an = int(coeffs[0]), int(coeffs[-1])
        hit = None
        for num in divisors(abs(a0)):
            for den in divisors(abs(an)):
                for cand in (Fraction(num, den), Fraction(-num, den)):
                    if _horner(coeffs, cand) == 0:
                        hit = cand
                        break
                if hit is not None:
                    break
            if hit is not None:
                break
        if hit is None:
            break
        found[hit] = found.get(hit, 0) + 1
        coeffs = _deflate(coeffs, hit)
        scale = 1
        for c in coeffs:
            scale = scale * c.denominator // math.gcd(scale, c.denominator)
        coeffs = [c * scale for c in coeffs]
    return RationalRoots(found, degree)
