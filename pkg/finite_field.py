"""
Finite Fields
Arithmetic in F_p and F_{p^k}, quadratic characters, square roots and root finding
"""

import itertools
import logging
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import factorint, isprime

logger = logging.getLogger(__name__)


class FieldError(Exception):
    """Base error for finite field construction and use"""


class FieldArithmeticError(FieldError, ZeroDivisionError):
    """Division by zero in a finite field"""


# ---------------------------------------------------------------------------
# Dense univariate polynomials over F_p (coefficient lists, constant term first)
# ---------------------------------------------------------------------------

def _trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_sub_p(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _poly_mul_p(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _poly_divmod_p(a: Sequence[int], b: Sequence[int], p: int) -> Tuple[List[int], List[int]]:
    a = _trim(list(a))
    b = _trim(list(b))
    if not b:
        raise FieldArithmeticError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    r = a
    while len(r) >= len(b):
        shift = len(r) - len(b)
        c = r[-1] * inv % p
        q[shift] = c
        for i, y in enumerate(b):
            r[i + shift] = (r[i + shift] - c * y) % p
        r = _trim(r)
    return _trim(q), r


def _poly_gcd_p(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_divmod_p(a, b, p)[1]
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _poly_powmod_p(base: Sequence[int], e: int, mod: Sequence[int], p: int) -> List[int]:
    result = [1]
    base = _poly_divmod_p(base, mod, p)[1]
    while e:
        if e & 1:
            result = _poly_divmod_p(_poly_mul_p(result, base, p), mod, p)[1]
        base = _poly_divmod_p(_poly_mul_p(base, base, p), mod, p)[1]
        e >>= 1
    return result


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Ben-Or test: f has no factor of degree i <= deg/2 iff gcd(f, x^(p^i) - x) = 1."""
    f = _trim([c % p for c in coeffs])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    x = [0, 1]
    h = x
    for _ in range(k // 2):
        h = _poly_powmod_p(h, p, f, p)
        if len(_poly_gcd_p(f, _poly_sub_p(h, x, p), p)) > 1:
            return False
    return True


def find_irreducible(p: int, k: int) -> Tuple[int, ...]:
    """
    Lexicographically smallest monic irreducible of degree k over F_p.

    Candidates are scanned by the vector (a_{k-1}, ..., a_0), constant term last.
    Returns coefficients constant term first, ending with the leading 1.
    """
    if k < 2:
        raise FieldError("find_irreducible needs k >= 2")
    if not isprime(p):
        raise FieldError(f"{p} is not prime")
    for vector in itertools.product(range(p), repeat=k):
        if vector[-1] == 0:
            continue
        coeffs = tuple(reversed(vector)) + (1,)
        if is_irreducible(coeffs, p):
            return coeffs
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")


def modulus_text(coeffs: Sequence[int]) -> str:
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        elif i == 1:
            parts.append("x" if c == 1 else f"{c}*x")
        else:
            parts.append(f"x^{i}" if c == 1 else f"{c}*x^{i}")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Field specifications and elements
# ---------------------------------------------------------------------------

class FieldSpec:
    """
    The field F_q, q = p^k, as F_p[x]/(modulus).

    Elements encode to integers in [0, q) by base-p digit packing
    (constant coefficient is the lowest digit).
    """

    MIN_PRIME = 7

    def __init__(self, p: int, k: int = 1, modulus: Optional[Sequence[int]] = None):
        if not isinstance(p, int) or not isprime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if p < self.MIN_PRIME:
            raise FieldError(f"p = {p} is not supported: the construction needs a prime p > 5")
        if k < 1:
            raise FieldError("extension degree must be at least 1")
        if modulus is None:
            modulus = (0, 1) if k == 1 else find_irreducible(p, k)
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError(f"modulus must be monic of degree {k}")
        if k > 1 and not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus_text(modulus)} is reducible over F_{p}")
        self.p = p
        self.k = k
        self.q = p ** k
        self.modulus = modulus
        self._powers = [p ** i for i in range(k)]
        self._exp: Optional[np.ndarray] = None
        self._log: Optional[np.ndarray] = None
        self._chi: Optional[np.ndarray] = None
        self._generator: Optional["FieldElement"] = None

    # identity
    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __repr__(self):
        if self.k == 1:
            return f"FieldSpec(F_{self.p})"
        return f"FieldSpec(F_{self.q} = F_{self.p}[x]/({modulus_text(self.modulus)}))"

    def describe(self) -> Dict[str, Union[int, str]]:
        return {"p": self.p, "k": self.k, "q": self.q, "modulus": modulus_text(self.modulus)}

    def key(self) -> str:
        return f"{self.p}|{self.k}|{','.join(map(str, self.modulus))}"

    # element construction
    def __call__(self, value) -> "FieldElement":
        return self.element(value)

    def element(self, value) -> "FieldElement":
        p = self.p
        if isinstance(value, FieldElement):
            if value.spec != self:
                raise FieldError("element belongs to another field")
            return value
        if isinstance(value, bool):
            raise FieldError("booleans are not field elements")
        if isinstance(value, int):
            return FieldElement(self, (value % p,) + (0,) * (self.k - 1))
        if isinstance(value, Fraction):
            if value.denominator % p == 0:
                raise FieldArithmeticError(f"{value} has a denominator divisible by {p}")
            return self.element(value.numerator) / self.element(value.denominator)
        if isinstance(value, (list, tuple)):
            if len(value) > self.k:
                raise FieldError(f"coefficient vector longer than {self.k}")
            coeffs = tuple(c % p for c in value) + (0,) * (self.k - len(value))
            return FieldElement(self, coeffs)
        raise FieldError(f"cannot build a field element from {value!r}")

    def zero(self) -> "FieldElement":
        return FieldElement(self, (0,) * self.k)

    def one(self) -> "FieldElement":
        return self.element(1)

    def generator_x(self) -> "FieldElement":
        """The class of x in F_p[x]/(modulus)."""
        if self.k == 1:
            raise FieldError("prime fields have no adjoined generator")
        return self.element([0, 1])

    def decode(self, n: int) -> "FieldElement":
        if not 0 <= n < self.q:
            raise FieldError(f"encoding {n} outside [0, {self.q})")
        coeffs = []
        for _ in range(self.k):
            n, c = divmod(n, self.p)
            coeffs.append(c)
        return FieldElement(self, tuple(coeffs))

    def elements(self) -> Iterator["FieldElement"]:
        for n in range(self.q):
            yield self.decode(n)

    # multiplicative structure
    def primitive_element(self) -> "FieldElement":
        if self._generator is None:
            order = self.q - 1
            factors = list(factorint(order))
            for n in range(1, self.q):
                g = self.decode(n)
                if g.is_zero():
                    continue
                if all(g ** (order // r) != self.one() for r in factors):
                    self._generator = g
                    break
            logger.debug("primitive element of F_%d: %r", self.q, self._generator)
        return self._generator

    def _build_tables(self):
        q = self.q
        g = self.primitive_element()
        exp = np.zeros(q - 1, dtype=np.int64)
        # multiplication by g as an F_p-linear map on digit vectors
        columns = [(g * self.element([0] * i + [1])).coeffs for i in range(self.k)]
        p, k = self.p, self.k
        current = [1] + [0] * (k - 1)
        powers = self._powers
        for i in range(q - 1):
            exp[i] = sum(c * w for c, w in zip(current, powers))
            nxt = [0] * k
            for j, c in enumerate(current):
                if c:
                    col = columns[j]
                    for r in range(k):
                        nxt[r] += c * col[r]
            current = [c % p for c in nxt]
        log = np.full(q, -1, dtype=np.int64)
        log[exp] = np.arange(q - 1, dtype=np.int64)
        chi = np.zeros(q, dtype=np.int8)
        chi[exp[0::2]] = 1
        chi[exp[1::2]] = -1
        self._exp, self._log, self._chi = exp, log, chi

    @property
    def exp_table(self) -> np.ndarray:
        if self._exp is None:
            self._build_tables()
        return self._exp

    @property
    def log_table(self) -> np.ndarray:
        if self._log is None:
            self._build_tables()
        return self._log

    @property
    def chi_table(self) -> np.ndarray:
        """Quadratic character indexed by element encoding."""
        if self._chi is None:
            self._build_tables()
        return self._chi

    # vectorised arithmetic on encodings
    def vec_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return (a + b) % self.p
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        p = self.p
        for w in self._powers:
            out += (((a // w) % p + (b // w) % p) % p) * w
        return out

    def vec_neg(self, a: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return (-a) % self.p
        out = np.zeros(np.shape(a), dtype=np.int64)
        p = self.p
        for w in self._powers:
            out += ((-((a // w) % p)) % p) * w
        return out

    def vec_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return (a * b) % self.p
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        log, exp = self.log_table, self.exp_table
        zero = (a == 0) | (b == 0)
        s = (log[a] + log[b]) % (self.q - 1)
        return np.where(zero, 0, exp[s])

    def vec_scale(self, c: "FieldElement", a: np.ndarray) -> np.ndarray:
        return self.vec_mul(np.full(np.shape(a), c.encode(), dtype=np.int64), a)


class FieldElement:
    """Element of F_q stored as a reduced coefficient vector"""

    __slots__ = ("spec", "coeffs")

    def __init__(self, spec: FieldSpec, coeffs: Tuple[int, ...]):
        self.spec = spec
        self.coeffs = coeffs

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.spec != self.spec:
                raise FieldError("operands belong to different fields")
            return other
        return self.spec.element(other)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_one(self) -> bool:
        return self.coeffs[0] == 1 and not any(self.coeffs[1:])

    def in_prime_field(self) -> bool:
        return not any(self.coeffs[1:])

    def encode(self) -> int:
        return sum(c * w for c, w in zip(self.coeffs, self.spec._powers))

    def __int__(self):
        if not self.in_prime_field():
            raise FieldError(f"{self!r} is not in the prime field")
        return self.coeffs[0]

    def __add__(self, other):
        other = self._coerce(other)
        p = self.spec.p
        return FieldElement(self.spec, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.spec.p
        return FieldElement(self.spec, tuple(-a % p for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        spec = self.spec
        p, k = spec.p, spec.k
        if k == 1:
            return FieldElement(spec, (self.coeffs[0] * other.coeffs[0] % p,))
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] += a * b
        mod = spec.modulus
        for d in range(2 * k - 2, k - 1, -1):
            c = prod[d] % p
            if c:
                for i in range(k):
                    prod[d - k + i] -= c * mod[i]
            prod[d] = 0
        return FieldElement(spec, tuple(c % p for c in prod[:k]))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise FieldArithmeticError("inverse of zero")
        return self ** (self.spec.q - 2)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise FieldArithmeticError("division by zero")
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("field powers need an integer exponent")
        if n < 0:
            return self.inverse() ** (-n)
        result = self.spec.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def frobenius(self, times: int = 1) -> "FieldElement":
        return self ** (self.spec.p ** times)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.spec == other.spec and self.coeffs == other.coeffs
        if isinstance(other, int) and not isinstance(other, bool):
            return self == self.spec.element(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.spec, self.coeffs))

    def __repr__(self):
        if self.spec.k == 1:
            return f"{self.coeffs[0]}"
        return "[" + ",".join(map(str, self.coeffs)) + "]"


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    if a.spec != b.spec:
        raise FieldError("operands belong to different fields")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise FieldError(f"unknown operation {op!r}")


def quadratic_character(a: FieldElement) -> int:
    """Legendre symbol generalised to F_q: 0, +1 or -1."""
    if a.is_zero():
        return 0
    return 1 if (a ** ((a.spec.q - 1) // 2)).is_one() else -1


EXHAUSTIVE_SQRT_LIMIT = 2 ** 16


def _tonelli_shanks(a: FieldElement) -> FieldElement:
    spec = a.spec
    q = spec.q
    s, m = 0, q - 1
    while m % 2 == 0:
        s += 1
        m //= 2
    z = next(spec.decode(n) for n in range(2, q) if quadratic_character(spec.decode(n)) == -1)
    c = z ** m
    x = a ** ((m + 1) // 2)
    t = a ** m
    r = s
    while not t.is_one():
        i, t2 = 0, t
        while not t2.is_one():
            t2 = t2 * t2
            i += 1
        b = c ** (2 ** (r - i - 1))
        x = x * b
        c = b * b
        t = t * c
        r = i
    return x


def sqrt_in_field(a: FieldElement) -> Optional[FieldElement]:
    """A square root of a, choosing the lexicographically smaller of r and -r; None for non-squares."""
    if a.is_zero():
        return a
    if quadratic_character(a) == -1:
        return None
    spec = a.spec
    if spec.q <= EXHAUSTIVE_SQRT_LIMIT:
        r = next(x for x in spec.elements() if x * x == a)
    else:
        r = _tonelli_shanks(a)
    other = -r
    return r if r.coeffs <= other.coeffs else other


# ---------------------------------------------------------------------------
# Univariate root finding over extensions
# ---------------------------------------------------------------------------

class FieldRoot(NamedTuple):
    value: FieldElement
    degree: int
    multiplicity: int


def _horner(coeffs: Sequence[FieldElement], x: FieldElement) -> FieldElement:
    acc = x.spec.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deflate(coeffs: List[FieldElement], r: FieldElement) -> Tuple[List[FieldElement], FieldElement]:
    n = len(coeffs) - 1
    out = [r.spec.zero()] * n
    acc = r.spec.zero()
    for i in range(n, 0, -1):
        acc = acc * r + coeffs[i]
        out[i - 1] = acc
    remainder = acc * r + coeffs[0]
    return out, remainder


def _as_int_coeffs(f, p: int) -> List[int]:
    if isinstance(f, (list, tuple)):
        return _trim([int(c) % p for c in f])
    domain = getattr(f, "domain", None)
    if domain is None:
        raise FieldError("expected a coefficient list or a univariate polynomial")
    if domain.characteristic not in (0, p):
        raise FieldError(f"polynomial lives over {domain}, not F_{p}")
    coeffs = f.reduce_mod(p).univariate_coefficients()
    return _trim([int(c) for c in coeffs])


def univariate_roots(f, p: int, max_ext_degree: int = 1) -> List[FieldRoot]:
    """
    Roots of a univariate polynomial over F_p in F_{p^e}, e = 1..max_ext_degree.

    Each root is reported once, in the smallest field F_{p^e} that contains it,
    with its multiplicity. `f` is a coefficient list (constant first) or a
    univariate SparsePolynomial.
    """
    if max_ext_degree > 4 or max_ext_degree < 1:
        raise FieldError("max_ext_degree must lie in 1..4")
    base = _as_int_coeffs(f, p)
    if not base:
        raise FieldError("the zero polynomial has every root")
    found: List[FieldRoot] = []
    for e in range(1, max_ext_degree + 1):
        spec = FieldSpec(p, e)
        coeffs = [spec.element(c) for c in base]
        proper = [d for d in range(1, e) if e % d == 0]
        for x in spec.elements():
            if not _horner(coeffs, x).is_zero():
                continue
            if any(x.frobenius(d) == x for d in proper):
                continue
            mult = 0
            work = coeffs
            while len(work) > 1:
                quotient, rem = _deflate(work, x)
                if not rem.is_zero():
                    break
                mult += 1
                work = quotient
            found.append(FieldRoot(x, e, mult))
    return found


def distinct_root_count(f, p: int) -> int:
    """Number of distinct roots over the algebraic closure: deg f / gcd(f, f')."""
    coeffs = _as_int_coeffs(f, p)
    if not coeffs:
        raise FieldError("the zero polynomial has every root")
    if len(coeffs) == 1:
        return 0
    deriv = _trim([(i * c) % p for i, c in enumerate(coeffs)][1:])
    if not deriv:
        raise FieldError("derivative vanishes identically; p-th powers are not handled")
    g = _poly_gcd_p(coeffs, deriv, p)
    return (len(coeffs) - 1) - (len(g) - 1)


def is_squarefree_mod_p(f, p: int) -> bool:
    coeffs = _as_int_coeffs(f, p)
    if len(coeffs) <= 1:
        return True
    return distinct_root_count(coeffs, p) == len(coeffs) - 1
