"""
Point Counting
Exact point counts over F_q: quadratic-character sums for double covers,
stratified projective enumeration, a naive oracle and a persistent count cache
"""

import hashlib
import itertools
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from finite_field import FieldElement, FieldSpec
from multipoly import PolynomialError, SparsePolynomial

logger = logging.getLogger(__name__)
if not logger.handlers:
    logging.basicConfig(level=logging.INFO)

KINDS = ("affine-zeros", "projective-hypersurface", "double-cover-P3", "legendre-curve")
OCTIC_RING = ("x", "y", "z", "v")
ORACLE_LIMIT = 10 ** 8
# largest grid of free coordinates evaluated in one vectorised block
GRID_LIMIT = 1 << 18
# raw weighted representatives are enumerated only up to this domain size
WEIGHTED_ORACLE_LIMIT = 2 * 10 ** 5


class CountTaskError(Exception):
    """Malformed counting task"""


class OracleRefusal(CountTaskError):
    """Enumeration domain too large for the naive oracle"""


# ---------------------------------------------------------------------------
# tasks, results, cache
# ---------------------------------------------------------------------------

def _lam_encoding(lam, spec: FieldSpec) -> int:
    if isinstance(lam, (int, FieldElement)):
        return spec.element(lam).encode()
    return spec.element(Fraction(lam)).encode()


class CountTask:
    """What to count and over which field"""

    def __init__(self, kind: str, spec: FieldSpec, polys: Sequence[SparsePolynomial] = (),
                 factors: Optional[Sequence[SparsePolynomial]] = None, lam=None):
        if kind not in KINDS:
            raise CountTaskError(f"unknown task kind {kind!r}; expected one of {KINDS}")
        self.kind = kind
        self.spec = spec
        p = spec.p
        try:
            self.polys = [f.reduce_mod(p) for f in polys]
            self.factors = None if factors is None else [f.reduce_mod(p) for f in factors]
        except PolynomialError as e:
            raise CountTaskError(f"coefficients do not reduce into F_{p}: {e}")
        self.lam = lam
        self._validate()

    def _validate(self):
        spec = self.spec
        if self.kind == "legendre-curve":
            if self.lam is None:
                raise CountTaskError("a Legendre task needs lambda")
            lam = spec.decode(_lam_encoding(self.lam, spec))
            if lam.is_zero() or (lam - 1).is_zero():
                raise CountTaskError(f"lambda = {lam!r} gives a singular curve")
            return
        if self.kind == "double-cover-P3":
            if spec.p == 2:
                raise CountTaskError("double covers need odd characteristic")
            if self.factors is None:
                if len(self.polys) != 1:
                    raise CountTaskError("a double-cover task needs one octic or its factors")
                f = self.polys[0]
                if not f.is_homogeneous() or f.total_degree() != 8:
                    raise CountTaskError("branch locus must be a homogeneous octic")
            else:
                if len(self.factors) != 8 or any(not g.is_homogeneous() or g.total_degree() != 1
                                                 for g in self.factors):
                    raise CountTaskError("factored branch locus must be 8 linear forms")
            if len(self.ring) != 4:
                raise CountTaskError("double covers of P^3 need four coordinates")
            return
        if not self.polys:
            raise CountTaskError(f"{self.kind} needs at least one polynomial")
        ring = self.polys[0].variables
        if any(f.variables != ring for f in self.polys):
            raise CountTaskError("all polynomials must share one ring")
        if self.kind == "projective-hypersurface":
            if len(self.polys) != 1 or not self.polys[0].is_homogeneous():
                raise CountTaskError("projective counts need one homogeneous polynomial")

    @property
    def ring(self) -> Tuple[str, ...]:
        if self.factors is not None:
            return self.factors[0].variables
        return self.polys[0].variables if self.polys else ()

    def branch(self) -> SparsePolynomial:
        if self.factors is None:
            return self.polys[0]
        out = SparsePolynomial.constant(self.ring, 1, self.factors[0].domain)
        for g in self.factors:
            out = out * g
        return out

    def payload(self) -> str:
        if self.kind == "legendre-curve":
            return f"lambda={_lam_encoding(self.lam, self.spec)}"
        if self.factors is not None:
            return "factors:" + ";".join(sorted(g.to_text(compact=True) for g in self.factors))
        return ";".join(f.to_text(compact=True) for f in self.polys)

    def key(self) -> str:
        spec = self.spec
        text = f"{self.kind}|{spec.p}|{spec.k}|{','.join(map(str, spec.modulus))}|{self.payload()}"
        return hashlib.sha256(text.encode()).hexdigest()

    def domain_size(self) -> int:
        """Points the naive oracle would enumerate."""
        q = self.spec.q
        if self.kind == "legendre-curve":
            return q * q
        n = len(self.ring)
        if self.kind == "double-cover-P3":
            return q ** 5 if q ** 5 <= WEIGHTED_ORACLE_LIMIT else (q ** 4 - 1) // (q - 1)
        return q ** n

    def __repr__(self):
        return f"CountTask({self.kind}, q={self.spec.q}, {self.payload()[:60]})"


class CountResult:
    def __init__(self, task_hash: str, q: int, n: int, elapsed: float = 0.0, engine: str = "fast"):
        if n < 0:
            raise CountTaskError("point counts are non-negative")
        self.task_hash = task_hash
        self.q = q
        self.N = n
        self.elapsed = elapsed
        self.engine = engine

    def to_dict(self) -> Dict:
        return {"hash": self.task_hash, "q": self.q, "N": self.N,
                "elapsed": round(self.elapsed, 4), "engine": self.engine}

    def __repr__(self):
        return f"CountResult(q={self.q}, N={self.N}, engine={self.engine})"


class CountCache:
    """
    Append-only record store, one `hash<TAB>q<TAB>N<TAB>engine` line per count.
    Single writer, many readers; a lock serialises in-process writers.
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._records: Dict[Tuple[str, int], CountResult] = {}
        self._lock = threading.Lock()
        self._loaded = False

    def _load(self):
        if self._loaded:
            return
        self._loaded = True
        if not self.path or not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                try:
                    if len(parts) != 4 or len(parts[0]) != 64:
                        raise ValueError("wrong field count")
                    int(parts[0], 16)
                    q, n = int(parts[1]), int(parts[2])
                    if q < 2 or n < 0:
                        raise ValueError("q or N out of range")
                except ValueError as e:
                    logger.warning("skipping corrupt cache record %s:%d (%s)", self.path, lineno, e)
                    continue
                self._records[(parts[0], q)] = CountResult(parts[0], q, n, engine=parts[3])

    def get(self, task: CountTask) -> Optional[int]:
        with self._lock:
            self._load()
            hit = self._records.get((task.key(), task.spec.q))
        if hit is None:
            logger.debug("cache miss for %r", task)
            return None
        logger.debug("cache hit for %r: N=%d", task, hit.N)
        return hit.N

    def put(self, task: CountTask, result: CountResult):
        if result.task_hash != task.key() or result.q != task.spec.q:
            raise CountTaskError("result does not belong to this task")
        with self._lock:
            self._load()
            self._records[(result.task_hash, result.q)] = result
            if self.path:
                directory = os.path.dirname(self.path)
                if directory:
                    os.makedirs(directory, exist_ok=True)
                line = f"{result.task_hash}\t{result.q}\t{result.N}\t{result.engine}\n"
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line)
                    fh.flush()

    def __len__(self):
        with self._lock:
            self._load()
            return len(self._records)


# ---------------------------------------------------------------------------
# vectorised evaluation
# ---------------------------------------------------------------------------

def _vec_pow(spec: FieldSpec, a: np.ndarray, e: int) -> np.ndarray:
    if e == 1:
        return a
    if spec.k == 1:
        out = np.ones_like(a)
        for _ in range(e):
            out = (out * a) % spec.p
        return out
    log, exp = spec.log_table, spec.exp_table
    return np.where(a == 0, 0, exp[(log[a] * e) % (spec.q - 1)])


class _VectorEvaluator:
    """Evaluates a polynomial over F_p on columns of field-element encodings"""

    def __init__(self, poly: SparsePolynomial, spec: FieldSpec):
        self.spec = spec
        self.terms = [(mono, spec.element(int(c)).encode()) for mono, c in poly.reduce_mod(spec.p).items()]

    def __call__(self, columns: List[np.ndarray], size: int) -> np.ndarray:
        spec = self.spec
        acc = np.zeros(size, dtype=np.int64)
        for mono, c in self.terms:
            term = None
            for col, e in zip(columns, mono):
                if e:
                    factor = _vec_pow(spec, col, e)
                    term = factor if term is None else spec.vec_mul(term, factor)
            if term is None:
                term = np.full(size, c, dtype=np.int64)
            elif c != 1:
                term = spec.vec_mul(np.full(size, c, dtype=np.int64), term)
            acc = spec.vec_add(acc, term)
        return acc


class _ProductEvaluator:
    """Product of polynomials, each evaluated separately (factored octics)"""

    def __init__(self, factors: Sequence[SparsePolynomial], spec: FieldSpec):
        self.spec = spec
        self.parts = [_VectorEvaluator(f, spec) for f in factors]

    def __call__(self, columns: List[np.ndarray], size: int) -> np.ndarray:
        out = None
        for part in self.parts:
            value = part(columns, size)
            out = value if out is None else self.spec.vec_mul(out, value)
        return out


_GRIDS: Dict[Tuple[int, int], np.ndarray] = {}
_GRID_LOCK = threading.Lock()


def _grid(q: int, m: int) -> np.ndarray:
    with _GRID_LOCK:
        if (q, m) not in _GRIDS:
            _GRIDS[(q, m)] = np.indices((q,) * m, dtype=np.int64).reshape(m, -1)
        return _GRIDS[(q, m)]


def _stratum_sum(contribution: Callable[[List[np.ndarray], int], np.ndarray], spec: FieldSpec,
                 fixed: Dict[int, int], n: int, jobs: int = 1) -> int:
    """
    Sum a per-point contribution over all points of F_q^n whose coordinates
    at the `fixed` positions take the given encodings.

    Free coordinates split into a prefix enumerated in Python (and partitioned
    across threads) and a trailing grid evaluated in one vectorised block.
    """
    q = spec.q
    free = [i for i in range(n) if i not in fixed]
    m = len(free)
    grid_dims = m
    while grid_dims > 0 and q ** grid_dims > GRID_LIMIT:
        grid_dims -= 1
    prefix_pos, grid_pos = free[:m - grid_dims], free[m - grid_dims:]
    grid = _grid(q, grid_dims) if grid_dims else np.zeros((0, 1), dtype=np.int64)
    size = grid.shape[1]

    def block(prefix: Tuple[int, ...]) -> int:
        columns: List[np.ndarray] = [None] * n
        for pos, enc in fixed.items():
            columns[pos] = np.full(size, enc, dtype=np.int64)
        for pos, enc in zip(prefix_pos, prefix):
            columns[pos] = np.full(size, enc, dtype=np.int64)
        for row, pos in enumerate(grid_pos):
            columns[pos] = grid[row]
        return int(contribution(columns, size).sum())

    prefixes = list(itertools.product(range(q), repeat=len(prefix_pos)))
    if jobs <= 1 or len(prefixes) < 2:
        return sum(block(pr) for pr in prefixes)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return sum(pool.map(block, prefixes))


def _projective_strata(n: int):
    """Fixed coordinates of the strata (0, .., 0, 1, *, .., *) of P^(n-1)."""
    for i in range(n):
        fixed = {j: 0 for j in range(i)}
        fixed[i] = 1
        yield fixed


def octic_factors(planes) -> List[SparsePolynomial]:
    """Linear forms of planes in the coordinates (x, y, z, v)."""
    forms = []
    for plane in planes:
        coeffs = plane.coeffs if hasattr(plane, "coeffs") else plane
        terms = {tuple(1 if j == i else 0 for j in range(4)): c for i, c in enumerate(coeffs)}
        forms.append(SparsePolynomial(OCTIC_RING, terms))
    return forms


# ---------------------------------------------------------------------------
# fast engines
# ---------------------------------------------------------------------------

def count_double_cover_P3(f: Optional[SparsePolynomial], spec: FieldSpec, jobs: int = 1,
                          factors: Optional[Sequence[SparsePolynomial]] = None) -> int:
    """
    Points of u^2 = f(x, y, z, v) in P(4,1,1,1,1), counted over P^3.

    Every base point contributes 1 + chi(f(P)); chi(lambda^8) = 1 makes this
    independent of the representative.
    """
    task = CountTask("double-cover-P3", spec, [] if f is None else [f], factors)
    return _fast(task, jobs)


def count_projective_hypersurface(f: SparsePolynomial, spec: FieldSpec, jobs: int = 1) -> int:
    return _fast(CountTask("projective-hypersurface", spec, [f]), jobs)


def count_affine_zeros(system: Sequence[SparsePolynomial], spec: FieldSpec, jobs: int = 1) -> int:
    return _fast(CountTask("affine-zeros", spec, system), jobs)


def count_legendre_curve(lam, spec: FieldSpec) -> int:
    """Projective points of y^2 = x(x - 1)(x - lambda), the point at infinity included."""
    return _fast(CountTask("legendre-curve", spec, lam=lam), 1)


def _fast(task: CountTask, jobs: int) -> int:
    spec = task.spec
    if task.kind == "legendre-curve":
        x = np.arange(spec.q, dtype=np.int64)
        minus_one = spec.element(-1).encode()
        minus_lam = spec.vec_neg(np.array([_lam_encoding(task.lam, spec)], dtype=np.int64))[0]
        value = spec.vec_mul(spec.vec_mul(x, spec.vec_add(x, np.full_like(x, minus_one))),
                             spec.vec_add(x, np.full_like(x, minus_lam)))
        chi = spec.chi_table
        return 1 + int((1 + chi[value].astype(np.int64)).sum())

    n = len(task.ring)
    if task.kind == "double-cover-P3":
        evaluate = (_ProductEvaluator(task.factors, spec) if task.factors is not None
                    else _VectorEvaluator(task.polys[0], spec))
        chi = spec.chi_table.astype(np.int64)

        def contribution(columns, size):
            return 1 + chi[evaluate(columns, size)]

        return sum(_stratum_sum(contribution, spec, fixed, n, jobs) for fixed in _projective_strata(n))

    evaluators = [_VectorEvaluator(g, spec) for g in task.polys]

    def zeros(columns, size):
        hit = np.ones(size, dtype=bool)
        for ev in evaluators:
            hit &= ev(columns, size) == 0
        return hit.astype(np.int64)

    if task.kind == "projective-hypersurface":
        return sum(_stratum_sum(zeros, spec, fixed, n, jobs) for fixed in _projective_strata(n))
    return _stratum_sum(zeros, spec, {}, n, jobs)


# ---------------------------------------------------------------------------
# naive oracle
# ---------------------------------------------------------------------------

class _Tables:
    """Addition and multiplication tables built from FieldElement arithmetic"""

    def __init__(self, spec: FieldSpec):
        elements = list(spec.elements())
        self.q = spec.q
        self.add = [[(a + b).encode() for b in elements] for a in elements]
        self.mul = [[(a * b).encode() for b in elements] for a in elements]
        self.inv = [0] + [a.inverse().encode() for a in elements[1:]]

    def evaluate(self, terms, point: Sequence[int]) -> int:
        acc = 0
        for mono, c in terms:
            value = c
            for x, e in zip(point, mono):
                for _ in range(e):
                    value = self.mul[value][x]
            acc = self.add[acc][value]
        return acc

    def power(self, x: int, e: int) -> int:
        out = 1
        for _ in range(e):
            out = self.mul[out][x]
        return out


def _terms(poly: SparsePolynomial, spec: FieldSpec):
    return [(mono, spec.element(int(c)).encode()) for mono, c in poly.reduce_mod(spec.p).items()]


def naive_oracle(task: CountTask, limit: int = ORACLE_LIMIT) -> int:
    """
    Unoptimised recount by raw enumeration, sharing no code with the fast engines.

    Double covers enumerate weighted representatives (u, x, y, z, v) up to
    scaling by (l^4, l, l, l, l) with explicit deduplication while that domain
    is small, and otherwise canonical base points with square roots counted from
    a table of squares.
    """
    size = task.domain_size()
    if size > limit:
        raise OracleRefusal(f"domain of {size} points exceeds the oracle limit {limit}")
    spec = task.spec
    tables = _Tables(spec)
    q = spec.q
    if task.kind == "legendre-curve":
        lam = _lam_encoding(task.lam, spec)
        neg_one, neg_lam = spec.element(-1).encode(), (-spec.decode(lam)).encode()
        count = 1
        for x in range(q):
            rhs = tables.mul[tables.mul[x][tables.add[x][neg_one]]][tables.add[x][neg_lam]]
            count += sum(1 for y in range(q) if tables.mul[y][y] == rhs)
        return count

    n = len(task.ring)
    if task.kind == "double-cover-P3":
        factor_terms = ([_terms(g, spec) for g in task.factors] if task.factors is not None
                        else [_terms(task.polys[0], spec)])

        def branch(point):
            value = 1
            for terms in factor_terms:
                value = tables.mul[value][tables.evaluate(terms, point)]
            return value

        if q ** 5 <= WEIGHTED_ORACLE_LIMIT:
            seen = set()
            for point in itertools.product(range(q), repeat=n):
                if not any(point):
                    continue
                value = branch(point)
                lead = next(c for c in point if c)
                scale = tables.inv[lead]
                base = tuple(tables.mul[scale][c] for c in point)
                weight = tables.power(scale, 4)
                for u in range(q):
                    if tables.mul[u][u] == value:
                        seen.add((tables.mul[weight][u],) + base)
            return len(seen)
        square_count = [0] * q
        for u in range(q):
            square_count[tables.mul[u][u]] += 1
        count = 0
        for i in range(n):
            for rest in itertools.product(range(q), repeat=n - 1 - i):
                count += square_count[branch((0,) * i + (1,) + rest)]
        return count

    system = [_terms(g, spec) for g in task.polys]
    if task.kind == "projective-hypersurface":
        seen = set()
        for point in itertools.product(range(q), repeat=n):
            if not any(point):
                continue
            scale = tables.inv[next(c for c in point if c)]
            canonical = tuple(tables.mul[scale][c] for c in point)
            if canonical not in seen and tables.evaluate(system[0], canonical) == 0:
                seen.add(canonical)
        return len(seen)
    return sum(1 for point in itertools.product(range(q), repeat=n)
               if all(tables.evaluate(terms, point) == 0 for terms in system))


# ---------------------------------------------------------------------------
# counter facade
# ---------------------------------------------------------------------------

class PointCounter:
    """Runs counting tasks through the cache, the fast engines and (optionally) the oracle"""

    def __init__(self, jobs: int = 1, cache: Optional[CountCache] = None, oracle_limit: int = ORACLE_LIMIT):
        if jobs < 1:
            raise CountTaskError("jobs must be at least 1")
        self.jobs = jobs
        self.cache = cache or CountCache()
        self.oracle_limit = oracle_limit

    def count(self, task: CountTask, engine: str = "fast") -> CountResult:
        if engine not in ("fast", "oracle"):
            raise CountTaskError(f"unknown engine {engine!r}")
        key = task.key()
        if engine == "fast":
            cached = self.cache.get(task)
            if cached is not None:
                return CountResult(key, task.spec.q, cached, 0.0, "cache")
        start = time.perf_counter()
        if engine == "fast":
            n = _fast(task, self.jobs)
        else:
            n = naive_oracle(task, self.oracle_limit)
        result = CountResult(key, task.spec.q, n, time.perf_counter() - start, engine)
        if engine == "fast":
            self.cache.put(task, result)
        logger.info("counted %r: N=%d (%s, %.2fs)", task, n, engine, result.elapsed)
        return result

    def compare(self, task: CountTask) -> Dict:
        """Fast engine against the oracle; `agree` is exact equality."""
        fast = self.count(task, "fast")
        oracle = self.count(task, "oracle")
        return {"q": task.spec.q, "fast": fast.N, "oracle": oracle.N, "agree": fast.N == oracle.N}


def count_summary_frame(rows: Sequence[Dict]) -> pd.DataFrame:
    """Tabulate count records (dicts with at least q and N) sorted by q."""
    frame = pd.DataFrame(list(rows))
    if frame.empty:
        return frame
    return frame.sort_values(by=[c for c in ("label", "q") if c in frame.columns]).reset_index(drop=True)


def weil_bound_ok(n: int, q: int, genus: int = 1) -> bool:
    """|N - (q + 1)| <= 2 g sqrt(q), checked in integers."""
    trace = q + 1 - n
    return trace * trace <= 4 * genus * genus * q


def legendre_counts(lam, p: int, degrees: Sequence[int] = (1, 2)) -> Dict[int, int]:
    """N over F_{p^k} for each requested k."""
    out = {}
    for k in degrees:
        spec = FieldSpec(p, k)
        out[k] = count_legendre_curve(lam, spec)
    return out
