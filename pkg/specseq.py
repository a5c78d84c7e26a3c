"""
Weight Spectral Sequence Ledger
Dimension bookkeeping for the E1 page of a two-component normal-crossing degeneration
"""

import itertools
import json
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

logger = logging.getLogger(__name__)

Position = Tuple[int, int]
Assignment = Dict[str, int]

UNKNOWN_BOUND = 4
SEARCH_LIMIT = 10 ** 6


class SpecSeqError(Exception):
    """Base error for the ledger"""


class StrataDataError(SpecSeqError):
    """Betti tables that do not fit together"""


class InconsistentLedgerError(SpecSeqError):
    """Ranks that make an E2 entry negative"""


def _sum(values: Sequence[Optional[int]]) -> Optional[int]:
    if any(v is None for v in values):
        return None
    return sum(values)


class BettiTable:
    """Betti numbers b_0..b_2d of a stratum; None marks an unknown value"""

    def __init__(self, dims: Sequence[Optional[int]], label: str = "", smooth: bool = True):
        dims = [None if d is None else int(d) for d in dims]
        if not dims or len(dims) % 2 == 0:
            raise StrataDataError(f"{label or 'stratum'}: need b_0..b_2d, got {len(dims)} numbers")
        if any(d is not None and d < 0 for d in dims):
            raise StrataDataError(f"{label}: Betti numbers are non-negative")
        if dims[0] is not None and dims[0] < 1:
            raise StrataDataError(f"{label}: a nonempty stratum has b_0 >= 1")
        if smooth:
            n = len(dims) - 1
            for i, d in enumerate(dims):
                mirror = dims[n - i]
                if d is not None and mirror is not None and d != mirror:
                    raise StrataDataError(f"{label}: b_{i} = {d} but b_{n - i} = {mirror}")
        self.dims = dims
        self.label = label
        self.smooth = smooth

    @property
    def dimension(self) -> int:
        return (len(self.dims) - 1) // 2

    def b(self, i: int) -> Optional[int]:
        if 0 <= i < len(self.dims):
            return self.dims[i]
        return 0

    def __repr__(self):
        shown = ", ".join("?" if d is None else str(d) for d in self.dims)
        return f"BettiTable({self.label}: {shown})"


class StrataData:
    """
    Strata of the special fibre: components (disjoint union Z(1)) and their
    pairwise intersections (Z(2)); triple intersections are empty.
    """

    def __init__(self, components: Sequence[BettiTable], intersections: Sequence[BettiTable] = ()):
        if not components:
            raise StrataDataError("at least one component is needed")
        d = components[0].dimension
        if any(c.dimension != d for c in components):
            raise StrataDataError("components have different dimensions")
        if any(c.dimension != d - 1 for c in intersections):
            raise StrataDataError(f"intersections must have dimension {d - 1}")
        self.components = list(components)
        self.intersections = list(intersections)
        self.dimension = d

    def stratum(self, m: int) -> List[BettiTable]:
        if m == 1:
            return self.components
        if m == 2:
            return self.intersections
        return []

    def __repr__(self):
        return f"StrataData({self.components}, {self.intersections})"


def octic_strata() -> StrataData:
    """
    Rigid component R, the P^1-fibred component Q over the singular line and
    their intersection C, a conic bundle over P^1; b_2 and b_4 stay unknown.
    """
    r = BettiTable([1, 0, None, 2, None, 0, 1], "R")
    q = BettiTable([1, 0, None, 2, None, 0, 1], "Q")
    c = BettiTable([1, 0, None, 0, 1], "C")
    return StrataData([r, q], [c])


def strata_from_json(source: Union[str, Dict]) -> StrataData:
    """
    {"components": {"R": [...], "Q": [...]}, "intersection": {"C": [...]}};
    null entries are unknown Betti numbers.
    """
    data = json.loads(source) if isinstance(source, str) else source
    if not isinstance(data, dict) or "components" not in data:
        raise StrataDataError("strata JSON needs a 'components' object")
    try:
        components = [BettiTable(v, k) for k, v in data["components"].items()]
        intersections = [BettiTable(v, k) for k, v in data.get("intersection", {}).items()]
    except (AttributeError, TypeError, ValueError) as e:
        raise StrataDataError(f"malformed strata JSON: {e}")
    return StrataData(components, intersections)


class E1Page:
    """Entries E1^{p,q} (dimensions, None if unknown) with Tate-twist annotations"""

    def __init__(self, entries: Dict[Position, Optional[int]], twists: Dict[Position, List[str]]):
        self.entries = entries
        self.twists = twists

    def dim(self, pos: Position) -> Optional[int]:
        return self.entries.get(pos, 0)

    def positions(self) -> List[Position]:
        return sorted(self.entries)

    def differentials(self) -> List[Position]:
        """Sources (p, q) of d1: E1^{p,q} -> E1^{p+1,q} between two nonzero slots."""
        return [pos for pos in self.positions() if (pos[0] + 1, pos[1]) in self.entries]

    def antidiagonal(self, h: int) -> List[Position]:
        return [pos for pos in self.positions() if pos[0] + pos[1] == h]

    def to_frame(self) -> pd.DataFrame:
        """Rows q (top down), columns p; unknown entries show as '?'."""
        ps = sorted({p for p, _ in self.entries})
        qs = sorted({q for _, q in self.entries}, reverse=True)
        rows = {q: ["?" if self.entries.get((p, q), 0) is None else self.entries.get((p, q), 0) for p in ps]
                for q in qs}
        frame = pd.DataFrame.from_dict(rows, orient="index", columns=ps)
        frame.index.name = "q"
        frame.columns.name = "p"
        return frame

    def __repr__(self):
        return f"E1Page({len(self.entries)} entries)"


def build_E1(strata: StrataData, h_max: Optional[int] = None) -> E1Page:
    """
    E1^{-k,h+k} = sum over j >= max(-k, 0) of H^{h-2j-k}(Z(2j+k+1))(-j-k),
    evaluated directly for total degrees h = 0..h_max.
    """
    if h_max is None:
        h_max = 2 * strata.dimension
    entries: Dict[Position, Optional[int]] = {}
    twists: Dict[Position, List[str]] = {}
    for h in range(h_max + 1):
        for k in range(-h_max - 2, h_max + 3):
            pieces, labels = [], []
            for j in range(max(-k, 0), h_max + 3):
                m = 2 * j + k + 1
                degree = h - 2 * j - k
                tables = strata.stratum(m)
                if not tables or degree < 0 or degree > 2 * tables[0].dimension:
                    continue
                pieces.append(_sum([t.b(degree) for t in tables]))
                labels.append(f"H^{degree}(Z{m})({-j - k})")
            if pieces:
                pos = (-k, h + k)
                entries[pos] = _sum(pieces)
                twists[pos] = labels
    logger.debug("E1 page with %d slots up to h = %d", len(entries), h_max)
    return E1Page(entries, twists)


def _rank_label(pos: Position) -> str:
    return f"d({pos[0]},{pos[1]})"


def _unknown_label(pos: Position) -> str:
    return f"e({pos[0]},{pos[1]})"


def _determined(page: E1Page, pos: Position) -> bool:
    """E2 at pos follows from ranks alone: the slot and both neighbours have known dimension."""
    p, q = pos
    return all(page.entries.get(n, 0) is not None for n in ((p - 1, q), pos, (p + 1, q)))


def e2_entry(page: E1Page, pos: Position, assignment: Assignment) -> Optional[int]:
    """dim - rank(in) - rank(out), or the unresolved contribution e(p,q) when supplied."""
    if not _determined(page, pos):
        return assignment.get(_unknown_label(pos))
    p, q = pos
    r_in = assignment.get(_rank_label((p - 1, q)), 0) if (p - 1, q) in page.entries else 0
    r_out = assignment.get(_rank_label(pos), 0) if (p + 1, q) in page.entries else 0
    value = page.dim(pos) - r_in - r_out
    if value < 0:
        raise InconsistentLedgerError(f"E2{pos} = {value} < 0 under ranks in={r_in}, out={r_out}")
    return value


def abutment_dims(page: E1Page, assignment: Optional[Assignment] = None) -> Dict[int, Optional[int]]:
    """dim H^h = sum of E2 over the antidiagonal p + q = h (degeneration at E2)."""
    assignment = assignment or {}
    for label, r in assignment.items():
        if r < 0:
            raise InconsistentLedgerError(f"{label} = {r} is negative")
    out: Dict[int, Optional[int]] = {}
    for h in sorted({p + q for p, q in page.entries}):
        if h < 0:
            continue
        out[h] = _sum([e2_entry(page, pos, assignment) for pos in page.antidiagonal(h)])
    return out


def e2_frame(page: E1Page, assignment: Optional[Assignment] = None) -> pd.DataFrame:
    assignment = assignment or {}
    values = {pos: e2_entry(page, pos, assignment) for pos in page.positions()}
    return E1Page(values, page.twists).to_frame()


def euler_characteristic(dims: Dict[Position, Optional[int]]) -> Optional[int]:
    return _sum([(-1) ** ((p + q) % 2) * d if d is not None else None for (p, q), d in dims.items()])


class SearchResult:
    def __init__(self, assignments: List[Assignment], variables: List[str], targets: Dict[int, int]):
        self.assignments = assignments
        self.variables = variables
        self.targets = targets

    @property
    def satisfiable(self) -> bool:
        return bool(self.assignments)

    @property
    def status(self) -> str:
        if not self.satisfiable:
            return "constraints unsatisfiable"
        return "unique" if len(self.assignments) == 1 else f"{len(self.assignments)} assignments"

    def to_dict(self) -> Dict:
        return {"targets": {str(h): v for h, v in sorted(self.targets.items())},
                "variables": self.variables, "status": self.status, "assignments": self.assignments}

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)


def consistency_search(page: E1Page, targets: Optional[Dict[int, int]] = None,
                       monodromy_symmetry: bool = True,
                       unknown_bound: int = UNKNOWN_BOUND) -> SearchResult:
    """
    All rank assignments whose abutment meets the targets {h: dim H^h}.

    With targets, only the differentials touching the targeted antidiagonals
    are searched; slots whose E2 is not fixed by known dimensions become
    unresolved contributions e(p,q) in [0, bound]. Monodromy symmetry pairs
    E2^{-r,q+r} with E2^{r,q-r} and is on unless switched off; pairs with an
    unresolved side are not compared.
    """
    targets = dict(targets or {})
    if targets:
        slots = [pos for h in targets for pos in page.antidiagonal(h)]
    else:
        slots = page.positions()
    rank_vars: Dict[str, range] = {}
    unknown_vars: Dict[str, range] = {}
    for pos in slots:
        p, q = pos
        if not _determined(page, pos):
            if targets:
                bound = page.dim(pos) if page.dim(pos) is not None else unknown_bound
                unknown_vars[_unknown_label(pos)] = range(bound + 1)
            continue
        for src in ((p - 1, q), pos):
            tgt = (src[0] + 1, src[1])
            if src in page.entries and tgt in page.entries:
                rank_vars[_rank_label(src)] = range(min(page.dim(src), page.dim(tgt)) + 1)
    variables = sorted(rank_vars) + sorted(unknown_vars)
    domains = {**rank_vars, **unknown_vars}
    ranges = [domains[v] for v in variables]
    size = 1
    for r in ranges:
        size *= len(r)
    if size > SEARCH_LIMIT:
        raise SpecSeqError(f"search space of {size} assignments is too large")

    pairs = []
    if monodromy_symmetry:
        for p, q in slots:
            if p < 0 and (-p, q + 2 * p) in page.entries:
                pairs.append(((p, q), (-p, q + 2 * p)))

    found: List[Assignment] = []
    for values in itertools.product(*ranges):
        assignment = dict(zip(variables, values))
        try:
            values_e2 = {pos: e2_entry(page, pos, assignment) for pos in slots}
        except InconsistentLedgerError:
            continue
        if targets:
            if any(v is None for v in values_e2.values()):
                continue
            totals = {h: sum(values_e2[pos] for pos in page.antidiagonal(h)) for h in targets}
            if totals != targets:
                continue
        if any(values_e2[a] is not None and values_e2[b] is not None and values_e2[a] != values_e2[b]
               for a, b in pairs):
            continue
        found.append(assignment)
    logger.debug("consistency search over %d assignments: %d found", size, len(found))
    return SearchResult(found, variables, targets)
