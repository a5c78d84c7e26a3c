"""
Resolution Pipeline - LangGraph-based orchestration of the chart computations
Runs the local models, line blow-ups, graph blow-up and certificates at the
triple line of the octic family and reports every stage.
"""

import logging
import time
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, TypedDict

from pydantic import BaseModel, Field

try:
    from langgraph.graph import StateGraph, END
    LANGGRAPH_AVAILABLE = True
except ImportError:
    LANGGRAPH_AVAILABLE = False

from arrangement import (ArrangementError, FamilyArrangement, builtin_octic, incidence_signature,
                         instantiate, reduction_matches_special_fiber)
from elliptic import EllipticError
from finite_field import FieldError, FieldSpec
from multipoly import PolynomialError, PrimeField
from resolution import (RATIO_NAMES, EmptyBlowupError, ResolutionError, UnsupportedShapeError,
                        central_fiber, coordinate_ideal, dominates_line, graph_closure_blowup,
                        graph_generators, is_smooth, line_blowup_charts, local_models, locus_equals,
                        overlap_identity, pencil_pinch_points, pinch_point_j_check, pinch_quartic,
                        project_graph, ratio_chart_eliminated, singular_locus, transverse_discriminant,
                        verify_history)

logger = logging.getLogger(__name__)
if not logger.handlers:
    logging.basicConfig(level=logging.INFO)

FOCUS_PLANE = 2

STAGES = [
    "arrangement",
    "local_models",
    "line_blowups",
    "graph_blowup",
    "smoothness",
    "singular_line",
    "discriminant",
    "pinch_quartic",
    "semistable_metadata",
]


class PipelineState(TypedDict, total=False):
    """State that flows through the pipeline graph"""
    p: int
    t: Fraction
    family: FamilyArrangement
    sweep: bool
    special: bool
    planes: List
    models: List
    line_charts: Dict[str, tuple]
    ratio_charts: Dict[str, Dict[str, Any]]
    fibres: Dict[str, Any]
    chart_fibres: Dict[str, Any]
    line_charts_found: Dict[str, List[str]]
    discriminants: Dict[str, Any]
    pinch_points: List
    records: List[Dict]
    failed: Optional[str]


class StageRecord(BaseModel):
    name: str
    status: str = "pending"
    detail: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None
    elapsed: float = 0.0


class PipelineReport(BaseModel):
    """Structured result of one pipeline run; serialises to JSON for the CLI"""
    p: int
    t: str
    stages: List[StageRecord] = Field(default_factory=list)
    charts: Dict[str, str] = Field(default_factory=dict)
    singular_locus_gb: Dict[str, List[str]] = Field(default_factory=dict)
    charts_containing_L: Dict[str, List[str]] = Field(default_factory=dict)
    line_present: Optional[bool] = None
    discriminants: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    pinch_points: List[List[int]] = Field(default_factory=list)
    pinch_quartic: Optional[str] = None
    pinch_count: Optional[int] = None
    j: Optional[int] = None
    notes: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed_stage is None

    @property
    def failed_stage(self) -> Optional[str]:
        return next((s.name for s in self.stages if s.status == "fail"), None)


STAGE_ERRORS = (ResolutionError, PolynomialError, ArrangementError, EllipticError, FieldError)


class ResolutionPipeline:
    """
    Stage graph for the chart computations at the triple line:
    - builds the local model at each plane through the triple line
    - blows up the double line and the graph of the step-3 map
    - certifies smoothness over QQ and the singular line mod p
    - assembles the pinch points into a binary quartic and checks j
    """

    def __init__(self, family: Optional[FamilyArrangement] = None, sweep: bool = True):
        self.family = family or builtin_octic()
        self.sweep = sweep
        self.last_state: Optional[PipelineState] = None
        self.graph = self._build_graph()

    def _build_graph(self):
        if not LANGGRAPH_AVAILABLE:
            return None

        workflow = StateGraph(PipelineState)
        for name in STAGES:
            workflow.add_node(name, self._stage(name))
        workflow.set_entry_point(STAGES[0])
        for first, second in zip(STAGES, STAGES[1:]):
            workflow.add_edge(first, second)
        workflow.add_edge(STAGES[-1], END)
        return workflow.compile()

    def _stage(self, name: str) -> Callable[[PipelineState], PipelineState]:
        body = getattr(self, name)

        def node(state: PipelineState) -> PipelineState:
            record = StageRecord(name=name)
            if state.get("failed"):
                record.status = "skipped"
                state["records"].append(record.model_dump())
                return state
            start = time.perf_counter()
            logger.info("stage %s started (p=%s)", name, state["p"])
            try:
                record.detail = body(state) or {}
                reason = record.detail.pop("skip", None)
                if reason:
                    record.status, record.detail = "skipped", {"reason": reason}
                else:
                    record.status = "pass" if record.detail.pop("ok", True) else "fail"
                if record.status == "fail":
                    state["failed"] = name
            except STAGE_ERRORS as e:
                record.status = "fail"
                record.error = f"{type(e).__name__}: {e}"
                state["failed"] = name
                logger.error("stage %s failed: %s", name, e)
            record.elapsed = round(time.perf_counter() - start, 3)
            logger.info("stage %s finished: %s in %.2fs", name, record.status, record.elapsed)
            state["records"].append(record.model_dump())
            return state

        return node

    # ------------------------------------------------------------------ nodes

    def arrangement(self, state: PipelineState) -> Dict:
        p, t = state["p"], state["t"]
        planes = instantiate(state["family"], t)
        state["planes"] = planes
        sig = incidence_signature(planes)
        detail = {
            "line_census": {str(k): v for k, v in sorted(sig.line_census.items())},
            "triple_lines": len(sig.lines_of_multiplicity(3)),
        }
        special = PrimeField(p).convert(t) == 0
        state["special"] = special
        detail["reduces_to_t0"] = special
        if not special:
            detail["note"] = f"t = {t} is generic mod {p}: the singular line is not expected"
            detail["ok"] = detail["triple_lines"] == 1
            return detail
        reduction = reduction_matches_special_fiber(state["family"], p)
        detail["reduction_matches_t0"] = reduction["matches"]
        detail["ok"] = reduction["matches"] and detail["triple_lines"] == 1
        return detail

    def local_models(self, state: PipelineState) -> Dict:
        models = local_models(state["planes"], state["p"])
        if not state["sweep"]:
            models = [m for m in models if m.plane_index == FOCUS_PLANE]
        state["models"] = models
        return {m.label: {"pencil": list(m.pencil), "equation": m.chart.to_text()} for m in models}

    def line_blowups(self, state: PipelineState) -> Dict:
        p = state["p"]
        charts = {}
        detail = {"ok": True}
        for m in state["models"]:
            s_chart, e_chart = line_blowup_charts(m)
            charts[m.label] = (s_chart, e_chart)
            identities = verify_history(s_chart) + verify_history(e_chart)
            glued = overlap_identity(e_chart, s_chart, m.exceptional_variable, m.pencil_variable)
            detail[m.label] = {
                "charts": [s_chart.to_text(), e_chart.to_text()],
                "charts_mod_p": [central_fiber(c, p).to_text() for c in (s_chart, e_chart)],
                "strict_transform_identities": all(ok for _, ok in identities),
                "overlap_identity": glued,
            }
            detail["ok"] = detail["ok"] and glued and all(ok for _, ok in identities)
        state["line_charts"] = charts
        return detail

    def graph_blowup(self, state: PipelineState) -> Dict:
        ratio_charts: Dict[str, Dict[str, Any]] = {}
        detail = {"ok": True}
        for m in state["models"]:
            s_chart = state["line_charts"][m.label][0]
            try:
                generators = graph_generators(s_chart)
            except UnsupportedShapeError as e:
                detail[m.label] = {"map": None, "note": str(e)}
                detail["ok"] = detail["ok"] and not state["special"]
                continue
            charts, per_chart = {}, {}
            for i, ratio in enumerate(RATIO_NAMES):
                try:
                    [chart] = graph_closure_blowup(s_chart, generators, indices=[i])
                except EmptyBlowupError:
                    per_chart[ratio] = {"empty": True}
                    continue
                eliminated = ratio_chart_eliminated(s_chart, i, m.pencil_variable)
                hypersurface, graph_map = project_graph(chart, eliminated)
                charts[ratio] = hypersurface
                per_chart[ratio] = {
                    "graph": {v: q.to_text() for v, q in sorted(graph_map.items())},
                    "equation": hypersurface.to_text(),
                }
            ratio_charts[m.label] = charts
            detail[m.label] = {"map": [g.to_text() for g in generators], "charts": per_chart}
        state["ratio_charts"] = ratio_charts
        return detail

    def smoothness(self, state: PipelineState) -> Dict:
        detail = {"ok": True}
        for label, charts in state["ratio_charts"].items():
            smooth = {ratio: is_smooth(chart) for ratio, chart in charts.items()}
            detail[label] = smooth
            detail["ok"] = detail["ok"] and all(smooth.values())
        detail["scope"] = "chart-local: every ratio chart of the graph blow-up over each model"
        return detail

    def singular_line(self, state: PipelineState) -> Dict:
        p = state["p"]
        models = {m.label: m for m in state["models"]}
        fibres, chart_fibres, located = {}, {}, {}
        detail = {"ok": True}
        for label, charts in state["ratio_charts"].items():
            line_variable = models[label].pencil_variable
            per_chart = {}
            for ratio, chart in charts.items():
                fibre = central_fiber(chart, p)
                chart_fibres[f"{label}/{ratio}"] = fibre
                locus = singular_locus(fibre)
                entry = {"equation": fibre.to_text(), "gb": [g.to_text() for g in locus.generators],
                         "contains_L": dominates_line(locus, line_variable)}
                if entry["contains_L"]:
                    transverse = [v for v in fibre.variables if v != line_variable]
                    entry.update(locus_equals(locus, coordinate_ideal(fibre.variables, transverse, fibre.domain)))
                    fibres.setdefault(label, fibre)
                per_chart[ratio] = entry
            found = [ratio for ratio, entry in per_chart.items() if entry["contains_L"]]
            located[label] = found
            if state["special"]:
                ok = bool(found) and all(per_chart[r]["equal"] for r in found)
            else:
                ok = not found
            detail[label] = {"charts_containing_L": found, "equal": ok, "charts": per_chart,
                             "gb": per_chart[found[0]]["gb"] if found else []}
            detail["ok"] = detail["ok"] and ok
        state["fibres"] = fibres
        state["chart_fibres"] = chart_fibres
        state["line_charts_found"] = located
        return detail

    def discriminant(self, state: PipelineState) -> Dict:
        if not state["fibres"]:
            return {"skip": "the singular line is absent from every ratio chart"}
        p = state["p"]
        models = {m.label: m for m in state["models"]}
        discriminants, points = {}, []
        detail = {"ok": True}
        for label, fibre in state["fibres"].items():
            m = models[label]
            transverse = [v for v in fibre.variables if v != m.pencil_variable]
            disc = transverse_discriminant(fibre, m.pencil_variable, transverse)
            discriminants[label] = disc
            pinch = pencil_pinch_points(m, disc, p)
            points.extend(pinch)
            detail[label] = {**disc.to_dict(), "pencil_points": [list(pt) for pt in pinch]}
            detail["ok"] = detail["ok"] and disc.degree == 2 and disc.squarefree
        state["discriminants"] = discriminants
        state["pinch_points"] = sorted(set(points))
        return detail

    def pinch_quartic(self, state: PipelineState) -> Dict:
        if not state["fibres"]:
            return {"skip": "no pinch points without the singular line"}
        p = state["p"]
        points = state["pinch_points"]
        detail = {"pinch_points": [list(pt) for pt in points], "pinch_count": len(points)}
        if not state["sweep"]:
            detail["note"] = "single model: two pinch points, quartic not assembled"
            return detail
        quartic = pinch_quartic(points, p)
        detail["quartic"] = quartic.to_text()
        detail["degree"] = quartic.total_degree()
        j = pinch_point_j_check(quartic, p)
        detail["j"] = j
        detail["ok"] = len(points) == 4 and j == 1728 % p
        return detail

    def semistable_metadata(self, state: PipelineState) -> Dict:
        return {
            "derived_only": True,
            "special_fibre": "strict transform of the octic plus a P^2-bundle over L",
            "exceptional_multiplicity": 2,
            "base_change": "degree-2 ramified base change removes the multiplicity; not computed",
        }

    # ------------------------------------------------------------------ driver

    def run(self, p: int, t=None) -> PipelineReport:
        try:
            FieldSpec(p)
        except FieldError as e:
            raise ResolutionError(str(e), stage="config")
        t = Fraction(p if t is None else t)
        initial_state: PipelineState = {
            "p": p, "t": t, "family": self.family, "sweep": self.sweep,
            "records": [], "failed": None,
        }
        if self.graph is not None:
            result = self.graph.invoke(initial_state)
        else:
            # Fallback: run nodes sequentially
            state = initial_state
            for name in STAGES:
                state = self._stage(name)(state)
            result = state
        self.last_state = result
        return self._report(result)

    def _report(self, state: PipelineState) -> PipelineReport:
        report = PipelineReport(p=state["p"], t=str(state["t"]),
                                stages=[StageRecord(**r) for r in state["records"]])
        for m in state.get("models", []):
            report.charts[f"{m.label}/step1"] = m.chart.to_text()
            if m.label in state.get("line_charts", {}):
                s_chart, e_chart = state["line_charts"][m.label]
                report.charts[f"{m.label}/step2-{m.pencil_variable}"] = s_chart.to_text()
                report.charts[f"{m.label}/step2-{m.exceptional_variable}"] = e_chart.to_text()
            for ratio, chart in state.get("ratio_charts", {}).get(m.label, {}).items():
                report.charts[f"{m.label}/step3-{ratio}"] = chart.to_text()
            found = state.get("line_charts_found", {}).get(m.label)
            if found:
                report.charts[f"{m.label}/step3"] = state["ratio_charts"][m.label][found[0]].to_text()
        for label, record in ((r.name, r) for r in report.stages):
            if label == "singular_line" and record.status == "pass":
                report.singular_locus_gb = {k: v["gb"] for k, v in record.detail.items()
                                            if isinstance(v, dict) and v["gb"]}
                report.charts_containing_L = {k: v["charts_containing_L"] for k, v in record.detail.items()
                                              if isinstance(v, dict)}
                report.line_present = any(report.charts_containing_L.values())
            if label == "discriminant" and record.status == "pass":
                report.discriminants = {k: v for k, v in record.detail.items() if isinstance(v, dict)}
            if label == "pinch_quartic" and record.status == "pass":
                report.pinch_points = record.detail["pinch_points"]
                report.pinch_count = record.detail["pinch_count"]
                report.pinch_quartic = record.detail.get("quartic")
                report.j = record.detail.get("j")
        report.notes.append("smoothness is certified in every ratio chart of the graph blow-up; "
                            "the singular line is searched for in all of them")
        return report


def run_octic_pipeline(p: int, t=None, sweep: bool = True, strict: bool = True) -> PipelineReport:
    """
    Run the chart pipeline on the built-in octic family at parameter t (default p).

    With strict=True a failing stage raises ResolutionError carrying the stage label.
    """
    report = ResolutionPipeline(sweep=sweep).run(p, t)
    if strict and not report.ok:
        stage = report.failed_stage
        record = next(s for s in report.stages if s.name == stage)
        raise ResolutionError(record.error or "certificate failed", stage=stage)
    return report


run_paper_pipeline = run_octic_pipeline
