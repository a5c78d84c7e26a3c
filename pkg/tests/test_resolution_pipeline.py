import pytest

import resolution_pipeline
from counting import CountTask, PointCounter
from finite_field import FieldSpec
from resolution import ResolutionError, singular_locus, singular_points_bruteforce, variety_points
from resolution_pipeline import STAGES, ResolutionPipeline, run_octic_pipeline, run_paper_pipeline
from verification_checks import overlap_systems


@pytest.fixture(scope="module")
def swept():
    pipeline = ResolutionPipeline()
    return pipeline, pipeline.run(7)


@pytest.fixture(scope="module")
def full_report(swept):
    return swept[1]


def test_every_stage_passes(full_report):
    assert [s.name for s in full_report.stages] == STAGES
    assert full_report.ok
    assert full_report.failed_stage is None


def test_four_pinch_points_with_harmonic_j(full_report):
    assert full_report.pinch_count == 4
    assert full_report.j == 1728 % 7
    assert len(full_report.pinch_points) == 4
    assert all(len(pt) == 2 for pt in full_report.pinch_points)
    assert full_report.pinch_quartic is not None


def test_each_model_contributes_a_quadratic_discriminant(full_report):
    assert sorted(full_report.discriminants) == ["P1", "P2", "P3"]
    for detail in full_report.discriminants.values():
        assert detail["degree"] == 2
        assert detail["squarefree"]


def test_singular_line_is_the_ratio_axis(full_report):
    assert sorted(full_report.singular_locus_gb) == ["P1", "P2", "P3"]
    stage = next(s for s in full_report.stages if s.name == "singular_line")
    assert all(v["equal"] for k, v in stage.detail.items() if isinstance(v, dict))


def test_every_ratio_chart_is_searched(full_report):
    assert full_report.charts_containing_L == {"P1": ["T"], "P2": ["T"], "P3": ["T"]}
    assert full_report.line_present
    smoothness = next(s for s in full_report.stages if s.name == "smoothness")
    for label in ("P1", "P2", "P3"):
        assert smoothness.detail[label] == {"X": True, "Y": True, "Z": True, "T": True}


def test_groebner_locus_matches_enumeration_in_every_chart(swept):
    pipeline, _ = swept
    fibres = pipeline.last_state["chart_fibres"]
    assert len(fibres) == 12
    for label, fibre in fibres.items():
        assert variety_points(singular_locus(fibre).generators, 7) == singular_points_bruteforce(fibre, 7), label


def test_line_blowup_charts_agree_on_the_overlap(swept):
    pipeline, _ = swept
    counter = PointCounter()
    spec = FieldSpec(7)
    for m in pipeline.last_state["models"]:
        s_chart, e_chart = pipeline.last_state["line_charts"][m.label]
        systems = overlap_systems(e_chart, s_chart, m.exceptional_variable, m.pencil_variable)
        counts = [counter.count(CountTask("affine-zeros", spec, system)).N for system in systems]
        assert counts[0] == counts[1] > 0, m.label


def test_report_lists_the_charts(full_report):
    assert "P2/step1" in full_report.charts
    assert "P2/step3" in full_report.charts
    assert all(f"P2/step3-{ratio}" in full_report.charts for ratio in "XYZT")
    assert full_report.charts["P2/step3"] == full_report.charts["P2/step3-T"]
    assert full_report.model_dump_json()


def test_single_model_run():
    pipeline = ResolutionPipeline(sweep=False)
    report = pipeline.run(7)
    assert report.ok
    assert [m.label for m in pipeline.last_state["models"]] == ["P2"]
    assert report.pinch_count == 2
    assert report.pinch_quartic is None


def test_generic_fibre_has_no_singular_line():
    report = ResolutionPipeline(sweep=False).run(7, 5)
    assert report.ok
    assert not report.line_present
    statuses = {s.name: s.status for s in report.stages}
    assert statuses["arrangement"] == "pass"
    assert statuses["discriminant"] == statuses["pinch_quartic"] == "skipped"
    assert report.pinch_count is None
    arrangement = report.stages[0].detail
    assert arrangement["reduces_to_t0"] is False
    assert run_octic_pipeline(7, 5, sweep=False).ok


def test_paper_pipeline_name():
    assert run_paper_pipeline is run_octic_pipeline


def test_small_prime_is_refused():
    with pytest.raises(ResolutionError):
        ResolutionPipeline().run(5)


def test_sequential_fallback_matches_the_graph(monkeypatch):
    with_graph = ResolutionPipeline(sweep=False).run(7)
    monkeypatch.setattr(resolution_pipeline, "LANGGRAPH_AVAILABLE", False)
    pipeline = ResolutionPipeline(sweep=False)
    assert pipeline.graph is None
    fallback = pipeline.run(7)
    assert [(s.name, s.status) for s in fallback.stages] == [(s.name, s.status) for s in with_graph.stages]
    assert fallback.charts == with_graph.charts
    assert fallback.pinch_points == with_graph.pinch_points


@pytest.mark.slow
def test_pipeline_at_p11():
    report = run_octic_pipeline(11)
    assert report.pinch_count == 4
    assert report.j == 1728 % 11
