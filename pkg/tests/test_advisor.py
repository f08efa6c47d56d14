from __future__ import annotations

import pytest

from conftest import fixture_problem, load_fixture
from tierslicer.advisor import (
    Advice,
    AdviceKind,
    AdvisorConfig,
    advise,
    advise_function_moves,
    advise_replication,
    apply_advice,
    refine_loop,
    render_report,
    report_json,
)
from tierslicer.depgraph import build_pdg, placement_problem
from tierslicer.errors import TargetNotFoundError
from tierslicer.frontend import parse, resolve_calls
from tierslicer.model import Tier
from tierslicer.placement import Placement
from tierslicer.search import GaConfig


def tracker_setup():
    program = load_fixture("tracker.tjs")
    graph = build_pdg(program)
    problem = placement_problem(graph)
    placement = Placement(fixed=dict(problem.fixed), searched={})
    return program, graph, placement


def test_tracker_advice_matches_manifest(manifest):
    program, graph, placement = tracker_setup()
    advices = advise(graph, placement, program)
    expected = manifest["tracker.tjs"]["advice"]
    assert [a.target for a in advices if a.kind is AdviceKind.REPLICATE_DECLARATION] == expected["replicate"]
    assert [a.target for a in advices if a.kind is AdviceKind.MOVE_FUNCTION] == expected["move"]


def test_replication_advice_lists_dependent_functions():
    program, graph, placement = tracker_setup()
    advices = advise_replication(graph, placement, program)
    by_target = {a.target: a for a in advices}
    assert "getMeetings" in by_target["meetings"].dependent_functions
    assert "getTasks" in by_target["tasks"].dependent_functions


def test_move_advice_carries_incoming_counts():
    program, graph, placement = tracker_setup()
    advices = advise_function_moves(graph, placement, program)
    counts = {a.target: (a.local_incoming, a.remote_incoming) for a in advices}
    assert counts["getMeetings"] == (0, 4)
    assert counts["getTasks"] == (0, 3)
    assert counts["addMeeting"] == (1, 0) or counts["addMeeting"] == (0, 1)


def test_move_threshold_arithmetic():
    # one local and four remote incoming calls: (4 - 1) / (4 + 1) = 0.6
    src = (
        "/* @config hub : server, ui : client */\n"
        "/* @slice hub */\n{\n"
        "  function work(x) { return x; }\n"
        "  function seed() { work(0); }\n"
        "}\n"
        "/* @slice ui */\n{\n"
        "  function a() { work(1); }\n"
        "  function b() { work(2); }\n"
        "  function c() { work(3); }\n"
        "  function d() { work(4); }\n"
        "}\n"
    )
    program = resolve_calls(parse(src))
    graph = build_pdg(program)
    placement = Placement(fixed={"hub": Tier.SERVER, "ui": Tier.CLIENT}, searched={})
    below = advise_function_moves(graph, placement, program, AdvisorConfig(move_threshold=0.2))
    assert [a.target for a in below] == ["work"]
    above = advise_function_moves(graph, placement, program, AdvisorConfig(move_threshold=0.7))
    assert above == []


def test_replicated_vars_get_no_replication_advice():
    program = load_fixture("unicorn_v3.tjs")
    graph = build_pdg(program)
    problem = placement_problem(graph)
    placement = Placement(fixed=dict(problem.fixed),
                          searched={s: Tier.CLIENT for s in problem.unplaced})
    assert advise_replication(graph, placement, program) == []


def test_advisor_config_validation():
    with pytest.raises(ValueError):
        AdvisorConfig(move_threshold=1.0)
    with pytest.raises(ValueError):
        AdvisorConfig(move_threshold=-0.1)


def test_apply_advice_grows_one_slice_per_move(manifest):
    program, graph, placement = tracker_setup()
    moves = advise_function_moves(graph, placement, program)
    refined = apply_advice(program, moves)
    assert len(refined.slices) == len(program.slices) + len(moves)
    new_names = [s.name for s in refined.slices if s.name.startswith("auto_")]
    assert new_names == [f"auto_{a.target}" for a in moves]
    # the moved functions left the data slice
    data = next(s for s in refined.slices if s.name == "data")
    assert all(getattr(st, "name", None) not in manifest["tracker.tjs"]["advice"]["move"]
               for st in data.body)


def test_apply_advice_marks_declarations_replicated():
    program, graph, placement = tracker_setup()
    replicate = advise_replication(graph, placement, program)
    refined = apply_advice(program, replicate)
    data = next(s for s in refined.slices if s.name == "data")
    from tierslicer.syntax import AnnotationKind, VarDecl

    flagged = [st.name for st in data.body if isinstance(st, VarDecl)
               and any(a.kind is AnnotationKind.REPLICATED for a in st.annotations)]
    assert flagged == ["meetings", "tasks"]
    # applying the same advice twice must not stack annotations
    again = apply_advice(refined, replicate)
    data2 = next(s for s in again.slices if s.name == "data")
    meetings = next(st for st in data2.body if getattr(st, "name", None) == "meetings")
    assert sum(a.kind is AnnotationKind.REPLICATED for a in meetings.annotations) == 1


def test_apply_advice_leaves_the_input_program_untouched():
    program, graph, placement = tracker_setup()
    before = len(program.slices)
    apply_advice(program, advise(graph, placement, program))
    assert len(program.slices) == before


def test_fresh_slice_names_avoid_collisions():
    src = (
        "/* @config data : server, ui : client */\n"
        "/* @slice data */\n{ function hot(x) { return x; } }\n"
        "/* @slice auto_hot */\n{ var filler = 1; }\n"
        "/* @slice ui */\n{ function go() { hot(1); hot(2); } }\n"
    )
    program = resolve_calls(parse(src))
    advice = Advice(AdviceKind.MOVE_FUNCTION, "hot", "data", 0, 2)
    refined = apply_advice(program, [advice])
    assert "auto_hot_2" in [s.name for s in refined.slices]


def test_apply_advice_unknown_target_raises():
    program, _, _ = tracker_setup()
    with pytest.raises(TargetNotFoundError):
        apply_advice(program, [Advice(AdviceKind.MOVE_FUNCTION, "nope", "data")])


def test_refine_loop_stops_immediately_at_perfect_fitness():
    result = refine_loop(load_fixture("unicorn_v6.tjs"), GaConfig(rng_seed=0))
    assert result.fitness == 1.0 and result.valid
    assert result.iterations == 0
    assert len(result.program.slices) == 6


def test_refine_loop_improves_the_tracker():
    result = refine_loop(load_fixture("tracker.tjs"), GaConfig(rng_seed=0), max_iterations=3)
    assert result.fitness > 0.1
    assert result.iterations >= 1
    assert len(result.program.slices) > 2
    assert result.fitness_history[0] == pytest.approx(0.1)
    assert result.fitness_history[-1] == pytest.approx(result.fitness)


def test_render_report_golden_bytes(manifest):
    program, graph, placement = tracker_setup()
    problem = placement_problem(graph)
    from tierslicer.fitness import evaluate

    fitness = evaluate(problem, placement).program
    advices = advise(graph, placement, program)
    assert render_report(fitness, advices) == manifest["tracker.tjs"]["report"]


def test_render_report_omits_empty_sections():
    assert render_report(1.0, []) == "Application level of offline availability: 100 %\n"


def test_report_json_shape():
    program, graph, placement = tracker_setup()
    advices = advise(graph, placement, program)
    payload = report_json(0.1, advices)
    assert payload["offlinePercent"] == 10
    assert [r["name"] for r in payload["replicate"]] == ["meetings", "tasks"]
    assert [m["name"] for m in payload["move"]] == [
        "getMeetings", "getTasks", "addMeeting", "addTask"
    ]
    assert payload["move"][0]["remoteIncoming"] == 4
