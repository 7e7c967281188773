"""Governance operator: pipeline shape, denial semantics, traces."""

import json

from govtree.directives import (
    CallMachine,
    GovernanceStage,
    HTTPRequest,
    Introspect,
    LLMCall,
    RecordStep,
    STAGE_WIRE_NAMES,
    TrustLevel,
)
from govtree.governance import (
    GovernancePolicy,
    PolicyAnswerer,
    ScriptedAnswerer,
    echo_handler,
    gov,
    interp,
    interp_governed,
    run_governed,
    run_tree,
    run_ungoverned,
)
from govtree.harness import (
    Xorshift64Star,
    gen_kont,
    gen_policy,
    gen_program,
    gen_tree,
    trace_pipeline_ok,
)
from govtree.itree import (
    EuttVerdict,
    bind,
    eutt_fuel,
    observe,
    ret,
    sequence_program,
    spin,
    trigger,
)

SYSTEM = GovernancePolicy(trust=TrustLevel.SYSTEM)


def stages_of(trace):
    return [e[1].stage for e in trace.entries if e[0] == "gov"]


def test_allowed_directive_trace_shape():
    gh = gov(echo_handler, SYSTEM)
    res = run_governed(gh, trigger(HTTPRequest("example", "x")))
    assert res.status == "done"
    kinds = [e[0] for e in res.trace.entries]
    assert kinds == ["gov"] * 4 + ["io"] + ["gov"] * 3
    assert stages_of(res.trace) == list(GovernanceStage)
    assert res.value == b"http:example"


def test_denied_directive_is_spin_after_failing_gate():
    env = ScriptedAnswerer({GovernanceStage.PERMISSION_CHECK: False})
    gh = gov(echo_handler, SYSTEM)
    res = run_governed(gh, trigger(HTTPRequest("e", "b")), env=env)
    assert res.denied
    assert res.denied_stage is GovernanceStage.PERMISSION_CHECK
    assert len(res.trace.entries) == 2  # TrustCheck, PermissionCheck, then silence
    assert len(res.trace.io_entries()) == 0
    # the tree itself: k(False) at the failing gate is the divergent loop
    t = interp(gh, trigger(HTTPRequest("e", "b")))
    n = observe(t)
    n = observe(n.k(True))  # past TrustCheck
    denied = n.k(False)
    assert denied is spin()


def test_observability_directive_runs_pipeline_without_io():
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.UNTRUSTED))
    res = run_governed(gh, trigger(RecordStep("tag")))
    assert res.status == "done" and res.value == ()
    assert len(res.trace.io_entries()) == 0
    assert stages_of(res.trace) == list(GovernanceStage)


def test_interp_passes_ret_and_tau_through():
    gh = gov(echo_handler, SYSTEM)
    assert eutt_fuel(interp(gh, ret(9)), ret(9), 10) is EuttVerdict.EQUAL
    from govtree.itree import Tau

    assert eutt_fuel(interp(gh, Tau(ret(9))), ret(9), 10) is EuttVerdict.EQUAL


def test_interp_distributes_over_bind():
    # governed trees keep their denied branches as silent loops, so a
    # probe-everything comparison can refute but rarely terminates with
    # a full EQUAL; the law is checked as zero refutations, plus exact
    # EQUAL on gate-free instances
    rng = Xorshift64Star(21)
    gh = gov(echo_handler, SYSTEM)
    for _ in range(100):
        t = gen_tree(rng, 2)
        k = gen_kont(rng, 1)
        lhs = interp(gh, bind(t, k))
        rhs = bind(interp(gh, t), lambda x: interp(gh, k(x)))
        assert eutt_fuel(lhs, rhs, 50_000) is not EuttVerdict.DISTINCT


def test_interp_distributes_over_bind_exactly_on_pure_trees():
    from govtree.itree import Tau

    gh = gov(echo_handler, SYSTEM)
    for t in (ret(3), Tau(ret(4)), Tau(Tau(ret(5)))):
        k = lambda v: Tau(ret(v * 2))
        lhs = interp(gh, bind(t, k))
        rhs = bind(interp(gh, t), lambda x: interp(gh, k(x)))
        assert eutt_fuel(lhs, rhs, 1000) is EuttVerdict.EQUAL


def test_pipeline_shape_holds_across_composition_tower():
    # a level-2 machine built from a level-1 machine built from level-0
    # programs has the same type, and every directive at every depth
    # goes through the full pipeline
    rng = Xorshift64Star(22)
    level0 = gen_program(rng, 4)
    level1 = bind(level0, lambda _: trigger(CallMachine("worker", "a")))
    level2 = bind(level1, lambda _: trigger(Introspect("worker")))
    gh = gov(echo_handler, SYSTEM)
    res = run_governed(gh, level2)
    assert res.status == "done"
    assert trace_pipeline_ok(res.trace)


def test_governed_handler_standalone_tree_ends_in_ret():
    gh = gov(echo_handler, SYSTEM)
    t = gh(LLMCall("hello"))
    res = run_tree(t, gh.answerer())
    assert res.status == "done"
    assert res.value == b"re:hello"
    assert stages_of(res.trace) == list(GovernanceStage)


def test_post_stage_false_is_recorded_but_does_not_retract():
    env = ScriptedAnswerer({GovernanceStage.GUARDRAILS: False})
    gh = gov(echo_handler, SYSTEM)
    res = run_governed(gh, trigger(HTTPRequest("e", "b")), env=env)
    assert res.status == "done"  # io already happened; post stages cannot deny
    assert len(res.trace.io_entries()) == 1
    assert stages_of(res.trace) == list(GovernanceStage)


def test_phase_and_prehook_flags_gate():
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM, phase_ok=False))
    res = run_governed(gh, trigger(LLMCall("x")))
    assert res.denied and res.denied_stage is GovernanceStage.PHASE_VALIDATION
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM, prehooks_ok=False))
    res = run_governed(gh, trigger(LLMCall("x")))
    assert res.denied and res.denied_stage is GovernanceStage.PRE_HOOKS


def test_divergent_program_reports_divergence():
    gh = gov(echo_handler, SYSTEM)
    res = run_governed(gh, spin(), fuel=1000)
    assert res.status == "diverged"


def test_fuel_exhaustion_reports_truncation():
    gh = gov(echo_handler, SYSTEM)
    prog = sequence_program([LLMCall(str(i)) for i in range(100)])
    res = run_governed(gh, prog, fuel=17)
    assert res.status == "exhausted"
    assert res.fuel_spent == 17


def test_trace_jsonl_format():
    gh = gov(echo_handler, SYSTEM)
    res = run_governed(gh, trigger(HTTPRequest("example", "x")))
    lines = [json.loads(l) for l in res.trace.to_jsonl().splitlines()]
    assert lines[0] == {"kind": "gov", "stage": "TrustCheck", "directive_index": 0}
    io_line = lines[4]
    assert io_line["kind"] == "io" and io_line["directive_index"] == 0
    assert io_line["event"]["type"] == "IoHttp"
    assert [l["stage"] for l in lines if l["kind"] == "gov"] == [
        STAGE_WIRE_NAMES[s] for s in GovernanceStage
    ]


def test_interp_governed_returns_tree_and_trace():
    gh = gov(echo_handler, SYSTEM)
    tree, res = interp_governed(gh, trigger(RecordStep("t")))
    assert res.status == "done"
    from govtree.safety import gov_safe_check

    assert not gov_safe_check(False, tree, 1000).is_unsafe


def test_fused_and_materialized_walkers_agree():
    rng = Xorshift64Star(23)
    for _ in range(300):
        prog = gen_program(rng, 6)
        gh = gov(echo_handler, gen_policy(rng))
        fuel = rng.randrange(150)
        a = run_governed(gh, prog, fuel=fuel)
        b = run_tree(interp(gh, prog), gh.answerer(), fuel=fuel)
        assert (a.status, a.value, a.denied_stage, a.directive_index, a.fuel_spent) == (
            b.status, b.value, b.denied_stage, b.directive_index, b.fuel_spent
        )
        assert a.trace.entries == b.trace.entries


def test_ungoverned_run_records_only_io():
    prog = sequence_program([HTTPRequest("u", "b"), RecordStep("t")])
    res = run_ungoverned(prog)
    assert res.status == "done"
    assert [e[0] for e in res.trace.entries] == ["io"]


def test_policy_answerer_matches_gate_answers():
    rng = Xorshift64Star(24)
    from govtree.directives import PRE_GATE_EVENTS
    from govtree.harness import gen_directive

    for _ in range(200):
        env = PolicyAnswerer(gen_policy(rng))
        d = gen_directive(rng)
        tup = env.gate_answers(d)
        assert tup == tuple(env.answer_stage(ge, d) for ge in PRE_GATE_EVENTS)


def test_pipeline_fuel_cost_is_pinned():
    # one allowed effectful directive: 4 pre gates + 1 io + 3 post
    # gates + 1 silent step + the final Ret = 10 inspections; an
    # observability directive skips the io node
    gh = gov(echo_handler, SYSTEM)
    assert run_governed(gh, trigger(HTTPRequest("u", "b"))).fuel_spent == 10
    assert run_governed(gh, trigger(RecordStep("t"))).fuel_spent == 9
    two = sequence_program([HTTPRequest("u", "b"), RecordStep("t")])
    assert run_governed(gh, two).fuel_spent == 18
