"""Differential harness: PRNG, reference agreement, campaigns,
bug injection, conformance."""

import json

from govtree.directives import (
    DEFAULT_CAPABILITY_TREE,
    ExecCommand,
    TrustLevel,
)
from govtree.harness import (
    BugMode,
    CampaignConfig,
    PROPERTY_NAMES,
    Xorshift64Star,
    case_seed,
    conformance_suite,
    first_disagreement,
    gen_declared,
    gen_directive,
    gen_state,
    replay_case,
    reference_interp,
    run_campaign,
    target_tree_for,
)
from govtree.interpreter import StepDenied, StepOk, interp_directive


def test_prng_is_stable():
    # frozen first outputs; a change here breaks campaign replay
    rng = Xorshift64Star(42)
    assert [rng.next_u64() for _ in range(3)] == [
        3580622183945639842,
        10378725325292465923,
        8967075514996744559,
    ]
    assert Xorshift64Star(42).next_u64() == 3580622183945639842


def test_case_seed_is_pure():
    assert case_seed(42, 0, 188) == case_seed(42, 0, 188)
    assert case_seed(42, 0, 188) != case_seed(42, 1, 188)
    assert case_seed(42, 0, 188) != case_seed(43, 0, 188)


def test_generators_are_deterministic():
    a = [gen_directive(Xorshift64Star(case_seed(7, 0, i))) for i in range(20)]
    b = [gen_directive(Xorshift64Star(case_seed(7, 0, i))) for i in range(20)]
    assert a == b


def test_declared_sets_are_antichains():
    rng = Xorshift64Star(81)
    for _ in range(200):
        declared = gen_declared(rng)
        for p in declared:
            assert DEFAULT_CAPABILITY_TREE.has(p)
            for q in declared:
                if p != q:
                    assert not q.startswith(p + ".")


def test_reference_agrees_with_target():
    rng = Xorshift64Star(82)
    for _ in range(3000):
        s = gen_state(rng)
        d = gen_directive(rng)
        a = interp_directive(s, d)
        b = reference_interp(s, d)
        assert type(a) is type(b)
        if isinstance(a, StepOk):
            assert a.state.prev_hash == b.state.prev_hash
        else:
            assert a.reason == b.reason


def test_clean_campaign_has_zero_disagreements():
    report = run_campaign(CampaignConfig(seed=11, runs_per_property=400))
    assert report.disagreements() == []
    assert set(report.properties) == set(PROPERTY_NAMES)
    for rec in report.properties.values():
        assert rec["runs"] == 400


def test_campaign_reports_are_reproducible_bytes():
    a = run_campaign(CampaignConfig(seed=9, runs_per_property=200)).to_json()
    b = run_campaign(CampaignConfig(seed=9, runs_per_property=200)).to_json()
    assert a == b


def test_zero_runs_is_empty_and_clean():
    report = run_campaign(CampaignConfig(seed=1, runs_per_property=0))
    assert report.disagreements() == []


def test_injected_bug_is_detected():
    idx = first_disagreement(42, BugMode.MISSING_EXEC_NODE)
    assert idx is not None
    dis = replay_case(42, "trust_ceiling_agreement", idx, BugMode.MISSING_EXEC_NODE)
    assert dis is not None
    # the disagreement is the taxonomy hole: an exec directive the
    # trust tables allow but the pruned tree cannot expand
    assert dis.input["directive"]["type"] == "ExecCommand"
    assert dis.reference.startswith("ok")
    assert dis.target == "denied:capability_not_declared"
    # the clean tree replays clean
    assert replay_case(42, "trust_ceiling_agreement", idx, None) is None


def test_injection_only_touches_target_tree():
    buggy = target_tree_for(BugMode.MISSING_EXEC_NODE)
    assert not buggy.has("compute.exec")
    assert DEFAULT_CAPABILITY_TREE.has("compute.exec")
    # reference still grants exec through the default tree
    s = gen_state(Xorshift64Star(1))
    from dataclasses import replace

    s = replace(
        s, trust=TrustLevel.TESTED, declared=frozenset({"compute"})
    )
    assert isinstance(reference_interp(s, ExecCommand("x")), StepOk)
    assert isinstance(
        interp_directive(replace(s, tree=buggy), ExecCommand("x")), StepDenied
    )


def test_campaign_with_bug_reports_failures():
    cfg = CampaignConfig(
        seed=42, runs_per_property=600, injected_bug=BugMode.MISSING_EXEC_NODE
    )
    report = run_campaign(cfg)
    assert len(report.disagreements()) > 0
    obj = json.loads(report.to_json())
    assert obj["injected_bug"] == "missing-exec-node"
    assert obj["prng"]["algorithm"] == "xorshift64*"


def test_conformance_suite_passes_and_is_order_independent():
    a = conformance_suite()
    assert a.passed, [r.name for r in a.results if not r.passed]
    assert len(a.results) >= 24
    b = conformance_suite()
    assert [(r.name, r.passed) for r in a.results] == [
        (r.name, r.passed) for r in b.results
    ]
