"""The fuel-bounded safety checker."""

from govtree.directives import (
    GovCheckEvent,
    GovernanceStage,
    IoExec,
    IoHttp,
    TrustLevel,
)
from govtree.governance import GovernancePolicy, echo_handler, gov, interp
from govtree.harness import Xorshift64Star, gen_policy, gen_program
from govtree.itree import Ret, Tau, Vis, bind, ret, spin, trigger
from govtree.safety import Verdict, gov_safe_check, upward_closure_check


def bare_io(ev=None):
    return Vis(ev or IoHttp("u", "b"), Ret)


def test_bare_io_is_unsafe_under_false_flag():
    for fuel in (1, 10, 100_000):
        v = gov_safe_check(False, bare_io(), fuel)
        assert v.verdict is Verdict.UNSAFE
        assert v.offending_event == IoHttp("u", "b")


def test_io_is_fine_once_flag_is_true():
    assert gov_safe_check(True, bare_io(), 100).verdict is Verdict.SAFE


def test_ret_is_safe_under_any_flag():
    assert gov_safe_check(False, ret(5), 10).verdict is Verdict.SAFE
    assert gov_safe_check(True, ret(5), 10).verdict is Verdict.SAFE


def test_spin_is_never_unsafe():
    for fuel in (1, 7, 10_000):
        assert gov_safe_check(False, spin(), fuel).verdict is not Verdict.UNSAFE


def test_zero_fuel_is_no_verdict():
    assert gov_safe_check(False, ret(1), 0).verdict is Verdict.EXHAUSTED
    assert gov_safe_check(False, bare_io(), 0).verdict is Verdict.EXHAUSTED


def test_flag_latches_after_any_governance_event():
    # GovCheck then bare io: the io is legal because the flag was raised
    gate = GovCheckEvent(GovernanceStage.TRUST_CHECK)
    t = Vis(gate, lambda _: bare_io())
    assert gov_safe_check(False, t, 1000).verdict is Verdict.SAFE
    # and deeper: gov, io, io again
    t2 = Vis(gate, lambda _: Vis(IoExec("ls"), lambda _x: bare_io()))
    assert gov_safe_check(False, t2, 1000).verdict is Verdict.SAFE


def test_io_before_any_governance_event_is_caught_at_depth():
    t = Tau(Tau(bind(ret(1), lambda _: bare_io())))
    v = gov_safe_check(False, t, 1000)
    assert v.verdict is Verdict.UNSAFE


def test_unsafe_verdict_is_fuel_monotone():
    t = Tau(Tau(Tau(bare_io())))
    first_unsafe = None
    for fuel in range(0, 12):
        v = gov_safe_check(False, t, fuel)
        if first_unsafe is None and v.verdict is Verdict.UNSAFE:
            first_unsafe = fuel
        if first_unsafe is not None and fuel >= first_unsafe:
            assert v.verdict is Verdict.UNSAFE
    assert first_unsafe is not None


def test_governed_interpretation_never_unsafe():
    rng = Xorshift64Star(301)
    gh_policies = [gen_policy(rng) for _ in range(10)]
    for _ in range(150):
        prog = gen_program(rng, 10)
        pol = gh_policies[rng.randrange(len(gh_policies))]
        v = gov_safe_check(False, interp(gov(echo_handler, pol), prog), 5000)
        assert v.verdict is not Verdict.UNSAFE


def test_denied_branches_are_vacuously_safe():
    # a policy that denies everything still yields a safe interpretation
    from govtree.directives import HTTPRequest

    pol = GovernancePolicy(trust=TrustLevel.UNTRUSTED, phase_ok=False)
    t = interp(gov(echo_handler, pol), trigger(HTTPRequest("u", "b")))
    assert gov_safe_check(False, t, 1000).verdict is not Verdict.UNSAFE


def test_upward_closure():
    assert upward_closure_check(ret(1), 100)
    assert upward_closure_check(bare_io(), 100)  # vacuous: false-flag is unsafe
    rng = Xorshift64Star(302)
    for _ in range(200):
        t = interp(gov(echo_handler, gen_policy(rng)), gen_program(rng, 6))
        assert upward_closure_check(t, 3000)


def test_safe_means_whole_reachable_tree_checked():
    v = gov_safe_check(False, ret(1), 10)
    assert v.verdict is Verdict.SAFE and v.visited == 1
