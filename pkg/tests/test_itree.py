"""Program-tree core: construction, laziness, bind, bisimulation."""

from govtree._backend import kernel as _k
from govtree.directives import HTTPRequest, LLMCall, RecordStep
from govtree.harness import Xorshift64Star, gen_kont, gen_tree
from govtree.itree import (
    Defer,
    EuttVerdict,
    Ret,
    Tau,
    Vis,
    bind,
    eutt_fuel,
    observe,
    ret,
    sequence_program,
    spin,
    trigger,
)


def test_ret_observation():
    assert observe(ret(7)).value == 7
    assert observe(ret(())).value == ()
    assert type(observe(ret(7))) is _k.Ret


def test_bind_left_identity_is_spec_example():
    # bind(ret(3), k) weakly bisimilar to k(3): no fuel refutes it, and
    # any budget covering both trees confirms it
    k = lambda v: trigger(LLMCall(str(v)))
    for fuel in (1, 2, 3, 10, 1000):
        verdict = eutt_fuel(bind(ret(3), k), k(3), fuel)
        assert verdict is not EuttVerdict.DISTINCT
        if fuel >= 3:
            assert verdict is EuttVerdict.EQUAL


def test_bind_grafts_continuations_through_vis():
    t = bind(trigger(LLMCall("q")), lambda ans: ret(ans + b"!"))
    n = observe(t)
    assert n.event == LLMCall("q")
    assert observe(n.k(b"hi")).value == b"hi!"


def test_spin_observation_is_all_tau():
    t = spin()
    for _ in range(50):
        n = observe(t)
        assert type(n) is _k.Tau
        t = n.child
    assert t is spin()  # the self-loop


def test_spin_eutt_exhausts():
    assert eutt_fuel(spin(), spin(), 10) is EuttVerdict.EXHAUSTED
    assert eutt_fuel(spin(), spin(), 1000) is EuttVerdict.EXHAUSTED


def test_eutt_strips_finite_tau_prefixes():
    assert eutt_fuel(ret(1), Tau(ret(1)), 10) is EuttVerdict.EQUAL
    assert eutt_fuel(Tau(Tau(ret(1))), ret(1), 10) is EuttVerdict.EQUAL


def test_eutt_distinct_leaves():
    assert eutt_fuel(ret(1), ret(2), 10) is EuttVerdict.DISTINCT
    assert eutt_fuel(ret(1), trigger(LLMCall("x")), 10) is EuttVerdict.DISTINCT
    assert (
        eutt_fuel(trigger(LLMCall("x")), trigger(LLMCall("y")), 10)
        is EuttVerdict.DISTINCT
    )


def test_eutt_probes_continuations():
    # trees that differ only in what a continuation does with one answer
    t1 = Vis(LLMCall("q"), lambda ans: ret(b"same"))
    t2 = Vis(LLMCall("q"), lambda ans: ret(b"same" if ans == b"" else b"diff"))
    assert eutt_fuel(t1, t2, 100) is EuttVerdict.DISTINCT


def test_eutt_reflexive_and_symmetric():
    rng = Xorshift64Star(101)
    for _ in range(200):
        t1 = gen_tree(rng, 3)
        t2 = gen_tree(rng, 3)
        assert eutt_fuel(t1, t1, 10_000) is EuttVerdict.EQUAL
        assert eutt_fuel(t1, t2, 10_000) is eutt_fuel(t2, t1, 10_000)


def test_monad_laws_on_generated_triples():
    rng = Xorshift64Star(102)
    for _ in range(200):
        t = gen_tree(rng, 2)
        k1 = gen_kont(rng, 1)
        k2 = gen_kont(rng, 1)
        v = rng.randrange(5)
        assert eutt_fuel(bind(Ret(v), k1), k1(v), 10_000) is EuttVerdict.EQUAL
        assert eutt_fuel(bind(t, Ret), t, 10_000) is EuttVerdict.EQUAL
        lhs = bind(bind(t, k1), k2)
        rhs = bind(t, lambda a: bind(k1(a), k2))
        assert eutt_fuel(lhs, rhs, 20_000) is EuttVerdict.EQUAL


def test_construction_performs_no_unfolding():
    forced = []

    def node(i):
        def thunk():
            forced.append(i)
            return Vis(LLMCall(str(i)), lambda _: Defer(node(i + 1)))

        return thunk

    t = Defer(node(0))
    assert forced == []
    t2 = bind(t, lambda v: ret(v))
    assert forced == []  # bind is lazy in its first argument
    n = observe(t2)
    assert forced == [0]  # exactly the node being observed
    observe(n.k(b"x"))
    assert forced == [0, 1]


def test_sequence_program_shares_structure():
    ds = [RecordStep("a"), HTTPRequest("u", "b"), RecordStep("c")]
    t = sequence_program(ds)
    n = observe(t)
    assert n.event == ds[0]
    # constant continuation: both answers land on the same object
    assert n.k(()) is n.k(())
    rest = observe(n.k(()))
    assert rest.event == ds[1]
