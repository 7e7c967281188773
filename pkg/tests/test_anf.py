"""Normal-form rewriting: rules, measure, termination, confluence,
semantic preservation."""

import pytest

from govtree.anf import (
    Branch,
    Code,
    Ident,
    Memory,
    MorphismSyntaxError,
    Reason,
    Seq,
    compile_morphism,
    from_sexpr,
    is_anf,
    measure,
    normalize,
    normalize_random,
    random_morphism,
    reassoc_right,
    step_bound,
    to_sexpr,
)
from govtree.harness import Xorshift64Star
from govtree.itree import EuttVerdict, eutt_fuel


def test_code_fusion():
    assert normalize(Seq(Code(("f",)), Code(("g",)))) == Code(("f", "g"))


def test_identity_elimination():
    assert normalize(Seq(Ident(), Reason())) == Reason()
    assert normalize(Seq(Reason(), Ident())) == Reason()
    assert normalize(Ident()) == Ident()


def test_predicate_hoisting():
    m = Branch("p", ("q",), Code(("f",)), Ident())
    out = normalize(m)
    assert out == Seq(Code(("q",)), Branch("p", (), Code(("f",)), Ident()))
    assert is_anf(out)


def test_fusion_applies_modulo_association():
    # the adjacency hides across the Seq nesting
    m = Seq(Code(("f",)), Seq(Code(("g",)), Reason()))
    assert normalize(m) == Seq(Code(("f", "g")), Reason())
    m2 = Seq(Seq(Reason(), Code(("f",))), Seq(Code(("g",)), Memory()))
    assert normalize(m2) == Seq(Reason(), Seq(Code(("f", "g")), Memory()))


def test_is_anf_examples():
    assert is_anf(Code(("f",)))
    assert not is_anf(Seq(Code(("f",)), Code(("g",))))
    assert not is_anf(Seq(Ident(), Reason()))
    assert not is_anf(Branch("p", ("q",), Ident(), Ident()))
    assert is_anf(Branch("p", (), Ident(), Ident()))
    assert is_anf(Seq(Reason(), Memory()))  # effect layers may be adjacent


def test_measure_examples():
    assert measure(Ident()).as_tuple() == (1, 0)
    m = Seq(Code(("f",)), Code(("g",)))
    assert measure(m).as_tuple() == (3, 0)
    assert measure(normalize(m)).as_tuple() == (1, 0)


def test_hoisting_preserves_weight_and_drops_depth():
    rng = Xorshift64Star(71)
    seen = 0
    for _ in range(2000):
        m = random_morphism(rng, 8)
        if not (isinstance(m, Branch) and m.pre):
            continue
        seen += 1
        hoisted = Seq(Code(m.pre), Branch(m.pred, (), m.then_m, m.else_m))
        assert measure(hoisted).weight == measure(m).weight
        assert measure(hoisted).depth < measure(m).depth
    assert seen > 50


def test_normalize_canonical_and_idempotent():
    rng = Xorshift64Star(72)
    for _ in range(1000):
        m = random_morphism(rng, 10)
        nm = normalize(m)
        assert is_anf(nm)
        assert normalize(nm) == nm


def test_randomized_rewriting_terminates_within_bound():
    rng = Xorshift64Star(73)
    for _ in range(1000):
        m = random_morphism(rng, 10)
        out, steps = normalize_random(m, rng)
        assert steps <= step_bound(m)
        assert is_anf(out)


def test_confluence_modulo_association():
    rng = Xorshift64Star(74)
    for _ in range(1000):
        m = random_morphism(rng, 10)
        a, _ = normalize_random(m, rng)
        b, _ = normalize_random(m, rng)
        assert reassoc_right(a) == reassoc_right(b) == normalize(m)


def test_compiled_equivalence():
    rng = Xorshift64Star(75)
    for _ in range(300):
        m = random_morphism(rng, 8)
        t1 = compile_morphism(m)("x")
        t2 = compile_morphism(normalize(m))("x")
        assert eutt_fuel(t1, t2, 100_000) is EuttVerdict.EQUAL


def test_sexpr_round_trip():
    rng = Xorshift64Star(76)
    for _ in range(300):
        m = random_morphism(rng, 8)
        assert from_sexpr(to_sexpr(m)) == m


def test_sexpr_parse_errors():
    for bad in ("", "(seq id)", "(code)", "(branch p id)", "id id", "(unknown x)"):
        with pytest.raises(MorphismSyntaxError):
            from_sexpr(bad)
