"""Alternating-normal-form rewriting over the morphism algebra.

Morphisms compose the four primitives (pure code, oracle reasoning,
memory, machine call) with sequencing and branching. Three rules
normalize:

* R1 fuse adjacent code layers (symbol lists concatenate),
* R2 hoist a branch predicate's pre-composition chain out as a code
  prefix,
* R3 drop identities from compositions.

Sequencing is associative, so the rules apply modulo association: the
rewriters work on the flattened composition spine, where ``Seq(Code a,
Seq(Code b, x))`` is the adjacency it denotes, and results are emitted
right-nested. Termination is measured by (weight, branch nesting)
lexicographically: fusion and identity elimination drop weight,
hoisting keeps weight and strictly drops depth.

Text format (s-expressions): ``id``, ``reason``, ``memory``, ``call``,
``(code f g)``, ``(seq M N)``, ``(branch p M N)``,
``(branch p (pre f g) M N)``.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable, List, Tuple, Union

from .directives import CallMachine, LLMCall, MemRecall, MemoryOp
from .itree import Ret, Tree, Vis, bind


@dataclass(frozen=True)
class Ident:
    pass


@dataclass(frozen=True)
class Code:
    syms: Tuple[str, ...]

    def __post_init__(self):
        if not self.syms:
            raise ValueError("code layer needs at least one symbol")


@dataclass(frozen=True)
class Reason:
    pass


@dataclass(frozen=True)
class Memory:
    pass


@dataclass(frozen=True)
class Call:
    pass


@dataclass(frozen=True)
class Seq:
    left: "Morphism"
    right: "Morphism"


@dataclass(frozen=True)
class Branch:
    pred: str
    pre: Tuple[str, ...]  # pre-composition chain feeding the predicate
    then_m: "Morphism"
    else_m: "Morphism"


Morphism = Union[Ident, Code, Reason, Memory, Call, Seq, Branch]


@dataclass(frozen=True)
class Measure:
    weight: int
    depth: int

    def as_tuple(self):
        return (self.weight, self.depth)


def measure(m: Morphism) -> Measure:
    """Constructor weight and branch nesting. A nonempty pre-chain
    counts as the latent Seq+Code it hoists into and as one extra
    nesting level, so hoisting preserves weight and strictly drops
    depth."""
    if isinstance(m, Seq):
        l, r = measure(m.left), measure(m.right)
        return Measure(1 + l.weight + r.weight, max(l.depth, r.depth))
    if isinstance(m, Branch):
        t, e = measure(m.then_m), measure(m.else_m)
        extra = 2 if m.pre else 0
        nest = 1 if m.pre else 0
        return Measure(
            1 + extra + t.weight + e.weight, 1 + nest + max(t.depth, e.depth)
        )
    return Measure(1, 0)


def step_bound(m: Morphism) -> int:
    mm = measure(m)
    return mm.weight * (mm.depth + 1)


# ---------------------------------------------------------------------------
# Spine view
# ---------------------------------------------------------------------------


def flatten(m: Morphism) -> List[Morphism]:
    out: List[Morphism] = []
    stack = [m]
    while stack:
        x = stack.pop()
        if isinstance(x, Seq):
            stack.append(x.right)
            stack.append(x.left)
        else:
            out.append(x)
    return out


def _seq_of(items: List[Morphism]) -> Morphism:
    if not items:
        return Ident()
    t = items[-1]
    for x in reversed(items[:-1]):
        t = Seq(x, t)
    return t


def reassoc_right(m: Morphism) -> Morphism:
    """Canonical association: right-nested spine, recursively."""
    items = []
    for x in flatten(m):
        if isinstance(x, Branch):
            x = Branch(x.pred, x.pre, reassoc_right(x.then_m), reassoc_right(x.else_m))
        items.append(x)
    return _seq_of(items)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def normalize(m: Morphism) -> Morphism:
    """Exhaustive rewriting with a fixed strategy: walk the flattened
    composition left to right, drop identities, hoist branch
    predicates, fuse adjacent code layers, recurse into branch arms.
    Output is right-nested and satisfies ``is_anf``."""
    items: List[Morphism] = []

    def push(x: Morphism) -> None:
        if isinstance(x, Code) and items and isinstance(items[-1], Code):
            items[-1] = Code(items[-1].syms + x.syms)  # R1
        else:
            items.append(x)

    for x in flatten(m):
        if isinstance(x, Ident):
            continue  # R3
        if isinstance(x, Branch):
            if x.pre:
                push(Code(x.pre))  # R2
            push(Branch(x.pred, (), normalize(x.then_m), normalize(x.else_m)))
        else:
            push(x)
    return _seq_of(items)


def is_anf(m: Morphism) -> bool:
    """Alternating shape: flattening yields no identities, no two
    adjacent code layers, and every branch has a bare predicate with
    arms in normal form. The bare identity is the empty alternation."""
    if isinstance(m, Ident):
        return True
    prev_code = False
    for x in flatten(m):
        if isinstance(x, Ident):
            return False
        if isinstance(x, Code):
            if prev_code:
                return False
            prev_code = True
            continue
        prev_code = False
        if isinstance(x, Branch):
            if x.pre:
                return False
            if not (is_anf(x.then_m) and is_anf(x.else_m)):
                return False
    return True


# ---------------------------------------------------------------------------
# Randomized small-step rewriting (for confluence checks)
# ---------------------------------------------------------------------------
#
# State: mutable spine lists; a branch item is
# ["branch", pred, [pre...], then_spine, else_spine].


def _to_spine(m: Morphism) -> list:
    out = []
    for x in flatten(m):
        if isinstance(x, Branch):
            out.append(
                ["branch", x.pred, list(x.pre), _to_spine(x.then_m), _to_spine(x.else_m)]
            )
        else:
            out.append(x)
    return out


def _from_spine(spine: list) -> Morphism:
    items = []
    for x in spine:
        if isinstance(x, list):
            items.append(
                Branch(x[1], tuple(x[2]), _from_spine(x[3]), _from_spine(x[4]))
            )
        else:
            items.append(x)
    return _seq_of(items)


def _find_redexes(spine: list, out: list) -> None:
    many = len(spine) > 1
    for i, x in enumerate(spine):
        if isinstance(x, Ident) and many:
            out.append(("ident", spine, i))
        elif isinstance(x, Code) and i + 1 < len(spine) and isinstance(
            spine[i + 1], Code
        ):
            out.append(("fuse", spine, i))
        elif isinstance(x, list):
            if x[2]:
                out.append(("hoist", spine, i))
            _find_redexes(x[3], out)
            _find_redexes(x[4], out)


def _apply_redex(redex) -> None:
    kind, spine, i = redex
    if kind == "ident":
        del spine[i]
    elif kind == "fuse":
        spine[i : i + 2] = [Code(spine[i].syms + spine[i + 1].syms)]
    else:
        br = spine[i]
        spine[i : i + 1] = [Code(tuple(br[2])), ["branch", br[1], [], br[3], br[4]]]


def normalize_random(m: Morphism, rng) -> Tuple[Morphism, int]:
    """Apply redexes in rng order until none fire. Returns the normal
    form (right-nested) and the number of rewrite steps taken."""
    spine = _to_spine(m)
    steps = 0
    while True:
        redexes: list = []
        _find_redexes(spine, redexes)
        if not redexes:
            return _from_spine(spine), steps
        _apply_redex(redexes[rng.randrange(len(redexes))])
        steps += 1


# ---------------------------------------------------------------------------
# Compilation to directive trees
# ---------------------------------------------------------------------------


def _apply_syms(syms: Tuple[str, ...], v: str) -> str:
    for s in syms:
        v = f"{s}({v})"
    return v


def _pred_holds(pred: str, v: str) -> bool:
    # stable, content-dependent stub predicate
    return bool(zlib.crc32(f"{pred}|{v}".encode()) & 1)


def _decode(ans: bytes) -> str:
    return ans.decode("latin1")


def compile_morphism(m: Morphism) -> Callable[[str], Tree]:
    """Denote the morphism as a directive-tree arrow over string
    contexts: code applies symbols formally, reasoning asks the oracle
    directive, memory recalls a derived key, call invokes a
    sub-machine. Rewriting must preserve this denotation up to weak
    bisimulation."""
    if isinstance(m, Ident):
        return Ret
    if isinstance(m, Code):
        syms = m.syms
        return lambda v: Ret(_apply_syms(syms, v))
    if isinstance(m, Reason):
        return lambda v: Vis(LLMCall(v), lambda ans: Ret(_decode(ans)))
    if isinstance(m, Memory):
        return lambda v: Vis(MemoryOp(MemRecall(f"m:{v}")), lambda ans: Ret(str(ans)))
    if isinstance(m, Call):
        return lambda v: Vis(CallMachine("sub", v), lambda ans: Ret(_decode(ans)))
    if isinstance(m, Seq):
        f = compile_morphism(m.left)
        g = compile_morphism(m.right)
        return lambda v: bind(f(v), g)
    if isinstance(m, Branch):
        pre = m.pre
        pred = m.pred
        f = compile_morphism(m.then_m)
        g = compile_morphism(m.else_m)

        def run(v: str) -> Tree:
            w = _apply_syms(pre, v)
            return f(w) if _pred_holds(pred, w) else g(w)

        return run
    raise TypeError(f"not a morphism: {m!r}")


# ---------------------------------------------------------------------------
# Random morphisms (seeded; rng provides randrange)
# ---------------------------------------------------------------------------

_SYMS = ("f", "g", "h", "u", "w")
_PREDS = ("p", "q")


def random_morphism(rng, size: int) -> Morphism:
    if size <= 1:
        roll = rng.randrange(6)
        if roll == 0:
            return Ident()
        if roll == 1:
            return Reason()
        if roll == 2:
            return Memory()
        if roll == 3:
            return Call()
        return Code((_SYMS[rng.randrange(len(_SYMS))],))
    roll = rng.randrange(10)
    if roll < 6:
        split = 1 + rng.randrange(size - 1)
        return Seq(random_morphism(rng, split), random_morphism(rng, size - split))
    if roll < 8:
        pre = tuple(
            _SYMS[rng.randrange(len(_SYMS))] for _ in range(rng.randrange(3))
        )
        half = max(1, (size - 1) // 2)
        return Branch(
            _PREDS[rng.randrange(len(_PREDS))],
            pre,
            random_morphism(rng, half),
            random_morphism(rng, half),
        )
    return random_morphism(rng, 1)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


class MorphismSyntaxError(ValueError):
    pass


def to_sexpr(m: Morphism) -> str:
    if isinstance(m, Ident):
        return "id"
    if isinstance(m, Reason):
        return "reason"
    if isinstance(m, Memory):
        return "memory"
    if isinstance(m, Call):
        return "call"
    if isinstance(m, Code):
        return "(code " + " ".join(m.syms) + ")"
    if isinstance(m, Seq):
        return f"(seq {to_sexpr(m.left)} {to_sexpr(m.right)})"
    if isinstance(m, Branch):
        pre = f" (pre {' '.join(m.pre)})" if m.pre else ""
        return (
            f"(branch {m.pred}{pre} {to_sexpr(m.then_m)} {to_sexpr(m.else_m)})"
        )
    raise TypeError(f"not a morphism: {m!r}")


def _tokenize(text: str) -> List[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse(tokens: List[str], pos: int) -> Tuple[Morphism, int]:
    if pos >= len(tokens):
        raise MorphismSyntaxError("unexpected end of input")
    tok = tokens[pos]
    if tok == "id":
        return Ident(), pos + 1
    if tok == "reason":
        return Reason(), pos + 1
    if tok == "memory":
        return Memory(), pos + 1
    if tok == "call":
        return Call(), pos + 1
    if tok != "(":
        raise MorphismSyntaxError(f"unexpected token {tok!r}")
    head = tokens[pos + 1] if pos + 1 < len(tokens) else None
    if head == "code":
        syms = []
        i = pos + 2
        while i < len(tokens) and tokens[i] != ")":
            syms.append(tokens[i])
            i += 1
        if i >= len(tokens) or not syms:
            raise MorphismSyntaxError("bad code form")
        return Code(tuple(syms)), i + 1
    if head == "seq":
        left, i = _parse(tokens, pos + 2)
        right, i = _parse(tokens, i)
        if i >= len(tokens) or tokens[i] != ")":
            raise MorphismSyntaxError("unterminated seq")
        return Seq(left, right), i + 1
    if head == "branch":
        if pos + 2 >= len(tokens):
            raise MorphismSyntaxError("bad branch form")
        pred = tokens[pos + 2]
        i = pos + 3
        pre: Tuple[str, ...] = ()
        if tokens[i : i + 2] == ["(", "pre"]:
            j = i + 2
            syms = []
            while j < len(tokens) and tokens[j] != ")":
                syms.append(tokens[j])
                j += 1
            pre = tuple(syms)
            i = j + 1
        then_m, i = _parse(tokens, i)
        else_m, i = _parse(tokens, i)
        if i >= len(tokens) or tokens[i] != ")":
            raise MorphismSyntaxError("unterminated branch")
        return Branch(pred, pre, then_m, else_m), i + 1
    raise MorphismSyntaxError(f"unknown form {head!r}")


def from_sexpr(text: str) -> Morphism:
    tokens = _tokenize(text)
    m, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise MorphismSyntaxError(f"trailing input at token {pos}")
    return m
