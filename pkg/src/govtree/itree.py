"""Lazy program trees: return / silent-step / event nodes.

A tree never performs effects and never unfolds more than the node
being observed. Trees may be infinite (``spin``), so every inspecting
operation takes a fuel budget and returns a three-valued verdict —
running out of fuel is never conflated with a definitive answer.

Fuel is a plain non-negative int. One unit pays for one node
inspection (Ret, Tau or Vis); resolving a lazy suspension is free.
"""

from __future__ import annotations

from enum import Enum
from typing import Callable, Sequence

from ._backend import kernel as _k
from .directives import PROBES

Fuel = int

Tree = _k.Tree
Ret = _k.Ret
Tau = _k.Tau
Vis = _k.Vis
Defer = _k.Defer
SPIN = _k.SPIN

observe = _k.unroll
bind = _k.bind
trigger = _k.trigger
ConstK = _k.ConstK


def ret(v) -> Tree:
    """Single-node tree observing as Ret(v)."""
    return Ret(v)


def tau(t: Tree) -> Tree:
    return Tau(t)


def vis(event, k: Callable) -> Tree:
    return Vis(event, k)


def defer(thunk: Callable[[], Tree]) -> Tree:
    """Suspended tree; the thunk runs once, on first observation."""
    return Defer(thunk)


def spin() -> Tree:
    """The infinitely silent tree. Observing it yields Tau forever."""
    return SPIN


def sequence_program(events: Sequence) -> Tree:
    """Straight-line program: emit each event in order, ignore the
    answers, return unit. Continuations are constant, so the whole
    tree is built as shared structure."""
    t = Ret(())
    for ev in reversed(events):
        t = Vis(ev, ConstK(t))
    return t


class EuttVerdict(Enum):
    EQUAL = "equal"
    DISTINCT = "distinct"
    EXHAUSTED = "exhausted"


def eutt_fuel(t1: Tree, t2: Tree, fuel: Fuel, probes=None) -> EuttVerdict:
    """Weak bisimulation up to fuel.

    Strips finite silent prefixes on both sides, compares Ret values
    and Vis events node by node, and recurses into continuations over
    the finite probe set for the event's answer kind. DISTINCT is
    definitive; EQUAL means no difference was found within fuel.
    """
    return EuttVerdict(_k.eutt_fuel(t1, t2, fuel, probes or PROBES))


def head_events(t: Tree, fuel: Fuel, answers=None) -> list:
    """Events along one concrete path, answering each event with the
    first probe value (or ``answers(event)``). Debug/test helper."""
    out = []
    probes = PROBES
    while fuel > 0:
        n = observe(t)
        fuel -= 1
        tn = type(n)
        if tn is Ret:
            break
        if tn is Tau:
            if n.child is n:
                break
            t = n.child
            continue
        out.append(n.event)
        ans = answers(n.event) if answers else probes[n.event.answer_kind][0]
        t = n.k(ans)
    return out
