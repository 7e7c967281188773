"""Register machine: reference semantics, directive-level translation,
and the pure denotation used for simulation-correctness checks.

``rm_run`` is the oracle: a direct operational loop over INC/DEC/HALT,
written without trees. ``translate_program`` compiles the same program
into a directive tree whose register accesses are memory directives on
keys ``"r<i>"``; ``eval_mem`` runs such trees against a pure store, and
``denote_program`` packages that round trip as a machine configuration
so the two routes can be compared for exact equality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

from ._backend import kernel as _k
from .directives import MemRecall, MemStore, MemoryOp
from .itree import Defer, Ret, Tree, Vis, bind, observe


@dataclass(frozen=True)
class Inc:
    reg: int
    next: int


@dataclass(frozen=True)
class Dec:
    reg: int
    if_positive: int
    if_zero: int


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Union[Inc, Dec, Halt]


class BadProgram(ValueError):
    """A referenced label falls outside the program."""


@dataclass(frozen=True)
class RegisterProgram:
    instructions: Tuple[Instruction, ...]

    def __post_init__(self):
        n = len(self.instructions)
        for i, ins in enumerate(self.instructions):
            targets = ()
            if isinstance(ins, Inc):
                targets = (ins.next,)
            elif isinstance(ins, Dec):
                targets = (ins.if_positive, ins.if_zero)
            for t in targets:
                if not (0 <= t < n):
                    raise BadProgram(f"instruction {i} targets label {t} of {n}")

    def __len__(self):
        return len(self.instructions)

    def __getitem__(self, i):
        return self.instructions[i]


def _norm_regs(regs: Dict[int, int]) -> Dict[int, int]:
    return {r: v for r, v in regs.items() if v}


@dataclass
class MachineConfig:
    pc: int
    regs: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self.regs = _norm_regs(self.regs)

    def get(self, reg: int) -> int:
        return self.regs.get(reg, 0)

    def __eq__(self, other):
        return (
            isinstance(other, MachineConfig)
            and self.pc == other.pc
            and self.regs == other.regs
        )


def rm_run(p: RegisterProgram, fuel: int, cfg: MachineConfig) -> MachineConfig:
    """Reference operational semantics: step up to ``fuel``
    instructions. HALT or an out-of-range pc stops; fuel 0 returns the
    configuration unchanged."""
    pc = cfg.pc
    regs = dict(cfg.regs)
    n = len(p)
    while fuel > 0 and 0 <= pc < n:
        ins = p[pc]
        if isinstance(ins, Halt):
            break
        if isinstance(ins, Inc):
            regs[ins.reg] = regs.get(ins.reg, 0) + 1
            pc = ins.next
        else:
            v = regs.get(ins.reg, 0)
            if v > 0:
                regs[ins.reg] = v - 1
                pc = ins.if_positive
            else:
                pc = ins.if_zero
        fuel -= 1
    return MachineConfig(pc, regs)


# ---------------------------------------------------------------------------
# Translation to directive trees
# ---------------------------------------------------------------------------


def _reg_key(reg: int) -> str:
    return f"r{reg}"


class _Step:
    """Lazy translation of one machine step; Ret carries the final pc."""

    __slots__ = ("p", "pc", "fuel")

    def __init__(self, p, pc, fuel):
        self.p = p
        self.pc = pc
        self.fuel = fuel

    def __call__(self):
        p, pc, fuel = self.p, self.pc, self.fuel
        if fuel == 0 or not (0 <= pc < len(p)):
            return Ret(pc)
        ins = p[pc]
        if isinstance(ins, Halt):
            return Ret(pc)
        if isinstance(ins, Inc):
            key = _reg_key(ins.reg)

            def after_recall(v, key=key, nxt=ins.next, fuel=fuel):
                return Vis(
                    MemoryOp(MemStore(key, v + 1)),
                    lambda _v, nxt=nxt, fuel=fuel: Defer(_Step(p, nxt, fuel - 1)),
                )

            return Vis(MemoryOp(MemRecall(key)), after_recall)
        key = _reg_key(ins.reg)

        def after_recall(v, ins=ins, key=key, fuel=fuel):
            if v > 0:
                return Vis(
                    MemoryOp(MemStore(key, v - 1)),
                    lambda _v: Defer(_Step(p, ins.if_positive, fuel - 1)),
                )
            return Defer(_Step(p, ins.if_zero, fuel - 1))

        return Vis(MemoryOp(MemRecall(key)), after_recall)


def translate_cfg(p: RegisterProgram, fuel: int, pc: int) -> Tree:
    """Directive-level simulation whose Ret value is the final pc."""
    return Defer(_Step(p, pc, fuel))


def translate_program(p: RegisterProgram, fuel: int, pc: int = 0) -> Tree:
    """The unit-valued simulation tree."""
    return bind(translate_cfg(p, fuel, pc), lambda _pc: Ret(()))


class NonMemoryDirective(ValueError):
    """eval_mem met a directive other than a memory operation."""


def eval_mem(store: Dict[str, int], t: Tree) -> Tuple[Dict[str, int], object]:
    """Interpret a memory-only directive tree against a pure store.

    Returns the final store and the tree's return value; raises
    NonMemoryDirective on any other event.
    """
    store = dict(store)
    while True:
        n = observe(t)
        tn = type(n)
        if tn is _k.Ret:
            return store, n.value
        if tn is _k.Tau:
            if n.child is n:
                raise NonMemoryDirective("divergent memory tree")
            t = n.child
            continue
        ev = n.event
        if not isinstance(ev, MemoryOp):
            raise NonMemoryDirective(repr(ev))
        op = ev.op
        if isinstance(op, MemRecall):
            t = n.k(store.get(op.key, 0))
        else:
            store[op.key] = op.value
            t = n.k(op.value)


def store_of_regs(regs: Dict[int, int]) -> Dict[str, int]:
    return {_reg_key(r): v for r, v in regs.items() if v}


def mem_corresponds(store: Dict[str, int], regs: Dict[int, int]) -> bool:
    """The store and the register file agree on every register (absent
    keys read as zero) and the store holds only register keys."""
    for key, v in store.items():
        if not (key.startswith("r") and key[1:].isdigit()):
            return False
        if v != regs.get(int(key[1:]), 0):
            return False
    for r, v in regs.items():
        if v != store.get(_reg_key(r), 0):
            return False
    return True


def denote_program(
    p: RegisterProgram, fuel: int, pc: int, regs: Dict[int, int]
) -> MachineConfig:
    """Pure denotation through the directive encoding: run the
    translated tree against an in-memory store and read the final
    configuration back. Must equal ``rm_run`` exactly."""
    store, final_pc = eval_mem(store_of_regs(regs), translate_cfg(p, fuel, pc))
    out: Dict[int, int] = {}
    for key, v in store.items():
        out[int(key[1:])] = v
    return MachineConfig(final_pc, out)


# ---------------------------------------------------------------------------
# Random programs (seeded; rng provides randrange)
# ---------------------------------------------------------------------------


def random_program(rng, max_len: int = 8, max_reg: int = 2) -> RegisterProgram:
    """Uniform-ish instruction mix with valid labels and a reachable
    HALT."""
    n = 1 + rng.randrange(max_len)
    out: List[Instruction] = []
    for _ in range(n):
        roll = rng.randrange(5)
        if roll == 0:
            out.append(Halt())
        elif roll <= 2:
            out.append(Inc(rng.randrange(max_reg + 1), rng.randrange(n)))
        else:
            out.append(
                Dec(rng.randrange(max_reg + 1), rng.randrange(n), rng.randrange(n))
            )
    reachable = {0}
    frontier = [0]
    while frontier:
        pc = frontier.pop()
        ins = out[pc]
        nxt = ()
        if isinstance(ins, Inc):
            nxt = (ins.next,)
        elif isinstance(ins, Dec):
            nxt = (ins.if_positive, ins.if_zero)
        for t in nxt:
            if t not in reachable:
                reachable.add(t)
                frontier.append(t)
    if not any(isinstance(out[i], Halt) for i in reachable):
        out[sorted(reachable)[rng.randrange(len(reachable))]] = Halt()
    return RegisterProgram(tuple(out))


def random_config(rng, max_reg: int = 2, max_val: int = 5) -> MachineConfig:
    regs = {r: rng.randrange(max_val + 1) for r in range(max_reg + 1)}
    return MachineConfig(0, regs)


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------


def program_from_obj(obj) -> RegisterProgram:
    if not isinstance(obj, list):
        raise ValueError("register program must be a JSON array")
    out: List[Instruction] = []
    for item in obj:
        op = item.get("op")
        if op == "inc":
            out.append(Inc(int(item["reg"]), int(item["next"])))
        elif op == "dec":
            out.append(Dec(int(item["reg"]), int(item["pos"]), int(item["zero"])))
        elif op == "halt":
            out.append(Halt())
        else:
            raise ValueError(f"unknown instruction {item!r}")
    return RegisterProgram(tuple(out))


def program_to_obj(p: RegisterProgram) -> list:
    out = []
    for ins in p.instructions:
        if isinstance(ins, Inc):
            out.append({"op": "inc", "reg": ins.reg, "next": ins.next})
        elif isinstance(ins, Dec):
            out.append(
                {"op": "dec", "reg": ins.reg, "pos": ins.if_positive, "zero": ins.if_zero}
            )
        else:
            out.append({"op": "halt"})
    return out


def load_program(text: str) -> RegisterProgram:
    return program_from_obj(json.loads(text))
