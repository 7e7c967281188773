"""The governance operator and the governed interpreter.

``gov`` turns a base handler (directive -> I/O tree) into a governed
handler whose tree runs the 4+3 stage pipeline around the lifted
handler: four gating checks, the handler's I/O, three recording
checks. A gate answered False is ``spin`` — a denied directive makes
no progress and performs nothing. Post-stage answers are consumed but
cannot retract I/O that already happened.

Stage answers are not baked into the tree: the tree asks, an
environment (a ``StageAnswerer``) answers. The canonical answerer
derives TrustCheck/PermissionCheck from the policy's trust level and
declared capabilities, and PhaseValidation/PreHooks from policy flags;
tests may script any other answerer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

from ._backend import kernel as _k
from .directives import (
    Broadcast,
    CallMachine,
    CapabilityTree,
    DEFAULT_CAPABILITY_TREE,
    DatabaseOp,
    DirectiveEvent,
    EmitEvent,
    ExecCommand,
    FileSystemOp,
    GovCheckEvent,
    GovernanceStage,
    GraphQLRequest,
    HTTPRequest,
    Introspect,
    IoDb,
    IoExec,
    IoFs,
    IoHttp,
    IoLlm,
    IoMachineCall,
    IoMemory,
    IoWebSocket,
    LLMCall,
    MCPCall,
    MemStore,
    MemoryOp,
    POST_GATE_EVENTS,
    PRE_GATE_EVENTS,
    RecordStep,
    STAGE_WIRE_NAMES,
    TrustLevel,
    WebSocketOp,
    capability_allowed,
    io_event_to_obj,
)

DEFAULT_FUEL = 1_000_000


@dataclass(frozen=True)
class GovernancePolicy:
    """Inputs to the canonical stage decisions for one interpretation."""

    trust: TrustLevel
    declared: frozenset = frozenset()
    tree: CapabilityTree = DEFAULT_CAPABILITY_TREE
    phase_ok: bool = True
    prehooks_ok: bool = True


PERMISSIVE_POLICY = GovernancePolicy(trust=TrustLevel.SYSTEM)


def directive_io_event(d: DirectiveEvent):
    """The performed-effect image of an effectful directive, or None
    for the observability directives."""
    if isinstance(d, LLMCall):
        return IoLlm(d.prompt)
    if isinstance(d, MemoryOp):
        return IoMemory(d.op)
    if isinstance(d, CallMachine):
        return IoMachineCall(d.machine, d.argument)
    if isinstance(d, HTTPRequest):
        return IoHttp(d.url, d.body)
    if isinstance(d, GraphQLRequest):
        return IoHttp(d.endpoint, d.query)
    if isinstance(d, WebSocketOp):
        return IoWebSocket(d.op)
    if isinstance(d, MCPCall):
        return IoMachineCall(d.tool, d.args)
    if isinstance(d, ExecCommand):
        return IoExec(d.command)
    if isinstance(d, FileSystemOp):
        return IoFs(d.op)
    if isinstance(d, DatabaseOp):
        return IoDb(d.statement)
    if isinstance(d, Introspect):
        return IoMachineCall(d.machine, "")
    if isinstance(d, (RecordStep, Broadcast, EmitEvent)):
        return None
    raise TypeError(f"not a directive event: {d!r}")


def echo_handler(d: DirectiveEvent):
    """Canonical base handler: each effectful directive performs its
    one I/O event and returns that event's answer; observability
    directives return unit without I/O."""
    ev = directive_io_event(d)
    if ev is None:
        return _k.Ret(())
    return _k.trigger(ev)


def answer_io_stub(ev) -> "bytes | int | tuple":
    """Deterministic stand-in answers for performed effects."""
    if isinstance(ev, IoMemory):
        return ev.op.value if isinstance(ev.op, MemStore) else 0
    if isinstance(ev, IoLlm):
        return b"re:" + ev.prompt.encode()
    if isinstance(ev, IoMachineCall):
        return b"call:" + ev.target.encode()
    if isinstance(ev, IoHttp):
        return b"http:" + ev.target.encode()
    if isinstance(ev, IoWebSocket):
        return b"ws:" + ev.op.encode()
    if isinstance(ev, IoExec):
        return b"exec:" + ev.command.encode()
    if isinstance(ev, IoFs):
        return b"fs:" + ev.op.encode()
    if isinstance(ev, IoDb):
        return b"db:" + ev.statement.encode()
    raise TypeError(f"not an io event: {ev!r}")


class StageAnswerer:
    """Environment protocol for trace execution: decide each
    governance check and answer each performed effect."""

    def answer_stage(self, check: GovCheckEvent, directive) -> bool:
        raise NotImplementedError

    def answer_io(self, ev):
        return answer_io_stub(ev)


class PolicyAnswerer(StageAnswerer):
    """The canonical environment.

    TrustCheck verifies the directive is a known roster constructor
    under a recognized trust level; PermissionCheck is the capability
    decision proper — the directive's atom must be within the trust
    ceiling and expand from the declared set (SYSTEM and STDLIB are
    top: declaration is not consulted). Observability directives pass
    both trivially. Together the two gates answer True exactly when
    the functional interpreter would allow the directive. Decisions
    depend only on the directive's constructor, so they are
    precomputed per type.
    """

    gate_answers_by_type = True  # decisions depend only on the constructor

    def __init__(self, policy: GovernancePolicy):
        self.policy = policy
        top = policy.trust >= TrustLevel.STDLIB
        expanded = policy.tree.expand(policy.declared, strict=False)
        self._perm_ok = {}
        self._gates = {}
        from .directives import DIRECTIVE_TYPES, _CAPABILITY_FOR

        for cls in DIRECTIVE_TYPES:
            cap = _CAPABILITY_FOR[cls]
            ok = cap is None or (
                capability_allowed(policy.trust, cap) and (top or cap in expanded)
            )
            self._perm_ok[cls] = ok
            self._gates[cls] = (True, ok, policy.phase_ok, policy.prehooks_ok)
        self._gates_unknown = (False, False, policy.phase_ok, policy.prehooks_ok)

    def gate_answers(self, directive):
        """All four pre-stage answers at once; posts are always True.
        Fast path used by the fused trace walker."""
        if directive is None:
            return (True, True, self.policy.phase_ok, self.policy.prehooks_ok)
        return self._gates.get(type(directive), self._gates_unknown)

    def answer_stage(self, check: GovCheckEvent, directive) -> bool:
        s = check.stage
        if s is GovernanceStage.TRUST_CHECK:
            return directive is None or type(directive) in self._perm_ok
        if s is GovernanceStage.PERMISSION_CHECK:
            return directive is None or self._perm_ok[type(directive)]
        if s is GovernanceStage.PHASE_VALIDATION:
            return self.policy.phase_ok
        if s is GovernanceStage.PRE_HOOKS:
            return self.policy.prehooks_ok
        return True  # post stages record; they cannot deny


class ScriptedAnswerer(StageAnswerer):
    """Test environment: per-stage boolean script, default True."""

    def __init__(self, stages=None, io=None):
        self._stages = dict(stages or {})
        self._io = io

    def answer_stage(self, check: GovCheckEvent, directive) -> bool:
        return self._stages.get(check.stage, True)

    def answer_io(self, ev):
        return self._io(ev) if self._io else answer_io_stub(ev)


class GovernedHandler:
    """A base handler wrapped by the governance operator."""

    def __init__(self, handler: Callable, policy: GovernancePolicy):
        self.handler = handler
        self.policy = policy

    def __call__(self, d: DirectiveEvent):
        """Standalone pipeline tree for one directive, ending in
        Ret(result)."""
        return _k.pipeline_tree(d, self.handler, PRE_GATE_EVENTS, POST_GATE_EVENTS)

    def answerer(self) -> PolicyAnswerer:
        return PolicyAnswerer(self.policy)


def gov(handler: Callable, policy: GovernancePolicy) -> GovernedHandler:
    """The governance operator: wrap every directive's handling in the
    seven-stage pipeline."""
    return GovernedHandler(handler, policy)


def interp(gh: GovernedHandler, t) -> "_k.Tree":
    """Governed interpretation of a directive program, as a lazy tree
    over the governed alphabet."""
    return _k.interp_governed_tree(
        t, gh.handler, PRE_GATE_EVENTS, POST_GATE_EVENTS
    )


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


class EventTrace:
    """Ordered record of one run: ('gov'|'io', event, directive_index)
    per entry.

    Walkers hand over a raw flat stride-3 list (kind, payload, payload)
    in which deterministic pipeline stage runs may be run-length
    encoded as 'pre'/'post' idx n markers; expansion to per-event
    tuples happens once, on first access.
    """

    def __init__(self, raw=None):
        self._raw = raw if raw is not None else []
        self._entries = None

    @property
    def entries(self):
        if self._entries is None:
            self._entries = self._expand(self._raw)
        return self._entries

    @staticmethod
    def _expand(raw):
        out = []
        for j in range(0, len(raw), 3):
            kind = raw[j]
            if kind == "pre":
                idx = raw[j + 1]
                for i in range(raw[j + 2]):
                    out.append(("gov", PRE_GATE_EVENTS[i], idx))
            elif kind == "post":
                idx = raw[j + 1]
                for i in range(raw[j + 2]):
                    out.append(("gov", POST_GATE_EVENTS[i], idx))
            else:
                out.append((kind, raw[j + 1], raw[j + 2]))
        return out

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def gov_entries(self):
        return [e for e in self.entries if e[0] == "gov"]

    def io_entries(self):
        return [e for e in self.entries if e[0] == "io"]

    def entry_obj(self, entry) -> dict:
        kind, ev, idx = entry
        if kind == "gov":
            return {
                "kind": "gov",
                "stage": STAGE_WIRE_NAMES[ev.stage],
                "directive_index": idx,
            }
        return {"kind": "io", "event": io_event_to_obj(ev), "directive_index": idx}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(self.entry_obj(e)) + "\n" for e in self.entries)


@dataclass
class RunResult:
    """Outcome of one trace execution."""

    status: str  # done | denied | exhausted | diverged
    value: object
    denied_stage: Optional[GovernanceStage]
    directive_index: int
    fuel_spent: int
    trace: EventTrace

    @property
    def denied(self) -> bool:
        return self.status == "denied"


def run_governed(gh: GovernedHandler, t, env: StageAnswerer = None,
                 fuel: int = DEFAULT_FUEL) -> RunResult:
    """Interpret and execute under an answerer, collecting the trace.

    Uses the fused walker: same trace, status and fuel accounting as
    walking the materialized tree (``run_tree`` over ``interp``), which
    the parity tests assert, without building pipeline nodes.
    """
    entries = []
    status, value, gate_ev, dir_idx, spent = _k.run_governed_fused(
        t, gh.handler, PRE_GATE_EVENTS, POST_GATE_EVENTS,
        env or gh.answerer(), fuel, entries
    )
    stage = gate_ev.stage if gate_ev is not None else None
    return RunResult(status, value, stage, dir_idx, spent, EventTrace(entries))


def run_tree(tree, env: StageAnswerer, fuel: int = DEFAULT_FUEL) -> RunResult:
    entries = []
    status, value, gate_ev, dir_idx, spent = _k.run_governed_trace(
        tree, env, fuel, entries
    )
    stage = gate_ev.stage if gate_ev is not None else None
    return RunResult(status, value, stage, dir_idx, spent, EventTrace(entries))


def run_ungoverned(t, handler: Callable = echo_handler,
                   env: StageAnswerer = None,
                   fuel: int = DEFAULT_FUEL) -> RunResult:
    """Direct execution of a directive program through its handler; no
    governance events, used as the benchmark baseline."""
    entries = []
    env = env or ScriptedAnswerer()
    status, value, _, dir_idx, spent = _k.run_direct_trace(
        t, handler, env, fuel, entries
    )
    return RunResult(status, value, None, dir_idx, spent, EventTrace(entries))


def interp_governed(gh: GovernedHandler, t, env: StageAnswerer = None,
                    fuel: int = DEFAULT_FUEL):
    """The full interpretation surface: the lazy governed tree plus the
    finite trace observed within fuel."""
    tree = interp(gh, t)
    result = run_tree(tree, env or gh.answerer(), fuel)
    return tree, result
