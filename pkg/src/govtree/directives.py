"""Event alphabets, the trust lattice, and the capability model.

Three alphabets: directives (what pure programs emit), I/O events
(what the runtime performs), and governance checks. The tagged union
of the last two is realized by an ``is_gov`` attribute on every event
class rather than wrapper objects; the wire format keeps the explicit
``"gov"``/``"io"`` tag.

The directive roster, the capability atoms, and the mapping between
them are deliberately concentrated in ``_ROSTER`` below: it is the
versioned wire contract, and any future correction should touch this
file only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import ClassVar, Optional

# Answer kinds: the closed universe of event answer types, with the
# finite probe set used by bisimulation and safety checks.
ANSWER_BOOL = "bool"
ANSWER_INT = "int"
ANSWER_BYTES = "bytes"
ANSWER_UNIT = "unit"

PROBES = {
    ANSWER_BOOL: (False, True),
    ANSWER_INT: (0, 1, 2),
    ANSWER_BYTES: (b"", b"a"),
    ANSWER_UNIT: ((),),
}


class TrustLevel(IntEnum):
    """Total order; SYSTEM and STDLIB sit at the top and permit
    everything."""

    UNTRUSTED = 0
    TESTED = 1
    TRUSTED = 2
    STDLIB = 3
    SYSTEM = 4


class Capability(Enum):
    """The eight capability atoms; values are capability-tree paths."""

    LLM_CALL = "llm.call"
    MEMORY_OP = "memory.op"
    MACHINE_CALL = "machine.call"
    NETWORK_HTTP = "network.http"
    NETWORK_WS = "network.websocket"
    COMPUTE_EXEC = "compute.exec"
    FS_ACCESS = "fs.access"
    DB_ACCESS = "db.access"


class GovernanceStage(Enum):
    """The seven pipeline stages, in fixed order. The first four gate
    (a False answer denies); the last three only record."""

    TRUST_CHECK = 0
    PERMISSION_CHECK = 1
    PHASE_VALIDATION = 2
    PRE_HOOKS = 3
    GUARDRAILS = 4
    PROVENANCE_RECORD = 5
    EVENT_BROADCAST = 6

    @property
    def is_pre(self) -> bool:
        return self.value < 4


STAGE_WIRE_NAMES = {
    GovernanceStage.TRUST_CHECK: "TrustCheck",
    GovernanceStage.PERMISSION_CHECK: "PermissionCheck",
    GovernanceStage.PHASE_VALIDATION: "PhaseValidation",
    GovernanceStage.PRE_HOOKS: "PreHooks",
    GovernanceStage.GUARDRAILS: "Guardrails",
    GovernanceStage.PROVENANCE_RECORD: "ProvenanceRecord",
    GovernanceStage.EVENT_BROADCAST: "EventBroadcast",
}
STAGE_FROM_WIRE = {v: k for k, v in STAGE_WIRE_NAMES.items()}


# ---------------------------------------------------------------------------
# Memory sub-operations (shared by the MemoryOp directive and IoMemory)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MemRecall:
    key: str


@dataclass(frozen=True)
class MemStore:
    key: str
    value: int


# ---------------------------------------------------------------------------
# Directive events: what executor programs emit
# ---------------------------------------------------------------------------


class DirectiveEvent:
    is_gov: ClassVar[bool] = False
    answer_kind: ClassVar[str] = ANSWER_BYTES


@dataclass(frozen=True)
class LLMCall(DirectiveEvent):
    prompt: str


@dataclass(frozen=True)
class MemoryOp(DirectiveEvent):
    op: "MemRecall | MemStore"
    answer_kind: ClassVar[str] = ANSWER_INT


@dataclass(frozen=True)
class CallMachine(DirectiveEvent):
    machine: str
    argument: str


@dataclass(frozen=True)
class HTTPRequest(DirectiveEvent):
    url: str
    body: str


@dataclass(frozen=True)
class GraphQLRequest(DirectiveEvent):
    endpoint: str
    query: str


@dataclass(frozen=True)
class WebSocketOp(DirectiveEvent):
    op: str


@dataclass(frozen=True)
class MCPCall(DirectiveEvent):
    tool: str
    args: str


@dataclass(frozen=True)
class ExecCommand(DirectiveEvent):
    command: str


@dataclass(frozen=True)
class FileSystemOp(DirectiveEvent):
    op: str


@dataclass(frozen=True)
class DatabaseOp(DirectiveEvent):
    statement: str


@dataclass(frozen=True)
class Introspect(DirectiveEvent):
    machine: str


@dataclass(frozen=True)
class RecordStep(DirectiveEvent):
    tag: str
    answer_kind: ClassVar[str] = ANSWER_UNIT


@dataclass(frozen=True)
class Broadcast(DirectiveEvent):
    message: str
    answer_kind: ClassVar[str] = ANSWER_UNIT


@dataclass(frozen=True)
class EmitEvent(DirectiveEvent):
    name: str
    answer_kind: ClassVar[str] = ANSWER_UNIT


# The versioned roster: wire tag, class, required capability. Exactly
# 14 rows; the last three (capability None) are the observability
# directives. Everything else in this module derives from this table.
_ROSTER = (
    ("LLMCall", LLMCall, Capability.LLM_CALL),
    ("MemoryOp", MemoryOp, Capability.MEMORY_OP),
    ("CallMachine", CallMachine, Capability.MACHINE_CALL),
    ("HTTPRequest", HTTPRequest, Capability.NETWORK_HTTP),
    ("GraphQLRequest", GraphQLRequest, Capability.NETWORK_HTTP),
    ("WebSocketOp", WebSocketOp, Capability.NETWORK_WS),
    ("MCPCall", MCPCall, Capability.MACHINE_CALL),
    ("ExecCommand", ExecCommand, Capability.COMPUTE_EXEC),
    ("FileSystemOp", FileSystemOp, Capability.FS_ACCESS),
    ("DatabaseOp", DatabaseOp, Capability.DB_ACCESS),
    ("Introspect", Introspect, Capability.MACHINE_CALL),
    ("RecordStep", RecordStep, None),
    ("Broadcast", Broadcast, None),
    ("EmitEvent", EmitEvent, None),
)

DIRECTIVE_TYPES = tuple(cls for _, cls, _ in _ROSTER)
DIRECTIVE_WIRE_TAGS = {cls: tag for tag, cls, _ in _ROSTER}
_DIRECTIVE_FROM_TAG = {tag: cls for tag, cls, _ in _ROSTER}
_CAPABILITY_FOR = {cls: cap for _, cls, cap in _ROSTER}

OBSERVABILITY_TYPES = (RecordStep, Broadcast, EmitEvent)


def capability_for_directive(d: DirectiveEvent) -> Optional[Capability]:
    """Required capability atom, or None for the three observability
    directives. Total over the roster; anything else is a type error."""
    try:
        return _CAPABILITY_FOR[type(d)]
    except KeyError:
        raise TypeError(f"not a directive event: {d!r}") from None


# ---------------------------------------------------------------------------
# I/O events: performed effects, one constructor per directive family
# ---------------------------------------------------------------------------


class IoEvent:
    is_gov: ClassVar[bool] = False
    answer_kind: ClassVar[str] = ANSWER_BYTES


@dataclass(frozen=True)
class IoLlm(IoEvent):
    prompt: str


@dataclass(frozen=True)
class IoMemory(IoEvent):
    op: "MemRecall | MemStore"
    answer_kind: ClassVar[str] = ANSWER_INT


@dataclass(frozen=True)
class IoMachineCall(IoEvent):
    target: str
    payload: str


@dataclass(frozen=True)
class IoHttp(IoEvent):
    target: str
    payload: str


@dataclass(frozen=True)
class IoWebSocket(IoEvent):
    op: str


@dataclass(frozen=True)
class IoExec(IoEvent):
    command: str


@dataclass(frozen=True)
class IoFs(IoEvent):
    op: str


@dataclass(frozen=True)
class IoDb(IoEvent):
    statement: str


IO_EVENT_TYPES = (
    IoLlm,
    IoMemory,
    IoMachineCall,
    IoHttp,
    IoWebSocket,
    IoExec,
    IoFs,
    IoDb,
)


# ---------------------------------------------------------------------------
# Governance events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GovCheckEvent:
    """The left injection of the governed alphabet: a stage check whose
    answer is the check outcome."""

    stage: GovernanceStage
    is_gov: ClassVar[bool] = True
    answer_kind: ClassVar[str] = ANSWER_BOOL

    @property
    def stage_index(self) -> int:
        return self.stage.value


PRE_GATE_EVENTS = tuple(
    GovCheckEvent(s) for s in GovernanceStage if s.is_pre
)
POST_GATE_EVENTS = tuple(
    GovCheckEvent(s) for s in GovernanceStage if not s.is_pre
)


# ---------------------------------------------------------------------------
# Trust ceilings
# ---------------------------------------------------------------------------

_ALL_CAPS = frozenset(Capability)
_UNTRUSTED_CAPS = frozenset(
    {Capability.LLM_CALL, Capability.MEMORY_OP, Capability.MACHINE_CALL}
)
_TESTED_CAPS = _UNTRUSTED_CAPS | {Capability.COMPUTE_EXEC}
_TRUSTED_CAPS = _TESTED_CAPS | {Capability.NETWORK_HTTP, Capability.NETWORK_WS}

TRUST_CEILINGS = {
    TrustLevel.UNTRUSTED: _UNTRUSTED_CAPS,
    TrustLevel.TESTED: _TESTED_CAPS,
    TrustLevel.TRUSTED: _TRUSTED_CAPS,
    TrustLevel.STDLIB: _ALL_CAPS,
    TrustLevel.SYSTEM: _ALL_CAPS,
}


def trust_ceiling(t: TrustLevel) -> frozenset:
    return TRUST_CEILINGS[t]


def capability_allowed(t: TrustLevel, c: Capability) -> bool:
    return c in TRUST_CEILINGS[t]


# ---------------------------------------------------------------------------
# Capability tree
# ---------------------------------------------------------------------------


class UnknownPath(ValueError):
    """A declared capability path that resolves to no tree node."""


class CapabilityTree:
    """Rooted hierarchy of dotted capability names.

    Declaring a node grants the node and every descendant. The tree is
    a read-only value; ``without`` returns a pruned copy (used by bug
    injection).
    """

    def __init__(self, root: dict):
        self._root = root
        self._paths = frozenset(self._walk(root, ""))

    @staticmethod
    def _walk(node: dict, prefix: str):
        for name, child in node.items():
            path = f"{prefix}.{name}" if prefix else name
            yield path
            yield from CapabilityTree._walk(child, path)

    def paths(self) -> frozenset:
        return self._paths

    def has(self, path: str) -> bool:
        return path in self._paths

    def expand(self, declared, strict: bool = True) -> frozenset:
        """All capability atoms granted by the declared node paths.

        With ``strict`` a declared path missing from the tree raises
        UnknownPath; lenient mode grants nothing for it, which is how
        the interpreter treats a declaration the tree cannot resolve.
        """
        granted = set()
        for path in declared:
            if path not in self._paths:
                if strict:
                    raise UnknownPath(path)
                continue
            dotted = path + "."
            for p in self._paths:
                if p == path or p.startswith(dotted):
                    granted.add(p)
        return frozenset(c for c in Capability if c.value in granted)

    def without(self, path: str) -> "CapabilityTree":
        """Copy of the tree with one node (and its subtree) removed."""
        if path not in self._paths:
            raise UnknownPath(path)
        segs = path.split(".")

        def prune(node: dict, depth: int) -> dict:
            out = {}
            for name, child in node.items():
                if name == segs[depth]:
                    if depth == len(segs) - 1:
                        continue
                    out[name] = prune(child, depth + 1)
                else:
                    out[name] = child
            return out

        return CapabilityTree(prune(self._root, 0))

    def to_obj(self) -> dict:
        return json.loads(json.dumps(self._root))

    @classmethod
    def from_obj(cls, obj: dict) -> "CapabilityTree":
        if not isinstance(obj, dict):
            raise ValueError("capability tree must be a JSON object")
        return cls(json.loads(json.dumps(obj)))

    def __eq__(self, other):
        return isinstance(other, CapabilityTree) and self._root == other._root

    def __repr__(self):
        return f"CapabilityTree({sorted(self._paths)})"


DEFAULT_CAPABILITY_TREE = CapabilityTree(
    {
        "llm": {"call": {}},
        "memory": {"op": {}},
        "machine": {"call": {}},
        "network": {"http": {}, "websocket": {}},
        "compute": {"exec": {}},
        "fs": {"access": {}},
        "db": {"access": {}},
    }
)


def expand_capabilities(tree: CapabilityTree, declared) -> frozenset:
    """Strict expansion of declared paths to capability atoms."""
    return tree.expand(declared, strict=True)


# ---------------------------------------------------------------------------
# Wire codec
# ---------------------------------------------------------------------------


def _memop_to_obj(op) -> dict:
    if isinstance(op, MemRecall):
        return {"op": "recall", "key": op.key}
    return {"op": "store", "key": op.key, "value": op.value}


def _memop_from_obj(obj) -> "MemRecall | MemStore":
    if obj["op"] == "recall":
        return MemRecall(obj["key"])
    if obj["op"] == "store":
        return MemStore(obj["key"], int(obj["value"]))
    raise ValueError(f"unknown memory op {obj!r}")


def directive_to_obj(d: DirectiveEvent) -> dict:
    tag = DIRECTIVE_WIRE_TAGS[type(d)]
    if isinstance(d, MemoryOp):
        return {"type": tag, "memory": _memop_to_obj(d.op)}
    fields = {k: v for k, v in d.__dict__.items()}
    fields["type"] = tag
    return fields


def directive_from_obj(obj: dict) -> DirectiveEvent:
    try:
        tag = obj["type"]
        cls = _DIRECTIVE_FROM_TAG[tag]
    except KeyError as exc:
        raise ValueError(f"unknown directive object {obj!r}") from exc
    if cls is MemoryOp:
        return MemoryOp(_memop_from_obj(obj["memory"]))
    fields = {k: v for k, v in obj.items() if k != "type"}
    return cls(**fields)


def io_event_to_obj(ev: IoEvent) -> dict:
    out = {"type": type(ev).__name__}
    for k, v in ev.__dict__.items():
        out[k] = _memop_to_obj(v) if isinstance(v, (MemRecall, MemStore)) else v
    return out


def canonical_json_bytes(obj) -> bytes:
    """Canonical encoding: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def directive_payload_bytes(d: DirectiveEvent) -> bytes:
    """The canonical byte encoding of a directive, as hashed into the
    provenance chain."""
    return canonical_json_bytes(directive_to_obj(d))
