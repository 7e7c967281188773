"""The per-directive governance decision over an explicit state
record.

``interp_directive`` is the single-step decision the whole system
refines: look up the directive's capability, check the trust ceiling,
check the declared-capability expansion, and on success advance the
provenance hash over the directive's canonical encoding. Denial is a
value, never an exception, and leaves the state (including the hash)
untouched. Trust is checked before declaration so denial reasons are
deterministic; SYSTEM and STDLIB are top and skip the declaration
check. Declared paths the tree cannot resolve grant nothing.

Bridge checks connect this decision function to the pipeline semantics:
an allowed directive's governed interpretation is never unsafe, and a
denied directive's governed trace performs no I/O.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, List, Tuple, Union

from . import chain as chain_mod
from .directives import (
    CapabilityTree,
    DEFAULT_CAPABILITY_TREE,
    DirectiveEvent,
    TrustLevel,
    capability_for_directive,
    directive_payload_bytes,
    trust_ceiling,
)
from .governance import (
    GovernancePolicy,
    GovernedHandler,
    echo_handler,
    gov,
    interp,
    run_governed,
)
from .itree import trigger
from .safety import gov_safe_check


@dataclass(frozen=True)
class InterpreterState:
    trust: TrustLevel
    declared: frozenset = frozenset()
    tree: CapabilityTree = DEFAULT_CAPABILITY_TREE
    prev_hash: bytes = chain_mod.GENESIS


class DenialReason(Enum):
    CAPABILITY_NOT_PERMITTED = "capability_not_permitted"
    CAPABILITY_NOT_DECLARED = "capability_not_declared"
    PHASE_REJECTED = "phase_rejected"  # reachable only via scripted stages


@dataclass(frozen=True)
class StepOk:
    state: InterpreterState


@dataclass(frozen=True)
class StepDenied:
    reason: DenialReason


StepResult = Union[StepOk, StepDenied]


def interp_directive(s: InterpreterState, d: DirectiveEvent) -> StepResult:
    cap = capability_for_directive(d)
    if cap is not None:
        if cap not in trust_ceiling(s.trust):
            return StepDenied(DenialReason.CAPABILITY_NOT_PERMITTED)
        if s.trust < TrustLevel.STDLIB and cap not in s.tree.expand(
            s.declared, strict=False
        ):
            return StepDenied(DenialReason.CAPABILITY_NOT_DECLARED)
    new_hash = chain_mod.link_hash(s.prev_hash, directive_payload_bytes(d))
    return StepOk(replace(s, prev_hash=new_hash))


def run_sequence(
    s: InterpreterState, ds: Iterable[DirectiveEvent]
) -> Tuple[InterpreterState, List[StepResult]]:
    """Fold the decision over a directive list; the first denial halts
    the sequence. One step entry per attempted directive."""
    steps: List[StepResult] = []
    for d in ds:
        r = interp_directive(s, d)
        steps.append(r)
        if isinstance(r, StepDenied):
            break
        s = r.state
    return s, steps


def policy_for_state(s: InterpreterState) -> GovernancePolicy:
    return GovernancePolicy(trust=s.trust, declared=s.declared, tree=s.tree)


def governed_for_state(s: InterpreterState, handler=echo_handler) -> GovernedHandler:
    return gov(handler, policy_for_state(s))


def bridge_ok_implies_safe(
    s: InterpreterState, d: DirectiveEvent, handler=echo_handler,
    fuel: int = 10_000
) -> bool:
    """If the single-step decision allows the directive, the governed
    interpretation of the singleton program must not be unsafe."""
    if not isinstance(interp_directive(s, d), StepOk):
        return True  # vacuous
    gh = governed_for_state(s, handler)
    verdict = gov_safe_check(False, interp(gh, trigger(d)), fuel)
    return not verdict.is_unsafe


def bridge_denied_no_io(
    s: InterpreterState, d: DirectiveEvent, handler=echo_handler,
    fuel: int = 10_000
) -> bool:
    """If the single-step decision denies the directive, the governed trace
    under the canonical answerer performs zero I/O events."""
    if not isinstance(interp_directive(s, d), StepDenied):
        return True  # vacuous
    gh = governed_for_state(s, handler)
    result = run_governed(gh, trigger(d), fuel=fuel)
    return len(result.trace.io_entries()) == 0


# ---------------------------------------------------------------------------
# Wire formats
# ---------------------------------------------------------------------------


def step_report_lines(steps: Iterable[StepResult]) -> str:
    """JSON lines, one StepResult each, hashes in hex."""
    out = []
    for r in steps:
        if isinstance(r, StepOk):
            out.append(json.dumps({"result": "ok", "hash": r.state.prev_hash.hex()}))
        else:
            out.append(json.dumps({"result": "denied", "reason": r.reason.value}))
    return "".join(line + "\n" for line in out)


def parse_directive_sequence(text: str) -> List[DirectiveEvent]:
    """JSON array of tagged directive objects."""
    from .directives import directive_from_obj

    obj = json.loads(text)
    if not isinstance(obj, list):
        raise ValueError("directive sequence file must be a JSON array")
    return [directive_from_obj(o) for o in obj]
