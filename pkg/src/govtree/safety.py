"""Fuel-bounded checker for the permission-flag safety relation.

The relation over governed trees, indexed by a boolean flag:

* Ret is safe under any flag;
* Tau recurses under the same flag;
* a governance check recurses under flag True, for both answers;
* an I/O node is safe only under flag True — under False it is the
  violation.

There is deliberately no way to lower the flag: once any governance
event has been traversed, I/O on that path stays legal. The checker
probes continuations over the finite per-answer-kind probe sets
(exact for boolean governance answers, an approximation for I/O), and
shares one fuel budget across all branches. UNSAFE is definitive;
SAFE means every node reached within fuel satisfied the relation;
EXHAUSTED is no verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ._backend import kernel as _k
from .directives import PROBES
from .itree import Fuel, Tree


class Verdict(Enum):
    SAFE = "safe"
    UNSAFE = "unsafe"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SafetyVerdict:
    verdict: Verdict
    visited: int
    offending_event: Optional[object] = None

    @property
    def is_unsafe(self) -> bool:
        return self.verdict is Verdict.UNSAFE

    @property
    def is_safe(self) -> bool:
        return self.verdict is Verdict.SAFE


def gov_safe_check(flag: bool, t: Tree, fuel: Fuel,
                   probes=None) -> SafetyVerdict:
    kind, visited, ev = _k.gov_safe_check(flag, t, fuel, probes or PROBES)
    return SafetyVerdict(Verdict(kind), visited, ev)


def upward_closure_check(t: Tree, fuel: Fuel) -> bool:
    """A tree with no unflagged I/O is also fine once I/O is permitted:
    check(False) not UNSAFE must imply check(True) not UNSAFE."""
    lo = gov_safe_check(False, t, fuel)
    if lo.is_unsafe:
        return True  # vacuous
    return not gov_safe_check(True, t, fuel).is_unsafe
