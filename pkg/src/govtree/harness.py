"""Differential fuzz harness and conformance suite.

Two interpreters, one contract: ``interpreter.interp_directive`` is
the production decision path; ``reference_interp`` below re-derives the
same behavior from the written tables, sharing type definitions only.
Seeded generators drive both over the same inputs; any mismatch in
verdict, denial reason, or hash is a disagreement worth a bug report.

Campaigns are reproducible byte for byte: the PRNG is xorshift64*
(shift triple 12/25/27, multiplier 2685821657736338717), and every
case is generated from a seed derived only from (campaign seed,
property index, case index), so a failure replays without regenerating
its predecessors.

Bug injection swaps the capability tree handed to the target — never
the reference — letting the suite demonstrate that a taxonomy hole
(the ``compute.exec`` node missing while the trust tables still grant
the atom) is caught by differential testing even though both
subsystems look locally correct.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Tuple

from .anf import (
    is_anf,
    normalize,
    normalize_random,
    random_morphism,
    reassoc_right,
    step_bound,
)
from .chain import chain_of, verify
from .directives import (
    CallMachine,
    Capability,
    DEFAULT_CAPABILITY_TREE,
    DIRECTIVE_TYPES,
    DatabaseOp,
    DirectiveEvent,
    ExecCommand,
    FileSystemOp,
    GraphQLRequest,
    HTTPRequest,
    Introspect,
    MCPCall,
    MemRecall,
    MemStore,
    MemoryOp,
    OBSERVABILITY_TYPES,
    TrustLevel,
    WebSocketOp,
    capability_for_directive,
)
from .governance import (
    GovernancePolicy,
    echo_handler,
    gov,
    interp,
    run_governed,
)
from .interpreter import (
    DenialReason,
    InterpreterState,
    StepDenied,
    StepOk,
    interp_directive,
    run_sequence,
)
from .itree import Defer, Ret, Vis, bind, eutt_fuel, sequence_program, trigger
from .itree import EuttVerdict
from .safety import Verdict, gov_safe_check, upward_closure_check

# ---------------------------------------------------------------------------
# PRNG
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_XS_MULT = 2685821657736338717
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Xorshift64Star:
    """xorshift64*: x ^= x>>12; x ^= x<<25; x ^= x>>27; out = x * M."""

    def __init__(self, seed: int):
        self.state = _splitmix64(seed & _MASK64) or _SPLITMIX_GAMMA

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * _XS_MULT) & _MASK64

    def randrange(self, n: int) -> int:
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.next_u64() % len(seq)]

    def chance(self, percent: int) -> bool:
        return self.next_u64() % 100 < percent

    def bytes(self, n: int) -> bytes:
        return bytes(self.next_u64() & 0xFF for _ in range(n))


def case_seed(seed: int, prop_index: int, case_index: int) -> int:
    """Per-case seed; replaying (seed, property, case) needs nothing
    else."""
    return _splitmix64(seed ^ _splitmix64(prop_index) ^ _splitmix64(case_index << 20))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

_WORDS = ("", "a", "do", "run", "x1", "key", "q")


def gen_string(rng) -> str:
    return rng.choice(_WORDS)


def gen_directive(rng) -> DirectiveEvent:
    cls = DIRECTIVE_TYPES[rng.randrange(len(DIRECTIVE_TYPES))]
    return _fill_directive(cls, rng)


def _fill_directive(cls, rng) -> DirectiveEvent:
    if cls is MemoryOp:
        key = f"k{rng.randrange(4)}"
        if rng.chance(50):
            return MemoryOp(MemRecall(key))
        return MemoryOp(MemStore(key, rng.randrange(10)))
    if cls in (CallMachine, HTTPRequest, GraphQLRequest, MCPCall):
        return cls(gen_string(rng), gen_string(rng))
    return cls(gen_string(rng))


def gen_declared(rng, tree=DEFAULT_CAPABILITY_TREE) -> frozenset:
    """Random antichain of tree node paths."""
    picked: List[str] = []
    for path in sorted(tree.paths()):
        if not rng.chance(35):
            continue
        if any(p == path or path.startswith(p + ".") or p.startswith(path + ".")
               for p in picked):
            continue
        picked.append(path)
    return frozenset(picked)


def gen_trust(rng) -> TrustLevel:
    return TrustLevel(rng.randrange(5))


def gen_state(rng) -> InterpreterState:
    return InterpreterState(
        trust=gen_trust(rng),
        declared=gen_declared(rng),
        tree=DEFAULT_CAPABILITY_TREE,
        prev_hash=rng.bytes(32),
    )


def gen_sequence(rng, max_len: int = 8) -> List[DirectiveEvent]:
    return [gen_directive(rng) for _ in range(rng.randrange(max_len + 1))]


def gen_policy(rng) -> GovernancePolicy:
    return GovernancePolicy(trust=gen_trust(rng), declared=gen_declared(rng))


def gen_program(rng, max_directives: int = 20):
    """Random executor program. Most are straight-line (shared
    structure); the rest branch on directive answers, which makes
    their governed interpretation genuinely tree-shaped."""
    ds = [gen_directive(rng) for _ in range(rng.randrange(max_directives + 1))]
    if rng.chance(70):
        return sequence_program(ds)
    n = len(ds)

    def build(i: int):
        if i >= n:
            return Ret(())
        d = ds[i]

        def k(x, i=i):
            j = i + (2 if x else 1)  # answers steer the path
            return Defer(lambda: build(j))

        return Vis(d, k)

    return build(0)


def gen_kont(rng, depth: int = 2) -> Callable:
    """Random continuation for monad-law checks: a deterministic
    function embedding its argument into a small program."""
    from .itree import Tau

    shape = [gen_directive(rng) for _ in range(rng.randrange(depth + 1))]
    tail_tau = rng.chance(30)

    def k(v):
        t = Ret(("leaf", str(v)))
        for d in reversed(shape):
            def kk(x, t_inner=t):
                return t_inner

            t = Vis(d, kk)
        return Tau(t) if tail_tau else t

    return k


def gen_tree(rng, depth: int = 3):
    """Random finite tree over directives with answer-dependent
    branching and silent steps."""
    from .itree import Tau

    roll = rng.randrange(10)
    if depth <= 0 or roll < 3:
        return Ret(rng.randrange(4))
    if roll < 5:
        return Tau(gen_tree(rng, depth - 1))
    d = gen_directive(rng)
    arms = [gen_tree(rng, depth - 1), gen_tree(rng, depth - 1)]

    def k(x, arms=arms):
        return arms[1 if x else 0]

    return Vis(d, k)


# ---------------------------------------------------------------------------
# Reference interpreter (independent decision path)
# ---------------------------------------------------------------------------

_REF_ALL = frozenset(
    {
        "llm.call",
        "memory.op",
        "machine.call",
        "network.http",
        "network.websocket",
        "compute.exec",
        "fs.access",
        "db.access",
    }
)
_REF_CEILING = {
    TrustLevel.UNTRUSTED: frozenset({"llm.call", "memory.op", "machine.call"}),
    TrustLevel.TESTED: frozenset(
        {"llm.call", "memory.op", "machine.call", "compute.exec"}
    ),
    TrustLevel.TRUSTED: frozenset(
        {
            "llm.call",
            "memory.op",
            "machine.call",
            "compute.exec",
            "network.http",
            "network.websocket",
        }
    ),
    TrustLevel.STDLIB: _REF_ALL,
    TrustLevel.SYSTEM: _REF_ALL,
}
_REF_DIRECTIVE_CAP = {
    "LLMCall": "llm.call",
    "MemoryOp": "memory.op",
    "CallMachine": "machine.call",
    "HTTPRequest": "network.http",
    "GraphQLRequest": "network.http",
    "WebSocketOp": "network.websocket",
    "MCPCall": "machine.call",
    "ExecCommand": "compute.exec",
    "FileSystemOp": "fs.access",
    "DatabaseOp": "db.access",
    "Introspect": "machine.call",
    "RecordStep": None,
    "Broadcast": None,
    "EmitEvent": None,
}


def _ref_encode(d: DirectiveEvent) -> bytes:
    name = type(d).__name__
    if name == "MemoryOp":
        op = d.op
        if isinstance(op, MemRecall):
            mem = {"op": "recall", "key": op.key}
        else:
            mem = {"op": "store", "key": op.key, "value": op.value}
        obj = {"type": name, "memory": mem}
    else:
        obj = dict(d.__dict__)
        obj["type"] = name
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def _ref_expand(tree_obj: dict, declared) -> frozenset:
    names = set()

    def walk(node, prefix, granted):
        for seg, child in node.items():
            path = f"{prefix}.{seg}" if prefix else seg
            g = granted or path in declared
            if g:
                names.add(path)
            walk(child, path, g)

    walk(tree_obj, "", False)
    return frozenset(names)


def reference_interp(s: InterpreterState, d: DirectiveEvent):
    """Transliteration of the written decision contract; shares no
    decision code with ``interpreter.interp_directive``."""
    cap = _REF_DIRECTIVE_CAP[type(d).__name__]
    if cap is not None:
        if cap not in _REF_CEILING[s.trust]:
            return StepDenied(DenialReason.CAPABILITY_NOT_PERMITTED)
        if s.trust not in (TrustLevel.STDLIB, TrustLevel.SYSTEM):
            if cap not in _ref_expand(s.tree.to_obj(), set(s.declared)):
                return StepDenied(DenialReason.CAPABILITY_NOT_DECLARED)
    digest = hashlib.sha256(s.prev_hash + _ref_encode(d)).digest()
    return StepOk(replace(s, prev_hash=digest))


def reference_run_sequence(s: InterpreterState, ds):
    steps = []
    for d in ds:
        r = reference_interp(s, d)
        steps.append(r)
        if isinstance(r, StepDenied):
            break
        s = r.state
    return s, steps


# ---------------------------------------------------------------------------
# Campaign
# ---------------------------------------------------------------------------


class BugMode(Enum):
    MISSING_EXEC_NODE = "missing-exec-node"


@dataclass(frozen=True)
class Disagreement:
    property: str
    case_index: int
    input: dict
    reference: str
    target: str

    def to_obj(self) -> dict:
        return {
            "property": self.property,
            "case_index": self.case_index,
            "input": self.input,
            "reference": self.reference,
            "target": self.target,
        }


PROPERTY_NAMES = (
    "trust_ceiling_agreement",
    "capability_monotonicity",
    "observability_always_allowed",
    "hash_chain_determinism",
    "denial_propagation",
    "system_stdlib_acceptance",
    "capability_mapping_consistency",
)


@dataclass(frozen=True)
class CampaignConfig:
    seed: int
    runs_per_property: int = 10_000
    properties: Tuple[str, ...] = PROPERTY_NAMES
    injected_bug: Optional[BugMode] = None


def _describe_step(r) -> str:
    if isinstance(r, StepOk):
        return f"ok:{r.state.prev_hash.hex()[:16]}"
    return f"denied:{r.reason.value}"


def _state_obj(s: InterpreterState) -> dict:
    return {
        "trust": s.trust.name.lower(),
        "declared": sorted(s.declared),
        "prev_hash": s.prev_hash.hex(),
    }


def _dir_obj(d: DirectiveEvent) -> dict:
    from .directives import directive_to_obj

    return directive_to_obj(d)


def _prop_trust_ceiling(rng, target_tree):
    s = gen_state(rng)
    d = gen_directive(rng)
    ref = reference_interp(s, d)
    tgt = interp_directive(replace(s, tree=target_tree), d)
    if _describe_step(ref) != _describe_step(tgt):
        return {
            "input": {"state": _state_obj(s), "directive": _dir_obj(d)},
            "reference": _describe_step(ref),
            "target": _describe_step(tgt),
        }
    return None


def _prop_monotonicity(rng, target_tree):
    s = gen_state(rng)
    d = gen_directive(rng)
    lo = TrustLevel(rng.randrange(5))
    hi = TrustLevel(rng.randrange(5))
    if lo > hi:
        lo, hi = hi, lo
    r_lo = interp_directive(replace(s, trust=lo, tree=target_tree), d)
    r_hi = interp_directive(replace(s, trust=hi, tree=target_tree), d)
    if isinstance(r_lo, StepOk) and not isinstance(r_hi, StepOk):
        return {
            "input": {
                "state": _state_obj(s),
                "directive": _dir_obj(d),
                "lo": lo.name,
                "hi": hi.name,
            },
            "reference": "ok at higher trust",
            "target": _describe_step(r_hi),
        }
    return None


def _prop_observability(rng, target_tree):
    s = replace(gen_state(rng), tree=target_tree)
    cls = OBSERVABILITY_TYPES[rng.randrange(3)]
    d = _fill_directive(cls, rng)
    tgt = interp_directive(s, d)
    if not isinstance(tgt, StepOk):
        return {
            "input": {"state": _state_obj(s), "directive": _dir_obj(d)},
            "reference": "ok",
            "target": _describe_step(tgt),
        }
    return None


def _prop_hash_determinism(rng, target_tree):
    s = gen_state(rng)
    ds = gen_sequence(rng, 6)
    s_t = replace(s, tree=target_tree)
    _, steps_a = run_sequence(s_t, ds)
    _, steps_b = run_sequence(s_t, ds)
    _, steps_ref = reference_run_sequence(s, ds)
    a = [_describe_step(r) for r in steps_a]
    b = [_describe_step(r) for r in steps_b]
    ref = [_describe_step(r) for r in steps_ref]
    if a != b or a != ref:
        return {
            "input": {"state": _state_obj(s), "sequence": [_dir_obj(d) for d in ds]},
            "reference": ";".join(ref),
            "target": f"{';'.join(a)} / rerun {';'.join(b)}",
        }
    return None


def _prop_denial_propagation(rng, target_tree):
    s = replace(gen_state(rng), tree=target_tree)
    ds = gen_sequence(rng, 8)
    _, steps = run_sequence(s, ds)
    _, ref_steps = reference_run_sequence(replace(s, tree=DEFAULT_CAPABILITY_TREE), ds)
    got = [_describe_step(r) for r in steps]
    # a denied step halts: everything before it is ok, nothing follows
    well_formed = all(isinstance(r, StepOk) for r in steps[:-1]) and (
        len(steps) == len(ds) or isinstance(steps[-1], StepDenied)
    )
    ref = [_describe_step(r) for r in ref_steps]
    if not well_formed or got != ref:
        return {
            "input": {"state": _state_obj(s), "sequence": [_dir_obj(d) for d in ds]},
            "reference": ";".join(ref),
            "target": ";".join(got),
        }
    return None


def _prop_system_stdlib(rng, target_tree):
    trust = TrustLevel.SYSTEM if rng.chance(50) else TrustLevel.STDLIB
    s = replace(gen_state(rng), trust=trust)
    d = gen_directive(rng)
    ref = reference_interp(s, d)
    tgt = interp_directive(replace(s, tree=target_tree), d)
    if not isinstance(tgt, StepOk) or not isinstance(ref, StepOk):
        return {
            "input": {"state": _state_obj(s), "directive": _dir_obj(d)},
            "reference": _describe_step(ref),
            "target": _describe_step(tgt),
        }
    return None


def _prop_mapping_consistency(rng, target_tree):
    for cls in DIRECTIVE_TYPES:
        d = _fill_directive(cls, rng)
        cap = capability_for_directive(d)
        ref_cap = _REF_DIRECTIVE_CAP[cls.__name__]
        got = cap.value if cap is not None else None
        if got != ref_cap:
            return {
                "input": {"directive": _dir_obj(d)},
                "reference": str(ref_cap),
                "target": str(got),
            }
    return None


_PROPERTIES = {
    "trust_ceiling_agreement": _prop_trust_ceiling,
    "capability_monotonicity": _prop_monotonicity,
    "observability_always_allowed": _prop_observability,
    "hash_chain_determinism": _prop_hash_determinism,
    "denial_propagation": _prop_denial_propagation,
    "system_stdlib_acceptance": _prop_system_stdlib,
    "capability_mapping_consistency": _prop_mapping_consistency,
}


def target_tree_for(bug: Optional[BugMode]):
    if bug is BugMode.MISSING_EXEC_NODE:
        return DEFAULT_CAPABILITY_TREE.without("compute.exec")
    return DEFAULT_CAPABILITY_TREE


@dataclass
class CampaignReport:
    seed: int
    runs_per_property: int
    injected_bug: Optional[str]
    properties: dict = field(default_factory=dict)  # name -> {runs, failures}

    def disagreements(self) -> List[Disagreement]:
        out = []
        for name in sorted(self.properties):
            out.extend(self.properties[name]["failures"])
        return out

    def to_obj(self) -> dict:
        return {
            "prng": {
                "algorithm": "xorshift64*",
                "shifts": [12, 25, 27],
                "multiplier": _XS_MULT,
            },
            "seed": self.seed,
            "runs_per_property": self.runs_per_property,
            "injected_bug": self.injected_bug,
            "properties": {
                name: {
                    "runs": rec["runs"],
                    "failures": [f.to_obj() for f in rec["failures"]],
                }
                for name, rec in sorted(self.properties.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=2)


def run_campaign(cfg: CampaignConfig, max_failures_per_property: int = 20
                 ) -> CampaignReport:
    tree = target_tree_for(cfg.injected_bug)
    report = CampaignReport(
        seed=cfg.seed,
        runs_per_property=cfg.runs_per_property,
        injected_bug=cfg.injected_bug.value if cfg.injected_bug else None,
    )
    for name in cfg.properties:
        prop = _PROPERTIES[name]
        pi = PROPERTY_NAMES.index(name)
        failures: List[Disagreement] = []
        for i in range(cfg.runs_per_property):
            rng = Xorshift64Star(case_seed(cfg.seed, pi, i))
            dis = prop(rng, tree)
            if dis is not None:
                failures.append(
                    Disagreement(
                        property=name,
                        case_index=i,
                        input=dis["input"],
                        reference=dis["reference"],
                        target=dis["target"],
                    )
                )
                if len(failures) >= max_failures_per_property:
                    break
        report.properties[name] = {
            "runs": cfg.runs_per_property,
            "failures": failures,
        }
    return report


def first_disagreement(seed: int, bug: Optional[BugMode],
                       property_name: str = "trust_ceiling_agreement",
                       max_cases: int = 10_000) -> Optional[int]:
    """Scan one property for its first disagreement; None if clean."""
    tree = target_tree_for(bug)
    prop = _PROPERTIES[property_name]
    pi = PROPERTY_NAMES.index(property_name)
    for i in range(max_cases):
        rng = Xorshift64Star(case_seed(seed, pi, i))
        if prop(rng, tree) is not None:
            return i
    return None


def replay_case(seed: int, property_name: str, case_index: int,
                bug: Optional[BugMode] = None) -> Optional[Disagreement]:
    """Regenerate exactly one campaign case."""
    tree = target_tree_for(bug)
    pi = PROPERTY_NAMES.index(property_name)
    rng = Xorshift64Star(case_seed(seed, pi, case_index))
    dis = _PROPERTIES[property_name](rng, tree)
    if dis is None:
        return None
    return Disagreement(property_name, case_index, dis["input"],
                        dis["reference"], dis["target"])


# ---------------------------------------------------------------------------
# Conformance suite: one deterministic check per implemented theorem
# ---------------------------------------------------------------------------


def trace_pipeline_ok(trace) -> bool:
    """Every directive's slice of the trace is 4 pre-stage checks, any
    number of I/O events, then 3 post-stage checks, in stage order."""
    per: dict = {}
    for kind, ev, idx in trace:
        per.setdefault(idx, []).append((kind, ev))
    for idx, events in per.items():
        if idx < 0:
            return False
        stages = [ev.stage.value for kind, ev in events if kind == "gov"]
        gov_positions = [i for i, (kind, _) in enumerate(events) if kind == "gov"]
        if stages != [0, 1, 2, 3, 4, 5, 6]:
            return False
        # io events sit strictly between PreHooks and Guardrails
        for i, (kind, _) in enumerate(events):
            if kind == "io" and not (gov_positions[3] < i < gov_positions[4]):
                return False
    return True


@dataclass(frozen=True)
class ConformanceResult:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteReport:
    results: List[ConformanceResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_obj(self) -> dict:
        return {
            "passed": self.passed,
            "results": [
                {"name": r.name, "passed": r.passed, "detail": r.detail}
                for r in self.results
            ],
        }


def _check_bare_io_not_safe():
    from .directives import IoHttp

    t = Vis(IoHttp("example", ""), Ret)
    v = gov_safe_check(False, t, 100)
    return v.verdict is Verdict.UNSAFE, f"verdict={v.verdict.value}"


def _check_governed_interp_safe():
    rng = Xorshift64Star(11)
    worst = None
    for _ in range(30):
        prog = gen_program(rng, 8)
        gh = gov(echo_handler, gen_policy(rng))
        v = gov_safe_check(False, interp(gh, prog), 4000)
        worst = v.verdict
        if v.is_unsafe:
            return False, "unsafe interpretation found"
    return True, f"30 programs, none unsafe (last verdict {worst.value})"


def _check_convergence():
    rng = Xorshift64Star(12)
    level0 = sequence_program([gen_directive(rng) for _ in range(3)])
    level1 = bind(level0, lambda _: trigger(CallMachine("child", "x")))
    level2 = bind(level1, lambda _: trigger(Introspect("child")))
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM))
    res = run_governed(gh, level2)
    ok = res.status == "done" and trace_pipeline_ok(res.trace)
    v = gov_safe_check(False, interp(gh, level2), 4000)
    return ok and not v.is_unsafe, f"pipeline shape at all levels, status={res.status}"


def _check_interp_bind():
    rng = Xorshift64Star(13)
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM))
    for _ in range(20):
        t = gen_tree(rng, 2)
        k = gen_kont(rng, 1)
        lhs = interp(gh, bind(t, k))
        rhs = bind(interp(gh, t), lambda x: interp(gh, k(x)))
        if eutt_fuel(lhs, rhs, 50_000) is EuttVerdict.DISTINCT:
            return False, "interp does not distribute over bind"
    return True, "20 random (t, k) instances"


def _check_monad_left_id():
    rng = Xorshift64Star(14)
    for _ in range(50):
        v = rng.randrange(10)
        k = gen_kont(rng, 2)
        if eutt_fuel(bind(Ret(v), k), k(v), 10_000) is EuttVerdict.DISTINCT:
            return False, "left identity failed"
    return True, "50 instances"


def _check_monad_right_id():
    rng = Xorshift64Star(15)
    for _ in range(50):
        t = gen_tree(rng, 3)
        if eutt_fuel(bind(t, Ret), t, 10_000) is EuttVerdict.DISTINCT:
            return False, "right identity failed"
    return True, "50 instances"


def _check_monad_assoc():
    rng = Xorshift64Star(16)
    for _ in range(50):
        t = gen_tree(rng, 2)
        k1 = gen_kont(rng, 1)
        k2 = gen_kont(rng, 1)
        lhs = bind(bind(t, k1), k2)
        rhs = bind(t, lambda a: bind(k1(a), k2))
        if eutt_fuel(lhs, rhs, 20_000) is EuttVerdict.DISTINCT:
            return False, "associativity failed"
    return True, "50 instances"


def _check_simulation_correct():
    from .regmachine import denote_program, random_config, random_program, rm_run

    rng = Xorshift64Star(17)
    for _ in range(100):
        p = random_program(rng)
        cfg = random_config(rng)
        fuel = rng.randrange(51)
        if denote_program(p, fuel, cfg.pc, cfg.regs) != rm_run(p, fuel, cfg):
            return False, "denotation mismatch"
    return True, "100 random programs"


def _check_translation_faithful():
    from .regmachine import (
        eval_mem,
        mem_corresponds,
        random_config,
        random_program,
        rm_run,
        store_of_regs,
        translate_program,
    )

    rng = Xorshift64Star(18)
    for _ in range(100):
        p = random_program(rng)
        cfg = random_config(rng)
        fuel = rng.randrange(51)
        store, unit = eval_mem(store_of_regs(cfg.regs), translate_program(p, fuel, cfg.pc))
        final = rm_run(p, fuel, cfg)
        if unit != () or not mem_corresponds(store, final.regs):
            return False, "store correspondence broken"
    return True, "100 random programs"


def _check_governed_turing():
    from .regmachine import random_config, random_program, translate_program

    rng = Xorshift64Star(19)
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM))
    for _ in range(30):
        p = random_program(rng)
        t = translate_program(p, rng.randrange(21), 0)
        if gov_safe_check(False, interp(gh, t), 4000).is_unsafe:
            return False, "translated program unsafe under governance"
    return True, "30 translated programs"


def _check_morphisms_governed():
    from .anf import compile_morphism

    rng = Xorshift64Star(20)
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM))
    for _ in range(30):
        m = random_morphism(rng, 6)
        t = compile_morphism(m)("x")
        if gov_safe_check(False, interp(gh, t), 4000).is_unsafe:
            return False, "morphism interpretation unsafe"
    return True, "30 random morphisms"


def _check_system_allows_all():
    rng = Xorshift64Star(21)
    s = InterpreterState(trust=TrustLevel.SYSTEM)
    for cls in DIRECTIVE_TYPES:
        if not isinstance(interp_directive(s, _fill_directive(cls, rng)), StepOk):
            return False, f"system denied {cls.__name__}"
    return True, "all 14 directives allowed"


def _check_untrusted_blocks():
    rng = Xorshift64Star(22)
    s = InterpreterState(
        trust=TrustLevel.UNTRUSTED, declared=frozenset(DEFAULT_CAPABILITY_TREE.paths())
    )
    blocked = (HTTPRequest, GraphQLRequest, WebSocketOp, ExecCommand, FileSystemOp, DatabaseOp)
    for cls in blocked:
        r = interp_directive(s, _fill_directive(cls, rng))
        if not (isinstance(r, StepDenied)
                and r.reason is DenialReason.CAPABILITY_NOT_PERMITTED):
            return False, f"untrusted not blocked on {cls.__name__}"
    return True, "http/ws/exec/fs/db all blocked"


def _check_monotonicity():
    from .directives import capability_allowed, trust_ceiling

    for lo in TrustLevel:
        for hi in TrustLevel:
            if lo > hi:
                continue
            if not trust_ceiling(lo) <= trust_ceiling(hi):
                return False, f"ceiling not monotone {lo}->{hi}"
            for c in Capability:
                if capability_allowed(lo, c) and not capability_allowed(hi, c):
                    return False, f"allowed not monotone on {c}"
    return True, "all 5x8 pairs, all orderings"


def _check_mapping_exhaustive():
    rng = Xorshift64Star(23)
    nones = []
    for cls in DIRECTIVE_TYPES:
        cap = capability_for_directive(_fill_directive(cls, rng))
        if cap is None:
            nones.append(cls)
    return (
        tuple(nones) == OBSERVABILITY_TYPES,
        "mapping total; None exactly on observability",
    )


def _check_chain_append():
    rng = Xorshift64Star(24)
    c = chain_of([rng.bytes(rng.randrange(20)) for _ in range(30)])
    more = c.append(b"tail")
    return verify(c).valid and verify(more).valid, "30 appends + 1 stay valid"


def _check_chain_tamper():
    from .chain import Chain, ChainEntry

    rng = Xorshift64Star(25)
    c = chain_of([rng.bytes(8) for _ in range(10)])
    for k in range(10):
        e = c[k]
        bad = bytes([e.payload[0] ^ 1]) + e.payload[1:]
        tampered = Chain(
            c.entries[:k] + (ChainEntry(bad, e.prev_hash, e.hash),) + c.entries[k + 1:]
        )
        v = verify(tampered)
        if v.valid or v.broken_at > k:
            return False, f"tamper at {k} not caught"
    return True, "every entry tamper caught at or before its index"


def _check_chain_prefix():
    rng = Xorshift64Star(26)
    c = chain_of([rng.bytes(6) for _ in range(20)])
    ok = all(verify(c.prefix(k)).valid for k in range(len(c) + 1))
    return ok, "all prefixes valid"


def _check_determinism():
    rng = Xorshift64Star(27)
    s = gen_state(rng)
    ds = gen_sequence(rng, 6)
    _, a = run_sequence(s, ds)
    _, b = run_sequence(s, ds)
    return [_describe_step(x) for x in a] == [_describe_step(x) for x in b], (
        "byte-identical reruns"
    )


def _check_ok_implies_safe():
    from .interpreter import bridge_ok_implies_safe

    rng = Xorshift64Star(28)
    for _ in range(25):
        if not bridge_ok_implies_safe(gen_state(rng), gen_directive(rng), fuel=2000):
            return False, "allowed directive produced unsafe tree"
    return True, "25 random (state, directive)"


def _check_denied_no_io():
    from .interpreter import bridge_denied_no_io

    rng = Xorshift64Star(29)
    checked = 0
    for _ in range(100):
        s, d = gen_state(rng), gen_directive(rng)
        if isinstance(interp_directive(s, d), StepDenied):
            checked += 1
            if not bridge_denied_no_io(s, d, fuel=2000):
                return False, "denied directive performed io"
    return checked > 0, f"{checked} denied instances, zero io each"


def _check_observability_allowed():
    rng = Xorshift64Star(30)
    for _ in range(30):
        s = gen_state(rng)
        for cls in OBSERVABILITY_TYPES:
            if not isinstance(interp_directive(s, _fill_directive(cls, rng)), StepOk):
                return False, f"{cls.__name__} denied"
    return True, "30 states x 3 directives"


def _check_denial_propagation():
    rng = Xorshift64Star(31)
    seen = 0
    for _ in range(50):
        s = gen_state(rng)
        ds = gen_sequence(rng, 8)
        _, steps = run_sequence(s, ds)
        if any(isinstance(r, StepDenied) for r in steps):
            seen += 1
            if not isinstance(steps[-1], StepDenied) or any(
                isinstance(r, StepDenied) for r in steps[:-1]
            ):
                return False, "denial did not halt the sequence"
    return seen > 0, f"{seen} sequences halted at first denial"


def _check_upward_closure():
    rng = Xorshift64Star(32)
    gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM))
    for _ in range(20):
        t = interp(gh, gen_program(rng, 5))
        if not upward_closure_check(t, 2000):
            return False, "upward closure violated"
    return True, "20 governed trees"


def _check_anf_termination():
    rng = Xorshift64Star(33)
    for _ in range(200):
        m = random_morphism(rng, 10)
        _, steps = normalize_random(m, rng)
        if steps > step_bound(m):
            return False, "rewrite exceeded measure bound"
    return True, "200 morphisms within weight*(depth+1)"


def _check_anf_canonical():
    rng = Xorshift64Star(34)
    for _ in range(200):
        if not is_anf(normalize(random_morphism(rng, 10))):
            return False, "normalize output not in normal form"
    return True, "200 morphisms"


def _check_anf_idempotent():
    rng = Xorshift64Star(35)
    for _ in range(200):
        m = normalize(random_morphism(rng, 10))
        if normalize(m) != m:
            return False, "normalize not idempotent"
    return True, "200 morphisms"


def _check_anf_confluence():
    rng = Xorshift64Star(36)
    for _ in range(200):
        m = random_morphism(rng, 10)
        a, _ = normalize_random(m, rng)
        b, _ = normalize_random(m, rng)
        if reassoc_right(a) != reassoc_right(b) or reassoc_right(a) != normalize(m):
            return False, "rule orders disagree"
    return True, "200 morphisms, two orders each"


CONFORMANCE_CHECKS = (
    ("bare_io_not_safe", _check_bare_io_not_safe),
    ("governed_interp_safe", _check_governed_interp_safe),
    ("governance_convergence", _check_convergence),
    ("interp_bind", _check_interp_bind),
    ("monad_left_identity", _check_monad_left_id),
    ("monad_right_identity", _check_monad_right_id),
    ("monad_associativity", _check_monad_assoc),
    ("simulation_correct", _check_simulation_correct),
    ("translation_faithful", _check_translation_faithful),
    ("governed_turing_completeness", _check_governed_turing),
    ("composed_morphisms_governed", _check_morphisms_governed),
    ("upward_closure", _check_upward_closure),
    ("system_allows_all", _check_system_allows_all),
    ("untrusted_blocks_http", _check_untrusted_blocks),
    ("capability_allowed_monotone", _check_monotonicity),
    ("capability_mapping_exhaustive", _check_mapping_exhaustive),
    ("chain_valid_append", _check_chain_append),
    ("chain_tamper_detected", _check_chain_tamper),
    ("chain_prefix_closed", _check_chain_prefix),
    ("interp_determinism", _check_determinism),
    ("interp_directive_ok_implies_gov_safe", _check_ok_implies_safe),
    ("interp_directive_denied_no_io", _check_denied_no_io),
    ("observability_always_allowed", _check_observability_allowed),
    ("denial_propagation", _check_denial_propagation),
    ("anf_termination", _check_anf_termination),
    ("anf_canonical", _check_anf_canonical),
    ("anf_idempotent", _check_anf_idempotent),
    ("anf_confluence", _check_anf_confluence),
)


def conformance_suite() -> SuiteReport:
    """Run every named check; each row corresponds to one proved
    property this artifact reproduces as a test."""
    results = []
    for name, fn in CONFORMANCE_CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"exception: {exc!r}"
        results.append(ConformanceResult(name, passed, detail))
    return SuiteReport(results)
