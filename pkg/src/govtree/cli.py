"""Operator-facing command surface.

Exit codes are a stable contract: 0 success/clean, 1 property
violation / denial / tamper, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

from . import chain as chain_mod
from ._backend import BACKEND
from .anf import MorphismSyntaxError, from_sexpr, normalize, to_sexpr
from .directives import CapabilityTree, DEFAULT_CAPABILITY_TREE, TrustLevel
from .governance import (
    DEFAULT_FUEL,
    GovernancePolicy,
    PolicyAnswerer,
    echo_handler,
    gov,
    interp,
    run_governed,
    run_ungoverned,
)
from .harness import BugMode, CampaignConfig, conformance_suite, run_campaign
from .interpreter import (
    InterpreterState,
    StepOk,
    parse_directive_sequence,
    run_sequence,
    step_report_lines,
)
from .itree import sequence_program
from .safety import gov_safe_check

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc


def _usage_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _parse_policy(text: str) -> GovernancePolicy:
    obj = json.loads(text)
    trust = TrustLevel[obj.get("trust", "untrusted").upper()]
    declared = frozenset(obj.get("declared", []))
    tree = (
        CapabilityTree.from_obj(obj["tree"])
        if "tree" in obj
        else DEFAULT_CAPABILITY_TREE
    )
    return GovernancePolicy(
        trust=trust,
        declared=declared,
        tree=tree,
        phase_ok=bool(obj.get("phase_ok", True)),
        prehooks_ok=bool(obj.get("prehooks_ok", True)),
    )


def cmd_run(args) -> int:
    try:
        directives = parse_directive_sequence(_read(args.program))
        policy = _parse_policy(_read(args.policy))
    except (ValueError, KeyError) as exc:
        return _usage_error(f"malformed input: {exc}")

    program = sequence_program(directives)
    gh = gov(echo_handler, policy)
    result = run_governed(gh, program, fuel=args.fuel)

    state = InterpreterState(
        trust=policy.trust, declared=policy.declared, tree=policy.tree
    )
    _, steps = run_sequence(state, directives)
    # provenance chain over the canonical payloads of the allowed directives
    from .directives import directive_payload_bytes

    c = chain_mod.chain_of(
        directive_payload_bytes(d)
        for d, r in zip(directives, steps)
        if isinstance(r, StepOk)
    )

    if args.trace:
        Path(args.trace).write_text(result.trace.to_jsonl())
        Path(args.trace + ".chain").write_text(chain_mod.to_jsonl(c))
        Path(args.trace + ".steps").write_text(step_report_lines(steps))

    if result.denied:
        from .directives import STAGE_WIRE_NAMES

        stage = STAGE_WIRE_NAMES[result.denied_stage]
        print(f"Denied at {stage} (directive {result.directive_index})")
        return EXIT_VIOLATION

    verdict = gov_safe_check(False, interp(gh, program), args.fuel)
    print(verdict.verdict.value.capitalize())
    return EXIT_OK


def cmd_fuzz(args) -> int:
    bug = None
    if args.inject:
        try:
            bug = BugMode(args.inject)
        except ValueError:
            return _usage_error(f"unknown bug mode {args.inject!r}")
    cfg = CampaignConfig(
        seed=args.seed, runs_per_property=args.runs, injected_bug=bug
    )
    report = run_campaign(cfg)
    print(report.to_json())
    disagreements = report.disagreements()
    if disagreements:
        first = disagreements[0]
        print(
            f"replay: seed={args.seed} property={first.property} "
            f"case={first.case_index}",
            file=sys.stderr,
        )
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_conformance(_args) -> int:
    report = conformance_suite()
    for r in report.results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.name}: {r.detail}")
    print(f"{sum(r.passed for r in report.results)}/{len(report.results)} passed")
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_normalize(args) -> int:
    try:
        m = from_sexpr(_read(args.file))
    except MorphismSyntaxError as exc:
        return _usage_error(f"bad morphism: {exc}")
    print(to_sexpr(normalize(m)))
    return EXIT_OK


def cmd_compile_rm(args) -> int:
    from .regmachine import BadProgram, load_program, translate_cfg
    from .directives import io_event_to_obj

    try:
        p = load_program(_read(args.file))
    except (ValueError, KeyError, BadProgram) as exc:
        return _usage_error(f"bad register program: {exc}")

    events = []
    from .itree import observe
    from ._backend import kernel as _k

    store: dict = {}
    t = translate_cfg(p, args.fuel, 0)
    while True:
        n = observe(t)
        if type(n) is _k.Ret:
            final_pc = n.value
            break
        if type(n) is _k.Tau:
            t = n.child
            continue
        ev = n.event
        events.append(ev)
        op = ev.op
        from .directives import MemRecall

        if isinstance(op, MemRecall):
            t = n.k(store.get(op.key, 0))
        else:
            store[op.key] = op.value
            t = n.k(op.value)

    for ev in events:
        print(json.dumps({"directive": "MemoryOp", **io_event_to_obj(ev)}))
    print(json.dumps({"final_pc": final_pc, "registers": store}, sort_keys=True))
    return EXIT_OK


def cmd_chain_verify(args) -> int:
    try:
        c = chain_mod.from_jsonl(_read(args.file))
    except (ValueError, KeyError) as exc:
        return _usage_error(f"bad chain file: {exc}")
    verdict = chain_mod.verify(c)
    if verdict.valid:
        print(f"Valid ({len(c)} entries)")
        return EXIT_OK
    print(f"BrokenAt({verdict.broken_at})")
    return EXIT_VIOLATION


def _bench_once(n_directives: int, iterations: int, warmup: int):
    import gc

    from .harness import Xorshift64Star, gen_directive

    rng = Xorshift64Star(97)
    directives = [gen_directive(rng) for _ in range(n_directives)]
    program = sequence_program(directives)
    policy = GovernancePolicy(trust=TrustLevel.SYSTEM)
    gh = gov(echo_handler, policy)
    env = PolicyAnswerer(policy)
    fuel = 40 * n_directives + 100

    governed_times = []
    direct_times = []
    # isolate the measurement from ambient heap state: collections
    # triggered inside a phase must not rescan unrelated long-lived
    # objects, and each phase pays for its own garbage only
    gc.collect()
    gc.freeze()
    try:
        for i in range(warmup + iterations):
            gc.collect()
            t0 = time.perf_counter()
            res = run_governed(gh, program, env=env, fuel=fuel)
            t1 = time.perf_counter()
            assert res.status == "done", res.status
            del res
            gc.collect()
            t2 = time.perf_counter()
            res2 = run_ungoverned(program, echo_handler, env, fuel=fuel)
            t3 = time.perf_counter()
            assert res2.status == "done", res2.status
            del res2
            if i >= warmup:
                governed_times.append((t1 - t0) / n_directives)
                direct_times.append((t3 - t2) / n_directives)
    finally:
        gc.unfreeze()
    return governed_times, direct_times


def cmd_bench(args) -> int:
    governed, direct = _bench_once(args.directives, args.iterations, args.warmup)
    g_med = statistics.median(governed)
    d_med = statistics.median(direct)
    g_mean = statistics.fmean(governed)
    d_mean = statistics.fmean(direct)
    ratio = g_med / d_med if d_med else float("inf")
    print(f"backend: {BACKEND}")
    print(f"directives per program: {args.directives}, iterations: "
          f"{args.iterations} (+{args.warmup} warmup)")
    print(f"governed   per-directive: median {g_med * 1e6:.3f} us, "
          f"mean {g_mean * 1e6:.3f} us")
    print(f"ungoverned per-directive: median {d_med * 1e6:.3f} us, "
          f"mean {d_mean * 1e6:.3f} us")
    print(f"governed/ungoverned median ratio: {ratio:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="govtree",
        description="Governed directive interpreter and its verification tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="interpret a directive program under a policy")
    p.add_argument("program", help="JSON array of tagged directive objects")
    p.add_argument("policy", help="JSON policy file")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--trace", help="write the event trace (JSONL) here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("fuzz", help="differential campaign against the reference")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--inject", help="bug mode, e.g. missing-exec-node")
    p.set_defaults(fn=cmd_fuzz)

    p = sub.add_parser("conformance", help="one deterministic check per theorem")
    p.set_defaults(fn=cmd_conformance)

    p = sub.add_parser("normalize", help="rewrite a morphism to normal form")
    p.add_argument("file", help="s-expression morphism file")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("compile-rm", help="translate and run a register program")
    p.add_argument("file", help="JSON register program")
    p.add_argument("--fuel", type=int, default=1000)
    p.set_defaults(fn=cmd_compile_rm)

    p = sub.add_parser("chain", help="provenance chain tools")
    chain_sub = p.add_subparsers(dest="chain_command", required=True)
    pv = chain_sub.add_parser("verify", help="verify a chain file")
    pv.add_argument("file")
    pv.set_defaults(fn=cmd_chain_verify)

    p = sub.add_parser("bench", help="governed vs ungoverned per-directive latency")
    p.add_argument("--directives", type=int, default=10_000)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--warmup", type=int, default=5)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except json.JSONDecodeError as exc:
        return _usage_error(f"bad JSON: {exc}")
    except (ValueError, OSError) as exc:
        return _usage_error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
