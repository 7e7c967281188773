#!/usr/bin/env python3
"""Compare the pure-Python and compiled kernels on the hot paths.

Each workload runs in a fresh interpreter with GOVTREE_BACKEND forced,
so both backends execute identical code above the kernel layer.

    python3 benchmarks/backend_bench.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, statistics, sys, time
from govtree import BACKEND
from govtree.cli import _bench_once
from govtree.governance import GovernancePolicy, echo_handler, gov, interp
from govtree.directives import TrustLevel
from govtree.harness import Xorshift64Star, gen_program, gen_tree, gen_kont
from govtree.itree import bind, eutt_fuel, Ret
from govtree.safety import gov_safe_check

quick = bool(int(sys.argv[1]))
out = {"backend": BACKEND}

# 1. fuel-bounded safety checking over governed interpretations
n = 300 if quick else 2000
rng = Xorshift64Star(42)
gh = gov(echo_handler, GovernancePolicy(trust=TrustLevel.SYSTEM))
progs = [gen_program(rng, 20) for _ in range(n)]
t0 = time.perf_counter()
visited = 0
for p in progs:
    v = gov_safe_check(False, interp(gh, p), 10_000)
    visited += v.visited
el = time.perf_counter() - t0
out["safety_check"] = {"programs": n, "seconds": round(el, 3),
                       "visits_per_sec": round(visited / el)}

# 2. governed vs direct trace execution
g, d = _bench_once(2000 if quick else 10_000, 10 if quick else 30, 3)
out["trace_exec"] = {
    "governed_us": round(statistics.median(g) * 1e6, 3),
    "direct_us": round(statistics.median(d) * 1e6, 3),
}

# 3. bisimulation batches (monad laws)
n = 200 if quick else 1000
rng = Xorshift64Star(7)
t0 = time.perf_counter()
for _ in range(n):
    t = gen_tree(rng, 2)
    k1 = gen_kont(rng, 1)
    k2 = gen_kont(rng, 1)
    eutt_fuel(bind(bind(t, k1), k2), bind(t, lambda a: bind(k1(a), k2)), 40_000)
out["eutt"] = {"triples": n, "seconds": round(time.perf_counter() - t0, 3)}

print(json.dumps(out))
"""


def run(backend: str, quick: bool) -> dict:
    env = dict(os.environ, GOVTREE_BACKEND=backend)
    res = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(int(quick))],
        capture_output=True,
        text=True,
        env=env,
    )
    if res.returncode != 0:
        raise SystemExit(f"{backend} run failed:\n{res.stderr}")
    return json.loads(res.stdout)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()

    rows = {}
    for backend in ("pure", "native"):
        try:
            rows[backend] = run(backend, args.quick)
        except SystemExit as exc:
            print(exc)
    if "native" not in rows:
        print("native kernel unavailable; nothing to compare")
        return 1

    pure, native = rows["pure"], rows["native"]
    print(f"{'workload':<28}{'pure':>14}{'native':>14}{'speedup':>10}")
    p, n = pure["safety_check"], native["safety_check"]
    print(
        f"{'safety check (s)':<28}{p['seconds']:>14}{n['seconds']:>14}"
        f"{p['seconds'] / n['seconds']:>10.2f}"
    )
    p, n = pure["trace_exec"], native["trace_exec"]
    print(
        f"{'governed trace (us/dir)':<28}{p['governed_us']:>14}{n['governed_us']:>14}"
        f"{p['governed_us'] / n['governed_us']:>10.2f}"
    )
    print(
        f"{'direct trace (us/dir)':<28}{p['direct_us']:>14}{n['direct_us']:>14}"
        f"{p['direct_us'] / n['direct_us']:>10.2f}"
    )
    p, n = pure["eutt"], native["eutt"]
    print(
        f"{'bisimulation batch (s)':<28}{p['seconds']:>14}{n['seconds']:>14}"
        f"{p['seconds'] / n['seconds']:>10.2f}"
    )
    for b in ("pure", "native"):
        te = rows[b]["trace_exec"]
        print(f"{b}: governance overhead ratio "
              f"{te['governed_us'] / te['direct_us']:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
