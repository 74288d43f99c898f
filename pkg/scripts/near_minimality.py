"""Enumerate tiny tree pairs and compare edit-script length with the optimum.

    python3 scripts/near_minimality.py --max-nodes 4
    python3 scripts/near_minimality.py --max-nodes 6 --shard 3/64

Every ordered tree with up to ``--max-nodes`` nodes over a three-kind alphabet
is paired with every other one. A pair passes when the differ's script is at
most ``--slack`` steps longer than the shortest INS/DEL/MOV script.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections import Counter

from changeminer.minimality import enumerate_trees, kind_lower_bound, optimal_length, to_ast
from changeminer.treediff import diff_trees


def run(max_nodes: int, slack: int, shard: int, shards: int, progress: bool) -> dict:
    trees = enumerate_trees(max_nodes)
    asts = [to_ast(t) for t in trees]
    excess: Counter = Counter()
    failures = []
    pairs = 0
    t0 = time.perf_counter()
    for i in range(shard, len(trees), shards):
        a = trees[i]
        for j, b in enumerate(trees):
            n = len(diff_trees(asts[i], asts[j]).operations)
            pairs += 1
            if n - slack <= kind_lower_bound((a,), (b,)):
                excess["<=slack (kind bound)"] += 1
                continue
            best = optimal_length(a, b)
            excess[n - best] += 1
            if n > best + slack:
                failures.append({"src": a, "dst": b, "script": n, "optimal": best})
        if progress and (i // shards) % 200 == 0:
            print(f"  src {i}/{len(trees)}  pairs {pairs}  {time.perf_counter() - t0:.0f}s", file=sys.stderr)
    return {
        "max_nodes": max_nodes,
        "trees": len(trees),
        "shard": f"{shard}/{shards}",
        "pairs": pairs,
        "failures": len(failures),
        "failure_examples": failures[:10],
        "excess_histogram": {str(k): v for k, v in sorted(excess.items(), key=str)},
        "seconds": round(time.perf_counter() - t0, 1),
    }


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-nodes", type=int, default=4)
    p.add_argument("--slack", type=int, default=2)
    p.add_argument("--shard", default="0/1", help="i/n: only source trees with index = i mod n")
    p.add_argument("--progress", action="store_true")
    args = p.parse_args()
    shard, shards = map(int, args.shard.split("/"))
    result = run(args.max_nodes, args.slack, shard, shards, args.progress)
    print(json.dumps(result, indent=2))
    return 0 if result["failures"] == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
