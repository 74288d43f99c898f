"""Run the bundled pattern corpus over the fixture pairs and print a count table.

    python3 scripts/mine_fixtures.py [--pairs fixtures/pairs] [--check fixtures/expected_counts.json]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from changeminer.miner import default_analyzers, run_pipeline, walk_files
from changeminer.patterns import bundled_patterns

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pairs", default=str(ROOT / "fixtures" / "pairs"))
    p.add_argument("--check", metavar="JSON", help="expected per-pair counts; exit 1 on any mismatch")
    args = p.parse_args()

    patterns = bundled_patterns()
    report = run_pipeline(walk_files(args.pairs), default_analyzers(patterns), patterns)
    observed = {}
    width = max([len(c.commit_id) for c in report.commits] + [4])
    for ce in report.commits:
        counts: dict[str, int] = {}
        ops = 0
        for fe in ce.files:
            ops += len(fe.operations)
            for inst in fe.instances:
                counts[inst.pattern] = counts.get(inst.pattern, 0) + 1
        observed[ce.commit_id] = counts
        shown = ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "-"
        print(f"{ce.commit_id:<{width}}  {ops:3d} ops  {shown}")
    print(f"{'total':<{width}}  {report.frequency.total_operations:3d} ops  "
          f"{sum(report.pattern_totals.values())} instances")

    if args.check:
        expected = json.loads(Path(args.check).read_text())
        bad = sorted(k for k in expected.keys() | observed.keys() if expected.get(k, {}) != observed.get(k, {}))
        for k in bad:
            print(f"MISMATCH {k}: expected {expected.get(k, {})}, observed {observed.get(k, {})}", file=sys.stderr)
        return 1 if bad else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
