"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also echoed to the terminal when output is captured.
"""

import json
import os
import random
import time
from pathlib import Path

import pytest

from changeminer.ast import same_tree
from changeminer.cli import main as cli_main
from changeminer.java import SourceFile
from changeminer.matcher import brute_force_match, match_pattern
from changeminer.miner import default_analyzers, run_pipeline, walk_files
from changeminer.minimality import enumerate_trees, kind_lower_bound, optimal_length, to_ast
from changeminer.patterns import bundled_patterns, parse_pattern
from changeminer.report import FrequencyReport
from changeminer.treediff import apply_script, diff, diff_trees
from repos import three_commit_repo
from strategies import random_pair, random_pattern, small_diff_case

ROOT = Path(__file__).resolve().parents[1]
PAIRS = ROOT / "fixtures" / "pairs"
EXPECTED = json.loads((ROOT / "fixtures" / "expected_counts.json").read_text())

# tolerances
GOLDEN_SECONDS = 5.0
SOUNDNESS_TRIALS, SOUNDNESS_SECONDS = 1000, 60.0
ORACLE_TRIALS, ORACLE_SECONDS = 500, 60.0
MIN_SLACK = 2
STATED_MAX_NODES = 6
EXHAUSTIVE_MAX_NODES = 4
SAMPLE_MAX_NODES, SAMPLE_PAIRS = 6, 2000

ADD_IF_RETURN_XML = """<pattern>
    <entity id="1" type="Return">
        <parent parentId="2" distance="2" />
    </entity>
    <entity id="2" type="If" />
    <action entityId="1" type="INS" />
    <action entityId="2" type="INS" />
</pattern>"""

RETURN_ZERO = """<pattern>
    <entity id="1" type="Return" value="0">
        <parent parentId="2" distance="2" />
    </entity>
    <entity id="2" type="If" />
    <action entityId="1" type="INS" />
    <action entityId="2" type="INS" />
</pattern>"""


@pytest.fixture
def verdict(capsys):
    def emit(criterion: str, ok, detail: str):
        status = "NOT RUN" if ok is None else ("PASS" if ok else "FAIL")
        with capsys.disabled():
            print(f"\nACCEPTANCE {criterion}: {status} | {detail}")
        return ok

    return emit


def pair_diff(name):
    s, t = sorted((PAIRS / name).iterdir())
    return diff(SourceFile(s.name, s.read_bytes()), SourceFile(t.name, t.read_bytes()))


def test_golden_snippet_corpus(verdict):
    t0 = time.perf_counter()
    patterns = {p.name: p for p in bundled_patterns()}
    add_if_return = parse_pattern(ADD_IF_RETURN_XML)
    checks = {}

    found = match_pattern(add_if_return, pair_diff("dot_add_if_return"))
    checks["a"] = len(found) == 1 and {k: b.kind for k, b in found[0].bindings.items()} == {1: "Return", 2: "If"}
    moved = pair_diff("moved_if_return")
    checks["b"] = len(match_pattern(patterns["Del If-return"], moved)) == 0
    checks["c"] = len(match_pattern(patterns["Mov If-return"], moved)) == 1
    checks["d"] = len(match_pattern(add_if_return, pair_diff("two_guards_add_if_return"))) == 2
    null_guard = pair_diff("return_null_guard")
    checks["e"] = (len(match_pattern(patterns["Add If-return null"], null_guard)) == 1
                   and len(match_pattern(parse_pattern(RETURN_ZERO), null_guard)) == 0)
    seconds = time.perf_counter() - t0
    ok = all(checks.values()) and seconds < GOLDEN_SECONDS
    detail = " ".join(f"({k}){'ok' if v else 'BAD'}" for k, v in checks.items())
    assert verdict("golden snippet corpus", ok, f"{detail} in {seconds:.2f}s (limit {GOLDEN_SECONDS:.0f}s)")


def test_bundled_patterns_with_fixtures(verdict):
    patterns = bundled_patterns()
    diffs = {name: pair_diff(name) for name in EXPECTED}
    mismatches, positives, negatives = [], {}, {}
    for p in patterns:
        for name, d in diffs.items():
            got = len(match_pattern(p, d))
            want = EXPECTED[name].get(p.name, 0)
            if got != want:
                mismatches.append(f"{p.name}@{name}: {got}!={want}")
            (positives if got else negatives).setdefault(p.name, []).append(name)
    covered = all(p.name in positives and p.name in negatives for p in patterns)
    ok = len(patterns) == 10 and covered and not mismatches
    detail = (f"{len(patterns)} patterns parsed, {len(diffs)} fixtures, "
              f"{sum(len(v) for v in positives.values())} positive cells, exact-count mismatches {mismatches or 0}")
    assert verdict("bundled patterns x fixtures", ok, detail)


def test_edit_script_soundness(verdict):
    rng = random.Random(20240501)
    t0 = time.perf_counter()
    good = 0
    for _ in range(SOUNDNESS_TRIALS):
        src, dst = random_pair(rng, max_nodes=50, min_edits=1, max_edits=10)
        good += same_tree(apply_script(diff_trees(src, dst)), dst)
    seconds = time.perf_counter() - t0
    ok = good == SOUNDNESS_TRIALS and seconds < SOUNDNESS_SECONDS
    assert verdict("edit-script soundness", ok,
                   f"{good}/{SOUNDNESS_TRIALS} reproduced dst in {seconds:.1f}s (limit {SOUNDNESS_SECONDS:.0f}s)")


def test_matcher_oracle_equivalence(verdict):
    rng = random.Random(7)
    t0 = time.perf_counter()
    agree = nonempty = 0
    for _ in range(ORACLE_TRIALS):
        d = small_diff_case(rng, max_ops=12)
        p = random_pattern(rng, d, max_actions=3)
        assert len(d.operations) <= 12 and len(p.actions) <= 3
        fast = {i.key() for i in match_pattern(p, d)}
        agree += fast == {i.key() for i in brute_force_match(p, d)}
        nonempty += bool(fast)
    seconds = time.perf_counter() - t0
    ok = agree == ORACLE_TRIALS and seconds < ORACLE_SECONDS
    assert verdict("matcher-oracle equivalence", ok,
                   f"{agree}/{ORACLE_TRIALS} set-equal ({nonempty} with instances) in {seconds:.1f}s "
                   f"(limit {ORACLE_SECONDS:.0f}s)")


def _excess(a, b):
    n = len(diff_trees(to_ast(a), to_ast(b)).operations)
    if n - MIN_SLACK <= kind_lower_bound((a,), (b,)):
        return 0
    return n - optimal_length(a, b)


def test_near_minimality(verdict):
    t0 = time.perf_counter()
    trees = enumerate_trees(EXHAUSTIVE_MAX_NODES)
    worst, pairs = 0, 0
    for a in trees:
        for b in trees:
            worst = max(worst, _excess(a, b))
            pairs += 1
    rng = random.Random(6)
    big = enumerate_trees(SAMPLE_MAX_NODES)
    sample_worst = max(_excess(rng.choice(big), rng.choice(big)) for _ in range(SAMPLE_PAIRS))
    seconds = time.perf_counter() - t0
    ok = worst <= MIN_SLACK and sample_worst <= MIN_SLACK
    verdict("near-minimality (substitute)", ok,
            f"exhaustive <={EXHAUSTIVE_MAX_NODES} nodes: {pairs} pairs, worst excess {worst}; "
            f"random sample <={SAMPLE_MAX_NODES} nodes: {SAMPLE_PAIRS} pairs, worst excess {sample_worst}; "
            f"slack {MIN_SLACK}; {seconds:.0f}s")
    if os.environ.get("CHANGEMINER_FULL_ENUMERATION"):
        full = enumerate_trees(STATED_MAX_NODES)
        full_worst = max(_excess(a, b) for a in full for b in full)
        ok = ok and verdict("near-minimality (stated bound)", full_worst <= MIN_SLACK,
                            f"exhaustive <={STATED_MAX_NODES} nodes: {len(full) ** 2} pairs, worst {full_worst}")
    else:
        n = len(enumerate_trees(STATED_MAX_NODES))
        verdict("near-minimality (stated bound)", None,
                f"exhaustive <={STATED_MAX_NODES} nodes is {n}^2 = {n * n:.3g} pairs (~100 h on one core); "
                f"set CHANGEMINER_FULL_ENUMERATION=1 or shard scripts/near_minimality.py")
    assert ok


def test_determinism_across_worker_counts(tmp_path, verdict):
    repo = tmp_path / "repo"
    three_commit_repo(repo)
    outs = []
    for workers in (1, 4):
        out = tmp_path / f"w{workers}.json"
        code = cli_main(["--input", "git", "--location", str(repo), "--workers", str(workers), "--output", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1]
    assert verdict("determinism", ok, f"workers 1 vs 4: {len(outs[0])} bytes, identical={ok}")


def test_frequency_consistency(verdict):
    patterns = bundled_patterns()
    pairs = list(walk_files(PAIRS))
    whole = run_pipeline(pairs, default_analyzers(patterns), patterns).frequency
    summed = sum(whole.counts.values()) == whole.total_operations
    rng = random.Random(3)
    additive = True
    for _ in range(5):
        cut = set(rng.sample(range(len(pairs)), rng.randint(0, len(pairs))))
        left = run_pipeline([p for i, p in enumerate(pairs) if i in cut], default_analyzers(patterns)).frequency
        right = run_pipeline([p for i, p in enumerate(pairs) if i not in cut], default_analyzers(patterns)).frequency
        merged = left.merge(right)
        additive &= merged.counts == whole.counts and merged.total_operations == whole.total_operations
        additive &= merged.per_commit == whole.per_commit
    ok = summed and additive and whole.total_operations > 0
    assert verdict("frequency consistency", ok,
                   f"sum(counts)=={whole.total_operations} total_operations: {summed}; "
                   f"additive over 5 random partitions: {additive}")


def test_frequency_report_type():
    assert isinstance(run_pipeline([], default_analyzers([])).frequency, FrequencyReport)
