import json
import warnings
from pathlib import Path

import pytest

from changeminer.java import SourceFile
from changeminer.miner import (
    Analyzer,
    FilterConfig,
    LayoutError,
    NonLinearHistoryWarning,
    PipelineOptions,
    RepoNotFound,
    RevisionPair,
    accept_commit,
    count_hunks,
    default_analyzers,
    run_pipeline,
    walk_files,
    walk_git,
)
from changeminer.patterns import bundled_patterns
from repos import commit, fixture_text, git, init_repo, three_commit_repo

ROOT = Path(__file__).resolve().parents[1]
PAIRS = ROOT / "fixtures" / "pairs"
EXPECTED = json.loads((ROOT / "fixtures" / "expected_counts.json").read_text())


# ------------------------------------------------------------------- git walk


def test_two_commits_give_pairs_in_order(tmp_path):
    repo = init_repo(tmp_path / "r")
    a = commit(repo, "add", {"f.java": "class F {}"}, 1_700_000_000)
    b = commit(repo, "edit", {"f.java": "class F { int x; }"}, 1_700_000_010)
    pairs = list(walk_git(repo))
    assert [(p.commit_id, p.file_path) for p in pairs] == [(a, "f.java"), (b, "f.java")]
    assert pairs[0].before.content == b"" and pairs[0].after.content == b"class F {}"
    assert pairs[1].before.content == b"class F {}"
    assert pairs[1].before.revision_tag == a and pairs[1].after.revision_tag == b
    assert pairs[1].commit_message == "edit" and pairs[1].commit_time == 1_700_000_010


def test_deleted_file_has_empty_after(tmp_path):
    repo = init_repo(tmp_path / "r")
    commit(repo, "add", {"f.java": "class F {}"})
    commit(repo, "drop", {"f.java": None})
    last = list(walk_git(repo))[-1]
    assert last.after.content == b"" and last.before.content == b"class F {}"


def test_empty_repository_yields_nothing(tmp_path):
    assert list(walk_git(init_repo(tmp_path / "r"))) == []


def test_not_a_repository(tmp_path):
    with pytest.raises(RepoNotFound):
        list(walk_git(tmp_path))
    with pytest.raises(RepoNotFound):
        list(walk_git(tmp_path / "missing"))


def test_keyword_filter(tmp_path):
    repo = tmp_path / "r"
    shas = three_commit_repo(repo)
    kept = {p.commit_id for p in walk_git(repo, FilterConfig(message_keywords=("FIX",)))}
    assert kept == set(shas[1:])


def test_size_filters(tmp_path):
    repo = tmp_path / "r"
    shas = three_commit_repo(repo)
    one_file = {p.commit_id for p in walk_git(repo, FilterConfig(max_files_per_commit=1))}
    assert one_file == {shas[1]}
    one_hunk = {p.commit_id for p in walk_git(repo, FilterConfig(max_hunks_per_file=1))}
    assert shas[0] in one_hunk


def test_merge_commit_warns_and_follows_first_parent(tmp_path):
    repo = init_repo(tmp_path / "r")
    commit(repo, "base", {"a.java": "class A {}"}, 1_700_000_000)
    git(repo, "checkout", "-q", "-b", "side")
    commit(repo, "side", {"b.java": "class B {}"}, 1_700_000_010)
    git(repo, "checkout", "-q", "main")
    commit(repo, "main", {"a.java": "class A { int x; }"}, 1_700_000_020)
    git(repo, "-c", "user.name=t", "-c", "user.email=t@example.com", "merge", "-q", "--no-ff", "-m", "merge", "side")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pairs = list(walk_git(repo))
    assert any(issubclass(w.category, NonLinearHistoryWarning) for w in caught)
    assert [p.commit_message for p in pairs] == ["base", "main", "merge"]
    assert pairs[-1].file_path == "b.java"


# ----------------------------------------------------------------- file walk


def test_walk_files_layout():
    pairs = list(walk_files(PAIRS))
    assert [p.commit_id for p in pairs] == sorted(EXPECTED)
    p = pairs[0]
    assert p.before.path == p.after.path == p.file_path and p.file_path.endswith(".java")


def test_walk_files_empty_root(tmp_path):
    assert list(walk_files(tmp_path)) == []


@pytest.mark.parametrize("names", [["A_s.java", "A_t.java", "B_s.java"], ["A_s.java"], ["A_s.java", "B_t.java"]])
def test_walk_files_rejects_bad_layout(tmp_path, names):
    d = tmp_path / "x"
    d.mkdir()
    for n in names:
        (d / n).write_text("class A {}")
    with pytest.raises(LayoutError):
        list(walk_files(tmp_path))


# ------------------------------------------------------------------- filters


def test_count_hunks():
    assert count_hunks(b"a\nb\nc\n", b"a\nb\nc\n") == 0
    assert count_hunks(b"a\nb\nc\n", b"a\nX\nc\n") == 1
    assert count_hunks(b"a\nb\nc\nd\n", b"X\nb\nc\nY\n") == 2
    assert count_hunks(b"", b"a\n") == 1


def test_accept_commit():
    f = FilterConfig(message_keywords=("fix", "bug"), max_files_per_commit=2, max_hunks_per_file=3)
    assert accept_commit("Fix NPE", [1, 3], f)
    assert not accept_commit("refactor", [1], f)
    assert not accept_commit("bug", [1, 1, 1], f)
    assert not accept_commit("bugfix", [4], f)
    assert accept_commit("anything", [100] * 50, FilterConfig())


def test_filter_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(max_files_per_commit=0)


# ------------------------------------------------------------------ pipeline


def test_zero_pairs():
    report = run_pipeline([], default_analyzers(bundled_patterns()), bundled_patterns())
    assert report.commits == [] and report.frequency.counts == {}
    assert set(report.pattern_totals.values()) == {0}


def _pair(name, before, after):
    return RevisionPair("c1", name, SourceFile(name, before), SourceFile(name, after))


def test_bad_pair_is_isolated():
    good = [p for p in walk_files(PAIRS)][:3]
    binary = _pair("Bin.java", b"\x00\x01\x02", b"\x00\x01\x03")
    broken = _pair("Broken.java", b"class A {}", b"class A { void f( }")
    report = run_pipeline(good + [binary, broken], default_analyzers(bundled_patterns()), bundled_patterns())
    files = report.files
    reasons = [f.skipped_reason for f in files]
    assert reasons[:3] == [None, None, None]
    assert reasons[3].startswith("ParseSkipped") and "SyntaxError" in reasons[4] and "(dst)" in reasons[4]
    assert all(f.operations == [] for f in files[3:])


def test_non_source_extension_skipped():
    report = run_pipeline([_pair("notes.txt", b"a", b"b")], default_analyzers([]))
    assert report.files[0].skipped_reason.startswith("NotSource")


class Exploding(Analyzer):
    name = "boom"

    def analyze(self, pair, results):
        raise RuntimeError("nope")


def test_analyzer_failure_becomes_skip_reason():
    pairs = list(walk_files(PAIRS))[:2]
    report = run_pipeline(pairs, default_analyzers([]) + [Exploding()])
    assert all("AnalyzerError (boom)" in f.skipped_reason for f in report.files)


class Counting(Analyzer):
    name = "op-count"

    def analyze(self, pair, results):
        return len(results["ast-diff"].operations)


def test_extra_analyzer_results_reach_report():
    pairs = list(walk_files(PAIRS))[:2]
    report = run_pipeline(pairs, default_analyzers([]) + [Counting()])
    for f in report.files:
        assert f.extra["op-count"] == len(f.operations)
        assert set(f.extra["line-diff"]) == {"hunks", "added", "removed"}


def test_fixture_corpus_counts():
    patterns = bundled_patterns()
    report = run_pipeline(walk_files(PAIRS), default_analyzers(patterns), patterns)
    for ce in report.commits:
        (fe,) = ce.files
        got = {}
        for inst in fe.instances:
            got[inst.pattern] = got.get(inst.pattern, 0) + 1
        assert got == EXPECTED[ce.commit_id], ce.commit_id
    assert sum(report.pattern_totals.values()) == sum(sum(v.values()) for v in EXPECTED.values())


@pytest.mark.parametrize("mode", ["diff", "mineinstance", "frequency", "all"])
def test_modes_select_sections(mode):
    patterns = bundled_patterns()
    pairs = [p for p in walk_files(PAIRS) if p.commit_id == "dot_add_if_return"]
    report = run_pipeline(pairs, default_analyzers(patterns), patterns, PipelineOptions(mode=mode))
    (fe,) = report.files
    assert bool(fe.operations) == (mode in ("diff", "all"))
    assert bool(fe.instances) == (mode in ("mineinstance", "all"))
    assert bool(report.pattern_totals) == (mode in ("mineinstance", "all"))
    assert report.frequency.total_operations > 0


def test_unknown_mode_and_no_analyzers():
    with pytest.raises(ValueError):
        run_pipeline([], default_analyzers([]), options=PipelineOptions(mode="everything"))
    with pytest.raises(ValueError):
        run_pipeline([], [])


def test_git_pipeline_end_to_end(tmp_path):
    repo = tmp_path / "r"
    shas = three_commit_repo(repo)
    patterns = bundled_patterns()
    report = run_pipeline(walk_git(repo), default_analyzers(patterns), patterns)
    assert [c.commit_id for c in report.commits] == shas
    assert report.pattern_totals["Add If-return"] == 1
    assert report.pattern_totals["Add If-assig"] == 1
    readme = [f for f in report.commits[2].files if f.path == "README.txt"]
    assert readme[0].skipped_reason.startswith("NotSource")


def test_workers_do_not_change_output(tmp_path):
    repo = tmp_path / "r"
    three_commit_repo(repo)
    patterns = bundled_patterns()
    one = run_pipeline(walk_git(repo), default_analyzers(patterns), patterns, PipelineOptions(workers=1))
    many = run_pipeline(walk_git(repo), default_analyzers(patterns), patterns, PipelineOptions(workers=3))
    assert one.to_dict() == many.to_dict()


def test_fixture_text_helper_reads_both_sides():
    assert fixture_text("dot_add_if_return", "s") != fixture_text("dot_add_if_return", "t")
