"""Revision sources (git history, on-disk file pairs), filters and the analyzer pipeline."""

from __future__ import annotations

import difflib
import logging
import subprocess
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Sequence

from changeminer.java import ParseSkipped, SourceFile
from changeminer.matcher import match_pattern
from changeminer.patterns import ChangePattern
from changeminer.report import (
    CommitEntry,
    FileEntry,
    FrequencyReport,
    MiningReport,
    summarize_instance,
    summarize_operation,
)
from changeminer.treediff import DiffConfig, DiffInputError, DiffResult, diff

log = logging.getLogger(__name__)

MODES = ("diff", "mineinstance", "frequency", "all")


class RepoNotFound(Exception):
    pass


class LayoutError(Exception):
    pass


class NonLinearHistoryWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RevisionPair:
    commit_id: str
    file_path: str
    before: SourceFile
    after: SourceFile
    commit_message: str = ""
    commit_time: int = 0


@dataclass(frozen=True)
class FilterConfig:
    message_keywords: tuple[str, ...] = ()
    max_files_per_commit: Optional[int] = None
    max_hunks_per_file: Optional[int] = None

    def __post_init__(self):
        for name in ("max_files_per_commit", "max_hunks_per_file"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")

    @property
    def needs_hunks(self) -> bool:
        return self.max_hunks_per_file is not None


def count_hunks(before: bytes, after: bytes) -> int:
    """Number of zero-context hunks in a line diff."""
    a = before.decode("utf-8", "replace").splitlines()
    b = after.decode("utf-8", "replace").splitlines()
    return sum(1 for tag, *_ in difflib.SequenceMatcher(None, a, b, autojunk=False).get_opcodes() if tag != "equal")


def accept_commit(message: str, hunks_per_file: Sequence[int], filters: FilterConfig) -> bool:
    """Keyword and size filter over one commit's message and per-file hunk counts."""
    if filters.message_keywords:
        lowered = message.lower()
        if not any(k.lower() in lowered for k in filters.message_keywords):
            return False
    if filters.max_files_per_commit is not None and len(hunks_per_file) > filters.max_files_per_commit:
        return False
    if filters.max_hunks_per_file is not None and any(h > filters.max_hunks_per_file for h in hunks_per_file):
        return False
    return True


# ------------------------------------------------------------------ git input

def _git(repo: Path, *args: str) -> bytes:
    proc = subprocess.run(["git", "-C", str(repo), *args], capture_output=True, check=False)
    if proc.returncode != 0:
        raise subprocess.CalledProcessError(proc.returncode, args, proc.stdout, proc.stderr)
    return proc.stdout


@dataclass
class _Change:
    path: str
    old_blob: Optional[str]
    new_blob: Optional[str]


def _changed_files(repo: Path, commit: str, parent: Optional[str]) -> list[_Change]:
    args = ["diff-tree", "-r", "--no-renames", "--no-commit-id", "-z", "--raw"]
    args += [parent, commit] if parent else ["--root", commit]
    out = _git(repo, *args).split(b"\0")
    changes = []
    for meta, path in zip(out[0::2], out[1::2]):
        fields = meta.decode().lstrip(":").split()
        if len(fields) < 5:
            continue
        old_mode, new_mode, old_sha, new_sha = fields[:4]
        if "160000" in (old_mode, new_mode):
            continue  # submodule
        null = set("0")
        changes.append(
            _Change(
                path.decode("utf-8", "surrogateescape"),
                None if set(old_sha) == null else old_sha,
                None if set(new_sha) == null else new_sha,
            )
        )
    return sorted(changes, key=lambda c: c.path)


def walk_git(repo_path: str | Path, filters: FilterConfig = FilterConfig()) -> Iterator[RevisionPair]:
    """Yield revision pairs for every changed file, oldest commit first.

    History is followed along first parents; a merge commit is compared against
    its first parent and triggers a :class:`NonLinearHistoryWarning`.
    """
    repo = Path(repo_path)
    try:
        _git(repo, "rev-parse", "--git-dir")
    except (subprocess.CalledProcessError, FileNotFoundError, NotADirectoryError):
        raise RepoNotFound(f"{repo_path} is not a git repository") from None
    try:
        _git(repo, "rev-parse", "--verify", "--quiet", "HEAD")
    except subprocess.CalledProcessError:
        return  # no commits yet
    raw = _git(repo, "log", "--first-parent", "--reverse", "-z", "--format=%H%x1f%ct%x1f%P%x1f%B", "HEAD")
    blobs: dict[str, bytes] = {}

    def blob(sha: Optional[str]) -> bytes:
        if sha is None:
            return b""
        if sha not in blobs:
            blobs[sha] = _git(repo, "cat-file", "blob", sha)
        return blobs[sha]

    for record in raw.split(b"\0"):
        if not record.strip():
            continue
        commit, ctime, parents, message = record.decode("utf-8", "replace").lstrip("\n").split("\x1f", 3)
        parent_list = parents.split()
        if len(parent_list) > 1:
            warnings.warn(
                f"merge commit {commit} compared against its first parent only", NonLinearHistoryWarning, stacklevel=2
            )
        changes = _changed_files(repo, commit, parent_list[0] if parent_list else None)
        hunks = (
            [count_hunks(blob(c.old_blob), blob(c.new_blob)) for c in changes]
            if filters.needs_hunks
            else [0] * len(changes)
        )
        if not accept_commit(message, hunks, filters):
            continue
        for c in changes:
            yield RevisionPair(
                commit_id=commit,
                file_path=c.path,
                before=SourceFile(c.path, blob(c.old_blob), parent_list[0] if parent_list else ""),
                after=SourceFile(c.path, blob(c.new_blob), commit),
                commit_message=message.strip(),
                commit_time=int(ctime),
            )
        blobs.clear()


# ---------------------------------------------------------- filesystem input

def walk_files(root_path: str | Path) -> Iterator[RevisionPair]:
    """One pair per subdirectory holding ``<name>_s.<ext>`` and ``<name>_t.<ext>``."""
    root = Path(root_path)
    if not root.is_dir():
        raise LayoutError(f"{root_path} is not a directory")
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        files = sorted(p for p in d.iterdir() if p.is_file())
        if len(files) != 2:
            raise LayoutError(f"{d}: expected exactly 2 files, found {len(files)}")
        src, dst = files
        if not (src.stem.endswith("_s") and dst.stem.endswith("_t")) or src.stem[:-2] != dst.stem[:-2] or src.suffix != dst.suffix:
            raise LayoutError(f"{d}: expected <name>_s{src.suffix} and <name>_t{src.suffix}, found {src.name}, {dst.name}")
        path = src.stem[:-2] + src.suffix
        yield RevisionPair(
            commit_id=d.name,
            file_path=path,
            before=SourceFile(path, src.read_bytes(), d.name),
            after=SourceFile(path, dst.read_bytes(), d.name),
        )


# ------------------------------------------------------------------ analyzers

class Analyzer:
    """Pipeline stage; ``analyze`` sees the results of every earlier stage."""

    name = "analyzer"

    def analyze(self, pair: RevisionPair, results: dict[str, Any]) -> Any:
        raise NotImplementedError


class LineDiffAnalyzer(Analyzer):
    name = "line-diff"

    def analyze(self, pair, results):
        a = pair.before.content.decode("utf-8", "replace").splitlines()
        b = pair.after.content.decode("utf-8", "replace").splitlines()
        hunks = added = removed = 0
        for tag, i1, i2, j1, j2 in difflib.SequenceMatcher(None, a, b, autojunk=False).get_opcodes():
            if tag == "equal":
                continue
            hunks += 1
            removed += i2 - i1
            added += j2 - j1
        return {"hunks": hunks, "added": added, "removed": removed}


class AstDiffAnalyzer(Analyzer):
    name = "ast-diff"

    def __init__(self, config: DiffConfig = DiffConfig()):
        self.config = config

    def analyze(self, pair, results):
        return diff(pair.before, pair.after, self.config)


class PatternInstanceAnalyzer(Analyzer):
    name = "pattern-instance"

    def __init__(self, patterns: Sequence[ChangePattern]):
        self.patterns = list(patterns)

    def analyze(self, pair, results):
        d: DiffResult = results[AstDiffAnalyzer.name]
        out = []
        for p in self.patterns:
            out.extend(match_pattern(p, d))
        return out


def default_analyzers(patterns: Sequence[ChangePattern], config: DiffConfig = DiffConfig()) -> list[Analyzer]:
    return [LineDiffAnalyzer(), AstDiffAnalyzer(config), PatternInstanceAnalyzer(patterns)]


@dataclass
class PipelineOptions:
    mode: str = "all"
    file_ext: str = "java"
    workers: int = 1
    run_config: dict[str, Any] = field(default_factory=dict)


def _skip_reason(exc: Exception, analyzer: str) -> str:
    if isinstance(exc, DiffInputError):
        cause = exc.cause
        if isinstance(cause, ParseSkipped):
            return f"ParseSkipped ({exc.side}): {cause}"
        return f"{type(cause).__name__} ({exc.side}): {cause}"
    if isinstance(exc, ParseSkipped):
        return f"ParseSkipped: {exc}"
    return f"AnalyzerError ({analyzer}): {type(exc).__name__}: {exc}"


def analyze_pair(
    pair: RevisionPair, analyzers: Sequence[Analyzer], options: PipelineOptions
) -> tuple[FileEntry, FrequencyReport]:
    """Run the analyzer chain on one pair; failures become a skipped entry."""
    entry = FileEntry(pair.file_path)
    freq = FrequencyReport()
    ext = options.file_ext.lstrip(".")
    if ext and not pair.file_path.endswith("." + ext):
        entry.skipped_reason = f"NotSource: extension is not .{ext}"
        return entry, freq
    results: dict[str, Any] = {}
    for a in analyzers:
        try:
            results[a.name] = a.analyze(pair, results)
        except Exception as exc:  # noqa: BLE001 - one bad pair must not abort the run
            log.debug("analyzer %s failed on %s@%s", a.name, pair.file_path, pair.commit_id, exc_info=True)
            entry.skipped_reason = _skip_reason(exc, a.name)
            return entry, freq
    d = results.get(AstDiffAnalyzer.name)
    if isinstance(d, DiffResult):
        freq = FrequencyReport.from_operations(d.operations)
        if options.mode in ("diff", "all"):
            entry.operations = [summarize_operation(op) for op in d.operations]
    found = results.get(PatternInstanceAnalyzer.name)
    if found and options.mode in ("mineinstance", "all"):
        entry.instances = [summarize_instance(i) for i in found]
    for name, value in results.items():
        if name not in (AstDiffAnalyzer.name, PatternInstanceAnalyzer.name) and _jsonable(value):
            entry.extra[name] = value
    return entry, freq


def _jsonable(value: Any) -> bool:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return True
    if isinstance(value, (list, tuple)):
        return all(_jsonable(v) for v in value)
    if isinstance(value, dict):
        return all(isinstance(k, str) and _jsonable(v) for k, v in value.items())
    return False


def _analyze_star(args):
    return analyze_pair(*args)


def run_pipeline(
    pairs: Iterable[RevisionPair],
    analyzers: Sequence[Analyzer],
    patterns: Sequence[ChangePattern] = (),
    options: Optional[PipelineOptions] = None,
) -> MiningReport:
    """Analyze every pair and aggregate the outcome into a :class:`MiningReport`."""
    if not analyzers:
        raise ValueError("at least one analyzer is required")
    options = options or PipelineOptions()
    if options.mode not in MODES:
        raise ValueError(f"unknown mode {options.mode!r}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonLinearHistoryWarning)
        pair_list = list(pairs)
    history_warnings = [str(w.message) for w in caught if issubclass(w.category, NonLinearHistoryWarning)]

    jobs = [(p, analyzers, options) for p in pair_list]
    if options.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=options.workers) as pool:
            outcomes = list(pool.map(_analyze_star, jobs, chunksize=max(1, len(jobs) // (4 * options.workers))))
    else:
        outcomes = [analyze_pair(*job) for job in jobs]

    commits: list[CommitEntry] = []
    index: dict[str, CommitEntry] = {}
    frequency = FrequencyReport(per_commit={})
    for pair, (entry, freq) in zip(pair_list, outcomes):
        ce = index.get(pair.commit_id)
        if ce is None:
            ce = index[pair.commit_id] = CommitEntry(pair.commit_id)
            commits.append(ce)
        ce.files.append(entry)
        frequency = frequency.merge(freq.for_commit(pair.commit_id))
    pattern_totals: dict[str, int] = {}
    if options.mode in ("mineinstance", "all"):
        pattern_totals = {p.name: 0 for p in patterns}
        for ce in commits:
            for fe in ce.files:
                for inst in fe.instances:
                    pattern_totals[inst.pattern] = pattern_totals.get(inst.pattern, 0) + 1
    return MiningReport(
        run_config=dict(options.run_config),
        commits=commits,
        frequency=frequency,
        pattern_totals=pattern_totals,
        warnings=history_warnings,
    )
