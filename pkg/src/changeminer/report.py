"""Mining results: change-frequency tables, instance listings and JSON export."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from changeminer import __version__
from changeminer.matcher import PatternInstance
from changeminer.treediff import DiffOperation, DiffResult

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "schema" / "report.schema.json"

Counts = dict[tuple[str, str], int]


def _key(action: str, kind: str) -> str:
    return f"{action}_{kind}"


def _unkey(key: str) -> tuple[str, str]:
    action, kind = key.split("_", 1)
    return action, kind


def _add(a: Counts, b: Counts) -> Counts:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


@dataclass
class FrequencyReport:
    counts: Counts = field(default_factory=dict)
    total_operations: int = 0
    per_commit: Optional[dict[str, Counts]] = None

    @classmethod
    def from_operations(cls, ops: Iterable[DiffOperation]) -> "FrequencyReport":
        c = Counter((op.action, op.node.kind) for op in ops)
        return cls(dict(c), sum(c.values()))

    def merge(self, other: "FrequencyReport") -> "FrequencyReport":
        if self.per_commit is None and other.per_commit is None:
            per_commit = None
        else:
            per_commit = dict(self.per_commit or {})
            for cid, counts in (other.per_commit or {}).items():
                per_commit[cid] = _add(per_commit.get(cid, {}), counts)
        return FrequencyReport(_add(self.counts, other.counts), self.total_operations + other.total_operations, per_commit)

    def for_commit(self, commit_id: str) -> "FrequencyReport":
        return FrequencyReport(dict(self.counts), self.total_operations, {commit_id: dict(self.counts)})

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "counts": {_key(*k): v for k, v in self.counts.items()},
            "total_operations": self.total_operations,
        }
        if self.per_commit is not None:
            out["per_commit"] = {
                cid: {_key(*k): v for k, v in counts.items()} for cid, counts in self.per_commit.items()
            }
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FrequencyReport":
        per_commit = None
        if "per_commit" in d:
            per_commit = {cid: {_unkey(k): v for k, v in c.items()} for cid, c in d["per_commit"].items()}
        return cls({_unkey(k): v for k, v in d["counts"].items()}, d["total_operations"], per_commit)


def count_frequency(diffs: Iterable[DiffResult]) -> FrequencyReport:
    """Count operations per (action, node kind) across ``diffs``."""
    total = FrequencyReport()
    for d in diffs:
        total = total.merge(FrequencyReport.from_operations(d.operations))
    return total


# ------------------------------------------------------------------ entries

def _span(s: Optional[Iterable[int]]) -> Optional[tuple[int, int]]:
    return None if s is None else tuple(s)


@dataclass(frozen=True)
class OperationSummary:
    action: str
    kind: str
    value: str
    src_span: Optional[tuple[int, int]]
    dst_span: Optional[tuple[int, int]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "action": self.action,
            "kind": self.kind,
            "value": self.value,
            "src_span": None if self.src_span is None else list(self.src_span),
            "dst_span": None if self.dst_span is None else list(self.dst_span),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "OperationSummary":
        return cls(d["action"], d["kind"], d["value"], _span(d["src_span"]), _span(d["dst_span"]))


@dataclass(frozen=True)
class BindingSummary:
    side: str
    kind: str
    value: str
    span: tuple[int, int]


@dataclass(frozen=True)
class InstanceSummary:
    pattern: str
    bindings: dict[int, BindingSummary]

    def to_dict(self) -> dict[str, Any]:
        return {
            "pattern": self.pattern,
            "bindings": {
                str(eid): {"side": b.side, "kind": b.kind, "value": b.value, "span": list(b.span)}
                for eid, b in self.bindings.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "InstanceSummary":
        return cls(
            d["pattern"],
            {
                int(eid): BindingSummary(b["side"], b["kind"], b["value"], _span(b["span"]))
                for eid, b in sorted(d["bindings"].items(), key=lambda kv: int(kv[0]))
            },
        )


def summarize_operation(op: DiffOperation) -> OperationSummary:
    n = op.node
    return OperationSummary(
        op.action,
        n.kind,
        n.value,
        None if op.src_node is None else op.src_node.span,
        None if op.dst_node is None else op.dst_node.span,
    )


def summarize_instance(inst: PatternInstance) -> InstanceSummary:
    return InstanceSummary(
        inst.pattern_name,
        {eid: BindingSummary(b.side, b.kind, b.value, b.span) for eid, b in sorted(inst.bindings.items())},
    )


@dataclass
class FileEntry:
    path: str
    skipped_reason: Optional[str] = None
    operations: list[OperationSummary] = field(default_factory=list)
    instances: list[InstanceSummary] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "path": self.path,
            "operations": [o.to_dict() for o in self.operations],
            "instances": [i.to_dict() for i in self.instances],
        }
        if self.skipped_reason is not None:
            out["skipped_reason"] = self.skipped_reason
        if self.extra:
            out["extra"] = self.extra
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FileEntry":
        return cls(
            d["path"],
            d.get("skipped_reason"),
            [OperationSummary.from_dict(o) for o in d["operations"]],
            [InstanceSummary.from_dict(i) for i in d["instances"]],
            d.get("extra", {}),
        )


@dataclass
class CommitEntry:
    commit_id: str
    files: list[FileEntry] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"commit_id": self.commit_id, "files": [f.to_dict() for f in self.files]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CommitEntry":
        return cls(d["commit_id"], [FileEntry.from_dict(f) for f in d["files"]])


@dataclass
class MiningReport:
    tool_version: str = __version__
    run_config: dict[str, Any] = field(default_factory=dict)
    commits: list[CommitEntry] = field(default_factory=list)
    frequency: FrequencyReport = field(default_factory=FrequencyReport)
    pattern_totals: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "run_config": self.run_config,
            "commits": [c.to_dict() for c in self.commits],
            "frequency": self.frequency.to_dict(),
            "pattern_totals": dict(self.pattern_totals),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MiningReport":
        return cls(
            d["tool_version"],
            d["run_config"],
            [CommitEntry.from_dict(c) for c in d["commits"]],
            FrequencyReport.from_dict(d["frequency"]),
            dict(d["pattern_totals"]),
            list(d.get("warnings", [])),
        )

    @property
    def files(self) -> list[FileEntry]:
        return [f for c in self.commits for f in c.files]


def dumps_report(report: MiningReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def export_json(report: MiningReport, path: str | Path) -> Path:
    """Write ``report`` as sorted-key UTF-8 JSON with a trailing newline."""
    path = Path(path)
    path.write_text(dumps_report(report), encoding="utf-8")
    return path


def load_report(path: str | Path) -> MiningReport:
    return MiningReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_schema() -> dict[str, Any]:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
