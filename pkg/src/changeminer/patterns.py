"""Change patterns: XML parsing, validation and canonical rendering.

Schema::

    <pattern name="...">
      <entity id="1" type="Return" value="*">
        <parent parentId="2" distance="2"/>
      </entity>
      <entity id="2" type="If"/>
      <action entityId="1" type="INS"/>
      <action entityId="2" type="INS"/>
    </pattern>

``type`` and ``value`` accept ``*`` as a wildcard. Entities that no action
references must be connected through parent links to one that is; they are
bound by searching the tree around the action-bound nodes.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import quoteattr

from changeminer.ast import NODE_KINDS
from changeminer.treediff import ACTIONS

WILDCARD = "*"
BUNDLED_DIR = Path(__file__).resolve().parents[2] / "patterns"


class SchemaError(ValueError):
    def __init__(self, detail: str, path: Optional[str] = None):
        super().__init__(f"{path}: {detail}" if path else detail)
        self.detail = detail
        self.path = path


@dataclass(frozen=True)
class ParentRef:
    parent_id: int
    distance: int


@dataclass(frozen=True)
class PatternEntity:
    id: int
    type: str = WILDCARD
    value: str = WILDCARD
    parent: Optional[ParentRef] = None


@dataclass(frozen=True)
class PatternAction:
    entity_id: int
    action: str


@dataclass(frozen=True)
class ChangePattern:
    name: str
    entities: tuple[PatternEntity, ...]
    actions: tuple[PatternAction, ...]

    def entity(self, entity_id: int) -> PatternEntity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def children_of(self, entity_id: int) -> list[PatternEntity]:
        return [e for e in self.entities if e.parent is not None and e.parent.parent_id == entity_id]


_PATTERN_ATTRS = {"name"}
_ENTITY_ATTRS = {"id", "type", "value"}
_PARENT_ATTRS = {"parentId", "distance"}
_ACTION_ATTRS = {"entityId", "type"}


def _positive_int(raw: Optional[str], what: str) -> int:
    if raw is None:
        raise SchemaError(f"missing {what}")
    try:
        n = int(raw.strip())
    except ValueError:
        raise SchemaError(f"{what} {raw!r} is not an integer") from None
    if n < 1:
        raise SchemaError(f"{what} must be positive, got {n}")
    return n


def _check_attrs(el: ET.Element, allowed: set[str]) -> None:
    extra = set(el.attrib) - allowed
    if extra:
        raise SchemaError(f"unknown attribute(s) {sorted(extra)} on <{el.tag}>")
    if el.text and el.text.strip():
        raise SchemaError(f"unexpected text inside <{el.tag}>")
    for child in el:
        if child.tail and child.tail.strip():
            raise SchemaError(f"unexpected text inside <{el.tag}>")


def parse_pattern(xml_text: str, default_name: str = "") -> ChangePattern:
    """Parse and validate one ``<pattern>`` document."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise SchemaError(f"malformed XML: {exc}") from None
    if root.tag != "pattern":
        raise SchemaError(f"root element must be <pattern>, got <{root.tag}>")
    _check_attrs(root, _PATTERN_ATTRS)
    entities: dict[int, PatternEntity] = {}
    actions: list[PatternAction] = []
    for el in root:
        if el.tag == "entity":
            _check_attrs(el, _ENTITY_ATTRS)
            eid = _positive_int(el.get("id"), "entity id")
            if eid in entities:
                raise SchemaError(f"duplicate entity id {eid}")
            etype = el.get("type", WILDCARD).strip()
            if etype != WILDCARD and etype not in NODE_KINDS:
                raise SchemaError(f"unknown type {etype!r}")
            value = el.get("value", WILDCARD).strip()
            parent = None
            for sub in el:
                if sub.tag != "parent":
                    raise SchemaError(f"unknown element <{sub.tag}> in <entity>")
                if parent is not None:
                    raise SchemaError(f"entity {eid} has more than one <parent>")
                _check_attrs(sub, _PARENT_ATTRS)
                if len(sub):
                    raise SchemaError("<parent> takes no children")
                parent = ParentRef(
                    _positive_int(sub.get("parentId"), "parentId"),
                    _positive_int(sub.get("distance"), "distance"),
                )
            entities[eid] = PatternEntity(eid, etype, value, parent)
        elif el.tag == "action":
            _check_attrs(el, _ACTION_ATTRS)
            if len(el):
                raise SchemaError("<action> takes no children")
            ref = _positive_int(el.get("entityId"), "entityId")
            token = (el.get("type") or "").strip()
            if token not in ACTIONS:
                raise SchemaError(f"unknown action type {token!r}")
            actions.append(PatternAction(ref, token))
        else:
            raise SchemaError(f"unknown element <{el.tag}>")
    pattern = ChangePattern(root.get("name", default_name).strip(), tuple(entities.values()), tuple(actions))
    validate(pattern)
    return pattern


def validate(pattern: ChangePattern) -> None:
    ids = {e.id for e in pattern.entities}
    if len(ids) != len(pattern.entities):
        raise SchemaError("duplicate entity ids")
    if not pattern.actions:
        raise SchemaError("pattern has no actions")
    for e in pattern.entities:
        if e.type != WILDCARD and e.type not in NODE_KINDS:
            raise SchemaError(f"unknown type {e.type!r}")
        if e.parent is not None:
            if e.parent.parent_id not in ids:
                raise SchemaError(f"entity {e.id} has dangling parentId {e.parent.parent_id}")
            if e.parent.distance < 1:
                raise SchemaError("distance must be positive")
    for a in pattern.actions:
        if a.entity_id not in ids:
            raise SchemaError(f"action references unknown entity {a.entity_id}")
        if a.action not in ACTIONS:
            raise SchemaError(f"unknown action type {a.action!r}")
    parent_of = {e.id: e.parent.parent_id for e in pattern.entities if e.parent is not None}
    for start in ids:
        seen = {start}
        cur = start
        while cur in parent_of:
            cur = parent_of[cur]
            if cur in seen:
                raise SchemaError(f"cyclic parent chain through entity {start}")
            seen.add(cur)
    # every entity must be reachable from an action-bound entity over parent links
    adjacent: dict[int, set[int]] = {i: set() for i in ids}
    for child, parent in parent_of.items():
        adjacent[child].add(parent)
        adjacent[parent].add(child)
    reached = {a.entity_id for a in pattern.actions}
    frontier = list(reached)
    while frontier:
        for nxt in adjacent[frontier.pop()]:
            if nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)
    loose = sorted(ids - reached)
    if loose:
        raise SchemaError(f"entities {loose} are not connected to any action")


def render_pattern(pattern: ChangePattern) -> str:
    """Canonical XML for ``pattern``; :func:`parse_pattern` inverts it."""
    lines = [f"<pattern name={quoteattr(pattern.name)}>"]
    for e in pattern.entities:
        attrs = f"id=\"{e.id}\" type={quoteattr(e.type)}"
        if e.value != WILDCARD:
            attrs += f" value={quoteattr(e.value)}"
        if e.parent is None:
            lines.append(f"  <entity {attrs}/>")
        else:
            lines.append(f"  <entity {attrs}>")
            lines.append(f"    <parent parentId=\"{e.parent.parent_id}\" distance=\"{e.parent.distance}\"/>")
            lines.append("  </entity>")
    for a in pattern.actions:
        lines.append(f"  <action entityId=\"{a.entity_id}\" type=\"{a.action}\"/>")
    lines.append("</pattern>")
    return "\n".join(lines) + "\n"


def load_pattern_corpus(paths: Sequence[str | Path]) -> list[ChangePattern]:
    """Load pattern files; directories contribute their ``*.xml`` files in name order."""
    files: list[Path] = []
    for p in map(Path, paths):
        files.extend(sorted(p.glob("*.xml")) if p.is_dir() else [p])
    out = []
    for f in files:
        try:
            out.append(parse_pattern(f.read_text(encoding="utf-8"), default_name=f.stem))
        except SchemaError as exc:
            raise SchemaError(exc.detail, str(f)) from None
        except (OSError, UnicodeDecodeError) as exc:
            raise SchemaError(f"cannot read pattern file ({exc})", str(f)) from None
    return out


def bundled_patterns() -> list[ChangePattern]:
    return load_pattern_corpus([BUNDLED_DIR])
