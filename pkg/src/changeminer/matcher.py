"""Finding instances of a change pattern in a diff.

An instance assigns every pattern action to a distinct operation of the same
kind, binds every entity to one node, and satisfies all type/value/parent
constraints. Action-bound entities live where their operation points: INS and
MOV on the destination tree, DEL and UPD on the source tree. Entities that no
action references are bound by searching around their bound neighbours.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from changeminer.ast import AstNode, ancestors_within, preorder
from changeminer.patterns import WILDCARD, ChangePattern, PatternEntity
from changeminer.treediff import DEL, INS, MOV, UPD, DiffOperation, DiffResult

SRC, DST = "src", "dst"
_PROJECTED_KINDS = ("Return", "Throw")

# brute-force guards
MAX_ORACLE_OPERATIONS = 12
MAX_ORACLE_ACTIONS = 4


class SizeLimitExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Binding:
    side: str
    node_id: int
    kind: str
    value: str
    span: tuple[int, int]


@dataclass(frozen=True)
class PatternInstance:
    pattern_name: str
    bindings: dict[int, Binding]
    matched_operations: tuple[int, ...]

    def key(self) -> tuple:
        return tuple(sorted((eid, b.side, b.node_id) for eid, b in self.bindings.items()))

    def sort_key(self) -> tuple:
        inf = float("inf")
        dst_ids = [b.node_id for b in self.bindings.values() if b.side == DST]
        src_ids = [b.node_id for b in self.bindings.values() if b.side == SRC]
        return (min(dst_ids, default=inf), min(src_ids, default=inf), self.key())


def operation_target(op: DiffOperation) -> tuple[str, AstNode]:
    """Tree side and node an operation binds its entity to."""
    if op.action in (INS, MOV):
        return DST, op.dst_node
    if op.action in (DEL, UPD):
        return SRC, op.src_node
    raise ValueError(op.action)


def effective_value(entity: PatternEntity, node: AstNode) -> str:
    """Node value compared against ``entity.value``.

    A value-constrained Return/Throw with an empty label is compared through
    its single child, so ``value="null"`` matches ``return null;``.
    """
    if (
        entity.value != WILDCARD
        and node.kind in _PROJECTED_KINDS
        and not node.value
        and len(node.children) == 1
    ):
        return node.children[0].value.strip()
    return node.value.strip()


def local_match(entity: PatternEntity, node: AstNode) -> bool:
    if entity.type != WILDCARD and entity.type != node.kind:
        return False
    return entity.value == WILDCARD or effective_value(entity, node) == entity.value


def _within(ancestor: AstNode, node: AstNode, distance: int) -> bool:
    p = node.parent
    for _ in range(distance):
        if p is None:
            return False
        if p is ancestor:
            return True
        p = p.parent
    return False


def entity_matches(
    entity: PatternEntity,
    node: AstNode,
    tree_root: AstNode,
    bindings: dict[int, AstNode],
    pattern: ChangePattern,
) -> bool:
    """Local type/value test plus the parent constraint.

    An unbound parent entity is satisfied when some ancestor within the
    distance passes that entity's own type/value test.
    """
    if not local_match(entity, node):
        return False
    if entity.parent is None:
        return True
    chain = ancestors_within(node, tree_root, entity.parent.distance)
    bound = bindings.get(entity.parent.parent_id)
    if bound is not None:
        return any(a is bound for a in chain)
    parent_entity = pattern.entity(entity.parent.parent_id)
    return any(local_match(parent_entity, a) for a in chain)


def _descendants_within(node: AstNode, distance: int) -> list[AstNode]:
    out: list[AstNode] = []
    level = list(node.children)
    for _ in range(distance):
        out.extend(level)
        level = [c for n in level for c in n.children]
    return out


class _Search:
    def __init__(self, pattern: ChangePattern, diff: DiffResult):
        self.pattern = pattern
        self.diff = diff
        self.ops = diff.operations
        self.targets = [operation_target(op) for op in self.ops]
        self.entities = {e.id: e for e in pattern.entities}
        self.found: dict[tuple, PatternInstance] = {}

    def consistent(self, binding: dict[int, tuple[str, AstNode]]) -> bool:
        for eid, (side, node) in binding.items():
            ref = self.entities[eid].parent
            if ref is None or ref.parent_id not in binding:
                continue
            pside, pnode = binding[ref.parent_id]
            if pside != side or not _within(pnode, node, ref.distance):
                return False
        return True

    def run(self) -> list[PatternInstance]:
        actions = self.pattern.actions
        cands = []
        for a in actions:
            ent = self.entities[a.entity_id]
            cands.append(
                [i for i, op in enumerate(self.ops) if op.action == a.action and local_match(ent, self.targets[i][1])]
            )
        order = sorted(range(len(actions)), key=lambda i: (len(cands[i]), i))
        assignment: dict[int, int] = {}

        def assign(k: int, binding: dict[int, tuple[str, AstNode]]) -> None:
            if k == len(order):
                self.complete(binding, tuple(assignment[i] for i in range(len(actions))))
                return
            ai = order[k]
            eid = actions[ai].entity_id
            used = set(assignment.values())
            for oi in cands[ai]:
                if oi in used:
                    continue
                side, node = self.targets[oi]
                prev = binding.get(eid)
                if prev is not None:
                    if prev[0] != side or prev[1] is not node:
                        continue
                    nb = binding
                else:
                    nb = {**binding, eid: (side, node)}
                    if not self.consistent(nb):
                        continue
                assignment[ai] = oi
                assign(k + 1, nb)
                del assignment[ai]

        assign(0, {})
        return sorted(self.found.values(), key=PatternInstance.sort_key)

    def complete(self, binding: dict[int, tuple[str, AstNode]], matched: tuple[int, ...]) -> None:
        unbound = [e for e in self.pattern.entities if e.id not in binding]
        if not unbound:
            inst = _instance(self.pattern.name, binding, matched)
            self.found.setdefault(inst.key(), inst)
            return
        for e in unbound:
            if e.parent is not None and e.parent.parent_id in binding:
                side, pnode = binding[e.parent.parent_id]
                options = _descendants_within(pnode, e.parent.distance)
                break
            child = next((c for c in self.pattern.children_of(e.id) if c.id in binding), None)
            if child is not None:
                side, cnode = binding[child.id]
                tree = self.diff.dst_root if side == DST else self.diff.src_root
                options = ancestors_within(cnode, tree, child.parent.distance)
                break
        else:  # pragma: no cover - validation guarantees connectivity
            return
        for n in options:
            if local_match(e, n):
                nb = {**binding, e.id: (side, n)}
                if self.consistent(nb):
                    self.complete(nb, matched)


def _instance(name: str, binding: dict[int, tuple[str, AstNode]], matched: tuple[int, ...]) -> PatternInstance:
    return PatternInstance(
        name,
        {eid: Binding(side, n.id, n.kind, n.value, n.span) for eid, (side, n) in sorted(binding.items())},
        matched,
    )


def match_pattern(pattern: ChangePattern, diff: DiffResult) -> list[PatternInstance]:
    """All distinct instances of ``pattern`` in ``diff``, in deterministic order."""
    return _Search(pattern, diff).run()


def brute_force_match(pattern: ChangePattern, diff: DiffResult) -> list[PatternInstance]:
    """Exhaustive reference matcher used as a test oracle.

    Tries every injective action->operation assignment, then every node of
    either tree for each remaining entity, and keeps the full bindings that
    satisfy all constraints.
    """
    ops = diff.operations
    actions = pattern.actions
    if len(ops) > MAX_ORACLE_OPERATIONS or len(actions) > MAX_ORACLE_ACTIONS:
        raise SizeLimitExceeded(f"{len(ops)} operations x {len(actions)} actions is beyond the oracle guards")
    roots = {SRC: diff.src_root, DST: diff.dst_root}
    everything = [(side, n) for side in (SRC, DST) for n in preorder(roots[side])]
    entities = {e.id: e for e in pattern.entities}

    def node_ok(e: PatternEntity, n: AstNode) -> bool:
        if e.type != WILDCARD and n.kind != e.type:
            return False
        if e.value == WILDCARD:
            return True
        value = n.value
        if n.kind in ("Return", "Throw") and value == "" and len(n.children) == 1:
            value = n.children[0].value
        return value.strip() == e.value

    def full_ok(binding: dict[int, tuple[str, AstNode]]) -> bool:
        for eid, (side, n) in binding.items():
            e = entities[eid]
            if not node_ok(e, n):
                return False
            if e.parent is not None:
                pside, pnode = binding[e.parent.parent_id]
                if pside != side:
                    return False
                chain = ancestors_within(n, roots[side], e.parent.distance)
                if not any(a is pnode for a in chain):
                    return False
        return True

    found: dict[tuple, PatternInstance] = {}
    for combo in itertools.permutations(range(len(ops)), len(actions)):
        binding: dict[int, tuple[str, AstNode]] = {}
        ok = True
        for a, oi in zip(actions, combo):
            op = ops[oi]
            if op.action != a.action:
                ok = False
                break
            target = (DST, op.dst_node) if op.action in (INS, MOV) else (SRC, op.src_node)
            prev = binding.get(a.entity_id)
            if prev is not None and (prev[0] != target[0] or prev[1] is not target[1]):
                ok = False
                break
            binding[a.entity_id] = target
        if not ok:
            continue
        free = [eid for eid in entities if eid not in binding]
        for extra in itertools.product(everything, repeat=len(free)):
            full = {**binding, **dict(zip(free, extra))}
            if full_ok(full):
                inst = _instance(pattern.name, full, tuple(combo))
                found.setdefault(inst.key(), inst)
    return sorted(found.values(), key=PatternInstance.sort_key)
