"""Random trees, edits and patterns shared by the property and acceptance tests."""

from __future__ import annotations

import random
from dataclasses import dataclass

from hypothesis import strategies as st

from changeminer.ast import AstNode, NODE_KINDS, finalize
from changeminer.patterns import ChangePattern, ParentRef, PatternAction, PatternEntity, WILDCARD, validate
from changeminer.treediff import ACTIONS

KINDS = sorted(NODE_KINDS)
VALUES = ["", "a", "b", "0", "1", "null", "+", "=="]


@dataclass(eq=False)
class MNode:
    """Mutable tree used to apply random edits before freezing into an AstNode."""

    kind: str
    value: str
    children: list


def freeze(m: MNode) -> AstNode:
    def build(n: MNode) -> AstNode:
        return AstNode(n.kind, n.value, [build(c) for c in n.children])

    return finalize(build(m))


def thaw(a: AstNode) -> MNode:
    return MNode(a.kind, a.value, [thaw(c) for c in a.children])


def _nodes(m: MNode, parent=None, out=None):
    if out is None:
        out = []
    out.append((m, parent))
    for c in m.children:
        _nodes(c, m, out)
    return out


def random_tree(rng: random.Random, max_nodes: int, kinds=KINDS, values=VALUES) -> MNode:
    n = rng.randint(1, max_nodes)
    root = MNode(rng.choice(kinds), rng.choice(values), [])
    all_nodes = [root]
    for _ in range(n - 1):
        parent = rng.choice(all_nodes)
        child = MNode(rng.choice(kinds), rng.choice(values), [])
        parent.children.insert(rng.randint(0, len(parent.children)), child)
        all_nodes.append(child)
    return root


def random_edit(rng: random.Random, root: MNode, kinds=KINDS, values=VALUES) -> MNode:
    """One insert, delete, update or move; may replace the root."""
    entries = _nodes(root)
    op = rng.choice(["ins", "ins", "del", "upd", "mov", "wrap"])
    if op == "ins":
        parent, _ = rng.choice(entries)
        parent.children.insert(rng.randint(0, len(parent.children)), MNode(rng.choice(kinds), rng.choice(values), []))
    elif op == "del" and len(entries) > 1:
        node, parent = rng.choice(entries[1:])
        i = parent.children.index(node)
        # delete the node and splice its children into its place
        parent.children[i:i + 1] = node.children
    elif op == "upd":
        node, _ = rng.choice(entries)
        node.value = rng.choice([v for v in values if v != node.value])
    elif op == "mov" and len(entries) > 1:
        node, parent = rng.choice(entries[1:])
        parent.children.remove(node)
        targets = [n for n, _ in _nodes(root)]
        dest = rng.choice(targets)
        dest.children.insert(rng.randint(0, len(dest.children)), node)
    elif op == "wrap":
        node, parent = rng.choice(entries)
        wrapper = MNode(rng.choice(kinds), rng.choice(values), [node])
        if parent is None:
            return wrapper
        parent.children[parent.children.index(node)] = wrapper
    return root


def random_pair(rng: random.Random, max_nodes: int = 50, min_edits: int = 1, max_edits: int = 10,
                kinds=KINDS, values=VALUES) -> tuple[AstNode, AstNode]:
    base = random_tree(rng, max_nodes, kinds, values)
    src = freeze(base)
    edited = thaw(src)
    for _ in range(rng.randint(min_edits, max_edits)):
        edited = random_edit(rng, edited, kinds, values)
    return src, freeze(edited)


# ------------------------------------------------------------ random patterns

SMALL_KINDS = ["If", "Then", "Return", "Assignment", "Block", "Literal"]
SMALL_VALUES = ["", "a", "null"]


def random_pattern(rng: random.Random, diff=None, max_actions: int = 3) -> ChangePattern:
    """A valid pattern with 1..max_actions actions.

    With a ``diff`` most patterns are derived from its operations (kinds, values
    and true ancestor distances, sometimes loosened or broken) so that a good
    share of cases has instances; the rest are unconstrained noise.
    """
    while True:
        if diff is not None and diff.operations and rng.random() < 0.8:
            pattern = _pattern_from_diff(rng, diff, max_actions)
        else:
            pattern = _noise_pattern(rng, max_actions)
        try:
            validate(pattern)
        except ValueError:
            continue
        return pattern


def _noise_pattern(rng, max_actions):
    n_entities = rng.randint(1, 3)
    entities = []
    for eid in range(1, n_entities + 1):
        parent = None
        if eid > 1 and rng.random() < 0.75:
            parent = ParentRef(rng.randint(1, eid - 1), rng.randint(1, 3))
        entities.append(PatternEntity(eid, rng.choice([WILDCARD] + SMALL_KINDS),
                                      rng.choice([WILDCARD] * 3 + SMALL_VALUES), parent))
    actions = [PatternAction(rng.randint(1, n_entities), rng.choice(ACTIONS)) for _ in range(rng.randint(1, max_actions))]
    return ChangePattern("random", tuple(entities), tuple(actions))


def _depth_between(anc, node):
    d, p = 0, node
    while p is not None:
        if p is anc:
            return d
        p, d = p.parent, d + 1
    return None


def _pattern_from_diff(rng, diff, max_actions):
    ops = rng.sample(diff.operations, rng.randint(1, min(max_actions, len(diff.operations))))
    targets = [(op.src_node if op.action in ("DEL", "UPD") else op.dst_node) for op in ops]
    entities, actions = [], []
    for i, (op, node) in enumerate(zip(ops, targets), start=1):
        parent = None
        for j in rng.sample(range(i - 1), i - 1):
            dist = _depth_between(targets[j], node)
            if dist:
                parent = ParentRef(j + 1, max(1, dist + rng.choice([0, 0, 1, -1])))
                break
        if parent is None and i > 1 and rng.random() < 0.3:
            parent = ParentRef(rng.randint(1, i - 1), rng.randint(1, 3))
        etype = node.kind if rng.random() < 0.8 else rng.choice([WILDCARD] + SMALL_KINDS)
        value = node.value if rng.random() < 0.3 else WILDCARD
        entities.append(PatternEntity(i, etype, value, parent))
        actions.append(PatternAction(i, op.action if rng.random() < 0.9 else rng.choice(ACTIONS)))
    # optionally a context entity above one of the bound nodes
    if rng.random() < 0.4:
        k = rng.randrange(len(entities))
        node = targets[k]
        if node.parent is not None and entities[k].parent is None:
            anc, dist = node.parent, 1
            while anc.parent is not None and rng.random() < 0.4:
                anc, dist = anc.parent, dist + 1
            cid = len(entities) + 1
            ctype = anc.kind if rng.random() < 0.8 else WILDCARD
            entities.append(PatternEntity(cid, ctype, WILDCARD, None))
            e = entities[k]
            entities[k] = PatternEntity(e.id, e.type, e.value, ParentRef(cid, dist + rng.choice([0, 0, 1])))
    return ChangePattern("random", tuple(entities), tuple(actions))


def small_diff_case(rng: random.Random, max_ops: int = 12):
    """A diff of two small random trees with 1..max_ops operations."""
    from changeminer.treediff import diff_trees

    while True:
        src, dst = random_pair(rng, max_nodes=8, min_edits=1, max_edits=3, kinds=SMALL_KINDS, values=SMALL_VALUES)
        d = diff_trees(src, dst)
        if 1 <= len(d.operations) <= max_ops:
            return d


# ------------------------------------------------------- hypothesis strategies

@st.composite
def ast_trees(draw, max_nodes: int = 20):
    seed = draw(st.integers(0, 2**32 - 1))
    return freeze(random_tree(random.Random(seed), max_nodes))
