"""Exhaustive tools for checking edit-script length against the optimum on tiny trees.

Trees are plain nested tuples ``(kind, (child, ...))``; values are ignored, so
only INS, DEL and MOV can change a tree. A *state* is the forest hanging under
the virtual root, which lets a script replace the real root.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from changeminer.ast import AstNode, finalize

Shape = tuple  # (kind, (Shape, ...))
Forest = tuple  # (Shape, ...)

DEFAULT_KINDS = ("Block", "If", "Return")


def enumerate_trees(max_nodes: int, kinds: Sequence[str] = DEFAULT_KINDS) -> list[Shape]:
    """Every ordered tree with 1..max_nodes nodes labelled from ``kinds``."""
    kinds = tuple(kinds)

    @lru_cache(maxsize=None)
    def forests(n: int) -> tuple[Forest, ...]:
        if n == 0:
            return ((),)
        out = []
        for k in range(1, n + 1):
            for t in trees(k):
                out.extend((t,) + rest for rest in forests(n - k))
        return tuple(out)

    @lru_cache(maxsize=None)
    def trees(n: int) -> tuple[Shape, ...]:
        return tuple((kind, f) for f in forests(n - 1) for kind in kinds)

    return [t for n in range(1, max_nodes + 1) for t in trees(n)]


def to_ast(shape: Shape) -> AstNode:
    def build(s: Shape) -> AstNode:
        return AstNode(s[0], "", [build(c) for c in s[1]])

    root = build(shape)
    finalize(root)
    return root


def from_ast(node: AstNode) -> Shape:
    return (node.kind, tuple(from_ast(c) for c in node.children))


def shape_size(s: Shape) -> int:
    return 1 + sum(shape_size(c) for c in s[1])


def kind_counts(forest: Forest) -> Counter:
    c: Counter = Counter()
    stack = list(forest)
    while stack:
        kind, children = stack.pop()
        c[kind] += 1
        stack.extend(children)
    return c


def kind_lower_bound(a: Forest, b: Forest) -> int:
    """Each INS or DEL changes the kind multiset by one and MOV not at all."""
    ca, cb = kind_counts(a), kind_counts(b)
    return sum(((ca - cb) + (cb - ca)).values())


# Paths address nodes inside a forest: (i,) is the i-th root, (i, j) its j-th child.

def _get(forest: Forest, path: tuple[int, ...]) -> Shape:
    node = forest[path[0]]
    for i in path[1:]:
        node = node[1][i]
    return node


def _replace_children(forest: Forest, path: tuple[int, ...], fn) -> Forest:
    """Apply ``fn`` to the child tuple at ``path`` (``()`` is the virtual root)."""
    if not path:
        return fn(forest)
    i = path[0]
    kind, children = forest[i]
    inner = _replace_children(children, path[1:], fn)
    return forest[:i] + ((kind, inner),) + forest[i + 1:]


def _paths(forest: Forest, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Shape]]:
    for i, node in enumerate(forest):
        p = prefix + (i,)
        yield p, node
        yield from _paths(node[1], p)


def _remove(forest: Forest, path: tuple[int, ...]) -> Forest:
    j = path[-1]
    return _replace_children(forest, path[:-1], lambda ch: ch[:j] + ch[j + 1:])


def _insert(forest: Forest, parent: tuple[int, ...], pos: int, node: Shape) -> Forest:
    return _replace_children(forest, parent, lambda ch: ch[:pos] + (node,) + ch[pos:])


def successors(forest: Forest, kinds: Sequence[str]) -> Iterator[Forest]:
    """Forests reachable with one INS (leaf), DEL (leaf) or MOV (subtree)."""
    containers = [((), len(forest))] + [(p, len(n[1])) for p, n in _paths(forest)]
    for parent, n_children in containers:
        for pos in range(n_children + 1):
            for kind in kinds:
                yield _insert(forest, parent, pos, (kind, ()))
    for path, node in list(_paths(forest)):
        if not node[1]:
            yield _remove(forest, path)
        detached = _remove(forest, path)
        for parent, n_children in [((), len(detached))] + [(p, len(n[1])) for p, n in _paths(detached)]:
            for pos in range(n_children + 1):
                moved = _insert(detached, parent, pos, node)
                if moved != forest:
                    yield moved


def script_exists(src: Shape, dst: Shape, max_len: int, kinds: Sequence[str] = DEFAULT_KINDS) -> bool:
    """Whether some INS/DEL/MOV script of at most ``max_len`` steps turns ``src`` into ``dst``.

    Depth-first search with the kind-multiset bound as an admissible heuristic
    and a table of the best remaining budget seen per forest.
    """
    start, goal = (src,), (dst,)
    if max_len < 0:
        return False
    best: dict[Forest, int] = {}

    def search(f: Forest, budget: int) -> bool:
        if f == goal:
            return True
        if kind_lower_bound(f, goal) > budget or budget == 0:
            return False
        if best.get(f, -1) >= budget:
            return False
        best[f] = budget
        return any(search(g, budget - 1) for g in successors(f, kinds))

    return search(start, max_len)


def optimal_script_length(src: Shape, dst: Shape, limit: int, kinds: Sequence[str] = DEFAULT_KINDS) -> Optional[int]:
    """Length of a shortest script, or None when it exceeds ``limit``."""
    for n in range(kind_lower_bound((src,), (dst,)), limit + 1):
        if script_exists(src, dst, n, kinds):
            return n
    return None


# ------------------------------------------------------------ mapping oracle

def _flatten(shape: Shape) -> tuple[list[str], list[int], list[list[int]]]:
    """Pre-order kinds, parent indices (-1 for the virtual root) and child lists."""
    kinds: list[str] = []
    parents: list[int] = []
    children: list[list[int]] = []

    def walk(s: Shape, parent: int) -> None:
        i = len(kinds)
        kinds.append(s[0])
        parents.append(parent)
        children.append([])
        for c in s[1]:
            children[i].append(len(kinds))
            walk(c, i)

    walk(shape, -1)
    return kinds, parents, children


def _lcs_len(xs: Sequence[int], ys: Sequence[int]) -> int:
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0]
        for j, y in enumerate(ys):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def mapping_cost(src: Shape, dst: Shape, mapping: dict[int, int]) -> int:
    """Fewest INS/DEL/MOV steps of any script whose surviving nodes are ``mapping``.

    Unmapped source nodes must each be deleted and unmapped destination nodes
    inserted. A surviving node whose parent does not survive into its new
    parent must itself be moved. Among surviving siblings that keep their
    parent, the ones never moved keep their relative order, so all but a
    longest common subsequence must move.
    """
    sk, sp, sc = _flatten(src)
    dk, dp, dc = _flatten(dst)
    cost = len(sk) + len(dk) - 2 * len(mapping)
    inverse = {d: s for s, d in mapping.items()}
    for s, d in mapping.items():
        ps, pd = sp[s], dp[d]
        if not ((ps == -1 and pd == -1) or (ps != -1 and mapping.get(ps) == pd)):
            cost += 1
    src_children = {-1: [0], **{i: ch for i, ch in enumerate(sc)}}
    dst_children = {-1: [0], **{i: ch for i, ch in enumerate(dc)}}
    parent_pairs = [(-1, -1)] + list(mapping.items())
    for ps, pd in parent_pairs:
        kept_src = [mapping[c] for c in src_children[ps] if c in mapping and dp[mapping[c]] == pd]
        kept_dst = [c for c in dst_children[pd] if c in inverse and sp[inverse[c]] == ps]
        cost += len(kept_src) - _lcs_len(kept_src, kept_dst)
    return cost


def all_mappings(src: Shape, dst: Shape) -> Iterator[dict[int, int]]:
    """Every injective kind-preserving partial mapping between the two trees."""
    sk = _flatten(src)[0]
    dk = _flatten(dst)[0]
    current: dict[int, int] = {}
    used: set[int] = set()

    def rec(i: int) -> Iterator[dict[int, int]]:
        if i == len(sk):
            yield dict(current)
            return
        yield from rec(i + 1)
        for j, kind in enumerate(dk):
            if kind == sk[i] and j not in used:
                current[i] = j
                used.add(j)
                yield from rec(i + 1)
                used.discard(j)
                del current[i]

    return rec(0)


def optimal_length(src: Shape, dst: Shape) -> int:
    """Exact shortest INS/DEL/MOV script length, by enumerating every mapping."""
    return min(mapping_cost(src, dst, m) for m in all_mappings(src, dst))


def slack_certified(src: Shape, dst: Shape, script_len: int, slack: int = 2) -> bool:
    """True when ``script_len <= optimum + slack``.

    The kind-multiset bound settles many pairs without enumeration.
    """
    if script_len - slack <= kind_lower_bound((src,), (dst,)):
        return True
    return script_len <= optimal_length(src, dst) + slack
