"""AST differencing: node mappings and INS/DEL/UPD/MOV edit scripts.

Mappings are computed in two greedy phases: isomorphic subtrees are matched
top-down by decreasing height, then containers are matched bottom-up by the
Dice ratio of their already-mapped descendants, with an optimal Zhang-Shasha
recovery pass inside small matched containers. The edit script is derived
from the mapping in the manner of Chawathe et al., simulating every operation
on a working copy of the source tree so that :func:`apply_script` can replay it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from changeminer.ast import AstNode, finalize, postorder, preorder
from changeminer.java import SourceFile, parse_source

INS, DEL, UPD, MOV = "INS", "DEL", "UPD", "MOV"
ACTIONS = (INS, DEL, UPD, MOV)
VIRTUAL_ROOT = -1


class InconsistentMapping(ValueError):
    pass


class DiffInputError(Exception):
    """Parsing one side of a pair failed; ``side`` is ``"src"`` or ``"dst"``."""

    def __init__(self, side: str, cause: Exception):
        super().__init__(f"{side}: {cause}")
        self.side = side
        self.cause = cause


@dataclass(frozen=True)
class DiffConfig:
    min_height: int = 2
    min_dice: float = 0.5
    max_recovery_size: int = 100
    # below this size (nodes per side) the mapping is replaced by a cost-optimal one
    exact_recovery_size: int = 8


class MappingSet:
    """Injective, kind-preserving src-id <-> dst-id correspondence."""

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        self.src_to_dst: dict[int, int] = {}
        self.dst_to_src: dict[int, int] = {}
        for s, d in pairs:
            self.add(s, d)

    def add(self, s: int, d: int) -> None:
        if s in self.src_to_dst or d in self.dst_to_src:
            raise InconsistentMapping(f"({s}, {d}) reuses a mapped node")
        self.src_to_dst[s] = d
        self.dst_to_src[d] = s

    def has_src(self, s: int) -> bool:
        return s in self.src_to_dst

    def has_dst(self, d: int) -> bool:
        return d in self.dst_to_src

    @property
    def pairs(self) -> set[tuple[int, int]]:
        return set(self.src_to_dst.items())

    def __len__(self) -> int:
        return len(self.src_to_dst)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return self.src_to_dst.get(pair[0]) == pair[1]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MappingSet) and self.src_to_dst == other.src_to_dst

    def __repr__(self) -> str:
        return f"MappingSet({sorted(self.src_to_dst.items())})"


@dataclass(frozen=True)
class DiffOperation:
    action: str
    src_node: Optional[AstNode] = None
    dst_node: Optional[AstNode] = None
    dst_parent_id: Optional[int] = None
    dst_position: Optional[int] = None

    @property
    def node(self) -> AstNode:
        """The node the operation is reported against (src side for DEL)."""
        return self.src_node if self.action == DEL else (self.dst_node or self.src_node)

    def __repr__(self) -> str:
        n = self.node
        return f"{self.action}({n.kind} {n.value!r})"


@dataclass
class DiffResult:
    src_root: AstNode
    dst_root: AstNode
    mappings: MappingSet
    operations: list[DiffOperation] = field(default_factory=list)


# ------------------------------------------------------------------ matching

def _fingerprints(roots: Iterable[AstNode]) -> dict[int, int]:
    """Hash-cons every subtree to a small int; keyed by ``id(node)``."""
    table: dict[tuple, int] = {}
    out: dict[int, int] = {}
    for root in roots:
        for node in postorder(root):
            key = (node.kind, node.value, tuple(out[id(c)] for c in node.children))
            out[id(node)] = table.setdefault(key, len(table))
    return out


def _descendants(n: AstNode) -> list[AstNode]:
    it = preorder(n)
    next(it)
    return list(it)


class _Matcher:
    def __init__(self, src: AstNode, dst: AstNode, config: DiffConfig):
        self.src, self.dst, self.cfg = src, dst, config
        self.src_nodes = list(preorder(src))
        self.dst_nodes = list(preorder(dst))
        self.fp = _fingerprints([src, dst])
        self.m = MappingSet()

    def map_isomorphic(self, a: AstNode, b: AstNode) -> None:
        for x, y in zip(preorder(a), preorder(b)):
            if not self.m.has_src(x.id) and not self.m.has_dst(y.id):
                self.m.add(x.id, y.id)

    def dice(self, a: Optional[AstNode], b: Optional[AstNode]) -> float:
        if a is None or b is None:
            return 0.0
        da = _descendants(a)
        total = len(da) + b.size - 1
        if total == 0:
            return 0.0
        lo, hi = b.id, b.id + b.size - 1
        common = 0
        for x in da:
            d = self.m.src_to_dst.get(x.id)
            if d is not None and lo < d <= hi:
                common += 1
        return 2.0 * common / total

    # phase 1
    def top_down(self) -> None:
        min_h = self.cfg.min_height
        l1: list[AstNode] = [self.src]
        l2: list[AstNode] = [self.dst]
        candidates: list[tuple[AstNode, AstNode]] = []

        def peek(lst: list[AstNode]) -> int:
            return max((n.height for n in lst), default=0)

        def pop(lst: list[AstNode], h: int) -> list[AstNode]:
            taken = [n for n in lst if n.height == h]
            lst[:] = [n for n in lst if n.height != h]
            return sorted(taken, key=lambda n: n.id)

        while min(peek(l1), peek(l2)) >= min_h:
            h1, h2 = peek(l1), peek(l2)
            if h1 != h2:
                if h1 > h2:
                    for n in pop(l1, h1):
                        l1.extend(n.children)
                else:
                    for n in pop(l2, h2):
                        l2.extend(n.children)
                continue
            level1, level2 = pop(l1, h1), pop(l2, h2)
            by_fp2: dict[int, list[AstNode]] = {}
            for t2 in level2:
                by_fp2.setdefault(self.fp[id(t2)], []).append(t2)
            by_fp1: dict[int, list[AstNode]] = {}
            for t1 in level1:
                by_fp1.setdefault(self.fp[id(t1)], []).append(t1)
            matched1, matched2 = set(), set()
            for key, group1 in by_fp1.items():
                group2 = by_fp2.get(key)
                if not group2:
                    continue
                if len(group1) == 1 and len(group2) == 1:
                    self.map_isomorphic(group1[0], group2[0])
                else:
                    candidates.extend((a, b) for a in group1 for b in group2)
                matched1.update(n.id for n in group1)
                matched2.update(n.id for n in group2)
            for t1 in level1:
                if t1.id not in matched1:
                    l1.extend(t1.children)
            for t2 in level2:
                if t2.id not in matched2:
                    l2.extend(t2.children)

        candidates.sort(
            key=lambda p: (-self.dice(p[0].parent, p[1].parent), abs(p[0].id - p[1].id), p[0].id, p[1].id)
        )
        for a, b in candidates:
            if not self.m.has_src(a.id) and not self.m.has_dst(b.id):
                self.map_isomorphic(a, b)

    # phase 2
    def bottom_up(self) -> None:
        for t1 in postorder(self.src):
            if t1 is self.src:
                if not self.m.has_src(t1.id) and not self.m.has_dst(self.dst.id) and t1.kind == self.dst.kind:
                    self.m.add(t1.id, self.dst.id)
                # the virtual roots are always mapped, so the real roots get a
                # recovery pass even when their kinds differ
                self.recover(t1, self.dst)
                break
            if self.m.has_src(t1.id) or not t1.children:
                continue
            best, best_key = None, None
            for t2 in self._candidates(t1):
                score = self.dice(t1, t2)
                key = (-score, abs(t1.id - t2.id), t2.id)
                if best_key is None or key < best_key:
                    best, best_key = t2, key
            if best is not None and -best_key[0] >= self.cfg.min_dice:
                self.m.add(t1.id, best.id)
                self.recover(t1, best)

    def _candidates(self, t1: AstNode) -> list[AstNode]:
        seen: dict[int, AstNode] = {}
        for x in _descendants(t1):
            d = self.m.src_to_dst.get(x.id)
            if d is None:
                continue
            p = self.dst_nodes[d].parent
            while p is not None and p.id not in seen:
                if p.kind == t1.kind and not self.m.has_dst(p.id):
                    seen[p.id] = p
                p = p.parent
        return [seen[k] for k in sorted(seen)]

    def recover(self, a: AstNode, b: AstNode) -> None:
        if max(a.size, b.size) > self.cfg.max_recovery_size:
            return
        for x, y in zhang_shasha_mapping(a, b):
            if x.kind == y.kind and not self.m.has_src(x.id) and not self.m.has_dst(y.id):
                self.m.add(x.id, y.id)


def compute_mappings(src: AstNode, dst: AstNode, config: DiffConfig = DiffConfig()) -> MappingSet:
    """Greedy top-down then bottom-up matching of ``src`` against ``dst``.

    Tiny trees (both sides within ``exact_recovery_size`` nodes) then get an
    exhaustive search for a mapping with a strictly shorter edit script.
    """
    matcher = _Matcher(src, dst, config)
    matcher.top_down()
    matcher.bottom_up()
    if max(src.size, dst.size) <= config.exact_recovery_size:
        return _exact_mapping(matcher.src_nodes, matcher.dst_nodes, matcher.m)
    return matcher.m


def _lcs_len(xs: list, ys: list) -> int:
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0]
        for j, y in enumerate(ys):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def _script_cost(src_nodes: list[AstNode], dst_nodes: list[AstNode], fwd: dict[int, int]) -> int:
    """Length of the script :func:`edit_script` derives from ``fwd`` (ids are pre-order)."""
    back = {d: s for s, d in fwd.items()}
    cost = len(src_nodes) + len(dst_nodes) - 2 * len(fwd)
    for s, d in fwd.items():
        if src_nodes[s].value != dst_nodes[d].value:
            cost += 1
        ps, pd = src_nodes[s].parent, dst_nodes[d].parent
        if (ps is None) != (pd is None) or (ps is not None and fwd.get(ps.id) != pd.id):
            cost += 1
    groups = [(-1, -1, (src_nodes[0],), (dst_nodes[0],))]
    groups += [(s, d, src_nodes[s].children, dst_nodes[d].children) for s, d in fwd.items()]
    for ps, pd, kids_s, kids_d in groups:
        xs = [fwd[c.id] for c in kids_s if c.id in fwd and _pid(dst_nodes[fwd[c.id]]) == pd]
        ys = [c.id for c in kids_d if c.id in back and _pid(src_nodes[back[c.id]]) == ps]
        cost += len(xs) - _lcs_len(xs, ys)
    return cost


def _pid(n: AstNode) -> int:
    return -1 if n.parent is None else n.parent.id


def _exact_mapping(src_nodes: list[AstNode], dst_nodes: list[AstNode], seed: MappingSet) -> MappingSet:
    """Branch and bound over kind-preserving mappings, keeping ``seed`` unless beaten."""
    best_cost = _script_cost(src_nodes, dst_nodes, dict(seed.src_to_dst))
    best: Optional[dict[int, int]] = None
    n_src, n_dst = len(src_nodes), len(dst_nodes)
    fwd: dict[int, int] = {}
    used: set[int] = set()

    def bound(i: int, forced: int) -> int:
        # deletions so far, insertions that remaining src nodes cannot avoid, forced moves
        unmapped_src = i - len(fwd)
        unmapped_dst = max(0, n_dst - len(fwd) - (n_src - i))
        return unmapped_src + unmapped_dst + forced

    def rec(i: int, forced: int) -> None:
        nonlocal best_cost, best
        if bound(i, forced) >= best_cost:
            return
        if i == n_src:
            c = _script_cost(src_nodes, dst_nodes, fwd)
            if c < best_cost:
                best_cost, best = c, dict(fwd)
            return
        x = src_nodes[i]
        for y in dst_nodes:
            if y.id in used or y.kind != x.kind:
                continue
            px, py = x.parent, y.parent
            # parents precede children in pre-order, so this move is already certain
            moved = (px is None) != (py is None) or (px is not None and fwd.get(px.id) != py.id)
            fwd[i] = y.id
            used.add(y.id)
            rec(i + 1, forced + moved + (x.value != y.value))
            used.discard(y.id)
            del fwd[i]
        rec(i + 1, forced)

    rec(0, 0)
    return seed if best is None else MappingSet(best.items())


# ------------------------------------------------------------- Zhang-Shasha

_INF = float("inf")


def _rename_cost(a: AstNode, b: AstNode) -> float:
    if a.kind != b.kind:
        return _INF
    return 0.0 if a.value == b.value else 1.0


def zhang_shasha_mapping(a: AstNode, b: AstNode) -> list[tuple[AstNode, AstNode]]:
    """Node pairs of an optimal unit-cost edit mapping between two subtrees."""
    n1 = list(postorder(a))
    n2 = list(postorder(b))
    # 1-based post-order indices and leftmost-leaf indices
    idx1 = {id(n): i + 1 for i, n in enumerate(n1)}
    idx2 = {id(n): i + 1 for i, n in enumerate(n2)}

    def leftmost(nodes: list[AstNode], idx: dict[int, int]) -> list[int]:
        out = [0] * (len(nodes) + 1)
        for i, n in enumerate(nodes, 1):
            m = n
            while m.children:
                m = m.children[0]
            out[i] = idx[id(m)]
        return out

    l1, l2 = leftmost(n1, idx1), leftmost(n2, idx2)

    def keyroots(lml: list[int], size: int) -> list[int]:
        last: dict[int, int] = {}
        for i in range(1, size + 1):
            last[lml[i]] = i
        return sorted(last.values())

    s1, s2 = len(n1), len(n2)
    td = [[0.0] * (s2 + 1) for _ in range(s1 + 1)]

    def forest(i: int, j: int) -> list[list[float]]:
        li, lj = l1[i], l2[j]
        rows, cols = i - li + 2, j - lj + 2
        fd = [[0.0] * cols for _ in range(rows)]
        for di in range(1, rows):
            fd[di][0] = fd[di - 1][0] + 1
        for dj in range(1, cols):
            fd[0][dj] = fd[0][dj - 1] + 1
        for di in range(1, rows):
            x = li + di - 1
            for dj in range(1, cols):
                y = lj + dj - 1
                if l1[x] == li and l2[y] == lj:
                    v = min(fd[di - 1][dj] + 1, fd[di][dj - 1] + 1, fd[di - 1][dj - 1] + _rename_cost(n1[x - 1], n2[y - 1]))
                    td[x][y] = v
                else:
                    v = min(fd[di - 1][dj] + 1, fd[di][dj - 1] + 1, fd[l1[x] - li][l2[y] - lj] + td[x][y])
                fd[di][dj] = v
        return fd

    for i in keyroots(l1, s1):
        for j in keyroots(l2, s2):
            forest(i, j)

    pairs: list[tuple[AstNode, AstNode]] = []
    stack = [(s1, s2)]
    while stack:
        i, j = stack.pop()
        li, lj = l1[i], l2[j]
        fd = forest(i, j)
        row, col = i, j
        while row >= li or col >= lj:
            r, c = row - li + 1, col - lj + 1
            if row >= li and fd[r - 1][c] + 1 == fd[r][c]:
                row -= 1
            elif col >= lj and fd[r][c - 1] + 1 == fd[r][c]:
                col -= 1
            elif l1[row] == li and l2[col] == lj:
                pairs.append((n1[row - 1], n2[col - 1]))
                row -= 1
                col -= 1
            else:
                stack.append((row, col))
                row, col = l1[row] - 1, l2[col] - 1
    return pairs


# ------------------------------------------------------------- edit script

class _WNode:
    __slots__ = ("kind", "value", "children", "parent", "src_id", "dst_id")

    def __init__(self, kind: str, value: str, src_id: Optional[int] = None, dst_id: Optional[int] = None):
        self.kind = kind
        self.value = value
        self.children: list[_WNode] = []
        self.parent: Optional[_WNode] = None
        self.src_id = src_id
        self.dst_id = dst_id


def _working_copy(src: AstNode) -> tuple[_WNode, dict[int, _WNode]]:
    vroot = _WNode("", "", dst_id=VIRTUAL_ROOT)
    by_src: dict[int, _WNode] = {}

    def copy(n: AstNode, parent: _WNode) -> None:
        w = _WNode(n.kind, n.value, src_id=n.id)
        w.parent = parent
        parent.children.append(w)
        by_src[n.id] = w
        for c in n.children:
            copy(c, w)

    copy(src, vroot)
    return vroot, by_src


def _detach(w: _WNode) -> None:
    w.parent.children.remove(w)
    w.parent = None


def _attach(w: _WNode, parent: _WNode, pos: int) -> None:
    parent.children.insert(pos, w)
    w.parent = parent


def _lcs(xs: list, ys: list, eq) -> list[tuple]:
    n, m = len(xs), len(ys)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            dp[i][j] = dp[i + 1][j + 1] + 1 if eq(xs[i], ys[j]) else max(dp[i + 1][j], dp[i][j + 1])
    out, i, j = [], 0, 0
    while i < n and j < m:
        if eq(xs[i], ys[j]):
            out.append((xs[i], ys[j]))
            i += 1
            j += 1
        elif dp[i + 1][j] >= dp[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


def _validate(src_nodes: list[AstNode], dst_nodes: list[AstNode], m: MappingSet) -> None:
    seen_dst = set()
    for s, d in m.src_to_dst.items():
        if not (0 <= s < len(src_nodes)) or not (0 <= d < len(dst_nodes)):
            raise InconsistentMapping(f"pair ({s}, {d}) is out of range")
        if d in seen_dst or m.dst_to_src.get(d) != s:
            raise InconsistentMapping(f"pair ({s}, {d}) is not injective")
        seen_dst.add(d)
        if src_nodes[s].kind != dst_nodes[d].kind:
            raise InconsistentMapping(f"pair ({s}, {d}) maps {src_nodes[s].kind} to {dst_nodes[d].kind}")
    if len(m.dst_to_src) != len(m.src_to_dst):
        raise InconsistentMapping("mapping is not injective")


def edit_script(src: AstNode, dst: AstNode, m: MappingSet) -> list[DiffOperation]:
    """Derive an applicable INS/MOV/UPD (dst pre-order) then DEL (post-order) script."""
    src_nodes = list(preorder(src))
    dst_nodes = list(preorder(dst))
    _validate(src_nodes, dst_nodes, m)
    vroot, by_src = _working_copy(src)
    by_dst: dict[int, _WNode] = {VIRTUAL_ROOT: vroot}
    for s, d in m.src_to_dst.items():
        by_src[s].dst_id = d
        by_dst[d] = by_src[s]
    in_order: set[int] = set()
    ops: list[DiffOperation] = []

    def dst_children(d: int) -> tuple[AstNode, ...]:
        return (dst,) if d == VIRTUAL_ROOT else dst_nodes[d].children

    def dst_parent_id(x: AstNode) -> int:
        return VIRTUAL_ROOT if x.parent is None else x.parent.id

    def find_pos(x: AstNode) -> int:
        siblings = dst_children(dst_parent_id(x))
        anchor = None
        for v in siblings:
            if v is x:
                break
            if v.id in in_order:
                anchor = v
        if anchor is None:
            return 0
        u = by_dst[anchor.id]
        return u.parent.children.index(u) + 1

    def move(w: _WNode, x: AstNode, z: _WNode) -> None:
        pos = find_pos(x)
        if w.parent is z and z.children.index(w) < pos:
            pos -= 1
        _detach(w)
        _attach(w, z, pos)
        ops.append(DiffOperation(MOV, src_nodes[w.src_id], x, dst_parent_id(x), pos))
        in_order.add(x.id)

    def align(w: _WNode, x_id: int) -> None:
        kids = dst_children(x_id)
        for c in kids:
            in_order.discard(c.id)
        s1 = [c for c in w.children if c.dst_id is not None and c.dst_id >= 0 and dst_parent_id(dst_nodes[c.dst_id]) == x_id]
        s2 = [c for c in kids if c.id in by_dst and by_dst[c.id].parent is w]
        common = _lcs(s1, s2, lambda a, b: a.dst_id == b.id)
        for _, b in common:
            in_order.add(b.id)
        kept = {b.id for _, b in common}
        for b in s2:
            if b.id not in kept:
                move(by_dst[b.id], b, w)

    align(vroot, VIRTUAL_ROOT)
    for x in dst_nodes:
        z = by_dst[dst_parent_id(x)]
        w = by_dst.get(x.id)
        if w is None:
            pos = find_pos(x)
            w = _WNode(x.kind, x.value, dst_id=x.id)
            _attach(w, z, pos)
            by_dst[x.id] = w
            ops.append(DiffOperation(INS, None, x, dst_parent_id(x), pos))
            in_order.add(x.id)
        else:
            if w.value != x.value:
                ops.append(DiffOperation(UPD, src_nodes[w.src_id], x))
                w.value = x.value
            if w.parent is not z:
                move(w, x, z)
        align(w, x.id)

    for n in postorder(src):
        if not m.has_src(n.id):
            w = by_src[n.id]
            assert not w.children, "unmapped node still has children"
            _detach(w)
            ops.append(DiffOperation(DEL, n, None))
    return ops


def apply_script(result: DiffResult, operations: Optional[list[DiffOperation]] = None) -> AstNode:
    """Replay ``operations`` (default: ``result.operations``) on a copy of the source tree."""
    ops = result.operations if operations is None else operations
    vroot, by_src = _working_copy(result.src_root)
    by_dst: dict[int, _WNode] = {VIRTUAL_ROOT: vroot}
    for s, d in result.mappings.src_to_dst.items():
        by_dst[d] = by_src[s]
    for op in ops:
        if op.action == INS:
            w = _WNode(op.dst_node.kind, op.dst_node.value, dst_id=op.dst_node.id)
            _attach(w, by_dst[op.dst_parent_id], op.dst_position)
            by_dst[op.dst_node.id] = w
        elif op.action == DEL:
            w = by_src[op.src_node.id]
            if w.children:
                raise ValueError(f"cannot delete non-leaf {op.src_node!r}")
            _detach(w)
        elif op.action == UPD:
            by_src[op.src_node.id].value = op.dst_node.value
        elif op.action == MOV:
            w = by_src[op.src_node.id]
            _detach(w)
            _attach(w, by_dst[op.dst_parent_id], op.dst_position)
        else:
            raise ValueError(f"unknown action {op.action!r}")
    if len(vroot.children) != 1:
        raise ValueError(f"script leaves {len(vroot.children)} roots")

    def build(w: _WNode) -> AstNode:
        return AstNode(w.kind, w.value, [build(c) for c in w.children])

    return finalize(build(vroot.children[0]))


def diff_trees(src: AstNode, dst: AstNode, config: DiffConfig = DiffConfig()) -> DiffResult:
    m = compute_mappings(src, dst, config)
    return DiffResult(src, dst, m, edit_script(src, dst, m))


def diff(src_file: SourceFile, dst_file: SourceFile, config: DiffConfig = DiffConfig()) -> DiffResult:
    """Parse both sides and diff them."""
    trees = []
    for side, f in (("src", src_file), ("dst", dst_file)):
        try:
            trees.append(parse_source(f))
        except Exception as exc:
            raise DiffInputError(side, exc) from exc
    return diff_trees(trees[0], trees[1], config)
