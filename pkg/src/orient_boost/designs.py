"""Block decompositions of complete graphs.

A decomposition partitions the edge set of K_n into typed blocks: complete
blocks of size t (KT) or 2t-1 (K2T1), 3- and 4-cycles, and, for even n, a
layer of 2-edge star-paths plus one single edge around the last vertex.  The
leftover graph B (union of all C3/C4/K2T1 blocks) must stay sparse: max
degree at most 3t-5, at most n(t-3)/6 triangles, t-3 four-cycles and t-1
copies of K_{2t-1}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .errors import (
    BudgetExceededError,
    CongruenceError,
    InfeasibleAtDeskScale,
    InvalidDecompositionError,
)


class BlockKind(str, Enum):
    KT = "KT"
    K2T1 = "K2T1"
    C3 = "C3"
    C4 = "C4"
    STARPATH = "STARPATH"
    EDGE = "EDGE"


_KIND_SIZE = {
    BlockKind.C3: 3,
    BlockKind.C4: 4,
    BlockKind.STARPATH: 3,
    BlockKind.EDGE: 2,
}


@dataclass(frozen=True)
class Block:
    kind: BlockKind
    vertices: tuple[int, ...]

    def edges(self) -> list[tuple[int, int]]:
        """Unordered pairs covered by this block, as sorted tuples."""
        vs = self.vertices
        if self.kind in (BlockKind.KT, BlockKind.K2T1):
            return [(vs[a], vs[b]) if vs[a] < vs[b] else (vs[b], vs[a])
                    for a in range(len(vs)) for b in range(a + 1, len(vs))]
        if self.kind in (BlockKind.C3, BlockKind.C4):
            out = []
            for a in range(len(vs)):
                u, v = vs[a], vs[(a + 1) % len(vs)]
                out.append((u, v) if u < v else (v, u))
            return out
        if self.kind == BlockKind.STARPATH:
            l1, c, l2 = vs
            return [(l1, c) if l1 < c else (c, l1), (l2, c) if l2 < c else (c, l2)]
        u, v = vs
        return [(u, v) if u < v else (v, u)]


@dataclass(frozen=True)
class Decomposition:
    n: int
    t: int
    blocks: tuple[Block, ...]

    def pair_block_index(self) -> list[list[int]]:
        """Matrix mapping each unordered pair to the index of its covering block."""
        idx = [[-1] * self.n for _ in range(self.n)]
        for b, block in enumerate(self.blocks):
            for u, v in block.edges():
                idx[u][v] = b
                idx[v][u] = b
        return idx

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "blocks": [{"kind": b.kind.value, "vertices": list(b.vertices)} for b in self.blocks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def decomposition_from_json(text: str) -> Decomposition:
    obj = json.loads(text)
    try:
        blocks = tuple(
            Block(BlockKind(b["kind"]), tuple(int(v) for v in b["vertices"])) for b in obj["blocks"]
        )
        return Decomposition(int(obj["n"]), int(obj["t"]), blocks)
    except (KeyError, ValueError, TypeError) as exc:
        raise InvalidDecompositionError(f"malformed decomposition: {exc}") from exc


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failures: tuple[str, ...]

    @property
    def first_violation(self) -> str | None:
        return self.failures[0] if self.failures else None


def validate(d: Decomposition) -> ValidationReport:
    """Check edge-partition exactness, block budgets, and leftover degree."""
    failures: list[str] = []
    n, t = d.n, d.t

    if t < 3 or t % 2 == 0:
        failures.append(f"t={t} must be odd and >= 3")

    for b, block in enumerate(d.blocks):
        vs = block.vertices
        want = _KIND_SIZE.get(block.kind, t if block.kind == BlockKind.KT else 2 * t - 1)
        if len(vs) != want:
            failures.append(f"block {b} ({block.kind.value}) has {len(vs)} vertices, expected {want}")
        if len(set(vs)) != len(vs):
            failures.append(f"block {b} repeats a vertex")
        if any(not 0 <= v < n for v in vs):
            failures.append(f"block {b} has a vertex outside 0..{n - 1}")
    if failures:
        return ValidationReport(False, tuple(failures))

    cover: dict[tuple[int, int], int] = {}
    for block in d.blocks:
        for pair in block.edges():
            cover[pair] = cover.get(pair, 0) + 1
    for pair, cnt in sorted(cover.items()):
        if cnt > 1:
            failures.append(f"pair {pair} covered {cnt} times")
    expected_pairs = n * (n - 1) // 2
    if len(cover) != expected_pairs:
        for u in range(n):
            for v in range(u + 1, n):
                if (u, v) not in cover:
                    failures.append(f"pair ({u},{v}) never covered")
                    break
            else:
                continue
            break

    leftover = [b for b in d.blocks if b.kind not in (BlockKind.KT, BlockKind.STARPATH, BlockKind.EDGE)]
    starpaths = [b for b in d.blocks if b.kind == BlockKind.STARPATH]
    single_edges = [b for b in d.blocks if b.kind == BlockKind.EDGE]

    if n % 2 == 1:
        if starpaths or single_edges:
            failures.append("star-path/edge blocks are only allowed for even n")
    else:
        hub = n - 1
        if len(starpaths) != n // 2 - 1 or len(single_edges) != 1:
            failures.append(
                f"even n needs exactly {n // 2 - 1} star-paths and 1 edge block, "
                f"got {len(starpaths)} and {len(single_edges)}"
            )
        for b in starpaths:
            if b.vertices[1] != hub:
                failures.append(f"star-path {b.vertices} is not centered at vertex {hub}")
        for b in single_edges:
            if hub not in b.vertices:
                failures.append(f"edge block {b.vertices} does not touch vertex {hub}")

    c3_count = sum(1 for b in leftover if b.kind == BlockKind.C3)
    c4_count = sum(1 for b in leftover if b.kind == BlockKind.C4)
    big_count = sum(1 for b in leftover if b.kind == BlockKind.K2T1)
    if c3_count * 6 > n * (t - 3):
        failures.append(f"{c3_count} triangle blocks exceed the budget n(t-3)/6 = {n * (t - 3) / 6:g}")
    if c4_count > t - 3:
        failures.append(f"{c4_count} four-cycle blocks exceed the budget t-3 = {t - 3}")
    if big_count > t - 1:
        failures.append(f"{big_count} K_(2t-1) blocks exceed the budget t-1 = {t - 1}")

    degree = [0] * n
    for block in leftover:
        for u, v in block.edges():
            degree[u] += 1
            degree[v] += 1
    worst = max(degree) if degree else 0
    if worst > 3 * t - 5:
        failures.append(f"leftover graph has max degree {worst} > 3t-5 = {3 * t - 5}")

    return ValidationReport(not failures, tuple(failures))


# ---------------------------------------------------------------------------
# explicit families
# ---------------------------------------------------------------------------

def steiner_triple_system(n: int) -> Decomposition:
    """Triple system partitioning E(K_n), for n = 1 or 3 (mod 6), n >= 7.

    n = 3 (mod 6) uses the quasigroup construction on Z_q x {0,1,2} with the
    idempotent operation x*y = (x+y)/2 mod q; n = 1 (mod 6) uses the
    half-idempotent variant on Z_2k x {0,1,2} plus one extra point.
    """
    if n < 7 or n % 6 not in (1, 3):
        raise CongruenceError(f"no triple system at n={n}: need n = 1 or 3 (mod 6), n >= 7")
    triples: list[tuple[int, int, int]] = []
    if n % 6 == 3:
        q = n // 3
        inv2 = (q + 1) // 2

        def pt(x: int, col: int) -> int:
            return x + q * col

        for x in range(q):
            triples.append((pt(x, 0), pt(x, 1), pt(x, 2)))
        for col in range(3):
            for x in range(q):
                for y in range(x + 1, q):
                    z = ((x + y) * inv2) % q
                    triples.append((pt(x, col), pt(y, col), pt(z, (col + 1) % 3)))
    else:
        size = (n - 1) // 3  # even
        half = size // 2

        def op(x: int, y: int) -> int:
            s = (x + y) % size
            return s // 2 if s % 2 == 0 else half + (s - 1) // 2

        def pt(x: int, col: int) -> int:
            return x + size * col

        inf = n - 1
        for x in range(half):
            triples.append((pt(x, 0), pt(x, 1), pt(x, 2)))
        for col in range(3):
            for x in range(half):
                triples.append((inf, pt(half + x, col), pt(x, (col + 1) % 3)))
        for col in range(3):
            for x in range(size):
                for y in range(x + 1, size):
                    triples.append((pt(x, col), pt(y, col), pt(op(x, y), (col + 1) % 3)))
    blocks = tuple(Block(BlockKind.KT, tuple(sorted(tr))) for tr in triples)
    return Decomposition(n, 3, blocks)


_GF4_MUL = (
    (0, 0, 0, 0),
    (0, 1, 2, 3),
    (0, 2, 3, 1),
    (0, 3, 1, 2),
)


def projective_plane_decomposition(q: int) -> Decomposition:
    """Point-line incidence of the order-q projective plane as K_(q+1) blocks.

    Supported orders: q=2 (7 points) and q=4 (21 points); both give odd
    block size t = q+1.
    """
    if q not in (2, 4):
        raise CongruenceError(f"unsupported plane order q={q}: need q in {{2,4}} (odd t=q+1)")
    if q == 2:
        mul = lambda a, b: a & b  # GF(2)
        elems = (0, 1)
    else:
        mul = lambda a, b: _GF4_MUL[a][b]
        elems = (0, 1, 2, 3)

    points: list[tuple[int, int, int]] = [(1, b, c) for b in elems for c in elems]
    points += [(0, 1, c) for c in elems]
    points.append((0, 0, 1))
    index = {p: i for i, p in enumerate(points)}
    n = len(points)

    def dot(u, p) -> int:
        acc = 0
        for a, b in zip(u, p):
            acc ^= mul(a, b)
        return acc

    blocks = []
    for line in points:
        members = tuple(sorted(index[p] for p in points if dot(line, p) == 0))
        if len(members) != q + 1:
            raise InvalidDecompositionError("internal error: line of wrong size")
        blocks.append(Block(BlockKind.KT, members))
    return Decomposition(n, q + 1, tuple(blocks))


# ---------------------------------------------------------------------------
# search machinery
# ---------------------------------------------------------------------------

class _Budget:
    __slots__ = ("left",)

    def __init__(self, nodes: int):
        self.left = nodes

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceededError("search node budget exhausted", budget=0)


def backtracking_kt_decomposition(edges, t: int, *, node_budget: int = 2_000_000) -> list[Block] | None:
    """Partition an edge set into K_t blocks by deterministic backtracking.

    Branches on the lexicographically smallest uncovered pair.  Returns the
    block list, or None once the search space is exhausted.  Raises
    CongruenceError up front when the divisibility preconditions fail and
    BudgetExceededError when the node budget runs out.
    """
    edge_list = [tuple(sorted(e)) for e in edges]
    if len(set(edge_list)) != len(edge_list):
        raise InvalidDecompositionError("duplicate edge in input graph")
    if not edge_list:
        return []
    verts = sorted({v for e in edge_list for v in e})
    adj: dict[int, set[int]] = {v: set() for v in verts}
    for u, v in edge_list:
        adj[u].add(v)
        adj[v].add(u)
    per_block = t * (t - 1) // 2
    if len(edge_list) % per_block:
        raise CongruenceError(f"{len(edge_list)} edges not divisible by t(t-1)/2 = {per_block}")
    for v in verts:
        if len(adj[v]) % (t - 1):
            raise CongruenceError(f"degree of vertex {v} is {len(adj[v])}, not divisible by t-1 = {t - 1}")

    budget = _Budget(node_budget)
    blocks: list[tuple[int, ...]] = []

    def smallest_uncovered() -> tuple[int, int] | None:
        for u in verts:
            if adj[u]:
                return u, min(adj[u])
        return None

    def cliques_through(u: int, v: int):
        """K_t vertex sets containing the pair {u,v}, in lexicographic order."""
        base = [u, v] if u < v else [v, u]
        cands = sorted(w for w in adj[u] & adj[v] if w not in base)

        def extend(chosen: list[int], pool: list[int]):
            if len(chosen) == t:
                yield tuple(sorted(chosen))
                return
            need = t - len(chosen)
            for idx, w in enumerate(pool):
                if len(pool) - idx < need:
                    break
                nxt = [x for x in pool[idx + 1:] if x in adj[w]]
                yield from extend(chosen + [w], nxt)

        yield from extend(base, cands)

    def remove(vs: tuple[int, ...]):
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                adj[vs[a]].discard(vs[b])
                adj[vs[b]].discard(vs[a])

    def restore(vs: tuple[int, ...]):
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                adj[vs[a]].add(vs[b])
                adj[vs[b]].add(vs[a])

    def search() -> bool:
        pick = smallest_uncovered()
        if pick is None:
            return True
        u, v = pick
        for vs in cliques_through(u, v):
            budget.spend()
            remove(vs)
            blocks.append(vs)
            if search():
                return True
            blocks.pop()
            restore(vs)
        return False

    if search():
        return [Block(BlockKind.KT, vs) for vs in blocks]
    return None


def _triangle_c4_factor(adj: list[set[int]], n: int, budget: _Budget) -> list[Block] | None:
    """Vertex-disjoint triangles plus (n mod 3) four-cycles covering every vertex once."""
    c4_quota = n % 3
    if n - 4 * c4_quota < 0:
        return None
    covered = [False] * n
    out: list[Block] = []

    def next_vertex() -> int:
        for v in range(n):
            if not covered[v]:
                return v
        return -1

    def search(remaining: int, c4_left: int) -> bool:
        if remaining == 0:
            return c4_left == 0
        v = next_vertex()
        free = [w for w in range(v + 1, n) if not covered[w]]
        # triangles through v
        for ia, a in enumerate(free):
            if a not in adj[v]:
                continue
            for b in free[ia + 1:]:
                if b not in adj[v] or b not in adj[a]:
                    continue
                budget.spend()
                if remaining - 3 < 4 * c4_left:
                    continue
                covered[v] = covered[a] = covered[b] = True
                out.append(Block(BlockKind.C3, (v, a, b)))
                if search(remaining - 3, c4_left):
                    return True
                out.pop()
                covered[v] = covered[a] = covered[b] = False
        if c4_left > 0 and remaining >= 4:
            for ia, a in enumerate(free):
                if a not in adj[v]:
                    continue
                for ib, b in enumerate(free):
                    if ib == ia or b not in adj[a]:
                        continue
                    for c in free:
                        # the cycle v-a-b-c-v equals v-c-b-a-v; keep a < c
                        if c <= a or c == b or c not in adj[b] or c not in adj[v]:
                            continue
                        budget.spend()
                        covered[v] = covered[a] = covered[b] = covered[c] = True
                        out.append(Block(BlockKind.C4, (v, a, b, c)))
                        if search(remaining - 4, c4_left - 1):
                            return True
                        out.pop()
                        covered[v] = covered[a] = covered[b] = covered[c] = False
        return False

    if search(n, c4_quota):
        return out
    return None


def _disjoint_cliques(adj: list[set[int]], n: int, size: int, count: int,
                      budget: _Budget) -> list[tuple[int, ...]] | None:
    """`count` pairwise vertex-disjoint cliques of the given size, by backtracking.

    Symmetry is broken by forcing the minimal vertices of successive cliques
    to increase.
    """
    used = [False] * n
    found: list[tuple[int, ...]] = []

    def extend(chosen: list[int], start: int) -> bool:
        if len(chosen) == size:
            found.append(tuple(chosen))
            if place_next(found[-1][0] + 1):
                return True
            found.pop()
            return False
        for w in range(start, n):
            if used[w] or any(w not in adj[x] for x in chosen):
                continue
            budget.spend()
            used[w] = True
            chosen.append(w)
            if extend(chosen, w + 1):
                return True
            chosen.pop()
            used[w] = False
        return False

    def place_next(min_start: int) -> bool:
        if len(found) == count:
            return True
        for v0 in range(min_start, n):
            if used[v0]:
                continue
            budget.spend()
            used[v0] = True
            if extend([v0], v0 + 1):
                return True
            used[v0] = False
        return False

    if place_next(0):
        return found
    return None


# ---------------------------------------------------------------------------
# the adjusted decomposition pipeline
# ---------------------------------------------------------------------------

def adjusted_decomposition(n: int, t: int, *, node_budget: int = 2_000_000) -> Decomposition:
    """Decompose K_n (n odd) into K_t blocks plus a bounded sparse leftover.

    Three steps: (1) peel (q-1)/2 spanning triangle/4-cycle layers so every
    degree drops to n-q with q = n mod (t-1); (2) remove vertex-disjoint
    K_(2t-1) copies until the edge count is divisible by t(t-1)/2; (3)
    K_t-decompose the rest, via the explicit triple-system / projective-plane
    families when they apply and lexicographic backtracking otherwise.
    Raises InfeasibleAtDeskScale when the instance needs more structure than
    desk-scale search provides.
    """
    if n % 2 == 0 or t % 2 == 0 or t < 3:
        raise CongruenceError(f"need odd n and odd t >= 3, got n={n}, t={t}")
    if n < t:
        raise CongruenceError(f"need n >= t, got n={n}, t={t}")

    q = n % (t - 1)  # odd, in {1, 3, ..., t-2}, since n is odd and t-1 even
    budget = _Budget(node_budget)

    adj: list[set[int]] = [set(range(n)) - {v} for v in range(n)]
    leftover_blocks: list[Block] = []

    for _ in range((q - 1) // 2):
        layer = _triangle_c4_factor(adj, n, budget)
        if layer is None:
            raise InfeasibleAtDeskScale(f"no spanning triangle/4-cycle layer found at (n={n}, t={t})")
        for block in layer:
            for u, v in block.edges():
                adj[u].discard(v)
                adj[v].discard(u)
        leftover_blocks.extend(layer)

    remaining_edges = n * (n - q) // 2
    per_block = t * (t - 1) // 2
    big_edges = (2 * t - 1) * (t - 1)
    k_copies = next(
        k for k in range(t) if (remaining_edges - k * big_edges) % per_block == 0
    )
    if k_copies * (2 * t - 1) > n:
        raise InfeasibleAtDeskScale(
            f"need {k_copies} vertex-disjoint K_{2 * t - 1} copies, which requires "
            f"{k_copies * (2 * t - 1)} vertices but n={n}"
        )
    if k_copies:
        cliques = _disjoint_cliques(adj, n, 2 * t - 1, k_copies, budget)
        if cliques is None:
            raise InfeasibleAtDeskScale(f"could not place {k_copies} disjoint K_{2 * t - 1} copies")
        for vs in cliques:
            leftover_blocks.append(Block(BlockKind.K2T1, vs))
            for a in range(len(vs)):
                for b in range(a + 1, len(vs)):
                    adj[vs[a]].discard(vs[b])
                    adj[vs[b]].discard(vs[a])

    residual = [(u, v) for u in range(n) for v in adj[u] if u < v]
    untouched = len(residual) == n * (n - 1) // 2

    kt_blocks: list[Block] | None = None
    if untouched:
        if t == 3 and n % 6 in (1, 3):
            kt_blocks = list(steiner_triple_system(n).blocks)
        elif t == 5 and n == 21:
            kt_blocks = list(projective_plane_decomposition(4).blocks)
    if kt_blocks is None:
        try:
            kt_blocks = backtracking_kt_decomposition(residual, t, node_budget=budget.left)
        except BudgetExceededError as exc:
            raise InfeasibleAtDeskScale(
                f"K_{t}-decomposition search for the residual graph at (n={n}, t={t}) "
                f"exceeded the node budget"
            ) from exc
        if kt_blocks is None:
            raise InfeasibleAtDeskScale(
                f"residual graph at (n={n}, t={t}) has no K_{t}-decomposition"
            )

    d = Decomposition(n, t, tuple(kt_blocks) + tuple(leftover_blocks))
    report = validate(d)
    if not report.ok:
        raise InvalidDecompositionError(f"internal error: {report.first_violation}")
    return d


def extend_to_even(d: Decomposition) -> Decomposition:
    """Extend a decomposition on odd m vertices to m+1 by star-paths at the new vertex.

    Adds (m-1)/2 star-paths (2i, m, 2i+1) and the single edge {m-1, m}.
    """
    report = validate(d)
    if not report.ok:
        raise InvalidDecompositionError(f"input decomposition invalid: {report.first_violation}")
    m = d.n
    if m % 2 == 0:
        raise CongruenceError("can only extend a decomposition on an odd vertex count")
    extra = [Block(BlockKind.STARPATH, (2 * i, m, 2 * i + 1)) for i in range((m - 1) // 2)]
    extra.append(Block(BlockKind.EDGE, (m - 1, m)))
    return Decomposition(m + 1, d.t, d.blocks + tuple(extra))


def gcd_identity_holds(t: int) -> bool:
    """Divisibility fact the K_(2t-1) removal step relies on, for odd t."""
    return math.gcd((2 * t - 1) * (t - 1), t * (t - 1) // 2) == (t - 1) // 2
