"""Labeled-copy counting and expected-copy estimation.

A labeled copy of a pattern H in a tournament T is a permutation of the
vertex set mapping every directed edge of H onto an edge of T.  Under the
block-randomized tournament of a decomposition, the success probability of a
fixed permutation factors over blocks; this module computes that probability
exactly (per-block closed forms for the common shapes, injection enumeration
for everything else), sums it over all permutations on tiny instances, and
estimates it by seeded Monte Carlo otherwise.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations

from .designs import BlockKind, Decomposition
from .errors import BudgetExceededError
from .orientations import Orientation, Tournament
from .rng import stream_for
from .sampling import BaseTournaments

# ---------------------------------------------------------------------------
# exact counting in a fixed tournament
# ---------------------------------------------------------------------------

def count_labeled_copies(h: Orientation, t: Tournament, *, budget_n: int = 10) -> int:
    """Number of vertex permutations mapping every edge of h onto an edge of t.

    Brute force with backtracking; the unlabeled count is this divided by
    aut(h).  Over the budget, use the Hamilton-path/cycle DP or the
    estimator instead.
    """
    if h.n != t.n:
        raise ValueError(f"pattern has {h.n} vertices, tournament has {t.n}")
    n = h.n
    if n > budget_n:
        raise BudgetExceededError(
            f"n={n} over the brute-force budget {budget_n}; use the Hamilton DP "
            "specializations or the Monte Carlo estimator",
            size=n, budget=budget_n,
        )

    adj = h.underlying_adjacency()
    # place connected, high-degree vertices first
    order: list[int] = []
    seen = [False] * n
    for start in sorted(range(n), key=lambda v: -len(adj[v])):
        if seen[start] or not adj[start]:
            continue
        queue = [start]
        seen[start] = True
        while queue:
            u = queue.pop()
            order.append(u)
            for w in sorted(adj[u], key=lambda v: -len(adj[v])):
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    free = n - len(order)

    pos_in_order = {u: idx for idx, u in enumerate(order)}
    constraints: list[list[tuple[int, bool]]] = [[] for _ in order]
    for u, v in h.edges:
        iu, iv = pos_in_order[u], pos_in_order[v]
        if iu < iv:
            constraints[iv].append((iu, True))   # earlier vertex beats the new one? no:
        else:
            constraints[iu].append((iv, False))
    # (idx, True): edge order[idx] -> new vertex; (idx, False): new vertex -> order[idx]

    rows = t.rows
    assigned = [0] * len(order)
    total = 0

    def rec(depth: int, used: int):
        nonlocal total
        if depth == len(order):
            total += 1
            return
        cons = constraints[depth]
        for p in range(n):
            if (used >> p) & 1:
                continue
            ok = True
            for idx, earlier_is_tail in cons:
                q = assigned[idx]
                if earlier_is_tail:
                    if not (rows[q] >> p) & 1:
                        ok = False
                        break
                else:
                    if not (rows[p] >> q) & 1:
                        ok = False
                        break
            if ok:
                assigned[depth] = p
                rec(depth + 1, used | (1 << p))

    rec(0, 0)
    return total * math.factorial(free)


def count_hamilton_cycles(t: Tournament, *, budget_n: int = 24) -> int:
    """Directed Hamilton cycles by subset DP over (mask, endpoint)."""
    n = t.n
    if n > budget_n:
        raise BudgetExceededError(f"n={n} over the DP budget {budget_n}", size=n, budget=budget_n)
    if n < 3:
        return 0
    rows = t.rows
    full = (1 << n) - 1
    # dp[mask][v]: paths starting at 0, covering mask, ending at v
    dp = [None] * (1 << n)
    dp[1] = {0: 1}
    total = 0
    for mask in range(1, 1 << n):
        cur = dp[mask]
        if cur is None or not (mask & 1):
            continue
        for v, cnt in cur.items():
            avail = rows[v] & ~mask & full
            while avail:
                low = avail & -avail
                w = low.bit_length() - 1
                avail ^= low
                nm = mask | low
                d = dp[nm]
                if d is None:
                    d = {}
                    dp[nm] = d
                d[w] = d.get(w, 0) + cnt
        if mask != full:
            dp[mask] = None  # free memory
    last = dp[full] or {}
    for v, cnt in last.items():
        if v != 0 and (rows[v] >> 0) & 1:
            total += cnt
    return total


def count_hamilton_paths(t: Tournament, *, budget_n: int = 24) -> int:
    """Directed Hamilton paths by subset DP over (mask, endpoint)."""
    n = t.n
    if n > budget_n:
        raise BudgetExceededError(f"n={n} over the DP budget {budget_n}", size=n, budget=budget_n)
    if n == 1:
        return 1
    rows = t.rows
    full = (1 << n) - 1
    dp = [None] * (1 << n)
    for v in range(n):
        dp[1 << v] = {v: 1}
    total = 0
    for mask in range(1, 1 << n):
        cur = dp[mask]
        if cur is None:
            continue
        if mask == full:
            total += sum(cur.values())
            continue
        for v, cnt in cur.items():
            avail = rows[v] & ~mask & full
            while avail:
                low = avail & -avail
                w = low.bit_length() - 1
                avail ^= low
                nm = mask | low
                d = dp[nm]
                if d is None:
                    d = {}
                    dp[nm] = d
                d[w] = d.get(w, 0) + cnt
        dp[mask] = None
    return total


# ---------------------------------------------------------------------------
# per-permutation block statistics and success probability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CopyBlockStats:
    """Captures of a labeled copy inside single blocks.

    c/i: induced consistent/inconsistent pairs landing in one block;
    f/g: cyclic/transitive triangles landing in one block; typical means no
    non-complete-t block holds two edges and no size-t block holds three
    edges other than a triangle.
    """

    c: int
    i: int
    f: int
    g: int
    typical: bool


@dataclass(frozen=True)
class ExactSummary:
    expectation: Fraction
    ratio: Fraction
    typical_fraction: Fraction
    capture_averages: tuple[Fraction, Fraction, Fraction, Fraction]


class CopyKernel:
    """Per-permutation machinery for one (pattern, decomposition, bases) triple."""

    def __init__(self, h: Orientation, d: Decomposition, bases: BaseTournaments | None = None,
                 *, injection_budget: int = 500_000):
        if h.n != d.n:
            raise ValueError(f"pattern has {h.n} vertices, decomposition has {d.n}")
        self.h = h
        self.d = d
        self.bases = bases if bases is not None else BaseTournaments.circulant(d.t)
        if self.bases.r.n != d.t:
            raise ValueError(f"base tournament size {self.bases.r.n} does not match t={d.t}")
        self.injection_budget = injection_budget
        self.n = h.n
        self.t = d.t
        self.h_edges = sorted(h.edges)
        self.e = len(self.h_edges)
        self.h_pairs = {(u, v) if u < v else (v, u) for u, v in self.h_edges}
        self.pair_block = d.pair_block_index()
        self.block_kind = [b.kind for b in d.blocks]
        t = d.t
        self.factor_consistent = Fraction(t - 1, 4 * (t - 2))
        self.factor_inconsistent = Fraction(t - 3, 4 * (t - 2))
        self.factor_cyclic = Fraction(t + 1, 8 * (t - 2))
        self.factor_transitive = Fraction(t - 3, 8 * (t - 2))
        # ratio contributions (factor times 2^edges); singles contribute 1
        self.r_consistent = self.factor_consistent * 4
        self.r_inconsistent = self.factor_inconsistent * 4
        self.r_cyclic = self.factor_cyclic * 8
        self.r_transitive = self.factor_transitive * 8
        self._vertex_index = [
            {v: k for k, v in enumerate(b.vertices)} for b in d.blocks
        ]

    # -- grouping ----------------------------------------------------------

    def groups(self, pi) -> dict[int, list[tuple[int, int]]]:
        """H-edges keyed by the index of the block covering their image."""
        out: dict[int, list[tuple[int, int]]] = {}
        pair_block = self.pair_block
        for u, v in self.h_edges:
            bid = pair_block[pi[u]][pi[v]]
            if bid in out:
                out[bid].append((u, v))
            else:
                out[bid] = [(u, v)]
        return out

    # -- classification ----------------------------------------------------

    def _pair_kind(self, e1: tuple[int, int], e2: tuple[int, int]) -> str | None:
        """'c'/'i' for an induced consistent/inconsistent pair, None otherwise."""
        u1, v1 = e1
        u2, v2 = e2
        shared = {u1, v1} & {u2, v2}
        if len(shared) != 1:
            return None
        s = shared.pop()
        a = u1 if v1 == s else v1
        b = u2 if v2 == s else v2
        key = (a, b) if a < b else (b, a)
        if key in self.h_pairs:
            return None  # outer endpoints adjacent: not induced
        into_a = v1 == s
        into_b = v2 == s
        return "c" if into_a != into_b else "i"

    def _triangle_kind(self, edges3) -> str | None:
        verts = set()
        for u, v in edges3:
            verts.add(u)
            verts.add(v)
        if len(verts) != 3:
            return None
        heads = {v for _, v in edges3}
        return "f" if len(heads) == 3 else "g"

    def block_stats(self, pi) -> CopyBlockStats:
        c = i = f = g = 0
        typical = True
        for bid, group in self.groups(pi).items():
            m = len(group)
            if m < 2:
                continue
            kind = self.block_kind[bid]
            if kind != BlockKind.KT:
                typical = False
            for e1, e2 in combinations(group, 2):
                pk = self._pair_kind(e1, e2)
                if pk == "c":
                    c += 1
                elif pk == "i":
                    i += 1
            if m >= 3:
                for tri in combinations(group, 3):
                    tk = self._triangle_kind(tri)
                    if tk == "f":
                        f += 1
                    elif tk == "g":
                        g += 1
                if kind == BlockKind.KT and (m > 3 or self._triangle_kind(tuple(group)) is None):
                    # three-plus edges in one size-t block that are not a single triangle
                    typical = False
        return CopyBlockStats(c, i, f, g, typical)

    # -- per-block success probabilities ------------------------------------

    def _coin_block_probability(self, bid: int, group, pi) -> Fraction:
        block = self.d.blocks[bid]
        vs = block.vertices
        k = len(vs)
        if block.kind in (BlockKind.C3, BlockKind.C4):
            outcomes = [
                {(vs[a], vs[(a + 1) % k]) for a in range(k)},
                {(vs[(a + 1) % k], vs[a]) for a in range(k)},
            ]
        elif block.kind == BlockKind.STARPATH:
            l1, cc, l2 = vs
            outcomes = [{(l1, cc), (cc, l2)}, {(l2, cc), (cc, l1)}]
        else:
            u, v = vs
            outcomes = [{(u, v)}, {(v, u)}]
        mapped = [(pi[u], pi[v]) for u, v in group]
        hits = sum(1 for oc in outcomes if all(e in oc for e in mapped))
        return Fraction(hits, 2)

    def _complete_block_probability(self, bid: int, group, pi) -> Fraction:
        block = self.d.blocks[bid]
        base = self.bases.r if block.kind == BlockKind.KT else self.bases.rstar
        size = len(block.vertices)
        vidx = self._vertex_index[bid]
        touched: list[int] = []
        seen: dict[int, int] = {}
        mapped: list[tuple[int, int]] = []
        for u, v in group:
            a, b = vidx[pi[u]], vidx[pi[v]]
            for x in (a, b):
                if x not in seen:
                    seen[x] = len(touched)
                    touched.append(x)
            mapped.append((seen[a], seen[b]))
        m = len(touched)
        total = math.perm(size, m)
        if total > self.injection_budget:
            raise BudgetExceededError(
                f"block {bid} needs {total} injections, over the budget "
                f"{self.injection_budget}", size=total, budget=self.injection_budget,
            )
        hits = 0
        for inj in permutations(range(size), m):
            if all(base.beats(inj[a], inj[b]) for a, b in mapped):
                hits += 1
        return Fraction(hits, total)

    def _auto_block_factor(self, bid: int, group) -> tuple[Fraction, bool]:
        """(probability * 2^edges, handled) for the closed-form shapes."""
        kind = self.block_kind[bid]
        m = len(group)
        if m == 1:
            return Fraction(1), True
        if kind == BlockKind.KT:
            if m == 2:
                pk = self._pair_kind(group[0], group[1])
                if pk == "c":
                    return self.r_consistent, True
                if pk == "i":
                    return self.r_inconsistent, True
                # disjoint edges: independent halves
                return Fraction(1), True
            if m == 3:
                tk = self._triangle_kind(group)
                if tk == "f":
                    return self.r_cyclic, True
                if tk == "g":
                    return self.r_transitive, True
        return Fraction(0), False

    def ratio(self, pi, *, method: str = "auto") -> Fraction:
        """Success probability of the copy, scaled by 2^e(H)."""
        result = Fraction(1)
        for bid, group in self.groups(pi).items():
            kind = self.block_kind[bid]
            if method == "auto":
                fac, handled = self._auto_block_factor(bid, group)
                if handled:
                    result *= fac
                    continue
            if kind in (BlockKind.KT, BlockKind.K2T1):
                p = self._complete_block_probability(bid, group, pi)
            else:
                p = self._coin_block_probability(bid, group, pi)
            result *= p * (1 << len(group))
        return result

    def probability(self, pi, *, method: str = "auto") -> Fraction:
        return self.ratio(pi, method=method) / (1 << self.e)

    def ratio_and_stats(self, pi) -> tuple[Fraction, CopyBlockStats]:
        return self.ratio(pi), self.block_stats(pi)


def typical_closed_form(stats: CopyBlockStats, e: int, t: int) -> Fraction:
    """Product formula for the success probability of a typical copy."""
    p = Fraction(1, 2) ** (e - 2 * stats.c - 2 * stats.i - 3 * stats.f - 3 * stats.g)
    if stats.c:
        p *= Fraction(t - 1, 4 * (t - 2)) ** stats.c
    if stats.i:
        p *= Fraction(t - 3, 4 * (t - 2)) ** stats.i
    if stats.f:
        p *= Fraction(t + 1, 8 * (t - 2)) ** stats.f
    if stats.g:
        p *= Fraction(t - 3, 8 * (t - 2)) ** stats.g
    return p


def copy_block_stats(pi, h: Orientation, d: Decomposition) -> CopyBlockStats:
    if len(pi) != h.n or h.n != d.n:
        raise ValueError("permutation, pattern, and decomposition sizes must agree")
    return CopyKernel(h, d).block_stats(pi)


def copy_probability(pi, h: Orientation, d: Decomposition, bases: BaseTournaments | None = None,
                     *, method: str = "auto") -> Fraction:
    if len(pi) != h.n or h.n != d.n:
        raise ValueError("permutation, pattern, and decomposition sizes must agree")
    return CopyKernel(h, d, bases).probability(pi, method=method)


# ---------------------------------------------------------------------------
# exact expectation on tiny instances
# ---------------------------------------------------------------------------

def exact_copy_summary(h: Orientation, d: Decomposition, bases: BaseTournaments | None = None,
                       *, budget_n: int = 9) -> ExactSummary:
    """Sum the per-permutation probabilities over all n! permutations."""
    n = h.n
    if n > budget_n:
        raise BudgetExceededError(
            f"exact expectation sums {n}! terms; budget is n <= {budget_n}",
            size=n, budget=budget_n,
        )
    kernel = CopyKernel(h, d, bases)
    total = Fraction(0)
    typical = 0
    sums = [0, 0, 0, 0]
    for pi in permutations(range(n)):
        r, st = kernel.ratio_and_stats(pi)
        total += r
        typical += st.typical
        sums[0] += st.c
        sums[1] += st.i
        sums[2] += st.f
        sums[3] += st.g
    nfact = math.factorial(n)
    return ExactSummary(
        expectation=total / (1 << kernel.e),
        ratio=total / nfact,
        typical_fraction=Fraction(typical, nfact),
        capture_averages=tuple(Fraction(s, nfact) for s in sums),
    )


def exact_expected_copies(h: Orientation, d: Decomposition, bases: BaseTournaments | None = None,
                          *, budget_n: int = 9) -> Fraction:
    return exact_copy_summary(h, d, bases, budget_n=budget_n).expectation


def exact_block_averages(h: Orientation, d: Decomposition,
                         *, budget_n: int = 9) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    return exact_copy_summary(h, d, budget_n=budget_n).capture_averages


# ---------------------------------------------------------------------------
# Monte Carlo estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateReport:
    n: int
    t: int
    e: int
    samples: int
    master_seed: int
    baseline: Fraction
    baseline_log2: float
    ratio: float
    ratio_stderr: float
    estimate: float
    estimate_log2: float
    typical_fraction: float
    capture_means: tuple[float, float, float, float]


@dataclass(frozen=True)
class BlockAverages:
    samples: int
    c_avg: float
    i_avg: float
    f_avg: float
    g_avg: float
    c_stderr: float
    i_stderr: float
    f_stderr: float
    g_stderr: float


def _scan_chunk(h: Orientation, d: Decomposition, bases: BaseTournaments,
                master: int, lo: int, hi: int):
    """Exact partial sums over sample indices [lo, hi)."""
    kernel = CopyKernel(h, d, bases)
    n = h.n
    r_sum = Fraction(0)
    r_sq = Fraction(0)
    typical = 0
    s = [0, 0, 0, 0]
    sq = [0, 0, 0, 0]
    for index in range(lo, hi):
        pi = stream_for(master, index).permutation(n)
        r, st = kernel.ratio_and_stats(pi)
        r_sum += r
        r_sq += r * r
        typical += st.typical
        vals = (st.c, st.i, st.f, st.g)
        for k in range(4):
            s[k] += vals[k]
            sq[k] += vals[k] * vals[k]
    return r_sum, r_sq, typical, s, sq


def _scan_chunk_star(args):
    return _scan_chunk(*args)


def _scan_samples(h, d, bases, samples: int, master: int, workers: int):
    if workers <= 1 or samples < 2:
        return _scan_chunk(h, d, bases, master, 0, samples)
    chunk = max(256, samples // (workers * 8))
    spans = [(h, d, bases, master, lo, min(lo + chunk, samples)) for lo in range(0, samples, chunk)]
    r_sum = Fraction(0)
    r_sq = Fraction(0)
    typical = 0
    s = [0, 0, 0, 0]
    sq = [0, 0, 0, 0]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for pr, pq, pt, ps, psq in pool.map(_scan_chunk_star, spans):
            r_sum += pr
            r_sq += pq
            typical += pt
            for k in range(4):
                s[k] += ps[k]
                sq[k] += psq[k]
    return r_sum, r_sq, typical, s, sq


def worker_count_from_env() -> int:
    """ORIENT_BOOST_THREADS; never affects numeric output, only wall time."""
    raw = os.environ.get("ORIENT_BOOST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _mean_stderr(total, total_sq, m: int) -> tuple[float, float]:
    mean = total / m
    if m < 2:
        return float(mean), 0.0
    var = (total_sq - total * total / m) / (m - 1)
    var = max(var, 0)
    return float(mean), math.sqrt(float(var) / m)


def estimate_expected_copies(h: Orientation, d: Decomposition, bases: BaseTournaments | None = None,
                             *, samples: int, master_seed: int, workers: int = 1) -> EstimateReport:
    """Unbiased Monte Carlo estimate of the expected labeled-copy count.

    Per-sample probabilities are exact rationals; sums are accumulated
    exactly and converted to floats only in the report, so results are
    bit-identical for any worker count.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if bases is None:
        bases = BaseTournaments.circulant(d.t)
    r_sum, r_sq, typical, s, sq = _scan_samples(h, d, bases, samples, master_seed, workers)
    e = h.edge_count
    n = h.n
    baseline = Fraction(math.factorial(n), 1 << e)
    ratio, stderr = _mean_stderr(r_sum, r_sq, samples)
    baseline_log2 = log2_fraction(baseline)
    means = []
    for k in range(4):
        mk, _ = _mean_stderr(Fraction(s[k]), Fraction(sq[k]), samples)
        means.append(mk)
    estimate = float(baseline) * ratio if baseline < Fraction(10 ** 300) else math.inf
    return EstimateReport(
        n=n, t=d.t, e=e, samples=samples, master_seed=master_seed,
        baseline=baseline, baseline_log2=baseline_log2,
        ratio=ratio, ratio_stderr=stderr,
        estimate=estimate,
        estimate_log2=baseline_log2 + (math.log2(ratio) if ratio > 0 else -math.inf),
        typical_fraction=typical / samples,
        capture_means=tuple(means),
    )


def empirical_block_averages(h: Orientation, d: Decomposition, *, samples: int,
                             master_seed: int, workers: int = 1) -> BlockAverages:
    """Sample means of the per-copy block captures over uniform permutations."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    bases = BaseTournaments.circulant(d.t)
    _, _, _, s, sq = _scan_samples(h, d, bases, samples, master_seed, workers)
    out = []
    for k in range(4):
        out.append(_mean_stderr(Fraction(s[k]), Fraction(sq[k]), samples))
    return BlockAverages(
        samples=samples,
        c_avg=out[0][0], i_avg=out[1][0], f_avg=out[2][0], g_avg=out[3][0],
        c_stderr=out[0][1], i_stderr=out[1][1], f_stderr=out[2][1], g_stderr=out[3][1],
    )


def log2_fraction(x: Fraction) -> float:
    if x <= 0:
        raise ValueError("log of a non-positive value")
    num, den = x.numerator, x.denominator
    return (num.bit_length() - den.bit_length()) + math.log2(
        num / (1 << num.bit_length()) * (1 << den.bit_length()) / den
    )


def baseline_expected_copies(h: Orientation) -> Fraction:
    """Expected labeled copies in the uniform coin-flip tournament: n!/2^e."""
    return Fraction(math.factorial(h.n), 1 << h.edge_count)
