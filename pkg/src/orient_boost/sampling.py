"""Block-randomized tournaments over a decomposition.

Each block is oriented independently: complete blocks receive a fixed regular
base tournament under a uniformly random vertex relabeling, cycles become
directed cycles with a fair coin for the direction, star-paths become
directed 2-edge paths, and single edges get a fair coin.  For odd n the
result is always a regular tournament; the even-n star-path layer yields a
balanced one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .designs import Block, BlockKind, Decomposition
from .errors import BudgetExceededError, InvalidTournamentError
from .orientations import Tournament
from .rng import Stream, stream_for


def circulant_regular_tournament(m: int) -> Tournament:
    """Vertex i beats i+1, ..., i+(m-1)/2 (mod m)."""
    if m < 3 or m % 2 == 0:
        raise InvalidTournamentError(f"circulant tournament needs odd m >= 3, got {m}")
    rows = [0] * m
    for i in range(m):
        for d in range(1, (m - 1) // 2 + 1):
            rows[i] |= 1 << ((i + d) % m)
    return Tournament(m, tuple(rows))


def quadratic_residue_tournament(p: int) -> Tournament:
    """i beats j iff j-i is a nonzero square mod p (p prime, p = 3 mod 4)."""
    if p < 3 or p % 4 != 3 or any(p % d == 0 for d in range(2, int(math.isqrt(p)) + 1)):
        raise InvalidTournamentError(f"need a prime p = 3 (mod 4), got {p}")
    squares = {(x * x) % p for x in range(1, p)}
    rows = [0] * p
    for i in range(p):
        for j in range(p):
            if i != j and (j - i) % p in squares:
                rows[i] |= 1 << j
    return Tournament(p, tuple(rows))


@dataclass(frozen=True)
class BaseTournaments:
    """The fixed regular tournaments placed on complete blocks: size t and 2t-1."""

    r: Tournament
    rstar: Tournament

    def __post_init__(self):
        if not self.r.is_regular():
            raise InvalidTournamentError("base tournament on t vertices is not regular")
        if not self.rstar.is_regular():
            raise InvalidTournamentError("base tournament on 2t-1 vertices is not regular")
        if self.rstar.n != 2 * self.r.n - 1:
            raise InvalidTournamentError(
                f"size mismatch: got {self.r.n} and {self.rstar.n}, expected t and 2t-1"
            )

    @classmethod
    def circulant(cls, t: int) -> "BaseTournaments":
        return cls(circulant_regular_tournament(t), circulant_regular_tournament(2 * t - 1))


@dataclass(frozen=True)
class SampleSeed:
    """(master seed, sample index); the pair fully determines the draw."""

    master: int
    index: int = 0

    def stream(self) -> Stream:
        return stream_for(self.master, self.index)


def _orient_block(block: Block, bases: BaseTournaments, stream: Stream, rows: list[int]) -> None:
    vs = block.vertices
    if block.kind in (BlockKind.KT, BlockKind.K2T1):
        base = bases.r if block.kind == BlockKind.KT else bases.rstar
        sigma = stream.permutation(len(vs))
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                if base.beats(sigma[a], sigma[b]):
                    rows[vs[a]] |= 1 << vs[b]
                else:
                    rows[vs[b]] |= 1 << vs[a]
    elif block.kind in (BlockKind.C3, BlockKind.C4):
        forward = stream.coin()
        k = len(vs)
        for a in range(k):
            u, v = vs[a], vs[(a + 1) % k]
            if forward:
                rows[u] |= 1 << v
            else:
                rows[v] |= 1 << u
    elif block.kind == BlockKind.STARPATH:
        l1, c, l2 = vs
        if stream.coin():
            rows[l1] |= 1 << c
            rows[c] |= 1 << l2
        else:
            rows[l2] |= 1 << c
            rows[c] |= 1 << l1
    else:  # EDGE
        u, v = vs
        if stream.coin():
            rows[u] |= 1 << v
        else:
            rows[v] |= 1 << u


def sample(d: Decomposition, bases: BaseTournaments, seed: SampleSeed) -> Tournament:
    """Draw one block-randomized tournament; pure in (d, bases, seed)."""
    if bases.r.n != d.t:
        raise InvalidTournamentError(f"base tournament has {bases.r.n} vertices, decomposition t={d.t}")
    stream = seed.stream()
    rows = [0] * d.n
    for block in d.blocks:
        _orient_block(block, bases, stream, rows)
    return Tournament(d.n, tuple(rows))


def _block_outcomes(block: Block, bases: BaseTournaments) -> list[tuple[tuple[tuple[int, int], ...], Fraction]]:
    """Distinct edge orientations of one block with their probabilities."""
    vs = block.vertices
    if block.kind in (BlockKind.KT, BlockKind.K2T1):
        base = bases.r if block.kind == BlockKind.KT else bases.rstar
        k = len(vs)
        counts: dict[tuple[tuple[int, int], ...], int] = {}
        for sigma in permutations(range(k)):
            edges = []
            for a in range(k):
                for b in range(a + 1, k):
                    if base.beats(sigma[a], sigma[b]):
                        edges.append((vs[a], vs[b]))
                    else:
                        edges.append((vs[b], vs[a]))
            key = tuple(edges)
            counts[key] = counts.get(key, 0) + 1
        total = math.factorial(k)
        return [(key, Fraction(cnt, total)) for key, cnt in sorted(counts.items())]
    if block.kind in (BlockKind.C3, BlockKind.C4):
        k = len(vs)
        fwd = tuple((vs[a], vs[(a + 1) % k]) for a in range(k))
        bwd = tuple((vs[(a + 1) % k], vs[a]) for a in range(k))
        return [(fwd, Fraction(1, 2)), (bwd, Fraction(1, 2))]
    if block.kind == BlockKind.STARPATH:
        l1, c, l2 = vs
        return [(((l1, c), (c, l2)), Fraction(1, 2)), (((l2, c), (c, l1)), Fraction(1, 2))]
    u, v = vs
    return [(((u, v),), Fraction(1, 2)), (((v, u),), Fraction(1, 2))]


def support_size(d: Decomposition) -> int:
    """Raw outcome count: t! per complete block of size t, 2 per coin block."""
    size = 1
    for block in d.blocks:
        if block.kind in (BlockKind.KT, BlockKind.K2T1):
            size *= math.factorial(len(block.vertices))
        else:
            size *= 2
    return size


def enumerate_support(d: Decomposition, bases: BaseTournaments, *, budget: int = 1_000_000):
    """Yield every (tournament, probability) of the block-randomized space.

    Identical block orientations reached by different relabelings are merged
    first, so the yielded outcomes are distinct per block.  Weights sum to 1.
    """
    if bases.r.n != d.t:
        raise InvalidTournamentError(f"base tournament has {bases.r.n} vertices, decomposition t={d.t}")
    raw = support_size(d)
    if raw > budget:
        raise BudgetExceededError(
            f"support has {raw} outcomes, over the budget of {budget}", size=raw, budget=budget
        )
    per_block = [_block_outcomes(block, bases) for block in d.blocks]

    def rec(idx: int, rows: list[int], weight: Fraction):
        if idx == len(per_block):
            yield Tournament(d.n, tuple(rows)), weight
            return
        for edges, w in per_block[idx]:
            nxt = list(rows)
            for u, v in edges:
                nxt[u] |= 1 << v
            yield from rec(idx + 1, nxt, weight * w)

    yield from rec(0, [0] * d.n, Fraction(1))
