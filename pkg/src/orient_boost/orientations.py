"""Directed patterns (orientations) and tournaments.

An orientation is a simple digraph with no 2-cycles on vertices 0..n-1.  A
tournament orients every pair.  Vertices are dense 0-based integers and all
values here are immutable, so they can be shared freely across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidOrientationError, InvalidTournamentError, RejectionBudgetError
from .rng import stream_for


@dataclass(frozen=True)
class Orientation:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidOrientationError("vertex count must be positive")
        for u, v in self.edges:
            if u == v:
                raise InvalidOrientationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidOrientationError(f"edge ({u},{v}) out of range for n={self.n}")
            if (v, u) in self.edges:
                raise InvalidOrientationError(f"2-cycle between {min(u, v)} and {max(u, v)}")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def out_degrees(self) -> list[int]:
        d = [0] * self.n
        for u, _ in self.edges:
            d[u] += 1
        return d

    def in_degrees(self) -> list[int]:
        d = [0] * self.n
        for _, v in self.edges:
            d[v] += 1
        return d

    def underlying_adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def relabel(self, perm: list[int]) -> "Orientation":
        return Orientation(self.n, frozenset((perm[u], perm[v]) for u, v in self.edges))

    def to_json_obj(self) -> dict:
        return {"n": self.n, "edges": sorted([u, v] for u, v in self.edges)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def orientation_from_edges(n: int, edges) -> Orientation:
    """Build an orientation, rejecting duplicates with a diagnostic."""
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        if (u, v) in seen:
            raise InvalidOrientationError(f"duplicate edge ({u},{v})")
        seen.add((u, v))
    return Orientation(n, frozenset(seen))


def orientation_from_json(text: str) -> Orientation:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidOrientationError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise InvalidOrientationError('expected an object {"n": int, "edges": [[u,v],...]}')
    return orientation_from_edges(int(obj["n"]), [(int(u), int(v)) for u, v in obj["edges"]])


def orientation_from_text(text: str) -> Orientation:
    """Plain-text format: first line n, then one "u v" line per edge."""
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise InvalidOrientationError("empty input")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise InvalidOrientationError(f"bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return orientation_from_edges(n, edges)


@dataclass(frozen=True)
class OrientationStats:
    """Pair and triangle statistics of a directed pattern.

    plus/minus count directed and anti-directed 2-edge paths; c/i count the
    induced consistent and inconsistent pairs (outer endpoints non-adjacent);
    f/g count cyclic and transitive triangles.
    """

    plus: int
    minus: int
    c: int
    i: int
    f: int
    g: int
    e: int
    maxdeg: int


def stats(h: Orientation) -> OrientationStats:
    n = h.n
    dout = [0] * n
    din = [0] * n
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in h.edges:
        dout[u] += 1
        din[v] += 1
        adj[u].add(v)
        adj[v].add(u)

    plus = sum(dout[v] * din[v] for v in range(n))
    minus = sum(dout[v] * (dout[v] - 1) // 2 + din[v] * (din[v] - 1) // 2 for v in range(n))
    maxdeg = max((len(adj[v]) for v in range(n)), default=0)

    edges = h.edges
    f, g = _triangle_counts(h, adj)

    c = i = 0
    for v in range(n):
        nb = sorted(adj[v])
        for idx_a in range(len(nb)):
            a = nb[idx_a]
            for b in nb[idx_a + 1:]:
                if b in adj[a]:
                    continue  # pair is not induced
                into_a = (a, v) in edges
                into_b = (b, v) in edges
                if into_a != into_b:
                    c += 1
                else:
                    i += 1
    return OrientationStats(plus, minus, c, i, f, g, len(edges), maxdeg)


def _triangle_counts(h: Orientation, adj: list[set[int]]) -> tuple[int, int]:
    edges = h.edges
    f = g = 0
    for u in range(h.n):
        for v in adj[u]:
            if v <= u:
                continue
            for w in adj[u] & adj[v]:
                if w <= v:
                    continue
                cyclic = ((u, v) in edges and (v, w) in edges and (w, u) in edges) or (
                    (v, u) in edges and (w, v) in edges and (u, w) in edges
                )
                if cyclic:
                    f += 1
                else:
                    g += 1
    return f, g


@dataclass(frozen=True)
class OrientationFlags:
    even: bool
    eulerian: bool
    balanced: bool
    k_regular: int | None


def classify(h: Orientation) -> OrientationFlags:
    dout = h.out_degrees()
    din = h.in_degrees()
    even = all(dout[v] == din[v] for v in range(h.n))
    balanced = all(abs(dout[v] - din[v]) <= 1 for v in range(h.n))
    k_regular = None
    if even and len(set(dout)) == 1:
        k_regular = dout[0]
    eulerian = even and _connected(h)
    return OrientationFlags(even, eulerian, balanced, k_regular)


def _connected(h: Orientation) -> bool:
    if h.n == 1:
        return True
    adj = h.underlying_adjacency()
    seen = {0}
    frontier = [0]
    while frontier:
        u = frontier.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return len(seen) == h.n


def consistency_check(h: Orientation, eps, k: int) -> bool:
    """True iff max degree <= k and plus - minus >= eps * n.

    The degree condition uses the maximum total degree of the underlying
    graph.  eps is treated as an exact rational (floats go through their
    decimal repr).
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    s = stats(h)
    return s.maxdeg <= k and Fraction(s.plus - s.minus) >= eps * h.n


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def make_pattern(kind: str, n: int, k: int | None = None, seed: int | None = None,
                 max_attempts: int = 20_000) -> Orientation:
    """Construct a named test pattern.

    kinds: "cycle" (n >= 3), "path", "matching" (n even), and
    "k_regular_random" (2k < n): the union of k seeded random cyclic vertex
    orders, rejection-sampled until no repeated or opposite edges occur.
    """
    if kind == "cycle":
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        return orientation_from_edges(n, [(v, (v + 1) % n) for v in range(n)])
    if kind == "path":
        if n < 2:
            raise ValueError("path needs n >= 2")
        return orientation_from_edges(n, [(v, v + 1) for v in range(n - 1)])
    if kind == "matching":
        if n < 2 or n % 2:
            raise ValueError("matching needs even n >= 2")
        return orientation_from_edges(n, [(2 * v, 2 * v + 1) for v in range(n // 2)])
    if kind == "k_regular_random":
        if k is None or k < 1:
            raise ValueError("k_regular_random needs k >= 1")
        if 2 * k >= n:
            raise ValueError("k_regular_random needs 2k < n")
        stream = stream_for(0 if seed is None else seed)
        for _ in range(max_attempts):
            edges: set[tuple[int, int]] = set()
            ok = True
            for _cycle in range(k):
                order = stream.permutation(n)
                for idx in range(n):
                    u, v = order[idx], order[(idx + 1) % n]
                    if (u, v) in edges or (v, u) in edges:
                        ok = False
                        break
                    edges.add((u, v))
                if not ok:
                    break
            if ok:
                return Orientation(n, frozenset(edges))
        raise RejectionBudgetError(
            f"no collision-free union of {k} cyclic orders in {max_attempts} attempts; retry with a new seed"
        )
    raise ValueError(f"unknown pattern kind: {kind}")


def random_orientation(n: int, num_edges: int, seed: int) -> Orientation:
    """Seeded orientation with exactly num_edges edges on uniformly chosen pairs."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not 0 <= num_edges <= len(pairs):
        raise ValueError("num_edges out of range")
    stream = stream_for(seed)
    # partial Fisher-Yates: the first num_edges entries are a uniform sample
    for idx in range(num_edges):
        j = idx + stream.below(len(pairs) - idx)
        pairs[idx], pairs[j] = pairs[j], pairs[idx]
    edges = []
    for u, v in pairs[:num_edges]:
        edges.append((u, v) if stream.coin() else (v, u))
    return orientation_from_edges(n, edges)


@dataclass(frozen=True)
class Tournament:
    """Complete orientation, stored as bit rows: rows[u] bit v set iff u beats v."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise InvalidTournamentError("row count does not match n")
        full = (1 << self.n) - 1
        for u in range(self.n):
            if self.rows[u] & ~full:
                raise InvalidTournamentError(f"row {u} has bits beyond n")
            if (self.rows[u] >> u) & 1:
                raise InvalidTournamentError(f"self-edge at vertex {u}")
        for u in range(self.n):
            for v in range(u + 1, self.n):
                if ((self.rows[u] >> v) & 1) == ((self.rows[v] >> u) & 1):
                    raise InvalidTournamentError(f"pair {{{u},{v}}} not oriented exactly once")

    def beats(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def out_degree(self, u: int) -> int:
        return bin(self.rows[u]).count("1")

    def out_degrees(self) -> list[int]:
        return [self.out_degree(u) for u in range(self.n)]

    def in_degree(self, u: int) -> int:
        return self.n - 1 - self.out_degree(u)

    def is_regular(self) -> bool:
        return self.n % 2 == 1 and all(self.out_degree(u) == (self.n - 1) // 2 for u in range(self.n))

    def is_balanced(self) -> bool:
        return all(self.in_degree(u) in (self.n // 2 - 1, self.n // 2) for u in range(self.n))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in range(self.n) if (self.rows[u] >> v) & 1]

    def to_orientation(self) -> Orientation:
        return Orientation(self.n, frozenset(self.edges()))

    def to_json_obj(self) -> dict:
        return {"n": self.n, "edges": self.edges()}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    def to_hex_text(self) -> str:
        """Compact form: line 1 is n, then one hex row per vertex.

        Row u encodes bits "u beats v" for v ascending, packed big-endian
        within each byte (bit 7 of byte 0 is v=0).
        """
        nbytes = (self.n + 7) // 8
        lines = [str(self.n)]
        for u in range(self.n):
            buf = bytearray(nbytes)
            row = self.rows[u]
            for v in range(self.n):
                if (row >> v) & 1:
                    buf[v // 8] |= 1 << (7 - v % 8)
            lines.append(buf.hex())
        return "\n".join(lines) + "\n"


def tournament_from_edges(n: int, edges) -> Tournament:
    rows = [0] * n
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise InvalidTournamentError(f"bad edge ({u},{v})")
        rows[u] |= 1 << v
    return Tournament(n, tuple(rows))


def tournament_from_json(text: str) -> Tournament:
    obj = json.loads(text)
    return tournament_from_edges(int(obj["n"]), [(int(u), int(v)) for u, v in obj["edges"]])


def tournament_from_hex_text(text: str) -> Tournament:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise InvalidTournamentError("empty input")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise InvalidTournamentError(f"expected {n} hex rows, got {len(lines) - 1}")
    rows = []
    for u in range(n):
        buf = bytes.fromhex(lines[u + 1])
        row = 0
        for v in range(n):
            if (buf[v // 8] >> (7 - v % 8)) & 1:
                row |= 1 << v
        rows.append(row)
    return Tournament(n, tuple(rows))


def random_tournament(n: int, seed: int) -> Tournament:
    """Every pair oriented by an independent fair coin."""
    stream = stream_for(seed)
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if stream.coin():
                rows[u] |= 1 << v
            else:
                rows[v] |= 1 << u
    return Tournament(n, tuple(rows))


def transitive_tournament(n: int) -> Tournament:
    rows = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            rows[u] |= 1 << v
    return Tournament(n, tuple(rows))
