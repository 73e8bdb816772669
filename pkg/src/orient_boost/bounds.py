"""Closed-form probabilities, parameter selection, and boost formulas.

Everything here is exact rational arithmetic except the two evaluators that
are inherently real-valued (the k-regular boost product and the geometric
mean bound), which use log-space floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import count, permutations

from .errors import BudgetExceededError, InvalidTournamentError
from .orientations import Tournament, as_fraction


def expected_consistent(t: int) -> Fraction:
    return Fraction(t - 1, 2 * t - 4)


def expected_inconsistent(t: int) -> Fraction:
    return Fraction(t - 3, 2 * t - 4)


def expected_cyclic(t: int) -> Fraction:
    return Fraction(t + 1, 4 * (t - 2))


def expected_transitive(t: int) -> Fraction:
    return Fraction(3 * (t - 3), 4 * (t - 2))


@dataclass(frozen=True)
class RelabelCheck:
    """Measured vs predicted triple probabilities under uniform relabeling."""

    t: int
    consistent: Fraction
    inconsistent: Fraction
    cyclic: Fraction
    transitive: Fraction
    uniform_over_triples: bool
    method: str

    @property
    def ok(self) -> bool:
        t = self.t
        return (
            self.uniform_over_triples
            and self.consistent == expected_consistent(t)
            and self.inconsistent == expected_inconsistent(t)
            and self.cyclic == expected_cyclic(t)
            and self.transitive == expected_transitive(t)
        )


def verify_relabel_probabilities(r: Tournament, *, method: str = "auto") -> RelabelCheck:
    """Exhaustively measure pair/triangle probabilities under random relabeling.

    For every ordered vertex triple (x, y, z), over a uniform relabeling of
    r: the probability that the edges {x,y} and {y,z} form a directed path,
    and that {x,y,z} induces a directed triangle.  The 'permutations' method
    tallies every relabeling separately per triple (t <= 7); 'injections'
    groups the t! relabelings by their restriction to the triple, which is
    uniform over ordered injections, and scales exactly (t <= 13).
    """
    t = r.n
    if t % 2 == 0:
        raise InvalidTournamentError("relabeling probabilities need odd t")
    if not r.is_regular():
        raise InvalidTournamentError("base tournament must be regular")
    if method == "auto":
        method = "permutations" if t <= 7 else "injections"
    bm = tuple(tuple((r.rows[a] >> b) & 1 for b in range(t)) for a in range(t))

    if method == "permutations":
        if t > 7:
            raise BudgetExceededError(f"permutation tally infeasible at t={t}; use injections")
        perms = list(permutations(range(t)))
        total = len(perms)
        cons_counts = set()
        cyc_counts = set()
        for x in range(t):
            for y in range(t):
                if y == x:
                    continue
                for z in range(t):
                    if z in (x, y):
                        continue
                    cons = cyc = 0
                    for s in perms:
                        a, b, c = s[x], s[y], s[z]
                        if bm[a][b] == bm[b][c]:
                            cons += 1
                            if bm[a][b] == bm[c][a]:
                                cyc += 1
                    cons_counts.add(cons)
                    cyc_counts.add(cyc)
        uniform = len(cons_counts) == 1 and len(cyc_counts) == 1
        cons = Fraction(cons_counts.pop(), total)
        cyc = Fraction(cyc_counts.pop(), total)
    else:
        if t > 13:
            raise BudgetExceededError(f"injection tally infeasible at t={t}")
        cons = cyc = 0
        total = t * (t - 1) * (t - 2)
        for a in range(t):
            for b in range(t):
                if b == a:
                    continue
                for c in range(t):
                    if c in (a, b):
                        continue
                    if bm[a][b] == bm[b][c]:
                        cons += 1
                        if bm[a][b] == bm[c][a]:
                            cyc += 1
        # the restriction of a uniform relabeling to any ordered triple is a
        # uniform injection, identically for every source triple
        uniform = True
        cons = Fraction(cons, total)
        cyc = Fraction(cyc, total)

    return RelabelCheck(
        t=t,
        consistent=cons,
        inconsistent=1 - cons,
        cyclic=cyc,
        transitive=1 - cyc,
        uniform_over_triples=uniform,
        method=method,
    )


@dataclass(frozen=True)
class ParameterSolution:
    t: int
    rho: Fraction
    delta: Fraction
    eps: Fraction
    k: int


def inequalities_hold(t: int, eps, k: int) -> tuple[bool, bool, bool]:
    """The three selection inequalities at a candidate odd t, checked exactly.

    Rational exponents are removed by raising both sides to the exponent's
    denominator, which preserves order for positive bases.
    """
    eps = as_fraction(eps)
    exp3 = Fraction(3) - eps
    u, v = exp3.numerator, exp3.denominator
    first = Fraction(t + 1, t - 2) ** v >= Fraction(t - 1, t - 2) ** u

    rho = Fraction(1, t - 2)
    kk = Fraction(2 * k * k) / eps
    w, x = kk.numerator, kk.denominator
    lhs = (1 - rho * rho) ** w
    rhs = ((1 + rho / 2) / (1 + rho)) ** x
    second = lhs >= rhs

    third = t * eps >= 2
    return first, second, third


def solve_parameters(eps, k: int) -> ParameterSolution:
    """Least odd t satisfying all three selection inequalities."""
    eps = as_fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError("eps must be in (0, 1]")
    if k < 1:
        raise ValueError("k must be a positive integer")
    for t in count(3, 2):
        if all(inequalities_hold(t, eps, k)):
            return ParameterSolution(
                t=t, rho=Fraction(1, t - 2), delta=Fraction(1, 4 * (t - 2)), eps=eps, k=k
            )
    raise AssertionError("unreachable: the scan terminates for eps in (0,1]")


def kreg_boost_formula(k: int, t: int) -> float:
    """Finite-t boost product for k-regular patterns; tends to e^k as t grows."""
    if t < 5 or t % 2 == 0:
        raise ValueError(f"need odd t >= 5, got {t}")
    if k < 1:
        raise ValueError("k must be a positive integer")
    log = k * (t - 3) * math.log1p(1 / (t - 2))
    log += k * k * t * math.log1p(-1 / ((t - 2) ** 2))
    log += k * k * t * math.log1p(-(3 * t - 5) / ((t - 1) ** 3))
    return math.exp(log)


@dataclass(frozen=True)
class GeometricMeanBound:
    value: float
    margin: float | None
    margin_required: float | None

    @property
    def margin_ok(self) -> bool | None:
        if self.margin is None:
            return None
        return self.margin >= self.margin_required


def amgm_bound(averages, t: int, eps=None) -> GeometricMeanBound:
    """Geometric-mean lower bound on the boost ratio from capture averages.

    averages = (C, I, F, G): average per-copy captures.  The bound is
    ((t-1)/(t-2))^C ((t-3)/(t-2))^I ((t+1)/(t-2))^F ((t-3)/(t-2))^G.  With
    eps given, also reports the exponent margin C + (3-eps)F - I - G against
    the required eps*t/2.
    """
    c, i, f, g = (float(x) for x in averages)
    if min(c, i, f, g) < 0:
        raise ValueError("averages must be nonnegative")

    def power(num: int, den: int, exponent: float) -> float:
        if exponent == 0:
            return 1.0
        if num == 0:
            return 0.0
        return math.exp(exponent * math.log(num / den))

    value = (
        power(t - 1, t - 2, c)
        * power(t - 3, t - 2, i)
        * power(t + 1, t - 2, f)
        * power(t - 3, t - 2, g)
    )
    if eps is None:
        return GeometricMeanBound(value, None, None)
    eps = float(as_fraction(eps))
    margin = c + (3 - eps) * f - i - g
    return GeometricMeanBound(value, margin, eps * t / 2)
