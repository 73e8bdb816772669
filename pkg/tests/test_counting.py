import math
from fractions import Fraction
from itertools import permutations

import pytest

from orient_boost.counting import (
    CopyKernel,
    baseline_expected_copies,
    copy_block_stats,
    copy_probability,
    count_hamilton_cycles,
    count_hamilton_paths,
    count_labeled_copies,
    empirical_block_averages,
    estimate_expected_copies,
    exact_block_averages,
    exact_copy_summary,
    exact_expected_copies,
    typical_closed_form,
)
from orient_boost.designs import Block, BlockKind, Decomposition, steiner_triple_system
from orient_boost.errors import BudgetExceededError
from orient_boost.orientations import (
    make_pattern,
    orientation_from_edges,
    random_orientation,
    random_tournament,
    tournament_from_edges,
    transitive_tournament,
)
from orient_boost.rng import stream_for
from orient_boost.sampling import BaseTournaments, circulant_regular_tournament, enumerate_support


def all_tournaments(n):
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    for bits in range(1 << len(pairs)):
        edges = [(u, v) if (bits >> k) & 1 else (v, u) for k, (u, v) in enumerate(pairs)]
        yield tournament_from_edges(n, edges)


def test_count_triangle_copies():
    c3 = make_pattern("cycle", 3)
    triangle = tournament_from_edges(3, [(0, 1), (1, 2), (2, 0)])
    assert count_labeled_copies(c3, triangle) == 3
    assert count_labeled_copies(c3, transitive_tournament(3)) == 0


def test_matching_counts_are_tournament_independent():
    m2 = make_pattern("matching", 4)
    assert all(count_labeled_copies(m2, t) == 6 for t in all_tournaments(4))
    for n in (6, 8):
        m = make_pattern("matching", n)
        expected = math.factorial(n) // 2 ** (n // 2)
        for seed in range(25):
            assert count_labeled_copies(m, random_tournament(n, seed)) == expected


def test_count_budget_error_mentions_alternatives():
    with pytest.raises(BudgetExceededError, match="estimator"):
        count_labeled_copies(make_pattern("cycle", 11), random_tournament(11, 0))


def test_isolated_vertices_multiply_free_slots():
    h = orientation_from_edges(5, [(0, 1)])
    t = random_tournament(5, 3)
    assert count_labeled_copies(h, t) == math.factorial(5) // 2


def test_hamilton_dp_against_brute_force():
    for n in (3, 4, 5):
        cn, pn = make_pattern("cycle", n), make_pattern("path", n)
        for t in all_tournaments(n):
            assert count_labeled_copies(cn, t) == n * count_hamilton_cycles(t)
            assert count_labeled_copies(pn, t) == count_hamilton_paths(t)


@pytest.mark.parametrize("n,seeds", [(6, 40), (7, 30), (8, 20), (9, 10)])
def test_hamilton_dp_random_tournaments(n, seeds):
    cn, pn = make_pattern("cycle", n), make_pattern("path", n)
    for seed in range(seeds):
        t = random_tournament(n, seed)
        assert count_labeled_copies(cn, t) == n * count_hamilton_cycles(t)
        assert count_labeled_copies(pn, t) == count_hamilton_paths(t)


@pytest.mark.parametrize("n", [5, 7, 9])
def test_hamilton_dp_circulant(n):
    t = circulant_regular_tournament(n)
    assert count_labeled_copies(make_pattern("cycle", n), t) == n * count_hamilton_cycles(t)


def test_transitive_tournament_counts():
    for n in (4, 6, 8):
        t = transitive_tournament(n)
        assert count_hamilton_cycles(t) == 0
        assert count_hamilton_paths(t) == 1


# ---------------------------------------------------------------------------
# per-permutation statistics and probabilities
# ---------------------------------------------------------------------------

def reference_block_stats(pi, h, d):
    """Independent recount of the per-copy captures, straight from definitions."""
    pair_block = {}
    for idx, block in enumerate(d.blocks):
        for e in block.edges():
            pair_block[e] = idx
    by_block = {}
    for u, v in h.edges:
        a, b = pi[u], pi[v]
        key = pair_block[(a, b) if a < b else (b, a)]
        by_block.setdefault(key, []).append((u, v))
    und = {(min(u, v), max(u, v)) for u, v in h.edges}
    c = i = f = g = 0
    typical = True
    for bid, group in by_block.items():
        if len(group) >= 2 and d.blocks[bid].kind != BlockKind.KT:
            typical = False
        if len(group) > 3 and d.blocks[bid].kind == BlockKind.KT:
            typical = False
        if len(group) == 3 and d.blocks[bid].kind == BlockKind.KT:
            verts = {x for e in group for x in e}
            if len(verts) != 3:
                typical = False
        for x in range(len(group)):
            for y in range(x + 1, len(group)):
                (u1, v1), (u2, v2) = group[x], group[y]
                shared = {u1, v1} & {u2, v2}
                if len(shared) != 1:
                    continue
                s = shared.pop()
                outer1 = u1 if v1 == s else v1
                outer2 = u2 if v2 == s else v2
                if (min(outer1, outer2), max(outer1, outer2)) in und:
                    continue
                if (v1 == s) != (v2 == s):
                    c += 1
                else:
                    i += 1
        if len(group) >= 3:
            from itertools import combinations
            for tri in combinations(group, 3):
                verts = {x for e in tri for x in e}
                if len(verts) != 3:
                    continue
                heads = {v for _, v in tri}
                if len(heads) == 3:
                    f += 1
                else:
                    g += 1
    return c, i, f, g, typical


def test_block_stats_against_reference():
    fano = steiner_triple_system(7)
    patterns = [
        make_pattern("cycle", 7),
        make_pattern("path", 7),
        random_orientation(7, 8, seed=11),
        random_orientation(7, 10, seed=3),
    ]
    for h in patterns:
        for idx in range(250):
            pi = stream_for(h.edge_count, idx).permutation(7)
            st = copy_block_stats(pi, h, fano)
            assert (st.c, st.i, st.f, st.g, st.typical) == reference_block_stats(pi, h, fano)


def test_block_stats_trivial_cases():
    fano = steiner_triple_system(7)
    c7 = make_pattern("cycle", 7)
    kernel = CopyKernel(c7, fano)
    for pi in permutations(range(7)):
        if all(len(g) == 1 for g in kernel.groups(pi).values()):
            st = kernel.block_stats(pi)
            assert (st.c, st.i, st.f, st.g, st.typical) == (0, 0, 0, 0, True)
            break
    else:
        pytest.fail("no spread-out permutation found")
    # a consistent pair pushed into one triple block
    line = fano.blocks[0].vertices
    h = orientation_from_edges(7, [(0, 1), (1, 2)])
    pi = [0] * 7
    rest = [v for v in range(7) if v not in line]
    pi[0], pi[1], pi[2] = line
    pi[3], pi[4], pi[5], pi[6] = rest
    st = copy_block_stats(pi, h, fano)
    assert (st.c, st.i, st.f, st.g, st.typical) == (1, 0, 0, 0, True)


def test_probability_no_shared_blocks_is_half_per_edge():
    fano = steiner_triple_system(7)
    c7 = make_pattern("cycle", 7)
    kernel = CopyKernel(c7, fano)
    for pi in permutations(range(7)):
        if all(len(g) == 1 for g in kernel.groups(pi).values()):
            assert kernel.probability(pi) == Fraction(1, 2 ** 7)
            break


def test_probability_vanishes_for_transitive_triangle_in_triple_block():
    fano = steiner_triple_system(7)
    h = orientation_from_edges(7, [(0, 1), (0, 2), (1, 2)])
    line = fano.blocks[2].vertices
    pi = list(range(7))
    others = [v for v in range(7) if v not in line]
    pi[0], pi[1], pi[2] = line
    pi[3:] = others
    st = copy_block_stats(pi, h, fano)
    assert st.g == 1
    assert copy_probability(pi, h, fano) == 0
    assert copy_probability(pi, h, fano, method="enumerate") == 0


def test_closed_form_equals_enumeration_everywhere():
    fano = steiner_triple_system(7)
    bases = BaseTournaments.circulant(3)
    for h in (make_pattern("cycle", 7), random_orientation(7, 9, seed=8)):
        kernel = CopyKernel(h, fano, bases)
        for idx in range(400):
            pi = stream_for(99, idx).permutation(7)
            p_enum = kernel.probability(pi, method="enumerate")
            assert kernel.probability(pi) == p_enum
            st = kernel.block_stats(pi)
            if st.typical:
                assert typical_closed_form(st, h.edge_count, 3) == p_enum


def test_exact_expectation_single_edge():
    bases = BaseTournaments.circulant(3)
    d5 = Decomposition(5, 3, (Block(BlockKind.K2T1, (0, 1, 2, 3, 4)),))
    single = orientation_from_edges(5, [(0, 1)])
    assert exact_expected_copies(single, d5, bases) == Fraction(math.factorial(5), 2)
    fano = steiner_triple_system(7)
    single7 = orientation_from_edges(7, [(2, 5)])
    assert exact_expected_copies(single7, fano, bases) == Fraction(math.factorial(7), 2)


def test_exact_expectation_budget():
    fano = steiner_triple_system(7)
    with pytest.raises(BudgetExceededError):
        exact_expected_copies(make_pattern("cycle", 7), fano, budget_n=6)


def test_exact_matches_support_average_for_path():
    fano = steiner_triple_system(7)
    bases = BaseTournaments.circulant(3)
    p7 = make_pattern("path", 7)
    exact = exact_expected_copies(p7, fano, bases)
    acc = Fraction(0)
    for t, w in enumerate_support(fano, bases):
        acc += w * count_labeled_copies(p7, t)
    assert acc == exact


def test_exact_matches_support_average_for_k2t1_design():
    # a single size-5 complete block exercises the larger base tournament
    bases = BaseTournaments.circulant(3)
    d5 = Decomposition(5, 3, (Block(BlockKind.K2T1, (0, 1, 2, 3, 4)),))
    for seed in (1, 6):
        h = random_orientation(5, 5, seed=seed)
        exact = exact_expected_copies(h, d5, bases)
        acc = Fraction(0)
        total = Fraction(0)
        for t, w in enumerate_support(d5, bases):
            acc += w * count_labeled_copies(h, t)
            total += w
        assert total == 1
        assert acc == exact


def test_expectation_matches_direct_sampled_counts_at_n9():
    # whole-pipeline cross-check: summing per-permutation probabilities must
    # agree with counting copies in actually sampled tournaments
    from orient_boost.designs import adjusted_decomposition
    from orient_boost.sampling import SampleSeed, sample

    d9 = adjusted_decomposition(9, 3)
    bases = BaseTournaments.circulant(3)
    c9 = make_pattern("cycle", 9)
    summary = exact_copy_summary(c9, d9, bases)
    assert summary.expectation == Fraction(8181, 4)  # frozen after first run
    acc = 0
    draws = 1500
    for index in range(draws):
        acc += 9 * count_hamilton_cycles(sample(d9, bases, SampleSeed(7777, index)))
    assert abs(acc / draws - float(summary.expectation)) / float(summary.expectation) < 0.05


def test_even_extension_expectation():
    from orient_boost.designs import adjusted_decomposition, extend_to_even
    d8 = extend_to_even(adjusted_decomposition(7, 3))
    bases = BaseTournaments.circulant(3)
    # matchings appear the same number of times in every tournament, so the
    # expectation over the balanced space equals the coin-flip baseline
    m4 = make_pattern("matching", 8)
    assert exact_expected_copies(m4, d8, bases) == Fraction(math.factorial(8), 2 ** 4)
    # full oracle for the 8-cycle over the 2048-outcome support
    c8 = make_pattern("cycle", 8)
    exact = exact_expected_copies(c8, d8, bases)
    acc = Fraction(0)
    for t, w in enumerate_support(d8, bases, budget=5_000_000):
        acc += w * 8 * count_hamilton_cycles(t)
    assert acc == exact
    assert exact > Fraction(math.factorial(8), 2 ** 8)


def test_estimator_brackets_exact_value():
    fano = steiner_triple_system(7)
    bases = BaseTournaments.circulant(3)
    c7 = make_pattern("cycle", 7)
    exact_ratio = exact_copy_summary(c7, fano, bases).ratio
    hits = 0
    runs = 100
    for run in range(runs):
        rep = estimate_expected_copies(c7, fano, bases, samples=1000, master_seed=run)
        if abs(rep.ratio - float(exact_ratio)) <= 3 * rep.ratio_stderr:
            hits += 1
    assert hits >= 99


def test_estimator_brackets_exact_value_with_triangle_captures():
    # this pattern holds a cyclic triangle, exercising the triangle factors
    fano = steiner_triple_system(7)
    bases = BaseTournaments.circulant(3)
    h = random_orientation(7, 8, seed=8)
    assert exact_copy_summary(h, fano, bases).capture_averages[2] > 0
    exact_ratio = float(exact_copy_summary(h, fano, bases).ratio)
    rep = estimate_expected_copies(h, fano, bases, samples=4000, master_seed=14)
    assert abs(rep.ratio - exact_ratio) <= 3 * rep.ratio_stderr


def test_estimator_deterministic_and_worker_independent():
    fano = steiner_triple_system(7)
    bases = BaseTournaments.circulant(3)
    c7 = make_pattern("cycle", 7)
    a = estimate_expected_copies(c7, fano, bases, samples=600, master_seed=5)
    b = estimate_expected_copies(c7, fano, bases, samples=600, master_seed=5)
    assert (a.ratio, a.ratio_stderr, a.typical_fraction) == (b.ratio, b.ratio_stderr, b.typical_fraction)
    c = estimate_expected_copies(c7, fano, bases, samples=600, master_seed=5, workers=3)
    assert (a.ratio, a.ratio_stderr, a.typical_fraction) == (c.ratio, c.ratio_stderr, c.typical_fraction)


def test_estimator_report_fields():
    fano = steiner_triple_system(7)
    c7 = make_pattern("cycle", 7)
    rep = estimate_expected_copies(c7, fano, samples=200, master_seed=1)
    assert rep.baseline == Fraction(math.factorial(7), 2 ** 7)
    assert rep.samples == 200 and rep.master_seed == 1
    assert rep.ratio_stderr >= 0
    assert baseline_expected_copies(c7) == rep.baseline


def test_exact_block_averages_cycle_on_triple_system():
    fano = steiner_triple_system(7)
    c7 = make_pattern("cycle", 7)
    avgs = exact_block_averages(c7, fano)
    assert avgs == (Fraction(7, 5), 0, 0, 0)


def test_empirical_block_averages_match_exact_mean():
    fano = steiner_triple_system(7)
    c7 = make_pattern("cycle", 7)
    ba = empirical_block_averages(c7, fano, samples=4000, master_seed=12)
    assert abs(ba.c_avg - 1.4) <= 3 * ba.c_stderr
    assert ba.i_avg == ba.f_avg == ba.g_avg == 0


def test_empirical_block_averages_matching_pattern_is_zero():
    # no two matching edges share a vertex, so every capture statistic is 0
    d = steiner_triple_system(9)
    m = orientation_from_edges(9, [(0, 1), (2, 3), (4, 5), (6, 7)])
    ba = empirical_block_averages(m, d, samples=500, master_seed=3)
    assert (ba.c_avg, ba.i_avg, ba.f_avg, ba.g_avg) == (0, 0, 0, 0)


def test_disjoint_edge_pattern_never_boosts_on_pure_design():
    # two disjoint edges inside one complete block still succeed with
    # probability exactly 1/4, so the per-copy ratio is identically 1
    d = steiner_triple_system(9)
    m = orientation_from_edges(9, [(0, 1), (2, 3), (4, 5), (6, 7)])
    rep = estimate_expected_copies(m, d, samples=400, master_seed=8)
    assert rep.ratio == 1.0
    assert rep.ratio_stderr == 0.0


def test_injection_budget_error_names_block():
    bases = BaseTournaments.circulant(3)
    d5 = Decomposition(5, 3, (Block(BlockKind.K2T1, (0, 1, 2, 3, 4)),))
    h = random_orientation(5, 6, seed=2)
    kernel = CopyKernel(h, d5, bases, injection_budget=10)
    with pytest.raises(BudgetExceededError, match="block 0"):
        kernel.probability(list(range(5)), method="enumerate")
