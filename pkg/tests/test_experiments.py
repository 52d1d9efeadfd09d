import itertools
import json
import math
import random
from fractions import Fraction

import pytest

from cayleygirth import words
from cayleygirth.experiments import (
    ExperimentConfig,
    GirthHistogram,
    HomogeneousPoly,
    SearchSpaceExceeded,
    count_projective_zeros,
    estimate_word_prob,
    exact_power_word_prob_sn,
    mix64,
    pgl_word_prob_bound,
    ping_pong_product,
    projective_points,
    run_girth_experiment,
    run_single_trial,
    shortest_law,
    sn_word_prob_bound,
    split_product_poly,
    union_bound_threshold,
    verify_ping_pong_form,
    wn_order_experiment,
)
from cayleygirth.girth import GirthMemoryError
from cayleygirth.groups import PGL2Context, SL2Context, SymmetricContext


def test_mix64_matches_published_stream():
    # first outputs of the standard 64-bit split-mix generator seeded at 0
    assert mix64(0, 0) == 0xE220A8397B1DCDAF
    assert mix64(0, 1) == 0x6E789E6AA1B965F4
    assert mix64(0, 2) == 0x06C45D188009454F
    # distinct trials and seeds decorrelate
    assert len({mix64(s, t) for s in range(4) for t in range(64)}) == 256


def test_experiment_histogram_consistency():
    cfg = ExperimentConfig(family="pgl2", param=101, k=2, trials=60, seed=5)
    hist = run_girth_experiment(cfg)
    assert sum(hist.counts.values()) + hist.at_least_count == 60
    assert hist.odd_count == sum(c for g, c in hist.counts.items() if g % 2)
    assert len(hist.records) == 60
    assert [rec.trial for rec in hist.records] == list(range(60))
    for rec in hist.records:
        assert rec.seed == mix64(5, rec.trial)
        if rec.girth is not None:
            assert 0 < rec.normalized <= 2
            assert len(words.parse_word(rec.witness)) == rec.girth


def test_experiment_deterministic_across_threads():
    cfg1 = ExperimentConfig(family="pgl2", param=101, k=2, trials=40, seed=9, threads=1)
    cfg2 = ExperimentConfig(family="pgl2", param=101, k=2, trials=40, seed=9, threads=4)
    assert run_girth_experiment(cfg1).to_json_bytes() == run_girth_experiment(cfg2).to_json_bytes()


def test_single_trial_reproducible():
    cfg = ExperimentConfig(family="pgl2", param=101, k=2, trials=1, seed=12345)
    rec1 = run_single_trial(cfg, 0)
    rec2 = run_single_trial(cfg, 0)
    assert rec1 == rec2
    assert rec1.girth is not None


def test_experiment_json_round_trip_and_csv():
    cfg = ExperimentConfig(family="sym", param=6, k=2, trials=25, seed=3)
    hist = run_girth_experiment(cfg)
    data = json.loads(hist.to_json_bytes())
    assert set(data) == {
        "group", "param", "k", "trials", "seed", "max_girth",
        "histogram", "odd_count", "at_least_count", "records",
    }
    rebuilt = GirthHistogram.from_json_dict(data)
    assert rebuilt.to_json_bytes() == hist.to_json_bytes()
    csv_text = hist.to_csv_text()
    assert csv_text.splitlines()[0] == "trial,girth,witness,normalized"
    assert len(csv_text.splitlines()) == 26
    table = hist.to_text_table()
    assert "n_odd" in table and "<=10" in table


def test_experiment_over_tree_automorphisms():
    cfg = ExperimentConfig(family="w2", param=4, k=2, trials=20, seed=8, max_girth=16)
    hist = run_girth_experiment(cfg)
    assert sum(hist.counts.values()) + hist.at_least_count == 20
    for rec in hist.records:
        if rec.girth is not None:
            # log2|G| = 15, degree-3 base: normalized = girth * log2(3) / 15
            assert math.isclose(rec.normalized, rec.girth / (15 / math.log2(3)))


def test_experiment_memory_error_fails_loudly():
    cfg = ExperimentConfig(family="pgl2", param=1009, k=2, trials=3, seed=1, memory_limit=500)
    with pytest.raises(GirthMemoryError):
        run_girth_experiment(cfg)


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(family="pgl2", param=15, trials=10)
    with pytest.raises(ValueError):
        ExperimentConfig(family="pgl2", param=101, trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(family="pgl2", param=101, seed=-1)


def test_estimate_word_prob_single_letter():
    ctx = PGL2Context(5)
    rng = random.Random(1)
    est = estimate_word_prob(ctx, (1,), 6000, rng)
    truth = 1 / 120
    assert est.ci_low <= truth <= est.ci_high
    sigma = math.sqrt(truth * (1 - truth) / 6000)
    assert abs(est.estimate - truth) <= 4 * sigma


def test_estimate_word_prob_matches_exact_power_counts():
    ctx = SymmetricContext(6)
    rng = random.Random(2)
    for l in (2, 3):
        truth = float(exact_power_word_prob_sn(6, l))
        est = estimate_word_prob(ctx, words.power_word(1, l), 4000, rng)
        sigma = math.sqrt(truth * (1 - truth) / 4000)
        assert abs(est.estimate - truth) <= 3.5 * sigma


def test_estimate_word_prob_forced_degenerate_tuple():
    ctx = SymmetricContext(5)
    rng = random.Random(3)

    def equal_pair(r):
        g = ctx.sample_uniform(r)
        return (g, g)

    est = estimate_word_prob(ctx, words.parse_word("abAB"), 200, rng, sampler=equal_pair)
    assert est.estimate == 1.0


def brute_power_count(n, l):
    ctx = SymmetricContext(n)
    return sum(1 for perm in itertools.permutations(range(n)) if l % ctx.order(perm) == 0)


def test_exact_power_word_prob_small():
    assert exact_power_word_prob_sn(4, 2) == Fraction(10, 24)
    for n in (1, 3, 5):
        assert exact_power_word_prob_sn(n, 1) == Fraction(1, math.factorial(n))
    for n, l in [(4, 2), (5, 3), (6, 6), (6, 4)]:
        assert exact_power_word_prob_sn(n, l) == Fraction(brute_power_count(n, l), math.factorial(n))


def test_power_prob_bounds():
    assert math.isclose(sn_word_prob_bound(20, 2), 0.2 ** 5)
    with pytest.raises(ValueError):
        sn_word_prob_bound(10, 5)
    for n in range(10, 31, 5):
        for l in range(1, 9):
            p = exact_power_word_prob_sn(n, l)
            if 2 * l < n:
                assert p <= sn_word_prob_bound(n, l)
            # the (1/n)^(n/l) lower bound comes from filling all points with
            # l-cycles, which needs l | n; it is false otherwise (n=10, l=7)
            if n % l == 0:
                assert float(p) >= n ** (-n / l) * (1 - 1e-12)
    assert float(exact_power_word_prob_sn(10, 7)) < 10 ** (-10 / 7)


def test_sn_bound_monotone_in_length():
    values = [sn_word_prob_bound(30, l) for l in range(1, 15)]
    assert values == sorted(values)


def test_bounds_weaken_as_length_grows():
    from cayleygirth.genetics import p1_bound, wn_word_prob_bound

    for l in range(1, 9):
        assert pgl_word_prob_bound(101, l) < pgl_word_prob_bound(101, l + 1)
        assert p1_bound(30, l) <= p1_bound(30, l + 1)
        assert wn_word_prob_bound(20, l) <= wn_word_prob_bound(20, l + 1)


def test_pgl_word_prob_bound():
    assert math.isclose(pgl_word_prob_bound(1009, 10), 10 / 1009)
    ctx = PGL2Context(101)
    rng = random.Random(4)
    trials = 400
    for _ in range(20):
        length = rng.randrange(1, 9)
        w = words.random_reduced_word(2, length, rng)
        est = estimate_word_prob(ctx, w, trials, rng)
        bound = pgl_word_prob_bound(101, length) + 5 / 101 ** 2
        sigma = math.sqrt(max(bound * (1 - bound), 1e-9) / trials)
        assert est.estimate <= bound + 3 * sigma


def test_union_bound_threshold():
    assert union_bound_threshold(4, 1009, "pgl") == 2
    assert union_bound_threshold(4, 101, "pgl") == 1
    sn_value = union_bound_threshold(4, 30, "sn")
    assert sn_value >= 2
    # direct re-derivation of the sn scan
    count = 1
    best = 0
    for length in range(1, 15):
        count += 4 * 3 ** (length - 1)
        if 2 * length >= 30:
            break
        if count * sn_word_prob_bound(30, length) < 1:
            best = length
        else:
            break
    assert sn_value == best
    with pytest.raises(ValueError):
        union_bound_threshold(4, 30, "nope")
    with pytest.raises(ValueError):
        union_bound_threshold(2, 30, "sn")


def test_shortest_law_sl2_2_one_generator():
    res = shortest_law(SL2Context(2), 1, 10)
    assert res.length == 6
    assert res.word == words.parse_word("aaaaaa")


def test_shortest_law_validates_result():
    ctx = SL2Context(2)
    res = shortest_law(ctx, 2, 8)
    assert res.length == 6  # the exponent law is already shortest with two letters
    elements = list(ctx.elements())
    for g in elements:
        for h in elements:
            assert words.evaluate(ctx, res.word, (g, h)) == ctx.identity()


def test_shortest_law_lower_bounds_without_full_search():
    assert shortest_law(SL2Context(2), 2, 1).lower_bound == 2
    res = shortest_law(SL2Context(3), 2, 2)
    assert not res.is_exact
    assert res.lower_bound == 3


def test_shortest_law_guards():
    with pytest.raises(SearchSpaceExceeded):
        shortest_law(SL2Context(3), 2, 12, node_cap=50)
    with pytest.raises(ValueError):
        shortest_law(PGL2Context(13), 3, 4)  # 2184^3 tuples


def test_ping_pong_product_entries():
    m = ping_pong_product([(1, 1)])
    assert m == [[[1], [0, 1]], [[0, 1], [1, 0, 1]]]  # [[1, x], [x, x^2+1]]
    m = ping_pong_product([(2, 3)])
    assert m[1][1] == [1, 0, 6]  # 6x^2 + 1
    assert verify_ping_pong_form([(1, 1)])
    assert verify_ping_pong_form([(2, 3)])


def test_ping_pong_random_exponents():
    rng = random.Random(6)
    nonzero = [v for v in range(-9, 10) if v]
    for _ in range(200):
        r = rng.randrange(1, 7)
        pairs = [(rng.choice(nonzero), rng.choice(nonzero)) for _ in range(r)]
        assert verify_ping_pong_form(pairs)
    with pytest.raises(ValueError):
        verify_ping_pong_form([(0, 1)])


def test_projective_points_count():
    assert len(list(projective_points(3, 3))) == 13
    assert len(list(projective_points(2, 7))) == 8
    pts = list(projective_points(3, 5))
    assert len(pts) == len(set(pts)) == 31


def test_count_projective_zeros_examples():
    res = count_projective_zeros(HomogeneousPoly(3, 3, ((1, (1, 1, 0)),)))
    assert res.zeros == res.bound == 7
    assert res.attains_bound
    # x0^d vanishes on one hyperplane
    for p, d in [(5, 2), (7, 3)]:
        res = count_projective_zeros(HomogeneousPoly(3, p, ((1, (d, 0, 0)),)))
        assert res.zeros == p + 1
        assert res.within_bound
    res = count_projective_zeros(split_product_poly(5, [0, 1, 2]))
    assert res.zeros == res.bound == 3 * 5 + 1


def test_split_product_expansion():
    poly = split_product_poly(5, [0, 1, 2])
    # x0 (x0 - x1)(x0 - 2 x1) = x0^3 - 3 x0^2 x1 + 2 x0 x1^2
    assert poly.monomials == ((1, (3, 0, 0)), (2, (2, 1, 0)), (2, (1, 2, 0)))
    values = {pt: poly.evaluate(pt) for pt in projective_points(3, 5)}
    for pt, v in values.items():
        expected = pt[0] * (pt[0] - pt[1]) * (pt[0] - 2 * pt[1]) % 5
        assert v == expected


def test_homogeneous_poly_validation():
    with pytest.raises(ValueError):
        HomogeneousPoly(3, 5, ((1, (1, 0, 0)), (1, (2, 0, 0))))  # mixed degree
    with pytest.raises(ValueError):
        HomogeneousPoly(3, 5, ((0, (1, 0, 0)),))  # zero coefficient
    with pytest.raises(ValueError):
        HomogeneousPoly(3, 5, ((1, (0, 0, 0)),))  # degree zero
    with pytest.raises(ValueError):
        HomogeneousPoly(3, 5, ())
    with pytest.raises(ValueError):
        count_projective_zeros(HomogeneousPoly(3, 17, ((1, (1, 0, 0)),)))


def test_wn_order_experiment():
    rng = random.Random(7)
    stats = wn_order_experiment(1, 200, rng)
    assert set(stats.log2_order_counts) <= {0, 1}
    stats = wn_order_experiment(8, 400, rng)
    assert all(0 <= v <= 8 for v in stats.log2_order_counts)
    assert 0 < stats.alpha_hat < 1
    assert len(stats.ratios) == 400
    with pytest.raises(ValueError):
        wn_order_experiment(30, 10, rng)
