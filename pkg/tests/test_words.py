import itertools
import random

import pytest
from hypothesis import given, strategies as st

from cayleygirth import words
from cayleygirth.groups import SymmetricContext

letters_st = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30)


def naive_reduce(seq):
    """Delete one adjacent inverse pair at a time until none are left."""
    seq = list(seq)
    changed = True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i] == -seq[i + 1]:
                del seq[i : i + 2]
                changed = True
                break
    return tuple(seq)


def test_free_reduce_examples():
    assert words.free_reduce((1, 2, -2, 1)) == (1, 1)
    assert words.free_reduce((1, -1)) == ()
    assert words.free_reduce(()) == ()


@given(letters_st)
def test_free_reduce_matches_naive_and_is_idempotent(seq):
    reduced = words.free_reduce(seq)
    assert reduced == naive_reduce(seq)
    assert words.is_reduced(reduced)
    assert words.free_reduce(reduced) == reduced


def test_free_reduce_rejects_zero():
    with pytest.raises(ValueError):
        words.free_reduce((1, 0))


def test_cyclic_reduce_examples():
    assert words.cyclic_reduce(words.parse_word("abA")) == (2,)
    w = words.parse_word("abAB")
    assert words.cyclic_reduce(w) == w
    assert words.cyclic_reduce(()) == ()


def test_cyclic_core_of_nonempty_reduced_word_is_nonempty():
    for length in range(1, 9):
        for w in words.enumerate_reduced(2, length):
            core = words.cyclic_reduce(w)
            assert core
            assert words.is_cyclically_reduced(core)


def test_cyclic_reduce_conjugacy_in_s5():
    ctx = SymmetricContext(5)
    rng = random.Random(4)
    for _ in range(500):
        w = words.random_reduced_word(2, rng.randrange(1, 9), rng)
        core = words.cyclic_reduce(w)
        strip = (len(w) - len(core)) // 2
        conj = w[:strip]
        gens = (ctx.sample_uniform(rng), ctx.sample_uniform(rng))
        lhs = words.evaluate(ctx, w, gens)
        c = words.evaluate(ctx, conj, gens)
        rhs = ctx.multiply(ctx.multiply(c, words.evaluate(ctx, core, gens)), ctx.invert(c))
        assert lhs == rhs


def test_concat_inverse_reduce_examples():
    ab = words.parse_word("ab")
    assert words.concat_inverse_reduce(ab, ab) == ()
    assert words.concat_inverse_reduce(ab, (1,)) == words.parse_word("abA")
    assert words.cyclic_reduce(words.concat_inverse_reduce(ab, (1,))) == (2,)


def test_concat_inverse_reduce_exhaustive_small():
    pool = [w for length in range(5) for w in words.enumerate_reduced(2, length)]
    for u in pool:
        for v in pool:
            out = words.concat_inverse_reduce(u, v)
            assert out == words.free_reduce(u + words.inverse_word(v))
            if u != v:
                assert out


@pytest.mark.parametrize("k", [2, 3])
def test_enumerate_reduced_counts(k):
    assert list(words.enumerate_reduced(k, 0)) == [()]
    for length in range(1, 9 if k == 2 else 6):
        seen = list(words.enumerate_reduced(k, length))
        assert len(seen) == 2 * k * (2 * k - 1) ** (length - 1)
        assert len(set(seen)) == len(seen)
        for w in seen:
            assert words.is_reduced(w) and len(w) == length


def test_enumerate_reduced_is_lexicographic():
    for length in (1, 3, 5):
        codes = [words.word_to_code(w, 2) for w in words.enumerate_reduced(2, length)]
        assert codes == sorted(codes)


def test_enumerate_cyclically_reduced_counts():
    assert len(list(words.enumerate_cyclically_reduced(2, 1))) == 4
    assert len(list(words.enumerate_cyclically_reduced(2, 2))) == 12
    assert len(list(words.enumerate_cyclically_reduced(3, 2))) == 30
    for length in range(1, 7):
        got = list(words.enumerate_cyclically_reduced(2, length))
        brute = [
            w
            for w in itertools.product([1, -1, 2, -2], repeat=length)
            if words.is_cyclically_reduced(w)
        ]
        assert got == sorted(brute, key=lambda w: words.word_to_code(w, 2))
        # the exact count is 3^l plus a bounded correction term
        assert len(got) <= 3 ** length + 3


def test_random_reduced_word():
    rng = random.Random(1)
    assert words.random_reduced_word(2, 0, rng) == ()
    for _ in range(2000):
        w = words.random_reduced_word(2, rng.randrange(1, 12), rng)
        assert words.is_reduced(w)
    counts = {}
    for _ in range(12000):
        w = words.random_reduced_word(2, 2, rng)
        counts[w] = counts.get(w, 0) + 1
    assert len(counts) == 12
    # each of the 12 words within 3 sigma of uniform
    sigma = (12000 * (1 / 12) * (11 / 12)) ** 0.5
    for c in counts.values():
        assert abs(c - 1000) <= 3 * sigma


def test_power_word():
    assert words.power_word(1, 3) == (1, 1, 1)
    assert words.power_word(2, 1) == (2,)
    ctx = SymmetricContext(6)
    rng = random.Random(2)
    for _ in range(50):
        g = ctx.sample_uniform(rng)
        w = words.power_word(1, ctx.order(g))
        assert words.evaluate(ctx, w, (g,)) == ctx.identity()


def test_evaluate_examples_and_fold_oracle():
    ctx = SymmetricContext(5)
    rng = random.Random(3)
    x = (1, 0, 2, 3, 4)
    y = (0, 1, 3, 2, 4)  # disjoint from x, so they commute
    comm = words.parse_word("abAB")
    assert words.evaluate(ctx, comm, (x, y)) == ctx.identity()
    g = ctx.sample_uniform(rng)
    assert words.evaluate(ctx, (1,), (g, ctx.sample_uniform(rng))) == g
    for _ in range(200):
        w = words.random_reduced_word(2, rng.randrange(0, 7), rng)
        gens = (ctx.sample_uniform(rng), ctx.sample_uniform(rng))
        acc = ctx.identity()
        for letter in w:
            elt = gens[letter - 1] if letter > 0 else ctx.invert(gens[-letter - 1])
            acc = ctx.multiply(acc, elt)
        assert words.evaluate(ctx, w, gens) == acc


def test_evaluate_is_a_homomorphism():
    ctx = SymmetricContext(5)
    rng = random.Random(7)
    for _ in range(200):
        u = words.random_reduced_word(2, rng.randrange(0, 6), rng)
        v = words.random_reduced_word(2, rng.randrange(0, 6), rng)
        gens = (ctx.sample_uniform(rng), ctx.sample_uniform(rng))
        lhs = words.evaluate(ctx, words.concat_inverse_reduce(u, v), gens)
        rhs = ctx.multiply(words.evaluate(ctx, u, gens), ctx.invert(words.evaluate(ctx, v, gens)))
        assert lhs == rhs


def test_substitute_examples():
    assert words.substitute(words.parse_word("ab"), [(1,), (2,)]) == words.parse_word("ab")
    # the word reduces first: a a^-1 b collapses to b, so only the second
    # replacement survives
    assert words.substitute((1, -1, 2), [(2, 1), (1, -2)]) == (1, -2)


def test_substitute_homomorphism_oracle():
    ctx = SymmetricContext(5)
    rng = random.Random(8)
    for _ in range(300):
        w = words.random_reduced_word(2, rng.randrange(0, 6), rng)
        reps = [words.random_reduced_word(2, rng.randrange(1, 5), rng) for _ in range(2)]
        gens = (ctx.sample_uniform(rng), ctx.sample_uniform(rng))
        lhs = words.evaluate(ctx, words.substitute(w, reps), gens)
        images = tuple(words.evaluate(ctx, rep, gens) for rep in reps)
        assert lhs == words.evaluate(ctx, w, images)


def test_substitution_half_length_formula():
    assert words.substitution_half_length(8, 2) == 5
    # first s with 8*4*3^-(s-1) < 1: 32/81
    assert 8 * 4 * 3 ** -(5 - 1) < 1
    assert 8 * 4 * 3 ** -(4 - 1) >= 1


def test_build_substitution():
    rng = random.Random(9)
    for _ in range(200):
        k = rng.randrange(3, 6)
        w = words.random_reduced_word(k, rng.randrange(1, 9), rng)
        if words.word_arity(w) <= 2:
            continue
        reps = words.build_substitution(w, 2, rng)
        s = words.substitution_half_length(len(w), 2)
        assert len(reps) == words.word_arity(w)
        for rep in reps:
            assert len(rep) == 2 * s + 1
            assert words.is_reduced(rep)
            assert words.word_arity(rep) <= 2
        assert words.substitute(w, reps)


def test_parse_and_format():
    assert words.parse_word("AbcaaC") == (-1, 2, 3, 1, 1, -3)
    assert words.format_word((-1, 2, 3, 1, 1, -3)) == "AbcaaC"
    assert words.parse_word("aA") == ()
    assert words.format_word(()) == ""
    with pytest.raises(ValueError):
        words.parse_word("a b")


@given(st.text(alphabet="abcABC", max_size=20))
def test_parse_format_round_trip(text):
    w = words.parse_word(text)
    assert words.parse_word(words.format_word(w)) == w


@given(st.integers(min_value=1, max_value=4), st.integers(min_value=0, max_value=12), st.integers())
def test_word_code_round_trip(k, length, seed):
    rng = random.Random(seed)
    w = words.random_reduced_word(k, length, rng)
    assert words.code_to_word(words.word_to_code(w, k), k) == w


def test_word_code_order_matches_length_then_lex():
    pool = [w for length in range(4) for w in words.enumerate_reduced(2, length)]
    codes = [words.word_to_code(w, 2) for w in pool]
    keyed = sorted(pool, key=lambda w: (len(w), [words.letter_to_code(l) for l in w]))
    assert [words.code_to_word(c, 2) for c in sorted(codes)] == keyed
