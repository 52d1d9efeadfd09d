"""Crossover toy model for words acting on binary rooted trees.

A genome is a reduced word over "bases" a, b, c, ... where each base also
occurs in a backward (inverse) orientation.  At each fission the word is
copied twice and a crossover mark per base type is inserted after forward
occurrences and before backward ones; scanning left to right, the copy
index flips at every active mark, and each occurrence emits (base, copy).
A genome is free when no base type repeats; its complexity is
len(word) - number_of_distinct_bases, which is <= 0 exactly for free words.

Base types in offspring live on a doubled alphabet: base i copy t maps to
index 2*(i-1)+t, so a1=1, a2=2, b1=3, b2=4, ...

The link to tree automorphisms: feed the root activity bit of each
generator in as that base's crossover bit, and the two fission children
evaluated at the generators' subtree sections are exactly the two root
sections of the evaluated word (see section_decomposition).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import words
from .groups import WreathContext
from .words import Word


class PopulationCapExceeded(RuntimeError):
    """Population evolution hit its amoeba cap before a free genome appeared."""

    def __init__(self, generation: int, population: int, cap: int):
        self.generation = generation
        self.population = population
        self.cap = cap
        super().__init__(
            f"population {population} exceeds cap {cap} at generation {generation}"
        )


@dataclass(frozen=True)
class OffspringPair:
    child1: Word
    child2: Word


def doubled_base(letter: int) -> tuple[int, int]:
    """Map a doubled-alphabet letter back to (original base, copy in {1,2})."""
    idx = abs(letter)
    return (idx - 1) // 2 + 1, (idx - 1) % 2 + 1


def fission(word: Sequence[int], activity: Mapping[int, int]) -> OffspringPair:
    """One fission step; activity maps each base type to its crossover bit.

    Both children are reduced whenever the parent is (a cancelling adjacent
    pair in a child would need one in the parent), have the parent's length,
    and carry complementary copy labels position by position.
    """
    out1: list[int] = []
    out2: list[int] = []
    t = 0
    for letter in word:
        base = abs(letter)
        try:
            act = activity[base]
        except KeyError:
            raise ValueError(f"no crossover bit for base {base}") from None
        if letter < 0 and act:
            t ^= 1
        first = 2 * (base - 1) + t + 1
        second = 2 * (base - 1) + (t ^ 1) + 1
        if letter < 0:
            first, second = -first, -second
        out1.append(first)
        out2.append(second)
        if letter > 0 and act:
            t ^= 1
    return OffspringPair(tuple(out1), tuple(out2))


def random_activity(word: Sequence[int], rng) -> dict[int, int]:
    """Independent fair crossover bit per base type occurring in the word."""
    return {base: rng.getrandbits(1) for base in sorted({abs(l) for l in word})}


def is_free(word: Sequence[int]) -> bool:
    """True when every base type occurs at most once (either orientation)."""
    bases = [abs(l) for l in word]
    return len(set(bases)) == len(bases)


def complexity(word: Sequence[int]) -> int:
    """len(word) minus the number of distinct bases; <= 0 iff free."""
    return len(word) - len({abs(l) for l in word})


def greedy_lineage(word: Sequence[int], generations: int, rng) -> list[tuple[Word, int]]:
    """Follow the lower-complexity child (ties to child 1) with fresh
    independent crossover bits each generation.  Complexity never increases
    along the returned trajectory."""
    current = tuple(word)
    trajectory = [(current, complexity(current))]
    for _ in range(generations):
        pair = fission(current, random_activity(current, rng))
        c1, c2 = complexity(pair.child1), complexity(pair.child2)
        current = pair.child1 if c1 <= c2 else pair.child2
        trajectory.append((current, min(c1, c2)))
    return trajectory


def population_first_free(word: Sequence[int], max_gen: int, rng,
                          population_cap: int = 1 << 22) -> int | None:
    """Full population evolution; generation of the first free genome.

    Returns None when max_gen generations pass without a free genome.  A
    population overflow raises PopulationCapExceeded instead, so "no free
    genome" and "gave up" stay distinguishable.
    """
    if max_gen < 0 or population_cap < 1:
        raise ValueError("caps must be positive")
    population = [tuple(word)]
    if is_free(population[0]):
        return 0
    for gen in range(1, max_gen + 1):
        if 2 * len(population) > population_cap:
            raise PopulationCapExceeded(gen, 2 * len(population), population_cap)
        nxt = []
        for genome in population:
            pair = fission(genome, random_activity(genome, rng))
            if is_free(pair.child1) or is_free(pair.child2):
                return gen
            nxt.append(pair.child1)
            nxt.append(pair.child2)
        population = nxt
    return None


def p1_bound(n: int, length: int) -> float:
    """exp(-n/4 (1 - 2(length-1)/n)^2): tail bound on having no free genome
    after n generations from any start of that length.  Meaningful (< 1)
    only once n > 2(length-1); below that threshold the underlying tail
    inequality does not apply and the vacuous bound 1 is returned."""
    if n < 1 or length < 1:
        raise ValueError("need n >= 1 and length >= 1")
    chi_max = length - 1
    if n < 2 * chi_max:
        return 1.0
    return math.exp(-(n / 4.0) * (1.0 - 2.0 * chi_max / n) ** 2)


def wn_word_prob_bound(n: int, length: int) -> float:
    """Upper bound on the identity probability of any reduced word of the
    given length at uniform random height-n tree automorphisms: split the
    tree at the best level n0 and pay p1_bound above it plus one over the
    subtree group size below it."""
    if n < 2:
        raise ValueError("need height >= 2 so a split level exists")
    best = 1.0
    for n0 in range(1, n):
        sub_nodes = (1 << (n - n0)) - 1
        value = p1_bound(n0, length) + 0.5 ** sub_nodes
        best = min(best, value)
    return best


@dataclass(frozen=True)
class SectionDecomposition:
    parity: int
    child1: Word
    child2: Word
    sections: tuple


def section_decomposition(ctx: WreathContext, word: Sequence[int], gens: Sequence[bytes]) -> SectionDecomposition:
    """Decompose the evaluation of a word at tree automorphisms one level down.

    gens supplies one height-n automorphism per base of the word.  The root
    bits of the generators serve as crossover bits; the returned parity is
    the root bit of the evaluated word (0 iff level 1 is fixed), and the two
    fission children evaluated at ``sections`` (the generators' subtree
    automorphisms, ordered a1, a2, b1, b2, ...) reproduce the two root
    sections of evaluate(word, gens) exactly.
    """
    if ctx.height < 1:
        raise ValueError("need height >= 1")
    k = words.word_arity(word)
    if len(gens) != k:
        raise ValueError(f"word uses {k} bases but {len(gens)} generators given")
    activity = {i + 1: ctx.root_bit(g) for i, g in enumerate(gens)}
    parity = 0
    for letter in word:
        parity ^= activity[abs(letter)]
    pair = fission(word, activity)
    sections: list[bytes] = []
    for g in gens:
        s0, s1 = ctx.sections(g)
        sections.append(s0)
        sections.append(s1)
    return SectionDecomposition(parity, pair.child1, pair.child2, tuple(sections))


def format_dna(word: Sequence[int], doubled: bool = False) -> str:
    """Readable genome text; doubled words render as e.g. '~a2 b2 c1'."""
    if not doubled:
        return words.format_word(word)
    out = []
    for letter in word:
        base, copy = doubled_base(letter)
        name = chr(ord("a") + base - 1)
        out.append(("~" if letter < 0 else "") + f"{name}{copy}")
    return " ".join(out)
