"""Free-group words over k generators.

A word is a tuple of nonzero ints: ``+i`` is the i-th generator (1-based)
and ``-i`` its inverse.  The text form writes generator i as the i-th
lowercase letter and its inverse as the matching uppercase letter, so
"AbcaaC" parses to (-1, 2, 3, 1, 1, -3).

Letters are ordered a < A < b < B < ... everywhere (enumeration order,
lexicographic tie-breaking, packed codes).  A letter's code is
``2*(i-1) + (1 if inverted else 0)``.
"""

from __future__ import annotations

import string
from typing import Iterable, Iterator, Sequence

Word = tuple[int, ...]

MAX_TEXT_ARITY = 26


def letter_inverse(letter: int) -> int:
    return -letter


def letter_to_code(letter: int) -> int:
    return 2 * (abs(letter) - 1) + (1 if letter < 0 else 0)


def code_to_letter(code: int) -> int:
    gen = (code >> 1) + 1
    return -gen if code & 1 else gen


def alphabet_bits(k: int) -> int:
    """Bits per letter in packed word codes for a rank-k alphabet."""
    return max(1, (2 * k - 1).bit_length())


def word_to_code(word: Sequence[int], k: int) -> int:
    """Pack a word into an int: a leading 1 bit, then one code per letter.

    Shorter words always pack to smaller codes, and equal-length words
    compare in letter order, so integer order on codes is (length, lex)
    order on words.
    """
    bits = alphabet_bits(k)
    code = 1
    for letter in word:
        code = (code << bits) | letter_to_code(letter)
    return code


def code_to_word(code: int, k: int) -> Word:
    bits = alphabet_bits(k)
    mask = (1 << bits) - 1
    letters = []
    while code > 1:
        letters.append(code_to_letter(code & mask))
        code >>= bits
    return tuple(reversed(letters))


def word_arity(word: Sequence[int]) -> int:
    """Smallest alphabet rank containing the word (0 for the empty word)."""
    return max((abs(letter) for letter in word), default=0)


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def free_reduce(letters: Iterable[int]) -> Word:
    """Freely reduce a letter sequence (delete adjacent inverse pairs)."""
    stack: list[int] = []
    for letter in letters:
        if letter == 0:
            raise ValueError("letter 0 is not a generator or inverse")
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def inverse_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def cyclic_reduce(word: Sequence[int]) -> Word:
    """Strip matching first/last inverse pairs down to the cyclic core.

    The core of a nonempty reduced word is nonempty: stripping removes two
    letters at a time and a reduced word can never be of the form u·u^-1.
    """
    lo, hi = 0, len(word)
    while hi - lo >= 2 and word[lo] == -word[hi - 1]:
        lo += 1
        hi -= 1
    return tuple(word[lo:hi])


def is_cyclically_reduced(word: Sequence[int]) -> bool:
    if not word:
        return False
    return is_reduced(word) and word[0] != -word[-1]


def concat_inverse_reduce(u: Sequence[int], v: Sequence[int]) -> Word:
    """Reduced form of u·v^-1.  Nonempty whenever u != v (as reduced words)."""
    m, n = len(u), len(v)
    common = 0
    while common < m and common < n and u[m - 1 - common] == v[n - 1 - common]:
        common += 1
    return tuple(u[: m - common]) + inverse_word(v[: n - common])


def enumerate_reduced(k: int, length: int) -> Iterator[Word]:
    """All reduced words of exactly the given length, in lexicographic order.

    Implemented as an odometer over non-cancelling letter codes, so only
    O(length) state is held.  Yields 2k(2k-1)^(length-1) words for length >= 1.
    """
    if k < 1:
        raise ValueError("alphabet rank must be >= 1")
    if length < 0:
        raise ValueError("length must be >= 0")
    if length == 0:
        yield ()
        return
    top = 2 * k - 1

    def fill_from(codes: list[int], pos: int) -> None:
        for j in range(pos, length):
            prev = codes[j - 1] if j else None
            codes[j] = 1 if prev == 1 else 0

    codes = [0] * length
    fill_from(codes, 0)
    while True:
        yield tuple(code_to_letter(c) for c in codes)
        pos = length - 1
        while pos >= 0:
            prev = codes[pos - 1] if pos else None
            nxt = codes[pos] + 1
            if prev is not None and nxt == (prev ^ 1):
                nxt += 1
            if nxt <= top:
                codes[pos] = nxt
                fill_from(codes, pos + 1)
                break
            pos -= 1
        if pos < 0:
            return


def enumerate_cyclically_reduced(k: int, length: int) -> Iterator[Word]:
    """Nonempty cyclically reduced words of the given length, lex order."""
    if length < 1:
        raise ValueError("cyclically reduced words are nonempty")
    for word in enumerate_reduced(k, length):
        if word[0] != -word[-1] or length == 1:
            yield word


def random_reduced_word(k: int, length: int, rng) -> Word:
    """Uniform reduced word: first letter uniform over 2k, then 2k-1 each."""
    if length == 0:
        return ()
    codes = [rng.randrange(2 * k)]
    for _ in range(length - 1):
        r = rng.randrange(2 * k - 1)
        forbidden = codes[-1] ^ 1
        codes.append(r if r < forbidden else r + 1)
    return tuple(code_to_letter(c) for c in codes)


def power_word(i: int, m: int) -> Word:
    if i < 1 or m < 1:
        raise ValueError("need generator index >= 1 and exponent >= 1")
    return (i,) * m


def evaluate(ctx, word: Sequence[int], gens: Sequence):
    """Evaluate the word at a tuple of group elements, left to right.

    The empty word maps to the identity.  gens[i-1] is substituted for
    generator i; the tuple must cover every generator the word uses.
    """
    if word_arity(word) > len(gens):
        raise ValueError(
            f"word uses generator {word_arity(word)} but only {len(gens)} elements given"
        )
    acc = ctx.identity()
    inverses: dict[int, object] = {}
    for letter in word:
        if letter > 0:
            elt = gens[letter - 1]
        else:
            elt = inverses.get(letter)
            if elt is None:
                elt = ctx.invert(gens[-letter - 1])
                inverses[letter] = elt
        acc = ctx.multiply(acc, elt)
    return acc


def substitute(word: Sequence[int], replacements: Sequence[Sequence[int]]) -> Word:
    """Replace generator i by replacements[i-1] (inverted for -i) and reduce.

    Reduction happens incrementally while splicing, so the cost is linear in
    the substituted length.
    """
    if word_arity(word) > len(replacements):
        raise ValueError("not enough replacement words")
    stack: list[int] = []
    for letter in word:
        rep = replacements[abs(letter) - 1]
        piece = rep if letter > 0 else inverse_word(rep)
        for out in piece:
            if stack and stack[-1] == -out:
                stack.pop()
            else:
                stack.append(out)
    return tuple(stack)


def substitution_half_length(word_length: int, k_prime: int) -> int:
    """Least s with word_length * 2k' * (2k'-1)^-(s-1) < 1."""
    if word_length < 1 or k_prime < 2:
        raise ValueError("need a nonempty word and k' >= 2")
    s = 1
    while word_length * 2 * k_prime >= (2 * k_prime - 1) ** (s - 1):
        s += 1
    return s


def build_substitution(word: Sequence[int], k_prime: int, rng, max_retries: int = 10_000) -> list[Word]:
    """Random replacement words over a rank-k' alphabet keeping the word alive.

    Each replacement is left·x·right with uniform reduced half-words of
    length s (s from substitution_half_length) and x picked so no junction
    cancels; the draw is retried until the substituted word is nonempty.
    """
    k = word_arity(word)
    if not word:
        raise ValueError("word must be nonempty")
    if not is_reduced(word):
        raise ValueError("word must be reduced")
    if k_prime < 2 or k <= k_prime:
        raise ValueError("need 2 <= k' < arity of the word")
    s = substitution_half_length(len(word), k_prime)
    letters = [code_to_letter(c) for c in range(2 * k_prime)]
    for _ in range(max_retries):
        reps: list[Word] = []
        for _ in range(k):
            left = random_reduced_word(k_prime, s, rng)
            right = random_reduced_word(k_prime, s, rng)
            allowed = [x for x in letters if x != -left[-1] and -x != right[0]]
            x = allowed[rng.randrange(len(allowed))]
            reps.append(left + (x,) + right)
        if substitute(word, reps):
            return reps
    raise RuntimeError("substitution kept collapsing; this signals a bug")


def parse_word(text: str) -> Word:
    """Parse a-z/A-Z text into a reduced word ("aA" gives the empty word)."""
    letters = []
    for ch in text:
        if ch in string.ascii_lowercase:
            letters.append(ord(ch) - ord("a") + 1)
        elif ch in string.ascii_uppercase:
            letters.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"invalid character {ch!r} in word")
    return free_reduce(letters)


def format_word(word: Sequence[int]) -> str:
    out = []
    for letter in word:
        idx = abs(letter) - 1
        if idx >= MAX_TEXT_ARITY:
            raise ValueError("text format supports at most 26 generators")
        out.append(string.ascii_uppercase[idx] if letter < 0 else string.ascii_lowercase[idx])
    return "".join(out)
