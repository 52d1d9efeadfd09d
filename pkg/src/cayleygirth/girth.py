"""Exact girth of a random Cayley graph via shortest-relation search.

The girth of the Cayley graph on generators g_1..g_k (plus inverses) equals
the length of the shortest nontrivial relation among them.  The engine walks
reduced words in breadth-first order; while no two words have evaluated to
the same element, reduced words biject with ball elements, so the frontier
at depth d is exactly the sphere of radius d.  At the first depth with any
collision, every collision (new word u, stored word v) yields the relation
cyclic_reduce(u v^-1); the minimum length over that depth's collisions is
the girth, because a relation of length g forces a collision at depth
ceil(g/2) and any depth-d collision certifies a relation of length <= 2d.

Two interchangeable backends produce identical results: a dict-backed walk
that works over any group context, and a vectorized walk for the matrix
families that packs canonical elements and word codes into uint64 columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import words
from .groups import GroupContext, PGL2Context, SL2Context
from .words import Word

DEFAULT_MAX_GIRTH = 30
DEFAULT_MEMORY_LIMIT = 600_000_000

# Charged per stored element when budgeting memory: the packed backend keeps
# two 8-byte columns per element; the dict backend is charged its real-world
# overhead so limits mean roughly the same thing on both paths.
PACKED_ENTRY_BYTES = 16
DICT_ENTRY_BYTES = 96


class GirthMemoryError(RuntimeError):
    """Raised when the collision store would exceed its byte budget."""

    def __init__(self, depth_reached: int, entries: int, memory_limit: int):
        self.depth_reached = depth_reached
        self.entries = entries
        self.memory_limit = memory_limit
        super().__init__(
            f"collision store needs more than {memory_limit} bytes at depth "
            f"{depth_reached} ({entries} entries); rerun with a larger budget"
        )


@dataclass(frozen=True)
class GeneratorTuple:
    """A group context plus k sampled generators.

    Degenerate tuples (repeats, identity, involutions) are deliberately
    allowed; they simply produce girth 1 or 2.
    """

    ctx: GroupContext
    gens: tuple

    def __post_init__(self):
        if len(self.gens) < 1:
            raise ValueError("need at least one generator")
        for g in self.gens:
            self.ctx.validate(g)

    @property
    def k(self) -> int:
        return len(self.gens)

    @property
    def degree(self) -> int:
        return 2 * len(self.gens)


@dataclass(frozen=True)
class GirthResult:
    """Either an exact girth with witness relation, or a certified bound.

    Exact results carry a cyclically reduced witness of length ``girth``
    evaluating to the identity.  Unresolved results have ``girth is None``
    and certify that no relation shorter than ``lower_bound`` exists.
    """

    girth: Optional[int]
    witness: Optional[Word]
    lower_bound: int
    elements_stored: int
    depth_reached: int

    @property
    def is_exact(self) -> bool:
        return self.girth is not None


def _resolve_collisions(collisions, k: int, elements_stored: int, depth: int) -> GirthResult:
    """Pick the shortest (then lexicographically least) relation witness."""
    best_key = None
    best_rel: Word = ()
    for ucode, vcode in collisions:
        u = words.code_to_word(ucode, k)
        v = words.code_to_word(vcode, k)
        rel = words.cyclic_reduce(words.concat_inverse_reduce(u, v))
        key = (len(rel), words.word_to_code(rel, k))
        if best_key is None or key < best_key:
            best_key = key
            best_rel = rel
    g = best_key[0]
    return GirthResult(
        girth=g,
        witness=best_rel,
        lower_bound=g,
        elements_stored=elements_stored,
        depth_reached=depth,
    )


def _girth_generic(ctx: GroupContext, gens, max_girth: int, memory_limit: int) -> GirthResult:
    k = len(gens)
    bits = words.alphabet_bits(k)
    letters = []
    for g in gens:
        letters.append(g)
        letters.append(ctx.invert(g))
    mask = (1 << bits) - 1
    max_depth = (max_girth + 1) // 2

    seen = {ctx.canonical_key(ctx.identity()): 1}
    frontier = [(ctx.identity(), 1)]
    for depth in range(1, max_depth + 1):
        collisions = []
        nxt = []
        for elt, code in frontier:
            last = (code & mask) if depth > 1 else None
            for c in range(2 * k):
                if last is not None and c == (last ^ 1):
                    continue
                nelt = ctx.multiply(elt, letters[c])
                ncode = (code << bits) | c
                nkey = ctx.canonical_key(nelt)
                prev = seen.get(nkey)
                if prev is None:
                    seen[nkey] = ncode
                    nxt.append((nelt, ncode))
                else:
                    collisions.append((ncode, prev))
        if collisions:
            return _resolve_collisions(collisions, k, len(seen), depth)
        projected = len(seen) + len(nxt) * (2 * k - 1)
        if projected * DICT_ENTRY_BYTES > memory_limit:
            raise GirthMemoryError(depth, projected, memory_limit)
        frontier = nxt
    return GirthResult(None, None, max_girth + 1, len(seen), max_depth)


def _pow_mod_vec(base: np.ndarray, exponent: int, p: int) -> np.ndarray:
    result = np.ones_like(base)
    acc = base % p
    e = exponent
    while e:
        if e & 1:
            result = result * acc % p
        acc = acc * acc % p
        e >>= 1
    return result


def _canonicalize_vec(a, b, c, d, p):
    """Scale rows so the first nonzero entry is 1 (invertible input only)."""
    pivot = np.where(a != 0, a, b)
    s = _pow_mod_vec(pivot, p - 2, p)
    return a * s % p, b * s % p, c * s % p, d * s % p


def _pack_keys(a, b, c, d, p: int, proj: bool) -> np.ndarray:
    if proj:
        # canonical first entry is 0 or 1, so the mixed-radix value fits u64
        return (((a * p + b) * p + c) * p + d).astype(np.uint64)
    au, bu, cu, du = (v.astype(np.uint64) for v in (a, b, c, d))
    return (au << np.uint64(48)) | (bu << np.uint64(32)) | (cu << np.uint64(16)) | du


def _girth_matrix(ctx, gens, max_girth: int, memory_limit: int) -> GirthResult:
    p = ctx.p
    proj = ctx.family == "pgl2"
    k = len(gens)
    bits = words.alphabet_bits(k)
    lmask = (1 << bits) - 1
    max_depth = (max_girth + 1) // 2

    letters = []
    for g in gens:
        letters.append(g)
        letters.append(ctx.invert(g))

    cols = [np.array([v], dtype=np.int64) for v in (1, 0, 0, 1)]
    codes = np.array([1], dtype=np.int64)
    id_key = _pack_keys(*(c % p for c in cols), p, proj)
    stored_keys = id_key.astype(np.uint64)
    stored_codes = np.array([1], dtype=np.int64)

    for depth in range(1, max_depth + 1):
        parts = []
        for c in range(2 * k):
            if depth == 1:
                sa, sb, sc, sd = cols
                scodes = codes
            else:
                keep = (codes & lmask) != (c ^ 1)
                if not keep.any():
                    continue
                sa, sb, sc, sd = (col[keep] for col in cols)
                scodes = codes[keep]
            e, f, g2, h = letters[c]
            parts.append((
                (sa * e + sb * g2) % p,
                (sa * f + sb * h) % p,
                (sc * e + sd * g2) % p,
                (sc * f + sd * h) % p,
                (scodes << bits) | c,
            ))
        a = np.concatenate([part[0] for part in parts])
        b = np.concatenate([part[1] for part in parts])
        cc = np.concatenate([part[2] for part in parts])
        d = np.concatenate([part[3] for part in parts])
        ncodes = np.concatenate([part[4] for part in parts])
        order = np.argsort(ncodes)
        a, b, cc, d, ncodes = a[order], b[order], cc[order], d[order], ncodes[order]

        if proj:
            a, b, cc, d = _canonicalize_vec(a, b, cc, d, p)
        keys = _pack_keys(a, b, cc, d, p, proj)

        sort_idx = np.lexsort((ncodes, keys))
        ks = keys[sort_idx]
        cs = ncodes[sort_idx]
        pos = np.searchsorted(stored_keys, ks)
        posc = np.minimum(pos, stored_keys.size - 1)
        in_stored = (stored_keys[posc] == ks) & (pos < stored_keys.size)
        same_prev = np.zeros(ks.size, dtype=bool)
        same_prev[1:] = ks[1:] == ks[:-1]
        colliding = in_stored | same_prev
        if colliding.any():
            idx = np.arange(ks.size)
            first = np.maximum.accumulate(np.where(same_prev, 0, idx))
            collisions = []
            for i in np.nonzero(colliding)[0]:
                u = int(cs[i])
                v = int(stored_codes[pos[i]]) if in_stored[i] else int(cs[first[i]])
                collisions.append((u, v))
            return _resolve_collisions(collisions, k, int(stored_keys.size), depth)

        entries = stored_keys.size + ks.size
        if entries * PACKED_ENTRY_BYTES > memory_limit:
            raise GirthMemoryError(depth, int(entries), memory_limit)
        stored_keys = np.insert(stored_keys, pos, ks)
        stored_codes = np.insert(stored_codes, pos, cs)
        cols = [a, b, cc, d]
        codes = ncodes
    return GirthResult(None, None, max_girth + 1, int(stored_keys.size), max_depth)


def _matrix_path_usable(ctx, k: int, max_girth: int) -> bool:
    if isinstance(ctx, PGL2Context):
        if ctx.p.bit_length() > 21:
            return False
    elif isinstance(ctx, SL2Context):
        if ctx.p >= 1 << 16:
            return False
    else:
        return False
    max_depth = (max_girth + 1) // 2
    return max_depth * words.alphabet_bits(k) + 1 <= 63


def girth(gen_tuple: GeneratorTuple, max_girth: int = DEFAULT_MAX_GIRTH,
          memory_limit: int = DEFAULT_MEMORY_LIMIT) -> GirthResult:
    """Exact girth with witness, or a certified "at least max_girth+1".

    Deterministic: identical tuple and limits give an identical result.  On
    an exhausted memory budget a GirthMemoryError carrying the depth reached
    is raised; there is no silent fallback.
    """
    if max_girth < 1:
        raise ValueError("max_girth must be >= 1")
    ctx, gens = gen_tuple.ctx, gen_tuple.gens
    if _matrix_path_usable(ctx, len(gens), max_girth):
        return _girth_matrix(ctx, gens, max_girth, memory_limit)
    return _girth_generic(ctx, gens, max_girth, memory_limit)


def girth_oracle(gen_tuple: GeneratorTuple, max_girth: int = DEFAULT_MAX_GIRTH) -> GirthResult:
    """Reference girth by plain enumeration of cyclically reduced words.

    No hashing, no shared state with girth(): each word is evaluated from
    scratch in lexicographic order.  Only usable when (2k-1)^max_girth is
    small; intended as the independent test oracle.
    """
    ctx, gens = gen_tuple.ctx, gen_tuple.gens
    k = len(gens)
    ident = ctx.identity()
    for length in range(1, max_girth + 1):
        for word in words.enumerate_cyclically_reduced(k, length):
            if words.evaluate(ctx, word, gens) == ident:
                return GirthResult(length, word, length, 0, length)
    return GirthResult(None, None, max_girth + 1, 0, max_girth)


def moore_bound(degree: int, n_vertices: int) -> int:
    """Largest girth a degree-d graph on at most n vertices could have.

    A girth-g graph contains a tree around a vertex (odd g) or an edge
    (even g), which already needs the returned ball sizes worth of vertices.
    """
    if degree < 3:
        raise ValueError("degree must be >= 3")
    if n_vertices < 2:
        raise ValueError("need at least 2 vertices")

    def ball(g: int) -> int:
        if g % 2:
            r = (g - 1) // 2
            return 1 + degree * sum((degree - 1) ** i for i in range(r))
        r = g // 2
        return 2 * sum((degree - 1) ** i for i in range(r))

    g = 2
    while ball(g + 1) <= n_vertices:
        g += 1
    return g


def power_upper_bound(gen_tuple: GeneratorTuple) -> int:
    """min_i order(g_i): the relation g_i^order always exists."""
    ctx = gen_tuple.ctx
    return min(ctx.order(g) for g in gen_tuple.gens)


def validate_witness(gen_tuple: GeneratorTuple, result: GirthResult) -> None:
    """Assert the exact-result contract; raises AssertionError on violation."""
    if not result.is_exact:
        return
    w = result.witness
    assert w is not None and len(w) == result.girth, "witness length mismatch"
    assert words.is_cyclically_reduced(w), "witness not cyclically reduced"
    ctx = gen_tuple.ctx
    evaluated = words.evaluate(ctx, w, gen_tuple.gens)
    assert ctx.canonical_key(evaluated) == ctx.canonical_key(ctx.identity()), \
        "witness does not evaluate to the identity"
