"""Seeded experiment harness and desk-scale estimators.

Everything here is reproducible by construction: a 64-bit master seed plus a
trial index determine each trial's RNG through a fixed SplitMix64-style
mixer, and aggregation is order-independent, so the JSON/CSV output of a run
is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import words
from .girth import (
    DEFAULT_MAX_GIRTH,
    DEFAULT_MEMORY_LIMIT,
    GeneratorTuple,
    girth,
    moore_bound,
    validate_witness,
)
from .groups import GroupContext, WreathContext, make_context
from .words import Word

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# two-sided 99% normal quantile, for Wilson intervals
_Z99 = 2.5758293035489004


def mix64(seed: int, index: int) -> int:
    """Per-trial seed: the (index+1)-th output of SplitMix64 seeded at seed."""
    z = (seed + (index + 1) * _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def _round12(x: float) -> float:
    """Fix floats to 12 significant digits so serialized output is stable."""
    return float(f"{x:.12g}")


# ---------------------------------------------------------------------------
# girth experiments


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    param: int
    k: int = 2
    trials: int = 1000
    seed: int = 0
    max_girth: int = DEFAULT_MAX_GIRTH
    threads: int = 1
    memory_limit: int = DEFAULT_MEMORY_LIMIT
    out: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 bits")
        make_context(self.family, self.param)  # validates family and parameter

    def context(self) -> GroupContext:
        return make_context(self.family, self.param)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    girth: Optional[int]
    witness: str
    normalized: Optional[float]
    elements_stored: int
    depth_reached: int


def run_single_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    """Sample k uniform generators from the trial's derived seed and measure."""
    ctx = cfg.context()
    seed_t = mix64(cfg.seed, trial)
    rng = random.Random(seed_t)
    gens = tuple(ctx.sample_uniform(rng) for _ in range(cfg.k))
    gt = GeneratorTuple(ctx, gens)
    result = girth(gt, cfg.max_girth, cfg.memory_limit)
    validate_witness(gt, result)
    normalized = None
    if result.is_exact:
        if cfg.k >= 2:
            assert result.girth <= moore_bound(2 * cfg.k, ctx.group_size())
        log_base = ctx.group_size_log2() / math.log2(2 * cfg.k - 1)
        normalized = result.girth / log_base
    return TrialRecord(
        trial=trial,
        seed=seed_t,
        girth=result.girth,
        witness=words.format_word(result.witness) if result.is_exact else "",
        normalized=normalized,
        elements_stored=result.elements_stored,
        depth_reached=result.depth_reached,
    )


def _trial_worker(args) -> TrialRecord:
    cfg, trial = args
    return run_single_trial(cfg, trial)


@dataclass
class GirthHistogram:
    """Aggregated experiment output; serializes to the published schema."""

    config: ExperimentConfig
    counts: dict[int, int]
    odd_count: int
    at_least_count: int
    records: list[TrialRecord]

    @classmethod
    def from_records(cls, cfg: ExperimentConfig, records: list[TrialRecord]) -> "GirthHistogram":
        counts: dict[int, int] = {}
        odd = 0
        unresolved = 0
        for rec in records:
            if rec.girth is None:
                unresolved += 1
            else:
                counts[rec.girth] = counts.get(rec.girth, 0) + 1
                if rec.girth % 2:
                    odd += 1
        counts = dict(sorted(counts.items()))
        return cls(cfg, counts, odd, unresolved, records)

    def to_json_dict(self) -> dict:
        return {
            "group": self.config.family,
            "param": self.config.param,
            "k": self.config.k,
            "trials": self.config.trials,
            "seed": self.config.seed,
            "max_girth": self.config.max_girth,
            "histogram": {str(g): c for g, c in self.counts.items()},
            "odd_count": self.odd_count,
            "at_least_count": self.at_least_count,
            "records": [
                {
                    "trial": rec.trial,
                    "girth": rec.girth,
                    "witness": rec.witness,
                    "normalized": None if rec.normalized is None else _round12(rec.normalized),
                }
                for rec in self.records
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GirthHistogram":
        cfg = ExperimentConfig(
            family=data["group"],
            param=data["param"],
            k=data["k"],
            trials=data["trials"],
            seed=data["seed"],
            max_girth=data["max_girth"],
        )
        records = [
            TrialRecord(
                trial=rec["trial"],
                seed=mix64(cfg.seed, rec["trial"]),
                girth=rec["girth"],
                witness=rec["witness"],
                normalized=rec["normalized"],
                elements_stored=0,
                depth_reached=0,
            )
            for rec in data["records"]
        ]
        hist = cls.from_records(cfg, records)
        if hist.to_json_dict()["histogram"] != data["histogram"]:
            raise ValueError("inconsistent histogram in serialized data")
        return hist

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_json_dict(), separators=(",", ":")) + "\n").encode()

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", "girth", "witness", "normalized"])
        for rec in self.records:
            writer.writerow([
                rec.trial,
                "" if rec.girth is None else rec.girth,
                rec.witness,
                "" if rec.normalized is None else f"{rec.normalized:.12g}",
            ])
        return buf.getvalue()

    def to_text_table(self) -> str:
        cfg = self.config
        evens = list(range(12, cfg.max_girth + 1, 2))
        headers = ["<=10"] + [str(g) for g in evens] + [f">{cfg.max_girth}"]
        row = [sum(c for g, c in self.counts.items() if g <= 10 and g % 2 == 0)]
        row += [self.counts.get(g, 0) for g in evens]
        row += [self.at_least_count]
        width = max(len(h) for h in headers) + 2
        lines = [
            f"group={cfg.family} param={cfg.param} k={cfg.k} trials={cfg.trials} seed={cfg.seed}",
            f"n_odd: {self.odd_count}",
            "even girth counts (odd girths are tallied in n_odd):",
            "girth " + "".join(h.rjust(width) for h in headers),
            "count " + "".join(str(c).rjust(width) for c in row),
        ]
        return "\n".join(lines) + "\n"


def run_girth_experiment(cfg: ExperimentConfig) -> GirthHistogram:
    """Run cfg.trials independent seeded trials, optionally across processes.

    Output is identical for any cfg.threads; a memory blow-up in any trial
    aborts the whole run with the offending trial's error.
    """
    tasks = [(cfg, t) for t in range(cfg.trials)]
    records: list[TrialRecord] = []
    if cfg.threads == 1:
        iterator = map(_trial_worker, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=cfg.threads)
        iterator = pool.map(_trial_worker, tasks, chunksize=max(1, cfg.trials // (cfg.threads * 8)))
    try:
        for rec in iterator:
            records.append(rec)
            if (rec.trial + 1) % 1000 == 0:
                logger.info("completed %d/%d trials", rec.trial + 1, cfg.trials)
    except Exception:
        logger.error("trial %d failed; aborting run", len(records))
        raise
    finally:
        if cfg.threads != 1:
            pool.shutdown()
    records.sort(key=lambda rec: rec.trial)
    return GirthHistogram.from_records(cfg, records)


# ---------------------------------------------------------------------------
# word probability estimators and bounds


@dataclass(frozen=True)
class WordProbEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    hits: int
    trials: int


def estimate_word_prob(ctx: GroupContext, word: Sequence[int], trials: int, rng,
                       sampler: Optional[Callable] = None) -> WordProbEstimate:
    """Monte Carlo estimate of Prob[word evaluates to identity] at a uniform
    random tuple, with a 99% Wilson interval.  A custom tuple sampler may be
    supplied to study non-uniform (e.g. forced-degenerate) ensembles."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    k = max(1, words.word_arity(word))
    ident = ctx.identity()
    id_key = ctx.canonical_key(ident)
    hits = 0
    for _ in range(trials):
        if sampler is None:
            gens = tuple(ctx.sample_uniform(rng) for _ in range(k))
        else:
            gens = sampler(rng)
        value = words.evaluate(ctx, word, gens)
        if ctx.canonical_key(value) == id_key:
            hits += 1
    phat = hits / trials
    z2 = _Z99 * _Z99
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = _Z99 * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return WordProbEstimate(phat, max(0.0, center - half), min(1.0, center + half), hits, trials)


def exact_power_word_prob_sn(n: int, l: int) -> Fraction:
    """Exact probability that a uniform permutation of n points satisfies
    sigma^l = 1, via the recurrence c(m) = sum over d | l of
    (m-1)!/(m-d)! * c(m-d) counting such permutations."""
    if n < 1 or l < 1:
        raise ValueError("need n >= 1 and l >= 1")
    divisors = [d for d in range(1, l + 1) if l % d == 0]
    c = [0] * (n + 1)
    c[0] = 1
    for m in range(1, n + 1):
        total = 0
        for d in divisors:
            if d <= m:
                total += math.factorial(m - 1) // math.factorial(m - d) * c[m - d]
        c[m] = total
    return Fraction(c[n], math.factorial(n))


def sn_word_prob_bound(n: int, length: int) -> float:
    """(2l/n)^(n/2l): identity-probability bound for length-l words at
    uniform permutations of n points; needs 2l < n."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if 2 * length >= n:
        raise ValueError("bound needs 2*length < n")
    return (2 * length / n) ** (n / (2 * length))


def pgl_word_prob_bound(p: int, length: int) -> float:
    """Leading term length/p of the identity-probability bound for non-law
    words over PGL2(p).  The O(1/p^2) correction has no computable constant
    and is not included."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return length / p


def union_bound_threshold(degree: int, param: int, kind: str) -> int:
    """Girth length guaranteed by summing word counts against a probability
    bound.

    kind="pgl": evaluates floor(log_{d-1} p - 2 log_{d-1} log_{d-1} p), the
    closed form obtained from the length/p bound.  kind="sn": largest l with
    (number of words of length <= l) * (2l/n)^(n/2l) < 1, scanned directly.
    """
    if degree < 3:
        raise ValueError("degree must be >= 3")
    base = degree - 1
    if kind == "pgl":
        x = math.log(param, base)
        if x <= 1.0:
            return 0
        return max(0, math.floor(x - 2 * math.log(x, base)))
    if kind == "sn":
        n = param
        best = 0
        count = 1
        length = 1
        while 2 * length < n:
            count += degree * base ** (length - 1)
            if count * sn_word_prob_bound(n, length) < 1.0:
                best = length
            else:
                break
            length += 1
        return best
    raise ValueError(f"unknown bound kind {kind!r}")


# ---------------------------------------------------------------------------
# shortest laws


class SearchSpaceExceeded(RuntimeError):
    def __init__(self, nodes: int, cap: int):
        self.nodes = nodes
        self.cap = cap
        super().__init__(f"law search visited {nodes} nodes (cap {cap})")


@dataclass(frozen=True)
class LawSearchResult:
    length: Optional[int]
    word: Optional[Word]
    lower_bound: int
    nodes_visited: int

    @property
    def is_exact(self) -> bool:
        return self.length is not None


def shortest_law(ctx: GroupContext, k: int, max_length: int,
                 node_cap: int = 20_000_000) -> LawSearchResult:
    """Shortest nonempty word that evaluates to the identity at every k-tuple.

    Exhaustive: enumerates all |G|^k tuples through a multiplication table,
    then runs depth-first search over the reduced-word tree with running
    products pushed and popped per letter.  Small groups only.
    """
    size = ctx.group_size()
    n_tuples = size ** k
    if n_tuples > 2_000_000:
        raise ValueError(f"{n_tuples} tuples is too many to enumerate")
    elements = list(ctx.elements())
    index = {ctx.canonical_key(e): i for i, e in enumerate(elements)}
    id_idx = index[ctx.canonical_key(ctx.identity())]
    dtype = np.uint16 if size < (1 << 16) else np.int64
    table = np.empty((size, size), dtype=dtype)
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            table[i, j] = index[ctx.canonical_key(ctx.multiply(x, y))]
    inv_idx = np.array([index[ctx.canonical_key(ctx.invert(x))] for x in elements], dtype=dtype)

    mixed = np.arange(n_tuples)
    letter_cols = []
    for i in range(k):
        component = (mixed // size ** i % size).astype(dtype)
        letter_cols.append(component)
        letter_cols.append(inv_idx[component])

    identity_row = np.full(n_tuples, id_idx, dtype=dtype)
    nodes = 0
    for target in range(1, max_length + 1):
        path: list[int] = []
        prods = [identity_row]

        def dfs() -> Optional[Word]:
            nonlocal nodes
            depth = len(path)
            last = path[-1] if path else None
            for c in range(2 * k):
                if last is not None and c == (last ^ 1):
                    continue
                nodes += 1
                if nodes > node_cap:
                    raise SearchSpaceExceeded(nodes, node_cap)
                prod = table[prods[-1], letter_cols[c]]
                if depth + 1 == target:
                    if (target == 1 or c != (path[0] ^ 1)) and bool(np.all(prod == id_idx)):
                        word = tuple(words.code_to_letter(x) for x in path + [c])
                        return word
                    continue
                path.append(c)
                prods.append(prod)
                found = dfs()
                prods.pop()
                path.pop()
                if found is not None:
                    return found
            return None

        word = dfs()
        if word is not None:
            return LawSearchResult(target, word, target, nodes)
    return LawSearchResult(None, None, max_length + 1, nodes)


# ---------------------------------------------------------------------------
# integer-polynomial product shape of alternating unipotent words


def _poly_mul(f: list[int], g: list[int]) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, fi in enumerate(f):
        if fi:
            for j, gj in enumerate(g):
                out[i + j] += fi * gj
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_add(f: list[int], g: list[int]) -> list[int]:
    out = [0] * max(len(f), len(g))
    for i, v in enumerate(f):
        out[i] += v
    for i, v in enumerate(g):
        out[i] += v
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_mat_mul(m1, m2):
    return [
        [_poly_add(_poly_mul(m1[0][0], m2[0][0]), _poly_mul(m1[0][1], m2[1][0])),
         _poly_add(_poly_mul(m1[0][0], m2[0][1]), _poly_mul(m1[0][1], m2[1][1]))],
        [_poly_add(_poly_mul(m1[1][0], m2[0][0]), _poly_mul(m1[1][1], m2[1][0])),
         _poly_add(_poly_mul(m1[1][0], m2[0][1]), _poly_mul(m1[1][1], m2[1][1]))],
    ]


def ping_pong_product(exponent_pairs: Sequence[tuple[int, int]]):
    """Product over i of [[1,0],[l_i x,1]] [[1,k_i x],[0,1]] with exact
    integer-polynomial entries (each entry a coefficient list in x)."""
    if not exponent_pairs:
        raise ValueError("need at least one exponent pair")
    for l, kk in exponent_pairs:
        if l == 0 or kk == 0:
            raise ValueError("exponents must be nonzero")
    m = [[[1], []], [[], [1]]]
    for l, kk in exponent_pairs:
        lower = [[[1], []], [[0, l], [1]]]
        upper = [[[1], [0, kk]], [[], [1]]]
        m = _poly_mat_mul(_poly_mat_mul(m, lower), upper)
    return m


def verify_ping_pong_form(exponent_pairs: Sequence[tuple[int, int]]) -> bool:
    """Check the alternating-product shape: the (2,2) entry has degree
    exactly 2r with leading coefficient prod(l_i k_i), all other entries
    degree at most 2r-1."""
    m = ping_pong_product(exponent_pairs)
    r = len(exponent_pairs)
    lead = 1
    for l, kk in exponent_pairs:
        lead *= l * kk
    f22 = m[1][1]
    if len(f22) - 1 != 2 * r or f22[-1] != lead:
        return False
    for i, j in ((0, 0), (0, 1), (1, 0)):
        if len(m[i][j]) - 1 > 2 * r - 1:
            return False
    return True


# ---------------------------------------------------------------------------
# projective zero counting


@dataclass(frozen=True)
class HomogeneousPoly:
    """Homogeneous polynomial over F_p: m variables, monomials as
    (coefficient, exponent vector) with a common total degree."""

    m: int
    p: int
    monomials: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least 2 variables")
        if not self.monomials:
            raise ValueError("polynomial has no monomials")
        degrees = set()
        seen = set()
        for coeff, exps in self.monomials:
            if len(exps) != self.m:
                raise ValueError("exponent vector length mismatch")
            if not 1 <= coeff < self.p:
                raise ValueError("coefficients must lie in [1, p)")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            if exps in seen:
                raise ValueError("duplicate monomial")
            seen.add(exps)
            degrees.add(sum(exps))
        if len(degrees) != 1:
            raise ValueError("monomials have inconsistent total degree")
        if degrees.pop() == 0:
            raise ValueError("degree must be >= 1")

    @property
    def degree(self) -> int:
        return sum(self.monomials[0][1])

    def evaluate(self, point: Sequence[int]) -> int:
        total = 0
        for coeff, exps in self.monomials:
            term = coeff
            for x, e in zip(point, exps):
                if e:
                    term = term * pow(x, e, self.p) % self.p
            total += term
        return total % self.p


@dataclass(frozen=True)
class ProjectiveZeroCount:
    zeros: int
    bound: int
    within_bound: bool
    attains_bound: bool


def projective_points(m: int, p: int):
    """Canonical representatives of P^(m-1)(F_p): first nonzero entry 1."""
    for pivot in range(m):
        free = m - pivot - 1
        for tail in range(p ** free):
            point = [0] * pivot + [1]
            rest = tail
            for _ in range(free):
                point.append(rest % p)
                rest //= p
            yield tuple(point)


def count_projective_zeros(poly: HomogeneousPoly) -> ProjectiveZeroCount:
    """Count projective zeros and compare against the hyperplane-union bound
    d p^(m-2) + (p^(m-2)-1)/(p-1)."""
    if poly.p > 13 or poly.m > 4:
        raise ValueError("enumeration capped at p <= 13, m <= 4")
    zeros = sum(1 for pt in projective_points(poly.m, poly.p) if poly.evaluate(pt) == 0)
    d, p, m = poly.degree, poly.p, poly.m
    bound = d * p ** (m - 2) + (p ** (m - 2) - 1) // (p - 1)
    return ProjectiveZeroCount(zeros, bound, zeros <= bound, zeros == bound)


def split_product_poly(p: int, cs: Sequence[int], m: int = 3) -> HomogeneousPoly:
    """prod_i (x_0 - c_i x_1) expanded over m variables; with distinct c_i
    this attains the projective-zero bound exactly."""
    d = len(cs)
    if d < 1:
        raise ValueError("need at least one factor")
    poly_terms: dict[int, int] = {0: 1}  # x1-degree -> coefficient mod p
    for c in cs:
        nxt: dict[int, int] = {}
        for e1, coeff in poly_terms.items():
            nxt[e1] = (nxt.get(e1, 0) + coeff) % p
            nxt[e1 + 1] = (nxt.get(e1 + 1, 0) - coeff * c) % p
        poly_terms = nxt
    monomials = []
    for e1, coeff in sorted(poly_terms.items()):
        if coeff % p:
            exps = [d - e1, e1] + [0] * (m - 2)
            monomials.append((coeff % p, tuple(exps)))
    return HomogeneousPoly(m, p, tuple(monomials))


# ---------------------------------------------------------------------------
# order statistics in iterated wreath products


@dataclass(frozen=True)
class WnOrderStats:
    height: int
    trials: int
    log2_order_counts: dict[int, int]
    alpha_hat: float

    @property
    def ratios(self) -> list[float]:
        out = []
        for log2_ord, count in sorted(self.log2_order_counts.items()):
            out.extend([log2_ord / self.height] * count)
        return out


def wn_order_experiment(n: int, trials: int, rng) -> WnOrderStats:
    """Empirical distribution of log2(order)/n for uniform height-n tree
    automorphisms (orders are always powers of two)."""
    if n < 1 or n > 24:
        raise ValueError("height must be in [1, 24]")
    ctx = WreathContext(n)
    counts: dict[int, int] = {}
    total = 0
    for _ in range(trials):
        order = ctx.order(ctx.sample_uniform(rng))
        log2_ord = order.bit_length() - 1
        counts[log2_ord] = counts.get(log2_ord, 0) + 1
        total += log2_ord
    counts = dict(sorted(counts.items()))
    return WnOrderStats(n, trials, counts, total / (trials * n))
