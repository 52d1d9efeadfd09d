"""HTTP front end wrapping the library.

Run with ``uvicorn cayleygirth.service:app``.  Each endpoint mirrors a CLI
command and returns the same JSON payload, so results are reproducible from
the request body alone.
"""

from __future__ import annotations

import math
import random
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import genetics, words
from .experiments import (
    ExperimentConfig,
    HomogeneousPoly,
    SearchSpaceExceeded,
    _round12,
    count_projective_zeros,
    estimate_word_prob,
    mix64,
    pgl_word_prob_bound,
    run_girth_experiment,
    shortest_law,
    sn_word_prob_bound,
    split_product_poly,
    union_bound_threshold,
    verify_ping_pong_form,
    wn_order_experiment,
)
from .genetics import PopulationCapExceeded, p1_bound, wn_word_prob_bound
from .girth import (
    DEFAULT_MAX_GIRTH,
    DEFAULT_MEMORY_LIMIT,
    GeneratorTuple,
    GirthMemoryError,
    girth,
    moore_bound,
    power_upper_bound,
)
from .groups import make_context

app = FastAPI(
    title="cayleygirth",
    description="Girth of random Cayley graphs, word-map probabilities, and "
    "the crossover model for tree automorphism groups.",
)

Family = Literal["sym", "sl2", "pgl2", "w2"]


def _fail(exc: Exception):
    if isinstance(exc, (GirthMemoryError, PopulationCapExceeded, SearchSpaceExceeded)):
        raise HTTPException(status_code=507, detail=str(exc))
    if isinstance(exc, ValueError):
        raise HTTPException(status_code=400, detail=str(exc))
    raise exc


class GirthRequest(BaseModel):
    group: Family
    param: int
    k: int = 2
    seed: int = 0
    max_girth: int = DEFAULT_MAX_GIRTH
    memory_limit: int = DEFAULT_MEMORY_LIMIT


class GirthResponse(BaseModel):
    group: str
    param: int
    k: int
    seed: int
    max_girth: int
    girth: Optional[int]
    witness: str
    lower_bound: int
    normalized: Optional[float]
    power_upper_bound: int
    elements_stored: int
    depth_reached: int


@app.post("/girth", response_model=GirthResponse)
def girth_endpoint(req: GirthRequest) -> GirthResponse:
    try:
        ctx = make_context(req.group, req.param)
        rng = random.Random(req.seed)
        gens = tuple(ctx.sample_uniform(rng) for _ in range(req.k))
        gt = GeneratorTuple(ctx, gens)
        result = girth(gt, req.max_girth, req.memory_limit)
        normalized = None
        if result.is_exact:
            normalized = _round12(result.girth / (ctx.group_size_log2() / math.log2(2 * req.k - 1)))
        return GirthResponse(
            group=req.group,
            param=req.param,
            k=req.k,
            seed=req.seed,
            max_girth=req.max_girth,
            girth=result.girth,
            witness=words.format_word(result.witness) if result.is_exact else "",
            lower_bound=result.lower_bound,
            normalized=normalized,
            power_upper_bound=power_upper_bound(gt),
            elements_stored=result.elements_stored,
            depth_reached=result.depth_reached,
        )
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class ExperimentRequest(BaseModel):
    group: Family
    param: int
    k: int = 2
    trials: int = Field(default=1000, ge=1)
    seed: int = 0
    max_girth: int = DEFAULT_MAX_GIRTH
    threads: int = 1
    memory_limit: int = DEFAULT_MEMORY_LIMIT


@app.post("/experiment")
def experiment_endpoint(req: ExperimentRequest) -> dict:
    try:
        cfg = ExperimentConfig(
            family=req.group,
            param=req.param,
            k=req.k,
            trials=req.trials,
            seed=req.seed,
            max_girth=req.max_girth,
            threads=req.threads,
            memory_limit=req.memory_limit,
        )
        return run_girth_experiment(cfg).to_json_dict()
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class WordProbRequest(BaseModel):
    group: Family
    param: int
    word: str
    trials: int = Field(default=10000, ge=1)
    seed: int = 0


class WordProbResponse(BaseModel):
    group: str
    param: int
    word: str
    trials: int
    seed: int
    estimate: float
    ci_low: float
    ci_high: float
    hits: int


@app.post("/wordprob", response_model=WordProbResponse)
def wordprob_endpoint(req: WordProbRequest) -> WordProbResponse:
    try:
        ctx = make_context(req.group, req.param)
        word = words.parse_word(req.word)
        est = estimate_word_prob(ctx, word, req.trials, random.Random(req.seed))
        return WordProbResponse(
            group=req.group,
            param=req.param,
            word=words.format_word(word),
            trials=req.trials,
            seed=req.seed,
            estimate=_round12(est.estimate),
            ci_low=_round12(est.ci_low),
            ci_high=_round12(est.ci_high),
            hits=est.hits,
        )
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class AmoebaRequest(BaseModel):
    word: str
    mode: Literal["fission", "greedy", "population"] = "population"
    active: str = ""
    max_gen: int = 30
    runs: int = Field(default=1000, ge=1)
    seed: int = 0
    population_cap: int = 1 << 22


@app.post("/amoeba")
def amoeba_endpoint(req: AmoebaRequest) -> dict:
    try:
        word = words.parse_word(req.word)
        if not word:
            raise ValueError("genome reduces to the empty word")
        payload = {"word": words.format_word(word), "mode": req.mode, "seed": req.seed}
        if req.mode == "fission":
            active = {abs(words.parse_word(ch)[0]): 1 for ch in req.active}
            activity = {b: active.get(b, 0) for b in {abs(l) for l in word}}
            pair = genetics.fission(word, activity)
            payload.update({
                "active": sorted(req.active),
                "child1": genetics.format_dna(pair.child1, doubled=True),
                "child2": genetics.format_dna(pair.child2, doubled=True),
                "parent_complexity": genetics.complexity(word),
                "child1_complexity": genetics.complexity(pair.child1),
                "child2_complexity": genetics.complexity(pair.child2),
            })
            return payload
        first_free: dict[str, int] = {}
        for run in range(req.runs):
            run_rng = random.Random(mix64(req.seed, run))
            if req.mode == "greedy":
                traj = genetics.greedy_lineage(word, req.max_gen, run_rng)
                gen = next((g for g, (_, chi) in enumerate(traj) if chi <= 0), None)
            else:
                gen = genetics.population_first_free(word, req.max_gen, run_rng, req.population_cap)
            key = "none" if gen is None else str(gen)
            first_free[key] = first_free.get(key, 0) + 1
        payload.update({
            "runs": req.runs,
            "max_gen": req.max_gen,
            "first_free": first_free,
        })
        return payload
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class BoundsRequest(BaseModel):
    kind: Literal["moore", "sn", "pgl", "p1", "wn", "union-pgl", "union-sn"]
    degree: Optional[int] = None
    size: Optional[int] = None
    n: Optional[int] = None
    p: Optional[int] = None
    length: Optional[int] = None
    height: Optional[int] = None


@app.post("/bounds")
def bounds_endpoint(req: BoundsRequest) -> dict:
    def need(**kwargs):
        for name, value in kwargs.items():
            if value is None:
                raise ValueError(f"kind {req.kind} needs {name}")

    try:
        if req.kind == "moore":
            need(degree=req.degree, size=req.size)
            value = moore_bound(req.degree, req.size)
        elif req.kind == "sn":
            need(n=req.n, length=req.length)
            value = _round12(sn_word_prob_bound(req.n, req.length))
        elif req.kind == "pgl":
            need(p=req.p, length=req.length)
            value = _round12(pgl_word_prob_bound(req.p, req.length))
        elif req.kind == "p1":
            need(n=req.n, length=req.length)
            value = _round12(p1_bound(req.n, req.length))
        elif req.kind == "wn":
            need(height=req.height, length=req.length)
            value = _round12(wn_word_prob_bound(req.height, req.length))
        elif req.kind == "union-pgl":
            need(degree=req.degree, p=req.p)
            value = union_bound_threshold(req.degree, req.p, "pgl")
        else:
            need(degree=req.degree, n=req.n)
            value = union_bound_threshold(req.degree, req.n, "sn")
        return {"kind": req.kind, "value": value}
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class LawRequest(BaseModel):
    group: Family
    param: int
    k: int = 2
    max_length: int = 12
    node_cap: int = 20_000_000


@app.post("/law")
def law_endpoint(req: LawRequest) -> dict:
    try:
        ctx = make_context(req.group, req.param)
        result = shortest_law(ctx, req.k, req.max_length, req.node_cap)
        return {
            "group": req.group,
            "param": req.param,
            "k": req.k,
            "max_length": req.max_length,
            "length": result.length,
            "word": words.format_word(result.word) if result.is_exact else "",
            "lower_bound": result.lower_bound,
            "nodes_visited": result.nodes_visited,
        }
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class PingPongRequest(BaseModel):
    exponent_pairs: list[tuple[int, int]]


@app.post("/law/ping-pong")
def ping_pong_endpoint(req: PingPongRequest) -> dict:
    try:
        return {
            "exponent_pairs": req.exponent_pairs,
            "valid": verify_ping_pong_form(req.exponent_pairs),
        }
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class Monomial(BaseModel):
    coeff: int
    exponents: list[int]


class ZerosRequest(BaseModel):
    m: int = 3
    p: int
    monomials: Optional[list[Monomial]] = None
    split: Optional[list[int]] = None


@app.post("/zeros")
def zeros_endpoint(req: ZerosRequest) -> dict:
    try:
        if (req.monomials is None) == (req.split is None):
            raise ValueError("give exactly one of monomials or split")
        if req.split is not None:
            poly = split_product_poly(req.p, [c % req.p for c in req.split], req.m)
        else:
            poly = HomogeneousPoly(
                req.m, req.p,
                tuple((mono.coeff, tuple(mono.exponents)) for mono in req.monomials),
            )
        res = count_projective_zeros(poly)
        return {
            "m": poly.m,
            "p": poly.p,
            "degree": poly.degree,
            "zeros": res.zeros,
            "bound": res.bound,
            "within_bound": res.within_bound,
            "attains_bound": res.attains_bound,
        }
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


class OrderStatsRequest(BaseModel):
    height: int
    trials: int = Field(default=1000, ge=1)
    seed: int = 0


@app.post("/order-stats")
def order_stats_endpoint(req: OrderStatsRequest) -> dict:
    try:
        stats = wn_order_experiment(req.height, req.trials, random.Random(req.seed))
        return {
            "height": stats.height,
            "trials": stats.trials,
            "seed": req.seed,
            "alpha_hat": _round12(stats.alpha_hat),
            "log2_order_counts": {str(k): v for k, v in stats.log2_order_counts.items()},
        }
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}
