"""HTTP service wrapping the harness.

Intended for interactive or multi-client use; batch runs go through the
CLI, which binds to the harness directly. Every response echoes the fully
resolved configuration next to the results, mirroring the CLI output.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, dataio
from .errors import SegvoteError
from .harness import (
    RuleSpec,
    dictionary_size_sweep,
    estimate_misclassification,
    rate_slope,
    theorem_regime_report,
)
from .models import ModelAParams, ModelBParams, ModelCParams

app = FastAPI(title="segvote", version=__version__)


class ModelA(BaseModel):
    model: Literal["a"] = "a"
    d: int
    rho: float
    M: int = 1


class ModelB(BaseModel):
    model: Literal["b"] = "b"
    d: int
    l: int
    p: float
    amp: float = Field(description="Perturbation amplitude")
    K: int = 2
    M: int = 1
    nu: int = 1


class ModelC(BaseModel):
    model: Literal["c"] = "c"
    d: int
    l: int
    p: float
    a: float = Field(description="Amplitude floor")
    amplitude_law: Literal["uniform", "shifted_exponential"] = "uniform"
    M: int = 1


AnyModel = Union[ModelA, ModelB, ModelC]


class Rule(BaseModel):
    kind: Literal["euclidean", "coordinate", "segmented"]
    c: Optional[int] = None
    k: int = 1


class SimulateRequest(BaseModel):
    model_params: AnyModel = Field(discriminator="model")
    rule: Rule
    trials: int = 1000
    seed: int = 0
    threads: int = 1


class RateRequest(BaseModel):
    rho: float
    rule: Rule
    d_grid: list[int]
    trials: int = 200000
    seed: int = 0
    threads: int = 1


class RegimesRequest(BaseModel):
    model_params: Union[ModelB, ModelC] = Field(discriminator="model")
    trials: int = 1000
    seed: int = 0
    threads: int = 1
    near_chance_margin: float = 0.10
    near_zero_threshold: float = 0.05


class NuSweepRequest(BaseModel):
    model_params: ModelB
    nu_grid: list[int] = [1, 2, 4, 8]
    trials: int = 500
    seed: int = 0
    threads: int = 1


class ResultEnvelope(BaseModel):
    config: dict
    results: dict


def _to_params(spec: AnyModel, seed: int):
    if isinstance(spec, ModelA):
        return ModelAParams(d=spec.d, rho=spec.rho, M=spec.M, seed=seed)
    if isinstance(spec, ModelB):
        return ModelBParams(d=spec.d, l=spec.l, p=spec.p, N=spec.amp, K=spec.K,
                            M=max(spec.M, spec.nu), nu=spec.nu, seed=seed)
    return ModelCParams(d=spec.d, l=spec.l, p=spec.p, a=spec.a,
                        amplitude_law=spec.amplitude_law, M=spec.M, seed=seed)


def _to_rule(rule: Rule) -> RuleSpec:
    return RuleSpec(rule.kind, c=rule.c if rule.kind == "segmented" else None, k=rule.k)


def _run(config: dict, fn) -> ResultEnvelope:
    try:
        result = fn()
    except SegvoteError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return ResultEnvelope(config=config, results=dataio.results_to_dict(result))


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=ResultEnvelope)
def simulate(req: SimulateRequest) -> ResultEnvelope:
    config = req.model_dump() | {"endpoint": "simulate"}
    return _run(config, lambda: estimate_misclassification(
        _to_params(req.model_params, req.seed), _to_rule(req.rule),
        req.trials, req.seed, threads=req.threads))


@app.post("/rate", response_model=ResultEnvelope)
def rate(req: RateRequest) -> ResultEnvelope:
    config = req.model_dump() | {"endpoint": "rate"}
    return _run(config, lambda: rate_slope(
        ModelAParams(d=req.d_grid[0] if req.d_grid else 1, rho=req.rho, seed=req.seed),
        _to_rule(req.rule), req.d_grid, req.trials, req.seed, threads=req.threads))


@app.post("/regimes", response_model=ResultEnvelope)
def regimes(req: RegimesRequest) -> ResultEnvelope:
    config = req.model_dump() | {"endpoint": "regimes"}
    return _run(config, lambda: theorem_regime_report(
        _to_params(req.model_params, req.seed), req.trials, req.seed, threads=req.threads,
        near_chance_margin=req.near_chance_margin,
        near_zero_threshold=req.near_zero_threshold))


@app.post("/sweep-nu", response_model=ResultEnvelope)
def sweep_nu(req: NuSweepRequest) -> ResultEnvelope:
    config = req.model_dump() | {"endpoint": "sweep-nu"}

    def go():
        params = _to_params(req.model_params, req.seed)
        rules = {
            "euclidean": RuleSpec("euclidean"),
            "coordinate": RuleSpec("coordinate"),
            "segmented": RuleSpec("segmented", c=params.d // params.l),
        }
        return dictionary_size_sweep(
            params, req.nu_grid, rules, req.trials, req.seed, threads=req.threads)

    return _run(config, go)
