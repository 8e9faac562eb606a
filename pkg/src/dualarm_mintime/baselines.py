"""Reference zeroth-order optimizers sharing the diffusion solver's interface.

Both baselines search the same latent unit box, call the same penalized
objective (with a fixed penalty weight, isolating the adaptive-weight
mechanism as an ablation axis), consume exactly population * iterations
evaluations, and emit the same RunTrace format, so head-to-head budget and
cost comparisons are exact.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .diffusion import RunTrace, StepRecord, make_rng
from .objective import Evaluation

BASELINE_METHODS = ("cem", "random_search")

_STD_COLLAPSE_FLOOR = 1e-6


@dataclass(frozen=True)
class BaselineConfig:
    """Population-based search parameters.

    fixed_lambda is the constant penalty weight both baselines use in place
    of the adaptive schedule.
    """

    method: str = "random_search"
    population: int = 512
    elite_fraction: float = 0.1
    iterations: int = 100
    initial_std: float = 0.5
    seed: int = 0
    fixed_lambda: float = 10.0

    def __post_init__(self):
        if self.method not in BASELINE_METHODS:
            raise ValueError(f"method must be one of {BASELINE_METHODS}, got {self.method!r}")
        if self.population < 2:
            raise ValueError(f"population must be >= 2, got {self.population}")
        if not 0.0 < self.elite_fraction <= 1.0:
            raise ValueError(f"elite_fraction must lie in (0, 1], got {self.elite_fraction}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.initial_std <= 0:
            raise ValueError(f"initial_std must be positive, got {self.initial_std}")
        if self.fixed_lambda < 0:
            raise ValueError(f"fixed_lambda must be >= 0, got {self.fixed_lambda}")

    @property
    def elite_count(self) -> int:
        return max(1, math.ceil(self.elite_fraction * self.population))

    @property
    def sample_budget(self) -> int:
        return self.population * self.iterations


def _scalar_eval(e: Evaluation, idx: int) -> Evaluation:
    return Evaluation(
        V=float(e.V[idx]), E=float(e.E[idx]), R=float(e.R[idx]), feasible=bool(e.feasible[idx])
    )


def run_random_search(objective, cfg: BaselineConfig) -> tuple:
    """Uniform i.i.d. search over the latent box; best-so-far by R."""
    rng = make_rng(cfg.seed)
    lam = cfg.fixed_lambda
    started = time.perf_counter()
    best_y = None
    best = None
    evals = 0
    steps = []
    for it in range(1, cfg.iterations + 1):
        batch = rng.uniform(-1.0, 1.0, size=(cfg.population, objective.dim))
        ev = objective.evaluate_latent(batch, lam)
        evals += cfg.population
        idx = int(np.argmin(ev.R))
        if best is None or ev.R[idx] < best.R:
            best = _scalar_eval(ev, idx)
            best_y = batch[idx].copy()
        steps.append(
            StepRecord(
                t=it,
                lam=lam,
                best_R=float(np.min(ev.R)),
                mean_R=float(np.mean(ev.R)),
                V=best.V,
                E=best.E,
                wall_ms=(time.perf_counter() - started) * 1e3,
                evals=evals,
            )
        )
    theta_star = objective.theta_of(best_y)
    trace = RunTrace(
        steps=steps,
        theta_star=theta_star,
        y_star=best_y,
        final=best,
        meta={
            "method": "random_search",
            "seed": cfg.seed,
            "population": cfg.population,
            "iterations": cfg.iterations,
            "fixed_lambda": lam,
            "sample_budget": cfg.sample_budget,
            "samples_used": evals,
        },
    )
    return theta_star, trace


def run_cem(objective, cfg: BaselineConfig) -> tuple:
    """Cross-entropy method: iterated Gaussian refit to the elite set.

    Samples are clipped to the unit box before evaluation; the per-dimension
    std never drops below a small floor so the search cannot collapse.
    Returns the best candidate ever evaluated.
    """
    rng = make_rng(cfg.seed)
    lam = cfg.fixed_lambda
    started = time.perf_counter()
    mean = np.zeros(objective.dim)
    std = np.full(objective.dim, cfg.initial_std)
    best_y = None
    best = None
    evals = 0
    steps = []
    for it in range(1, cfg.iterations + 1):
        batch = rng.normal(loc=mean, scale=std, size=(cfg.population, objective.dim))
        np.clip(batch, -1.0, 1.0, out=batch)
        ev = objective.evaluate_latent(batch, lam)
        evals += cfg.population
        order = np.argsort(ev.R, kind="stable")
        elites = batch[order[: cfg.elite_count]]
        mean = elites.mean(axis=0)
        std = np.maximum(elites.std(axis=0), _STD_COLLAPSE_FLOOR)
        idx = int(order[0])
        if best is None or ev.R[idx] < best.R:
            best = _scalar_eval(ev, idx)
            best_y = batch[idx].copy()
        steps.append(
            StepRecord(
                t=it,
                lam=lam,
                best_R=float(np.min(ev.R)),
                mean_R=float(np.mean(ev.R)),
                V=best.V,
                E=best.E,
                wall_ms=(time.perf_counter() - started) * 1e3,
                evals=evals,
            )
        )
    theta_star = objective.theta_of(best_y)
    trace = RunTrace(
        steps=steps,
        theta_star=theta_star,
        y_star=best_y,
        final=best,
        meta={
            "method": "cem",
            "seed": cfg.seed,
            "population": cfg.population,
            "iterations": cfg.iterations,
            "elite_fraction": cfg.elite_fraction,
            "elite_count": cfg.elite_count,
            "initial_std": cfg.initial_std,
            "fixed_lambda": lam,
            "sample_budget": cfg.sample_budget,
            "samples_used": evals,
            "final_mean_latent": np.clip(mean, -1.0, 1.0).tolist(),
        },
    )
    return theta_star, trace
