"""Sampling-based reverse diffusion over the latent coefficient box.

The solver maintains a latent iterate y and walks the step index t from
n_steps down to 1. Each step draws a Gaussian batch around y scaled by the
noise schedule, clips it to the unit box, scores the batch with the
penalized objective, turns scores into softmax weights, and contracts y
toward the weighted batch mean through the score-function update. The
penalty weight adapts once per step from the post-update iterate's error.

No learned networks anywhere: the score is estimated from objective
evaluations of the sampled candidates.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .objective import Evaluation, update_penalty

SCHEDULE_KINDS = ("linear_beta", "cosine")

# Batches whose score spread falls below this are weighted uniformly; the
# softmax normalization divides by std * temperature and would blow up.
_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Reverse-diffusion solver parameters.

    n_steps: number of reverse steps (t runs n_steps..1).
    n_samples: batch size per step, >= 2.
    temperature: softmax sharpness in (0, 1); smaller concentrates weight
        on the best samples.
    seed: seeds the counter-based generator; equal seeds give equal runs.
    schedule_kind: "linear_beta" (betas linearly spaced, larger t noisier)
        or "cosine" (squared-cosine alpha-bar profile).
    """

    n_steps: int = 100
    n_samples: int = 512
    temperature: float = 0.1
    seed: int = 0
    schedule_kind: str = "linear_beta"
    beta_min: float = 1e-4
    beta_max: float = 0.02
    cosine_offset: float = 0.008

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")
        if not 0.0 < self.temperature < 1.0:
            raise ValueError(f"temperature must lie in (0, 1), got {self.temperature}")
        if self.schedule_kind not in SCHEDULE_KINDS:
            raise ValueError(f"schedule_kind must be one of {SCHEDULE_KINDS}")
        if not 0.0 < self.beta_min <= self.beta_max < 1.0:
            raise ValueError(
                f"betas must satisfy 0 < beta_min <= beta_max < 1, got ({self.beta_min}, {self.beta_max})"
            )


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step alpha factors and their running product.

    alphas[t-1] is alpha_t for t = 1..n_steps; alpha_bars[t] is the product
    of the first t alphas with alpha_bars[0] = 1. alpha_bar is strictly
    decreasing and positive.
    """

    alphas: np.ndarray
    alpha_bars: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        bars = np.asarray(self.alpha_bars, dtype=float)
        if alphas.ndim != 1 or bars.shape != (alphas.shape[0] + 1,):
            raise ValueError("alpha_bars must have one more entry than alphas")
        if np.any((alphas <= 0) | (alphas >= 1)):
            raise ValueError("all alphas must lie strictly in (0, 1)")
        if bars[0] != 1.0:
            raise ValueError("alpha_bars[0] must be exactly 1")
        if np.any(bars <= 0) or np.any(np.diff(bars) >= 0):
            raise ValueError("alpha_bars must be positive and strictly decreasing")
        alphas.setflags(write=False)
        bars.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", bars)

    @property
    def n_steps(self) -> int:
        return self.alphas.shape[0]

    def alpha(self, t: int) -> float:
        return float(self.alphas[t - 1])

    def alpha_bar(self, t: int) -> float:
        return float(self.alpha_bars[t])


def build_schedule(cfg: SolverConfig) -> NoiseSchedule:
    """Noise schedule for the configured kind and step count."""
    if cfg.schedule_kind == "linear_beta":
        betas = np.linspace(cfg.beta_min, cfg.beta_max, cfg.n_steps)
        alphas = 1.0 - betas
    else:
        offset = cfg.cosine_offset
        grid = np.arange(cfg.n_steps + 1) / cfg.n_steps
        f = np.cos((grid + offset) / (1.0 + offset) * (np.pi / 2)) ** 2
        bars_target = f / f[0]
        alphas = bars_target[1:] / bars_target[:-1]
        # Keep every step strictly noisy and valid even at large n_steps.
        alphas = np.clip(alphas, 1e-4, 1.0 - 1e-6)
    bars = np.empty(cfg.n_steps + 1)
    bars[0] = 1.0
    bars[1:] = np.cumprod(alphas)
    return NoiseSchedule(alphas=alphas, alpha_bars=bars)


@dataclass
class DiffusionState:
    """Mutable loop state: latent iterate, step index, penalty weight, rng."""

    y: np.ndarray
    t: int
    lam: float
    rng: np.random.Generator


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox); streams don't depend on draw layout."""
    return np.random.Generator(np.random.Philox(seed))


def sample_batch(state: DiffusionState, schedule: NoiseSchedule, n_samples: int) -> np.ndarray:
    """Gaussian batch around the scaled iterate, clipped to the unit box.

    Mean is y_t / sqrt(alpha_bar_{t-1}) and the isotropic variance is
    1/alpha_bar_{t-1} - 1, so the final step (t=1) collapses to exact
    replicas of the clipped iterate. Advances the state's rng.
    """
    if state.t < 1:
        raise ValueError(f"step index must be >= 1, got {state.t}")
    bar_prev = schedule.alpha_bar(state.t - 1)
    mean = state.y / np.sqrt(bar_prev)
    std = np.sqrt(1.0 / bar_prev - 1.0)
    draws = state.rng.normal(loc=mean, scale=std, size=(n_samples, state.y.shape[0]))
    return np.clip(draws, -1.0, 1.0)


def softmax_weights(scores: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized softmax weights of batch scores (higher score, more weight).

    Scores are standardized to (s - mean) / (std * temperature) first, so
    weights are invariant to shifting all scores; a batch with (numerically)
    equal scores gets uniform weights. Callers pass the negated cost.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or scores.shape[0] < 2:
        raise ValueError(f"need a 1-d batch of >= 2 scores, got shape {scores.shape}")
    std = float(scores.std())
    if std < _STD_FLOOR:
        return np.full(scores.shape[0], 1.0 / scores.shape[0])
    z = (scores - scores.mean()) / (std * temperature)
    z -= z.max()  # harmless shift; keeps exp in range for tiny temperatures
    w = np.exp(z)
    return w / w.sum()


def reverse_update(y: np.ndarray, y_weighted: np.ndarray, schedule: NoiseSchedule, t: int) -> np.ndarray:
    """One reverse step: score estimate from the weighted mean, then update.

    Composes s_t = (-y + sqrt(alpha_bar_t) y_weighted) / (1 - alpha_bar_t)
    with y' = (y + (1 - alpha_bar_t) s_t) / sqrt(alpha_t); algebraically
    y' = sqrt(alpha_bar_{t-1}) * y_weighted.
    """
    bar_t = schedule.alpha_bar(t)
    if bar_t >= 1.0:
        raise ValueError(f"alpha_bar at t={t} must be < 1, schedule is degenerate")
    score = (-y + np.sqrt(bar_t) * y_weighted) / (1.0 - bar_t)
    return (y + (1.0 - bar_t) * score) / np.sqrt(schedule.alpha(t))


@dataclass
class StepRecord:
    """One solver step: penalty weight used, batch stats, iterate quality."""

    t: int
    lam: float
    best_R: float
    mean_R: float
    V: float
    E: float
    wall_ms: float  # measured, cumulative since run start
    evals: int  # cumulative objective evaluations (deterministic cost clock)


@dataclass
class RunTrace:
    """Full record of one optimization run."""

    steps: list
    theta_star: np.ndarray
    y_star: np.ndarray
    final: Evaluation
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.steps])


def solve(objective, cfg: SolverConfig) -> tuple:
    """Run the full reverse-diffusion loop; returns (theta_star, RunTrace).

    `objective` provides dim, epsilon, config, theta_of(y) and
    evaluate_latent(y, lam) (see TrajectoryObjective); only evaluations of
    sampled candidates drive the updates. Deterministic for a fixed seed.
    """
    schedule = build_schedule(cfg)
    rng = make_rng(cfg.seed)
    obj_cfg = objective.config
    state = DiffusionState(
        y=rng.normal(size=objective.dim),
        t=cfg.n_steps,
        lam=obj_cfg.lambda0,
        rng=rng,
    )
    started = time.perf_counter()
    evals = 0
    steps = []
    while state.t >= 1:
        batch = sample_batch(state, schedule, cfg.n_samples)
        batch_eval = objective.evaluate_latent(batch, state.lam)
        evals += cfg.n_samples
        weights = softmax_weights(-batch_eval.R, cfg.temperature)
        y_weighted = weights @ batch
        state.y = reverse_update(state.y, y_weighted, schedule, state.t)
        # The raw iterate propagates; the clipped copy is what gets
        # evaluated, traced, and eventually returned (it lives in the box,
        # so its trajectory inherits the joint-limit guarantee).
        y_clipped = np.clip(state.y, -1.0, 1.0)
        iterate_eval = objective.evaluate_latent(y_clipped, state.lam)
        evals += 1
        lam_used = state.lam
        state.lam = update_penalty(state.lam, iterate_eval.E, obj_cfg)
        steps.append(
            StepRecord(
                t=state.t,
                lam=lam_used,
                best_R=float(np.min(batch_eval.R)),
                mean_R=float(np.mean(batch_eval.R)),
                V=float(iterate_eval.V),
                E=float(iterate_eval.E),
                wall_ms=(time.perf_counter() - started) * 1e3,
                evals=evals,
            )
        )
        state.t -= 1
    y_star = np.clip(state.y, -1.0, 1.0)
    theta_star = objective.theta_of(y_star)
    final_eval = objective.evaluate_latent(y_star, state.lam)
    trace = RunTrace(
        steps=steps,
        theta_star=theta_star,
        y_star=y_star,
        final=Evaluation(
            V=float(final_eval.V),
            E=float(final_eval.E),
            R=float(final_eval.R),
            feasible=bool(final_eval.feasible),
        ),
        meta={
            "method": "mbd",
            "seed": cfg.seed,
            "n_steps": cfg.n_steps,
            "n_samples": cfg.n_samples,
            "temperature": cfg.temperature,
            "schedule_kind": cfg.schedule_kind,
            "penalty_sign": obj_cfg.penalty_sign,
            "final_lambda": state.lam,
            "sample_budget": cfg.n_steps * cfg.n_samples,
            "extra_evals": cfg.n_steps + 1,
        },
    )
    return theta_star, trace
