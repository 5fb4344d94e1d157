"""
Nonlinear conjugate gradient and the minibatch training schedule.

cg_minimize runs Polak-Ribiere+ directions with an Armijo backtracking line
search (plus step expansion and one quadratic-interpolation refinement).
train visits minibatches, freezes the corruption/activation noise for each
visit and runs a few CG iterations on that batch.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from npga.core.objective import NpgaObjective, ParamVector
from npga.data.dataset import Dataset, TargetEncoder, slice_targets
from npga.errors import InvalidInputError
from npga.models import CgOptions, ModelConfig, OptimizerConfig

logger = logging.getLogger(__name__)

CostGradFn = Callable[[np.ndarray], Tuple[float, np.ndarray]]


@dataclass
class CgResult:
    x: Union[np.ndarray, ParamVector]
    trace: List[float]  # initial cost, then the cost after every accepted step
    iterations: int = 0
    degraded: bool = False
    converged: bool = False


@dataclass
class _LineSearchResult:
    accepted: bool
    step: float = 0.0
    x: Optional[np.ndarray] = None
    f: float = np.inf
    g: Optional[np.ndarray] = None


def _armijo(f0: float, slope: float, t: float, ft: float, c: float) -> bool:
    return np.isfinite(ft) and ft <= f0 + c * t * slope


def _line_search(fn: CostGradFn, x: np.ndarray, f0: float, slope: float, d: np.ndarray, t0: float, options: CgOptions) -> _LineSearchResult:
    c = options.sufficient_decrease
    t = t0
    for shrinks in range(options.max_shrinks + 1):
        ft, gt = fn(x + t * d)
        if _armijo(f0, slope, t, ft, c):
            break
        t *= options.shrink
    else:
        return _LineSearchResult(accepted=False)

    best = _LineSearchResult(True, t, x + t * d, ft, gt)
    if shrinks == 0:
        for _ in range(options.max_expansions):
            t2 = 2.0 * best.step
            f2, g2 = fn(x + t2 * d)
            if not (_armijo(f0, slope, t2, f2, c) and f2 < best.f):
                break
            best = _LineSearchResult(True, t2, x + t2 * d, f2, g2)

    # minimizer of the quadratic through f0, slope and the accepted point
    t = best.step
    curvature = best.f - f0 - slope * t
    if curvature > 0:
        tq = -slope * t * t / (2.0 * curvature)
        if np.isfinite(tq) and tq > 0 and abs(tq - t) > 1e-12 * t:
            fq, gq = fn(x + tq * d)
            if _armijo(f0, slope, tq, fq, c) and fq < best.f:
                best = _LineSearchResult(True, tq, x + tq * d, fq, gq)
    return best


def cg_minimize(cost_grad_fn: CostGradFn, initial: Union[np.ndarray, ParamVector], options: CgOptions) -> CgResult:
    """
    Minimize cost_grad_fn from `initial`.

    Stops after max_iters iterations, when the gradient norm drops to
    gradient_tolerance, or when the line search finds no acceptable step
    along steepest descent (degraded=True). The cost trace never increases.
    """
    layout = initial.layout if isinstance(initial, ParamVector) else None
    x = np.array(initial.values if layout is not None else initial, dtype=np.float64, copy=True)

    def wrap(v: np.ndarray) -> Union[np.ndarray, ParamVector]:
        return ParamVector(v, layout) if layout is not None else v

    if options.max_iters == 0:
        f, _ = cost_grad_fn(x)
        return CgResult(x=wrap(x), trace=[float(f)])

    f, g = cost_grad_fn(x)
    trace = [float(f)]
    d = -g
    since_restart = 0
    prev_step = None
    prev_slope = None
    result = CgResult(x=None, trace=trace)

    for it in range(options.max_iters):
        if np.linalg.norm(g) <= options.gradient_tolerance:
            result.converged = True
            break
        slope = float(g @ d)
        steepest = since_restart == 0
        if slope >= 0:
            d, slope, steepest, since_restart = -g, -float(g @ g), True, 0

        if prev_step is None:
            t0 = options.initial_step / max(1.0, float(np.linalg.norm(d)))
        else:
            t0 = prev_step * prev_slope / slope
            if not np.isfinite(t0) or t0 <= 0:
                t0 = options.initial_step / max(1.0, float(np.linalg.norm(d)))

        ls = _line_search(cost_grad_fn, x, f, slope, d, t0, options)
        if not ls.accepted and not steepest:
            logger.debug("Line search failed along CG direction, retrying steepest descent")
            d, slope, since_restart = -g, -float(g @ g), 0
            t0 = options.initial_step / max(1.0, float(np.linalg.norm(d)))
            ls = _line_search(cost_grad_fn, x, f, slope, d, t0, options)
        if not ls.accepted:
            logger.warning(f"CG line search failed at iteration {it}; returning current iterate")
            result.degraded = True
            break

        g_new = ls.g
        since_restart += 1
        if since_restart >= options.restart_period:
            beta = 0.0
            since_restart = 0
        else:
            beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        prev_step, prev_slope = ls.step, slope
        x, f, g = ls.x, ls.f, g_new
        d = -g + beta * d
        if beta == 0.0:
            since_restart = 0
        trace.append(float(f))
        result.iterations = it + 1

    result.x = wrap(x)
    return result


@dataclass
class TraceRow:
    epoch: int
    minibatch: int
    iteration: int
    cost: float


@dataclass
class TrainResult:
    params: ParamVector
    trace: List[TraceRow]
    objective: NpgaObjective
    target_encoder: TargetEncoder
    degraded_batches: int = 0
    batch_costs: List[Tuple[float, float]] = field(default_factory=list)  # (before, after) per visit

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.__dict__ for r in self.trace], columns=["epoch", "minibatch", "iteration", "cost"])


def minibatches(num_examples: int, size: int, rng: np.random.Generator) -> List[np.ndarray]:
    order = rng.permutation(num_examples)
    return [order[i : i + size] for i in range(0, num_examples, size)]


def train(
    dataset: Dataset,
    config: ModelConfig,
    schedule: Optional[OptimizerConfig] = None,
    initial: Optional[ParamVector] = None,
    target_encoder: Optional[TargetEncoder] = None,
) -> TrainResult:
    """
    Train an NPGA on `dataset` with the minibatch CG schedule.

    Noise is drawn once per minibatch visit; minibatch_size >= N gives
    full-batch training. initial=None draws fresh parameters from the seed.
    """
    schedule = schedule or OptimizerConfig()
    if dataset.num_examples < 1:
        raise InvalidInputError("cannot train on an empty dataset")
    rng = np.random.default_rng(config.seed)
    objective = NpgaObjective(config, dataset.input_dim, dataset.label_kinds, dataset.label_dims)
    encoder = target_encoder or TargetEncoder().fit(dataset)
    targets = encoder.encode(dataset)
    params = objective.initial_params(rng, np.random.default_rng([config.seed, 1])) if initial is None else initial.copy()
    if params.layout != objective.layout:
        raise InvalidInputError("initial parameters do not match the model layout")
    cg_options = schedule.cg_options()

    trace: List[TraceRow] = []
    batch_costs = []
    degraded = 0
    for epoch in range(schedule.epochs):
        for b, idx in enumerate(minibatches(dataset.num_examples, schedule.minibatch_size, rng)):
            clean = dataset.features[idx]
            batch_targets = slice_targets(targets, idx)
            noise = objective.draw_noise(clean, params, rng)

            def fn(v: np.ndarray) -> Tuple[float, np.ndarray]:
                breakdown, grad = objective.cost_and_grad(clean, batch_targets, ParamVector(v, objective.layout), noise)
                return breakdown.total, grad.values

            result = cg_minimize(fn, params, cg_options)
            params = result.x
            degraded += int(result.degraded)
            batch_costs.append((result.trace[0], result.trace[-1]))
            for i, cost in enumerate(result.trace[1:], start=1):
                trace.append(TraceRow(epoch, b, i, cost))
            logger.debug(f"epoch {epoch} batch {b}: {result.trace[0]:.6g} -> {result.trace[-1]:.6g}")
        if trace:
            logger.info(f"Epoch {epoch + 1}/{schedule.epochs} done, last cost {trace[-1].cost:.6g}")

    return TrainResult(
        params=params,
        trace=trace,
        objective=objective,
        target_encoder=encoder,
        degraded_batches=degraded,
        batch_costs=batch_costs,
    )
