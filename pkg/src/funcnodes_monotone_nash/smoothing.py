"""Gaussian smoothing of costs and the gradient estimators built on it.

Monte-Carlo estimates draw x ~ N(mu, sigma^2 I) from a generator seeded with
``(seed, stream)``: every estimator has its own stream, so two estimators of
the same query are independent while each stays deterministic.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn
import numpy as np
import pandas as pd

from ._types import GradientMethod
from .errors import CapabilityError, NonFinitePayoffError, UsageError
from .game import (
    GameDefinition,
    as_joint_action,
    batch_cost,
    batch_gradient,
    check_player,
    eval_game_mapping,
)
from .utils import make_rng

SCORE_STREAM = 0
MIXED_STREAM = 1
FINITE_DIFFERENCE_STREAM = 2
COST_STREAM = 3

Z_TOLERANCE = 3.0


@dataclass(frozen=True)
class SmoothedQuery:
    game: GameDefinition
    mu: np.ndarray
    sigma: float
    n_samples: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mu", as_joint_action(self.game, self.mu))
        if not float(self.sigma) > 0:
            raise UsageError(f"sigma must be positive, got {self.sigma}")
        if int(self.n_samples) < 1:
            raise UsageError("n_samples must be at least 1")
        if int(self.seed) < 0:
            raise UsageError("seed must be non-negative")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "n_samples", int(self.n_samples))


@dataclass(frozen=True)
class GradientEstimate:
    value: np.ndarray
    standard_error: np.ndarray
    method: str


@dataclass(frozen=True)
class BiasVarianceReport:
    sigma: float
    q_norm: float
    q_standard_error: float
    r_second_moment: float
    n_samples: int


def _standard_normals(q: SmoothedQuery, stream: int) -> np.ndarray:
    rng = make_rng([int(q.seed), stream])
    return rng.standard_normal((q.n_samples,) + q.game.shape)


def _mean_and_se(samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        return mean, np.full_like(mean, np.inf, dtype=float)
    return mean, samples.std(axis=0, ddof=1) / np.sqrt(n)


def _costs(game: GameDefinition, i: int, xs: np.ndarray) -> np.ndarray:
    values = batch_cost(game, i, xs)
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NonFinitePayoffError(i, xs[k].tolist(), float(values[k]))
    return values


def smoothed_cost(q: SmoothedQuery, i: int) -> Tuple[float, float]:
    """Monte-Carlo value of the mixed-strategy cost of player i and its standard error."""
    i = check_player(q.game, i)
    xs = q.mu + q.sigma * _standard_normals(q, COST_STREAM)
    mean, se = _mean_and_se(_costs(q.game, i, xs))
    return float(mean), float(se)


def score_samples(q: SmoothedQuery, i: int) -> np.ndarray:
    """Per-sample score estimates ``J_i(x) (x^i - mu^i) / sigma^2``, shape ``(n, d)``."""
    i = check_player(q.game, i)
    z = _standard_normals(q, SCORE_STREAM)
    xs = q.mu + q.sigma * z
    # (x^i - mu^i) / sigma^2 = z^i / sigma
    return _costs(q.game, i, xs)[:, None] * z[:, i, :] / q.sigma


def score_gradient(q: SmoothedQuery, i: int) -> GradientEstimate:
    mean, se = _mean_and_se(score_samples(q, i))
    return GradientEstimate(mean, se, GradientMethod.SCORE_MC.value)


def mixed_mapping(q: SmoothedQuery, i: int) -> GradientEstimate:
    """Monte-Carlo expectation of M_i(x) under the gaussian mixed strategies."""
    i = check_player(q.game, i)
    if q.game.analytic_gradient is None:
        raise CapabilityError(f"game {q.game.name!r} has no analytic gradient")
    xs = q.mu + q.sigma * _standard_normals(q, MIXED_STREAM)
    mean, se = _mean_and_se(batch_gradient(q.game, i, xs))
    return GradientEstimate(mean, se, GradientMethod.MIXED_MAPPING_MC.value)


def analytic_smoothed_gradient(q: SmoothedQuery, i: int) -> GradientEstimate:
    i = check_player(q.game, i)
    if q.game.smoothed_gradient is None:
        raise CapabilityError(
            f"game {q.game.name!r} has no closed form of its smoothed gradient"
        )
    value = np.asarray(q.game.smoothed_gradient(i, q.mu, q.sigma), dtype=float).reshape(
        q.game.dim
    )
    return GradientEstimate(value, np.zeros_like(value), GradientMethod.ANALYTIC.value)


def smoothed_finite_difference(
    q: SmoothedQuery, i: int, step: float = 1e-3
) -> GradientEstimate:
    """Central differences of the smoothed cost with common random numbers."""
    i = check_player(q.game, i)
    xs = q.mu + q.sigma * _standard_normals(q, FINITE_DIFFERENCE_STREAM)
    diffs = np.empty((q.n_samples, q.game.dim))
    for k in range(q.game.dim):
        plus, minus = xs.copy(), xs.copy()
        plus[:, i, k] += step
        minus[:, i, k] -= step
        diffs[:, k] = (_costs(q.game, i, plus) - _costs(q.game, i, minus)) / (2 * step)
    mean, se = _mean_and_se(diffs)
    return GradientEstimate(mean, se, GradientMethod.FINITE_DIFFERENCE.value)


def z_scores(first: GradientEstimate, second: GradientEstimate) -> np.ndarray:
    combined = np.sqrt(first.standard_error**2 + second.standard_error**2)
    diff = first.value - second.value
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(combined > 0, np.abs(diff) / combined, np.where(diff == 0, 0.0, np.inf))
    return z


def compare_gradients(q: SmoothedQuery, players: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """Score estimator against every other available gradient route."""
    players = range(q.game.n_players) if players is None else players
    rows = []
    for i in players:
        score = score_gradient(q, i)
        others = [smoothed_finite_difference(q, i)]
        if q.game.smoothed_gradient is not None:
            others.append(analytic_smoothed_gradient(q, i))
        if q.game.analytic_gradient is not None:
            others.append(mixed_mapping(q, i))
        for other in others:
            z = z_scores(score, other)
            for k in range(q.game.dim):
                rows.append(
                    {
                        "player": int(i),
                        "dim": k,
                        "method": other.method,
                        "score": float(score.value[k]),
                        "other": float(other.value[k]),
                        "combined_se": float(
                            np.hypot(score.standard_error[k], other.standard_error[k])
                        ),
                        "z": float(z[k]),
                        "within": bool(z[k] <= Z_TOLERANCE),
                    }
                )
    return pd.DataFrame(rows)


def bias_report(
    game: GameDefinition,
    mu: np.ndarray,
    sigma_list: Sequence[float],
    n_samples: int,
    seed: int = 0,
) -> List[BiasVarianceReport]:
    """Smoothing bias Q = M~(mu) - M(mu) and second moment of the martingale term per sigma.

    All sigmas share the same seed, so the estimates use common random numbers.
    """
    mu = as_joint_action(game, mu)
    mapping = eval_game_mapping(game, mu)
    reports = []
    for s in sigma_list:
        q = SmoothedQuery(game, mu, float(s), n_samples, seed)
        mixed = [mixed_mapping(q, i) for i in range(game.n_players)]
        bias = np.concatenate([m.value for m in mixed]) - mapping
        bias_se = np.concatenate([m.standard_error for m in mixed])
        second_moment = 0.0
        for i in range(game.n_players):
            f = score_samples(q, i)
            second_moment += float(np.mean(np.sum((f - f.mean(axis=0)) ** 2, axis=1)))
        reports.append(
            BiasVarianceReport(
                sigma=float(s),
                q_norm=float(np.linalg.norm(bias)),
                q_standard_error=float(np.linalg.norm(bias_se)),
                r_second_moment=second_moment,
                n_samples=int(n_samples),
            )
        )
    return reports


def bias_slope(reports: Sequence[BiasVarianceReport]) -> float:
    """Slope of log q_norm against log sigma."""
    sig = np.log([r.sigma for r in reports])
    q = np.array([r.q_norm for r in reports])
    if np.any(q <= 0):
        raise UsageError("bias slope is undefined when a measured bias is zero")
    return float(np.polyfit(sig, np.log(q), 1)[0])


def reports_to_frame(reports: Sequence[BiasVarianceReport]) -> pd.DataFrame:
    return pd.DataFrame([r.__dict__ for r in reports])


exf_types.add_type("monotone_nash.SmoothedQuery", SmoothedQuery)
exf_types.add_type("monotone_nash.GradientEstimate", GradientEstimate)


@fn.NodeDecorator(
    node_id="mnash.smooth.cost",
    name="Smoothed Cost",
    description="Monte-Carlo cost of a player in gaussian mixed strategies.",
    outputs=[
        {"name": "value", "type": float},
        {"name": "standard_error", "type": float},
    ],
)
def smooth_cost(
    game: GameDefinition,
    mu: np.ndarray,
    player: int = 0,
    sigma: float = 0.2,
    n_samples: int = 100_000,
    seed: int = 0,
) -> Tuple[float, float]:
    return smoothed_cost(SmoothedQuery(game, mu, sigma, n_samples, seed), player)


@fn.NodeDecorator(
    node_id="mnash.smooth.gradient",
    name="Smoothed Gradient",
    description="Gradient of the smoothed cost of a player by the chosen route.",
    outputs=[
        {"name": "value", "type": np.ndarray},
        {"name": "standard_error", "type": np.ndarray},
    ],
)
def smooth_gradient(
    game: GameDefinition,
    mu: np.ndarray,
    player: int = 0,
    sigma: float = 0.2,
    n_samples: int = 100_000,
    seed: int = 0,
    method: GradientMethod = GradientMethod.SCORE_MC,
) -> Tuple[np.ndarray, np.ndarray]:
    q = SmoothedQuery(game, mu, sigma, n_samples, seed)
    estimator = {
        GradientMethod.SCORE_MC.value: score_gradient,
        GradientMethod.MIXED_MAPPING_MC.value: mixed_mapping,
        GradientMethod.FINITE_DIFFERENCE.value: smoothed_finite_difference,
        GradientMethod.ANALYTIC.value: analytic_smoothed_gradient,
    }[GradientMethod.v(method)]
    est = estimator(q, player)
    return est.value, est.standard_error


@fn.NodeDecorator(
    node_id="mnash.smooth.compare",
    name="Compare Gradients",
    description="Score-function gradient against the other estimators, with z-scores.",
    outputs=[
        {"name": "comparison", "type": pd.DataFrame},
        {"name": "all_within", "type": bool},
    ],
)
def smooth_compare(
    game: GameDefinition,
    mu: np.ndarray,
    sigma: float = 0.2,
    n_samples: int = 100_000,
    seed: int = 0,
) -> Tuple[pd.DataFrame, bool]:
    df = compare_gradients(SmoothedQuery(game, mu, sigma, n_samples, seed))
    return df, bool(df["within"].all())


@fn.NodeDecorator(
    node_id="mnash.smooth.bias_report",
    name="Bias Report",
    description="Smoothing bias and martingale second moment for several sigmas.",
    outputs=[{"name": "report", "type": pd.DataFrame}],
)
def smooth_bias_report(
    game: GameDefinition,
    mu: np.ndarray,
    sigmas: List[float],
    n_samples: int = 100_000,
    seed: int = 0,
) -> pd.DataFrame:
    return reports_to_frame(bias_report(game, mu, sigmas, n_samples, seed))


SMOOTHING_SHELF = fn.Shelf(
    nodes=[smooth_cost, smooth_gradient, smooth_compare, smooth_bias_report],
    name="Smoothing",
    description="Gaussian smoothing oracle and gradient estimators",
    subshelves=[],
)
