"""Payoff-based regularized learning of Nash equilibria.

Every player samples its action from a gaussian around its mean, observes
only its own cost at the joint sample and moves its mean along the sampled
score ``J_i(x) (x^i - mu^i) / sigma^2`` plus the Tikhonov term ``eps mu^i``,
followed by a projection onto its action set.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn
import numpy as np
import pandas as pd

from .errors import NonFinitePayoffError, UsageError
from .game import BoxSet, GameDefinition, as_joint_action
from .schedules import (
    ScheduleExponents,
    ScheduleState,
    epsilon,
    gamma,
    sigma,
    validate_exponents,
)
from .utils import get_logger, make_rng

logger = get_logger("learner")

DEFAULT_DENSE_ITERATIONS = 10_000
DEFAULT_THIN_EVERY = 10

RUN_COLUMNS = [
    "replication",
    "t",
    "player",
    "dim",
    "mu",
    "x",
    "payoff",
    "gamma",
    "sigma",
    "epsilon",
    "dist_ref",
]


@dataclass(frozen=True)
class LearnerConfig:
    game: GameDefinition
    exponents: ScheduleExponents
    mu0: np.ndarray
    max_iters: int
    seed: int
    regularized: bool = True
    # None keeps every iteration up to 10^4 and every 10th beyond
    thinning: Optional[int] = None
    allow_invalid_schedule: bool = False

    def __post_init__(self):
        mu0 = as_joint_action(self.game, self.mu0)
        if not np.all(np.isfinite(mu0)):
            raise UsageError("initial means must be finite")
        mu0.setflags(write=False)
        object.__setattr__(self, "mu0", mu0)
        if int(self.max_iters) < 1:
            raise UsageError("max_iters must be at least 1")
        if self.thinning is not None and int(self.thinning) < 1:
            raise UsageError("thinning must be a positive integer")
        if int(self.seed) < 0:
            raise UsageError("seed must be non-negative")

    def keep(self, t: int) -> bool:
        if t == 1 or t == self.max_iters:
            return True
        if self.thinning is None:
            return t <= DEFAULT_DENSE_ITERATIONS or t % DEFAULT_THIN_EVERY == 0
        return t % int(self.thinning) == 0


@dataclass
class LearnerState:
    mu: np.ndarray
    t: int
    rng: np.random.Generator = field(repr=False)


@dataclass(frozen=True)
class IterationRecord:
    """Telemetry of iteration t: ``x`` is x(t), ``mu`` the updated means mu(t+1)."""

    t: int
    mu: np.ndarray
    x: np.ndarray
    payoff: np.ndarray
    gamma: float
    sigma: float
    epsilon: float
    dist_to_ref: Optional[float] = None


Recorder = Callable[[IterationRecord], None]


class RecordBuffer(list):
    """List sink for IterationRecords."""

    def __call__(self, record: IterationRecord) -> None:
        self.append(record)


def init_state(config: LearnerConfig) -> LearnerState:
    return LearnerState(mu=config.mu0.copy(), t=1, rng=make_rng(int(config.seed)))


def sample_actions(state: LearnerState, sigma: float) -> np.ndarray:
    """Draws x ~ N(mu, sigma^2 I); sigma is the standard deviation."""
    if not sigma > 0:
        raise UsageError(f"sigma must be positive, got {sigma}")
    return state.mu + sigma * state.rng.standard_normal(state.mu.shape)


def payoff_gradient_sample(
    payoff: float, x_i: np.ndarray, mu_i: np.ndarray, sigma: float
) -> np.ndarray:
    return payoff * (x_i - mu_i) / sigma**2


def _update_player(
    mu_i: np.ndarray,
    x_i: np.ndarray,
    payoff: float,
    gamma: float,
    sigma: float,
    epsilon: float,
    box: BoxSet,
) -> np.ndarray:
    # sees only its own mean, its own sample and its own scalar payoff
    direction = payoff_gradient_sample(payoff, x_i, mu_i, sigma) + epsilon * mu_i
    return box.project(mu_i - gamma * sigma**2 * direction)


def step(
    state: LearnerState, config: LearnerConfig, x: Optional[np.ndarray] = None
) -> IterationRecord:
    """One synchronous iteration: sample all, evaluate all payoffs, update all means."""
    game = config.game
    s = ScheduleState(config.exponents, state.t)
    g, sg = gamma(s), sigma(s)
    eps = epsilon(s) if config.regularized else 0.0

    x = sample_actions(state, sg) if x is None else as_joint_action(game, x)
    payoff = np.empty(game.n_players)
    for i in range(game.n_players):
        value = float(game.cost(i, x))
        if not np.isfinite(value):
            raise NonFinitePayoffError(i, x.tolist(), value)
        payoff[i] = value

    mu = np.stack(
        [
            _update_player(state.mu[i], x[i], payoff[i], g, sg, eps, game.action_sets[i])
            for i in range(game.n_players)
        ]
    )
    record = IterationRecord(
        t=state.t,
        mu=mu,
        x=x,
        payoff=payoff,
        gamma=g,
        sigma=sg,
        epsilon=eps,
        dist_to_ref=(
            None
            if game.reference_equilibrium is None
            else float(np.linalg.norm(mu - game.reference_equilibrium))
        ),
    )
    state.mu = mu
    state.t += 1
    return record


def check_schedule(config: LearnerConfig) -> None:
    if not config.regularized:
        return
    report = validate_exponents(config.exponents)
    if report.passed:
        return
    failed = "; ".join(f"({c.clause}) {c.requirement} needs {c.inequality}" for c in report.failures)
    if config.allow_invalid_schedule:
        logger.warning("running with invalid schedule %s: %s", config.exponents, failed)
        return
    raise UsageError(f"schedule exponents {config.exponents} fail: {failed}")


def run(
    config: LearnerConfig, recorder: Optional[Recorder] = None, check: bool = True
) -> LearnerState:
    if check:
        check_schedule(config)
    state = init_state(config)
    logger.debug(
        "learning %s for %d iterations, seed %d, regularized=%s",
        config.game.name,
        config.max_iters,
        config.seed,
        config.regularized,
    )
    for _ in range(int(config.max_iters)):
        record = step(state, config)
        if recorder is not None and config.keep(record.t):
            recorder(record)
    return state


def records_to_frame(records: List[IterationRecord], replication: int = 0) -> pd.DataFrame:
    """One row per (replication, t, player, dim)."""
    if not records:
        return pd.DataFrame({c: pd.Series(dtype=float) for c in RUN_COLUMNS})
    n_players, dim = records[0].mu.shape
    width = n_players * dim
    count = len(records)

    def per_record(values):
        return np.repeat(np.asarray(values, dtype=float), width)

    dist = [np.nan if r.dist_to_ref is None else r.dist_to_ref for r in records]
    return pd.DataFrame(
        {
            "replication": np.full(count * width, int(replication)),
            "t": np.repeat(np.array([r.t for r in records], dtype=np.int64), width),
            "player": np.tile(np.repeat(np.arange(n_players), dim), count),
            "dim": np.tile(np.arange(dim), count * n_players),
            "mu": np.stack([r.mu for r in records]).reshape(-1),
            "x": np.stack([r.x for r in records]).reshape(-1),
            "payoff": np.repeat(np.stack([r.payoff for r in records]), dim, axis=1).reshape(-1),
            "gamma": per_record([r.gamma for r in records]),
            "sigma": per_record([r.sigma for r in records]),
            "epsilon": per_record([r.epsilon for r in records]),
            "dist_ref": per_record(dist),
        },
        columns=RUN_COLUMNS,
    )


exf_types.add_type("monotone_nash.LearnerConfig", LearnerConfig)


@fn.NodeDecorator(
    node_id="mnash.learn.run",
    name="Payoff-Based Learning",
    description="Runs the regularized payoff-based learner and returns its trajectory.",
    outputs=[
        {"name": "trajectory", "type": pd.DataFrame},
        {"name": "mu", "type": np.ndarray},
    ],
)
def learn_run(
    game: GameDefinition,
    mu0: np.ndarray,
    max_iters: int = 5000,
    seed: int = 0,
    a: float = 5 / 9,
    b: float = 5 / 27,
    c: float = 1 / 27,
    regularized: bool = True,
    thinning: Optional[int] = None,
    allow_invalid_schedule: bool = False,
) -> Tuple[pd.DataFrame, np.ndarray]:
    config = LearnerConfig(
        game=game,
        exponents=ScheduleExponents(a, b, c),
        mu0=mu0,
        max_iters=int(max_iters),
        seed=int(seed),
        regularized=regularized,
        thinning=thinning,
        allow_invalid_schedule=allow_invalid_schedule,
    )
    records = RecordBuffer()
    state = run(config, records)
    return records_to_frame(records), state.mu


LEARNER_SHELF = fn.Shelf(
    nodes=[learn_run],
    name="Learner",
    description="Payoff-based regularized learning",
    subshelves=[],
)
