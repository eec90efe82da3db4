"""Full-information reference solvers.

These use the analytic game mapping and only serve to validate the
payoff-based learner; the learner itself never imports this module.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn
import numpy as np
import pandas as pd

from ._types import TikhonovMethod
from .errors import ConvergenceError, UsageError
from .game import (
    GameDefinition,
    as_joint_action,
    estimate_lipschitz,
    eval_game_mapping,
    project_joint,
)
from .learner import IterationRecord
from .utils import get_logger, make_rng

logger = get_logger("solvers")

Operator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SolverSettings:
    # upper bound, the solvers shrink it to their stability limit
    step: float = 1.0
    tol: float = 1e-10
    max_iters: int = 200_000

    def __post_init__(self):
        if not self.step > 0 or not self.tol > 0:
            raise UsageError("solver step and tol must be positive")
        if int(self.max_iters) < 1:
            raise UsageError("solver max_iters must be at least 1")


@dataclass(frozen=True)
class SolverResult:
    y: np.ndarray
    residual: float
    iterations: int
    step: float


@dataclass(frozen=True)
class TikhonovPoint:
    """Solution of VI(A, M + eps I)."""

    epsilon: float
    y: np.ndarray
    residual: float
    iterations: int
    step: float


@dataclass
class TikhonovPath:
    points: List[TikhonovPoint] = field(default_factory=list)

    @property
    def m_y(self) -> float:
        """Measured bound max ||y(eps)|| over the path."""
        if not self.points:
            return 0.0
        return float(max(np.linalg.norm(p.y) for p in self.points))

    @property
    def limit(self) -> np.ndarray:
        if not self.points:
            raise UsageError("empty Tikhonov path")
        return self.points[-1].y

    def __len__(self) -> int:
        return len(self.points)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for p in self.points:
            row = {"epsilon": p.epsilon, "residual": p.residual, "iterations": p.iterations}
            for k, v in enumerate(p.y.reshape(-1)):
                row[f"y{k}"] = float(v)
            row["norm"] = float(np.linalg.norm(p.y))
            rows.append(row)
        return pd.DataFrame(rows)


# region engines


def _residual(game: GameDefinition, y: np.ndarray, g: np.ndarray, step: float) -> float:
    return float(np.linalg.norm(y - project_joint(game, y - step * g)))


def _extragradient(
    game: GameDefinition,
    operator: Operator,
    y0: np.ndarray,
    step: float,
    settings: SolverSettings,
) -> SolverResult:
    """Projected extragradient: predictor at z, corrector with F(z), both projected."""
    y = project_joint(game, y0)
    res = np.inf
    for k in range(int(settings.max_iters)):
        g = operator(y)
        z = project_joint(game, y - step * g)
        res = float(np.linalg.norm(y - z))
        if res <= settings.tol:
            return SolverResult(y, res, k, step)
        y = project_joint(game, y - step * operator(z))
    res = _residual(game, y, operator(y), step)
    if res <= settings.tol:
        return SolverResult(y, res, int(settings.max_iters), step)
    raise ConvergenceError(
        f"extragradient did not converge on {game.name}", res, int(settings.max_iters), y
    )


def _projection(
    game: GameDefinition,
    operator: Operator,
    y0: np.ndarray,
    step: float,
    settings: SolverSettings,
) -> SolverResult:
    y = project_joint(game, y0)
    res = np.inf
    for k in range(int(settings.max_iters)):
        y_next = project_joint(game, y - step * operator(y))
        res = float(np.linalg.norm(y - y_next))
        if res <= settings.tol:
            return SolverResult(y, res, k, step)
        y = y_next
    raise ConvergenceError(
        f"projected iteration did not converge on {game.name}",
        res,
        int(settings.max_iters),
        y,
    )


# endregion engines


def _mapping_operator(game: GameDefinition, epsilon: float = 0.0) -> Operator:
    shape = game.shape

    def operator(y: np.ndarray) -> np.ndarray:
        return eval_game_mapping(game, y).reshape(shape) + epsilon * y

    return operator


def _start(game: GameDefinition, y0: Optional[np.ndarray]) -> np.ndarray:
    if y0 is None:
        return project_joint(game, np.zeros(game.shape))
    return as_joint_action(game, y0)


def tikhonov_step(
    game: GameDefinition,
    epsilon: float,
    settings: SolverSettings,
    method: TikhonovMethod = TikhonovMethod.EXTRAGRADIENT,
    lipschitz: Optional[float] = None,
) -> float:
    """Step size used for M + eps I.

    extragradient: min(step, 0.5 / (L + eps));
    projection: min(step, 0.9 * 2 eps / L^2, 1 / L) with L the constant of M + eps I.
    """
    lip = estimate_lipschitz(game) if lipschitz is None else float(lipschitz)
    total = lip + epsilon
    if TikhonovMethod.v(method) == TikhonovMethod.PROJECTION.value:
        return min(settings.step, 0.9 * 2.0 * epsilon / total**2, 1.0 / total)
    return min(settings.step, 0.5 / total) if total > 0 else settings.step


def solve_tikhonov(
    game: GameDefinition,
    epsilon: float,
    settings: Optional[SolverSettings] = None,
    method: TikhonovMethod = TikhonovMethod.EXTRAGRADIENT,
    y0: Optional[np.ndarray] = None,
    lipschitz: Optional[float] = None,
) -> TikhonovPoint:
    """The unique solution y(eps) of VI(A, M + eps I)."""
    settings = settings or SolverSettings()
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise UsageError(f"epsilon must be positive, got {epsilon}")
    operator = _mapping_operator(game, epsilon)
    start = _start(game, y0)
    operator(start)  # raises CapabilityError without an analytic gradient
    step = tikhonov_step(game, epsilon, settings, method, lipschitz)
    engine = (
        _projection
        if TikhonovMethod.v(method) == TikhonovMethod.PROJECTION.value
        else _extragradient
    )
    result = engine(game, operator, start, step, settings)
    logger.debug(
        "tikhonov eps=%g on %s: residual %.3e after %d iterations",
        epsilon,
        game.name,
        result.residual,
        result.iterations,
    )
    return TikhonovPoint(epsilon, result.y, result.residual, result.iterations, result.step)


def _check_decreasing(epsilons: Sequence[float]) -> List[float]:
    eps = [float(e) for e in epsilons]
    if not eps:
        raise UsageError("epsilon schedule is empty")
    if any(not e > 0 for e in eps):
        raise UsageError("epsilon schedule must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise UsageError("epsilon schedule must be strictly decreasing")
    return eps


def tikhonov_path(
    game: GameDefinition,
    epsilons: Sequence[float],
    settings: Optional[SolverSettings] = None,
    method: TikhonovMethod = TikhonovMethod.EXTRAGRADIENT,
) -> TikhonovPath:
    """Solves y(eps) along a decreasing schedule, warm-starting each solve."""
    eps = _check_decreasing(epsilons)
    lip = estimate_lipschitz(game)
    path = TikhonovPath()
    y = None
    for e in eps:
        try:
            point = solve_tikhonov(game, e, settings, method, y0=y, lipschitz=lip)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"Tikhonov path failed at eps={e:g} after {len(path)} points",
                exc.residual,
                exc.iterations,
                path,
            ) from exc
        path.points.append(point)
        y = point.y
    logger.debug("tikhonov path on %s: %d points, M_y=%.6g", game.name, len(path), path.m_y)
    return path


def epsilon_schedule(c: float, steps: int) -> List[float]:
    """eps(t) = t^-c for t = 1..steps."""
    if int(steps) < 1:
        raise UsageError("steps must be at least 1")
    if not float(c) > 0:
        raise UsageError(f"schedule exponent must be positive, got {c}")
    return [float(t) ** -float(c) for t in range(1, int(steps) + 1)]


def path_increments(path: TikhonovPath, atol: float = 1e-9) -> pd.DataFrame:
    """||y(t) - y(t-1)|| against the bound M_y |eps(t-1) - eps(t)| / eps(t) per path step."""
    m_y = path.m_y
    rows = []
    for prev, cur in zip(path.points, path.points[1:]):
        increment = float(np.linalg.norm(cur.y - prev.y))
        bound = m_y * abs(prev.epsilon - cur.epsilon) / cur.epsilon
        rows.append(
            {
                "eps_prev": prev.epsilon,
                "eps": cur.epsilon,
                "increment": increment,
                "bound": bound,
                "holds": bool(increment <= bound + atol),
            }
        )
    return pd.DataFrame(rows, columns=["eps_prev", "eps", "increment", "bound", "holds"])


def solve_vi(
    game: GameDefinition,
    settings: Optional[SolverSettings] = None,
    y0: Optional[np.ndarray] = None,
) -> SolverResult:
    """Extragradient solution of VI(A, M); any point of the solution set when it is not unique."""
    settings = settings or SolverSettings()
    operator = _mapping_operator(game)
    start = _start(game, y0)
    operator(start)
    lip = estimate_lipschitz(game)
    step = min(settings.step, 0.5 / lip) if lip > 0 else settings.step
    result = _extragradient(game, operator, start, step, settings)
    logger.debug(
        "vi on %s: residual %.3e after %d iterations", game.name, result.residual, result.iterations
    )
    return result


def linear_equilibrium(game: GameDefinition, check_seed: int = 0) -> np.ndarray:
    """Root of an affine game mapping M(a) = B a + m, required to lie in the action box."""
    n = game.n_players * game.dim
    offset = eval_game_mapping(game, np.zeros(game.shape))
    basis = np.eye(n)
    matrix = np.stack(
        [eval_game_mapping(game, basis[k]) - offset for k in range(n)], axis=1
    )
    probes = np.vstack([make_rng(check_seed).uniform(-1.0, 1.0, (4, n)), -basis])
    for probe in probes:
        if not np.allclose(eval_game_mapping(game, probe), matrix @ probe + offset, atol=1e-9):
            raise UsageError(f"game mapping of {game.name!r} is not affine")
    try:
        root = np.linalg.solve(matrix, -offset)
    except np.linalg.LinAlgError as exc:
        raise UsageError(f"game mapping of {game.name!r} is singular") from exc
    root = root.reshape(game.shape)
    if not all(box.contains(root[i], atol=1e-12) for i, box in enumerate(game.action_sets)):
        raise UsageError(f"root of the mapping of {game.name!r} lies outside the action box")
    return root


def tikhonov_tracking(
    records: Sequence[IterationRecord],
    game: GameDefinition,
    settings: Optional[SolverSettings] = None,
) -> pd.DataFrame:
    """Distance of each recorded mu(t+1) to the Tikhonov point y(eps(t)) of its iteration."""
    settings = settings or SolverSettings()
    lip = estimate_lipschitz(game)
    rows = []
    y = None
    cache = {}
    for r in records:
        if not r.epsilon > 0:
            raise UsageError("tracking needs regularized records (epsilon > 0)")
        if r.epsilon not in cache:
            cache[r.epsilon] = solve_tikhonov(game, r.epsilon, settings, y0=y, lipschitz=lip).y
        y = cache[r.epsilon]
        rows.append(
            {
                "t": r.t,
                "epsilon": r.epsilon,
                "dist_tikhonov": float(np.linalg.norm(r.mu - y)),
            }
        )
    return pd.DataFrame(rows, columns=["t", "epsilon", "dist_tikhonov"])


exf_types.add_type("monotone_nash.TikhonovPoint", TikhonovPoint)
exf_types.add_type("monotone_nash.TikhonovPath", TikhonovPath)
exf_types.add_type("monotone_nash.SolverSettings", SolverSettings)


@fn.NodeDecorator(
    node_id="mnash.solve.tikhonov",
    name="Tikhonov Point",
    description="Solves VI(A, M + eps I) for a fixed regularization eps.",
    outputs=[
        {"name": "y", "type": np.ndarray},
        {"name": "residual", "type": float},
    ],
)
def solve_tikhonov_node(
    game: GameDefinition,
    epsilon: float = 1.0,
    method: TikhonovMethod = TikhonovMethod.EXTRAGRADIENT,
    tol: float = 1e-10,
    max_iters: int = 200_000,
) -> Tuple[np.ndarray, float]:
    point = solve_tikhonov(
        game, epsilon, SolverSettings(tol=tol, max_iters=int(max_iters)), method
    )
    return point.y, point.residual


@fn.NodeDecorator(
    node_id="mnash.solve.path",
    name="Tikhonov Path",
    description="Tikhonov points along a decreasing eps schedule and the bound M_y.",
    outputs=[
        {"name": "path", "type": pd.DataFrame},
        {"name": "m_y", "type": float},
        {"name": "increments", "type": pd.DataFrame},
    ],
)
def solve_path_node(
    game: GameDefinition,
    epsilons: List[float],
    tol: float = 1e-10,
) -> Tuple[pd.DataFrame, float, pd.DataFrame]:
    path = tikhonov_path(game, epsilons, SolverSettings(tol=tol))
    return path.to_frame(), path.m_y, path_increments(path)


@fn.NodeDecorator(
    node_id="mnash.solve.vi",
    name="Solve VI",
    description="Extragradient solution of the game's variational inequality.",
    outputs=[
        {"name": "y", "type": np.ndarray},
        {"name": "residual", "type": float},
    ],
)
def solve_vi_node(
    game: GameDefinition,
    tol: float = 1e-10,
    max_iters: int = 200_000,
) -> Tuple[np.ndarray, float]:
    result = solve_vi(game, SolverSettings(tol=tol, max_iters=int(max_iters)))
    return result.y, result.residual


@fn.NodeDecorator(
    node_id="mnash.solve.linear",
    name="Linear Equilibrium",
    description="Root of an affine game mapping.",
    outputs=[{"name": "equilibrium", "type": np.ndarray}],
)
def linear_equilibrium_node(game: GameDefinition) -> np.ndarray:
    return linear_equilibrium(game)


SOLVER_SHELF = fn.Shelf(
    nodes=[solve_tikhonov_node, solve_path_node, solve_vi_node, linear_equilibrium_node],
    name="Reference Solvers",
    description="Full-information Tikhonov and VI solvers for validation",
    subshelves=[],
)
