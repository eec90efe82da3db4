from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import CapabilityError, UsageError

# J_i(a): (player, joint action of shape (N, d) or a batch (n, N, d)) -> float or (n,)
CostFn = Callable[[int, np.ndarray], Union[float, np.ndarray]]
# M_i(a): (player, joint action) -> (d,) or (n, d)
GradientFn = Callable[[int, np.ndarray], np.ndarray]
# closed form of d/dmu^i of the gaussian-smoothed cost: (player, mu, sigma) -> (d,)
SmoothedGradientFn = Callable[[int, np.ndarray, float], np.ndarray]

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


@dataclass(frozen=True)
class BoxSet:
    """Closed convex box ``{v : lower <= v <= upper}``, bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise UsageError(
                f"box bounds differ in length: {lower.shape[0]} != {upper.shape[0]}"
            )
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise UsageError("box bounds must not be NaN")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise UsageError("box is empty")
        if np.any(lower > upper):
            raise UsageError(f"box is empty: lower {lower} > upper {upper}")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def interval(cls, lower: float, upper: float, dim: int = 1) -> "BoxSet":
        return cls(np.full(dim, float(lower)), np.full(dim, float(upper)))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def contains(self, v: ArrayLike, atol: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= self.lower - atol) and np.all(v <= self.upper + atol))

    def project(self, v: ArrayLike) -> np.ndarray:
        return np.clip(np.asarray(v, dtype=float), self.lower, self.upper)


@dataclass(frozen=True)
class GameDefinition:
    """Convex game with box action sets.

    Costs must be defined on all of R^{Nd}, sampled actions are unbounded.
    With ``vectorized`` set, cost and gradient evaluators accept a batch of
    joint actions of shape ``(n, N, d)``.
    """

    name: str
    n_players: int
    dim: int
    action_sets: tuple[BoxSet, ...]
    cost: CostFn = field(repr=False)
    analytic_gradient: Optional[GradientFn] = field(default=None, repr=False)
    smoothed_gradient: Optional[SmoothedGradientFn] = field(default=None, repr=False)
    reference_equilibrium: Optional[np.ndarray] = None
    monotone_flag: bool = True
    vectorized: bool = False
    description: str = ""

    def __post_init__(self):
        if self.n_players < 1 or self.dim < 1:
            raise UsageError("a game needs at least one player and dimension one")
        sets = tuple(self.action_sets)
        if len(sets) != self.n_players:
            raise UsageError(
                f"expected {self.n_players} action sets, got {len(sets)}"
            )
        for i, box in enumerate(sets):
            if box.dim != self.dim:
                raise UsageError(
                    f"action set of player {i} has dimension {box.dim}, expected {self.dim}"
                )
        object.__setattr__(self, "action_sets", sets)
        if self.reference_equilibrium is not None:
            ref = as_joint_action(self, self.reference_equilibrium)
            ref.setflags(write=False)
            object.__setattr__(self, "reference_equilibrium", ref)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_players, self.dim)

    @property
    def lower(self) -> np.ndarray:
        return np.stack([box.lower for box in self.action_sets])

    @property
    def upper(self) -> np.ndarray:
        return np.stack([box.upper for box in self.action_sets])

    @property
    def bounded(self) -> bool:
        return all(box.bounded for box in self.action_sets)

    def __str__(self) -> str:
        return f"{self.name} (N={self.n_players}, d={self.dim})"


def as_joint_action(game: GameDefinition, a: ArrayLike) -> np.ndarray:
    """Returns ``a`` as a float array of shape ``(N, d)``."""
    arr = np.asarray(a, dtype=float)
    if arr.size != game.n_players * game.dim:
        raise UsageError(
            f"joint action of size {arr.size} does not match N*d = "
            f"{game.n_players * game.dim} of game {game.name!r}"
        )
    return arr.reshape(game.shape).copy()


def check_player(game: GameDefinition, i: int) -> int:
    i = int(i)
    if not 0 <= i < game.n_players:
        raise UsageError(f"player index {i} outside [0, {game.n_players})")
    return i


def eval_cost(game: GameDefinition, i: int, a: ArrayLike) -> float:
    i = check_player(game, i)
    return float(game.cost(i, as_joint_action(game, a)))


def batch_cost(game: GameDefinition, i: int, xs: np.ndarray) -> np.ndarray:
    """J_i on a batch of joint actions of shape ``(n, N, d)``."""
    if game.vectorized:
        return np.asarray(game.cost(i, xs), dtype=float).reshape(xs.shape[0])
    return np.fromiter((game.cost(i, x) for x in xs), dtype=float, count=xs.shape[0])


def batch_gradient(game: GameDefinition, i: int, xs: np.ndarray) -> np.ndarray:
    """M_i on a batch of joint actions, shape ``(n, d)``."""
    if game.analytic_gradient is None:
        raise CapabilityError(f"game {game.name!r} has no analytic gradient")
    if game.vectorized:
        return np.asarray(game.analytic_gradient(i, xs), dtype=float).reshape(
            xs.shape[0], game.dim
        )
    return np.stack([game.analytic_gradient(i, x) for x in xs]).reshape(
        xs.shape[0], game.dim
    )


def finite_difference_mapping(
    game: GameDefinition, a: ArrayLike, step: float = 1e-5
) -> np.ndarray:
    """Central differences of every player's cost in its own action (diagnostics only)."""
    a = as_joint_action(game, a)
    out = np.zeros(game.shape)
    for i in range(game.n_players):
        for k in range(game.dim):
            plus, minus = a.copy(), a.copy()
            plus[i, k] += step
            minus[i, k] -= step
            out[i, k] = (game.cost(i, plus) - game.cost(i, minus)) / (2 * step)
    return out.reshape(-1)


def eval_game_mapping(
    game: GameDefinition,
    a: ArrayLike,
    allow_finite_difference: bool = False,
) -> np.ndarray:
    """Stacked game mapping ``(M_1(a), ..., M_N(a))`` of length N*d."""
    a = as_joint_action(game, a)
    if game.analytic_gradient is None:
        if not allow_finite_difference:
            raise CapabilityError(
                f"game {game.name!r} has no analytic gradient and finite differences "
                "were not requested"
            )
        return finite_difference_mapping(game, a)
    return np.concatenate(
        [
            np.asarray(game.analytic_gradient(i, a), dtype=float).reshape(game.dim)
            for i in range(game.n_players)
        ]
    )


def project(box: BoxSet, v: ArrayLike) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != box.dim:
        raise UsageError(f"vector of length {v.shape[-1]} does not match box dimension {box.dim}")
    return box.project(v)


def project_joint(game: GameDefinition, a: np.ndarray) -> np.ndarray:
    return np.clip(a, game.lower, game.upper)
