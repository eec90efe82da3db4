import math

import numpy as np

from ..errors import UsageError
from ._model import BoxSet, GameDefinition

# quadratic-strong: J_i = (a_i - c_i)^2 + 0.1 a_i a_-i
QUADRATIC_TARGETS = np.array([0.3, -0.2])
QUADRATIC_COUPLING = 0.1


def _unit_boxes(n: int = 2) -> tuple[BoxSet, ...]:
    return tuple(BoxSet.interval(-1.0, 1.0) for _ in range(n))


def _other(i: int) -> int:
    return 1 - i


# region bilinear


def _bilinear_cost(i, a):
    prod = a[..., 0, 0] * a[..., 1, 0]
    return prod if i == 0 else -prod


def _bilinear_gradient(i, a):
    if i == 0:
        return a[..., 1, :]
    return -a[..., 0, :]


def _bilinear_smoothed_gradient(i, mu, sigma):
    # E[x1 x2] = mu1 mu2 for independent gaussians
    return _bilinear_gradient(i, mu)


def bilinear() -> GameDefinition:
    return GameDefinition(
        name="bilinear",
        n_players=2,
        dim=1,
        action_sets=_unit_boxes(),
        cost=_bilinear_cost,
        analytic_gradient=_bilinear_gradient,
        smoothed_gradient=_bilinear_smoothed_gradient,
        reference_equilibrium=np.zeros((2, 1)),
        monotone_flag=True,
        vectorized=True,
        description="J1 = a1 a2, J2 = -a1 a2 on [-1,1]^2; merely monotone, NE (0, 0)",
    )


# endregion bilinear

# region quadratic-strong


def _quadratic_cost(i, a):
    own = a[..., i, 0]
    return (own - QUADRATIC_TARGETS[i]) ** 2 + QUADRATIC_COUPLING * own * a[..., _other(i), 0]


def _quadratic_gradient(i, a):
    return (
        2.0 * (a[..., i, :] - QUADRATIC_TARGETS[i])
        + QUADRATIC_COUPLING * a[..., _other(i), :]
    )


def _quadratic_smoothed_gradient(i, mu, sigma):
    # affine mapping: smoothing leaves the gradient unchanged
    return _quadratic_gradient(i, mu)


def _quadratic_equilibrium() -> np.ndarray:
    # M(a) = B a - 2 c = 0
    b = np.array([[2.0, QUADRATIC_COUPLING], [QUADRATIC_COUPLING, 2.0]])
    return np.linalg.solve(b, 2.0 * QUADRATIC_TARGETS).reshape(2, 1)


def quadratic_strong() -> GameDefinition:
    return GameDefinition(
        name="quadratic-strong",
        n_players=2,
        dim=1,
        action_sets=_unit_boxes(),
        cost=_quadratic_cost,
        analytic_gradient=_quadratic_gradient,
        smoothed_gradient=_quadratic_smoothed_gradient,
        reference_equilibrium=_quadratic_equilibrium(),
        monotone_flag=True,
        vectorized=True,
        description="J_i = (a_i - c_i)^2 + 0.1 a_i a_-i, c = (0.3, -0.2); strongly monotone",
    )


# endregion quadratic-strong

# region shifted-sum


def _shifted_cost(i, a):
    own = a[..., i, 0]
    return 0.5 * own**2 + a[..., 0, 0] * a[..., 1, 0] - own


def _shifted_gradient(i, a):
    return a[..., 0, :] + a[..., 1, :] - 1.0


def _shifted_smoothed_gradient(i, mu, sigma):
    return _shifted_gradient(i, mu)


def shifted_sum() -> GameDefinition:
    return GameDefinition(
        name="shifted-sum",
        n_players=2,
        dim=1,
        action_sets=_unit_boxes(),
        cost=_shifted_cost,
        analytic_gradient=_shifted_gradient,
        smoothed_gradient=_shifted_smoothed_gradient,
        # least-norm point of the solution segment a1 + a2 = 1
        reference_equilibrium=np.full((2, 1), 0.5),
        monotone_flag=True,
        vectorized=True,
        description="J_i = a_i^2/2 + a1 a2 - a_i; monotone, equilibria on a1 + a2 = 1",
    )


# endregion shifted-sum

# region kinked

_KINK_SIGNS = (1.0, -1.0)


def _kinked_cost(i, a):
    own = a[..., i, 0]
    return (
        own**2
        + 0.5 * own * np.abs(own)
        + 0.5 * _KINK_SIGNS[i] * a[..., 0, 0] * a[..., 1, 0]
    )


def _kinked_gradient(i, a):
    own = a[..., i, :]
    return 2.0 * own + np.abs(own) + 0.5 * _KINK_SIGNS[i] * a[..., _other(i), :]


def _gaussian_abs_mean(mu: np.ndarray, sigma: float) -> np.ndarray:
    """E|X| for X ~ N(mu, sigma^2)."""
    mu = np.asarray(mu, dtype=float)
    z = mu / sigma
    phi = np.vectorize(lambda v: 0.5 * math.erfc(v / math.sqrt(2.0)))(z)
    return sigma * math.sqrt(2.0 / math.pi) * np.exp(-0.5 * z**2) + mu * (1.0 - 2.0 * phi)


def _kinked_smoothed_gradient(i, mu, sigma):
    own = mu[..., i, :]
    return (
        2.0 * own
        + _gaussian_abs_mean(own, sigma)
        + 0.5 * _KINK_SIGNS[i] * mu[..., _other(i), :]
    )


def kinked() -> GameDefinition:
    return GameDefinition(
        name="kinked",
        n_players=2,
        dim=1,
        action_sets=_unit_boxes(),
        cost=_kinked_cost,
        analytic_gradient=_kinked_gradient,
        smoothed_gradient=_kinked_smoothed_gradient,
        reference_equilibrium=np.zeros((2, 1)),
        monotone_flag=True,
        vectorized=True,
        description=(
            "J_i = a_i^2 + a_i|a_i|/2 +- a1 a2/2; strongly monotone mapping with a kink at 0"
        ),
    )


# endregion kinked


GAME_REGISTRY = {
    "bilinear": bilinear,
    "quadratic-strong": quadratic_strong,
    "shifted-sum": shifted_sum,
    "kinked": kinked,
}


def registry(name: str) -> GameDefinition:
    try:
        factory = GAME_REGISTRY[str(name)]
    except KeyError:
        raise UsageError(
            f"unknown game {name!r}, available: {', '.join(GAME_REGISTRY)}"
        ) from None
    return factory()


def registry_names() -> list[str]:
    return list(GAME_REGISTRY)
