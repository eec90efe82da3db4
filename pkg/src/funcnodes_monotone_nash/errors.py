from typing import Any, Optional


class MonotoneNashError(Exception):
    """Base class of all errors raised by funcnodes_monotone_nash."""


class UsageError(MonotoneNashError, ValueError):
    """Invalid input: wrong dimensions, unknown names, invalid schedules or configs."""


class CapabilityError(UsageError):
    """The game lacks an evaluator the operation needs (e.g. an analytic gradient)."""


class NonFinitePayoffError(MonotoneNashError, RuntimeError):
    def __init__(self, player: int, action: Any, value: float):
        self.player = player
        self.action = action
        self.value = value
        super().__init__(
            f"cost of player {player} is not finite ({value}) at action {action!r}"
        )


class ConvergenceError(MonotoneNashError, RuntimeError):
    def __init__(
        self,
        message: str,
        residual: float,
        iterations: int,
        partial: Optional[Any] = None,
    ):
        self.residual = residual
        self.iterations = iterations
        # partial result, e.g. the solved prefix of a Tikhonov path
        self.partial = partial
        super().__init__(
            f"{message} (residual {residual:.3e} after {iterations} iterations)"
        )
