from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import exposedfunctionality.function_parser.types as exf_types
import funcnodes as fn
import numpy as np
import pandas as pd

from .errors import UsageError

# verdicts of the partial-sum oracle: a series counts as divergent when the
# estimated decay exponent of its decade increments is at most this value
DIVERGENCE_EXPONENT = 1.005


@dataclass(frozen=True)
class ScheduleExponents:
    """Exponents of gamma(t) = t^-a, sigma(t) = t^-b and epsilon(t) = t^-c."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise UsageError(f"exponent {name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    def exact(self) -> Tuple[Fraction, Fraction, Fraction]:
        # recovers 5/9 from 0.5555... so boundary cases compare exactly
        return tuple(Fraction(v).limit_denominator(10**6) for v in (self.a, self.b, self.c))

    def __str__(self) -> str:
        return " ".join(str(v) for v in self.exact())


DEFAULT_EXPONENTS = ScheduleExponents(5 / 9, 5 / 27, 1 / 27)


@dataclass(frozen=True)
class ScheduleState:
    exponents: ScheduleExponents
    t: int

    def __post_init__(self):
        if int(self.t) < 1:
            raise UsageError(f"schedules are indexed from t = 1, got t = {self.t}")


def gamma(s: ScheduleState) -> float:
    return float(s.t) ** -s.exponents.a


def sigma(s: ScheduleState) -> float:
    return float(s.t) ** -s.exponents.b


def epsilon(s: ScheduleState) -> float:
    return float(s.t) ** -s.exponents.c


def beta(s: ScheduleState) -> float:
    return gamma(s) * sigma(s) ** 2


def schedule_values(exponents: ScheduleExponents, t: int) -> Tuple[float, float, float, float]:
    s = ScheduleState(exponents, t)
    return gamma(s), sigma(s), epsilon(s), beta(s)


def schedule_table(exponents: ScheduleExponents, t_max: int) -> pd.DataFrame:
    if t_max < 1:
        raise UsageError("t_max must be at least 1")
    t = np.arange(1, t_max + 1, dtype=float)
    g = t**-exponents.a
    s = t**-exponents.b
    return pd.DataFrame(
        {
            "t": t.astype(int),
            "gamma": g,
            "sigma": s,
            "epsilon": t**-exponents.c,
            "beta": g * s**2,
        }
    )


# region validation


@dataclass(frozen=True)
class ConditionVerdict:
    clause: str
    requirement: str
    inequality: str
    value: Fraction
    passed: bool
    series: Optional[str] = None


@dataclass
class ValidationReport:
    exponents: ScheduleExponents
    conditions: List[ConditionVerdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failures(self) -> List[ConditionVerdict]:
        return [c for c in self.conditions if not c.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "clause": c.clause,
                    "requirement": c.requirement,
                    "inequality": c.inequality,
                    "value": str(c.value),
                    "passed": c.passed,
                }
                for c in self.conditions
            ]
        )

    def lines(self) -> List[str]:
        out = []
        for c in self.conditions:
            mark = "pass" if c.passed else "FAIL"
            out.append(f"({c.clause}) {c.requirement:<28} {c.inequality:<16} [{c.value}] {mark}")
        return out


def validate_exponents(e: ScheduleExponents) -> ValidationReport:
    """Checks power-law exponents against the four step-size conditions.

    For t^-p schedules every condition reduces to an inequality between the
    exponents, e.g. sum beta(t) = inf iff a + 2b <= 1.
    """
    a, b, c = e.exact()
    checks: List[Tuple[str, str, str, Fraction, Callable[[Fraction], bool], Optional[str]]] = [
        ("a", "sum beta(t) = inf", "a+2b <= 1", a + 2 * b, lambda v: v <= 1, "sum_beta"),
        ("a", "epsilon(t) -> 0", "c > 0", c, lambda v: v > 0, None),
        (
            "b",
            "sum (1+1/(beta eps)) (d eps/eps)^2 < inf",
            "a+2b+c < 1",
            a + 2 * b + c,
            lambda v: v < 1,
            "sum_tikhonov_drift",
        ),
        ("c", "sum gamma(t)^2 < inf", "a > 1/2", a, lambda v: v > Fraction(1, 2), "sum_gamma_sq"),
        ("c", "sum beta(t) sigma(t) < inf", "a+3b > 1", a + 3 * b, lambda v: v > 1, "sum_beta_sigma"),
        ("d", "sigma(t) -> 0", "b > 0", b, lambda v: v > 0, None),
        ("d", "sum beta(t) eps(t) = inf", "a+2b+c <= 1", a + 2 * b + c, lambda v: v <= 1, "sum_beta_eps"),
    ]
    report = ValidationReport(exponents=e)
    for clause, requirement, inequality, value, test, series in checks:
        report.conditions.append(
            ConditionVerdict(
                clause=clause,
                requirement=requirement,
                inequality=inequality,
                value=value,
                passed=bool(test(value)),
                series=series,
            )
        )
    return report


def _series_terms(e: ScheduleExponents, t: np.ndarray) -> dict:
    a, b, c = e.a, e.b, e.c
    beta_t = t ** -(a + 2 * b)
    eps_t = t**-c
    # |eps(t-1) - eps(t)| / eps(t) = ((t-1)/t)^-c - 1; first term at t = 2
    drift = np.zeros_like(t)
    later = t >= 2
    drift[later] = np.expm1(-c * np.log1p(-1.0 / t[later]))
    return {
        "sum_beta": (beta_t, True),
        "sum_tikhonov_drift": ((1.0 + 1.0 / (beta_t * eps_t)) * drift**2, False),
        "sum_gamma_sq": (t ** (-2 * a), False),
        "sum_beta_sigma": (t ** -(a + 3 * b), False),
        "sum_beta_eps": (beta_t * eps_t, True),
    }


def partial_sum_check(e: ScheduleExponents, t_max: int = 10**6) -> pd.DataFrame:
    """Numerical partial sums backing each summability verdict of validate_exponents.

    The increments over the last two decades before ``t_max`` give an estimate
    p of the summand's decay t^-p; the sum is treated as divergent when
    p <= DIVERGENCE_EXPONENT.
    """
    if t_max < 1000:
        raise UsageError("t_max must be at least 1000 for the decade test")
    t = np.arange(1, t_max + 1, dtype=float)
    lo, mid = t_max // 100, t_max // 10
    symbolic = {c.series: c for c in validate_exponents(e).conditions if c.series}
    rows = []
    for name, (terms, should_diverge) in _series_terms(e, t).items():
        first = float(terms[lo:mid].sum())
        second = float(terms[mid:].sum())
        ratio = second / first if first > 0 else 0.0
        p_hat = 1.0 - np.log10(ratio) if ratio > 0 else np.inf
        numeric_divergent = bool(p_hat <= DIVERGENCE_EXPONENT)
        verdict = symbolic[name]
        symbolic_divergent = verdict.passed == should_diverge
        rows.append(
            {
                "series": name,
                "clause": verdict.clause,
                f"sum_to_{lo}": float(terms[:lo].sum()),
                f"sum_to_{mid}": float(terms[:mid].sum()),
                f"sum_to_{t_max}": float(terms.sum()),
                "decade_ratio": ratio,
                "decay_exponent": p_hat,
                "numeric_divergent": numeric_divergent,
                "symbolic_divergent": symbolic_divergent,
                "agrees": numeric_divergent == symbolic_divergent,
            }
        )
    return pd.DataFrame(rows)


# endregion validation

exf_types.add_type("monotone_nash.ScheduleExponents", ScheduleExponents)


@fn.NodeDecorator(
    node_id="mnash.sched.values",
    name="Schedule Values",
    description="Step size, sampling deviation, regularization and beta at iteration t.",
    outputs=[
        {"name": "gamma", "type": float},
        {"name": "sigma", "type": float},
        {"name": "epsilon", "type": float},
        {"name": "beta", "type": float},
    ],
)
def sched_values(
    t: int = 1,
    a: float = 5 / 9,
    b: float = 5 / 27,
    c: float = 1 / 27,
) -> Tuple[float, float, float, float]:
    return schedule_values(ScheduleExponents(a, b, c), int(t))


@fn.NodeDecorator(
    node_id="mnash.sched.validate",
    name="Validate Exponents",
    description="Checks an exponent triple against the step-size conditions.",
    outputs=[
        {"name": "report", "type": pd.DataFrame},
        {"name": "passed", "type": bool},
    ],
)
def sched_validate(
    a: float = 5 / 9,
    b: float = 5 / 27,
    c: float = 1 / 27,
) -> Tuple[pd.DataFrame, bool]:
    report = validate_exponents(ScheduleExponents(a, b, c))
    return report.to_frame(), report.passed


@fn.NodeDecorator(
    node_id="mnash.sched.partial_sums",
    name="Partial Sums",
    description="Numerical partial sums of the series named by the step-size conditions.",
    outputs=[{"name": "sums", "type": pd.DataFrame}],
)
def sched_partial_sums(
    a: float = 5 / 9,
    b: float = 5 / 27,
    c: float = 1 / 27,
    t_max: int = 10**6,
) -> pd.DataFrame:
    return partial_sum_check(ScheduleExponents(a, b, c), int(t_max))


@fn.NodeDecorator(
    node_id="mnash.sched.table",
    name="Schedule Table",
    description="Schedule values for t = 1..t_max.",
    outputs=[{"name": "table", "type": pd.DataFrame}],
)
def sched_table(
    a: float = 5 / 9,
    b: float = 5 / 27,
    c: float = 1 / 27,
    t_max: int = 100,
) -> pd.DataFrame:
    return schedule_table(ScheduleExponents(a, b, c), int(t_max))


SCHEDULE_SHELF = fn.Shelf(
    nodes=[sched_values, sched_validate, sched_partial_sums, sched_table],
    name="Schedules",
    description="Power-law parameter schedules and their validation",
    subshelves=[],
)
