import logging
from fractions import Fraction
from typing import Sequence, Union

import funcnodes as fn
import numpy as np

from .errors import UsageError

LOGGER = fn.FUNCNODES_LOGGER.getChild("monotone_nash")

SEED_MASK = (1 << 64) - 1


def get_logger(name: str) -> logging.Logger:
    return LOGGER.getChild(name)


def replication_seed(base_seed: int, replication: int) -> int:
    """Seed of an independent replication: base_seed XOR replication index."""
    return (int(base_seed) ^ int(replication)) & SEED_MASK


def make_rng(seed: Union[int, Sequence[int]]) -> np.random.Generator:
    return np.random.default_rng(seed)


def parse_number(text: Union[str, float, int]) -> float:
    """Parses decimals and fractions such as ``5/9``."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def parse_number_list(text: Union[str, Sequence[float]]) -> list[float]:
    if isinstance(text, str):
        parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
        return [parse_number(p) for p in parts]
    return [parse_number(p) for p in text]
