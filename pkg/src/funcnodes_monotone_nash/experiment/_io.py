import io
from pathlib import Path
from typing import Dict, Union

import pandas as pd

from .._types import OutputFormat
from ..errors import UsageError
from ..learner import RUN_COLUMNS
from ._runner import SUMMARY_COLUMNS, ExperimentResult

FLOAT_FORMAT = "%.17g"

_INT_COLUMNS = ["replication", "t", "player", "dim"]
_FLOAT_COLUMNS = ["mu", "x", "payoff", "gamma", "sigma", "epsilon"]


def frame_to_bytes(frame: pd.DataFrame, fmt: str = OutputFormat.CSV.value) -> bytes:
    """CSV writes every float with 17 significant digits and reads back bit for bit.

    JSON keeps 15 digits, so only the CSV output round-trips exactly.
    """
    if fmt == OutputFormat.JSON.value:
        return (frame.to_json(orient="records", double_precision=15) + "\n").encode("utf-8")
    if fmt != OutputFormat.CSV.value:
        raise UsageError(f"unknown output format {fmt!r}")
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n").encode(
        "utf-8"
    )


def write_frame(frame: pd.DataFrame, path: Union[str, Path], fmt: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(frame_to_bytes(frame, fmt))
    return path


def write_experiment(result: ExperimentResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Writes ``runs.<fmt>`` and ``summary.<fmt>`` into ``out_dir``."""
    fmt = result.config.format
    out_dir = Path(out_dir)
    return {
        "runs": write_frame(result.runs[RUN_COLUMNS], out_dir / f"runs.{fmt}", fmt),
        "summary": write_frame(
            result.summary_frame()[SUMMARY_COLUMNS], out_dir / f"summary.{fmt}", fmt
        ),
    }


def _check_schema(frame: pd.DataFrame, line_offset: int) -> pd.DataFrame:
    if frame.empty:
        raise UsageError("runs file has no data rows")
    for column in _INT_COLUMNS + _FLOAT_COLUMNS + ["dist_ref"]:
        values = pd.to_numeric(frame[column], errors="coerce")
        # dist_ref is empty for games without a reference equilibrium
        bad = values.isna() & (frame[column].notna() if column == "dist_ref" else True)
        if bad.any():
            row = int(bad.to_numpy().nonzero()[0][0])
            raise UsageError(
                f"line {row + line_offset}: column {column!r} is not numeric: "
                f"{frame[column].iloc[row]!r}"
            )
        if column in _INT_COLUMNS:
            if ((values % 1) != 0).any():
                row = int(((values % 1) != 0).to_numpy().nonzero()[0][0])
                raise UsageError(f"line {row + line_offset}: column {column!r} is not an integer")
            frame[column] = values.astype("int64")
        else:
            # Python float() is exact on the %.17g text; to_numeric can be off by one ulp
            frame[column] = frame[column].map(float, na_action="ignore").astype(float)
    return frame


def parse_runs_csv(data: Union[str, bytes]) -> pd.DataFrame:
    """Parses and validates a runs CSV; errors name the offending line."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines()
    if not lines or not lines[0].strip():
        raise UsageError("line 1: missing header")
    header = [h.strip() for h in lines[0].split(",")]
    if header != RUN_COLUMNS:
        raise UsageError(f"line 1: header must be {','.join(RUN_COLUMNS)}, got {lines[0]!r}")
    try:
        frame = pd.read_csv(io.StringIO(data), dtype=str, keep_default_na=False, na_values=[""])
    except pd.errors.ParserError as exc:
        raise UsageError(f"malformed runs file: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise UsageError("runs file is empty") from exc
    # data row k sits on line k + 2
    return _check_schema(frame, 2)


def parse_runs_json(data: Union[str, bytes]) -> pd.DataFrame:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        frame = pd.read_json(io.StringIO(data), orient="records", dtype=False)
    except ValueError as exc:
        raise UsageError(f"malformed runs file: {exc}") from exc
    missing = [c for c in RUN_COLUMNS if c not in frame.columns]
    if missing:
        raise UsageError(f"runs file lacks columns {missing}")
    # records are reported 1-based
    return _check_schema(frame[RUN_COLUMNS].copy(), 1)


def read_runs(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        return parse_runs_json(data)
    return parse_runs_csv(data)
