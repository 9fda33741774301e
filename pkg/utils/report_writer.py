import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from bases.mub_bases import BasisFamily
from estimation.tomography import CountTable, ProbabilityTable
from utils.errors import DimensionError

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["setup_kind", "setup_elem", "outcome_elem", "value"]
FLOAT_FORMAT = "%.10g"


def table_to_frame(table: Union[ProbabilityTable, CountTable]) -> pd.DataFrame:
    """
    Long-format frame with one row per (setup, outcome)

    Args:
        table: Probability or count table

    Returns:
        DataFrame with columns setup_kind, setup_elem, outcome_elem, value
    """
    values = table.values if isinstance(table, ProbabilityTable) else table.counts
    ctx = table.fam.ctx
    outcomes = [repr(ctx.from_index(k)) for k in range(ctx.size)]
    rows = []
    for (kind, param, _), row in zip(table.fam.setups(), values):
        for outcome, value in zip(outcomes, row):
            rows.append((kind, repr(param), outcome, value))
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def frame_to_table(frame: pd.DataFrame, fam: BasisFamily) -> ProbabilityTable:
    """Inverse of table_to_frame for probability tables; row order may differ"""
    missing = set(TABLE_COLUMNS) - set(frame.columns)
    if missing:
        raise DimensionError(f"frame lacks columns {sorted(missing)}")
    ctx = fam.ctx
    setup_row = {(kind, repr(param)): i for i, (kind, param, _) in enumerate(fam.setups())}
    outcome_col = {repr(ctx.from_index(k)): k for k in range(ctx.size)}

    values = np.full((len(fam), ctx.size), np.nan)
    for kind, elem, outcome, value in frame[TABLE_COLUMNS].itertuples(index=False):
        try:
            values[setup_row[(kind, elem)], outcome_col[outcome]] = value
        except KeyError as e:
            raise DimensionError(f"unknown setup or outcome {kind}:{elem} {outcome}") from e
    if np.isnan(values).any():
        raise DimensionError("frame does not cover every setup and outcome")
    return ProbabilityTable(fam, values)


def write_csv(frame: pd.DataFrame, path: Union[str, Path], header_lines: Sequence[str] = ()) -> Path:
    """
    Write `# ` comment lines, then the frame as CSV without index

    The body uses '.' decimals and a fixed float format so that identical
    frames give identical bytes; timestamps belong in the header lines only.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for line in header_lines:
            f.write(f"# {line}\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def _to_builtin(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (complex, np.complexfloating)):
        return [obj.real, obj.imag]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, pd.DataFrame):
        return obj.to_dict(orient="records")
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def json_dumps(payload: Dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_to_builtin, ensure_ascii=False)


def write_json_report(payload: Dict, path: Union[str, Path], generated_at: Optional[str] = None) -> Path:
    """
    Save a report as UTF-8 JSON with sorted keys

    Args:
        payload: Report body; numpy values are converted
        path: Output file
        generated_at: ISO timestamp, defaults to now (UTC)

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = dict(payload)
    document["generated_at"] = generated_at or datetime.now(timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8") as f:
        f.write(json_dumps(document))
        f.write("\n")
    logger.info("Wrote report to %s", path)
    return path
