"""CSV and JSON input/output for count tables, sweeps and audit reports."""

import json
import logging
import math
import sys
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.audit import AuditReport
from ..core.config import Config
from ..core.counts import CountTable, PreparedState, StatePreparationSet
from ..core.exceptions import CountTableError, MalformedInputError
from ..core.measurement import OUTCOMES
from ..core.noise import ExperimentRun
from ..core.relation import SweepResult

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SWEEP_COLUMNS = [
    "phi_deg",
    "eps_analytic",
    "eta_analytic",
    "eps_est",
    "eps_unc",
    "eta_est",
    "eta_unc",
    "sigma_a",
    "sigma_b",
    "heis_prod",
    "ozawa_sum",
    "bound",
    "heis_class",
    "ozawa_class",
]

SIMULATE_COLUMNS = [
    "phi_deg",
    "prepared_state",
    "m1",
    "m2",
    "count",
    "normalized_intensity",
    "true_probability",
]

# Angles that estimate reads back are written at round-trip precision.
SIMULATE_EXACT_COLUMNS = ("phi_deg",)

AUDIT_COLUMNS = [
    "kind",
    "draws",
    "min_slack",
    "violations",
    "heisenberg_violations",
    "worst_case",
]

# Columns an estimate input must provide; the others of the simulate schema
# are optional.
_COUNT_COLUMNS = ["phi_deg", "prepared_state", "m1", "m2", "count"]
# Header is line 1.
_FIRST_DATA_LINE = 2


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """One row per detuning angle in the sweep schema."""
    rows = []
    for record in result.records:
        verdicts = record.classification
        heis_class = verdicts.heisenberg.value if verdicts else ""
        ozawa_class = verdicts.ozawa.value if verdicts else ""
        rows.append(
            {
                "phi_deg": record.phi_deg,
                "eps_analytic": record.eps_analytic,
                "eta_analytic": record.eta_analytic,
                "eps_est": record.eps.value,
                "eps_unc": record.eps.std_uncertainty,
                "eta_est": record.eta.value,
                "eta_unc": record.eta.std_uncertainty,
                "sigma_a": record.sigma_a.value,
                "sigma_b": record.sigma_b.value,
                "heis_prod": record.heisenberg_product.value,
                "ozawa_sum": record.ozawa_sum.value,
                "bound": record.bound,
                "heis_class": heis_class,
                "ozawa_class": ozawa_class,
            }
        )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def simulate_frame(
    runs: Sequence[ExperimentRun], phi_deg_grid: Optional[Sequence[float]] = None
) -> pd.DataFrame:
    """Sixteen rows per detuning angle: four prepared states times four outcomes.

    Pass the grid in degrees the runs were made from to write those angles
    instead of converting the radians back.
    """
    if phi_deg_grid is not None and len(phi_deg_grid) != len(runs):
        raise ValueError("Need one angle in degrees per experiment run")
    rows = []
    for index, run in enumerate(runs):
        if phi_deg_grid is None:
            phi_deg = math.degrees(run.phi)
        else:
            phi_deg = float(phi_deg_grid[index])
        for state in PreparedState:
            table = run.tables[state]
            intensities = table.normalized()
            truth = run.true_probabilities[state]
            for cell, (m1, m2) in enumerate(OUTCOMES):
                rows.append(
                    {
                        "phi_deg": phi_deg,
                        "prepared_state": state.value,
                        "m1": m1,
                        "m2": m2,
                        "count": int(round(table.counts[cell])),
                        "normalized_intensity": float(intensities[cell]),
                        "true_probability": truth[(m1, m2)],
                    }
                )
    return pd.DataFrame(rows, columns=SIMULATE_COLUMNS)


def audit_frame(reports: Sequence[AuditReport]) -> pd.DataFrame:
    """One row per audit; the worst case is embedded as a JSON string."""
    rows = [
        {
            "kind": report.kind,
            "draws": report.draws,
            "min_slack": report.min_slack,
            "violations": report.violations,
            "heisenberg_violations": report.heisenberg_violations,
            "worst_case": json.dumps(report.worst_case, sort_keys=True),
        }
        for report in reports
    ]
    return pd.DataFrame(rows, columns=AUDIT_COLUMNS)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _decode_embedded(records: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    for record in records:
        if isinstance(record.get("worst_case"), str):
            record["worst_case"] = json.loads(record["worst_case"])
    return records


def render(
    frame: pd.DataFrame,
    fmt: str = "csv",
    config: Optional[Mapping[str, Any]] = None,
    exact_columns: Sequence[str] = (),
) -> str:
    """CSV text with six significant digits, or JSON at full precision.

    ``exact_columns`` are written in CSV at full round-trip precision.
    """
    if fmt not in Config.OUTPUT_FORMATS:
        raise ValueError(f"Unsupported output format: {fmt}")
    if fmt == "json":
        records = _decode_embedded(frame.to_dict(orient="records"))
        payload = {"config": dict(config or {}), "records": records}
        return json.dumps(payload, indent=2, default=_to_builtin) + "\n"
    if exact_columns:
        frame = frame.copy()
        for column in exact_columns:
            frame[column] = [repr(float(value)) for value in frame[column]]
    return frame.to_csv(
        index=False, float_format=Config.csv_float_format(), lineterminator="\n"
    )


def write_output(
    frame: pd.DataFrame,
    output: Optional[PathLike] = None,
    fmt: str = "csv",
    config: Optional[Mapping[str, Any]] = None,
    exact_columns: Sequence[str] = (),
) -> None:
    """Write to ``output`` (UTF-8, LF line endings) or to stdout when None."""
    text = render(frame, fmt, config, exact_columns)
    if output is None or str(output) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(output)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    logger.info("Wrote %d rows to %s", len(frame), path)


def _parse_field(raw: str, name: str, line: int, convert: Any) -> Any:
    try:
        return convert(raw.strip())
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"invalid {name} {raw!r}: {exc}", line=line) from exc


def _parse_sign(raw: str) -> int:
    value = float(raw)
    if value not in (1.0, -1.0):
        raise ValueError("outcome must be +1 or -1")
    return int(value)


def _parse_count(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value) or value < 0:
        raise ValueError("count must be finite and nonnegative")
    return value


def _parse_angle(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("angle must be finite")
    return value


def read_counts(path: PathLike) -> List[StatePreparationSet]:
    """Parse a count file in the simulate schema into one set per detuning angle.

    Rows may come in any order. Every angle needs all four prepared states,
    and every state all four outcomes, each exactly once.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as exc:
        raise MalformedInputError("file is empty", line=1) from exc
    except pd.errors.ParserError as exc:
        raise MalformedInputError(f"unreadable CSV: {exc}") from exc
    missing = [column for column in _COUNT_COLUMNS if column not in frame.columns]
    if missing:
        raise MalformedInputError(f"missing column(s): {', '.join(missing)}", line=1)
    if frame.empty:
        raise MalformedInputError("no data rows", line=_FIRST_DATA_LINE)

    cells: Dict[float, Dict[PreparedState, Dict[Tuple[int, int], float]]]
    cells = defaultdict(lambda: defaultdict(dict))
    rows = frame[_COUNT_COLUMNS].itertuples(index=False, name=None)
    for offset, (phi_raw, state_raw, m1_raw, m2_raw, count_raw) in enumerate(rows):
        line = _FIRST_DATA_LINE + offset
        phi_deg = _parse_field(phi_raw, "phi_deg", line, _parse_angle)
        state = _parse_field(
            state_raw, "prepared_state", line, PreparedState.parse
        )
        m1 = _parse_field(m1_raw, "m1", line, _parse_sign)
        m2 = _parse_field(m2_raw, "m2", line, _parse_sign)
        count = _parse_field(count_raw, "count", line, _parse_count)
        block = cells[phi_deg][state]
        if (m1, m2) in block:
            raise MalformedInputError(
                f"duplicate outcome ({m1:+d}, {m2:+d}) for {state.value} "
                f"at phi_deg={phi_deg:g}",
                line=line,
            )
        block[(m1, m2)] = count

    sets = []
    for phi_deg in sorted(cells):
        states = cells[phi_deg]
        absent = [state.value for state in PreparedState if state not in states]
        if absent:
            raise CountTableError(
                f"phi_deg={phi_deg:g}: missing prepared state(s) {', '.join(absent)}"
            )
        tables = {}
        for state, block in states.items():
            try:
                tables[state] = CountTable.from_mapping(block)
            except CountTableError as exc:
                raise CountTableError(
                    f"phi_deg={phi_deg:g}, state {state.value}: {exc}"
                ) from exc
        sets.append(StatePreparationSet(tables=tables, phi=math.radians(phi_deg)))
    logger.info("Read %d detuning setting(s) from %s", len(sets), path)
    return sets
