"""Results-CSV contract: pinned column order, 17-significant-digit floats,
empty fields for missing metrics."""

from __future__ import annotations

import csv

from .params import RunParams
from .policies import Method
from .simulator import QuarterOutcome

RESULT_COLUMNS = [
    "config_hash",
    "l_y", "l_m_y", "l_h_r", "l_h_q", "l_m", "l_y_b",
    "proportion_certain", "delta", "random_seed",
    "dim", "num_partitions", "l_q", "sy",
    "rejection_threshold", "budget_prop", "gain_percentage",
    "n_epochs", "lr",
    "method", "quarter",
    "n_granted", "n_explored", "budget",
    "profit_quarter", "profit_cum_norm",
    "delta_sr", "delta_fpr", "delta_fnr", "delta_acc",
]

_KNOB_FLOATS = ["l_y", "l_m_y", "l_h_r", "l_h_q", "l_m", "l_y_b",
                "proportion_certain", "delta", "sy", "rejection_threshold",
                "budget_prop", "gain_percentage", "lr"]
_KNOB_INTS = ["random_seed", "dim", "num_partitions", "l_q", "n_epochs"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def run_record_rows(params: RunParams, method: Method,
                    outcomes: list[QuarterOutcome]) -> list[list[str]]:
    """One row per quarter for a finished run."""
    knobs = {name: fmt(getattr(params, name)) for name in _KNOB_FLOATS}
    knobs.update({name: fmt(getattr(params, name)) for name in _KNOB_INTS})
    config_hash = params.content_hash()
    rows = []
    for o in outcomes:
        m = o.metrics
        row = {
            "config_hash": config_hash,
            **knobs,
            "method": method.value,
            "quarter": str(o.quarter),
            "n_granted": str(m.n_granted),
            "n_explored": str(m.n_explored),
            "budget": str(o.budget),
            "profit_quarter": fmt(o.realized_profit),
            "profit_cum_norm": fmt(m.profit_cum_norm),
            "delta_sr": fmt(m.delta_sr),
            "delta_fpr": fmt(m.delta_fpr),
            "delta_fnr": fmt(m.delta_fnr),
            "delta_acc": fmt(m.delta_acc),
        }
        rows.append([row[col] for col in RESULT_COLUMNS])
    return rows


def write_results_csv(path: str, rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        writer.writerows(rows)


def read_results_rows(path: str) -> list[list[str]]:
    """Data rows of a results CSV, validating the header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULT_COLUMNS:
            raise ValueError(f"unexpected results header in {path}")
        return list(reader)


_METHOD_ORDER = {m.value: i for i, m in enumerate(Method)}


def canonical_sort(rows: list[list[str]]) -> list[list[str]]:
    """Stable row order: config hash, then method enumeration order, then quarter."""
    hash_col = RESULT_COLUMNS.index("config_hash")
    method_col = RESULT_COLUMNS.index("method")
    quarter_col = RESULT_COLUMNS.index("quarter")
    return sorted(rows, key=lambda r: (
        r[hash_col], _METHOD_ORDER.get(r[method_col], 99), int(r[quarter_col])))
