"""Grid sweep execution with resume, plus the three downstream aggregations:
final-round method rankings per bias condition, quarter-by-quarter traces,
and pooled distribution summaries.

Aggregations consume the results CSV, never in-memory state, so they are
reproducible from artifacts alone.
"""

from __future__ import annotations

import dataclasses
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError
from .params import RunParams
from .policies import Method
from .records import (RESULT_COLUMNS, canonical_sort, read_results_rows,
                      run_record_rows, write_results_csv)
from .simulator import run_all_methods

BIAS_KNOBS = ["l_y", "l_m_y", "l_h_r", "l_h_q", "l_m", "l_y_b"]
FAIRNESS_METRICS = ["delta_sr", "delta_fpr", "delta_fnr", "delta_acc"]
_PARAM_FIELDS = [f.name for f in dataclasses.fields(RunParams)]


@dataclass(frozen=True)
class SweepGrid:
    swept: dict[str, tuple]
    fixed: dict[str, object]

    def validate(self) -> None:
        for key in list(self.swept) + list(self.fixed):
            if key not in _PARAM_FIELDS:
                raise ConfigError(f"unknown grid key '{key}'")
        for key, values in self.swept.items():
            if len(values) == 0:
                raise ConfigError(f"swept key '{key}' has no values")


def table3_grid() -> SweepGrid:
    """The full production grid: five swept bias knobs, two swept method
    hyperparameters, five seeds; 3^5 * 3 * 3 * 5 = 10935 configurations."""
    return SweepGrid(
        swept={
            "l_y": (0.0, 2.0, 4.0),
            "l_m_y": (0.0, 2.0, 4.0),
            "l_h_q": (0.0, 1.0, 4.0),
            "l_m": (0.0, 1.0, 2.0),
            "l_y_b": (0.0, 2.0, 4.0),
            "proportion_certain": (0.6, 0.7, 0.8),
            "delta": (0.02, 0.05, 0.1),
            "random_seed": (0, 20, 40, 60, 80),
        },
        fixed={"dim": 20000, "num_partitions": 8, "l_q": 2, "sy": 2.0,
               "rejection_threshold": 0.1, "budget_prop": 0.8,
               "gain_percentage": 0.4, "n_epochs": 40, "lr": 0.05},
    )


def grid_from_values(values: dict[str, list]) -> SweepGrid:
    """Keys with comma-separated lists are swept; single values are fixed."""
    swept, fixed = {}, {}
    for key, vals in values.items():
        if len(vals) > 1:
            swept[key] = tuple(vals)
        else:
            fixed[key] = vals[0]
    grid = SweepGrid(swept=swept, fixed=fixed)
    grid.validate()
    return grid


def enumerate_configs(grid: SweepGrid) -> list[RunParams]:
    """Cross product of the swept values in canonical field order."""
    grid.validate()
    base = RunParams(**grid.fixed)
    keys = [name for name in _PARAM_FIELDS if name in grid.swept]
    combos = itertools.product(*(grid.swept[k] for k in keys))
    return [dataclasses.replace(base, **dict(zip(keys, combo))) for combo in combos]


def _rows_for_config(params: RunParams) -> list[list[str]]:
    results = run_all_methods(params.sim_config())
    rows = []
    for method in Method:
        rows.extend(run_record_rows(params, method, results[method]))
    return rows


@dataclass(frozen=True)
class SweepSummary:
    configs_run: int
    configs_skipped: int
    rows_written: int


def execute_sweep(grid: SweepGrid, workers: int, out_path: str) -> SweepSummary:
    """Run every configuration, streaming rows to `out_path`. Configurations
    whose rows are already complete in the file are skipped; the finalized
    file is canonically sorted, so worker count never changes the output."""
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    configs = enumerate_configs(grid)

    existing: dict[tuple, list[str]] = {}
    if os.path.exists(out_path):
        for row in read_results_rows(out_path):
            key = (row[0], row[RESULT_COLUMNS.index("method")],
                   row[RESULT_COLUMNS.index("quarter")])
            existing[key] = row

    def complete(params: RunParams) -> bool:
        h = params.content_hash()
        return all((h, m.value, str(q)) in existing
                   for m in Method
                   for q in range(1, params.num_partitions + 1))

    todo = [p for p in configs if not complete(p)]
    done_hashes = {p.content_hash() for p in configs} - {p.content_hash() for p in todo}
    kept = [row for key, row in existing.items() if key[0] in done_hashes]

    fresh: list[list[str]] = []
    # keep the file append-only while running so partial progress survives
    with open(out_path, "a", newline="") as fh:
        if fh.tell() == 0:
            fh.write(",".join(RESULT_COLUMNS) + "\n")
            fh.flush()

        def consume(rows: list[list[str]]) -> None:
            fresh.extend(rows)
            for row in rows:
                fh.write(",".join(row) + "\n")
            fh.flush()

        if workers == 1 or len(todo) <= 1:
            for params in todo:
                consume(_rows_for_config(params))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for rows in pool.map(_rows_for_config, todo):
                    consume(rows)

    final_rows = canonical_sort(kept + fresh)
    write_results_csv(out_path, final_rows)
    return SweepSummary(configs_run=len(todo),
                        configs_skipped=len(configs) - len(todo),
                        rows_written=len(final_rows))


# ---------------------------------------------------------------------------
# aggregations over a finished results CSV

_NUMERIC = ["l_y", "l_m_y", "l_h_r", "l_h_q", "l_m", "l_y_b",
            "proportion_certain", "delta", "random_seed", "dim",
            "num_partitions", "l_q", "sy", "rejection_threshold",
            "budget_prop", "gain_percentage", "n_epochs", "lr", "quarter",
            "n_granted", "n_explored", "budget", "profit_quarter",
            "profit_cum_norm", "delta_sr", "delta_fpr", "delta_fnr", "delta_acc"]


def load_records(path: str) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"config_hash": str, "method": str})
    missing = [c for c in RESULT_COLUMNS if c not in df.columns]
    if missing:
        raise ConfigError(f"results CSV {path} lacks columns: {missing}")
    for col in _NUMERIC:
        df[col] = pd.to_numeric(df[col], errors="coerce")
    return df


def _pick_hyper(df: pd.DataFrame, delta: float | None,
                proportion_certain: float | None) -> tuple[float, float]:
    """Explicit filter values, else the unique value in the records, else the
    standard aggregation setting."""
    if delta is None:
        deltas = df["delta"].unique()
        delta = float(deltas[0]) if len(deltas) == 1 else 0.05
    if proportion_certain is None:
        pcs = df["proportion_certain"].unique()
        proportion_certain = float(pcs[0]) if len(pcs) == 1 else 0.7
    return delta, proportion_certain


def _one_knob_frame(df: pd.DataFrame, delta: float | None,
                    proportion_certain: float | None) -> pd.DataFrame:
    delta, pc = _pick_hyper(df, delta, proportion_certain)
    sub = df[np.isclose(df["delta"], delta) & np.isclose(df["proportion_certain"], pc)]
    nonzero = sum((sub[k] != 0).astype(int) for k in BIAS_KNOBS)
    sub = sub[nonzero <= 1].copy()
    labels = pd.Series("baseline", index=sub.index)
    for k in BIAS_KNOBS:
        mask = sub[k] != 0
        if mask.any():
            labels[mask] = k + "=" + sub.loc[mask, k].map("{:g}".format)
    sub["condition"] = labels
    return sub


def _condition_order(frame: pd.DataFrame) -> list[str]:
    order = ["baseline"] if (frame["condition"] == "baseline").any() else []
    for k in BIAS_KNOBS:
        values = sorted(frame.loc[frame[k] != 0, k].unique())
        order.extend(f"{k}={v:g}" for v in values)
    return [c for c in order if c in set(frame["condition"])]


def _require_cells(frame: pd.DataFrame, conditions: list[str], what: str) -> None:
    missing = []
    have = set(zip(frame["condition"], frame["method"]))
    for cond in conditions:
        for m in Method:
            if (cond, m.value) not in have:
                missing.append(f"{cond}/{m.value}")
    if missing:
        raise ConfigError(f"{what} is missing configurations: {', '.join(missing)}")


def rank_table(df: pd.DataFrame, metric: str, delta: float | None = None,
               proportion_certain: float | None = None) -> pd.DataFrame:
    """Seed-averaged final-quarter metric per (bias condition, method) with
    competition ranks; disparity metrics rank ascending on absolute value,
    profit descending, ties sharing the lowest rank."""
    sub = _one_knob_frame(df, delta, proportion_certain)
    sub = sub[sub["quarter"] == sub["quarter"].max()]
    conditions = _condition_order(sub)
    if not conditions:
        raise ConfigError("no one-knob-at-a-time configurations in the records")
    _require_cells(sub, conditions, "rank table")
    values = sub.copy()
    if metric in FAIRNESS_METRICS:
        values[metric] = values[metric].abs()
        ascending = True
    else:
        ascending = False
    cell = (values.groupby(["condition", "method"])[metric].mean()
            .reset_index().rename(columns={metric: "value"}))
    cell["rank"] = (cell.groupby("condition")["value"]
                    .rank(method="min", ascending=ascending).astype(int))
    cell["metric"] = metric
    cell["condition"] = pd.Categorical(cell["condition"], categories=conditions,
                                       ordered=True)
    cell = cell.sort_values(["condition", "method"]).reset_index(drop=True)
    return cell[["condition", "method", "metric", "value", "rank"]]


def temporal_trace(df: pd.DataFrame, metric: str, bias_knob: str,
                   delta: float | None = None,
                   proportion_certain: float | None = None) -> pd.DataFrame:
    """Seed-averaged per-quarter series for each method with `bias_knob` at
    its maximum level and every other bias knob at zero."""
    if bias_knob not in BIAS_KNOBS:
        raise ConfigError(f"unknown bias knob '{bias_knob}'")
    sub = _one_knob_frame(df, delta, proportion_certain)
    level = sub[bias_knob].max()
    if not level > 0:
        raise ConfigError(f"records contain no nonzero level of {bias_knob}")
    sub = sub[sub[bias_knob] == level]
    trace = (sub.groupby(["method", "quarter"])[metric].mean()
             .reset_index().rename(columns={metric: "value"}))
    n_quarters = df["quarter"].max()
    for m in Method:
        have = trace.loc[trace["method"] == m.value, "quarter"]
        if len(have) < n_quarters:
            raise ConfigError(
                f"temporal trace for {bias_knob} is missing quarters for {m.value}")
    trace["bias_type"] = f"{bias_knob}={level:g}"
    trace["metric"] = metric
    trace = trace.sort_values(["method", "quarter"]).reset_index(drop=True)
    return trace[["bias_type", "method", "quarter", "metric", "value"]]


def distribution_summary(df: pd.DataFrame, metric: str) -> pd.DataFrame:
    """Final-quarter distribution per method pooled over every configuration;
    disparity metrics are pooled as absolute values."""
    sub = df[df["quarter"] == df["quarter"].max()].copy()
    if metric in FAIRNESS_METRICS:
        sub[metric] = sub[metric].abs()
    out = []
    for m in Method:
        vals = sub.loc[sub["method"] == m.value, metric].dropna().to_numpy()
        if len(vals) == 0:
            raise ConfigError(f"no final-quarter values of {metric} for {m.value}")
        out.append({
            "method": m.value, "metric": metric,
            "min": float(vals.min()),
            "q25": float(np.quantile(vals, 0.25)),
            "median": float(np.quantile(vals, 0.5)),
            "q75": float(np.quantile(vals, 0.75)),
            "max": float(vals.max()),
            "mean": float(vals.mean()),
            "n": int(len(vals)),
        })
    return pd.DataFrame(out)


def summarize(df: pd.DataFrame, which: str) -> pd.DataFrame:
    """The full aggregation table the CLI writes for ranks/traces/dist."""
    rank_metrics = FAIRNESS_METRICS + ["profit_cum_norm"]
    if which == "ranks":
        return pd.concat([rank_table(df, m) for m in rank_metrics],
                         ignore_index=True)
    if which == "traces":
        trace_metrics = FAIRNESS_METRICS + ["profit_quarter"]
        sub = _one_knob_frame(df, None, None)
        knobs = [k for k in BIAS_KNOBS if (sub[k] != 0).any()]
        if not knobs:
            raise ConfigError("records contain no nonzero bias conditions")
        pieces = [temporal_trace(df, metric, knob)
                  for knob in knobs for metric in trace_metrics]
        return pd.concat(pieces, ignore_index=True)
    if which == "dist":
        return pd.concat([distribution_summary(df, m) for m in rank_metrics],
                         ignore_index=True)
    raise ConfigError(f"unknown summary '{which}'; valid: ranks, traces, dist")


def write_summary_csv(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(path, index=False, float_format="%.17g")
