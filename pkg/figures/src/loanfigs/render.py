"""Deterministic figure rendering over the simulator's aggregation CSVs.

Three kinds, one per CSV schema:

    temporal  <- traces.csv  (bias_type, method, quarter, metric, value)
    heatmap   <- ranks.csv   (condition, method, metric, value, rank)
    violin    <- dist.csv    (method, metric, min, q25, median, q75, max, mean, n)
                 or a raw results CSV (final-quarter values pooled per method)

Nothing here recomputes metrics or ranks; figures are pure views. Output is
pixel-deterministic: fixed backend, canvas, colors, and no timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

DPI = 100
DELTA_METRICS = ("delta_sr", "delta_fpr", "delta_fnr", "delta_acc")
METHOD_ORDER = ["naive", "naive_exploration", "weighted_exploration",
                "uncertainty_aware", "counterfactual_utility"]

_RANK_CMAP = matplotlib.colormaps["RdYlGn_r"]


class FigureInputError(ValueError):
    """Bad figure spec or input file; maps to CLI exit code 1."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str            # temporal | heatmap | violin
    metric: str
    input: str
    out: str


def rank_to_color(rank: int) -> tuple:
    """Fixed green (rank 1) to red (rank 5) mapping."""
    return _RANK_CMAP((int(rank) - 1) / 4.0)


def _read(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except OSError as exc:
        raise FigureInputError(f"cannot read input {path}: {exc}") from None


def _select_metric(df: pd.DataFrame, metric: str, path: str) -> pd.DataFrame:
    if "metric" not in df.columns:
        raise FigureInputError(f"input {path} has no 'metric' column")
    sub = df[df["metric"] == metric]
    if sub.empty:
        have = ", ".join(sorted(df["metric"].unique()))
        raise FigureInputError(
            f"metric '{metric}' not present in {path} (have: {have})")
    return sub


def _method_columns(present) -> list[str]:
    ordered = [m for m in METHOD_ORDER if m in set(present)]
    extras = [m for m in present if m not in set(ordered)]
    return ordered + sorted(extras)


def build_temporal(df: pd.DataFrame, metric: str, path: str = "<traces>"):
    """Panels per bias type, one line per method, dashed zero reference for
    the group-gap metrics."""
    sub = _select_metric(df, metric, path)
    bias_types = list(dict.fromkeys(sub["bias_type"]))
    methods = _method_columns(list(dict.fromkeys(sub["method"])))
    fig, axes = plt.subplots(1, len(bias_types),
                             figsize=(4.0 * len(bias_types), 3.2),
                             dpi=DPI, squeeze=False, sharey=True)
    for ax, bias_type in zip(axes[0], bias_types):
        panel = sub[sub["bias_type"] == bias_type]
        for method in methods:
            series = panel[panel["method"] == method].sort_values("quarter")
            ax.plot(series["quarter"], series["value"], marker="o",
                    markersize=3, label=method)
        if metric in DELTA_METRICS:
            ax.axhline(0.0, color="black", linestyle="--", linewidth=0.8)
        quarters = sorted(panel["quarter"].unique())
        ax.set_xticks(quarters)
        ax.set_xlabel("quarter")
        ax.set_title(bias_type, fontsize=10)
    axes[0][0].set_ylabel(metric)
    axes[0][-1].legend(fontsize=7, loc="best")
    fig.tight_layout()
    return fig


def build_heatmap(df: pd.DataFrame, metric: str, path: str = "<ranks>"):
    """Condition-by-method grid, cell color encodes rank (green best, red
    worst), annotation shows the seed-averaged metric value."""
    sub = _select_metric(df, metric, path)
    conditions = list(dict.fromkeys(sub["condition"]))
    if "baseline" in conditions:
        conditions = ["baseline"] + [c for c in conditions if c != "baseline"]
    methods = _method_columns(list(dict.fromkeys(sub["method"])))
    ranks = np.zeros((len(conditions), len(methods)), dtype=int)
    values = np.zeros_like(ranks, dtype=float)
    cell = sub.set_index(["condition", "method"])
    for i, cond in enumerate(conditions):
        for j, method in enumerate(methods):
            try:
                row = cell.loc[(cond, method)]
            except KeyError:
                raise FigureInputError(
                    f"missing cell ({cond}, {method}) in {path}") from None
            ranks[i, j] = int(np.atleast_1d(row["rank"])[0])
            values[i, j] = float(np.atleast_1d(row["value"])[0])

    colors = np.array([[rank_to_color(r) for r in row] for row in ranks])
    fig, ax = plt.subplots(
        figsize=(1.6 * len(methods) + 1.5, 0.55 * len(conditions) + 1.4), dpi=DPI)
    ax.imshow(colors, aspect="auto", interpolation="nearest")
    for i in range(len(conditions)):
        for j in range(len(methods)):
            ax.text(j, i, f"{values[i, j]:.3f}", ha="center", va="center",
                    fontsize=8)
    ax.set_xticks(range(len(methods)))
    ax.set_xticklabels(methods, rotation=30, ha="right", fontsize=8)
    ax.set_yticks(range(len(conditions)))
    ax.set_yticklabels(conditions, fontsize=8)
    if "baseline" in conditions:
        ax.axhline(0.5, color="black", linewidth=1.2)
    ax.set_title(f"{metric}: rank 1 (green) to 5 (red)", fontsize=10)
    fig.tight_layout()
    return fig


def _violin_frame(df: pd.DataFrame, metric: str, path: str) -> pd.DataFrame:
    if {"q25", "median", "q75"} <= set(df.columns):
        return _select_metric(df, metric, path)
    if "config_hash" in df.columns:  # raw results: pool the final quarter
        if metric not in df.columns:
            raise FigureInputError(f"metric column '{metric}' missing in {path}")
        final = df[df["quarter"] == df["quarter"].max()].copy()
        vals = final[metric].abs() if metric in DELTA_METRICS else final[metric]
        final["_value"] = vals
        rows = []
        for method, group in final.groupby("method"):
            v = group["_value"].dropna().to_numpy()
            rows.append({
                "method": method, "metric": metric, "min": v.min(),
                "q25": np.quantile(v, 0.25), "median": np.quantile(v, 0.5),
                "q75": np.quantile(v, 0.75), "max": v.max(),
                "mean": v.mean(), "n": len(v)})
        return pd.DataFrame(rows)
    raise FigureInputError(
        f"input {path} is neither a dist.csv nor a raw results CSV")


def build_violin(df: pd.DataFrame, metric: str, path: str = "<dist>"):
    """One quantile-profile violin per method from the five-number summary;
    the median is a horizontal bar, the mean a dot."""
    sub = _violin_frame(df, metric, path)
    methods = _method_columns(list(sub["method"]))
    sub = sub.set_index("method")
    fig, ax = plt.subplots(figsize=(1.7 * len(methods) + 1.0, 3.4), dpi=DPI)
    half_widths = np.array([0.06, 0.32, 0.38, 0.32, 0.06])
    for j, method in enumerate(methods):
        row = sub.loc[method]
        ys = np.array([row["min"], row["q25"], row["median"], row["q75"], row["max"]],
                      dtype=float)
        xs_r = j + half_widths
        xs_l = j - half_widths
        ax.fill(np.concatenate([xs_r, xs_l[::-1]]),
                np.concatenate([ys, ys[::-1]]),
                alpha=0.6, linewidth=0.8, edgecolor="black")
        ax.hlines(row["median"], j - 0.38, j + 0.38, color="black", linewidth=1.2)
        ax.plot([j], [row["mean"]], marker="o", color="black", markersize=3)
    ax.set_xticks(range(len(methods)))
    ax.set_xticklabels(methods, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(metric)
    ax.set_title(f"{metric}: distribution over all conditions", fontsize=10)
    fig.tight_layout()
    return fig


_BUILDERS = {"temporal": build_temporal, "heatmap": build_heatmap,
             "violin": build_violin}


def render(spec: FigureSpec) -> None:
    """Write the figure for the spec; identical inputs give identical bytes."""
    if spec.kind not in _BUILDERS:
        raise FigureInputError(
            f"unknown kind '{spec.kind}'; valid: {', '.join(_BUILDERS)}")
    df = _read(spec.input)
    fig = _BUILDERS[spec.kind](df, spec.metric, spec.input)
    try:
        fig.savefig(spec.out, format="png", metadata={"Software": None})
    finally:
        plt.close(fig)
