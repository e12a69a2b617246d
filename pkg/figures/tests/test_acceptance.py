"""Acceptance: byte-deterministic rendering, uniform color for all-tied rank
tables, and figures never touching their inputs."""

import hashlib

import numpy as np
import pandas as pd

from loanfigs.render import FigureSpec, build_heatmap, rank_to_color, render

METHODS = ["naive", "naive_exploration", "weighted_exploration",
           "uncertainty_aware", "counterfactual_utility"]


def _write_inputs(tmp_path):
    traces = tmp_path / "traces.csv"
    pd.DataFrame([
        {"bias_type": "l_m_y=4", "method": m, "quarter": q,
         "metric": "delta_sr", "value": 0.02 * q + 0.01 * j}
        for j, m in enumerate(METHODS) for q in range(1, 9)
    ]).to_csv(traces, index=False)

    ranks = tmp_path / "ranks.csv"
    pd.DataFrame([
        {"condition": c, "method": m, "metric": "profit_cum_norm",
         "value": 0.2, "rank": 1}
        for c in ("baseline", "l_y=4") for m in METHODS
    ]).to_csv(ranks, index=False)

    dist = tmp_path / "dist.csv"
    pd.DataFrame([
        {"method": m, "metric": "delta_sr", "min": 0.0, "q25": 0.05,
         "median": 0.1, "q75": 0.2, "max": 0.4, "mean": 0.12, "n": 30}
        for m in METHODS
    ]).to_csv(dist, index=False)
    return {"temporal": traces, "heatmap": ranks, "violin": dist}


def test_pixel_identical_rerender(tmp_path):
    inputs = _write_inputs(tmp_path)
    metric = {"temporal": "delta_sr", "heatmap": "profit_cum_norm",
              "violin": "delta_sr"}
    for kind, path in inputs.items():
        a = tmp_path / f"{kind}_a.png"
        b = tmp_path / f"{kind}_b.png"
        render(FigureSpec(kind, metric[kind], str(path), str(a)))
        render(FigureSpec(kind, metric[kind], str(path), str(b)))
        assert a.read_bytes() == b.read_bytes(), kind


def test_all_tied_heatmap_is_uniformly_rank_one(tmp_path):
    inputs = _write_inputs(tmp_path)
    fig = build_heatmap(pd.read_csv(inputs["heatmap"]), "profit_cum_norm")
    fig.canvas.draw()
    buf = np.asarray(fig.canvas.buffer_rgba())
    ax = fig.axes[0]
    height = buf.shape[0]
    expected = tuple(int(round(255 * c)) for c in rank_to_color(1))
    samples = []
    for i in range(2):          # conditions
        for j in range(5):      # methods
            # sample away from the centered annotation text
            x_disp, y_disp = ax.transData.transform((j, i + 0.35))
            pixel = buf[height - int(round(y_disp)), int(round(x_disp))]
            samples.append(tuple(int(v) for v in pixel))
    assert all(s == samples[0] for s in samples)
    assert samples[0] == expected


def test_view_purity_inputs_unchanged(tmp_path):
    inputs = _write_inputs(tmp_path)
    metric = {"temporal": "delta_sr", "heatmap": "profit_cum_norm",
              "violin": "delta_sr"}

    def digest():
        return {k: hashlib.sha256(p.read_bytes()).hexdigest()
                for k, p in inputs.items()}

    before = digest()
    outs = {}
    for kind, path in inputs.items():
        out = tmp_path / f"{kind}.png"
        render(FigureSpec(kind, metric[kind], str(path), str(out)))
        outs[kind] = out
    for out in outs.values():
        out.unlink()
    for kind, path in inputs.items():
        render(FigureSpec(kind, metric[kind], str(path), str(outs[kind])))
    assert digest() == before
