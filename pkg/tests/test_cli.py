import csv
import os

import pytest

from loansim.cli import main
from loansim.records import RESULT_COLUMNS

TINY = "dim = 60\nnum_partitions = 3\nrandom_seed = 0\n"

# frozen output for the tiny config above, method naive: schema stability gate
GOLDEN_HEADER = ("config_hash,l_y,l_m_y,l_h_r,l_h_q,l_m,l_y_b,proportion_certain,"
                 "delta,random_seed,dim,num_partitions,l_q,sy,rejection_threshold,"
                 "budget_prop,gain_percentage,n_epochs,lr,method,quarter,n_granted,"
                 "n_explored,budget,profit_quarter,profit_cum_norm,delta_sr,"
                 "delta_fpr,delta_fnr,delta_acc")
GOLDEN_BODY = [
    "8afe7d5515c7f713,0,0,0,0,0,0,0.69999999999999996,0.050000000000000003,0,60,3,2,2,"
    "0.10000000000000001,0.80000000000000004,0.40000000000000002,40,"
    "0.050000000000000003,naive,1,0,0,0,0,,,,,",
    "8afe7d5515c7f713,0,0,0,0,0,0,0.69999999999999996,0.050000000000000003,0,60,3,2,2,"
    "0.10000000000000001,0.80000000000000004,0.40000000000000002,40,"
    "0.050000000000000003,naive,2,8,0,8,1.8000000000000003,0.22500000000000003,"
    "-0.48351648351648352,-0.33333333333333331,0.5,-0.087912087912087822",
    "8afe7d5515c7f713,0,0,0,0,0,0,0.69999999999999996,0.050000000000000003,0,60,3,2,2,"
    "0.10000000000000001,0.80000000000000004,0.40000000000000002,40,"
    "0.050000000000000003,naive,3,7,0,7,1.1102230246251565e-16,0.12000000000000002,"
    "0.030303030303030332,-0.033333333333333354,-0.099999999999999978,"
    "0.060606060606060663",
]


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_generate_line_count_and_determinism(tmp_path):
    cfg = _write(tmp_path / "c.cfg", "dim = 100\nrandom_seed = 3\n")
    out1, out2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
    assert main(["generate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["generate", "--config", cfg, "--out", str(out2)]) == 0
    lines = out1.read_text().splitlines()
    assert len(lines) == 101
    assert out1.read_bytes() == out2.read_bytes()


def test_generate_zero_bias_labels_agree(tmp_path):
    cfg = _write(tmp_path / "c.cfg", "dim = 200\n")
    out = tmp_path / "pop.csv"
    main(["generate", "--config", cfg, "--out", str(out)])
    with open(out) as fh:
        for row in csv.DictReader(fh):
            assert row["y_obs"] == row["y_real"]
            assert row["r_obs"] == row["r_latent"]


def test_generate_bad_config_names_key(tmp_path, capsys):
    cfg = _write(tmp_path / "c.cfg", "dims = 100\n")
    assert main(["generate", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 1
    assert "dims" in capsys.readouterr().err


def test_run_single_method_rows(tmp_path):
    cfg = _write(tmp_path / "c.cfg", TINY)
    out = tmp_path / "r.csv"
    assert main(["run", "--config", cfg, "--method", "naive", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 3


def test_run_all_methods_rows(tmp_path):
    cfg = _write(tmp_path / "c.cfg", TINY)
    out = tmp_path / "r.csv"
    assert main(["run", "--config", cfg, "--method", "all", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 5 * 3


def test_run_unknown_method_lists_valid(tmp_path, capsys):
    cfg = _write(tmp_path / "c.cfg", TINY)
    code = main(["run", "--config", cfg, "--method", "bogus", "--out",
                 str(tmp_path / "r.csv")])
    assert code == 1
    err = capsys.readouterr().err
    assert "naive" in err and "counterfactual_utility" in err


def test_golden_schema(tmp_path):
    cfg = _write(tmp_path / "c.cfg", TINY)
    out = tmp_path / "r.csv"
    main(["run", "--config", cfg, "--method", "naive", "--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == GOLDEN_HEADER
    assert lines[1:] == GOLDEN_BODY


def test_seed_flag_overrides(tmp_path):
    cfg = _write(tmp_path / "c.cfg", "dim = 80\nrandom_seed = 0\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["generate", "--config", cfg, "--out", str(a), "--seed", "9"])
    main(["generate", "--config", _write(tmp_path / "c9.cfg", "dim = 80\nrandom_seed = 9\n"),
          "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_env_override(tmp_path, monkeypatch):
    cfg = _write(tmp_path / "c.cfg", "dim = 80\n")
    monkeypatch.setenv("SIM_DIM", "40")
    out = tmp_path / "p.csv"
    main(["generate", "--config", cfg, "--out", str(out)])
    assert len(out.read_text().splitlines()) == 41


def test_sweep_and_resume_summary(tmp_path, capsys):
    grid = _write(tmp_path / "g.cfg",
                  "dim = 400\nnum_partitions = 4\nn_epochs = 10\nl_m_y = 0, 4\n")
    out = tmp_path / "results.csv"
    assert main(["sweep", "--config", grid, "--out", str(out)]) == 0
    assert "2 configs run" in capsys.readouterr().out
    assert len(out.read_text().splitlines()) == 1 + 2 * 5 * 4
    assert main(["sweep", "--config", grid, "--out", str(out)]) == 0
    assert "0 configs run" in capsys.readouterr().out


def test_summarize_outputs(tmp_path):
    grid = _write(tmp_path / "g.cfg",
                  "dim = 600\nnum_partitions = 4\nn_epochs = 10\n"
                  "random_seed = 0, 20\nl_m_y = 0, 4\n")
    results = tmp_path / "results.csv"
    assert main(["sweep", "--config", grid, "--out", str(results)]) == 0

    ranks = tmp_path / "ranks.csv"
    assert main(["summarize", "--input", str(results), "--which", "ranks",
                 "--out", str(ranks)]) == 0
    with open(ranks) as fh:
        rows = list(csv.DictReader(fh))
    # 2 conditions x 5 methods x 5 metrics
    assert len(rows) == 2 * 5 * 5
    assert set(r["condition"] for r in rows) == {"baseline", "l_m_y=4"}

    dist = tmp_path / "dist.csv"
    assert main(["summarize", "--input", str(results), "--which", "dist",
                 "--out", str(dist)]) == 0
    with open(dist) as fh:
        drows = list(csv.DictReader(fh))
    assert len(drows) == 5 * 5
    per_metric = [r for r in drows if r["metric"] == "delta_sr"]
    assert len(per_metric) == 5

    traces = tmp_path / "traces.csv"
    assert main(["summarize", "--input", str(results), "--which", "traces",
                 "--out", str(traces)]) == 0
    with open(traces) as fh:
        trows = list(csv.DictReader(fh))
    # 1 bias type x 5 metrics x 5 methods x 4 quarters
    assert len(trows) == 5 * 5 * 4


def test_summarize_missing_input_is_runtime_error(tmp_path, capsys):
    code = main(["summarize", "--input", str(tmp_path / "nope.csv"),
                 "--which", "dist", "--out", str(tmp_path / "d.csv")])
    assert code == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["run"])  # missing --out
    assert exc.value.code == 1


def test_header_constant_matches_module():
    assert GOLDEN_HEADER.split(",") == RESULT_COLUMNS
