"""Acceptance gate: every criterion prints one [PASS]/[FAIL] line (run with
pytest -s to see them) and asserts at its stated tolerance.

The no-bias profit-parity clause is known to be structurally unattainable at
the fixed decision constants; its test states the arithmetic in the failure
message and is intentionally left red rather than loosened.
"""

import csv
import dataclasses
import itertools
import time

import numpy as np
import pytest

from loansim.glm import (LogisticModel, UtilityParams, ci_halfwidth_batch,
                         counterfactual_objective_and_grad, fit_logloss,
                         logloss_value_and_grad, predict_batch)
from loansim.metrics import fairness_row, oracle_reward, policy_reward, regret, utility
from loansim.params import RunParams
from loansim.policies import (Method, PolicyConfig, decide_counterfactual,
                              decide_naive, decide_naive_exploration,
                              decide_uncertainty_aware,
                              decide_weighted_exploration, quarter_budget)
from loansim.records import RESULT_COLUMNS, run_record_rows
from loansim.rng import substream
from loansim.simulator import run_method, simulate
from loansim.sweep import SweepGrid, enumerate_configs, execute_sweep, table3_grid
from loansim.synthgen import (BiasConfig, Cohort, Population, feature_matrix,
                              generate_population, partition_quarters)
from oracles import bootstrap_halfwidths, central_difference_grad

SEEDS = [0, 20, 40, 60, 80]


def _report(name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    print(f"[{tag}] {name}{suffix}")


# --------------------------------------------------------------------------
# shared expensive runs

@pytest.fixture(scope="module")
def desk_runs():
    cfg = RunParams(dim=2000, num_partitions=8).sim_config()
    return {m: simulate(cfg, m) for m in Method}, cfg


@pytest.fixture(scope="module")
def no_bias_finals():
    finals = {m: [] for m in Method}
    for seed in SEEDS:
        cfg = RunParams(dim=20000, num_partitions=8, random_seed=seed).sim_config()
        for m in Method:
            finals[m].append(run_method(cfg, m)[-1])
    return finals


def test_utility_quadrants():
    g, l = 0.4, 1.0
    ok = (utility(1, 1, g, l) == g and utility(1, 0, g, l) == -l
          and utility(0, 1, g, l) == -l and utility(0, 0, g, l) == g)
    _report("utility quadrant signs (exhaustive, exact)", ok)
    assert ok


def test_oracle_dominance_and_regret():
    up = UtilityParams()
    worst = np.inf
    for trial in range(50):
        pop = generate_population(BiasConfig(), 400, trial)
        cohort = partition_quarters(pop, 2, trial)[0]  # n = 200
        rng = substream(trial, "acc", "p")
        p_hat = rng.random(200)
        ci = rng.random(200) * 0.2
        budget = quarter_budget(cohort, 0.8)
        pc = PolicyConfig()
        decision_sets = [
            decide_naive(p_hat, budget, pc),
            decide_naive_exploration(p_hat, budget, pc, substream(trial, "a")),
            decide_weighted_exploration(p_hat, budget, pc, substream(trial, "b")),
            decide_uncertainty_aware(p_hat, ci, budget, pc, substream(trial, "c")),
            decide_counterfactual(p_hat, budget, pc),
        ]
        star = oracle_reward(cohort, up)
        for decisions in decision_sets:
            reward = policy_reward(decisions, cohort, up)
            gap = regret(reward, star)
            worst = min(worst, gap)
            assert reward <= star
            assert gap >= 0.0
    _report("oracle dominance and nonnegative regret (50 cohorts, n=200)", True,
            f"min regret {worst:.3g}")


def test_gradient_checks_both_trainers():
    h = 1e-5
    worst = 0.0
    up = UtilityParams()
    for trial in range(20):
        rng = substream(trial, "grad")
        X = rng.normal(size=(10, 2))
        y = rng.integers(0, 2, 10).astype(float)
        Xu = rng.normal(size=(5, 2))
        w = rng.normal(size=2)
        b = float(rng.normal())
        tau = float(rng.uniform(0.2, 0.8))

        _, gw, gb = logloss_value_and_grad(w, b, X, y)
        fw, fb = central_difference_grad(
            lambda wq, bq: logloss_value_and_grad(wq, bq, X, y)[0], w, b, h)
        worst = max(worst, np.max(np.abs(gw - fw)), abs(gb - fb))

        _, gw, gb = counterfactual_objective_and_grad(w, b, X, y, tau, up, Xu)
        fw, fb = central_difference_grad(
            lambda wq, bq: counterfactual_objective_and_grad(
                wq, bq, X, y, tau, up, Xu)[0], w, b, h)
        worst = max(worst, np.max(np.abs(gw - fw)), abs(gb - fb))
    ok = worst < 1e-5
    _report("analytic gradients vs central differences (both trainers)", ok,
            f"max component error {worst:.2e}")
    assert ok


def test_delta_method_sanity():
    rng = substream(0, "delta", "data")
    X = rng.normal(size=(500, 2))
    z = 1.2 * X[:, 0] - 0.6 * X[:, 1] + 0.2
    y = (rng.random(500) < 1 / (1 + np.exp(-z))).astype(float)
    model = LogisticModel(n_features=2)
    fit_logloss(model, X, y, epochs=20000, lr=1.0)

    probes = X[substream(1, "delta", "probes").choice(500, size=20, replace=False)]
    ours = ci_halfwidth_batch(model, probes)
    assert np.all(ours >= 0)

    # drive |w.x + b| -> inf along the weight direction
    direction = model.weights / np.linalg.norm(model.weights)
    saturated = ci_halfwidth_batch(model, np.outer([200.0, -200.0], direction))
    assert np.all(saturated < 1e-10)

    boot = bootstrap_halfwidths(X, y, probes, n_resamples=2000, seed=7)
    ratios = ours / boot
    ok = np.all((ratios >= 0.5) & (ratios <= 2.0))
    _report("delta-method half-widths vs bootstrap oracle (factor [0.5, 2.0])",
            ok, f"ratio range [{ratios.min():.2f}, {ratios.max():.2f}]")
    assert ok


def test_selective_label_invariant(desk_runs):
    results, cfg = desk_runs
    pop = generate_population(cfg.bias, cfg.dim, cfg.seed)
    cohorts = partition_quarters(pop, cfg.num_partitions, cfg.seed)
    x1 = feature_matrix(cohorts[0], cfg.bias, cfg.include_sensitive)
    mu, sd = x1.mean(axis=0), x1.std(axis=0)
    sd[sd == 0.0] = 1.0
    for method, result in results.items():
        expected_X = [(x1 - mu) / sd]
        expected_y = [cohorts[0].applicants.y_obs.astype(float)]
        for cohort, outcome in zip(cohorts[1:], result.outcomes[1:]):
            X = (feature_matrix(cohort, cfg.bias, cfg.include_sensitive) - mu) / sd
            granted = [d.applicant_index for d in outcome.decisions if d.granted]
            expected_X.append(X[granted])
            expected_y.append(cohort.applicants.y_obs[granted].astype(float))
        assert np.array_equal(result.model.training_features(), np.vstack(expected_X)), method
        assert np.array_equal(result.model.training_labels(),
                              np.concatenate(expected_y)), method
    _report("selective labels: training set is exactly base quarter + grants "
            "(all 5 methods, instrumented)", True)


def test_budget_safety(desk_runs):
    results, _ = desk_runs
    violations = sum(
        1
        for result in results.values()
        for o in result.outcomes[1:]
        if o.metrics.n_granted > o.budget)
    _report("budget safety: granted <= budget in every (method, quarter)",
            violations == 0, f"{violations} violations")
    assert violations == 0


def test_no_bias_baseline_group_parity(no_bias_finals):
    started = time.time()
    means = {m: float(np.mean([abs(o.metrics.delta_sr) for o in finals]))
             for m, finals in no_bias_finals.items()}
    ok = all(v < 0.05 for v in means.values())
    detail = ", ".join(f"{m.value}={v:.3f}" for m, v in means.items())
    _report("no-bias baseline: every method's seed-mean |dSR| < 0.05", ok, detail)
    assert ok
    assert time.time() - started < 600


def test_no_bias_baseline_profit_parity(no_bias_finals):
    profits = {m: float(np.mean([o.metrics.profit_cum_norm for o in finals]))
               for m, finals in no_bias_finals.items()}
    worst_pair, worst_gap = None, 0.0
    for a, b in itertools.combinations(Method, 2):
        gap = abs(profits[a] - profits[b]) / max(abs(profits[a]), abs(profits[b]))
        if gap > worst_gap:
            worst_pair, worst_gap = (a.value, b.value), gap
    ok = worst_gap <= 0.10
    _report("no-bias baseline: pairwise profit_cum_norm within 10% relative",
            ok, f"worst {worst_pair} gap {worst_gap:.1%}")
    assert ok, (
        f"worst pairwise profit gap {worst_gap:.1%} ({worst_pair}); structurally "
        "unattainable at the fixed constants: uniform exploration draws "
        "ceil(delta*pool) grants from the above-floor pool (repay ~0.32) in place "
        "of marginal ranked accepts (repay ~0.79), and at gain=0.4/loss=1 that "
        "costs 12-20% of ranked-accept profit for any ranking quality")


def test_y_measurement_bias_separation():
    finals = {}
    for m in (Method.NAIVE, Method.COUNTERFACTUAL_UTILITY):
        finals[m] = []
        for seed in SEEDS:
            cfg = RunParams(dim=20000, num_partitions=8, random_seed=seed,
                            l_m_y=4.0).sim_config()
            finals[m].append(run_method(cfg, m)[-1])
    dsr = {m: float(np.mean([abs(o.metrics.delta_sr) for o in v]))
           for m, v in finals.items()}
    profit = {m: float(np.mean([o.metrics.profit_cum_norm for o in v]))
              for m, v in finals.items()}
    cf, nv = Method.COUNTERFACTUAL_UTILITY, Method.NAIVE
    ok = dsr[cf] < dsr[nv] and profit[cf] >= 0.95 * profit[nv]
    _report("label measurement bias: counterfactual beats naive on |dSR| at "
            ">= 95% of its profit", ok,
            f"|dSR| {dsr[cf]:.3f} vs {dsr[nv]:.3f}, profit ratio "
            f"{profit[cf] / profit[nv]:.3f}")
    assert dsr[cf] < dsr[nv]
    assert profit[cf] >= 0.95 * profit[nv]


def test_reduction_identity_full_run():
    params = dataclasses.replace(RunParams(dim=2000, num_partitions=8),
                                 proportion_certain=1.0)
    cfg = params.sim_config()
    rows_naive = run_record_rows(params, Method.NAIVE,
                                 run_method(cfg, Method.NAIVE))
    rows_explore = run_record_rows(params, Method.NAIVE_EXPLORATION,
                                   run_method(cfg, Method.NAIVE_EXPLORATION))
    method_col = RESULT_COLUMNS.index("method")

    def strip(rows):
        return [",".join(r[:method_col] + r[method_col + 1:]) for r in rows]

    ok = strip(rows_naive) == strip(rows_explore)
    _report("reduction identity: exploration at proportion_certain=1.0 equals "
            "naive (CSV bytes modulo method column)", ok)
    assert ok


def test_sweep_determinism_across_workers(tmp_path):
    grid = SweepGrid(swept={"l_m_y": (0.0, 4.0)},
                     fixed={"dim": 400, "num_partitions": 4, "n_epochs": 10})
    out1 = tmp_path / "w1.csv"
    out4 = tmp_path / "w4.csv"
    execute_sweep(grid, workers=1, out_path=str(out1))
    execute_sweep(grid, workers=4, out_path=str(out4))
    ok = out1.read_bytes() == out4.read_bytes()
    _report("sweep determinism: workers=1 and workers=4 write identical "
            "canonically-sorted CSVs", ok)
    assert ok


def test_sweep_arithmetic(tmp_path):
    n_full = len(enumerate_configs(table3_grid()))
    grid = SweepGrid(swept={"l_y": (0.0, 4.0)},
                     fixed={"dim": 400, "num_partitions": 4, "n_epochs": 10})
    out = tmp_path / "toy.csv"
    summary = execute_sweep(grid, workers=1, out_path=str(out))
    rows_ok = summary.rows_written == 2 * 5 * 4
    ok = n_full == 10935 and rows_ok
    _report("sweep arithmetic: full grid = 10935 configs; rows = configs x "
            "methods x quarters", ok, f"full={n_full}, toy rows={summary.rows_written}")
    assert n_full == 10935
    assert rows_ok


def test_metrics_oracle_and_antisymmetry():
    # hand-enumerated cube: one applicant per (a, y, granted) cell
    cells = list(itertools.product([0, 1], [0, 1], [0, 1]))
    pop = Population(
        a=np.array([c[0] for c in cells]),
        r_latent=np.zeros(8), q=np.zeros(8, dtype=int), s_latent=np.zeros(8),
        y_real=np.array([c[1] for c in cells]),
        r_obs=np.zeros(8), y_obs=np.array([c[1] for c in cells]), pi_s=0.0)
    from loansim.policies import PolicyDecision, Provenance
    decisions = [PolicyDecision(i, bool(c[2]),
                                Provenance.CertainAccept if c[2] else Provenance.Denied,
                                0.5)
                 for i, c in enumerate(cells)]
    row = fairness_row(decisions, Cohort(pop, 1))
    hand_ok = (row.delta_sr == 0.0 and row.delta_fpr == 0.0
               and row.delta_fnr == 0.0 and row.delta_acc == 0.0)

    sym_ok = True
    for trial in range(100):
        rng = substream(trial, "anti")
        n = int(rng.integers(4, 60))
        a = rng.integers(0, 2, n)
        if a.min() == a.max():
            a[0], a[-1] = 0, 1
        y = rng.integers(0, 2, n)
        grants = rng.integers(0, 2, n)
        base = Population(a, np.zeros(n), np.zeros(n, dtype=int), np.zeros(n),
                          y, np.zeros(n), y, 0.0)
        flip = Population(1 - a, np.zeros(n), np.zeros(n, dtype=int), np.zeros(n),
                          y, np.zeros(n), y, 0.0)
        decs = [PolicyDecision(i, bool(g),
                               Provenance.CertainAccept if g else Provenance.Denied,
                               0.5)
                for i, g in enumerate(grants)]
        r1 = fairness_row(decs, Cohort(base, 1))
        r2 = fairness_row(decs, Cohort(flip, 1))
        for name in ("delta_sr", "delta_fpr", "delta_fnr", "delta_acc"):
            v, w = getattr(r1, name), getattr(r2, name)
            if v is None:
                sym_ok = sym_ok and w is None
            else:
                sym_ok = sym_ok and abs(v + w) < 1e-12
    ok = hand_ok and sym_ok
    _report("metrics oracle: hand-enumerated cube exact; delta antisymmetry "
            "under group swap (100 cohorts)", ok)
    assert hand_ok
    assert sym_ok
