"""Sequential decision loop: a base quarter fitted on full observed labels,
then per-quarter decide -> selective feedback -> model update.

Only granted applicants ever contribute training rows after the base quarter;
the bank records the observed (possibly distorted) label, while evaluation
uses ground truth throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .glm import (LogisticModel, UtilityParams, ci_halfwidth_batch,
                  fit_counterfactual_utility, fit_logloss, predict_batch)
from .metrics import MetricRow, fairness_row, normalize_profit, utility
from .policies import (Method, PolicyConfig, decide_counterfactual,
                       decide_naive, decide_naive_exploration,
                       decide_uncertainty_aware, decide_weighted_exploration,
                       dynamic_threshold, quarter_budget)
from .rng import substream
from .synthgen import BiasConfig, Cohort, feature_matrix, generate_population, partition_quarters


@dataclass(frozen=True)
class SimConfig:
    bias: BiasConfig = field(default_factory=BiasConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    utility: UtilityParams = field(default_factory=UtilityParams)
    dim: int = 20000
    num_partitions: int = 8
    budget_prop: float = 0.8
    n_epochs: int = 40
    lr: float = 0.05
    seed: int = 0
    include_sensitive: bool = True

    def validate(self) -> None:
        self.bias.validate()
        self.policy.validate()
        self.utility.validate()
        if self.num_partitions < 2:
            raise ConfigError(f"num_partitions must be >= 2, got {self.num_partitions}")
        if self.dim < self.num_partitions:
            raise ConfigError(
                f"dim={self.dim} must be >= num_partitions={self.num_partitions}")
        if not 0.0 < self.budget_prop <= 1.0:
            raise ConfigError(f"budget_prop must lie in (0,1], got {self.budget_prop}")


@dataclass(frozen=True)
class QuarterOutcome:
    quarter: int
    decisions: list
    budget: int
    realized_profit: float
    counterfactual_profit: float
    metrics: MetricRow
    base_quarter: bool = False


@dataclass(frozen=True)
class SimResult:
    outcomes: list[QuarterOutcome]
    model: LogisticModel


def _decide(method: Method, p_hat, ci, budget, cfg: SimConfig, rng):
    if method is Method.NAIVE:
        return decide_naive(p_hat, budget, cfg.policy)
    if method is Method.NAIVE_EXPLORATION:
        return decide_naive_exploration(p_hat, budget, cfg.policy, rng)
    if method is Method.WEIGHTED_EXPLORATION:
        return decide_weighted_exploration(p_hat, budget, cfg.policy, rng)
    if method is Method.UNCERTAINTY_AWARE:
        return decide_uncertainty_aware(p_hat, ci, budget, cfg.policy, rng)
    if method is Method.COUNTERFACTUAL_UTILITY:
        return decide_counterfactual(p_hat, budget, cfg.policy)
    raise ConfigError(f"unknown method {method!r}")


def _run_on_cohorts(cohorts: list[Cohort], cfg: SimConfig, method: Method) -> SimResult:
    up = cfg.utility
    x1 = feature_matrix(cohorts[0], cfg.bias, cfg.include_sensitive)
    # standardize on the base quarter's statistics and keep that affine map
    # fixed for the whole run: gradient descent at these epoch counts is far
    # from convergence on raw scales, and a raw binary column shares its
    # gradient with the intercept, which leaks global calibration error into
    # a group coefficient
    mu = x1.mean(axis=0)
    sd = x1.std(axis=0)
    sd[sd == 0.0] = 1.0
    x1 = (x1 - mu) / sd
    model = LogisticModel(n_features=x1.shape[1])
    fit_logloss(model, x1, cohorts[0].applicants.y_obs, cfg.n_epochs, cfg.lr)

    outcomes = [QuarterOutcome(
        quarter=1, decisions=[], budget=0, realized_profit=0.0,
        counterfactual_profit=0.0, metrics=MetricRow(), base_quarter=True)]

    profits, budgets = [], []
    for cohort in cohorts[1:]:
        t = cohort.quarter_index
        X = (feature_matrix(cohort, cfg.bias, cfg.include_sensitive) - mu) / sd
        p_hat = predict_batch(model, X)
        ci = (ci_halfwidth_batch(model, X)
              if method is Method.UNCERTAINTY_AWARE else None)
        budget = quarter_budget(cohort, cfg.budget_prop)
        rng = substream(cfg.seed, "explore", method.value, f"q{t}")
        decisions = _decide(method, p_hat, ci, budget, cfg, rng)

        granted = np.array([d.applicant_index for d in decisions if d.granted], dtype=int)
        y_real = cohort.applicants.y_real
        realized = float(np.sum(
            y_real[granted] * up.gain - (1 - y_real[granted]) * up.loss)) if len(granted) else 0.0
        d_vec = np.zeros(len(cohort), dtype=int)
        d_vec[granted] = 1
        counterfactual = float(sum(
            utility(int(d_vec[i]), int(y_real[i]), up.gain, up.loss)
            for i in range(len(cohort))))

        row = fairness_row(decisions, cohort)
        outcomes.append(QuarterOutcome(
            quarter=t, decisions=decisions, budget=budget,
            realized_profit=realized, counterfactual_profit=counterfactual,
            metrics=row))
        profits.append(realized)
        budgets.append(budget)

        X_fb = X[granted] if len(granted) else np.empty((0, X.shape[1]))
        y_fb = cohort.applicants.y_obs[granted] if len(granted) else np.empty(0)
        if method is Method.COUNTERFACTUAL_UTILITY:
            tau = max(dynamic_threshold(p_hat, budget, cfg.policy),
                      cfg.policy.rejection_threshold)
            denied = np.setdiff1d(np.arange(len(cohort)), granted)
            fit_counterfactual_utility(model, X_fb, y_fb, tau, up,
                                       cfg.n_epochs, cfg.lr,
                                       X_unlabeled=X[denied])
        else:
            fit_logloss(model, X_fb, y_fb, cfg.n_epochs, cfg.lr)

    norm = normalize_profit(profits, budgets)
    for k, value in enumerate(norm):
        o = outcomes[k + 1]
        outcomes[k + 1] = QuarterOutcome(
            quarter=o.quarter, decisions=o.decisions, budget=o.budget,
            realized_profit=o.realized_profit,
            counterfactual_profit=o.counterfactual_profit,
            metrics=o.metrics.with_profit(o.realized_profit, value))
    return SimResult(outcomes=outcomes, model=model)


def simulate(cfg: SimConfig, method: Method) -> SimResult:
    """Run one method end to end, returning outcomes plus the final model."""
    cfg.validate()
    pop = generate_population(cfg.bias, cfg.dim, cfg.seed)
    cohorts = partition_quarters(pop, cfg.num_partitions, cfg.seed)
    return _run_on_cohorts(cohorts, cfg, method)


def run_method(cfg: SimConfig, method: Method) -> list[QuarterOutcome]:
    return simulate(cfg, method).outcomes


def run_all_methods(cfg: SimConfig) -> dict[Method, list[QuarterOutcome]]:
    """All five methods on the identical population and partition; exploration
    draws come from per-method substreams, so runs are paired."""
    cfg.validate()
    pop = generate_population(cfg.bias, cfg.dim, cfg.seed)
    cohorts = partition_quarters(pop, cfg.num_partitions, cfg.seed)
    return {m: _run_on_cohorts(cohorts, cfg, m).outcomes for m in Method}
