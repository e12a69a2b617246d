"""Counterfactual utility over decision/outcome quadrants and group-parity
metrics evaluated against the ground-truth label, never the observed one.

Quadrant payoffs for a decision d and potential outcome y1:

    (1,1) realized gain    +g      (1,0) realized loss    -l
    (0,1) unrealized gain  -l      (0,0) unrealized loss  +g
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .glm import UtilityParams
from .policies import Provenance
from .synthgen import Cohort

REGRET_SLACK = 1e-12


@dataclass(frozen=True)
class MetricRow:
    """One evaluated quarter. Deltas are group-0 minus group-1 values; None
    marks an empty conditioning cell (written as an empty CSV field)."""

    delta_sr: float | None = None
    delta_fpr: float | None = None
    delta_fnr: float | None = None
    delta_acc: float | None = None
    profit_quarter: float = 0.0
    profit_cum_norm: float | None = None
    n_granted: int = 0
    n_explored: int = 0
    degenerate: bool = False

    def with_profit(self, profit_quarter: float,
                    profit_cum_norm: float | None) -> "MetricRow":
        return replace(self, profit_quarter=profit_quarter,
                       profit_cum_norm=profit_cum_norm)


def utility(d: int, y1: int, g: float, l: float) -> float:
    """d(y1*g - (1-y1)*l) + (1-d)((1-y1)*g - y1*l)."""
    return d * (y1 * g - (1 - y1) * l) + (1 - d) * ((1 - y1) * g - y1 * l)


def policy_reward(decisions, cohort: Cohort, up: UtilityParams) -> float:
    """Mean per-applicant utility of the decisions against ground truth."""
    if len(decisions) != len(cohort):
        raise ValueError("decisions must cover the cohort")
    d = _grant_vector(decisions, len(cohort))
    y = cohort.applicants.y_real.astype(np.float64)
    u = d * (y * up.gain - (1 - y) * up.loss) + (1 - d) * ((1 - y) * up.gain - y * up.loss)
    return float(u.mean())


def oracle_reward(cohort: Cohort, up: UtilityParams) -> float:
    """Reward of the full-information policy d = y_real, which is +g for
    every applicant."""
    return up.gain


def regret(reward_pi: float, reward_star: float) -> float:
    gap = reward_star - reward_pi
    if gap < -REGRET_SLACK:
        raise ValueError(
            f"policy reward {reward_pi} exceeds the oracle reward {reward_star}")
    return max(gap, 0.0)


def _grant_vector(decisions, n: int) -> np.ndarray:
    d = np.zeros(n)
    for dec in decisions:
        d[dec.applicant_index] = 1.0 if dec.granted else 0.0
    return d


def _rate(mask_num: np.ndarray, mask_den: np.ndarray) -> float | None:
    den = int(mask_den.sum())
    if den == 0:
        return None
    return float(mask_num[mask_den].mean())


def _diff(v0: float | None, v1: float | None) -> float | None:
    if v0 is None or v1 is None:
        return None
    return v0 - v1


def fairness_row(decisions, cohort: Cohort) -> MetricRow:
    """Selection-rate, FPR, FNR and accuracy gaps between groups, conditioned
    on y_real. Empty conditioning cells yield None, never zero."""
    if len(decisions) != len(cohort):
        raise ValueError("decisions must cover the cohort")
    pop = cohort.applicants
    granted = _grant_vector(decisions, len(cohort)).astype(bool)
    a = pop.a.astype(bool)          # True: group 1
    y = pop.y_real.astype(bool)

    degenerate = not (np.any(a) and np.any(~a))

    sr = [_rate(granted, ~a), _rate(granted, a)]
    fpr = [_rate(granted, ~a & ~y), _rate(granted, a & ~y)]
    fnr = [_rate(~granted, ~a & y), _rate(~granted, a & y)]
    correct = granted == y
    acc = [_rate(correct, ~a), _rate(correct, a)]

    n_explored = sum(1 for d in decisions if d.provenance is Provenance.Explored)
    return MetricRow(
        delta_sr=_diff(sr[0], sr[1]),
        delta_fpr=_diff(fpr[0], fpr[1]),
        delta_fnr=_diff(fnr[0], fnr[1]),
        delta_acc=_diff(acc[0], acc[1]),
        n_granted=int(granted.sum()),
        n_explored=n_explored,
        degenerate=degenerate,
    )


def normalize_profit(profits_by_quarter, budgets) -> list[float]:
    """Cumulative profit divided by cumulative budget, per quarter."""
    profits = np.asarray(profits_by_quarter, dtype=np.float64)
    budgets = np.asarray(budgets, dtype=np.float64)
    if profits.shape != budgets.shape:
        raise ValueError("profits and budgets must have equal length")
    cum_budget = np.cumsum(budgets)
    if np.any(cum_budget <= 0):
        raise ValueError("cumulative budget must be positive in every quarter")
    return list(np.cumsum(profits) / cum_budget)
