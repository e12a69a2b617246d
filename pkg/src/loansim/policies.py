"""Per-quarter grant/deny policies under a loan budget.

All methods rank applicants by predicted repayment probability (ties broken
by index) and never grant below the rejection floor. The exploration variants
reserve `1 - proportion_certain` of the budget for information-gathering
grants drawn from the uncertain region: applicants above the floor that the
ranking alone would not accept. The number of explored grants is additionally
capped at ceil(delta_explore * pool size).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .synthgen import Cohort


class Method(enum.Enum):
    NAIVE = "naive"
    NAIVE_EXPLORATION = "naive_exploration"
    WEIGHTED_EXPLORATION = "weighted_exploration"
    UNCERTAINTY_AWARE = "uncertainty_aware"
    COUNTERFACTUAL_UTILITY = "counterfactual_utility"


class Provenance(enum.Enum):
    CertainAccept = "certain_accept"
    Explored = "explored"
    Denied = "denied"


@dataclass(frozen=True)
class PolicyConfig:
    method: Method = Method.NAIVE
    rejection_threshold: float = 0.1
    proportion_certain: float = 0.7
    delta_explore: float = 0.05

    def validate(self) -> None:
        if not 0.0 <= self.rejection_threshold < 1.0:
            raise ConfigError(
                f"rejection_threshold must lie in [0,1), got {self.rejection_threshold}")
        if not 0.0 < self.proportion_certain <= 1.0:
            raise ConfigError(
                f"proportion_certain must lie in (0,1], got {self.proportion_certain}")
        if not 0.0 < self.delta_explore < 1.0:
            raise ConfigError(
                f"delta_explore must lie in (0,1), got {self.delta_explore}")


@dataclass(frozen=True)
class PolicyDecision:
    applicant_index: int
    granted: bool
    provenance: Provenance
    p_hat: float
    ci_halfwidth: float = 0.0


def quarter_budget(cohort: Cohort, budget_prop: float) -> int:
    """floor(budget_prop * ground-truth positives), but at least one loan so
    every quarter produces some feedback."""
    if not 0.0 < budget_prop <= 1.0:
        raise ConfigError(f"budget_prop must lie in (0,1], got {budget_prop}")
    positives = int(cohort.applicants.y_real.sum())
    return max(1, math.floor(budget_prop * positives))


def _ranked(p_hat: np.ndarray) -> np.ndarray:
    """Indices sorted by p_hat descending, ties by index ascending."""
    return np.lexsort((np.arange(len(p_hat)), -p_hat))


def _decisions(n: int, p_hat, ci, certain: set[int], explored: set[int]) -> list[PolicyDecision]:
    out = []
    for i in range(n):
        if i in certain:
            prov = Provenance.CertainAccept
        elif i in explored:
            prov = Provenance.Explored
        else:
            prov = Provenance.Denied
        out.append(PolicyDecision(
            applicant_index=i,
            granted=prov is not Provenance.Denied,
            provenance=prov,
            p_hat=float(p_hat[i]),
            ci_halfwidth=float(ci[i]) if ci is not None else 0.0,
        ))
    return out


def decide_naive(p_hat: np.ndarray, budget: int, cfg: PolicyConfig) -> list[PolicyDecision]:
    """Grant the top-ranked applicants above the floor, up to the budget."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    eligible = p_hat >= cfg.rejection_threshold
    order = _ranked(p_hat)
    top = [i for i in order if eligible[i]][: min(budget, int(eligible.sum()))]
    return _decisions(len(p_hat), p_hat, None, set(top), set())


def _split_slots(budget: int, cfg: PolicyConfig) -> tuple[int, int]:
    certain_slots = math.floor(cfg.proportion_certain * budget)
    return certain_slots, budget - certain_slots


def _certain_and_pool(p_hat: np.ndarray, certain_slots: int, cfg: PolicyConfig):
    eligible = p_hat >= cfg.rejection_threshold
    order = _ranked(p_hat)
    certain = [i for i in order if eligible[i]][: min(certain_slots, int(eligible.sum()))]
    certain_set = set(certain)
    pool = np.array([i for i in order if eligible[i] and i not in certain_set], dtype=int)
    return certain_set, pool, order, eligible


def _explore_count(slots: int, pool_size: int, cfg: PolicyConfig) -> int:
    cap = math.ceil(cfg.delta_explore * pool_size)
    return min(slots, cap, pool_size)


def _top_up(certain: set[int], explored: set[int], budget: int,
            order: np.ndarray, eligible: np.ndarray, pool_size: int) -> None:
    """Hand exploration slots the delta cap left unused back to the
    next-ranked eligible applicants, so the quarter's budget is spent.
    An empty exploration pool forfeits its slots instead."""
    if pool_size == 0:
        return
    leftover = budget - len(certain) - len(explored)
    for i in order:
        if leftover <= 0:
            break
        i = int(i)
        if eligible[i] and i not in certain and i not in explored:
            certain.add(i)
            leftover -= 1


def decide_naive_exploration(p_hat, budget: int, cfg: PolicyConfig,
                             rng: np.random.Generator) -> list[PolicyDecision]:
    """Certain accepts by rank, then uniform exploration over the remaining
    above-floor applicants, capped at ceil(delta * pool size); residual slots
    go to the next-ranked applicants."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    certain_slots, explore_slots = _split_slots(budget, cfg)
    certain, pool, order, eligible = _certain_and_pool(p_hat, certain_slots, cfg)
    n_explore = _explore_count(explore_slots, len(pool), cfg)
    explored = set()
    if n_explore > 0:
        explored = set(int(i) for i in rng.choice(pool, size=n_explore, replace=False))
    _top_up(certain, explored, budget, order, eligible, len(pool))
    return _decisions(len(p_hat), p_hat, None, certain, explored)


def decide_weighted_exploration(p_hat, budget: int, cfg: PolicyConfig,
                                rng: np.random.Generator,
                                flags: list[str] | None = None) -> list[PolicyDecision]:
    """As naive exploration, but successive exploration draws are weighted by
    p_hat. All-zero weights fall back to uniform sampling."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    certain_slots, explore_slots = _split_slots(budget, cfg)
    certain, pool, order, eligible = _certain_and_pool(p_hat, certain_slots, cfg)
    n_explore = _explore_count(explore_slots, len(pool), cfg)
    explored: set[int] = set()
    if n_explore > 0:
        weights = p_hat[pool].copy()
        if weights.sum() <= 0.0:
            if flags is not None:
                flags.append("uniform_fallback")
            weights = np.ones(len(pool))
        remaining = weights.copy()
        for _ in range(n_explore):
            total = remaining.sum()
            if total <= 0.0:
                break
            j = int(rng.choice(len(pool), p=remaining / total))
            explored.add(int(pool[j]))
            remaining[j] = 0.0
    _top_up(certain, explored, budget, order, eligible, len(pool))
    return _decisions(len(p_hat), p_hat, None, certain, explored)


def decide_uncertainty_aware(p_hat, ci, budget: int, cfg: PolicyConfig,
                             rng: np.random.Generator) -> list[PolicyDecision]:
    """Exploration restricted to applicants whose interval [p-ci, p+ci]
    straddles the acceptance threshold: the p_hat of the lowest-ranked certain
    accept, or the rejection floor when there are none."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    ci = np.asarray(ci, dtype=np.float64)
    if ci.shape != p_hat.shape:
        raise ValueError("ci must have the same length as p_hat")
    certain_slots, explore_slots = _split_slots(budget, cfg)
    certain, pool, order, eligible = _certain_and_pool(p_hat, certain_slots, cfg)
    if certain:
        threshold = min(p_hat[i] for i in certain)
    else:
        threshold = cfg.rejection_threshold
    straddles = np.array(
        [p_hat[i] - ci[i] <= threshold <= p_hat[i] + ci[i] for i in pool], dtype=bool)
    pool = pool[straddles]
    n_explore = _explore_count(explore_slots, len(pool), cfg)
    explored = set()
    if n_explore > 0:
        explored = set(int(i) for i in rng.choice(pool, size=n_explore, replace=False))
    _top_up(certain, explored, budget, order, eligible, len(pool))
    return _decisions(len(p_hat), p_hat, ci, certain, explored)


def dynamic_threshold(p_hat: np.ndarray, budget: int, cfg: PolicyConfig) -> float:
    """Budget-th largest p_hat, or the rejection floor when fewer applicants
    clear the floor than the budget allows."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    eligible = int((p_hat >= cfg.rejection_threshold).sum())
    if budget > eligible:
        return float(cfg.rejection_threshold)
    return float(np.sort(p_hat)[::-1][budget - 1])


def decide_counterfactual(p_hat, budget: int, cfg: PolicyConfig) -> list[PolicyDecision]:
    """Grant everyone at or above the dynamic budget threshold, hard-capped at
    the budget; no stochastic exploration."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    tau = max(dynamic_threshold(p_hat, budget, cfg), cfg.rejection_threshold)
    order = _ranked(p_hat)
    grants = [i for i in order if p_hat[i] >= tau][:budget]
    return _decisions(len(p_hat), p_hat, None, set(grants), set())
