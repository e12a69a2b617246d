"""Synthetic loan-applicant populations from structural equations with bias knobs.

Latent process per applicant:

    A ~ Bernoulli(p_A)                          group membership
    R = -beta_R_hist * A + N_R,                 N_R ~ Gamma(k_R, theta_R)
    Q ~ Binomial(K, sigmoid(-(alpha_RQ * R - beta_Q_hist * A)))
    S = alpha_R * R - alpha_Q * Q - beta_Y_hist * A + N_S,  N_S ~ Normal(0, sigma_S^2)
    Y = 1{S > pi_S}

Observed (possibly distorted) measurements:

    R~ = R - beta_R_meas * A + Normal(0, sigma_R_meas^2)
    S~ = S - beta_Y_meas * A - beta_Y_interact * A * (R - mean(R)) + Normal(0, sigma_S_meas^2)
    Y~ = 1{S~ > pi_S}

Every noise term is drawn from its own named substream of the root seed, so
changing a bias coefficient perturbs nothing but the structural shift itself
(common random numbers across bias levels).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError
from .rng import substream


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


@dataclass(frozen=True)
class BiasConfig:
    """Structural-equation coefficients and noise parameters of the generator."""

    p_A: float = 0.5
    beta_R_hist: float = 0.0
    beta_Q_hist: float = 0.0
    beta_Y_hist: float = 0.0
    beta_R_meas: float = 0.0
    beta_Y_meas: float = 0.0
    beta_Y_interact: float = 0.0
    k_R: float = 4.0
    theta_R: float = 2.0
    alpha_RQ: float = 0.5
    alpha_R: float = 1.0
    alpha_Q: float = 1.0
    sigma_S: float = 2.0
    sigma_R_meas: float = 0.0
    sigma_S_meas: float = 0.0
    q_levels: int = 2
    pi_S: float | None = None  # None: calibrate to the zero-bias median score
    omit_resource: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.p_A <= 1.0:
            raise ConfigError(f"p_A must lie in [0,1], got {self.p_A}")
        for name in ("beta_R_hist", "beta_Q_hist", "beta_Y_hist",
                     "beta_R_meas", "beta_Y_meas", "beta_Y_interact",
                     "sigma_R_meas", "sigma_S_meas"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("k_R", "theta_R", "sigma_S"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.q_levels < 2:
            raise ConfigError(f"q_levels must be >= 2, got {self.q_levels}")


@dataclass(frozen=True)
class Applicant:
    a: int
    r_latent: float
    q: int
    s_latent: float
    y_real: int
    r_obs: float
    y_obs: int


class Population(Sequence[Applicant]):
    """Column-oriented applicant store; indexing yields Applicant views."""

    def __init__(self, a, r_latent, q, s_latent, y_real, r_obs, y_obs, pi_s: float):
        self.a = np.asarray(a, dtype=np.int8)
        self.r_latent = np.asarray(r_latent, dtype=np.float64)
        self.q = np.asarray(q, dtype=np.int64)
        self.s_latent = np.asarray(s_latent, dtype=np.float64)
        self.y_real = np.asarray(y_real, dtype=np.int8)
        self.r_obs = np.asarray(r_obs, dtype=np.float64)
        self.y_obs = np.asarray(y_obs, dtype=np.int8)
        self.pi_s = float(pi_s)

    def __len__(self) -> int:
        return self.a.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return self.take(np.arange(len(self))[i])
        return Applicant(
            a=int(self.a[i]),
            r_latent=float(self.r_latent[i]),
            q=int(self.q[i]),
            s_latent=float(self.s_latent[i]),
            y_real=int(self.y_real[i]),
            r_obs=float(self.r_obs[i]),
            y_obs=int(self.y_obs[i]),
        )

    def __iter__(self) -> Iterator[Applicant]:
        return (self[i] for i in range(len(self)))

    def take(self, indices: np.ndarray) -> "Population":
        return Population(
            self.a[indices], self.r_latent[indices], self.q[indices],
            self.s_latent[indices], self.y_real[indices],
            self.r_obs[indices], self.y_obs[indices], self.pi_s,
        )


@dataclass(frozen=True)
class Cohort:
    applicants: Population
    quarter_index: int

    def __len__(self) -> int:
        return len(self.applicants)


def _latent_draws(cfg: BiasConfig, dim: int, seed: int):
    """Noise draws shared by the biased and the zero-bias calibration pass."""
    k = cfg.q_levels - 1
    u_group = substream(seed, "pop", "group").random(dim)
    n_r = substream(seed, "pop", "resource").gamma(cfg.k_R, cfg.theta_R, dim)
    u_q = substream(seed, "pop", "context").random((dim, k))
    n_s = substream(seed, "pop", "score").normal(0.0, cfg.sigma_S, dim)
    z_r_meas = substream(seed, "pop", "obs-resource").standard_normal(dim)
    z_s_meas = substream(seed, "pop", "obs-score").standard_normal(dim)
    return u_group, n_r, u_q, n_s, z_r_meas, z_s_meas


def _structural_pass(cfg, a, n_r, u_q, n_s, *, zero_bias: bool):
    b_r = 0.0 if zero_bias else cfg.beta_R_hist
    b_q = 0.0 if zero_bias else cfg.beta_Q_hist
    b_y = 0.0 if zero_bias else cfg.beta_Y_hist
    r = -b_r * a + n_r
    p_q = sigmoid(-(cfg.alpha_RQ * r - b_q * a))
    q = (u_q < p_q[:, None]).sum(axis=1)
    s = cfg.alpha_R * r - cfg.alpha_Q * q - b_y * a + n_s
    return r, q, s


def generate_population(cfg: BiasConfig, dim: int, seed: int) -> Population:
    """Sample `dim` applicants; deterministic given (cfg, dim, seed).

    When cfg.pi_S is None the score threshold is the empirical median of the
    zero-bias score computed from the same noise draws, giving a ~50% base
    rate that is unaffected by the bias coefficients.
    """
    cfg.validate()
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}")

    u_group, n_r, u_q, n_s, z_r_meas, z_s_meas = _latent_draws(cfg, dim, seed)
    a = (u_group < cfg.p_A).astype(np.float64)

    r, q, s = _structural_pass(cfg, a, n_r, u_q, n_s, zero_bias=False)

    if cfg.pi_S is None:
        _, _, s0 = _structural_pass(cfg, a, n_r, u_q, n_s, zero_bias=True)
        pi_s = float(np.median(s0))
    else:
        pi_s = float(cfg.pi_S)

    y = (s > pi_s).astype(np.int8)

    r_obs = r - cfg.beta_R_meas * a + cfg.sigma_R_meas * z_r_meas
    s_obs = (s - cfg.beta_Y_meas * a
             - cfg.beta_Y_interact * a * (r - r.mean())
             + cfg.sigma_S_meas * z_s_meas)
    y_obs = (s_obs > pi_s).astype(np.int8)

    return Population(a, r, q, s, y, r_obs, y_obs, pi_s)


def partition_quarters(pop: Population, num_partitions: int, seed: int) -> list[Cohort]:
    """Randomly permute the population and split it into contiguous quarters.

    Block sizes differ by at most one; the union of the cohorts is the
    population; deterministic given the seed.
    """
    if num_partitions < 2:
        raise ConfigError(f"num_partitions must be >= 2, got {num_partitions}")
    if len(pop) == 0:
        raise ConfigError("population is empty")
    if num_partitions > len(pop):
        raise ConfigError(
            f"num_partitions={num_partitions} exceeds population size {len(pop)}")
    order = substream(seed, "partition").permutation(len(pop))
    blocks = np.array_split(order, num_partitions)
    return [Cohort(pop.take(idx), i + 1) for i, idx in enumerate(blocks)]


def feature_matrix(cohort: Cohort, cfg: BiasConfig,
                   include_sensitive: bool = False) -> np.ndarray:
    """Model features per applicant: [R~ unless omit_resource, Q, A if requested].

    The intercept is the model's job, not a column here.
    """
    if len(cohort) == 0:
        raise ConfigError("cohort is empty")
    pop = cohort.applicants
    cols = []
    if not cfg.omit_resource:
        cols.append(pop.r_obs)
    cols.append(pop.q.astype(np.float64))
    if include_sensitive:
        cols.append(pop.a.astype(np.float64))
    return np.column_stack(cols)


POPULATION_CSV_HEADER = ["a", "r_latent", "q", "s_latent", "y_real", "r_obs", "y_obs"]


def write_population_csv(pop: Population, path: str) -> None:
    """Dump a population for inspection; floats carry 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POPULATION_CSV_HEADER)
        for i in range(len(pop)):
            writer.writerow([
                int(pop.a[i]),
                f"{pop.r_latent[i]:.17g}",
                int(pop.q[i]),
                f"{pop.s_latent[i]:.17g}",
                int(pop.y_real[i]),
                f"{pop.r_obs[i]:.17g}",
                int(pop.y_obs[i]),
            ])
