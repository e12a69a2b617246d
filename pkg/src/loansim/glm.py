"""Logistic model trained from scratch, with delta-method intervals and a
counterfactual-utility trainer.

The model accumulates every row it is ever fed; each update is full-batch
gradient descent over that cumulative set, warm-started from the current
weights. The information matrix (X'WX with W = diag(p(1-p))) is likewise
computed over the cumulative set, so interval widths reflect all absorbed
evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RIDGE_JITTER = 1e-6
_P_EPS = 1e-15


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


@dataclass(frozen=True)
class UtilityParams:
    """Per-unit-principal gain on repayment, loss on default, and the
    sharpness of the soft decision used by the utility trainer."""

    gain: float = 0.4
    loss: float = 1.0
    alpha_sharp: float = 10.0

    def validate(self) -> None:
        if self.gain <= 0 or self.loss <= 0 or self.alpha_sharp <= 0:
            raise ValueError("gain, loss and alpha_sharp must all be > 0")


@dataclass
class LogisticModel:
    n_features: int
    weights: np.ndarray = field(init=False)
    intercept: float = 0.0
    xtwx_inv: np.ndarray | None = None
    train_count: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.weights = np.zeros(self.n_features)
        self._X_all = np.empty((0, self.n_features))
        self._y_all = np.empty(0)
        self._X_unlabeled = np.empty((0, self.n_features))

    def training_features(self) -> np.ndarray:
        return self._X_all

    def training_labels(self) -> np.ndarray:
        return self._y_all

    def unlabeled_features(self) -> np.ndarray:
        """Label-free feature rows that only the counterfactual term sees."""
        return self._X_unlabeled

    def _absorb(self, X: np.ndarray, y: np.ndarray) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] and X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if X.shape[0]:
            self._X_all = np.vstack([self._X_all, X])
            self._y_all = np.concatenate([self._y_all, y])
        self.train_count += X.shape[0]

    def _absorb_unlabeled(self, X: np.ndarray) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.size == 0:
            return
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        self._X_unlabeled = np.vstack([self._X_unlabeled, X])


def predict(model: LogisticModel, x: np.ndarray) -> float:
    """sigma(w.x + b), clipped into the open interval (0, 1)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.n_features:
        raise ValueError(f"expected a vector of length {model.n_features}")
    p = sigmoid(float(model.weights @ x) + model.intercept)
    return float(np.clip(p, _P_EPS, 1.0 - _P_EPS))


def predict_batch(model: LogisticModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected an (n, {model.n_features}) matrix")
    p = sigmoid(X @ model.weights + model.intercept)
    return np.clip(p, _P_EPS, 1.0 - _P_EPS)


def logloss_value_and_grad(weights, intercept, X, y):
    """Mean log-loss and its gradient wrt (weights, intercept)."""
    z = X @ weights + intercept
    # log(1 + e^z) - y*z, computed without overflow
    value = float(np.mean(np.logaddexp(0.0, z) - y * z))
    resid = sigmoid(z) - y
    grad_w = X.T @ resid / len(y)
    grad_b = float(np.mean(resid))
    return value, grad_w, grad_b


def _refresh_information(model: LogisticModel) -> None:
    X, n = model._X_all, model._X_all.shape[0]
    if n == 0:
        return
    X_full = np.column_stack([X, np.ones(n)])
    p = predict_batch(model, X)
    w = p * (1.0 - p)
    xtwx = (X_full * w[:, None]).T @ X_full
    try:
        inv = np.linalg.inv(xtwx)
        if not np.all(np.isfinite(inv)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        inv = np.linalg.inv(xtwx + RIDGE_JITTER * np.eye(xtwx.shape[0]))
        model.diagnostics.append("ridge_jitter")
    model.xtwx_inv = (inv + inv.T) / 2.0


def fit_logloss(model: LogisticModel, X, y, epochs: int = 40,
                lr: float = 0.05) -> LogisticModel:
    """Absorb (X, y) and run `epochs` of full-batch descent on the cumulative
    mean log-loss, warm-started from the current weights. Zero epochs leaves
    the model untouched."""
    if epochs == 0:
        return model
    model._absorb(X, y)
    Xa, ya = model._X_all, model._y_all
    if ya.size == 0:
        return model
    for _ in range(epochs):
        _, grad_w, grad_b = logloss_value_and_grad(model.weights, model.intercept, Xa, ya)
        model.weights = model.weights - lr * grad_w
        model.intercept = model.intercept - lr * grad_b
    _refresh_information(model)
    return model


def ci_halfwidth(model: LogisticModel, x: np.ndarray, z: float = 1.96) -> float:
    """Delta-method half-width z * sqrt(grad_p' (X'WX)^-1 grad_p) with
    grad_p = p(1-p) * [x, 1]."""
    if model.xtwx_inv is None:
        raise ValueError("model has never been fitted")
    p = predict(model, x)
    x_full = np.append(np.asarray(x, dtype=np.float64), 1.0)
    grad = p * (1.0 - p) * x_full
    qf = float(grad @ model.xtwx_inv @ grad)
    return z * np.sqrt(max(qf, 0.0))


def ci_halfwidth_batch(model: LogisticModel, X: np.ndarray, z: float = 1.96) -> np.ndarray:
    if model.xtwx_inv is None:
        raise ValueError("model has never been fitted")
    p = predict_batch(model, X)
    X_full = np.column_stack([np.asarray(X, dtype=np.float64), np.ones(X.shape[0])])
    grad = X_full * (p * (1.0 - p))[:, None]
    qf = np.einsum("ij,jk,ik->i", grad, model.xtwx_inv, grad)
    return z * np.sqrt(np.maximum(qf, 0.0))


def counterfactual_objective_and_grad(weights, intercept, X, y, tau,
                                      up: UtilityParams, X_unlabeled=None):
    """Mean per-row utility J and its gradient wrt (weights, intercept).

    Rows with outcome feedback contribute

        J_t = D_t * (y_t g - (1-y_t) l) + (1 - D_t) * (p_t g - (1-p_t) l)

    with soft decision D_t = sigma(alpha (p_t - tau)) and p_t the model
    probability; gradients flow through both D_t and p_t. Rows in
    `X_unlabeled` (denied applicants, whose outcome is unobservable) carry
    only the expected term (1 - D_t)(p_t g - (1-p_t) l).
    """
    g, l, alpha = up.gain, up.loss, up.alpha_sharp
    n_lab = X.shape[0]
    n_unlab = 0 if X_unlabeled is None else X_unlabeled.shape[0]
    n = n_lab + n_unlab

    total = 0.0
    grad_w = np.zeros_like(weights)
    grad_b = 0.0
    if n_lab:
        z = X @ weights + intercept
        p = sigmoid(z)
        d = sigmoid(alpha * (p - tau))
        observed = y * g - (1.0 - y) * l
        expected = p * (g + l) - l
        total += float(np.sum(d * observed + (1.0 - d) * expected))
        # dJ/dp = D(1-D) alpha (observed - expected) + (1-D)(g+l)
        dj_dp = d * (1.0 - d) * alpha * (observed - expected) + (1.0 - d) * (g + l)
        dj_dz = dj_dp * p * (1.0 - p)
        grad_w += X.T @ dj_dz
        grad_b += float(np.sum(dj_dz))
    if n_unlab:
        z = X_unlabeled @ weights + intercept
        p = sigmoid(z)
        d = sigmoid(alpha * (p - tau))
        expected = p * (g + l) - l
        total += float(np.sum((1.0 - d) * expected))
        dj_dp = -d * (1.0 - d) * alpha * expected + (1.0 - d) * (g + l)
        dj_dz = dj_dp * p * (1.0 - p)
        grad_w += X_unlabeled.T @ dj_dz
        grad_b += float(np.sum(dj_dz))
    return total / n, grad_w / n, grad_b / n


def fit_counterfactual_utility(model: LogisticModel, X, y_feedback, tau: float,
                               up: UtilityParams, epochs: int = 40,
                               lr: float = 0.05,
                               X_unlabeled=None) -> LogisticModel:
    """Absorb (X, y_feedback) plus any label-free denied rows and
    gradient-ascend the combined observed + counterfactual utility over the
    cumulative sets, warm-started.

    A step that would lower the objective is retried at half the rate; if the
    rate collapses the step is skipped, so the objective never decreases
    across an epoch.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0,1), got {tau}")
    up.validate()
    if epochs == 0:
        return model
    model._absorb(X, y_feedback)
    if X_unlabeled is not None:
        model._absorb_unlabeled(X_unlabeled)
    Xa, ya, Xu = model._X_all, model._y_all, model._X_unlabeled
    if ya.size == 0 and Xu.size == 0:
        return model
    step = lr
    value, grad_w, grad_b = counterfactual_objective_and_grad(
        model.weights, model.intercept, Xa, ya, tau, up, Xu)
    for _ in range(epochs):
        while step > 1e-12:
            w_new = model.weights + step * grad_w
            b_new = model.intercept + step * grad_b
            v_new, gw_new, gb_new = counterfactual_objective_and_grad(
                w_new, b_new, Xa, ya, tau, up, Xu)
            if v_new >= value:
                model.weights, model.intercept = w_new, b_new
                value, grad_w, grad_b = v_new, gw_new, gb_new
                break
            step /= 2.0
        else:
            break
    _refresh_information(model)
    return model


def checkpoint_row(model: LogisticModel) -> list[str]:
    """Debug export: weights..., intercept, train_count."""
    return ([f"{w:.17g}" for w in model.weights]
            + [f"{model.intercept:.17g}", str(model.train_count)])
