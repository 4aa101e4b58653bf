"""L2-regularized logistic regression (sigmoid binary, softmax multiclass).

Fitted by damped Newton iterations with Armijo backtracking on the mean
negative log-likelihood, so the objective is non-increasing and the fit
is invariant to duplicating every row. Features are standardized
internally; the standardization is part of the fitted model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GRADIENT_TOL = 1e-8
MAX_ITER = 5000
ARMIJO_C = 1e-4
MAX_BACKTRACKS = 60


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log1pexp(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    big = z > 30
    out[big] = z[big]
    out[~big] = np.log1p(np.exp(z[~big]))
    return out


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


@dataclass
class LogisticCore:
    weights: np.ndarray  # (K, p) for multiclass, (p,) for binary
    intercept: np.ndarray  # (K,) or scalar array
    mean: np.ndarray
    scale: np.ndarray
    n_classes: int
    l2_strength: float
    objective_history: list[float] = field(default_factory=list)
    converged: bool = True

    def decision(self, X: np.ndarray) -> np.ndarray:
        Xs = (X - self.mean) / self.scale
        if self.n_classes == 2:
            return Xs @ self.weights + self.intercept
        return Xs @ self.weights.T + self.intercept

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = self.decision(X)
        if self.n_classes == 2:
            p1 = _sigmoid(z)
            return np.column_stack([1.0 - p1, p1])
        return _softmax(z)

    def to_dict(self) -> dict:
        return {
            "weights": np.asarray(self.weights).tolist(),
            "intercept": np.asarray(self.intercept).tolist(),
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "n_classes": self.n_classes,
            "l2_strength": self.l2_strength,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticCore":
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            intercept=np.asarray(data["intercept"], dtype=np.float64),
            mean=np.asarray(data["mean"], dtype=np.float64),
            scale=np.asarray(data["scale"], dtype=np.float64),
            n_classes=int(data["n_classes"]),
            l2_strength=float(data["l2_strength"]),
        )


def _standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale == 0.0, 1.0, scale)
    return (X - mean) / scale, mean, scale


def fit_logistic(X: np.ndarray, y_index: np.ndarray, n_classes: int, l2_strength: float) -> LogisticCore:
    """Newton fit of the mean NLL + (l2/2)*||weights||^2 (intercepts unpenalized)."""
    Xs, mean, scale = _standardize(X)
    if n_classes == 2:
        theta, history, converged = _fit_binary(Xs, y_index.astype(np.float64), l2_strength)
        return LogisticCore(
            weights=theta[:-1], intercept=np.float64(theta[-1]), mean=mean, scale=scale,
            n_classes=2, l2_strength=l2_strength, objective_history=history, converged=converged,
        )
    W, b, history, converged = _fit_softmax(Xs, y_index, n_classes, l2_strength)
    return LogisticCore(
        weights=W, intercept=b, mean=mean, scale=scale, n_classes=n_classes,
        l2_strength=l2_strength, objective_history=history, converged=converged,
    )


def _fit_binary(Xs: np.ndarray, y: np.ndarray, lam: float):
    n, p = Xs.shape
    Xa = np.column_stack([Xs, np.ones(n)])
    theta = np.zeros(p + 1)
    penalty_diag = np.concatenate([np.full(p, lam), [0.0]])

    def objective(t: np.ndarray) -> float:
        z = Xa @ t
        nll = float(np.mean(_log1pexp(z) - y * z))
        return nll + 0.5 * lam * float(t[:p] @ t[:p])

    history = [objective(theta)]
    converged = False
    for _ in range(MAX_ITER):
        z = Xa @ theta
        prob = _sigmoid(z)
        grad = Xa.T @ (prob - y) / n + penalty_diag * theta
        if np.max(np.abs(grad)) < GRADIENT_TOL:
            converged = True
            break
        s = prob * (1.0 - prob)
        hess = (Xa.T * s) @ Xa / n + np.diag(penalty_diag + 1e-12)
        step = np.linalg.solve(hess, -grad)
        theta = _armijo(objective, theta, grad, step, history)
    return theta, history, converged


def _fit_softmax(Xs: np.ndarray, y_index: np.ndarray, K: int, lam: float):
    n, p = Xs.shape
    Xa = np.column_stack([Xs, np.ones(n)])
    pa = p + 1
    Y = np.zeros((n, K))
    Y[np.arange(n), y_index] = 1.0
    theta = np.zeros(K * pa)
    penalty = np.tile(np.concatenate([np.full(p, lam), [0.0]]), K)

    def objective(t: np.ndarray) -> float:
        W = t.reshape(K, pa)
        P = _softmax(Xa @ W.T)
        nll = -float(np.mean(np.log(np.clip(P[np.arange(n), y_index], 1e-300, None))))
        wflat = W[:, :p].ravel()
        return nll + 0.5 * lam * float(wflat @ wflat)

    history = [objective(theta)]
    converged = False
    for _ in range(MAX_ITER):
        W = theta.reshape(K, pa)
        P = _softmax(Xa @ W.T)
        grad = ((P - Y).T @ Xa / n).ravel() + penalty * theta
        if np.max(np.abs(grad)) < GRADIENT_TOL:
            converged = True
            break
        hess = np.zeros((K * pa, K * pa))
        for c in range(K):
            for d in range(K):
                s = P[:, c] * ((1.0 if c == d else 0.0) - P[:, d])
                block = (Xa.T * s) @ Xa / n
                hess[c * pa : (c + 1) * pa, d * pa : (d + 1) * pa] = block
        hess += np.diag(penalty + 1e-10)
        step = np.linalg.solve(hess, -grad)
        theta = _armijo(objective, theta, grad, step, history)
    W = theta.reshape(K, pa)
    return W[:, :p], W[:, p], history, converged


def _armijo(objective, theta, grad, step, history: list[float]) -> np.ndarray:
    """Backtracking line search; appends the accepted objective value."""
    base = history[-1]
    slope = float(grad @ step)
    t = 1.0
    for _ in range(MAX_BACKTRACKS):
        candidate = theta + t * step
        value = objective(candidate)
        if value <= base + ARMIJO_C * t * slope:
            history.append(value)
            return candidate
        t *= 0.5
    history.append(base)
    return theta
