"""Loss models with exact full-batch gradients.

Parameters are always a flat float64 vector; each model knows how to unpack
it. Losses are sample means over whatever rows are passed in.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from .data import Dataset


class LossKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    LOGISTIC = "logistic"
    SOFTMAX = "softmax"
    MLP = "mlp"


class UnboundedGradientError(ValueError):
    """No finite sup-norm gradient bound exists for this model/domain."""


class LossModel:
    kind: LossKind
    dim: int

    def loss_and_grad(self, w: np.ndarray, x: np.ndarray, y: np.ndarray):
        raise NotImplementedError

    def loss(self, w, x, y) -> float:
        return self.loss_and_grad(w, x, y)[0]

    def initial_params(self, rng: np.random.Generator | None = None) -> np.ndarray:
        return np.zeros(self.dim)

    def predict(self, w, x) -> np.ndarray:
        raise TypeError(f"{self.kind.value} model has no class predictions")

    def grad_bound(self, dataset: Dataset) -> float:
        raise UnboundedGradientError(f"{self.kind.value}: no gradient bound available")

    def _check_dim(self, w):
        if w.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} parameters, got shape {w.shape}")


def _with_bias(x: np.ndarray, fit_intercept: bool) -> np.ndarray:
    if not fit_intercept:
        return x
    return np.hstack([x, np.ones((x.shape[0], 1))])


class QuadraticModel(LossModel):
    """Two quadratic objectives.

    ``mode="center"``: per-sample loss 0.5 * sum_j a_j (w_j - x_ij)^2 with a
    diagonal ``curvature`` a (default all ones); a client's loss is then a
    shifted bowl centred at its sample mean.
    ``mode="least_squares"``: 0.5 * (x_i . w - y_i)^2.

    ``domain`` is an optional (low, high) box that makes the gradient bounded.
    """

    kind = LossKind.QUADRATIC

    def __init__(self, n_features: int, mode: str = "center", curvature=None, domain=None):
        if mode not in ("center", "least_squares"):
            raise ValueError(f"unknown quadratic mode {mode!r}")
        self.mode = mode
        self.dim = int(n_features)
        if curvature is None:
            self.curvature = np.ones(self.dim)
        else:
            self.curvature = np.broadcast_to(
                np.asarray(curvature, dtype=np.float64), (self.dim,)
            ).copy()
        if np.any(self.curvature <= 0):
            raise ValueError("curvature must be positive")
        if mode == "least_squares" and curvature is not None:
            raise ValueError("curvature only applies to mode='center'")
        self.domain = None if domain is None else (float(domain[0]), float(domain[1]))

    def loss_and_grad(self, w, x, y):
        self._check_dim(w)
        m = x.shape[0]
        if self.mode == "center":
            diff = w[None, :] - x
            loss = 0.5 * float(np.sum(self.curvature * diff**2)) / m
            grad = self.curvature * (w - x.mean(axis=0))
        else:
            r = x @ w - y
            loss = 0.5 * float(r @ r) / m
            grad = x.T @ r / m
        return loss, grad

    def _client_stats(self, dataset, partition):
        hess, lin = np.zeros((self.dim, self.dim)), np.zeros(self.dim)
        for idx in partition.assignments:
            x, y = dataset.features[idx], dataset.labels[idx]
            if self.mode == "center":
                hess += np.diag(self.curvature)
                lin += self.curvature * x.mean(axis=0)
            else:
                hess += x.T @ x / idx.size
                lin += x.T @ y / idx.size
        n = partition.n_clients
        return hess / n, lin / n

    def minimizer(self, dataset: Dataset, partition) -> np.ndarray:
        hess, lin = self._client_stats(dataset, partition)
        return np.linalg.lstsq(hess, lin, rcond=None)[0]

    def smoothness(self, dataset: Dataset, partition) -> float:
        """Largest Hessian eigenvalue of the global objective.

        For the diagonal centre form this is also the smoothness constant in
        every L-p norm; for least squares it is the Euclidean one.
        """
        if self.mode == "center":
            return float(self.curvature.max())
        hess, _ = self._client_stats(dataset, partition)
        return float(np.linalg.eigvalsh(hess)[-1])

    def grad_bound(self, dataset: Dataset) -> float:
        if self.domain is None:
            raise UnboundedGradientError("quadratic gradient is unbounded without a domain box")
        if len(dataset) == 0:
            return 0.0
        lo, hi = self.domain
        x = dataset.features
        if self.mode == "center":
            reach = np.maximum(hi - x.min(axis=0), x.max(axis=0) - lo)
            return float(np.max(self.curvature * reach))
        wmax = max(abs(lo), abs(hi))
        resid = np.abs(x).sum(axis=1) * wmax + np.abs(dataset.labels)
        return float(np.max(np.abs(x) * resid[:, None]))


class LogisticModel(LossModel):
    """Binary logistic regression, labels in {0, 1}."""

    kind = LossKind.LOGISTIC

    def __init__(self, n_features: int, fit_intercept: bool = True):
        self.fit_intercept = fit_intercept
        self.dim = int(n_features) + int(fit_intercept)

    def loss_and_grad(self, w, x, y):
        self._check_dim(w)
        xb = _with_bias(x, self.fit_intercept)
        z = xb @ w
        y = y.astype(np.float64)
        loss = -float(np.mean(y * log_expit(z) + (1 - y) * log_expit(-z)))
        grad = xb.T @ (expit(z) - y) / x.shape[0]
        return loss, grad

    def predict(self, w, x):
        return (_with_bias(x, self.fit_intercept) @ w > 0).astype(np.int64)

    def grad_bound(self, dataset: Dataset) -> float:
        # |sigmoid(z) - y| <= 1, so each coordinate is bounded by |x_j| (1 for the bias)
        if len(dataset) == 0:
            return 0.0
        bound = float(np.abs(dataset.features).max(initial=0.0))
        return max(bound, 1.0) if self.fit_intercept else bound


class SoftmaxModel(LossModel):
    """Multinomial logistic regression; parameters are W (K x p) then b (K)."""

    kind = LossKind.SOFTMAX

    def __init__(self, n_features: int, n_classes: int, fit_intercept: bool = True):
        self.p, self.k = int(n_features), int(n_classes)
        self.fit_intercept = fit_intercept
        self.dim = (self.p + int(fit_intercept)) * self.k

    def _unpack(self, w):
        cols = self.p + int(self.fit_intercept)
        return w[: self.k * self.p].reshape(self.k, self.p), w[self.k * self.p :], cols

    def _logits(self, w, x):
        W, b, _ = self._unpack(w)
        z = x @ W.T
        return z + b if self.fit_intercept else z

    def loss_and_grad(self, w, x, y):
        self._check_dim(w)
        m = x.shape[0]
        z = self._logits(w, x)
        lse = logsumexp(z, axis=1)
        loss = float(np.mean(lse - z[np.arange(m), y]))
        r = np.exp(z - lse[:, None])
        r[np.arange(m), y] -= 1.0
        r /= m
        gw = r.T @ x
        parts = [gw.ravel()]
        if self.fit_intercept:
            parts.append(r.sum(axis=0))
        return loss, np.concatenate(parts)

    def predict(self, w, x):
        return np.argmax(self._logits(w, x), axis=1)

    def grad_bound(self, dataset: Dataset) -> float:
        # |p_k - 1[y=k]| <= 1 per class
        if len(dataset) == 0:
            return 0.0
        bound = float(np.abs(dataset.features).max(initial=0.0))
        return max(bound, 1.0) if self.fit_intercept else bound


class MLPModel(LossModel):
    """One tanh hidden layer, softmax output.

    Layout: W1 (h x p), b1 (h), W2 (K x h), b2 (K).
    """

    kind = LossKind.MLP

    def __init__(self, n_features: int, n_classes: int, hidden: int = 16, init_range: float = 0.1):
        self.p, self.h, self.k = int(n_features), int(hidden), int(n_classes)
        self.init_range = init_range
        self.dim = self.h * self.p + self.h + self.k * self.h + self.k

    def _unpack(self, w):
        p, h, k = self.p, self.h, self.k
        i = 0
        W1 = w[i : i + h * p].reshape(h, p); i += h * p
        b1 = w[i : i + h]; i += h
        W2 = w[i : i + k * h].reshape(k, h); i += k * h
        b2 = w[i : i + k]
        return W1, b1, W2, b2

    def initial_params(self, rng=None):
        if rng is None:
            raise ValueError("MLP initialisation needs a random generator")
        return rng.uniform(-self.init_range, self.init_range, size=self.dim)

    def _forward(self, w, x):
        W1, b1, W2, b2 = self._unpack(w)
        hid = np.tanh(x @ W1.T + b1)
        return hid, hid @ W2.T + b2

    def loss_and_grad(self, w, x, y):
        self._check_dim(w)
        W1, b1, W2, b2 = self._unpack(w)
        m = x.shape[0]
        hid, z = self._forward(w, x)
        lse = logsumexp(z, axis=1)
        loss = float(np.mean(lse - z[np.arange(m), y]))
        dz = np.exp(z - lse[:, None])
        dz[np.arange(m), y] -= 1.0
        dz /= m
        dW2 = dz.T @ hid
        db2 = dz.sum(axis=0)
        dpre = (dz @ W2) * (1.0 - hid**2)
        dW1 = dpre.T @ x
        db1 = dpre.sum(axis=0)
        return loss, np.concatenate([dW1.ravel(), db1, dW2.ravel(), db2])

    def predict(self, w, x):
        return np.argmax(self._forward(w, x)[1], axis=1)


def make_model(kind, dataset: Dataset, **options) -> LossModel:
    """Build a model whose shape matches ``dataset``."""
    kind = LossKind(kind)
    p = dataset.n_features
    if kind is LossKind.QUADRATIC:
        return QuadraticModel(p, **options)
    if kind is LossKind.LOGISTIC:
        if dataset.num_classes not in (None, 2):
            raise ValueError("logistic model needs binary labels")
        return LogisticModel(p, **options)
    if dataset.num_classes is None:
        raise ValueError(f"{kind.value} model needs class labels")
    if kind is LossKind.SOFTMAX:
        return SoftmaxModel(p, dataset.num_classes, **options)
    return MLPModel(p, dataset.num_classes, **options)
