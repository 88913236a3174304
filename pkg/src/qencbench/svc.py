"""Binary C-SVC on a precomputed kernel, trained by SMO.

The dual problem is

    min_a  1/2 a^T Q a - e^T a   s.t.  0 <= a_i <= C,  y^T a = 0,

with ``Q_ij = y_i y_j K_ij``. Working pairs are chosen as the maximal KKT
violating pair; training stops when the violation drops below ``tol``.
Decision scores are ``sum_i a_i y_i K(x_i, x) + b``.
"""

from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import ArgumentError, TrainingError
from .qkernel import GramMatrix

MAX_ITER = 1_000_000


@dataclass(frozen=True)
class SvcModel:
    alpha: np.ndarray
    labels: np.ndarray
    bias: float
    C: float
    n_iter: int = 0
    jitter: float = 0.0

    @property
    def support(self):
        return np.flatnonzero(self.alpha > 0)

    @property
    def dual_coef(self):
        """``alpha_i * y_i`` for the support indices."""
        s = self.support
        return self.alpha[s] * self.labels[s]

    @property
    def n_train(self):
        return self.labels.size


def _as_labels(labels):
    y = np.asarray(labels, dtype=np.float64).ravel()
    if not np.all((y == 1) | (y == -1)):
        raise ArgumentError("labels must be +1/-1")
    return y


def dual_objective(K, y, alpha):
    """``1/2 a^T Q a - sum(a)``; SMO decreases this monotonically."""
    q = (y[:, None] * y[None, :]) * K
    return float(0.5 * alpha @ q @ alpha - alpha.sum())


def compute_bias(y, alpha, grad, C):
    """Offset ``b = -rho`` from the final gradient.

    ``rho`` averages ``y_i G_i`` over free vectors; without free vectors it
    is the midpoint of the feasible interval.
    """
    yg = y * grad
    upper = alpha >= C
    lower = alpha <= 0
    free = ~(upper | lower)
    if free.any():
        return -float(yg[free].mean())
    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return -float((ub + lb) / 2.0)


def psd_jitter(K):
    """Diagonal shift ``max(0, -lambda_min + 1e-8)`` that makes ``K`` PSD."""
    lam = float(np.linalg.eigvalsh(K).min())
    return max(0.0, -lam + 1e-8)


def train(gram, labels, C=1.0, tol=1e-3, max_iter=MAX_ITER):
    """Fit an SVC on a square kernel matrix.

    Shot-sampled Gram matrices get a diagonal jitter so that the dual stays
    convex; exact ones are used as given.
    """
    K = np.array(gram, dtype=np.float64)
    y = _as_labels(labels)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ArgumentError(f"gram must be square, got shape {K.shape}")
    if K.shape[0] != y.size:
        raise ArgumentError(f"gram size {K.shape[0]} != {y.size} labels")
    scale = max(1.0, float(np.abs(K).max()))
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-10 * scale):
        raise ArgumentError("gram matrix is not symmetric")
    if not C > 0:
        raise ArgumentError(f"C must be positive, got {C!r}")
    if np.all(y == y[0]):
        raise TrainingError("training labels contain a single class")

    jitter = 0.0
    if isinstance(gram, GramMatrix) and gram.config.mode == "Shots":
        jitter = psd_jitter(K)
        K[np.diag_indices_from(K)] += jitter

    K = np.ascontiguousarray(K)
    alpha = np.zeros(y.size)
    grad = -np.ones(y.size)
    n_iter, converged = _core.smo(K, y, float(C), float(tol), int(max_iter), alpha, grad)
    if not converged:
        raise TrainingError(f"SMO did not converge in {max_iter} iterations")
    alpha = np.clip(alpha, 0.0, C)
    return SvcModel(alpha=alpha, labels=y, bias=compute_bias(y, alpha, grad, C),
                    C=float(C), n_iter=int(n_iter), jitter=jitter)


def decision_scores(model, kernel_block):
    """Scores for rows of ``kernel_block`` (test x train)."""
    B = np.asarray(kernel_block, dtype=np.float64)
    if B.ndim == 1:
        B = B[None, :]
    if B.ndim != 2 or B.shape[1] != model.n_train:
        raise ArgumentError(
            f"kernel block has {B.shape[-1]} columns, model has {model.n_train} training rows"
        )
    s = model.support
    return B[:, s] @ (model.alpha[s] * model.labels[s]) + model.bias


def predict(model, kernel_block):
    """Labels ``sign(score)``, ties mapped to +1."""
    return np.where(decision_scores(model, kernel_block) >= 0, 1, -1)


def dump_model(model, path_or_buf):
    """Flat text: ``key=value`` lines, then ``index,alpha,label`` per support vector."""
    lines = [
        "# qencbench svc model",
        f"C={model.C!r}",
        f"bias={model.bias!r}",
        f"n_train={model.n_train}",
        f"n_iter={model.n_iter}",
        f"jitter={model.jitter!r}",
        "index,alpha,label",
    ]
    lines += [f"{i},{float(model.alpha[i])!r},{int(model.labels[i])}" for i in model.support]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_model(path_or_buf, labels):
    """Inverse of :func:`dump_model`; ``labels`` restores the full training labels."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, encoding="utf-8") as fh:
            text = fh.read()
    meta, rows, body = {}, [], False
    y = _as_labels(labels)
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        if line == "index,alpha,label":
            body = True
        elif body:
            i, a, _ = line.split(",")
            rows.append((int(i), float(a)))
        else:
            k, v = line.split("=", 1)
            meta[k] = v
    if int(meta["n_train"]) != y.size:
        raise ArgumentError("label count does not match the stored model")
    alpha = np.zeros(y.size)
    for i, a in rows:
        alpha[i] = a
    return SvcModel(alpha=alpha, labels=y, bias=float(meta["bias"]), C=float(meta["C"]),
                    n_iter=int(meta["n_iter"]), jitter=float(meta["jitter"]))
