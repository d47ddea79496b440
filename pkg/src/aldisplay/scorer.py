"""Binary scorer: pluggable classifier, normalized scores, and EER.

The shipped reference classifier is L2-regularized logistic regression
fit by full-batch gradient descent. Raw decision values ``g`` map to
normalized scores ``g_hat = logistic(g)``, clamped away from {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

SCORE_EPS = 1e-12


class ScorerError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingSettings:
    step_size: float = 0.1
    l2: float = 1e-3
    max_epochs: int = 300
    grad_tol: float = 1e-6
    kind: str = "logistic"

    def to_dict(self):
        return {
            "step_size": self.step_size,
            "l2": self.l2,
            "max_epochs": self.max_epochs,
            "grad_tol": self.grad_tol,
            "kind": self.kind,
        }


@dataclass(frozen=True)
class LogisticScorer:
    """Trained linear scorer; immutable and safe for concurrent scoring."""

    weights: np.ndarray  # (d + 1,), bias last
    epochs: int
    loss_trace: np.ndarray = field(repr=False)

    def decision_values(self, feats: np.ndarray) -> np.ndarray:
        feats = np.asarray(feats, dtype=np.float64)
        return feats @ self.weights[:-1] + self.weights[-1]


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def normalize_scores(g):
    """Map raw decision values to clamped (0, 1) scores."""
    return np.clip(sigmoid(g), SCORE_EPS, 1.0 - SCORE_EPS)


def logistic_loss_grad(w, xb, y, l2):
    """Regularized mean cross-entropy and its analytic gradient.

    Shared by training and by finite-difference checks; ``xb`` carries the
    bias column.
    """
    w = np.asarray(w, dtype=np.float64)
    xb = np.asarray(xb, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = xb @ w
    loss = float(np.mean(np.logaddexp(0.0, -z) + (1.0 - y) * z))
    loss += 0.5 * l2 * float(w @ w)
    grad = xb.T @ (sigmoid(z) - y) / xb.shape[0] + l2 * w
    return loss, grad


def _bias_augment(feats):
    return np.hstack([feats, np.ones((feats.shape[0], 1))])


def train_classifier(labeled, pool, settings: TrainingSettings | None = None):
    """Fit the reference classifier on the labeled subset of ``pool``.

    Deterministic for fixed data and settings (zero-initialized weights,
    fixed step size). Training with a single observed class is allowed;
    regularization keeps the weights finite.
    """
    settings = settings or TrainingSettings()
    if settings.kind != "logistic":
        raise ScorerError(f"unknown classifier kind '{settings.kind}'")
    if len(labeled) == 0:
        raise ScorerError("cannot train on an empty labeled set")
    ids, y = labeled.arrays()
    feats = pool.features[pool.rows_of(ids)]
    xb = _bias_augment(feats)
    w, epochs, trace = kernels.logreg_fit(
        xb,
        y.astype(np.float64),
        settings.step_size,
        settings.l2,
        settings.grad_tol,
        settings.max_epochs,
    )
    return LogisticScorer(weights=w, epochs=epochs, loss_trace=trace)


def score_batch(scorer, ids, pool):
    """Raw and normalized scores for ``ids``, ascending-id order."""
    ordered = sorted(int(i) for i in ids)
    feats = pool.features[pool.rows_of(ordered)]
    g = scorer.decision_values(feats)
    return g, normalize_scores(g)


def build_f_matrix(g_hat) -> np.ndarray:
    """Two-column score matrix with rows (g_hat, 1 - g_hat).

    Both columns are clamped to [eps, 1 - eps] and the rows renormalized;
    the renormalized sums are exactly 1.0 in float64.
    """
    g_hat = np.asarray(g_hat, dtype=np.float64)
    if g_hat.ndim != 1:
        raise ScorerError("g_hat must be a 1-D vector")
    if np.any((g_hat < 0.0) | (g_hat > 1.0)):
        raise ScorerError("scores must lie in [0, 1]")
    col = np.clip(g_hat, SCORE_EPS, 1.0 - SCORE_EPS)
    comp = np.clip(1.0 - col, SCORE_EPS, 1.0 - SCORE_EPS)
    f = np.column_stack([col, comp])
    return f / f.sum(axis=1, keepdims=True)


def _sweep_points(scores, truths):
    """FNR/FPR at every threshold between distinct sorted scores.

    Valid operating points classify the k smallest scores negative, where
    k only lands on boundaries between distinct score values (plus the
    two all-positive / all-negative extremes).
    """
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    t = truths[order]
    n = len(s)
    n_pos = int(t.sum())
    n_neg = n - n_pos
    cum_pos = np.concatenate([[0], np.cumsum(t)])
    cum_neg = np.concatenate([[0], np.cumsum(1 - t)])
    valid = [0]
    for k in range(1, n):
        if s[k] > s[k - 1]:
            valid.append(k)
    valid.append(n)
    ks = np.array(valid)
    fnr = cum_pos[ks] / n_pos
    fpr = (n_neg - cum_neg[ks]) / n_neg
    return fpr, fnr


def eer(scores, truths) -> float:
    """Equal error rate via an exhaustive midpoint-threshold sweep.

    Sweeps every threshold between consecutive distinct scores plus the
    two extremes; when no operating point has FPR == FNR exactly, the
    crossing is linearly interpolated between the two adjacent points.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    if scores.shape != truths.shape or scores.ndim != 1:
        raise ScorerError("scores and truths must be aligned 1-D vectors")
    if not set(np.unique(truths)) <= {0, 1}:
        raise ScorerError("truths must be binary")
    if len(np.unique(truths)) < 2:
        raise ScorerError("eer needs both classes present")
    fpr, fnr = _sweep_points(scores, truths)
    return interpolate_crossing(fpr, fnr)


def interpolate_crossing(fpr, fnr) -> float:
    """Value where the FPR and FNR curves cross, linear between points."""
    diff = fnr - fpr
    idx = int(np.argmax(diff >= 0.0))
    if diff[idx] == 0.0:
        return float(fpr[idx])
    frac = -diff[idx - 1] / (diff[idx] - diff[idx - 1])
    return float(fpr[idx - 1] + frac * (fpr[idx] - fpr[idx - 1]))
