"""Display selection: relevance optimization on the simplex and baselines.

The relevance vector ``mu`` is a probability distribution over the
unlabeled candidates scoring how much each one should shape the next
display. It minimizes a convex mix of representativity (distance to
cluster centroid), diversity (entropy of the cluster masses), ambiguity
(entropy of the classifier scores) and a cardinality/entropy regularizer,
via a closed-form multiplicative update iterated to a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import LOG_CLAMP


class SelectorError(ValueError):
    pass


@dataclass(frozen=True)
class CriterionWeights:
    """Nonnegative mix of the three selection criteria.

    ``eta`` weights representativity, ``alpha`` diversity, ``beta``
    ambiguity; the entropy regularizer's weight is fixed at 1.
    """

    eta: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.eta < 0 or self.alpha < 0 or self.beta < 0:
            raise SelectorError("criterion weights must be nonnegative")

    @classmethod
    def from_flags(cls, use_eta, use_alpha, use_beta, value=1.0):
        return cls(
            eta=value if use_eta else 0.0,
            alpha=value if use_alpha else 0.0,
            beta=value if use_beta else 0.0,
        )


@dataclass(frozen=True)
class RelevanceVector:
    """Relevance distribution over a candidate set, ascending-id aligned."""

    ids: np.ndarray
    mu: np.ndarray
    iterations: int = 0
    final_gap: float = 0.0

    def __post_init__(self):
        if len(self.ids) != len(self.mu):
            raise SelectorError("ids and mu must be aligned")


def _xlogx(v):
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(v)
    mask = v > 0.0
    out[mask] = v[mask] * np.log(v[mask])
    return out


def objective(rel: RelevanceVector, c_mat, d_mat, f_mat, weights) -> float:
    """Evaluate the combined selection objective at ``rel.mu``.

    Terms: eta * sum_i mu_i * d2(i, centroid(i)) + alpha * sum_k m_k log
    m_k (m = cluster masses) + beta * sum_i mu_i * sum_c F_ic log F_ic +
    sum_i mu_i log mu_i, with 0 log 0 = 0.
    """
    mu = np.asarray(rel.mu, dtype=np.float64)
    c_mat = np.asarray(c_mat, dtype=np.float64)
    d_mat = np.asarray(d_mat, dtype=np.float64)
    f_mat = np.asarray(f_mat, dtype=np.float64)
    n = len(mu)
    if c_mat.shape[0] != n or d_mat.shape != c_mat.shape or f_mat.shape[0] != n:
        raise SelectorError("objective inputs have mismatched shapes")
    rep = float(mu @ (d_mat * c_mat).sum(axis=1))
    div = float(_xlogx(c_mat.T @ mu).sum())
    amb = float(mu @ (f_mat * np.log(np.maximum(f_mat, LOG_CLAMP))).sum(axis=1))
    card = float(_xlogx(mu).sum())
    return weights.eta * rep + weights.alpha * div + weights.beta * amb + card


def solve_relevance(
    ids,
    c_mat,
    d_mat,
    f_mat,
    weights: CriterionWeights,
    tol: float = 1e-8,
    max_iters: int = 100,
) -> RelevanceVector:
    """Minimize the selection objective by multiplicative updates.

    Starts from the uniform distribution and iterates

        mu ∝ exp(-eta * rowsum(D∘C)) ∘ exp(-alpha * C(log(Cᵀmu) + 1))
             ∘ exp(-beta * rowsum(F∘log F))

    renormalizing each pass, until the L1 change drops below ``tol`` or
    ``max_iters`` passes run. Log arguments are clamped below at 1e-12.
    With ``alpha == 0`` the update does not depend on the iterate, so the
    first pass already is the fixed point. With ``alpha > 0`` the passes
    are geometrically relaxed (exponent alpha / (1 + alpha)) so the
    iteration contracts to the fixed point instead of orbiting the
    2-cycles the plain update falls into once alpha reaches the entropy
    weight.
    """
    ids = np.asarray(ids, dtype=np.int64)
    c_mat = np.asarray(c_mat, dtype=np.float64)
    d_mat = np.asarray(d_mat, dtype=np.float64)
    f_mat = np.asarray(f_mat, dtype=np.float64)
    n = len(ids)
    if n == 0:
        raise SelectorError("candidate set is empty")
    if np.any(np.diff(ids) <= 0):
        raise SelectorError("ids must be strictly ascending")
    if c_mat.shape[0] != n or d_mat.shape != c_mat.shape or f_mat.shape[0] != n:
        raise SelectorError("solver inputs have mismatched shapes")
    rep_term = (d_mat * c_mat).sum(axis=1)
    amb_term = (f_mat * np.log(np.maximum(f_mat, LOG_CLAMP))).sum(axis=1)
    static_log = -weights.eta * rep_term - weights.beta * amb_term
    assign = np.argmax(c_mat, axis=1).astype(np.int64)
    mu, iters, gap = kernels.relevance_iterate(
        static_log, assign, c_mat.shape[1], weights.alpha, tol, max_iters
    )
    return RelevanceVector(ids=ids, mu=mu, iterations=iters, final_gap=gap)


# ---------------------------------------------------------------------------
# display extraction and baseline samplers
# ---------------------------------------------------------------------------


def select_display(rel: RelevanceVector, size: int) -> list[int]:
    """Ids of the ``size`` largest relevances, descending-mu order.

    Ties break toward the lower id.
    """
    n = len(rel.ids)
    if not 1 <= size <= n:
        raise SelectorError(f"display size {size} outside [1, {n}]")
    order = np.lexsort((rel.ids, -rel.mu))
    return [int(rel.ids[i]) for i in order[:size]]


def random_display(candidates, size: int, rng) -> list[int]:
    """Uniform sample without replacement from the candidate ids."""
    cand = sorted(int(i) for i in candidates)
    if not 1 <= size <= len(cand):
        raise SelectorError(f"display size {size} outside [1, {len(cand)}]")
    picks = rng.choice(len(cand), size=size, replace=False)
    return [cand[int(i)] for i in picks]


def maxmin_display(candidates, labeled_ids, size: int, pool) -> list[int]:
    """Greedy farthest-first batch w.r.t. labeled + already-chosen points.

    When nothing is labeled yet the batch is seeded with the lowest
    candidate id. Ties break toward the lower id.
    """
    cand = sorted(int(i) for i in candidates)
    if not 1 <= size <= len(cand):
        raise SelectorError(f"display size {size} outside [1, {len(cand)}]")
    feats = pool.features[pool.rows_of(cand)]
    labeled_ids = sorted(int(i) for i in labeled_ids)
    chosen: list[int] = []
    if labeled_ids:
        ref = pool.features[pool.rows_of(labeled_ids)]
        min_dist = np.sqrt(
            ((feats[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
        ).min(axis=1)
    else:
        chosen.append(cand[0])
        if size == 1:
            return chosen
        min_dist = np.sqrt(((feats - feats[0]) ** 2).sum(axis=1))
        min_dist[0] = -1.0
    picks = kernels.maxmin_greedy(feats, min_dist, size - len(chosen))
    chosen.extend(cand[int(i)] for i in picks)
    return chosen


def uncertainty_display(ids, g_hat, size: int) -> list[int]:
    """Ids whose normalized scores sit closest to 0.5, most ambiguous first.

    Under the logistic link this matches ranking raw decision values by
    |g|. Ties break toward the lower id.
    """
    ids = np.asarray(ids, dtype=np.int64)
    g_hat = np.asarray(g_hat, dtype=np.float64)
    if len(ids) != len(g_hat):
        raise SelectorError("ids and g_hat must be aligned")
    if not 1 <= size <= len(ids):
        raise SelectorError(f"display size {size} outside [1, {len(ids)}]")
    order = np.lexsort((ids, np.abs(g_hat - 0.5)))
    return [int(ids[i]) for i in order[:size]]
