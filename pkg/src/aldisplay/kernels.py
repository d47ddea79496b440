"""Hot numeric kernels with optional numba acceleration.

Every kernel ships in two flavors: a pure-numpy implementation
(``*_numpy``) and a numba ``@njit`` twin (``*_numba``). The public names
(``sqdist_matrix``, ``logreg_fit``, ``relevance_iterate``,
``maxmin_greedy``) are bound once at import time: numba wins when it is
importable and the environment variable ``ALDISPLAY_DISABLE_NUMBA`` is not
set to ``1``/``true``/``yes``. ``benchmarks/bench_kernels.py`` times both
flavors side by side.

Both flavors are deterministic; tiny float differences between them can
occur because numpy reductions and explicit loops accumulate in different
orders, so reproducibility guarantees hold per backend.
"""

import math
import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


_DISABLED = os.environ.get("ALDISPLAY_DISABLE_NUMBA", "").strip().lower() in (
    "1",
    "true",
    "yes",
)
USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED

LOG_CLAMP = 1e-12


def backend() -> str:
    """Name of the kernel backend selected at import time."""
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pairwise squared euclidean distances
# ---------------------------------------------------------------------------


def sqdist_matrix_numpy(points, centers):
    """Squared euclidean distance from every point to every center.

    Returns an (n, k) float64 matrix. Computed from explicit differences
    (not the expanded-square trick) so coincident point/center pairs give
    exact zeros.
    """
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


@njit(cache=True)
def _sqdist_matrix_jit(points, centers):
    n, d = points.shape
    k = centers.shape[0]
    out = np.empty((n, k), dtype=np.float64)
    for i in range(n):
        for j in range(k):
            acc = 0.0
            for t in range(d):
                delta = points[i, t] - centers[j, t]
                acc += delta * delta
            out[i, j] = acc
    return out


def sqdist_matrix_numba(points, centers):
    points = np.ascontiguousarray(points, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    return _sqdist_matrix_jit(points, centers)


# ---------------------------------------------------------------------------
# L2-regularized logistic regression, full-batch gradient descent
# ---------------------------------------------------------------------------


def _sigmoid_np(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_fit_numpy(xb, y, step_size, l2, grad_tol, max_epochs):
    """Fit weights by fixed-step batch gradient descent.

    ``xb`` already carries the bias column. Returns ``(w, epochs, trace)``
    where ``epochs`` counts performed weight updates and ``trace`` holds
    the regularized mean cross-entropy at every visited iterate
    (``epochs + 1`` values).
    """
    xb = np.asarray(xb, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = xb.shape
    w = np.zeros(d)
    trace = np.empty(max_epochs + 1)
    epochs = 0
    for e in range(max_epochs):
        z = xb @ w
        p = _sigmoid_np(z)
        loss = float(np.mean(np.logaddexp(0.0, -z) + (1.0 - y) * z))
        trace[e] = loss + 0.5 * l2 * float(w @ w)
        grad = xb.T @ (p - y) / n + l2 * w
        if math.sqrt(float(grad @ grad)) < grad_tol:
            return w, epochs, trace[: epochs + 1].copy()
        w = w - step_size * grad
        epochs += 1
    z = xb @ w
    trace[epochs] = float(
        np.mean(np.logaddexp(0.0, -z) + (1.0 - y) * z)
    ) + 0.5 * l2 * float(w @ w)
    return w, epochs, trace[: epochs + 1].copy()


@njit(cache=True)
def _logreg_fit_jit(xb, y, step_size, l2, grad_tol, max_epochs):
    n, d = xb.shape
    w = np.zeros(d)
    grad = np.empty(d)
    trace = np.empty(max_epochs + 1)
    epochs = 0
    for e in range(max_epochs):
        loss = 0.0
        for j in range(d):
            grad[j] = l2 * w[j]
        for i in range(n):
            z = 0.0
            for j in range(d):
                z += xb[i, j] * w[j]
            if z >= 0.0:
                p = 1.0 / (1.0 + math.exp(-z))
                loss += math.log1p(math.exp(-z)) + (1.0 - y[i]) * z
            else:
                ez = math.exp(z)
                p = ez / (1.0 + ez)
                loss += math.log1p(ez) - z + (1.0 - y[i]) * z
            resid = (p - y[i]) / n
            for j in range(d):
                grad[j] += resid * xb[i, j]
        reg = 0.0
        for j in range(d):
            reg += w[j] * w[j]
        trace[e] = loss / n + 0.5 * l2 * reg
        gnorm = 0.0
        for j in range(d):
            gnorm += grad[j] * grad[j]
        if math.sqrt(gnorm) < grad_tol:
            return w, epochs, trace[: epochs + 1].copy()
        for j in range(d):
            w[j] -= step_size * grad[j]
        epochs += 1
    loss = 0.0
    for i in range(n):
        z = 0.0
        for j in range(d):
            z += xb[i, j] * w[j]
        if z >= 0.0:
            loss += math.log1p(math.exp(-z)) + (1.0 - y[i]) * z
        else:
            loss += math.log1p(math.exp(z)) - z + (1.0 - y[i]) * z
    reg = 0.0
    for j in range(d):
        reg += w[j] * w[j]
    trace[epochs] = loss / n + 0.5 * l2 * reg
    return w, epochs, trace[: epochs + 1].copy()


def logreg_fit_numba(xb, y, step_size, l2, grad_tol, max_epochs):
    xb = np.ascontiguousarray(xb, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return _logreg_fit_jit(
        xb, y, float(step_size), float(l2), float(grad_tol), int(max_epochs)
    )


# ---------------------------------------------------------------------------
# relevance-vector fixed point on the simplex
# ---------------------------------------------------------------------------


def relevance_iterate_numpy(static_log, assign, n_clusters, alpha, tol, max_iters):
    """Iterate the multiplicative simplex update until the L1 gap < tol.

    ``static_log`` is the per-item log factor that does not depend on the
    current iterate (representativity + ambiguity terms); the diversity
    term re-reads the cluster masses of the current iterate each pass.

    The raw update is relaxed geometrically with exponent
    theta = alpha / (1 + alpha): the relaxed map keeps the raw map's
    fixed points but contracts for every alpha >= 0 (the undamped map
    orbits 2-cycles once alpha reaches the entropy weight). At alpha == 0
    theta is 0, so the first pass is exactly the closed-form solution.
    Returns ``(mu, iterations, final_gap)``.
    """
    static_log = np.asarray(static_log, dtype=np.float64)
    n = static_log.shape[0]
    mu = np.full(n, 1.0 / n)
    log_mu = np.full(n, -np.log(n))
    theta = alpha / (1.0 + alpha)
    iters = 0
    gap = 0.0
    for _ in range(max_iters):
        if alpha != 0.0:
            mass = np.bincount(assign, weights=mu, minlength=n_clusters)
            raw = static_log - alpha * (
                np.log(np.maximum(mass[assign], LOG_CLAMP)) + 1.0
            )
            lg = (1.0 - theta) * raw + theta * log_mu
        else:
            lg = static_log
        lg = lg - lg.max()
        nxt = np.exp(lg)
        total = nxt.sum()
        nxt /= total
        log_mu = lg - np.log(total)
        gap = float(np.abs(nxt - mu).sum())
        mu = nxt
        iters += 1
        if gap < tol:
            break
    return mu, iters, gap


@njit(cache=True)
def _relevance_iterate_jit(static_log, assign, n_clusters, alpha, tol, max_iters):
    n = static_log.shape[0]
    mu = np.full(n, 1.0 / n)
    log_mu = np.full(n, -math.log(n))
    lg = np.empty(n)
    mass = np.empty(n_clusters)
    theta = alpha / (1.0 + alpha)
    iters = 0
    gap = 0.0
    for _ in range(max_iters):
        if alpha != 0.0:
            for k in range(n_clusters):
                mass[k] = 0.0
            for i in range(n):
                mass[assign[i]] += mu[i]
            for i in range(n):
                m = mass[assign[i]]
                if m < LOG_CLAMP:
                    m = LOG_CLAMP
                raw = static_log[i] - alpha * (math.log(m) + 1.0)
                lg[i] = (1.0 - theta) * raw + theta * log_mu[i]
        else:
            for i in range(n):
                lg[i] = static_log[i]
        top = lg[0]
        for i in range(1, n):
            if lg[i] > top:
                top = lg[i]
        total = 0.0
        for i in range(n):
            lg[i] = lg[i] - top
            total += math.exp(lg[i])
        log_total = math.log(total)
        gap = 0.0
        for i in range(n):
            nxt = math.exp(lg[i]) / total
            log_mu[i] = lg[i] - log_total
            gap += abs(nxt - mu[i])
            mu[i] = nxt
        iters += 1
        if gap < tol:
            break
    return mu, iters, gap


def relevance_iterate_numba(static_log, assign, n_clusters, alpha, tol, max_iters):
    static_log = np.ascontiguousarray(static_log, dtype=np.float64)
    assign = np.ascontiguousarray(assign, dtype=np.int64)
    return _relevance_iterate_jit(
        static_log, assign, int(n_clusters), float(alpha), float(tol), int(max_iters)
    )


# ---------------------------------------------------------------------------
# greedy farthest-first (maxmin) selection
# ---------------------------------------------------------------------------


def maxmin_greedy_numpy(feats, min_dist, size):
    """Greedy max-min picks over candidate rows.

    ``min_dist`` holds each candidate's euclidean distance to the nearest
    already-labeled point; rows are in ascending-id order so argmax's
    first-occurrence rule implements the lowest-id tie break. Returns the
    chosen row indices in pick order.
    """
    feats = np.asarray(feats, dtype=np.float64)
    min_dist = np.asarray(min_dist, dtype=np.float64).copy()
    chosen = np.empty(size, dtype=np.int64)
    for s in range(size):
        best = int(np.argmax(min_dist))
        chosen[s] = best
        min_dist[best] = -1.0
        d = np.sqrt(((feats - feats[best]) ** 2).sum(axis=1))
        np.minimum(min_dist, d, out=min_dist)
    return chosen


@njit(cache=True)
def _maxmin_greedy_jit(feats, min_dist, size):
    n, d = feats.shape
    work = min_dist.copy()
    chosen = np.empty(size, dtype=np.int64)
    for s in range(size):
        best = 0
        best_val = work[0]
        for i in range(1, n):
            if work[i] > best_val:
                best_val = work[i]
                best = i
        chosen[s] = best
        work[best] = -1.0
        for i in range(n):
            acc = 0.0
            for t in range(d):
                delta = feats[i, t] - feats[best, t]
                acc += delta * delta
            dist = math.sqrt(acc)
            if dist < work[i]:
                work[i] = dist
    return chosen


def maxmin_greedy_numba(feats, min_dist, size):
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    min_dist = np.ascontiguousarray(min_dist, dtype=np.float64)
    return _maxmin_greedy_jit(feats, min_dist, int(size))


if USE_NUMBA:
    sqdist_matrix = sqdist_matrix_numba
    logreg_fit = logreg_fit_numba
    relevance_iterate = relevance_iterate_numba
    maxmin_greedy = maxmin_greedy_numba
else:
    sqdist_matrix = sqdist_matrix_numpy
    logreg_fit = logreg_fit_numpy
    relevance_iterate = relevance_iterate_numpy
    maxmin_greedy = maxmin_greedy_numpy
