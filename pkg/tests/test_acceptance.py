"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a ``[PASS] ...`` line on success (run with ``-s`` to see
them); a failed assertion marks the criterion red.
"""

import math

import numpy as np
import pytest

from aldisplay.config import config_from_dict
from aldisplay.loop import fully_supervised_eer, run_simulated
from aldisplay.policy import N_ACTIONS, QTable, choose_action, update_q
from aldisplay.pool import generate_synthetic, sampling_rate, split_train_test
from aldisplay.scorer import TrainingSettings, build_f_matrix, eer, logistic_loss_grad
from aldisplay.selector import (
    CriterionWeights,
    maxmin_display,
    objective,
    solve_relevance,
)
from oracles import (
    eer_sweep,
    finite_difference_gradient,
    grid_min_objective,
    maxmin_greedy_trace,
)

TABLE_ROWS = {
    8: [(2, 1.45), (4, 2.90), (6, 4.36), (8, 5.81), (10, 7.27), (12, 8.72),
        (14, 10.18), (16, 11.63)],
    16: [(2, 2.90), (3, 4.36), (4, 5.81), (5, 7.27), (6, 8.72), (7, 10.18),
         (8, 11.63)],
    32: [(2, 5.81), (3, 8.72), (4, 11.63)],
}


def test_budget_arithmetic_matches_reference_table():
    """Samp% sequences for fixed sizes 8/16/32 on a 1100-item train half."""
    for size, row in TABLE_ROWS.items():
        for iters, expected in row:
            got = sampling_rate([size] * iters, 1100)
            assert got == expected, (size, iters, got, expected)
    print("[PASS] budget arithmetic: Samp% rows exact at 2 decimals")


def test_closed_form_solver_alpha_zero():
    """Non-recursive cases reproduce the analytic single step to 1e-9."""
    ids2 = np.array([0, 1])
    ones = np.ones((2, 1))
    flat_f = build_f_matrix(np.array([0.5, 0.5]))

    rel = solve_relevance(
        ids2, ones, np.array([[0.0], [math.log(4)]]), flat_f,
        CriterionWeights(eta=1.0),
    )
    assert np.max(np.abs(rel.mu - [0.8, 0.2])) <= 1e-9

    amb_f = build_f_matrix(np.array([0.5, 1.0 - 1e-12]))
    rel = solve_relevance(
        ids2, ones, np.zeros((2, 1)), amb_f, CriterionWeights(beta=1.0)
    )
    assert np.max(np.abs(rel.mu - [2.0 / 3.0, 1.0 / 3.0])) <= 1e-9

    rng = np.random.default_rng(17)
    for _ in range(20):
        n = int(rng.integers(2, 25))
        k = int(rng.integers(1, 4))
        assign = rng.integers(0, k, n)
        c = np.zeros((n, k))
        c[np.arange(n), assign] = 1.0
        d = np.zeros((n, k))
        d[np.arange(n), assign] = rng.uniform(0, 3, n)
        f = build_f_matrix(rng.uniform(0, 1, n))
        w = CriterionWeights(eta=float(rng.uniform(0, 2)), beta=float(rng.uniform(0, 2)))
        rel = solve_relevance(np.arange(n), c, d, f, w)
        expo = -w.eta * (d * c).sum(axis=1) - w.beta * (f * np.log(f)).sum(axis=1)
        expected = np.exp(expo) / np.exp(expo).sum()
        assert np.max(np.abs(rel.mu - expected)) <= 1e-9
    print("[PASS] alpha=0 closed forms within 1e-9")


def test_convex_oracle_equivalence():
    """Solver objective <= dense simplex-grid minimum + 1e-3, 50 instances."""
    rng = np.random.default_rng(90)
    checked = 0
    while checked < 50:
        n = int(rng.integers(3, 7))
        k = int(rng.integers(2, 4))
        assign = rng.integers(0, k, n)
        c = np.zeros((n, k))
        c[np.arange(n), assign] = 1.0
        d = np.zeros((n, k))
        d[np.arange(n), assign] = rng.uniform(0.0, 4.0, n)
        f = build_f_matrix(rng.uniform(0.0, 1.0, n))
        w = CriterionWeights(
            eta=float(rng.uniform(0, 1.5)),
            alpha=float(rng.uniform(0, 1.0)),
            beta=float(rng.uniform(0, 1.5)),
        )
        rel = solve_relevance(np.arange(n), c, d, f, w)
        val = objective(rel, c, d, f, w)
        lin = w.eta * (d * c).sum(axis=1) + w.beta * (f * np.log(f)).sum(axis=1)
        grid = grid_min_objective(lin, assign, k, w.alpha)
        assert val <= grid + 1e-3, (n, k, val, grid)
        checked += 1
    print("[PASS] convex-oracle equivalence on 50 instances")


def test_eer_matches_exhaustive_sweep_oracle():
    """Exact agreement with the independent threshold-sweep oracle."""
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 51))
        truths = rng.integers(0, 2, n)
        if len(set(truths.tolist())) < 2:
            continue
        if rng.random() < 0.5:
            scores = np.round(rng.uniform(0, 1, n), 2)  # ties likely
        else:
            scores = rng.standard_normal(n)
        assert eer(scores, truths) == eer_sweep(scores, truths)
        checked += 1
    print("[PASS] EER equals the exhaustive sweep oracle on 100 sets")


def test_classifier_gradient_check():
    """Analytic vs central finite differences, relative error <= 1e-5."""
    rng = np.random.default_rng(77)
    for _ in range(20):
        n = int(rng.integers(4, 40))
        d = int(rng.integers(1, 8))
        xb = np.hstack([rng.standard_normal((n, d)), np.ones((n, 1))])
        y = rng.integers(0, 2, n).astype(float)
        w = rng.standard_normal(d + 1)
        l2 = float(rng.uniform(0, 1))
        _, grad = logistic_loss_grad(w, xb, y, l2)
        fd = finite_difference_gradient(
            lambda v: logistic_loss_grad(v, xb, y, l2)[0], w
        )
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-300)
        assert rel <= 1e-5
    print("[PASS] gradient check within 1e-5 on 20 instances")


def test_bandit_identification():
    """Margin 0.3, sigma 0.1: greedy-best after 500 steps in >= 95/100 seeds."""
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        best_arm = int(rng.integers(N_ACTIONS))
        means = np.full(N_ACTIONS, -0.15)
        means[best_arm] = 0.15
        q = QTable.fresh()
        for _ in range(500):
            arm = choose_action(q, rng)
            q = update_q(q, arm, float(rng.normal(means[arm], 0.1)))
        hits += int(np.argmax(q.q) == best_arm)
    assert hits >= 95, hits
    print(f"[PASS] bandit identification in {hits}/100 seeds")


def test_maxmin_equivalence():
    """Greedy trace equals a from-scratch greedy re-implementation."""
    from aldisplay.pool import Pool, PoolItem

    rng = np.random.default_rng(55)
    for _ in range(50):
        n = int(rng.integers(4, 13))
        d = int(rng.integers(1, 4))
        feats = rng.standard_normal((n, d))
        pool = Pool([PoolItem(i, feats[i]) for i in range(n)], d)
        n_labeled = int(rng.integers(0, 3))
        labeled = [int(i) for i in rng.choice(n, n_labeled, replace=False)]
        cand = [i for i in range(n) if i not in labeled]
        size = int(rng.integers(1, len(cand) + 1))
        got = maxmin_display(cand, labeled, size, pool)
        want = maxmin_greedy_trace(cand, labeled, size, lambda i: feats[i].tolist())
        assert got == want
    print("[PASS] maxmin equals brute-force greedy on 50 instances")


@pytest.fixture(scope="module")
def default_pool():
    return generate_synthetic(2200, 8, 0.0177, 7.0, 7)


def test_qualitative_trend_reproduction(default_pool):
    """Strategy ordering on the default pool at an 11.63% budget, 10 seeds.

    mean EER: rl-adaptive <= random, rl-adaptive <= uncertainty,
    rl-adaptive >= fully supervised (ties allowed).
    """
    means = {}
    for strategy in ("rl-adaptive", "random", "uncertainty"):
        finals = []
        for seed in range(10):
            cfg = config_from_dict({"strategy": strategy, "seed": seed})
            train, test = split_train_test(default_pool, seed)
            log = run_simulated(train, test, cfg)
            finals.append(log.records[-1].test_eer)
        means[strategy] = float(np.mean(finals))
    supervised = float(
        np.mean(
            [
                fully_supervised_eer(
                    *split_train_test(default_pool, seed), TrainingSettings()
                )
                for seed in range(10)
            ]
        )
    )
    assert supervised <= 0.02, supervised
    assert means["rl-adaptive"] <= means["random"], means
    assert means["rl-adaptive"] <= means["uncertainty"], means
    assert means["rl-adaptive"] >= supervised, (means, supervised)
    print(
        "[PASS] trend: rl %.4f <= random %.4f, <= uncertainty %.4f, "
        ">= supervised %.4f"
        % (means["rl-adaptive"], means["random"], means["uncertainty"], supervised)
    )


def test_run_determinism(default_pool):
    """Identical (config, seed) twice -> byte-identical run logs."""
    cfg = config_from_dict({"strategy": "rl-adaptive", "seed": 3})
    train, test = split_train_test(default_pool, 3)
    first = run_simulated(train, test, cfg).to_jsonl()
    second = run_simulated(train, test, cfg).to_jsonl()
    assert first.encode() == second.encode()
    print("[PASS] byte-identical run logs for identical (config, seed)")
