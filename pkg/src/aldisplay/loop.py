"""Session orchestration: propose display -> oracle labels -> update.

One session is a strictly serialized state machine. Every label
submission (1) settles the reward for the action that produced the
just-labeled display, (2) absorbs the labels and debits the budget,
(3) retrains the classifier, (4) evaluates test EER when ground truth
exists, (5) proposes the next display per strategy, and (6) appends one
run-log record.
"""

from __future__ import annotations

import json
import math
import queue
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .clustering import Partition, kmeans
from .config import RunConfig
from .policy import (
    FREEZE_ACTIONS,
    QTable,
    SizeLadder,
    apply_size_move,
    choose_action,
    combo_flags,
    compute_reward,
    decode_action,
    update_q,
)
from .pool import Budget, LabeledSet, Pool, sampling_rate
from .scorer import build_f_matrix, eer, score_batch, train_classifier
from .selector import (
    CriterionWeights,
    maxmin_display,
    random_display,
    select_display,
    solve_relevance,
    uncertainty_display,
)

RL_STRATEGIES = ("rl-adaptive", "rl-fixed-size")


class LoopError(ValueError):
    pass


class LabelMismatchError(LoopError):
    def __init__(self, missing, extra):
        self.missing = sorted(missing)
        self.extra = sorted(extra)
        super().__init__(
            f"labels do not cover the pending display exactly "
            f"(missing={self.missing}, extra={self.extra})"
        )


class BudgetExhaustedError(LoopError):
    pass


@dataclass
class RunRecord:
    iteration: int
    strategy: str
    action: int | None
    display_ids: list[int]
    display_size: int
    labels: dict[int, int]
    reward: float | None
    error_rate_on_display: float | None
    test_eer: float | None
    samp_pct: float
    q_values: list[float] | None
    wall_time_s: float | None = None

    def to_dict(self, include_timing=False) -> dict:
        out = {
            "type": "record",
            "iteration": self.iteration,
            "strategy": self.strategy,
            "action": self.action,
            "display_ids": list(self.display_ids),
            "display_size": self.display_size,
            "labels": {str(k): int(self.labels[k]) for k in sorted(self.labels)},
            "reward": self.reward,
            "error_rate_on_display": self.error_rate_on_display,
            "test_eer": self.test_eer,
            "samp_pct": self.samp_pct,
            "q_values": self.q_values,
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time_s
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(
            iteration=data["iteration"],
            strategy=data["strategy"],
            action=data["action"],
            display_ids=list(data["display_ids"]),
            display_size=data["display_size"],
            labels={int(k): int(v) for k, v in data["labels"].items()},
            reward=data["reward"],
            error_rate_on_display=data["error_rate_on_display"],
            test_eer=data["test_eer"],
            samp_pct=data["samp_pct"],
            q_values=data["q_values"],
            wall_time_s=data.get("wall_time_s"),
        )


class RunLog:
    """Append-only per-iteration records plus run metadata.

    Serialized as JSON lines (meta line first). Timing is volatile and is
    only written when ``include_timing`` is requested, so default files
    are byte-identical across reruns of the same (config, seed).
    """

    def __init__(self, meta: dict):
        self.meta = dict(meta)
        self.records: list[RunRecord] = []

    def append(self, record: RunRecord):
        self.records.append(record)

    @property
    def display_sizes(self) -> list[int]:
        return [r.display_size for r in self.records]

    def to_jsonl(self, include_timing=False) -> str:
        lines = [
            json.dumps(
                {"type": "meta", **self.meta}, sort_keys=True, separators=(",", ":")
            )
        ]
        for rec in self.records:
            lines.append(
                json.dumps(
                    rec.to_dict(include_timing), sort_keys=True, separators=(",", ":")
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str, include_timing=False):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl(include_timing))

    @classmethod
    def load(cls, path: str) -> "RunLog":
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        if not lines:
            raise LoopError(f"empty run log: {path}")
        meta = json.loads(lines[0])
        if meta.get("type") != "meta":
            raise LoopError(f"run log {path} does not start with a meta line")
        meta.pop("type")
        log = cls(meta)
        for ln in lines[1:]:
            data = json.loads(ln)
            if data.get("type") == "record":
                log.append(RunRecord.from_dict(data))
        return log


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


class OracleError(ValueError):
    pass


class SimulatedOracle:
    """Answers from the pool's ground truth."""

    def __init__(self, pool: Pool):
        self.pool = pool

    def label(self, ids) -> dict[int, int]:
        out = {}
        for i in ids:
            item = self.pool.item(int(i))
            if item.truth is None:
                raise OracleError(f"item {i} has no ground truth")
            out[int(i)] = int(item.truth)
        return out


class HumanOracle:
    """Blocks the asking thread until labels are provided from outside.

    ``label`` publishes the pending ids and waits; another thread (e.g. a
    request handler) calls ``provide`` with the answers.
    """

    def __init__(self):
        self.pending: list[int] | None = None
        self._answers: queue.Queue = queue.Queue()

    def label(self, ids) -> dict[int, int]:
        ids = [int(i) for i in ids]
        if not ids:
            return {}
        self.pending = ids
        answers = self._answers.get()
        if set(answers) != set(ids):
            raise OracleError("provided labels do not match the pending ids")
        self.pending = None
        return {int(k): int(v) for k, v in answers.items()}

    def provide(self, labels: dict):
        self._answers.put(dict(labels))


# ---------------------------------------------------------------------------
# session
# ---------------------------------------------------------------------------


@dataclass
class Session:
    train_pool: Pool
    test_pool: Pool | None
    config: RunConfig
    partition: Partition
    labeled: LabeledSet
    budget: Budget
    ladder: SizeLadder
    qtable: QTable | None
    scorer: object | None
    pending_display: list[int]
    pending_action: int | None
    iteration: int
    rng: np.random.Generator
    history: RunLog
    fixed_flags: tuple[int, int, int] | None = None

    @property
    def done(self) -> bool:
        return not self.pending_display

    @property
    def labeled_ids(self) -> frozenset:
        return self.labeled.ids

    def candidates(self) -> list[int]:
        labeled = self.labeled.ids
        return [int(i) for i in self.train_pool.ids if int(i) not in labeled]


def _budget_from_fraction(fraction: float, train_size: int) -> int:
    return math.ceil(fraction * train_size)


def init_session(
    train_pool: Pool,
    test_pool: Pool | None,
    config: RunConfig,
    seed: int | None = None,
) -> Session:
    """Cluster the training pool, draw the random initial display.

    ``seed`` defaults to ``config.seed``; the k-means seed and the
    session's stream are derived children so different consumers never
    share a raw stream.
    """
    seed = config.seed if seed is None else int(seed)
    root = np.random.SeedSequence(seed)
    kmeans_ss, session_ss = root.spawn(2)
    max_labels = _budget_from_fraction(config.budget_fraction, train_pool.n)
    initial = config.display.initial
    if max_labels < initial:
        raise LoopError(
            f"budget {max_labels} smaller than the initial display size {initial}"
        )
    n_clusters = min(config.clusters, train_pool.n)
    partition = kmeans(
        train_pool.features,
        n_clusters,
        seed=int(kmeans_ss.generate_state(1)[0]),
        ids=train_pool.ids,
    )
    rng = np.random.default_rng(session_ss)
    ladder = SizeLadder(
        current=initial,
        min_size=config.display.min_size,
        max_size=config.display.max_size,
        step=config.display.step,
    )
    qtable = None
    if config.strategy in RL_STRATEGIES:
        qtable = QTable.fresh(
            epsilon=config.rl.epsilon.initial,
            learning_rate=config.rl.learning_rate,
            epsilon_decay=config.rl.epsilon.decay,
            epsilon_floor=config.rl.epsilon.floor,
        )
    fixed_flags = None
    if config.strategy == "fixed-combo":
        fixed_flags = combo_flags(config.combo)
    d0 = random_display([int(i) for i in train_pool.ids], initial, rng)
    meta = {
        "config": config.to_dict(),
        "seed": seed,
        "strategy": config.strategy,
        "pool": train_pool.fingerprint(),
        "train_size": train_pool.n,
        "test_size": test_pool.n if test_pool is not None else 0,
        "budget": max_labels,
        "kernel_backend": kernels.backend(),
    }
    return Session(
        train_pool=train_pool,
        test_pool=test_pool,
        config=config,
        partition=partition,
        labeled=LabeledSet(),
        budget=Budget(max_labels),
        ladder=ladder,
        qtable=qtable,
        scorer=None,
        pending_display=d0,
        pending_action=None,
        iteration=0,
        rng=rng,
        history=RunLog(meta),
        fixed_flags=fixed_flags,
    )


def _propose_display(session: Session) -> tuple[list[int], int | None]:
    """Next display per strategy, truncated to the remaining budget."""
    remaining = session.budget.remaining
    if remaining == 0:
        return [], None
    cand = session.candidates()
    if not cand:
        return [], None
    cfg = session.config
    strategy = cfg.strategy
    cap = min(remaining, len(cand))

    if strategy == "random":
        return random_display(cand, min(cfg.display.initial, cap), session.rng), None
    if strategy == "maxmin":
        return (
            maxmin_display(
                cand, session.labeled.ids, min(cfg.display.initial, cap),
                session.train_pool,
            ),
            None,
        )
    if strategy == "uncertainty":
        _, g_hat = score_batch(session.scorer, cand, session.train_pool)
        return uncertainty_display(cand, g_hat, min(cfg.display.initial, cap)), None

    action = None
    if strategy == "fixed-combo":
        weights = CriterionWeights.from_flags(
            *session.fixed_flags, value=cfg.rl.weight_value
        )
        size = min(cfg.display.initial, cap)
    else:
        allowed = FREEZE_ACTIONS if strategy == "rl-fixed-size" else None
        action = choose_action(session.qtable, session.rng, allowed=allowed)
        decoded = decode_action(action)
        session.ladder = apply_size_move(session.ladder, decoded.size_move)
        weights = decoded.weights(cfg.rl.weight_value)
        size = min(session.ladder.current, cap)

    c_sub, d_sub = session.partition.restrict(cand)
    _, g_hat = score_batch(session.scorer, cand, session.train_pool)
    f_sub = build_f_matrix(g_hat)
    rel = solve_relevance(
        np.asarray(cand, dtype=np.int64),
        c_sub,
        d_sub,
        f_sub,
        weights,
        tol=cfg.solver.tol,
        max_iters=cfg.solver.max_iters,
    )
    return select_display(rel, size), action


def _test_eer(session: Session) -> float | None:
    pool = session.test_pool
    if pool is None or not pool.has_truths:
        return None
    truths = pool.truths()
    if len(np.unique(truths)) < 2:
        return None
    _, g_hat = score_batch(session.scorer, [int(i) for i in pool.ids], pool)
    return float(eer(g_hat, truths))


def submit_labels(session: Session, labels: dict) -> Session:
    """Consume oracle labels for the pending display and advance the loop."""
    if session.done:
        raise BudgetExhaustedError("no pending display: the budget is exhausted")
    labels = {int(k): int(v) for k, v in labels.items()}
    pending = set(session.pending_display)
    got = set(labels)
    if pending != got:
        raise LabelMismatchError(missing=pending - got, extra=got - pending)
    for i, lab in labels.items():
        if lab not in (0, 1):
            raise LoopError(f"label for id {i} must be 0 or 1")

    started = time.perf_counter()
    display = list(session.pending_display)
    cfg = session.config

    error_rate = None
    reward = None
    if session.scorer is not None:
        _, g_hat = score_batch(session.scorer, display, session.train_pool)
        ordered = sorted(display)
        predicted = (g_hat > 0.5).astype(np.int64)
        actual = np.array([labels[i] for i in ordered], dtype=np.int64)
        error_rate = float(np.mean(predicted != actual))
        if cfg.strategy in RL_STRATEGIES and session.pending_action is not None:
            reward = compute_reward(
                error_rate, len(display), session.ladder, cfg.rl.omega
            )
            session.qtable = update_q(session.qtable, session.pending_action, reward)

    settled_action = session.pending_action
    session.labeled = session.labeled.extended(labels, session.iteration)
    session.budget = session.budget.spend(len(display))
    session.scorer = train_classifier(
        session.labeled, session.train_pool, cfg.classifier
    )
    test_eer = _test_eer(session)

    next_display, next_action = _propose_display(session)
    session.pending_display = next_display
    session.pending_action = next_action

    record = RunRecord(
        iteration=session.iteration,
        strategy=cfg.strategy if cfg.strategy != "fixed-combo" else f"fixed:{cfg.combo}",
        action=settled_action,
        display_ids=display,
        display_size=len(display),
        labels=labels,
        reward=reward,
        error_rate_on_display=error_rate,
        test_eer=test_eer,
        samp_pct=sampling_rate(
            session.history.display_sizes + [len(display)], session.train_pool.n
        ),
        q_values=[float(v) for v in session.qtable.q] if session.qtable else None,
        wall_time_s=time.perf_counter() - started,
    )
    session.history.append(record)
    session.iteration += 1
    return session


def oracle_label(oracle, ids) -> dict[int, int]:
    """Ask an oracle for labels on ``ids``."""
    return oracle.label(ids)


def run_simulated(
    train_pool: Pool,
    test_pool: Pool | None,
    config: RunConfig,
    seed: int | None = None,
) -> RunLog:
    """Drive a full session with the ground-truth oracle until exhaustion."""
    if not train_pool.has_truths:
        raise OracleError("simulated runs need ground truth on the training pool")
    if len(np.unique(train_pool.truths())) < 2:
        raise OracleError("simulated runs need both classes in the training pool")
    session = init_session(train_pool, test_pool, config, seed)
    oracle = SimulatedOracle(train_pool)
    while not session.done:
        labels = oracle_label(oracle, session.pending_display)
        submit_labels(session, labels)
    return session.history


def fully_supervised_eer(train_pool: Pool, test_pool: Pool, settings) -> float:
    """Upper-bound reference: train on the whole labeled train half."""
    labels = {int(i): int(t) for i, t in zip(train_pool.ids, train_pool.truths())}
    labeled = LabeledSet().extended(labels, 0)
    scorer = train_classifier(labeled, train_pool, settings)
    _, g_hat = score_batch(scorer, [int(i) for i in test_pool.ids], test_pool)
    return float(eer(g_hat, test_pool.truths()))
