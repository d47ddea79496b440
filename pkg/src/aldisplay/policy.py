"""Stateless Q-learning over criterion combinations and display-size moves.

The action grid crosses the 7 non-empty on/off settings of the three
selection criteria with 3 display-size moves (shrink / freeze / grow),
giving 21 arms. Values are learned bandit-style: the Bellman target with
no successor state is just the immediate reward, so Q(a) tracks an
exponential recency-weighted average of rewards.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .selector import CriterionWeights


class PolicyError(ValueError):
    pass


# (use_eta, use_alpha, use_beta): rep, amb, div, amb+rep, div+amb, div+rep, all
FLAG_COMBOS = (
    (1, 0, 0),
    (0, 0, 1),
    (0, 1, 0),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 0),
    (1, 1, 1),
)
COMBO_NAMES = ("rep", "amb", "div", "amb+rep", "div+amb", "div+rep", "all")
SIZE_MOVES = (-1, 0, +1)
N_ACTIONS = len(FLAG_COMBOS) * len(SIZE_MOVES)
FREEZE_ACTIONS = tuple(c * 3 + 1 for c in range(len(FLAG_COMBOS)))


@dataclass(frozen=True)
class ActionConfig:
    index: int
    flags: tuple[int, int, int]  # (use_eta, use_alpha, use_beta)
    size_move: int

    @property
    def combo_name(self) -> str:
        return COMBO_NAMES[self.index // 3]

    def weights(self, value: float = 1.0) -> CriterionWeights:
        return CriterionWeights.from_flags(*self.flags, value=value)


def decode_action(index: int) -> ActionConfig:
    """Bijective decoding of 0..20 into (criterion flags, size move)."""
    if not 0 <= index < N_ACTIONS:
        raise PolicyError(f"action index {index} outside 0..{N_ACTIONS - 1}")
    return ActionConfig(
        index=index,
        flags=FLAG_COMBOS[index // 3],
        size_move=SIZE_MOVES[index % 3],
    )


def combo_flags(name: str) -> tuple[int, int, int]:
    """Criterion flags for a combination name such as 'div+rep'."""
    try:
        return FLAG_COMBOS[COMBO_NAMES.index(name)]
    except ValueError:
        raise PolicyError(
            f"unknown combination '{name}' (expected one of {COMBO_NAMES})"
        ) from None


@dataclass(frozen=True)
class QTable:
    q: np.ndarray
    counts: np.ndarray
    epsilon: float = 1.0
    learning_rate: float = 0.1
    epsilon_decay: float = 0.9
    epsilon_floor: float = 0.1

    @classmethod
    def fresh(cls, epsilon=1.0, learning_rate=0.1, epsilon_decay=0.9, epsilon_floor=0.1):
        return cls(
            q=np.zeros(N_ACTIONS),
            counts=np.zeros(N_ACTIONS, dtype=np.int64),
            epsilon=float(epsilon),
            learning_rate=float(learning_rate),
            epsilon_decay=float(epsilon_decay),
            epsilon_floor=float(epsilon_floor),
        )

    def __post_init__(self):
        if self.q.shape != (N_ACTIONS,) or self.counts.shape != (N_ACTIONS,):
            raise PolicyError(f"q and counts must have {N_ACTIONS} entries")
        if not 0.0 <= self.epsilon <= 1.0:
            raise PolicyError("epsilon must lie in [0, 1]")
        if not 0.0 < self.learning_rate <= 1.0:
            raise PolicyError("learning_rate must lie in (0, 1]")
        if not np.all(np.isfinite(self.q)):
            raise PolicyError("q values must be finite")


def choose_action(qtable: QTable, rng, allowed=None) -> int:
    """Epsilon-greedy pick: explore uniformly, else argmax with low-index ties.

    ``allowed`` restricts the choice to a subset of action indices (used
    when display sizes are frozen); default is the full grid.
    """
    if allowed is None:
        allowed = np.arange(N_ACTIONS)
    else:
        allowed = np.asarray(sorted(allowed), dtype=np.int64)
        if len(allowed) == 0:
            raise PolicyError("allowed action set is empty")
    if rng.random() < qtable.epsilon:
        return int(allowed[rng.integers(len(allowed))])
    return int(allowed[int(np.argmax(qtable.q[allowed]))])


def compute_reward(error_rate, display_size, ladder, omega) -> float:
    """Adversarial + efficiency reward for the display an action produced.

    The adversarial part is the pre-update classifier's error rate on the
    freshly labeled display; the efficiency part scales with the display
    size relative to the ladder maximum. Sizes below the ladder minimum
    are tolerated because the final display of a run may be truncated to
    the remaining budget.
    """
    if not 0.0 <= error_rate <= 1.0:
        raise PolicyError("error_rate must lie in [0, 1]")
    if omega < 0.0:
        raise PolicyError("omega must be nonnegative")
    if not 0 < display_size <= ladder.max_size:
        raise PolicyError(
            f"display size {display_size} outside (0, {ladder.max_size}]"
        )
    return float(error_rate) + omega * float(display_size) / float(ladder.max_size)


def update_q(qtable: QTable, index: int, reward: float) -> QTable:
    """Exponential-recency value update; decays epsilon toward its floor."""
    if not 0 <= index < N_ACTIONS:
        raise PolicyError(f"action index {index} outside 0..{N_ACTIONS - 1}")
    q = qtable.q.copy()
    counts = qtable.counts.copy()
    q[index] += qtable.learning_rate * (reward - q[index])
    counts[index] += 1
    eps = max(qtable.epsilon_floor, qtable.epsilon * qtable.epsilon_decay)
    return replace(qtable, q=q, counts=counts, epsilon=eps)


@dataclass(frozen=True)
class SizeLadder:
    current: int
    min_size: int
    max_size: int
    step: int

    def __post_init__(self):
        if self.step <= 0:
            raise PolicyError("ladder step must be positive")
        if not self.min_size <= self.current <= self.max_size:
            raise PolicyError(
                f"ladder current {self.current} outside "
                f"[{self.min_size}, {self.max_size}]"
            )


def apply_size_move(ladder: SizeLadder, move: int) -> SizeLadder:
    """Shift the display size by one ladder step, clamped to the bounds."""
    if move not in (-1, 0, 1):
        raise PolicyError("size move must be -1, 0 or +1")
    nxt = ladder.current + ladder.step * move
    nxt = max(ladder.min_size, min(ladder.max_size, nxt))
    return replace(ladder, current=nxt)
