"""Run configuration: JSON schema, defaults, and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .policy import COMBO_NAMES
from .scorer import TrainingSettings

STRATEGIES = (
    "rl-adaptive",
    "rl-fixed-size",
    "fixed-combo",
    "random",
    "maxmin",
    "uncertainty",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 2200
    d: int = 8
    pos_fraction: float = 0.0177
    separation: float = 7.0
    seed: int = 7

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "pos_fraction": self.pos_fraction,
            "separation": self.separation,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PoolSpec:
    manifest: str | None = None
    synthetic: SyntheticSpec | None = field(default_factory=SyntheticSpec)

    def to_dict(self):
        if self.manifest is not None:
            return {"manifest": self.manifest}
        return {"synthetic": self.synthetic.to_dict()}


@dataclass(frozen=True)
class DisplaySettings:
    initial: int = 16
    min_size: int = 4
    max_size: int = 64
    step: int = 4

    def to_dict(self):
        return {
            "initial": self.initial,
            "min_size": self.min_size,
            "max_size": self.max_size,
            "step": self.step,
        }


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-8
    max_iters: int = 100

    def to_dict(self):
        return {"tol": self.tol, "max_iters": self.max_iters}


@dataclass(frozen=True)
class EpsilonSchedule:
    initial: float = 1.0
    decay: float = 0.9
    floor: float = 0.1

    def to_dict(self):
        return {"initial": self.initial, "decay": self.decay, "floor": self.floor}


@dataclass(frozen=True)
class RLSettings:
    omega: float = 0.5
    learning_rate: float = 0.1
    epsilon: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    discount: float = 0.9  # kept for completeness; unused in the stateless case
    weight_value: float = 1.0  # weight assigned to an active criterion flag

    def to_dict(self):
        return {
            "omega": self.omega,
            "learning_rate": self.learning_rate,
            "epsilon": self.epsilon.to_dict(),
            "discount": self.discount,
            "weight_value": self.weight_value,
        }


@dataclass(frozen=True)
class RunConfig:
    pool: PoolSpec = field(default_factory=PoolSpec)
    strategy: str = "rl-adaptive"
    combo: str | None = None
    budget_fraction: float = 0.1163
    display: DisplaySettings = field(default_factory=DisplaySettings)
    clusters: int = 32
    solver: SolverSettings = field(default_factory=SolverSettings)
    classifier: TrainingSettings = field(default_factory=TrainingSettings)
    rl: RLSettings = field(default_factory=RLSettings)
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(
                f"strategy '{self.strategy}' not one of {STRATEGIES}"
            )
        if self.strategy == "fixed-combo":
            if self.combo not in COMBO_NAMES:
                raise ConfigError(
                    f"fixed-combo needs combo in {COMBO_NAMES}, got {self.combo!r}"
                )
        if not 0.0 < self.budget_fraction <= 1.0:
            raise ConfigError("budget_fraction must lie in (0, 1]")
        if self.clusters < 1:
            raise ConfigError("clusters must be >= 1")
        d = self.display
        if not (0 < d.min_size <= d.initial <= d.max_size):
            raise ConfigError("display sizes must satisfy 0 < min <= initial <= max")
        if d.step <= 0:
            raise ConfigError("display step must be positive")

    def to_dict(self):
        return {
            "pool": self.pool.to_dict(),
            "strategy": self.strategy,
            "combo": self.combo,
            "budget_fraction": self.budget_fraction,
            "display": self.display.to_dict(),
            "clusters": self.clusters,
            "solver": self.solver.to_dict(),
            "classifier": self.classifier.to_dict(),
            "rl": self.rl.to_dict(),
            "seed": self.seed,
        }


def _take(obj: dict, key, default, caster, where):
    val = obj.get(key, default)
    if val is None:
        return None
    try:
        return caster(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}: {exc}") from exc


def config_from_dict(data: dict, seed_override: int | None = None) -> RunConfig:
    """Build a validated RunConfig from parsed JSON."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    known = {
        "pool",
        "strategy",
        "combo",
        "budget_fraction",
        "display",
        "clusters",
        "solver",
        "classifier",
        "rl",
        "seed",
        "ablation_sizes",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    pool_data = data.get("pool", {})
    if not isinstance(pool_data, dict):
        raise ConfigError("pool must be an object")
    if "manifest" in pool_data and pool_data["manifest"] is not None:
        pool = PoolSpec(manifest=str(pool_data["manifest"]), synthetic=None)
    else:
        syn = pool_data.get("synthetic", {}) or {}
        defaults = SyntheticSpec()
        pool = PoolSpec(
            manifest=None,
            synthetic=SyntheticSpec(
                n=_take(syn, "n", defaults.n, int, "pool.synthetic"),
                d=_take(syn, "d", defaults.d, int, "pool.synthetic"),
                pos_fraction=_take(
                    syn, "pos_fraction", defaults.pos_fraction, float, "pool.synthetic"
                ),
                separation=_take(
                    syn, "separation", defaults.separation, float, "pool.synthetic"
                ),
                seed=_take(syn, "seed", defaults.seed, int, "pool.synthetic"),
            ),
        )

    disp = data.get("display", {}) or {}
    dd = DisplaySettings()
    display = DisplaySettings(
        initial=_take(disp, "initial", dd.initial, int, "display"),
        min_size=_take(disp, "min_size", dd.min_size, int, "display"),
        max_size=_take(disp, "max_size", dd.max_size, int, "display"),
        step=_take(disp, "step", dd.step, int, "display"),
    )

    sol = data.get("solver", {}) or {}
    sd = SolverSettings()
    solver = SolverSettings(
        tol=_take(sol, "tol", sd.tol, float, "solver"),
        max_iters=_take(sol, "max_iters", sd.max_iters, int, "solver"),
    )

    cls = data.get("classifier", {}) or {}
    cd = TrainingSettings()
    classifier = TrainingSettings(
        step_size=_take(cls, "step_size", cd.step_size, float, "classifier"),
        l2=_take(cls, "l2", cd.l2, float, "classifier"),
        max_epochs=_take(cls, "max_epochs", cd.max_epochs, int, "classifier"),
        grad_tol=_take(cls, "grad_tol", cd.grad_tol, float, "classifier"),
        kind=_take(cls, "kind", cd.kind, str, "classifier"),
    )

    rl = data.get("rl", {}) or {}
    eps = rl.get("epsilon", {}) or {}
    ed = EpsilonSchedule()
    rd = RLSettings()
    rl_settings = RLSettings(
        omega=_take(rl, "omega", rd.omega, float, "rl"),
        learning_rate=_take(rl, "learning_rate", rd.learning_rate, float, "rl"),
        epsilon=EpsilonSchedule(
            initial=_take(eps, "initial", ed.initial, float, "rl.epsilon"),
            decay=_take(eps, "decay", ed.decay, float, "rl.epsilon"),
            floor=_take(eps, "floor", ed.floor, float, "rl.epsilon"),
        ),
        discount=_take(rl, "discount", rd.discount, float, "rl"),
        weight_value=_take(rl, "weight_value", rd.weight_value, float, "rl"),
    )

    seed = _take(data, "seed", 0, int, "config")
    if seed_override is not None:
        seed = int(seed_override)

    try:
        return RunConfig(
            pool=pool,
            strategy=str(data.get("strategy", "rl-adaptive")),
            combo=data.get("combo"),
            budget_fraction=_take(
                data, "budget_fraction", 0.1163, float, "config"
            ),
            display=display,
            clusters=_take(data, "clusters", 32, int, "config"),
            solver=solver,
            classifier=classifier,
            rl=rl_settings,
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str, seed_override: int | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data, seed_override)


def ablation_sizes(data: dict) -> list[int]:
    """Display sizes for ablation grids (config key 'ablation_sizes')."""
    sizes = data.get("ablation_sizes", [8, 16, 32])
    if (
        not isinstance(sizes, list)
        or not sizes
        or not all(isinstance(s, int) and s > 0 for s in sizes)
    ):
        raise ConfigError("ablation_sizes must be a non-empty list of positive ints")
    return sizes
