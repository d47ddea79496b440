"""Pools of feature vectors, labeled sets, budgets, and dataset plumbing.

A pool is an immutable collection of items ``(id, features[, truth][,
image pair])``. Pools come from a JSON manifest + CSV on disk or from the
synthetic two-blob generator; both are deterministic for a fixed seed.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np


class PoolError(ValueError):
    """Malformed pool input (manifest, CSV rows, or constructor args)."""


class BudgetError(ValueError):
    """Label budget overflow."""


@dataclass(frozen=True)
class PoolItem:
    id: int
    features: np.ndarray
    truth: int | None = None
    image_refs: tuple[str, str] | None = None


class Pool:
    """Immutable item collection with aligned id/feature arrays.

    Items are kept sorted by ascending id; ``ids``, ``features`` and
    ``truths`` are read-only views aligned with that order.
    """

    def __init__(self, items, d: int, manifest: dict | None = None):
        items = sorted(items, key=lambda it: it.id)
        if len(items) < 2:
            raise PoolError("a pool needs at least 2 items, got %d" % len(items))
        ids = np.array([it.id for it in items], dtype=np.int64)
        if np.any(ids < 0):
            raise PoolError("item ids must be >= 0")
        if len(np.unique(ids)) != len(ids):
            dup = int(ids[np.where(np.diff(ids) == 0)[0][0]])
            raise PoolError(f"duplicate id {dup}")
        feats = np.empty((len(items), d), dtype=np.float64)
        for row, it in enumerate(items):
            f = np.asarray(it.features, dtype=np.float64)
            if f.shape != (d,):
                raise PoolError(
                    f"item id {it.id}: expected {d} features, got {f.shape}"
                )
            feats[row] = f
        if not np.all(np.isfinite(feats)):
            raise PoolError("non-finite feature value in pool")
        self.items: tuple[PoolItem, ...] = tuple(items)
        self.d = int(d)
        self.manifest = dict(manifest or {})
        self.ids = ids
        self.features = feats
        self.ids.setflags(write=False)
        self.features.setflags(write=False)
        self._index = {int(i): row for row, i in enumerate(ids)}

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def has_truths(self) -> bool:
        return all(it.truth is not None for it in self.items)

    def truths(self) -> np.ndarray:
        """Truth labels aligned with ``ids``; raises if any are missing."""
        if not self.has_truths:
            raise PoolError("pool has items without ground truth")
        return np.array([it.truth for it in self.items], dtype=np.int64)

    def row_of(self, item_id: int) -> int:
        try:
            return self._index[int(item_id)]
        except KeyError:
            raise KeyError(f"unknown item id {item_id}") from None

    def rows_of(self, item_ids) -> np.ndarray:
        return np.array([self.row_of(i) for i in item_ids], dtype=np.int64)

    def item(self, item_id: int) -> PoolItem:
        return self.items[self.row_of(item_id)]

    def subset(self, item_ids, manifest=None) -> "Pool":
        rows = self.rows_of(sorted(int(i) for i in item_ids))
        return Pool(
            [self.items[r] for r in rows], self.d, manifest or self.manifest
        )

    def fingerprint(self) -> dict:
        """Identity of the underlying data, used to match runs in reports."""
        keys = ("name", "source", "seed", "n", "d", "pos_fraction", "separation", "csv")
        return {k: self.manifest[k] for k in keys if k in self.manifest}


@dataclass(frozen=True)
class LabelEntry:
    id: int
    label: int
    iteration_acquired: int


class LabeledSet:
    """Accumulated oracle answers; grows by producing extended copies."""

    def __init__(self, entries=()):
        entries = tuple(entries)
        seen = set()
        last_iter = 0
        for e in entries:
            if e.id in seen:
                raise PoolError(f"duplicate labeled id {e.id}")
            if e.label not in (0, 1):
                raise PoolError(f"label for id {e.id} must be 0 or 1")
            if e.iteration_acquired < last_iter:
                raise PoolError("iteration_acquired must be non-decreasing")
            seen.add(e.id)
            last_iter = e.iteration_acquired
        self.entries: tuple[LabelEntry, ...] = entries
        self._ids = frozenset(seen)

    def __len__(self):
        return len(self.entries)

    @property
    def ids(self) -> frozenset:
        return self._ids

    def extended(self, labels: dict, iteration: int) -> "LabeledSet":
        new = [
            LabelEntry(int(i), int(labels[i]), int(iteration))
            for i in sorted(labels)
        ]
        return LabeledSet(self.entries + tuple(new))

    def arrays(self):
        ids = np.array([e.id for e in self.entries], dtype=np.int64)
        y = np.array([e.label for e in self.entries], dtype=np.int64)
        return ids, y

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"id": e.id, "label": e.label, "iteration": e.iteration_acquired}
                for e in self.entries
            ]
        }


@dataclass(frozen=True)
class Budget:
    max_labels: int
    used: int = 0

    def __post_init__(self):
        if self.max_labels <= 0:
            raise BudgetError("max_labels must be positive")
        if not 0 <= self.used <= self.max_labels:
            raise BudgetError(
                f"used={self.used} outside [0, {self.max_labels}]"
            )

    @property
    def remaining(self) -> int:
        return self.max_labels - self.used

    def spend(self, k: int) -> "Budget":
        if k < 0 or self.used + k > self.max_labels:
            raise BudgetError(
                f"cannot spend {k} labels: {self.remaining} remaining"
            )
        return Budget(self.max_labels, self.used + k)


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def load_pool(manifest_path: str) -> Pool:
    """Load a pool from a JSON manifest pointing at a CSV of features.

    Manifest keys: ``name``, ``d``, ``csv`` (path, relative to the
    manifest), optional ``images_dir``. CSV columns are ``id, f0..f{d-1}``
    plus an optional ``truth`` column holding 0/1 or empty.
    """
    if not os.path.exists(manifest_path):
        raise PoolError(f"manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PoolError(f"manifest is not valid JSON: {exc}") from exc
    base = os.path.dirname(os.path.abspath(manifest_path))
    return pool_from_manifest(manifest, base)


def pool_from_manifest(manifest: dict, base_dir: str) -> Pool:
    """Build a pool from a parsed manifest; paths resolve against base_dir."""
    for key in ("name", "d", "csv"):
        if key not in manifest:
            raise PoolError(f"manifest missing key '{key}'")
    try:
        d = int(manifest["d"])
    except (TypeError, ValueError):
        raise PoolError("manifest d must be an integer") from None
    if d < 1:
        raise PoolError("manifest d must be >= 1")
    base = base_dir
    csv_path = os.path.join(base, manifest["csv"])
    if not os.path.exists(csv_path):
        raise PoolError(f"csv not found: {csv_path}")
    images_dir = manifest.get("images_dir")
    if images_dir is not None:
        images_dir = os.path.join(base, images_dir)

    items = []
    seen_ids = {}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PoolError("csv is empty")
        expected = ["id"] + [f"f{i}" for i in range(d)]
        has_truth = header == expected + ["truth"]
        if not has_truth and header != expected:
            raise PoolError(
                f"csv header {header!r} does not match dimension d={d}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            want = d + 2 if has_truth else d + 1
            if len(row) != want:
                raise PoolError(
                    f"row {lineno}: expected {want} columns, got {len(row)}"
                )
            try:
                item_id = int(row[0])
                feats = np.array([float(v) for v in row[1 : d + 1]])
            except ValueError as exc:
                raise PoolError(f"row {lineno}: {exc}") from exc
            if item_id in seen_ids:
                raise PoolError(
                    f"row {lineno}: duplicate id {item_id} "
                    f"(first seen at row {seen_ids[item_id]})"
                )
            seen_ids[item_id] = lineno
            if not np.all(np.isfinite(feats)):
                raise PoolError(f"row {lineno}: non-finite feature value")
            truth = None
            if has_truth and row[d + 1] != "":
                if row[d + 1] not in ("0", "1"):
                    raise PoolError(
                        f"row {lineno}: truth must be 0, 1 or empty"
                    )
                truth = int(row[d + 1])
            refs = None
            if images_dir is not None:
                before = os.path.join(images_dir, f"{item_id}_before.png")
                after = os.path.join(images_dir, f"{item_id}_after.png")
                if os.path.exists(before) and os.path.exists(after):
                    refs = (before, after)
            items.append(PoolItem(item_id, feats, truth, refs))
    return Pool(items, d, manifest)


def generate_synthetic(
    n: int,
    d: int,
    pos_fraction: float,
    separation: float,
    seed: int,
) -> Pool:
    """Two isotropic gaussian blobs whose means sit ``separation`` apart.

    Exactly ``round(n * pos_fraction)`` items are positive; positions of
    the positives within the id range are shuffled so id order carries no
    class signal.
    """
    if n < 4:
        raise PoolError("n must be >= 4")
    if d < 1:
        raise PoolError("d must be >= 1")
    if not 0.0 < pos_fraction < 1.0:
        raise PoolError("pos_fraction must be in (0, 1)")
    if separation <= 0:
        raise PoolError("separation must be > 0")
    n_pos = round(n * pos_fraction)
    if n_pos < 2:
        raise PoolError("round(n * pos_fraction) must be >= 2")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    pos_rows = rng.choice(n, size=n_pos, replace=False)
    feats = rng.standard_normal((n, d))
    feats[pos_rows] += separation * direction
    truth = np.zeros(n, dtype=np.int64)
    truth[pos_rows] = 1
    manifest = {
        "name": f"synthetic-n{n}-d{d}",
        "source": "synthetic",
        "seed": int(seed),
        "n": int(n),
        "d": int(d),
        "pos_fraction": float(pos_fraction),
        "separation": float(separation),
    }
    items = [
        PoolItem(i, feats[i].copy(), int(truth[i])) for i in range(n)
    ]
    return Pool(items, d, manifest)


def split_train_test(pool: Pool, seed: int) -> tuple[Pool, Pool]:
    """Disjoint train/test halves (sizes ceil(n/2) / floor(n/2)).

    Stratified by truth label when every item carries one and each class
    has at least 2 members; otherwise falls back to an unstratified split
    with a warning.
    """
    if pool.n < 4:
        raise PoolError("pool too small to split (need >= 4 items)")
    rng = np.random.default_rng(seed)
    train_size = math.ceil(pool.n / 2)
    stratify = pool.has_truths
    if stratify:
        truths = pool.truths()
        counts = np.bincount(truths, minlength=2)
        if counts.min() < 2:
            warnings.warn(
                "a class has fewer than 2 members; splitting without "
                "stratification",
                stacklevel=2,
            )
            stratify = False
    if stratify:
        train_ids: list[int] = []
        odd_classes = []
        for cls in (0, 1):
            cls_ids = pool.ids[truths == cls]
            perm = rng.permutation(len(cls_ids))
            base = len(cls_ids) // 2
            train_ids.extend(int(i) for i in cls_ids[perm[:base]])
            if len(cls_ids) % 2 == 1:
                odd_classes.append((cls, int(cls_ids[perm[base]])))
        leftover = train_size - len(train_ids)
        if leftover > 0:
            order = rng.permutation(len(odd_classes))
            for j in order[:leftover]:
                train_ids.append(odd_classes[j][1])
    else:
        perm = rng.permutation(pool.n)
        train_ids = [int(i) for i in pool.ids[perm[:train_size]]]
    train_set = set(train_ids)
    test_ids = [int(i) for i in pool.ids if int(i) not in train_set]
    base_name = pool.manifest.get("name", "pool")
    train = pool.subset(
        train_ids, {**pool.manifest, "name": base_name + "/train", "split_seed": seed}
    )
    test = pool.subset(
        test_ids, {**pool.manifest, "name": base_name + "/test", "split_seed": seed}
    )
    return train, test


def sampling_rate(display_sizes, train_size: int) -> float:
    """Cumulative labeled percentage of the training half, 2 decimals.

    Truncated (not rounded half-up) to 2 decimals: 2.9090 -> 2.90,
    11.6363 -> 11.63, matching the conventional reporting of these rates.
    """
    raw = sampling_rate_raw(display_sizes, train_size)
    return math.floor(raw * 100.0 + 1e-7) / 100.0


def sampling_rate_raw(display_sizes, train_size: int) -> float:
    """Untruncated sampling rate in percent."""
    if train_size <= 0:
        raise PoolError("train_size must be positive")
    return 100.0 * float(sum(display_sizes)) / float(train_size)
