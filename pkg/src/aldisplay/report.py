"""Tabular reports over run logs: ablation grids and strategy comparisons.

Tables are rendered as aligned text and CSV from the same formatted
strings, so the two outputs always carry identical numbers. Cells that a
run never reached are rendered as ``---``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .pool import sampling_rate


class ReportError(ValueError):
    pass


MISSING = "---"


def _fmt(value) -> str:
    return MISSING if value is None else f"{value:05.2f}"


@dataclass
class ReportBlock:
    """One display-size block: a Samp% header row plus EER rows."""

    label: str
    iterations: list[int]
    samp_row: list[float | None]
    rows: list[tuple[str, list[float | None]]] = field(default_factory=list)


@dataclass
class ReportTable:
    blocks: list[ReportBlock] = field(default_factory=list)

    def render_text(self) -> str:
        out = []
        for block in self.blocks:
            width = max(
                [len("strategy")]
                + [len(name) for name, _ in block.rows]
                + [len(block.label)]
            )
            cols = len(block.iterations)
            header = ["Iter".ljust(width)] + [
                str(i).rjust(6) for i in block.iterations
            ]
            samp = ["Samp%".ljust(width)] + [
                _fmt(v).rjust(6) for v in block.samp_row
            ]
            out.append(f"[{block.label}]")
            out.append("  ".join(header))
            out.append("  ".join(samp))
            out.append("-" * (width + 8 * cols))
            for name, values in block.rows:
                row = [name.ljust(width)] + [_fmt(v).rjust(6) for v in values]
                out.append("  ".join(row))
            out.append("")
        return "\n".join(out)

    def render_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["block", "row", "iteration", "samp_pct", "eer_pct"])
        for block in self.blocks:
            for name, values in block.rows:
                for it, samp, val in zip(
                    block.iterations, block.samp_row, values
                ):
                    writer.writerow(
                        [block.label, name, it, _fmt(samp), _fmt(val)]
                    )
        return buf.getvalue()


def _mean_or_none(values) -> float | None:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    return float(np.mean(vals))


def table_from_runs(
    label: str,
    runs_by_row: dict[str, list],
    train_size: int,
) -> ReportBlock:
    """Aggregate run logs sharing a display-size schedule into one block.

    ``runs_by_row`` maps a row name to the run logs (one per seed) backing
    it. EER cells hold seed means in percent; the Samp% header comes from
    the logged display sizes (seed-averaged for adaptive schedules).
    """
    n_iters = max(
        len(log.records) for logs in runs_by_row.values() for log in logs
    )
    iterations = list(range(1, n_iters + 1))
    samp_cells: list[float | None] = []
    for t in range(n_iters):
        samps = []
        for logs in runs_by_row.values():
            for log in logs:
                if t < len(log.records):
                    sizes = [r.display_size for r in log.records[: t + 1]]
                    samps.append(sampling_rate(sizes, train_size))
        samp_cells.append(_mean_or_none(samps))
    block = ReportBlock(label=label, iterations=iterations, samp_row=samp_cells)
    for name, logs in runs_by_row.items():
        cells: list[float | None] = []
        for t in range(n_iters):
            vals = [
                log.records[t].test_eer * 100.0
                for log in logs
                if t < len(log.records) and log.records[t].test_eer is not None
            ]
            cells.append(_mean_or_none(vals))
        block.rows.append((name, cells))
    return block


def check_same_pool(logs) -> dict:
    """All runs must come from the same pool; returns its fingerprint."""
    fingerprints = [log.meta.get("pool", {}) for log in logs]
    first = fingerprints[0]
    for fp in fingerprints[1:]:
        if fp != first:
            raise ReportError(
                f"runs come from different pools: {first} vs {fp}"
            )
    return first
