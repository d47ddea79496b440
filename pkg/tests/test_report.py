import numpy as np
import pytest

from aldisplay.loop import RunLog, RunRecord
from aldisplay.pool import sampling_rate
from aldisplay.report import (
    MISSING,
    ReportError,
    ReportTable,
    check_same_pool,
    table_from_runs,
)


def fake_log(sizes, eers, pool=None, strategy="fixed:rep"):
    log = RunLog(
        {
            "pool": pool or {"name": "p", "seed": 1},
            "strategy": strategy,
            "train_size": 1100,
            "config": {},
        }
    )
    total = []
    for t, (size, eer) in enumerate(zip(sizes, eers)):
        total.append(size)
        log.append(
            RunRecord(
                iteration=t,
                strategy=strategy,
                action=None,
                display_ids=list(range(size)),
                display_size=size,
                labels={},
                reward=None,
                error_rate_on_display=None,
                test_eer=eer,
                samp_pct=sampling_rate(total, 1100),
                q_values=None,
            )
        )
    return log


class TestSampRowArithmetic:
    def test_size8_block_reproduces_reference_row(self):
        # pure arithmetic identity: 16 displays of 8 on a 1100 train half
        log = fake_log([8] * 16, [0.1] * 16)
        block = table_from_runs("display size = 8", {"rep": [log]}, 1100)
        want = [1.45, 2.90, 4.36, 5.81, 7.27, 8.72, 10.18, 11.63]
        got = [block.samp_row[it - 1] for it in range(2, 17, 2)]
        assert got == [pytest.approx(v) for v in want]

    def test_eer_cells_are_seed_means_in_percent(self):
        a = fake_log([8, 8], [0.10, 0.05])
        b = fake_log([8, 8], [0.20, 0.15])
        block = table_from_runs("x", {"rep": [a, b]}, 1100)
        assert block.rows[0][1] == [pytest.approx(15.0), pytest.approx(10.0)]


class TestRendering:
    def test_missing_cells_rendered_as_dashes(self):
        short = fake_log([8] * 2, [0.5, 0.4])
        longer = fake_log([8] * 4, [0.5, 0.4, 0.3, 0.2], strategy="fixed:div")
        block = table_from_runs("x", {"rep": [short], "div": [longer]}, 1100)
        table = ReportTable(blocks=[block])
        text = table.render_text()
        assert MISSING in text
        csv_text = table.render_csv()
        rep_line = [ln for ln in csv_text.splitlines() if ln.startswith("x,rep,3")]
        assert rep_line and rep_line[0].endswith(MISSING)

    def test_text_and_csv_share_numbers(self):
        log = fake_log([8] * 3, [0.111, 0.222, 0.333])
        table = ReportTable(blocks=[table_from_runs("x", {"rep": [log]}, 1100)])
        text = table.render_text()
        for cell in ("11.10", "22.20", "33.30"):
            assert cell in text
            assert cell in table.render_csv()


class TestPoolMatching:
    def test_same_pool_ok(self):
        logs = [fake_log([4], [0.1]), fake_log([4], [0.2])]
        assert check_same_pool(logs) == {"name": "p", "seed": 1}

    def test_mismatch_rejected(self):
        logs = [
            fake_log([4], [0.1]),
            fake_log([4], [0.1], pool={"name": "q", "seed": 2}),
        ]
        with pytest.raises(ReportError, match="different pools"):
            check_same_pool(logs)
