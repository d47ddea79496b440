import csv
import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from aldisplay.pool import Pool, PoolItem


@pytest.fixture
def tiny_pool():
    """Six labeled 2-D items: two separated blobs."""
    feats = np.array(
        [
            [0.0, 0.0],
            [0.2, -0.1],
            [-0.1, 0.15],
            [5.0, 5.0],
            [5.2, 4.9],
            [4.9, 5.1],
        ]
    )
    truth = [0, 0, 0, 1, 1, 1]
    items = [PoolItem(i, feats[i], truth[i]) for i in range(6)]
    return Pool(items, 2, {"name": "tiny"})


def write_pool_files(tmp_path, rows, d=2, name="pool", truth_col=True, images_dir=None):
    """Write a manifest + CSV; rows are (id, features..., truth?) tuples."""
    csv_path = tmp_path / f"{name}.csv"
    header = ["id"] + [f"f{i}" for i in range(d)]
    if truth_col:
        header.append("truth")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    manifest = {"name": name, "d": d, "csv": f"{name}.csv"}
    if images_dir is not None:
        manifest["images_dir"] = images_dir
    manifest_path = tmp_path / f"{name}.json"
    manifest_path.write_text(json.dumps(manifest))
    return str(manifest_path)


@pytest.fixture
def pool_writer(tmp_path):
    def _write(rows, **kwargs):
        return write_pool_files(tmp_path, rows, **kwargs)

    return _write
