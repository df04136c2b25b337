"""On-disk layout written by ``prepare``: records.csv, blocks.json, id_map.csv."""

import csv
import json
import os

import numpy as np

from ..data.blocks import BlockSet
from ..errors import HeaderMismatch
from ..records import RecordArrays

RECORD_HEADER = ["user", "item", "rating", "timestamp", "label", "block"]


def write_prepared(out_dir, blocks: BlockSet, id_map=None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "records.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_HEADER)
        for k, blk in enumerate(blocks.blocks):
            for u, i, r, lab, t in zip(blk.users, blk.items, blk.ratings, blk.labels, blk.timestamps):
                w.writerow([int(u), int(i), repr(float(r)), int(t), "" if lab < 0 else int(lab), k])
    meta = {"n_blocks": blocks.n, "sizes": blocks.sizes, "boundaries": blocks.boundaries}
    with open(os.path.join(out_dir, "blocks.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
    if id_map is not None:
        id_map.write(os.path.join(out_dir, "id_map.csv"))


def read_prepared(path) -> RecordArrays:
    if os.path.isdir(path):
        path = os.path.join(path, "records.csv")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORD_HEADER:
            raise HeaderMismatch(f"{path}: expected {','.join(RECORD_HEADER)}")
        rows = list(reader)
    if not rows:
        return RecordArrays([], [], [], [], [])
    cols = list(zip(*rows))
    labels = [-1 if v == "" else int(v) for v in cols[4]]
    return RecordArrays(
        np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=np.int64),
        np.array(cols[2], dtype=np.float64), labels, np.array(cols[3], dtype=np.int64),
    )
