"""Report files: per-evaluation CSV, seed summary JSON, timings CSV."""

import csv
import glob
import json
import math
import os
from collections import defaultdict

from .protocol import AVERAGED_STAGES, RunReport, summarize

STAGE_HEADER = ["seed", "stage", "block", "metric", "value"]
TIMING_HEADER = ["seed", "stage", "train_time", "sampling_time", "train_size", "reservoir_size"]


def stage_rows(report: RunReport):
    rows = []
    for sr in report.seeds:
        for st in sr.stages:
            for m in st.metrics:
                for metric in ("rmse", "auc"):
                    v = getattr(m, metric)
                    if not math.isnan(v):
                        rows.append([sr.seed, st.stage, m.block, metric, repr(float(v))])
    return rows


def emit_report(report: RunReport, out_dir) -> dict:
    """Write stages.csv and summary.json (deterministic) plus timings.csv (wall clock)."""
    os.makedirs(out_dir, exist_ok=True)
    rows = stage_rows(report)
    with open(os.path.join(out_dir, "stages.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STAGE_HEADER)
        w.writerows(rows)
    summary = aggregate(rows)
    if report.config is not None:
        summary["config"] = {k: list(v) if isinstance(v, tuple) else v for k, v in report.config.to_dict().items()}
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=True)
    with open(os.path.join(out_dir, "timings.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMING_HEADER)
        for sr in report.seeds:
            for st in sr.stages:
                w.writerow([sr.seed, st.stage, f"{st.train_time:.4f}", f"{st.sampling_time:.4f}",
                            st.train_size, st.reservoir_size])
    return summary


def aggregate(rows) -> dict:
    """Stage-averaged metrics per seed (stages 1-4), then mean and std across seeds."""
    # seed -> metric -> stage -> values
    acc = defaultdict(lambda: defaultdict(lambda: defaultdict(list)))
    for seed, stage, _block, metric, value in rows:
        acc[int(seed)][metric][int(stage)].append(float(value))
    per_seed = {}
    for seed, by_metric in acc.items():
        per_seed[seed] = {}
        for metric in ("rmse", "auc"):
            stages = by_metric.get(metric, {})
            means = [sum(v) / len(v) for s, v in sorted(stages.items()) if s in AVERAGED_STAGES]
            per_seed[seed][metric] = sum(means) / len(means) if means else float("nan")
    return summarize(per_seed)


def read_stage_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != STAGE_HEADER:
            raise ValueError(f"{path}: not a stages.csv file")
        return [row for row in reader]


def aggregate_dir(in_dir) -> dict:
    """Combine every stages.csv under ``in_dir`` (one per run directory)."""
    paths = sorted(glob.glob(os.path.join(in_dir, "**", "stages.csv"), recursive=True))
    if not paths:
        raise FileNotFoundError(f"no stages.csv under {in_dir}")
    rows = []
    for p in paths:
        rows.extend(read_stage_rows(p))
    return aggregate(rows)
