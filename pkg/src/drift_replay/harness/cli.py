"""Command line entry point: prepare, run, score, validate, report."""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from ..data.blocks import split_blocks
from ..data.labels import LabelRule
from ..data.loaders import load_csv, load_movielens
from ..errors import DriftReplayError, InvalidConfig
from ..influence import validation
from ..influence.study import StudyConfig, correlation_study, pearson
from ..records import as_arrays
from .config import load_config
from .prepared import write_prepared
from .protocol import load_corpus, run_protocol, run_seed
from .report import aggregate_dir, emit_report

log = logging.getLogger("drift_replay")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)


def cmd_prepare(args):
    loader = load_movielens if args.format == "movielens" else load_csv
    loaded = loader(args.input, LabelRule.parse(args.label_rule))
    blocks = split_blocks(as_arrays(loaded.records), args.blocks)
    write_prepared(args.out, blocks, loaded.id_map)
    print(f"{len(loaded.records)} records, {len(loaded.malformed)} malformed lines skipped, "
          f"{blocks.n} blocks of sizes {min(blocks.sizes)}-{max(blocks.sizes)} -> {args.out}")
    return 0


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seeds:
        cfg = cfg.with_(seeds=tuple(int(s) for s in args.seeds.split(",")))
    report = run_protocol(cfg)
    summary = emit_report(report, args.out)
    print(f"avg RMSE {summary['avg_rmse_mean']:.4f} +- {summary['avg_rmse_std']:.4f}, "
          f"avg AUC {summary['avg_auc_mean']:.4f} +- {summary['avg_auc_std']:.4f} -> {args.out}")
    return 0


def cmd_score(args):
    cfg = load_config(args.config)
    n_stages = cfg.n_blocks - cfg.reservoir_blocks
    if not 1 <= args.stage <= n_stages:
        raise InvalidConfig(f"stage must lie in 1..{n_stages}")
    if not cfg.strategy_kind.replays:
        raise InvalidConfig(f"strategy {cfg.strategy} keeps no reservoir to score")
    seed = cfg.seeds[0] if args.seed is None else args.seed
    captured = {}

    def hook(stage, D, scores, keep):
        if stage == args.stage:
            captured.update(D=D, scores=scores, keep=set(int(k) for k in keep))

    run_seed(cfg, split_blocks(load_corpus(cfg), cfg.n_blocks), seed, stop_after=args.stage, score_hook=hook)
    D = captured["D"]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "user", "item", "timestamp", "ggscore", "kept"])
        for i in range(len(D)):
            w.writerow([i, int(D.users[i]), int(D.items[i]), int(D.timestamps[i]),
                        repr(float(captured["scores"][i])), int(i in captured["keep"])])
    print(f"stage {args.stage}: scored {len(D)} records, kept {len(captured['keep'])} -> {args.out}")
    return 0


def _influence_csv(path, oracle, estimate, ggscore):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id", "oracle", "estimate", "ggscore"])
        for i, row in enumerate(zip(oracle, estimate, ggscore)):
            w.writerow([i] + [repr(float(v)) for v in row])


def cmd_validate(args):
    out = args.out
    if out:
        os.makedirs(out, exist_ok=True)
    if args.suite == "eq5":
        cases = validation.closed_form_suite(args.cases or 1000, args.seed)
        errs = np.array([c.rel_error for c in cases])
        summary = {"cases": len(cases), "max_rel_error": float(errs.max()), "tolerance": 1e-9,
                   "passed": bool(errs.max() <= 1e-9)}
        if out:
            with open(os.path.join(out, "eq5.csv"), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["case_id", "backbone", "head", "batch_size", "lr", "removed", "rel_error"])
                for i, c in enumerate(cases):
                    w.writerow([i, c.backbone, c.head, c.batch_size, repr(c.lr), c.removed, repr(c.rel_error)])
    elif args.suite == "estimator":
        rng = np.random.default_rng(args.seed)
        quad = [validation.quadratic_remainder_case(rng) for _ in range(200)]
        quad_err = max(abs(a - b) for a, b in quad)
        oracle, estimate, scores, agree = validation.sign_agreement_suite(args.cases or 500, args.seed)
        summary = {"quadratic_max_abs_error": quad_err, "sign_agreement": agree,
                   "pearson_oracle_estimate": pearson(oracle, estimate),
                   "passed": bool(quad_err <= 1e-9 and agree >= 0.9)}
        if out:
            _influence_csv(os.path.join(out, "estimator.csv"), oracle, estimate, scores)
    else:
        rep = correlation_study(StudyConfig(seed=args.seed))
        summary = rep.summary()
        if out:
            _influence_csv(os.path.join(out, "influence.csv"), rep.oracle, rep.estimate, rep.ggscore)
    if out:
        _write_json(os.path.join(out, f"{args.suite}_summary.json"), summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_report(args):
    summary = aggregate_dir(args.in_dir)
    _write_json(os.path.join(args.in_dir, "aggregate.json"), summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="drift-replay", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("prepare", help="parse a log and split it into chronological blocks")
    s.add_argument("--input", required=True)
    s.add_argument("--format", choices=("movielens", "csv"), required=True)
    s.add_argument("--blocks", type=int, default=15)
    s.add_argument("--label-rule", default="movielens", choices=[r.value for r in LabelRule])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("run", help="run the staged protocol for every configured seed")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seeds", help="comma-separated override of the config's seeds")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("score", help="dump per-sample GGscores of the reservoir at one stage")
    s.add_argument("--config", required=True)
    s.add_argument("--stage", type=int, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("validate", help="influence oracles against their closed forms")
    s.add_argument("--suite", choices=("eq5", "estimator", "correlation"), required=True)
    s.add_argument("--cases", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("report", help="aggregate stages.csv files found under a directory")
    s.add_argument("--in", dest="in_dir", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DriftReplayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
