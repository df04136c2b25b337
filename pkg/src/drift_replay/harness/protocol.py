"""Staged continual-training protocol over chronological blocks."""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from ..data.blocks import BlockSet, split_blocks
from ..data.labels import LabelRule
from ..data.loaders import load_csv, load_movielens
from ..data.synth import synth_drift
from ..errors import DriftReplayError, StageFailure, UndefinedAUC
from ..influence.scores import ggscore_batch
from ..models.backbones import ArchDescriptor, build_model
from ..nn.losses import LossKind
from ..nn.train import TrainResult, train
from ..records import RecordArrays, as_arrays
from ..replay import (
    Reservoir,
    SelectionPlan,
    Strategy,
    gdumb_select,
    icarl_select,
    mir_select,
    reservoir_update,
    select_extreme,
)
from .config import ProtocolConfig
from .metrics import auc, rmse
from .prepared import read_prepared
from .schemes import scheme_resolve

log = logging.getLogger(__name__)

AVERAGED_STAGES = (1, 2, 3, 4)


@dataclass
class BlockMetrics:
    block: int
    rmse: float
    auc: float


@dataclass
class StageReport:
    stage: int
    block: int
    train_size: int
    reservoir_size: int
    trained: bool
    metrics: List[BlockMetrics] = field(default_factory=list)
    train_time: float = 0.0
    sampling_time: float = 0.0
    max_train_timestamp: Optional[int] = None
    min_eval_timestamp: Optional[int] = None

    def mean(self, metric: str) -> float:
        vals = [getattr(m, metric) for m in self.metrics]
        vals = [v for v in vals if not np.isnan(v)]
        return float(np.mean(vals)) if vals else float("nan")


@dataclass
class SeedReport:
    seed: int
    stages: List[StageReport] = field(default_factory=list)

    def avg(self, metric: str) -> float:
        vals = [s.mean(metric) for s in self.stages if s.stage in AVERAGED_STAGES]
        return float(np.mean(vals)) if vals else float("nan")


@dataclass
class RunReport:
    config: ProtocolConfig
    seeds: List[SeedReport] = field(default_factory=list)

    def summary(self) -> dict:
        return summarize({s.seed: {"rmse": s.avg("rmse"), "auc": s.avg("auc")} for s in self.seeds})


def _stat(vals):
    vals = [v for v in vals if not np.isnan(v)]
    if not vals:
        return float("nan"), float("nan")
    return float(np.mean(vals)), float(np.std(vals))


def summarize(per_seed: Dict[int, Dict[str, float]]) -> dict:
    """Mean and population std across seeds of the stage-averaged metrics."""
    rm, rs = _stat([v["rmse"] for v in per_seed.values()])
    am, as_ = _stat([v["auc"] for v in per_seed.values()])
    return {
        "seeds": sorted(int(s) for s in per_seed),
        "avg_rmse_mean": rm, "avg_rmse_std": rs,
        "avg_auc_mean": am, "avg_auc_std": as_,
        "per_seed": {str(s): per_seed[s] for s in sorted(per_seed)},
    }


def load_corpus(cfg: ProtocolConfig) -> RecordArrays:
    rule = LabelRule.parse(cfg.label_rule)
    if cfg.dataset == "synth":
        data = synth_drift(cfg.synth_config(), cfg.synth_seed)
    elif cfg.dataset == "movielens":
        data = as_arrays(load_movielens(cfg.data_path, rule).records)
    elif cfg.dataset == "csv":
        data = as_arrays(load_csv(cfg.data_path, rule).records)
    else:
        data = read_prepared(cfg.data_path)
    if cfg.loss_kind is LossKind.LOGISTIC:
        data = data.take(np.flatnonzero(data.labels >= 0))
    return data


def evaluate(model, params, block: RecordArrays, block_id: int, head: LossKind) -> BlockMetrics:
    pred = model.predict(params, block)
    err = rmse(pred, block.ratings) if head is LossKind.SQUARED else float("nan")
    lab = block.labels >= 0
    try:
        a = auc(pred[lab], block.labels[lab])
    except UndefinedAUC:
        a = float("nan")
    return BlockMetrics(block_id, err, a)


def _seed(seed: int, stage: int, salt: int = 0) -> int:
    return int(np.random.SeedSequence([seed, stage, salt]).generate_state(1)[0])


class SeedRun:
    """One seed of the protocol; stages advance with :meth:`step`."""

    def __init__(self, cfg: ProtocolConfig, blocks: BlockSet, seed: int,
                 score_hook: Optional[Callable] = None):
        self.cfg = cfg
        self.blocks = blocks
        self.seed = seed
        self.score_hook = score_hook
        self.strategy = cfg.strategy_kind
        corpus = blocks.corpus()
        self.arch = ArchDescriptor(
            cfg.backbone, int(corpus.users.max()) + 1, int(corpus.items.max()) + 1,
            cfg.embedding_dim, cfg.hidden, cfg.head, cfg.cross_depth,
        )
        self.kind = cfg.loss_kind
        R = cfg.reservoir_blocks
        self.reservoir = Reservoir(len(blocks.union(0, R)), blocks.union(0, R))
        self.model, init = build_model(self.arch, _seed(seed, 0, 1))
        t0 = time.perf_counter()
        self.current: TrainResult = train(self.model, init, self.reservoir.records, cfg.train_config(_seed(seed, 0, 2)),
                                          self.kind)
        self.initial_train_time = time.perf_counter() - t0
        self.report = SeedReport(seed)

    @property
    def n_stages(self) -> int:
        return self.cfg.n_blocks - self.cfg.reservoir_blocks

    def eval_blocks(self, b: int) -> List[int]:
        later = list(range(b + 1, self.cfg.n_blocks))
        return later[:1] if self.cfg.eval == "next" else later

    def _select(self, stage: int, D: RecordArrays, inc: RecordArrays) -> np.ndarray:
        cfg = self.cfg
        M = self.reservoir.capacity
        plan = (SelectionPlan.from_ratio(cfg.replay_ratio, M) if cfg.replay_ratio is not None
                else SelectionPlan.default(M, len(inc)))
        snaps = self.current.snapshots
        if self.strategy is Strategy.MEGG or self.score_hook is not None:
            sch = scheme_resolve(cfg.scheme, snaps, self.model, D, inc, self.kind, cfg.param_selection)
            scores = ggscore_batch(self.model, D, sch.theta_prime, sch.V, self.kind, cfg.param_selection)
        if self.strategy is Strategy.MEGG:
            keep = select_extreme(scores, plan.K)
        elif self.strategy is Strategy.GDUMB:
            keep = gdumb_select(D, plan.K, np.random.default_rng(_seed(self.seed, stage, 3)))
        elif self.strategy is Strategy.ICARL:
            keep = icarl_select(self.model, D, plan.K, snaps[-1])
        else:
            lr = cfg.mir_lr if cfg.mir_lr is not None else cfg.lr
            keep, _ = mir_select(self.model, D, plan.K, snaps[-1], inc, lr, self.kind)
        if self.score_hook is not None:
            self.score_hook(stage, D, scores, keep)
        return keep

    def step(self, stage: int) -> StageReport:
        cfg = self.cfg
        b = cfg.reservoir_blocks - 1 + stage
        inc = self.blocks[b]
        evals = self.eval_blocks(b)
        sampling = 0.0
        if self.strategy is Strategy.FINETUNE:
            train_set = inc
        elif self.strategy is Strategy.FULLBATCH:
            train_set = self.blocks.union(0, b + 1)
        else:
            D = self.reservoir.records
            t0 = time.perf_counter()
            keep = self._select(stage, D, inc)
            sampling = time.perf_counter() - t0
            self.reservoir = reservoir_update(D.take(keep), inc, self.reservoir.capacity)
            train_set = self.reservoir.records
        rep = StageReport(stage, b, len(train_set), len(self.reservoir), trained=bool(evals),
                          sampling_time=sampling)
        if not evals:
            # nothing left to evaluate on and no later stage to select for
            self.report.stages.append(rep)
            return rep
        tcfg = cfg.train_config(_seed(self.seed, stage, 2))
        t0 = time.perf_counter()
        if self.strategy is Strategy.FINETUNE:
            self.current = train(self.model, self.current.params, train_set, tcfg, self.kind)
        else:
            _, init = build_model(self.arch, _seed(self.seed, stage, 1))
            self.current = train(self.model, init, train_set, tcfg, self.kind)
        rep.train_time = time.perf_counter() - t0
        rep.max_train_timestamp = int(train_set.timestamps.max())
        rep.min_eval_timestamp = min(int(self.blocks[e].timestamps.min()) for e in evals)
        rep.metrics = [evaluate(self.model, self.current.params, self.blocks[e], e, self.kind) for e in evals]
        self.report.stages.append(rep)
        return rep


def run_seed(cfg: ProtocolConfig, blocks: BlockSet, seed: int, stop_after: Optional[int] = None,
             score_hook: Optional[Callable] = None) -> SeedReport:
    run = SeedRun(cfg, blocks, seed, score_hook)
    last = run.n_stages if stop_after is None else min(stop_after, run.n_stages)
    for stage in range(1, last + 1):
        try:
            rep = run.step(stage)
        except DriftReplayError as exc:
            raise StageFailure(seed, stage, exc) from exc
        log.info("seed %d stage %d: train %d records, rmse %.4f auc %.4f", seed, stage,
                 rep.train_size, rep.mean("rmse"), rep.mean("auc"))
    return run.report


def run_protocol(cfg: ProtocolConfig, corpus=None, stop_after: Optional[int] = None,
                 score_hook: Optional[Callable] = None) -> RunReport:
    data = load_corpus(cfg) if corpus is None else as_arrays(corpus)
    blocks = split_blocks(data, cfg.n_blocks)
    report = RunReport(cfg)
    for seed in cfg.seeds:
        report.seeds.append(run_seed(cfg, blocks, seed, stop_after, score_hook))
    return report
