"""Staged protocol, metrics, configuration, reports and the CLI."""

from .config import ProtocolConfig, dump_config, load_config, parse_config
from .metrics import auc, auc_bruteforce, rmse
from .protocol import (
    AVERAGED_STAGES,
    BlockMetrics,
    RunReport,
    SeedReport,
    SeedRun,
    StageReport,
    evaluate,
    load_corpus,
    run_protocol,
    run_seed,
)
from .report import aggregate, aggregate_dir, emit_report
from .schemes import ResolvedScheme, scheme_resolve

__all__ = [
    "AVERAGED_STAGES", "BlockMetrics", "ProtocolConfig", "ResolvedScheme", "RunReport", "SeedReport",
    "SeedRun", "StageReport", "aggregate", "aggregate_dir", "auc", "auc_bruteforce", "dump_config",
    "emit_report", "evaluate", "load_config", "load_corpus", "parse_config", "rmse", "run_protocol",
    "run_seed", "scheme_resolve",
]
