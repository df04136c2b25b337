"""Protocol configuration and its key = value file format.

Example file (``#`` starts a comment, unknown keys are rejected)::

    dataset = synth           # synth | movielens | csv | prepared
    data_path =               # input file, or directory written by `prepare`
    label_rule = movielens    # movielens | taobao
    synth_users = 300
    synth_items = 500
    synth_records = 30000
    synth_latent_dim = 8
    synth_drift = 0.5
    synth_phases = 5
    synth_noise = 0.3
    synth_seed = 0
    n_blocks = 15
    reservoir_blocks = 10
    backbone = wdl            # wdl | dcn | nfm
    embedding_dim = 64
    hidden = 64,32
    cross_depth = 2
    head = squared            # squared | logistic
    epochs = 5
    batch_size = 1024
    lr = 0.001
    optimizer = adam          # adam | mbgd
    strategy = megg           # megg | gdumb | icarl | mir | finetune | fullbatch
    scheme = A                # A | B | C | D
    selection = selected      # selected | full
    replay_ratio =            # empty: keep M - M' records
    mir_lr =                  # empty: same as lr
    eval = all                # all | next
    seeds = 0,1,2,3,4
"""

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Tuple

from ..data.labels import LabelRule
from ..data.synth import SynthConfig
from ..errors import InvalidConfig
from ..models.backbones import Backbone
from ..nn.core import ParamSelection
from ..nn.losses import LossKind
from ..nn.train import Optimizer, TrainConfig
from ..replay import Strategy

SCHEMES = ("A", "B", "C", "D")
DATASETS = ("synth", "movielens", "csv", "prepared")
EVAL_MODES = ("all", "next")


@dataclass(frozen=True)
class ProtocolConfig:
    dataset: str = "synth"
    data_path: Optional[str] = None
    label_rule: str = "movielens"
    synth_users: int = 300
    synth_items: int = 500
    synth_records: int = 30000
    synth_latent_dim: int = 8
    synth_drift: float = 0.5
    synth_phases: int = 5
    synth_noise: float = 0.3
    synth_seed: int = 0
    n_blocks: int = 15
    reservoir_blocks: int = 10
    backbone: str = "wdl"
    embedding_dim: int = 64
    hidden: Tuple[int, ...] = (64, 32)
    cross_depth: int = 2
    head: str = "squared"
    epochs: int = 5
    batch_size: int = 1024
    lr: float = 0.001
    optimizer: str = "adam"
    strategy: str = "megg"
    scheme: str = "A"
    selection: str = "selected"
    replay_ratio: Optional[float] = None
    mir_lr: Optional[float] = None
    eval: str = "all"
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise InvalidConfig(f"dataset must be one of {DATASETS}")
        if self.dataset != "synth" and not self.data_path:
            raise InvalidConfig(f"dataset {self.dataset!r} needs data_path")
        if not 1 <= self.reservoir_blocks < self.n_blocks:
            raise InvalidConfig("need 1 <= reservoir_blocks < n_blocks")
        if self.scheme not in SCHEMES:
            raise InvalidConfig(f"scheme must be one of {SCHEMES}")
        if self.eval not in EVAL_MODES:
            raise InvalidConfig(f"eval must be one of {EVAL_MODES}")
        if not self.seeds:
            raise InvalidConfig("seeds must be non-empty")
        if self.replay_ratio is not None and not 0.0 <= self.replay_ratio <= 1.0:
            raise InvalidConfig("replay_ratio must lie in [0, 1]")
        try:
            Backbone(self.backbone)
            LossKind.parse(self.head)
            Optimizer(self.optimizer)
            Strategy(self.strategy)
            ParamSelection(self.selection)
            LabelRule.parse(self.label_rule)
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None
        self.train_config(0)

    @property
    def strategy_kind(self) -> Strategy:
        return Strategy(self.strategy)

    @property
    def loss_kind(self) -> LossKind:
        return LossKind.parse(self.head)

    @property
    def param_selection(self) -> ParamSelection:
        return ParamSelection(self.selection)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(self.lr, self.batch_size, self.epochs, Optimizer(self.optimizer), seed)

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            num_users=self.synth_users, num_items=self.synth_items, num_records=self.synth_records,
            latent_dim=self.synth_latent_dim, drift=self.synth_drift, phases=self.synth_phases,
            noise=self.synth_noise, label_rule=self.label_rule,
        )

    def with_(self, **kw) -> "ProtocolConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


def _int_tuple(text):
    return tuple(int(t) for t in text.replace(" ", "").split(",") if t)


def _convert(name, raw: str):
    raw = raw.strip()
    f = {f.name: f for f in fields(ProtocolConfig)}[name]
    default = f.default
    if name in ("hidden", "seeds"):
        return _int_tuple(raw)
    if name in ("replay_ratio", "mir_lr"):
        return float(raw) if raw else None
    if name == "data_path":
        return raw or None
    if name == "scheme":
        return raw.upper()
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw.lower()


def parse_config(text: str) -> ProtocolConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[protocol]\n" + text)
    except configparser.Error as exc:
        raise InvalidConfig(f"unreadable config: {exc}") from None
    known = {f.name for f in fields(ProtocolConfig)}
    values = {}
    for key, raw in parser["protocol"].items():
        key = key.strip().lower()
        if key not in known:
            raise InvalidConfig(f"unknown config key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise InvalidConfig(f"bad value for {key}: {raw!r} ({exc})") from None
    return ProtocolConfig(**values)


def load_config(path) -> ProtocolConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg: ProtocolConfig) -> str:
    lines = []
    for f in fields(ProtocolConfig):
        v = getattr(cfg, f.name)
        if v is None:
            v = ""
        elif isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
