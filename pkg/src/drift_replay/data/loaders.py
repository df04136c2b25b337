"""Log parsers with dense id remapping."""

import csv
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..errors import HeaderMismatch, MalformedInput
from ..records import InteractionRecord
from .labels import LabelRule, binarize

log = logging.getLogger(__name__)

CSV_HEADER = ["user", "item", "rating", "timestamp"]
MAX_MALFORMED_FRACTION = 0.01


class IdMap:
    """First-seen dense remapping of raw ids, one namespace per kind."""

    def __init__(self):
        self.users: Dict[str, int] = {}
        self.items: Dict[str, int] = {}

    def user(self, raw: str) -> int:
        return self.users.setdefault(raw, len(self.users))

    def item(self, raw: str) -> int:
        return self.items.setdefault(raw, len(self.items))

    def rows(self) -> List[Tuple[str, int, str]]:
        out = [(raw, dense, "user") for raw, dense in self.users.items()]
        out += [(raw, dense, "item") for raw, dense in self.items.items()]
        return out

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["raw_id", "dense_id", "kind"])
            w.writerows(self.rows())


@dataclass
class LoadResult:
    records: List[InteractionRecord]
    id_map: IdMap
    malformed: List[Tuple[int, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def _parse_fields(fields, ids: IdMap, rule, numeric_ids=False):
    if len(fields) != 4:
        raise ValueError(f"expected 4 fields, got {len(fields)}")
    raw_u, raw_i, raw_r, raw_t = (f.strip() for f in fields)
    if not raw_u or not raw_i:
        raise ValueError("empty id")
    if numeric_ids:
        raw_u, raw_i = str(int(raw_u)), str(int(raw_i))
    rating = float(raw_r)
    ts = int(raw_t)
    label = binarize(rating, rule) if rule is not None else None
    # ids are only claimed once the whole line parsed
    return InteractionRecord(ids.user(raw_u), ids.item(raw_i), rating, ts, label)


def _finish(path, records, ids, malformed, total) -> LoadResult:
    for lineno, reason in malformed:
        log.warning("%s:%d: malformed line skipped (%s)", path, lineno, reason)
    if total == 0:
        warnings.warn(f"{path}: no interaction lines found", RuntimeWarning, stacklevel=3)
    elif len(malformed) > MAX_MALFORMED_FRACTION * total:
        raise MalformedInput(
            f"{path}: {len(malformed)} of {total} lines malformed "
            f"(first at line {malformed[0][0]})"
        )
    return LoadResult(records, ids, malformed)


def _iter_lines(lines, split, ids, rule, first_lineno, numeric_ids=False):
    records, malformed, total = [], [], 0
    for lineno, line in enumerate(lines, start=first_lineno):
        if not line.strip():
            continue
        total += 1
        try:
            records.append(_parse_fields(split(line), ids, rule, numeric_ids))
        except (ValueError, IndexError) as exc:
            malformed.append((lineno, str(exc)))
    return records, malformed, total


def load_movielens(path, rule=LabelRule.MOVIELENS) -> LoadResult:
    """Parse ``UserID::MovieID::Rating::Timestamp`` lines."""
    ids = IdMap()
    with open(path, encoding="utf-8", errors="replace") as fh:
        records, malformed, total = _iter_lines(fh, lambda s: s.rstrip("\r\n").split("::"), ids, rule, 1,
                                                 numeric_ids=True)
    return _finish(path, records, ids, malformed, total)


def load_csv(path, rule=LabelRule.MOVIELENS) -> LoadResult:
    """Parse a CSV file whose header is ``user,item,rating,timestamp``."""
    ids = IdMap()
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            warnings.warn(f"{path}: empty file", RuntimeWarning, stacklevel=2)
            return LoadResult([], ids, [])
        header = [h.strip().lower() for h in next(csv.reader([first]))]
        if header != CSV_HEADER:
            raise HeaderMismatch(f"{path}: expected header {','.join(CSV_HEADER)}, got {first.strip()!r}")
        records, malformed, total = _iter_lines(fh, lambda s: next(csv.reader([s])), ids, rule, 2)
    return _finish(path, records, ids, malformed, total)
