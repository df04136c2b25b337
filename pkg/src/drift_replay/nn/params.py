"""Parameter containers: dense ``ParamSet`` and support-tracking ``SparseGrad``."""

from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from .. import kernels
from ..errors import ShapeMismatch

WHOLE = "WHOLE"


class ParamSet:
    """Named parameter groups, each a float64 array.

    Value semantics: operations that change parameters return a new
    ``ParamSet`` unless asked to work in place.
    """

    def __init__(self, groups: Mapping[str, np.ndarray]):
        self.groups: Dict[str, np.ndarray] = {
            k: np.ascontiguousarray(v, dtype=np.float64) for k, v in groups.items()
        }

    def __getitem__(self, name):
        return self.groups[name]

    def __contains__(self, name):
        return name in self.groups

    def __iter__(self):
        return iter(self.groups)

    def keys(self):
        return self.groups.keys()

    def items(self):
        return self.groups.items()

    @property
    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {k: v.shape for k, v in self.groups.items()}

    def num_params(self) -> int:
        return int(sum(v.size for v in self.groups.values()))

    def copy(self) -> "ParamSet":
        return ParamSet({k: v.copy() for k, v in self.groups.items()})

    def zeros_like(self) -> "ParamSet":
        return ParamSet({k: np.zeros_like(v) for k, v in self.groups.items()})

    def is_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.groups.values())

    def equal(self, other: "ParamSet") -> bool:
        """Bit-identical comparison."""
        if self.shapes != other.shapes:
            return False
        return all(np.array_equal(v, other[k]) for k, v in self.groups.items())

    def __sub__(self, other: "ParamSet") -> "ParamSet":
        _check_same_shapes(self, other)
        return ParamSet({k: v - other[k] for k, v in self.groups.items()})

    def __add__(self, other: "ParamSet") -> "ParamSet":
        _check_same_shapes(self, other)
        return ParamSet({k: v + other[k] for k, v in self.groups.items()})

    def scale(self, c: float) -> "ParamSet":
        return ParamSet({k: c * v for k, v in self.groups.items()})

    def dot(self, other: "ParamSet") -> float:
        _check_same_shapes(self, other)
        return float(sum(np.vdot(v, other[k]) for k, v in self.groups.items()))

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.groups.values()])

    def __repr__(self):
        inner = ", ".join(f"{k}{list(v.shape)}" for k, v in self.groups.items())
        return f"ParamSet({inner})"


def _check_same_shapes(a, b):
    if a.shapes != b.shapes:
        raise ShapeMismatch(f"parameter shapes differ: {a.shapes} vs {b.shapes}")


class SparseGrad:
    """Gradient with explicit support.

    Whole-group entries live in ``whole``; row-sparse entries of embedding
    tables live in ``rows`` as ``(sorted unique row indices, row values)``.
    Keys of the support are ``(group, WHOLE)`` or ``(group, row)``.
    """

    def __init__(
        self,
        whole: Optional[Mapping[str, np.ndarray]] = None,
        rows: Optional[Mapping[str, Tuple[np.ndarray, np.ndarray]]] = None,
    ):
        self.whole: Dict[str, np.ndarray] = {
            k: np.asarray(v, dtype=np.float64) for k, v in (whole or {}).items()
        }
        self.rows: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
        for g, (idx, vals) in (rows or {}).items():
            self.rows[g] = _coalesce(idx, vals)

    @classmethod
    def from_rows(cls, group, idx, vals) -> "SparseGrad":
        return cls(rows={group: (idx, vals)})

    @property
    def support(self):
        keys = {(g, WHOLE) for g in self.whole}
        for g, (idx, _) in self.rows.items():
            keys.update((g, int(r)) for r in idx)
        return keys

    @property
    def entries(self):
        out = {(g, WHOLE): v for g, v in self.whole.items()}
        for g, (idx, vals) in self.rows.items():
            for r, v in zip(idx, vals):
                out[(g, int(r))] = v
        return out

    def __getitem__(self, key):
        g, r = key
        if r == WHOLE:
            return self.whole[g]
        idx, vals = self.rows[g]
        pos = np.searchsorted(idx, r)
        if pos >= len(idx) or idx[pos] != r:
            raise KeyError(key)
        return vals[pos]

    def __contains__(self, key):
        try:
            self[key]
        except KeyError:
            return False
        return True

    def groups(self):
        return set(self.whole) | set(self.rows)

    def scale(self, c: float) -> "SparseGrad":
        out = SparseGrad()
        out.whole = {k: c * v for k, v in self.whole.items()}
        out.rows = {g: (idx, c * vals) for g, (idx, vals) in self.rows.items()}
        return out

    def __mul__(self, c):
        return self.scale(float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def __add__(self, other: "SparseGrad") -> "SparseGrad":
        out = SparseGrad()
        out.whole = dict(self.whole)
        for k, v in other.whole.items():
            if k in out.whole:
                if out.whole[k].shape != v.shape:
                    raise ShapeMismatch(f"group {k}: {out.whole[k].shape} vs {v.shape}")
                out.whole[k] = out.whole[k] + v
            else:
                out.whole[k] = v
        out.rows = dict(self.rows)
        for g, (idx, vals) in other.rows.items():
            if g in out.rows:
                i0, v0 = out.rows[g]
                if v0.shape[1:] != vals.shape[1:]:
                    raise ShapeMismatch(f"group {g}: row width mismatch")
                out.rows[g] = _coalesce(np.concatenate([i0, idx]), np.concatenate([v0, vals]))
            else:
                out.rows[g] = (idx, vals)
        return out

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def dot(self, other) -> float:
        """Dot product touching only this gradient's support.

        ``other`` may be a ``SparseGrad`` or a ``ParamSet``.
        """
        total = 0.0
        if isinstance(other, ParamSet):
            for g, v in self.whole.items():
                if g not in other:
                    raise ShapeMismatch(f"group {g} missing from reference")
                if other[g].shape != v.shape:
                    raise ShapeMismatch(f"group {g}: {v.shape} vs {other[g].shape}")
                total += float(np.vdot(v, other[g]))
            for g, (idx, vals) in self.rows.items():
                if g not in other:
                    raise ShapeMismatch(f"group {g} missing from reference")
                table = other[g]
                if table.shape[1:] != vals.shape[1:]:
                    raise ShapeMismatch(f"group {g}: row width mismatch")
                total += float(np.sum(kernels.gather_rowdot(table, idx, vals)))
            return total
        for g, v in self.whole.items():
            w = other.whole.get(g)
            if w is not None:
                if w.shape != v.shape:
                    raise ShapeMismatch(f"group {g}: {v.shape} vs {w.shape}")
                total += float(np.vdot(v, w))
        for g, (idx, vals) in self.rows.items():
            if g not in other.rows:
                continue
            oidx, ovals = other.rows[g]
            common, ia, ib = np.intersect1d(idx, oidx, assume_unique=True, return_indices=True)
            if len(common):
                total += float(np.sum(vals[ia] * ovals[ib]))
        return total

    def restrict(self, groups: Iterable[str]) -> "SparseGrad":
        keep = set(groups)
        out = SparseGrad()
        out.whole = {k: v for k, v in self.whole.items() if k in keep}
        out.rows = {k: v for k, v in self.rows.items() if k in keep}
        return out

    def to_dense(self, like: ParamSet) -> ParamSet:
        """Embed into a zero ``ParamSet`` shaped like ``like``."""
        out = like.zeros_like()
        for g, v in self.whole.items():
            if out[g].shape != v.shape:
                raise ShapeMismatch(f"group {g}: {v.shape} vs {out[g].shape}")
            out.groups[g] = v.astype(np.float64, copy=True)
        for g, (idx, vals) in self.rows.items():
            out.groups[g][idx] = vals
        return out

    def norm(self) -> float:
        sq = sum(float(np.vdot(v, v)) for v in self.whole.values())
        sq += sum(float(np.vdot(vals, vals)) for _, vals in self.rows.values())
        return sq ** 0.5

    def max_abs(self) -> float:
        m = [float(np.max(np.abs(v))) for v in self.whole.values() if np.size(v)]
        m += [float(np.max(np.abs(vals))) for _, vals in self.rows.values() if np.size(vals)]
        return max(m, default=0.0)

    def __repr__(self):
        return f"SparseGrad(whole={sorted(self.whole)}, rows={ {g: len(i) for g, (i, _) in self.rows.items()} })"


def _coalesce(idx, vals):
    """Sort row indices and sum duplicates."""
    idx = np.asarray(idx, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if vals.ndim == 1:
        vals = vals[:, None]
    if len(idx) != len(vals):
        raise ShapeMismatch("row indices and values differ in length")
    uniq, inv = np.unique(idx, return_inverse=True)
    if len(uniq) == len(idx):
        order = np.argsort(idx, kind="stable")
        return idx[order], np.ascontiguousarray(vals[order])
    acc = np.zeros((len(uniq),) + vals.shape[1:], dtype=np.float64)
    flat = acc.reshape(len(uniq), -1)
    kernels.scatter_add_rows(flat, inv, vals.reshape(len(idx), -1))
    return uniq, acc
