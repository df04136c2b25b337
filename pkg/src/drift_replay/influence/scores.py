"""Reference vectors and GGscores (reference-gradient alignment of per-sample gradients)."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import DriftReplayError, EmptyDataset, ScoringError
from ..nn.core import ParamSelection, batch_grad, per_sample_grads
from ..nn.params import ParamSet, SparseGrad
from ..records import as_arrays

DEFAULT_CHUNK = 4096


def worker_count() -> int:
    """Thread cap from ``DRIFT_REPLAY_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("DRIFT_REPLAY_THREADS", "1")))
    except ValueError:
        return 1


def reference_vector(model, D, params: ParamSet, kind=None, selection=ParamSelection.SELECTED) -> SparseGrad:
    """Mean-loss gradient over ``D`` at ``params``, restricted to the chosen parameters."""
    arrays = as_arrays(D)
    if len(arrays) == 0:
        raise EmptyDataset("reference vector over an empty dataset")
    return batch_grad(model, params, arrays, kind, selection)


def ggscore(model, z, params: ParamSet, V, kind=None, selection=ParamSelection.SELECTED) -> float:
    """``V . grad L(z, params)`` over the selected support."""
    return float(per_sample_grads(model, params, as_arrays(z), kind, selection).dot(V)[0])


def ggscore_batch(model, D, params: ParamSet, V, kind=None, selection=ParamSelection.SELECTED,
                  chunk: int = DEFAULT_CHUNK, threads: int = None) -> np.ndarray:
    """GGscore of every record in ``D``, in input order.

    Chunks are scored independently (read-only parameters) and may run on
    several threads; numpy and the compiled kernels release the GIL.
    """
    arrays = as_arrays(D)
    n = len(arrays)
    if n == 0:
        return np.zeros(0)
    threads = threads or worker_count()
    starts = list(range(0, n, chunk))

    def score(start):
        part = arrays.take(np.arange(start, min(start + chunk, n)))
        try:
            return per_sample_grads(model, params, part, kind, selection).dot(V)
        except DriftReplayError as exc:
            raise ScoringError(start + _first_failure(model, params, part, V, kind, selection), exc) from exc

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(score, starts))
    else:
        parts = [score(s) for s in starts]
    return np.concatenate(parts)


def _first_failure(model, params, part, V, kind, selection):
    for j in range(len(part)):
        try:
            per_sample_grads(model, params, part.take([j]), kind, selection).dot(V)
        except DriftReplayError:
            return j
    return 0
