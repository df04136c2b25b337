"""Pure numpy versions of the compiled kernels, same signatures and semantics."""

import numpy as np


def _check_idx(idx, n_rows):
    if idx.size and (idx.min() < 0 or idx.max() >= n_rows):
        bad = idx[(idx < 0) | (idx >= n_rows)][0]
        raise IndexError(f"row {bad} out of range")


def scatter_add_rows(table, idx, rows):
    if rows.shape[0] != idx.shape[0] or table.shape[1] != rows.shape[1]:
        raise ValueError("scatter_add_rows: shape mismatch")
    _check_idx(idx, table.shape[0])
    np.add.at(table, idx, rows)


def gather_rowdot(table, idx, rows):
    if rows.shape[0] != idx.shape[0] or table.shape[1] != rows.shape[1]:
        raise ValueError("gather_rowdot: shape mismatch")
    _check_idx(idx, table.shape[0])
    return np.einsum("nd,nd->n", table[idx], rows)


def outer_dot(a, delta, V):
    if delta.shape[0] != a.shape[0] or V.shape != (a.shape[1], delta.shape[1]):
        raise ValueError("outer_dot: shape mismatch")
    return np.einsum("ni,ni->n", a, delta @ V.T)
