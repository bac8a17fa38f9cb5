"""Dense tensor primitives.

Tensors are plain :class:`numpy.ndarray` objects stored in C (row-major)
order: the last index runs fastest.  Fusing neighbouring axes is therefore a
free ``reshape`` and never touches the stored scalars.  Every module in the
package relies on this linearization.

All four lattice models have real symmetric Hamiltonians, so the evolution
works with ``float64`` data.  The functions here accept complex input as well
and would carry a complex extension through unchanged.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError


class SVDResult(NamedTuple):
    """Truncated singular value decomposition ``m ~ u @ diag(s) @ vh``.

    ``discarded_weight`` is the sum of squares of the dropped singular
    values, measured before any renormalization.
    """

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    discarded_weight: float


def contract(a: np.ndarray, b: np.ndarray,
             index_pairs: Sequence[tuple[int, int]] = ()) -> np.ndarray:
    """Contract ``a`` and ``b`` over the paired axes.

    Remaining axes of ``a`` come first, followed by those of ``b``.  An empty
    ``index_pairs`` gives the outer product.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = [int(p[0]) for p in index_pairs]
    axes_b = [int(p[1]) for p in index_pairs]
    for ia, ib in zip(axes_a, axes_b):
        if not (-a.ndim <= ia < a.ndim and -b.ndim <= ib < b.ndim):
            raise DimensionError(f"axis pair ({ia}, {ib}) out of range")
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"cannot contract axis {ia} (extent {a.shape[ia]}) with "
                f"axis {ib} (extent {b.shape[ib]})")
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def fuse(t: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Merge axes ``start..stop-1`` into a single axis."""
    shape = t.shape
    if not 0 <= start < stop <= len(shape):
        raise DimensionError(f"invalid axis range [{start}, {stop})")
    merged = int(np.prod(shape[start:stop]))
    return t.reshape(shape[:start] + (merged,) + shape[stop:])


def split(t: np.ndarray, axis: int, dims: Sequence[int]) -> np.ndarray:
    """Split ``axis`` into consecutive axes of extents ``dims``."""
    shape = t.shape
    if int(np.prod(dims)) != shape[axis]:
        raise DimensionError(f"cannot split extent {shape[axis]} into {tuple(dims)}")
    return t.reshape(shape[:axis] + tuple(dims) + shape[axis + 1:])


def _gram_svd(m: np.ndarray):
    # Fallback for LAPACK failures.  Loses relative accuracy for singular
    # values below ~1e-8 of the largest one.
    rows, cols = m.shape
    if rows <= cols:
        w, u = np.linalg.eigh(m @ m.conj().T)
        order = np.argsort(w)[::-1]
        w, u = np.clip(w[order], 0.0, None), u[:, order]
        s = np.sqrt(w)
        keep = s > s[0] * 1e-15 if s.size and s[0] > 0 else np.zeros(s.size, bool)
        u, s = u[:, keep], s[keep]
        vh = (u.conj().T @ m) / s[:, None]
    else:
        w, v = np.linalg.eigh(m.conj().T @ m)
        order = np.argsort(w)[::-1]
        w, v = np.clip(w[order], 0.0, None), v[:, order]
        s = np.sqrt(w)
        keep = s > s[0] * 1e-15 if s.size and s[0] > 0 else np.zeros(s.size, bool)
        v, s = v[:, keep], s[keep]
        u = (m @ v) / s[None, :]
        vh = v.conj().T
    return u, s, vh


def full_svd(m: np.ndarray):
    """Thin SVD with driver fallbacks: gesdd, then gesvd, then the Gram matrix."""
    try:
        return scipy.linalg.svd(m, full_matrices=False, check_finite=False,
                                lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        pass
    try:
        return scipy.linalg.svd(m, full_matrices=False, check_finite=False,
                                lapack_driver="gesvd")
    except (np.linalg.LinAlgError, ValueError):
        pass
    try:
        return _gram_svd(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD failed on all backends") from exc


def truncation_rank(s: np.ndarray, max_rank: int | None = None,
                    rel_weight_cutoff: float = 0.0) -> int:
    """Number of leading singular values kept by the truncation policy.

    A singular value is kept when its squared value, relative to the sum of
    all squares, is at least ``rel_weight_cutoff``.  Singular values are
    assumed sorted in descending order, so the rule keeps a prefix and a
    degenerate multiplet straddling the cut is split at the computed rank.
    """
    total = float(np.dot(s, s))
    if total == 0.0:
        return 0
    if rel_weight_cutoff > 0.0:
        weights = (s * s) / total
        rank = int(np.count_nonzero(weights >= rel_weight_cutoff))
    else:
        rank = int(np.count_nonzero(s > 0.0))
    if max_rank is not None:
        rank = min(rank, int(max_rank))
    return rank


def svd_truncate(m: np.ndarray, max_rank: int | None = None,
                 rel_weight_cutoff: float = 0.0) -> SVDResult:
    """Truncated SVD of a matrix.

    Parameters
    ----------
    m : ndarray, shape (rows, cols)
        Matrix to factorize; higher-rank tensors must be fused first.
    max_rank : int or None
        Upper bound on the kept rank; ``None`` means unlimited.
    rel_weight_cutoff : float
        Drop singular values whose normalized squared weight
        ``s_k**2 / sum(s**2)`` is below this value.

    Returns
    -------
    SVDResult
        Kept factors and the discarded weight ``sum(s[r:]**2)``.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"svd_truncate expects a matrix, got ndim={m.ndim}")
    if not 0.0 <= rel_weight_cutoff < 1.0:
        raise ValueError("rel_weight_cutoff must lie in [0, 1)")
    if max_rank is not None and max_rank < 1:
        raise ValueError("max_rank must be positive")
    if not np.all(np.isfinite(m)):
        raise NumericalError("non-finite entries in matrix")
    rows, cols = m.shape
    if rows == 0 or cols == 0 or not np.any(m):
        return SVDResult(np.zeros((rows, 0), m.dtype), np.zeros(0),
                         np.zeros((0, cols), m.dtype), 0.0)
    u, s, vh = full_svd(m)
    rank = truncation_rank(s, max_rank, rel_weight_cutoff)
    discarded = float(np.dot(s[rank:], s[rank:]))
    return SVDResult(u[:, :rank], s[:rank], vh[:rank, :], discarded)


# -- charge-conserving factorizations ---------------------------------------
#
# When every tensor conserves an additive integer charge, a matrix obtained
# by fusing tensor legs is block diagonal once rows and columns are grouped
# by charge.  Factorizing block by block is exact and much cheaper.

def _group(labels):
    labels = np.asarray(labels)
    order = np.argsort(labels, kind="stable")
    values, start, count = np.unique(labels[order], return_index=True, return_counts=True)
    return {int(v): order[a:a + n] for v, a, n in zip(values, start, count)}


def _charge_blocks(row_q, col_q):
    rows, cols = _group(row_q), _group(col_q)
    for q in sorted(rows.keys() & cols.keys()):
        yield q, rows[q], cols[q]


def block_svd_truncate(m: np.ndarray, row_q, col_q, max_rank: int | None = None,
                       rel_weight_cutoff: float = 0.0):
    """Truncated SVD of a charge-block-diagonal matrix.

    Entries coupling rows and columns of different charge are ignored.
    Singular values of all blocks are pooled and truncated by the same rule
    as :func:`svd_truncate`; ties keep the lower charge first.

    Returns
    -------
    result : SVDResult
    charges : ndarray of int
        Charge label of each kept singular vector.
    """
    rows, cols = m.shape
    blocks = []
    s_all, q_all = [], []
    for q, r, c in _charge_blocks(row_q, col_q):
        sub = m[r][:, c]
        if not sub.any():
            continue
        u, s, vh = full_svd(sub)
        blocks.append((r, c, u, vh))
        s_all.append(s)
        q_all.append(np.full(s.size, q))
    if not blocks:
        return SVDResult(np.zeros((rows, 0), m.dtype), np.zeros(0),
                         np.zeros((0, cols), m.dtype), 0.0), np.zeros(0, int)
    s_cat = np.concatenate(s_all)
    owner = np.concatenate([np.full(s.size, b) for b, s in enumerate(s_all)])
    local = np.concatenate([np.arange(s.size) for s in s_all])
    order = np.argsort(-s_cat, kind="stable")
    s_sorted = s_cat[order]
    rank = truncation_rank(s_sorted, max_rank, rel_weight_cutoff)
    keep = order[:rank]
    u_out = np.zeros((rows, rank), m.dtype)
    vh_out = np.zeros((rank, cols), m.dtype)
    for b, (r, c, u, vh) in enumerate(blocks):
        sel = np.flatnonzero(owner[keep] == b)
        if sel.size:
            idx = local[keep[sel]]
            u_out[np.ix_(r, sel)] = u[:, idx]
            vh_out[np.ix_(sel, c)] = vh[idx]
    discarded = float(np.dot(s_sorted[rank:], s_sorted[rank:]))
    charges = np.concatenate(q_all)[keep]
    return SVDResult(u_out, s_sorted[:rank].copy(), vh_out, discarded), charges


def block_qr(m: np.ndarray, row_q, col_q):
    """Thin QR of a charge-block-diagonal matrix.

    Returns ``(q, r, charges)`` with ``m = q @ r`` on the allowed blocks and
    ``charges`` labelling the columns of ``q``.
    """
    rows, cols = m.shape
    parts = []
    for qn, r_idx, c_idx in _charge_blocks(row_q, col_q):
        qb, rb = np.linalg.qr(m[r_idx][:, c_idx])
        parts.append((qn, r_idx, c_idx, qb, rb))
    k = sum(p[3].shape[1] for p in parts)
    q_out = np.zeros((rows, k), m.dtype)
    r_out = np.zeros((k, cols), m.dtype)
    labels = np.empty(k, int)
    start = 0
    for qn, r_idx, c_idx, qb, rb in parts:
        n = qb.shape[1]
        sl = slice(start, start + n)
        q_out[r_idx, sl] = qb
        r_out[sl, c_idx] = rb
        labels[sl] = qn
        start += n
    return q_out, r_out, labels
