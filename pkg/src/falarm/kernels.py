"""Edit-distance alignment kernels.

The dynamic program dominates runtime when scoring large corpora, so the hot
kernel is compiled with numba when available. Setting FALARM_NO_NUMBA=1 (or
running without numba installed) selects a pure-numpy fallback that replaces
the inner loop with a min-plus prefix scan per row.

Both paths return identical (insertions, deletions, substitutions) counts.
Ties between equal-cost alignments prefer substitutions over deletions over
insertions, realized by minimizing (total cost, insertions + deletions)
lexicographically; that secondary minimum pins down all three counts, since
insertions minus deletions is fixed by the length difference.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = ["align_counts", "NUMBA_ENABLED"]


def _counts_from_combined(combined: int, n: int, m: int) -> tuple[int, int, int]:
    big = n + m + 1
    cost, nondiag = divmod(combined, big)
    ins = (nondiag + m - n) // 2
    dele = (nondiag - m + n) // 2
    sub = cost - nondiag
    return ins, dele, sub


def _align_counts_numpy(ref: np.ndarray, hyp: np.ndarray) -> tuple[int, int, int]:
    n, m = len(ref), len(hyp)
    big = np.int64(n + m + 1)
    step = big + 1  # every insertion/deletion adds cost 1 and one nondiag move
    prev = np.arange(m + 1, dtype=np.int64) * step
    cols = np.arange(m, dtype=np.int64)
    scan_offsets = cols * step
    for i in range(1, n + 1):
        sub_cost = (ref[i - 1] != hyp).astype(np.int64) * big
        cand = np.minimum(prev[:m] + sub_cost, prev[1:] + step)
        # min-plus prefix scan resolves the left-to-right insertion chain:
        # cur[j] = min(cur[0] + j*step, min_{k<j}(cand[k] + (j-1-k)*step))
        head = np.int64(i) * step
        scanned = np.minimum.accumulate(
            np.concatenate(([head + step], cand - scan_offsets))
        )
        cur = np.empty(m + 1, dtype=np.int64)
        cur[0] = head
        cur[1:] = scanned[1:] + scan_offsets
        prev = cur
    return _counts_from_combined(int(prev[m]), n, m)


NUMBA_ENABLED = False
if not os.environ.get("FALARM_NO_NUMBA"):
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover
        pass

if NUMBA_ENABLED:

    @njit(cache=True)
    def _combined_numba(ref, hyp, big):  # pragma: no cover - via wrapper
        n, m = len(ref), len(hyp)
        step = big + 1
        prev = np.empty(m + 1, dtype=np.int64)
        cur = np.empty(m + 1, dtype=np.int64)
        for j in range(m + 1):
            prev[j] = j * step
        for i in range(1, n + 1):
            cur[0] = i * step
            for j in range(1, m + 1):
                best = prev[j - 1] + (0 if ref[i - 1] == hyp[j - 1] else big)
                if prev[j] + step < best:
                    best = prev[j] + step
                if cur[j - 1] + step < best:
                    best = cur[j - 1] + step
                cur[j] = best
            prev, cur = cur, prev
        return prev[m]


def align_counts(ref_ids: np.ndarray, hyp_ids: np.ndarray) -> tuple[int, int, int]:
    """Minimal-edit (insertions, deletions, substitutions) between two
    integer-coded token sequences."""
    ref = np.ascontiguousarray(ref_ids, dtype=np.int32)
    hyp = np.ascontiguousarray(hyp_ids, dtype=np.int32)
    if NUMBA_ENABLED:
        n, m = len(ref), len(hyp)
        combined = int(_combined_numba(ref, hyp, np.int64(n + m + 1)))
        return _counts_from_combined(combined, n, m)
    return _align_counts_numpy(ref, hyp)
