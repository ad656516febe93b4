"""Tie-corrected Kendall rank correlation between two score columns.

Two implementations share one return contract:

* :func:`kendall_tau_naive` classifies every one of the N(N-1)/2 trial pairs
  explicitly.  It is quadratic and serves as the reference.
* :func:`kendall_tau_fast` is Knight's O(N log N) method: sort the pairs on
  (x, y), count tie runs, and count discordant pairs as the inversions left
  in the y sequence, found with a bottom-up merge sort.

Tau is computed from the pair counts as::

    tau = (n_con - n_dis) / sqrt((n_con + n_dis + ties_i) * (n_con + n_dis + ties_j))

where ``ties_i`` (``ties_j``) counts pairs tied only in x (only in y).  Pairs
tied in both columns enter no term.  Score equality is exact float equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DegenerateColumn, LengthMismatch

__all__ = [
    "TauStats",
    "TauResult",
    "RankedColumn",
    "dense_ranks",
    "kendall_tau_naive",
    "kendall_tau_fast",
    "kendall_tau_ranked",
    "tau_from_stats",
]


@dataclass(frozen=True)
class TauStats:
    n_con: int
    n_dis: int
    ties_i: int
    ties_j: int
    ties_both: int
    n_pairs: int

    def swapped(self) -> "TauStats":
        return TauStats(self.n_con, self.n_dis, self.ties_j, self.ties_i, self.ties_both, self.n_pairs)


@dataclass(frozen=True)
class TauResult:
    tau: float
    stats: TauStats


def tau_from_stats(stats: TauStats) -> float:
    """Evaluate tau-b from pair counts; raise DegenerateColumn if undefined."""
    ordered = stats.n_con + stats.n_dis
    # n_con + n_dis + ties_i counts the pairs that are NOT tied in y, and
    # vice versa, so a zero factor means that column is constant.
    untied_y = ordered + stats.ties_i
    untied_x = ordered + stats.ties_j
    if untied_x == 0 or untied_y == 0:
        which = "x" if untied_x == 0 else "y"
        raise DegenerateColumn(f"tau undefined: column {which} is constant")
    tau = (stats.n_con - stats.n_dis) / math.sqrt(untied_y * untied_x)
    return min(1.0, max(-1.0, tau))


def _as_columns(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"columns have lengths {x.size} and {y.size}")
    if x.size < 2:
        raise DegenerateColumn(f"tau undefined for {x.size} trial(s); need at least 2")
    return x, y


def kendall_tau_naive(x, y) -> TauResult:
    """Reference tau: classify every trial pair by direct comparison."""
    x, y = _as_columns(x, y)
    n = x.size
    n_con = n_dis = ties_i = ties_j = ties_both = 0
    for a in range(n - 1):
        # sign of (later - current) per column, without subtracting
        sx = (x[a + 1:] > x[a]).astype(np.int8) - (x[a + 1:] < x[a])
        sy = (y[a + 1:] > y[a]).astype(np.int8) - (y[a + 1:] < y[a])
        prod = sx * sy
        zx = sx == 0
        zy = sy == 0
        n_con += int(np.count_nonzero(prod > 0))
        n_dis += int(np.count_nonzero(prod < 0))
        ties_both += int(np.count_nonzero(zx & zy))
        ties_i += int(np.count_nonzero(zx & ~zy))
        ties_j += int(np.count_nonzero(~zx & zy))
    stats = TauStats(n_con, n_dis, ties_i, ties_j, ties_both, n * (n - 1) // 2)
    return TauResult(tau_from_stats(stats), stats)


@dataclass(frozen=True)
class RankedColumn:
    """Per-column precomputation reused across every pair the column enters."""

    ranks: np.ndarray  # dense ranks, equal scores share a rank
    order: np.ndarray  # stable argsort of ranks
    sorted_ranks: np.ndarray
    n_unique: int
    ties: int  # pairs tied within this column

    @classmethod
    def from_scores(cls, x) -> "RankedColumn":
        uniq, inv = np.unique(np.asarray(x, dtype=np.float64).ravel(), return_inverse=True)
        ranks = inv.astype(np.int64).ravel()
        order = np.argsort(ranks, kind="stable")
        counts = np.bincount(ranks).astype(np.int64)
        ties = int((counts * (counts - 1) // 2).sum())
        return cls(ranks, order, ranks[order], int(uniq.size), ties)

    def __len__(self):
        return self.ranks.shape[0]


def dense_ranks(x) -> tuple[np.ndarray, int]:
    """Dense integer ranks (equal values share a rank) and the number of distinct values."""
    col = RankedColumn.from_scores(x)
    return col.ranks, col.n_unique


@numba.njit(cache=True, nogil=True)
def _discordant_and_ties(order_x, sorted_rx, ry):  # pragma: no cover - compiled
    n = order_x.shape[0]
    src = ry[order_x]

    # within each run of tied x, order by y and count the tie structure
    tx = 0
    txy = 0
    lo = 0
    while lo < n:
        hi = lo + 1
        while hi < n and sorted_rx[hi] == sorted_rx[lo]:
            hi += 1
        run = hi - lo
        if run > 1:
            tx += run * (run - 1) // 2
            if run <= 32:
                # insertion sort in place; short runs dominate real score data
                for k in range(lo + 1, hi):
                    v = src[k]
                    m = k - 1
                    while m >= lo and src[m] > v:
                        src[m + 1] = src[m]
                        m -= 1
                    src[m + 1] = v
            else:
                src[lo:hi] = np.sort(src[lo:hi])
            run_xy = 1
            for k in range(lo + 1, hi):
                if src[k] == src[k - 1]:
                    run_xy += 1
                else:
                    txy += run_xy * (run_xy - 1) // 2
                    run_xy = 1
            txy += run_xy * (run_xy - 1) // 2
        lo = hi

    # strict inversions of y in (x, y) order == discordant pairs
    buf = np.empty_like(src)
    n_dis = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            if mid >= hi or src[mid - 1] <= src[mid]:
                buf[lo:hi] = src[lo:hi]
                continue
            i = lo
            j = mid
            k = lo
            # branchless: the comparison outcome is data-dependent noise
            while i < mid and j < hi:
                a = src[i]
                b = src[j]
                right = b < a
                buf[k] = b if right else a
                n_dis += (mid - i) if right else 0
                j += right
                i += 1 - right
                k += 1
            while i < mid:
                buf[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = src[j]
                j += 1
                k += 1
        src, buf = buf, src
        width *= 2
    return n_dis, tx, txy


def kendall_tau_ranked(cx: RankedColumn, cy: RankedColumn) -> TauResult:
    """Fast tau on precomputed columns (see :class:`RankedColumn`)."""
    n = len(cx)
    if len(cy) != n:
        raise LengthMismatch(f"columns have lengths {n} and {len(cy)}")
    if n < 2:
        raise DegenerateColumn(f"tau undefined for {n} trial(s); need at least 2")
    n_dis, tx, txy = (int(v) for v in _discordant_and_ties(cx.order, cx.sorted_ranks, cy.ranks))
    n_pairs = n * (n - 1) // 2
    ties_i = tx - txy
    ties_j = cy.ties - txy
    n_con = n_pairs - n_dis - ties_i - ties_j - txy
    stats = TauStats(n_con, n_dis, ties_i, ties_j, txy, n_pairs)
    return TauResult(tau_from_stats(stats), stats)


def kendall_tau_fast(x, y) -> TauResult:
    """O(N log N) tau with the same counts as :func:`kendall_tau_naive`."""
    x, y = _as_columns(x, y)
    return kendall_tau_ranked(RankedColumn.from_scores(x), RankedColumn.from_scores(y))
