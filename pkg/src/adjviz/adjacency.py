"""Rank distances between classifiers and the M x M distance matrix."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DegenerateColumn, InvalidMatrix, OutOfRange, ParseError
from .ranking import RankedColumn, kendall_tau_ranked
from .score_io import ScoreMatrix

MATRIX_TOL = 1e-9


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric, zero-diagonal, non-negative distances with classifier ids attached.

    Matrices built by :func:`distance_matrix` additionally lie in [0, 1];
    that range is not enforced here so arbitrary dissimilarities can be
    embedded too.
    """

    classifier_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        ids = tuple(self.classifier_ids)
        v = np.array(self.values, dtype=np.float64, copy=True)
        m = len(ids)
        if v.shape != (m, m):
            raise InvalidMatrix(f"distance matrix has shape {v.shape}, expected ({m}, {m})")
        if len(set(ids)) != m:
            raise InvalidMatrix("duplicate classifier ids in distance matrix")
        if not np.all(np.isfinite(v)):
            raise InvalidMatrix("distance matrix has non-finite entries")
        if np.any(v < 0):
            i, j = np.argwhere(v < 0)[0]
            raise InvalidMatrix(f"negative distance at cell ({ids[i]}, {ids[j]})")
        if np.any(np.diag(v) != 0):
            i = int(np.flatnonzero(np.diag(v))[0])
            raise InvalidMatrix(f"nonzero diagonal at cell ({ids[i]}, {ids[i]})")
        if np.any(v != v.T):
            i, j = np.argwhere(v != v.T)[0]
            raise InvalidMatrix(f"asymmetric distance at cell ({ids[i]}, {ids[j]})")
        v.setflags(write=False)
        object.__setattr__(self, "classifier_ids", ids)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_array(cls, ids: Sequence[str], values, tol: float = MATRIX_TOL) -> "DistanceMatrix":
        """Validate a nearly symmetric matrix within ``tol`` and clean it up."""
        v = np.array(values, dtype=np.float64)
        ids = tuple(ids)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(ids):
            raise InvalidMatrix(f"distance matrix has shape {v.shape} for {len(ids)} ids")
        asym = np.abs(v - v.T)
        if np.any(asym > tol):
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise InvalidMatrix(
                f"asymmetric distance at cell ({ids[i]}, {ids[j]}): {v[i, j]!r} vs {v[j, i]!r}"
            )
        diag = np.abs(np.diag(v))
        if np.any(diag > tol):
            i = int(np.argmax(diag))
            raise InvalidMatrix(f"nonzero diagonal at cell ({ids[i]}, {ids[i]}): {v[i, i]!r}")
        v = 0.5 * (v + v.T)
        np.fill_diagonal(v, 0.0)
        return cls(ids, v)

    def __len__(self):
        return len(self.classifier_ids)


def tau_to_distance(tau: float) -> float:
    """Map a rank correlation in [-1, 1] to a distance ``(1 - tau) / 2`` in [0, 1]."""
    if not (-1.0 <= tau <= 1.0):
        raise OutOfRange(f"tau {tau!r} outside [-1, 1]")
    return 0.5 * (1.0 - tau)


def default_threads() -> int:
    return os.cpu_count() or 1


def distance_matrix(S: ScoreMatrix, threads: int | None = None) -> DistanceMatrix:
    """Pairwise rank distances between all classifier columns of ``S``.

    Pairs are evaluated on a pool of ``threads`` workers; the result does not
    depend on the worker count.
    """
    m = S.n_classifiers
    if m < 2:
        raise InvalidMatrix(f"need at least 2 classifiers, got {m}")
    if S.n_trials < 2:
        raise DegenerateColumn(
            f"tau undefined with {S.n_trials} trial(s); need at least 2", classifier=None
        )
    cols = [RankedColumn.from_scores(S.values[:, j]) for j in range(m)]
    for cid, col in zip(S.classifier_ids, cols):
        if col.n_unique < 2:
            raise DegenerateColumn(f"classifier {cid!r} has constant scores; tau undefined", classifier=cid)

    pairs = list(combinations(range(m), 2))

    def work(pair):
        i, j = pair
        return tau_to_distance(kendall_tau_ranked(cols[i], cols[j]).tau)

    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            dists = list(pool.map(work, pairs))
    else:
        dists = [work(p) for p in pairs]

    values = np.zeros((m, m), dtype=np.float64)
    for (i, j), d in zip(pairs, dists):
        values[i, j] = values[j, i] = d
    return DistanceMatrix(S.classifier_ids, values)


def write_distance_matrix(D: DistanceMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(["id", *D.classifier_ids]) + "\n")
        for cid, row in zip(D.classifier_ids, D.values):
            fh.write("\t".join([cid, *(format(float(v), ".12g") for v in row)]) + "\n")


def read_distance_matrix(path, tol: float = MATRIX_TOL) -> DistanceMatrix:
    with open(path, encoding="utf-8") as fh:
        lines = [(k, ln.rstrip("\r\n")) for k, ln in enumerate(fh, 1)]
    lines = [(k, ln) for k, ln in lines if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ParseError(path, 1, "empty distance matrix file")
    header = lines[0][1].split("\t")
    ids = header[1:]
    if len(lines) - 1 != len(ids):
        raise ParseError(path, lines[0][0], f"header lists {len(ids)} ids but {len(lines) - 1} rows follow")
    values = np.empty((len(ids), len(ids)))
    for r, (lineno, line) in enumerate(lines[1:]):
        fields = line.split("\t")
        if len(fields) != len(ids) + 1:
            raise ParseError(path, lineno, f"expected {len(ids) + 1} fields, got {len(fields)}")
        if fields[0] != ids[r]:
            raise ParseError(path, lineno, f"row id {fields[0]!r} does not match column id {ids[r]!r}")
        try:
            values[r] = [float(f) for f in fields[1:]]
        except ValueError as e:
            raise ParseError(path, lineno, str(e)) from None
        if not all(math.isfinite(v) for v in values[r]):
            raise ParseError(path, lineno, "non-finite distance")
    return DistanceMatrix.from_array(ids, values, tol=tol)
