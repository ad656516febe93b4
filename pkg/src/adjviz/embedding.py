"""Low-dimensional embeddings of a distance matrix.

Two methods are provided:

``classical``
    Torgerson scaling: double-center the squared distances and keep the
    leading eigenvectors.  Negative eigenvalues are clamped to zero and the
    clamped share of the spectrum is reported.

``nonmetric``
    SMACOF stress majorization where the targets (disparities) are the
    isotonic regression of the current distances on the order of the input
    dissimilarities, ties between dissimilarities left free (Kruskal's
    primary approach).  The configuration is rescaled optimally before every
    Guttman transform, which makes Kruskal's stress-1 non-increasing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .adjacency import DistanceMatrix
from .errors import DimensionTooLarge, EmptyInput, NonPositiveWeight, ParseError

log = logging.getLogger(__name__)

MAX_ITER = 300
EPS = 1e-9
CLAMP_WARN = 1e-9


@dataclass(frozen=True)
class Embedding:
    classifier_ids: tuple[str, ...]
    coords: np.ndarray
    method: str
    stress: float
    trace: tuple[float, ...] = ()
    iterations: int = 0
    seed: int | None = None
    clamped_mass: float = 0.0

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64, copy=True)
        if c.ndim != 2 or c.shape[0] != len(self.classifier_ids):
            raise ValueError(f"coords shape {c.shape} does not match {len(self.classifier_ids)} ids")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "classifier_ids", tuple(self.classifier_ids))
        object.__setattr__(self, "trace", tuple(float(s) for s in self.trace))

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def distances(self) -> np.ndarray:
        return squareform(pdist(self.coords))


@dataclass(frozen=True)
class IsotonicFit:
    y: np.ndarray
    weights: np.ndarray
    fitted: np.ndarray
    # half-open [start, stop) index ranges of the pooled blocks, in order
    blocks: tuple[tuple[int, int], ...] = field(default=())


# -- isotonic regression -----------------------------------------------------


def isotonic_regression(y, w=None) -> IsotonicFit:
    """Weighted least-squares non-decreasing fit by pool-adjacent-violators."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size == 0:
        raise EmptyInput("isotonic regression of an empty sequence")
    w = np.ones_like(y) if w is None else np.asarray(w, dtype=np.float64).ravel()
    if w.shape != y.shape:
        raise ValueError(f"weights have length {w.size}, values {y.size}")
    if not np.all(w > 0):
        raise NonPositiveWeight("isotonic regression weights must be positive")

    # stack of blocks: weighted mean, total weight, start index
    means: list[float] = []
    weights: list[float] = []
    starts: list[int] = []
    for k in range(y.size):
        m, wt, st = float(y[k]), float(w[k]), k
        # pooling equal neighbours keeps the fit and makes blocks maximal
        while means and means[-1] >= m:
            pw = weights.pop()
            pm = means.pop()
            st = starts.pop()
            m = (pm * pw + m * wt) / (pw + wt)
            wt += pw
        means.append(m)
        weights.append(wt)
        starts.append(st)

    stops = starts[1:] + [y.size]
    fitted = np.repeat(np.asarray(means), np.diff([*starts, y.size]))
    return IsotonicFit(y, w, fitted, tuple(zip(starts, stops)))


# -- classical MDS -----------------------------------------------------------


def _check_dim(m: int, dim: int) -> None:
    if dim < 1:
        raise DimensionTooLarge(f"embedding dimension must be positive, got {dim}")
    if dim > m - 1:
        raise DimensionTooLarge(f"cannot embed {m} points in {dim} dimensions (max {m - 1})")


def _stress1(target: np.ndarray, d: np.ndarray) -> float:
    den = float(np.dot(d, d))
    if den == 0.0:
        return 0.0
    r = target - d
    return float(np.sqrt(np.dot(r, r) / den))


def classical_mds(D: DistanceMatrix, dim: int = 2) -> Embedding:
    """Torgerson scaling of ``D`` into ``dim`` dimensions."""
    m = len(D)
    _check_dim(m, dim)
    sq = D.values**2
    J = np.eye(m) - 1.0 / m
    B = -0.5 * J @ sq @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]

    total = float(np.abs(evals).sum())
    clamped = float(np.abs(evals[evals < 0]).sum()) / total if total > 0 else 0.0
    if clamped > CLAMP_WARN:
        log.warning("classical MDS clamped %.3g of the spectrum (negative eigenvalues)", clamped)

    lead = np.clip(evals[:dim], 0.0, None)
    coords = evecs[:, :dim] * np.sqrt(lead)
    coords -= coords.mean(axis=0)
    delta = squareform(D.values, checks=False)
    stress = _stress1(delta, pdist(coords)) if delta.any() else 0.0
    return Embedding(D.classifier_ids, coords, "classical", stress, clamped_mass=clamped)


# -- non-metric MDS ----------------------------------------------------------


def _disparities(delta: np.ndarray, d: np.ndarray) -> np.ndarray:
    # primary approach: within tied dissimilarities follow the current distances
    order = np.lexsort((d, delta))
    out = np.empty_like(d)
    out[order] = isotonic_regression(d[order]).fitted
    return out


def _guttman(X: np.ndarray, target: np.ndarray, d: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    ratio = np.zeros_like(d)
    nz = d > 0
    ratio[nz] = target[nz] / d[nz]
    B = -squareform(ratio)
    B[np.diag_indices(n)] = -B.sum(axis=1)
    return B @ X / n


def nonmetric_mds(
    D: DistanceMatrix,
    dim: int = 2,
    max_iter: int = MAX_ITER,
    eps: float = EPS,
    seed: int | None = None,
    init: np.ndarray | None = None,
) -> Embedding:
    """Non-metric SMACOF embedding of ``D``.

    The start configuration is ``init`` if given, a seeded random draw when
    ``seed`` is set, and the classical solution otherwise.  Iteration stops
    once the relative stress-1 improvement drops below ``eps``.  Hitting
    ``max_iter`` is not an error; the trace records every accepted step.
    """
    m = len(D)
    _check_dim(m, dim)
    delta = squareform(D.values, checks=False)

    if init is not None:
        X = np.array(init, dtype=np.float64)
        if X.shape != (m, dim):
            raise ValueError(f"init has shape {X.shape}, expected {(m, dim)}")
    elif seed is not None:
        X = np.random.default_rng(seed).standard_normal((m, dim))
    else:
        X = np.array(classical_mds(D, dim).coords)
    X = X - X.mean(axis=0)

    if not delta.any():
        zeros = np.zeros((m, dim))
        return Embedding(D.classifier_ids, zeros, "nonmetric", 0.0, (0.0,), 0, seed)
    if not pdist(X).any():
        # a collapsed start (e.g. classical MDS of a spectrum with no positive part)
        X = np.random.default_rng(0 if seed is None else seed).standard_normal((m, dim))
        X -= X.mean(axis=0)

    d = pdist(X)
    target = _disparities(delta, d)
    stress = _stress1(target, d)
    trace = [stress]
    iterations = 0
    while iterations < max_iter and stress > 0.0:
        norm_t = float(np.sqrt(np.dot(target, target)))
        scale = norm_t / float(np.dot(d, d))
        X_new = _guttman(X * scale, target / norm_t, d * scale)
        d_new = pdist(X_new)
        target_new = _disparities(delta, d_new)
        stress_new = _stress1(target_new, d_new)
        if stress_new > stress:
            # rounding at convergence; keep the better configuration
            break
        X, d, target, stress = X_new, d_new, target_new, stress_new
        trace.append(stress)
        iterations += 1
        if trace[-2] - stress < eps * trace[-2]:
            break

    # least-squares scale against the input dissimilarities
    X = X * (float(np.dot(d, delta)) / float(np.dot(d, d)))
    X -= X.mean(axis=0)
    return Embedding(D.classifier_ids, X, "nonmetric", stress, tuple(trace), iterations, seed)


# -- normalization -----------------------------------------------------------


def _sign_fix(coords: np.ndarray) -> np.ndarray:
    scale = float(np.abs(coords).max()) if coords.size else 0.0
    tol = 1e-9 * scale
    out = coords.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size and col[nz[0]] < 0:
            out[:, k] = -col
    return out


def procrustes_normalize(E: Embedding) -> Embedding:
    """Canonical pose: centered, principal axes along the coordinate axes.

    Each axis is then oriented so the first classifier with a non-negligible
    coordinate on it lies on the positive side.  When the principal variances
    coincide (an isotropic cloud), the first off-center classifier defines the
    first axis instead.
    """
    X = np.asarray(E.coords, dtype=np.float64)
    X = X - X.mean(axis=0)
    cov = X.T @ X
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    Y = X @ evecs
    top = float(evals[0]) if evals.size else 0.0
    if X.shape[1] == 2 and top > 0 and evals[0] - evals[1] <= 1e-9 * top:
        norms = np.linalg.norm(X, axis=1)
        lead = int(np.flatnonzero(norms > 1e-9 * norms.max())[0])
        u = X[lead] / norms[lead]
        R = np.array([[u[0], -u[1]], [u[1], u[0]]])
        Y = X @ R
    Y = _sign_fix(Y)
    Y -= Y.mean(axis=0)
    return replace(E, coords=Y)


def procrustes_align(X, target) -> np.ndarray:
    """Rotate/reflect and translate ``X`` onto ``target`` (no scaling)."""
    X = np.asarray(X, dtype=np.float64)
    T = np.asarray(target, dtype=np.float64)
    xc = X - X.mean(axis=0)
    tc = T - T.mean(axis=0)
    U, _, Vt = np.linalg.svd(xc.T @ tc)
    return xc @ (U @ Vt) + T.mean(axis=0)


# -- serialization -----------------------------------------------------------


def write_embedding(E: Embedding, path) -> None:
    seed = "none" if E.seed is None else str(E.seed)
    header = (
        f"# method={E.method} stress={E.stress:.9g} iterations={E.iterations} "
        f"seed={seed} clamped_mass={E.clamped_mass:.9g}"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for cid, row in zip(E.classifier_ids, E.coords):
            # +0.0 folds negative zero so output bytes do not depend on it
            fh.write("\t".join([cid, *(format(float(v) + 0.0, ".9g") for v in row)]) + "\n")


def read_embedding(path) -> Embedding:
    meta: dict[str, str] = {}
    ids: list[str] = []
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise ParseError(path, lineno, "expected an id and at least one coordinate")
            try:
                rows.append([float(f) for f in fields[1:]])
            except ValueError as e:
                raise ParseError(path, lineno, str(e)) from None
            if rows and len(rows[-1]) != len(rows[0]):
                raise ParseError(path, lineno, "inconsistent number of coordinates")
            ids.append(fields[0])
    if not ids:
        raise ParseError(path, 1, "no embedding rows")
    seed = meta.get("seed", "none")
    return Embedding(
        ids,
        np.asarray(rows),
        meta.get("method", "unknown"),
        float(meta.get("stress", "nan")),
        iterations=int(meta.get("iterations", 0)),
        seed=None if seed == "none" else int(seed),
        clamped_mass=float(meta.get("clamped_mass", 0.0)),
    )
