"""Detection-performance annotations: DET points, EER, Cllr and min-Cllr.

A trial is accepted at threshold ``t`` when its score is ``>= t``.  Cllr
reads scores as natural-log likelihood ratios and is reported in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embedding import isotonic_regression
from .errors import LengthMismatch, MissingLabel, SingleClass
from .score_io import DEFAULT_POSITIVE_LABEL, GroupMap, LabelMap

POSTERIOR_EPS = 1e-12
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class DetCurve:
    """Operating points for ascending thresholds, the last one at +inf."""

    thresholds: np.ndarray
    p_miss: np.ndarray
    p_fa: np.ndarray

    def __len__(self):
        return self.thresholds.shape[0]

    def points(self) -> np.ndarray:
        """(p_miss, p_fa) pairs, one row per threshold."""
        return np.column_stack([self.p_miss, self.p_fa])


def _split(scores, labels, trial_ids=None, positive=DEFAULT_POSITIVE_LABEL, both_classes=True):
    s = np.asarray(scores, dtype=np.float64).ravel()
    if isinstance(labels, LabelMap):
        if trial_ids is None:
            raise ValueError("trial_ids are required to align a LabelMap")
        if both_classes:
            mask = labels.binarize(trial_ids, positive)
        else:
            mask = np.array([labels.labels.get(t, None) == positive for t in trial_ids])
            missing = [t for t in trial_ids if t not in labels.labels]
            if missing:
                raise MissingLabel(f"no label for trial {missing[0]!r}")
    else:
        mask = np.asarray(labels).astype(bool).ravel()
    if both_classes and (mask.all() or not mask.any()):
        raise SingleClass("both positive and negative trials are required")
    if mask.shape != s.shape:
        raise LengthMismatch(f"{s.size} scores but {mask.size} labels")
    return s, mask


def det_curve(scores, labels, trial_ids: Sequence[str] | None = None,
              positive: str = DEFAULT_POSITIVE_LABEL) -> DetCurve:
    """Empirical miss / false-alarm rates at every distinct score.

    ``labels`` is either a boolean positive-class mask aligned with
    ``scores`` or a :class:`LabelMap` together with ``trial_ids``.
    """
    s, mask = _split(scores, labels, trial_ids, positive)
    tar = np.sort(s[mask])
    non = np.sort(s[~mask])
    thr = np.append(np.unique(s), np.inf)
    p_miss = np.searchsorted(tar, thr, side="left") / tar.size
    p_fa = (non.size - np.searchsorted(non, thr, side="left")) / non.size
    return DetCurve(thr, p_miss, p_fa)


def eer(curve: DetCurve) -> float:
    """Equal error rate, interpolated linearly where p_miss - p_fa changes sign."""
    diff = curve.p_miss - curve.p_fa
    k = int(np.argmax(diff >= 0))  # diff ends at +1, so a crossing exists
    if diff[k] == 0 or k == 0:
        return float(curve.p_miss[k])
    pm0, pm1 = curve.p_miss[k - 1], curve.p_miss[k]
    pf0, pf1 = curve.p_fa[k - 1], curve.p_fa[k]
    t = (pf0 - pm0) / ((pm1 - pm0) - (pf1 - pf0))
    return float(pm0 + t * (pm1 - pm0))


def cllr(scores, labels, trial_ids=None, positive=DEFAULT_POSITIVE_LABEL) -> float:
    """Log-likelihood-ratio cost in bits of scores read as natural-log LLRs."""
    s, mask = _split(scores, labels, trial_ids, positive)
    c_tar = np.mean(np.logaddexp(0.0, -s[mask])) / _LN2
    c_non = np.mean(np.logaddexp(0.0, s[~mask])) / _LN2
    return float(0.5 * (c_tar + c_non))


@dataclass(frozen=True)
class PavCalibration:
    """Optimal monotone recalibration of one score column."""

    llr: np.ndarray  # per trial, natural log
    posterior: np.ndarray  # per trial, unclamped PAV estimate
    block: np.ndarray  # per trial, PAV block index in score order
    n_blocks: int


def _pav_fit(s: np.ndarray, mask: np.ndarray):
    # pool equal scores first so the fit stays a function of the score
    uniq, inverse = np.unique(s, return_inverse=True)
    inverse = inverse.ravel()
    counts = np.bincount(inverse, minlength=uniq.size).astype(np.float64)
    n_tar = np.bincount(inverse, weights=mask.astype(np.float64), minlength=uniq.size)
    fit = isotonic_regression(n_tar / counts, counts)
    block_of_unique = np.empty(uniq.size, dtype=np.int64)
    for b, (start, stop) in enumerate(fit.blocks):
        block_of_unique[start:stop] = b
    return fit, inverse, block_of_unique


def pav_calibrate(scores, labels, trial_ids=None, positive=DEFAULT_POSITIVE_LABEL,
                  eps: float = POSTERIOR_EPS) -> PavCalibration:
    """Monotone posterior estimates by PAV, converted to LLRs.

    Trials with equal scores are pooled first.  Posteriors are clamped to
    ``(eps, 1 - eps)`` and the prior log-odds implied by the class counts
    are subtracted.
    """
    s, mask = _split(scores, labels, trial_ids, positive)
    fit, inverse, block_of_unique = _pav_fit(s, mask)
    post = np.clip(fit.fitted, eps, 1.0 - eps)
    prior_logodds = math.log(mask.sum() / (~mask).sum())
    llr = np.log(post) - np.log1p(-post) - prior_logodds
    return PavCalibration(llr[inverse], fit.fitted[inverse], block_of_unique[inverse], len(fit.blocks))


def min_cllr(scores, labels, trial_ids=None, positive=DEFAULT_POSITIVE_LABEL) -> float:
    """Cllr after optimal monotone (PAV) calibration."""
    s, mask = _split(scores, labels, trial_ids, positive)
    return cllr(pav_calibrate(s, mask).llr, mask)


def pav_rank_groups(scores, labels, trial_ids: Sequence[str],
                    positive: str = DEFAULT_POSITIVE_LABEL) -> GroupMap:
    """Group trials by PAV block; group ids sort in score order.

    Unlike the Cllr functions this accepts a single class (one block).
    """
    s, mask = _split(scores, labels, trial_ids, positive, both_classes=False)
    if len(trial_ids) != s.size:
        raise LengthMismatch(f"{s.size} scores but {len(trial_ids)} trial ids")
    fit, inverse, block_of_unique = _pav_fit(s, mask)
    width = len(str(len(fit.blocks) - 1))
    return GroupMap({t: f"{b:0{width}d}" for t, b in zip(trial_ids, block_of_unique[inverse])})
