"""Classifier adjacency: rank distances between classifiers from their scores, and 2-D maps of them."""

__version__ = "0.1.0"

from .adjacency import DistanceMatrix, distance_matrix, tau_to_distance
from .detmetrics import DetCurve, cllr, det_curve, eer, min_cllr, pav_rank_groups
from .embedding import (
    Embedding,
    IsotonicFit,
    classical_mds,
    isotonic_regression,
    nonmetric_mds,
    procrustes_align,
    procrustes_normalize,
)
from .errors import AdjvizError
from .ranking import TauResult, TauStats, kendall_tau_fast, kendall_tau_naive
from .score_io import (
    ClassifierMetadata,
    GroupMap,
    LabelMap,
    ScoreMatrix,
    group_reduce,
    load_groups,
    load_labels,
    load_metadata,
    load_scores,
    score_files_in,
)
