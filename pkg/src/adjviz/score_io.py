"""Reading, validating and group-reducing classifier score files.

Score files hold one classifier each, one ``<trial_id>\\t<score>`` record per
line.  Lines starting with ``#`` and blank lines are skipped.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateClassifierId,
    DuplicateKey,
    DuplicateTrial,
    EmptyInput,
    MissingLabel,
    MissingTrial,
    NonFiniteScore,
    ParseError,
    SingleClass,
    UnmappedTrial,
)

log = logging.getLogger(__name__)

DEFAULT_POSITIVE_LABEL = "target"
_FALSE_FLAGS = {"", "0", "false", "no", "n", "off", "none"}


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScoreMatrix:
    """Scores of M classifiers on N common trials (rows=trials, cols=classifiers)."""

    classifier_ids: tuple[str, ...]
    trial_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "classifier_ids", tuple(self.classifier_ids))
        object.__setattr__(self, "trial_ids", tuple(self.trial_ids))
        values = _freeze(self.values)
        if values.ndim != 2:
            raise ValueError("score values must be a 2-D array")
        if values.shape != (len(self.trial_ids), len(self.classifier_ids)):
            raise ValueError(
                f"score values have shape {values.shape}, expected "
                f"({len(self.trial_ids)}, {len(self.classifier_ids)})"
            )
        _check_unique(self.classifier_ids, DuplicateClassifierId, "classifier id")
        _check_unique(self.trial_ids, DuplicateTrial, "trial id")
        if not np.all(np.isfinite(values)):
            r, c = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteScore(
                f"non-finite score for classifier {self.classifier_ids[c]!r}, "
                f"trial {self.trial_ids[r]!r}"
            )
        object.__setattr__(self, "values", values)

    @property
    def n_trials(self) -> int:
        return len(self.trial_ids)

    @property
    def n_classifiers(self) -> int:
        return len(self.classifier_ids)

    def column(self, classifier_id: str) -> np.ndarray:
        return self.values[:, self.classifier_ids.index(classifier_id)]


def _check_unique(ids, exc, what):
    seen = set()
    for i in ids:
        if i in seen:
            raise exc(f"duplicate {what} {i!r}")
        seen.add(i)


@dataclass(frozen=True)
class LabelMap:
    """Ground-truth class label (a string token) for each trial."""

    labels: Mapping[str, str]

    def __len__(self):
        return len(self.labels)

    def binarize(self, trial_ids: Sequence[str], positive: str = DEFAULT_POSITIVE_LABEL) -> np.ndarray:
        """Boolean positive-class mask aligned with ``trial_ids``.

        Raises MissingLabel for an unlabeled trial and SingleClass when only
        one class is present.
        """
        out = np.empty(len(trial_ids), dtype=bool)
        for k, t in enumerate(trial_ids):
            try:
                out[k] = self.labels[t] == positive
            except KeyError:
                raise MissingLabel(f"no label for trial {t!r}") from None
        if out.all() or not out.any():
            which = "positive" if not out.any() else "negative"
            raise SingleClass(f"no {which} trials (positive label {positive!r})")
        return out


@dataclass(frozen=True)
class GroupMap:
    """Assignment of each trial to exactly one group (condition)."""

    groups: Mapping[str, str]

    def __len__(self):
        return len(self.groups)

    def group_ids(self) -> list[str]:
        return sorted(set(self.groups.values()))


@dataclass(frozen=True)
class ClassifierMetadata:
    """Human-readable attributes per classifier, as read from the metadata table.

    ``attributes[cid]`` holds every non-id column as a string.  The columns
    named ``annotation`` and ``highlight`` are also exposed parsed, through
    :meth:`annotation` and :meth:`highlighted`, but any column can be used
    for either role by passing its key.
    """

    attributes: Mapping[str, Mapping[str, str]]
    columns: tuple[str, ...] = ()

    def value(self, cid: str, key: str) -> str | None:
        v = self.attributes.get(cid, {}).get(key)
        return v if v else None

    def annotation(self, cid: str, key: str = "annotation") -> float | None:
        v = self.value(cid, key)
        if v is None:
            return None
        try:
            return float(v)
        except ValueError:
            return None

    def highlighted(self, cid: str, key: str = "highlight") -> bool:
        v = self.value(cid, key)
        return v is not None and v.strip().lower() not in _FALSE_FLAGS


# -- parsing -----------------------------------------------------------------


def _records(path) -> Iterator[tuple[int, str, str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if len(fields) != 2:
                raise ParseError(path, lineno, f"expected 2 fields, got {len(fields)}")
            yield lineno, fields[0], fields[1]


def read_score_file(path) -> tuple[list[str], np.ndarray]:
    """Parse one score file into (trial ids in file order, float64 scores)."""
    trials: list[str] = []
    scores: list[float] = []
    seen: dict[str, int] = {}
    for lineno, trial, text in _records(path):
        try:
            score = float(text)
        except ValueError:
            raise ParseError(path, lineno, f"cannot parse score {text!r}") from None
        if not math.isfinite(score):
            raise NonFiniteScore(f"{path}:{lineno}: non-finite score {text!r} for trial {trial!r}")
        if trial in seen:
            raise DuplicateTrial(
                f"{path}:{lineno}: duplicate trial {trial!r} (first seen on line {seen[trial]})"
            )
        seen[trial] = lineno
        trials.append(trial)
        scores.append(score)
    return trials, np.asarray(scores, dtype=np.float64)


def load_scores(paths: Sequence, classifier_ids: Sequence[str] | None = None) -> ScoreMatrix:
    """Load one score file per classifier and align them on trial ids.

    Rows follow the trial order of the first file.  Every file must cover the
    same trial set; a trial missing anywhere raises :class:`MissingTrial`.
    Classifier ids default to the file name stems.
    """
    paths = [Path(p) for p in paths]
    if len(paths) < 2:
        raise EmptyInput(f"need at least 2 score files, got {len(paths)}")
    if classifier_ids is None:
        classifier_ids = [p.stem for p in paths]
    elif len(classifier_ids) != len(paths):
        raise ValueError("classifier_ids and paths differ in length")
    _check_unique(classifier_ids, DuplicateClassifierId, "classifier id")

    ref_trials, first = read_score_file(paths[0])
    if not ref_trials:
        raise EmptyInput(f"{paths[0]}: no score records")
    index = {t: k for k, t in enumerate(ref_trials)}
    values = np.empty((len(ref_trials), len(paths)), dtype=np.float64)
    values[:, 0] = first

    for j, path in enumerate(paths[1:], 1):
        trials, scores = read_score_file(path)
        cid = classifier_ids[j]
        rows = np.empty(len(trials), dtype=np.intp)
        for k, t in enumerate(trials):
            try:
                rows[k] = index[t]
            except KeyError:
                raise MissingTrial(
                    f"trial {t!r} of classifier {cid!r} ({path}) is missing "
                    f"from classifier {classifier_ids[0]!r}"
                ) from None
        if len(trials) != len(ref_trials):
            have = set(trials)
            absent = next(t for t in ref_trials if t not in have)
            raise MissingTrial(
                f"trial {absent!r} of classifier {classifier_ids[0]!r} is missing "
                f"from classifier {cid!r} ({path})"
            )
        values[rows, j] = scores
    return ScoreMatrix(tuple(classifier_ids), tuple(ref_trials), values)


def score_files_in(directory) -> list[Path]:
    """Non-hidden regular files of ``directory`` in lexicographic order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise EmptyInput(f"{directory}: not a directory")
    return sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))


def write_scores(S: ScoreMatrix, directory, suffix: str = ".txt") -> list[Path]:
    """Write each column of ``S`` as a canonical score file named after its id."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for j, cid in enumerate(S.classifier_ids):
        path = directory / f"{cid}{suffix}"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for t, v in zip(S.trial_ids, S.values[:, j]):
                # repr() round-trips float64 exactly
                fh.write(f"{t}\t{float(v)!r}\n")
        out.append(path)
    return out


def _load_pairs(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, key, value in _records(path):
        if key in out:
            raise DuplicateKey(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_labels(path) -> LabelMap:
    return LabelMap(_load_pairs(path))


def load_groups(path) -> GroupMap:
    return GroupMap(_load_pairs(path))


def write_groups(G: GroupMap, path, trial_ids: Iterable[str] | None = None) -> None:
    keys = list(trial_ids) if trial_ids is not None else list(G.groups)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in keys:
            fh.write(f"{t}\t{G.groups[t]}\n")


def load_metadata(path, known_ids: Iterable[str] | None = None) -> ClassifierMetadata:
    """Read a comma-separated metadata table whose first column is the classifier id."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ParseError(path, 1, "empty metadata table")
    header = [h.strip() for h in rows[0]]
    if len(header) < 1 or not header[0]:
        raise ParseError(path, 1, "metadata header must start with the id column")
    columns = tuple(header[1:])
    known = set(known_ids) if known_ids is not None else None
    attrs: dict[str, dict[str, str]] = {}
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) > len(header):
            raise ParseError(path, lineno, f"expected at most {len(header)} fields, got {len(row)}")
        cid = row[0].strip()
        if cid in attrs:
            raise DuplicateKey(f"{path}:{lineno}: duplicate classifier id {cid!r}")
        if known is not None and cid not in known:
            log.warning("metadata for unknown classifier %r ignored", cid)
            continue
        attrs[cid] = {k: v.strip() for k, v in zip(columns, row[1:])}
    return ClassifierMetadata(attrs, columns)


# -- grouping ----------------------------------------------------------------


def group_reduce(S: ScoreMatrix, G: GroupMap) -> ScoreMatrix:
    """Replace the trials of each group by their per-classifier mean score.

    Rows of the result are the group ids in lexicographic order.
    """
    try:
        labels = [G.groups[t] for t in S.trial_ids]
    except KeyError as e:
        raise UnmappedTrial(f"trial {e.args[0]!r} has no group") from None
    group_ids, inverse = np.unique(np.asarray(labels, dtype=object), return_inverse=True)
    group_ids = [str(g) for g in group_ids]
    counts = np.bincount(inverse, minlength=len(group_ids)).astype(np.float64)
    sums = np.column_stack(
        [np.bincount(inverse, weights=S.values[:, j], minlength=len(group_ids))
         for j in range(S.n_classifiers)]
    )
    return ScoreMatrix(S.classifier_ids, tuple(group_ids), sums / counts[:, None])
