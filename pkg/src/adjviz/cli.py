"""Command-line interface: ``adjviz <subcommand> ...``.

Each stage reads and writes plain files so stages can be run separately::

    adjviz distances scores/ dist.tsv [--groups groups.tsv]
    adjviz embed dist.tsv emb.tsv [--method classical|nonmetric] [--seed N]
    adjviz plot emb.tsv out.svg [--metadata meta.csv] [--color-by ATTR]
    adjviz metrics scores/ labels.tsv metrics.tsv
    adjviz pav-groups sysA.txt labels.tsv groups.tsv
    adjviz report scores/ outdir/ [--labels ...] [--metadata ...]

Errors exit with status 1 (2 for usage errors) after printing one line
starting with ``error:`` to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .adjacency import distance_matrix, read_distance_matrix, write_distance_matrix
from .detmetrics import cllr, det_curve, eer, min_cllr, pav_rank_groups
from .embedding import classical_mds, nonmetric_mds, procrustes_normalize, read_embedding, write_embedding
from .errors import AdjvizError
from .plotting import PlotSpec, render_svg
from .score_io import (
    DEFAULT_POSITIVE_LABEL,
    load_groups,
    load_labels,
    load_metadata,
    load_scores,
    group_reduce,
    read_score_file,
    score_files_in,
    write_groups,
)

log = logging.getLogger("adjviz")

THREADS_ENV = "ADJVIZ_THREADS"
_ROLE_COLUMNS = {"annotation", "highlight"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"error: {message}\n")
        sys.exit(2)


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise AdjvizError(f"{THREADS_ENV}={env!r} is not an integer") from None
        if n < 1:
            raise AdjvizError(f"{THREADS_ENV} must be positive, got {n}")
        return n
    return os.cpu_count() or 1


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {n}")
    return n


def _seed(text):
    n = int(text)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {n}")
    return n


# -- stages ------------------------------------------------------------------


def run_distances(score_dir, out, groups=None, threads=None):
    S = load_scores(score_files_in(score_dir))
    if groups is not None:
        S = group_reduce(S, load_groups(groups))
    D = distance_matrix(S, threads=_threads(threads))
    write_distance_matrix(D, out)
    return D


def run_embed(dist_file, out, method="nonmetric", seed=None, dim=2, max_iter=300):
    D = read_distance_matrix(dist_file)
    if method == "classical":
        E = classical_mds(D, dim)
    else:
        E = nonmetric_mds(D, dim, max_iter=max_iter, seed=seed)
    E = procrustes_normalize(E)
    write_embedding(E, out)
    return E


def default_color_attribute(metadata) -> str | None:
    for col in metadata.columns:
        if col not in _ROLE_COLUMNS:
            return col
    return None


def run_plot(embedding_file, out, metadata_file=None, color_by=None, highlight="highlight",
             annotate=None, width=480, height=400, title=None):
    E = read_embedding(embedding_file)
    meta = None
    if metadata_file is not None:
        meta = load_metadata(metadata_file, known_ids=E.classifier_ids)
        if color_by is None:
            color_by = default_color_attribute(meta)
    spec = PlotSpec(color_by=color_by, highlight=highlight, annotate=annotate,
                    width=width, height=height, title=title)
    return render_svg(E, meta, spec, out)


def run_metrics(score_dir, labels_file, out, positive=DEFAULT_POSITIVE_LABEL):
    S = load_scores(score_files_in(score_dir))
    labels = load_labels(labels_file)
    mask = labels.binarize(S.trial_ids, positive)
    rows = []
    for j, cid in enumerate(S.classifier_ids):
        s = S.values[:, j]
        try:
            rows.append((cid, eer(det_curve(s, mask)), cllr(s, mask), min_cllr(s, mask)))
        except AdjvizError as e:
            raise AdjvizError(f"classifier {cid!r}: {e}") from e
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("classifier_id\teer\tcllr\tmin_cllr\n")
        for cid, *vals in rows:
            fh.write("\t".join([cid, *(format(v, ".9g") for v in vals)]) + "\n")
    return rows


def run_pav_groups(score_file, labels_file, out, positive=DEFAULT_POSITIVE_LABEL):
    trials, scores = read_score_file(score_file)
    G = pav_rank_groups(scores, load_labels(labels_file), trials, positive)
    write_groups(G, out, trials)
    return G


def run_report(score_dir, out_dir, labels=None, metadata=None, groups=None, method="nonmetric",
               seed=None, threads=None, positive=DEFAULT_POSITIVE_LABEL, **plot_kw):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_distances(score_dir, out_dir / "distances.tsv", groups, threads)
    run_embed(out_dir / "distances.tsv", out_dir / "embedding.tsv", method, seed)
    if labels is not None:
        run_metrics(score_dir, labels, out_dir / "metrics.tsv", positive)
    run_plot(out_dir / "embedding.tsv", out_dir / "adjacency.svg", metadata, **plot_kw)
    return out_dir


# -- argument parsing ----------------------------------------------------------


def _add_plot_flags(p):
    p.add_argument("--color-by", metavar="ATTR",
                   help="metadata column for marker colour (default: first attribute column)")
    p.add_argument("--highlight", metavar="ATTR", default="highlight",
                   help="metadata column flagging diamond markers (default: %(default)s)")
    p.add_argument("--annotate", metavar="ATTR", help="numeric metadata column written next to markers")
    p.add_argument("--width", type=_positive_int, default=480, help="canvas width in pixels")
    p.add_argument("--height", type=_positive_int, default=400, help="canvas height in pixels")
    p.add_argument("--title")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adjviz", description="Classifier adjacency from detection scores.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("distances", help="rank-distance matrix from a directory of score files")
    p.add_argument("score_dir")
    p.add_argument("out")
    p.add_argument("--groups", help="trial-to-group file; score each group by its mean")
    p.add_argument("--threads", type=_positive_int, help=f"worker threads (default: ${THREADS_ENV} or CPU count)")

    p = sub.add_parser("embed", help="2-D embedding of a distance matrix")
    p.add_argument("distances")
    p.add_argument("out")
    p.add_argument("--method", choices=("classical", "nonmetric"), default="nonmetric")
    p.add_argument("--seed", type=_seed, help="random start for nonmetric (default: classical start)")
    p.add_argument("--dim", type=_positive_int, default=2)
    p.add_argument("--max-iter", type=_positive_int, default=300)

    p = sub.add_parser("plot", help="SVG scatter plot of an embedding")
    p.add_argument("embedding")
    p.add_argument("out")
    p.add_argument("--metadata", help="comma-separated table: id,<attr>...,annotation,highlight")
    _add_plot_flags(p)

    p = sub.add_parser("metrics", help="EER, Cllr and min-Cllr per classifier")
    p.add_argument("score_dir")
    p.add_argument("labels")
    p.add_argument("out")
    p.add_argument("--positive-label", default=DEFAULT_POSITIVE_LABEL)

    p = sub.add_parser("pav-groups", help="group trials by PAV block of one classifier")
    p.add_argument("score_file")
    p.add_argument("labels")
    p.add_argument("out")
    p.add_argument("--positive-label", default=DEFAULT_POSITIVE_LABEL)

    p = sub.add_parser("report", help="distances, embedding, metrics and plot in one directory")
    p.add_argument("score_dir")
    p.add_argument("out_dir")
    p.add_argument("--labels")
    p.add_argument("--metadata")
    p.add_argument("--groups")
    p.add_argument("--method", choices=("classical", "nonmetric"), default="nonmetric")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--positive-label", default=DEFAULT_POSITIVE_LABEL)
    _add_plot_flags(p)
    return parser


def _plot_kw(a):
    return dict(color_by=a.color_by, highlight=a.highlight, annotate=a.annotate,
                width=a.width, height=a.height, title=a.title)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s")
    a = build_parser().parse_args(argv)
    try:
        if a.command == "distances":
            run_distances(a.score_dir, a.out, a.groups, a.threads)
        elif a.command == "embed":
            run_embed(a.distances, a.out, a.method, a.seed, a.dim, a.max_iter)
        elif a.command == "plot":
            run_plot(a.embedding, a.out, a.metadata, **_plot_kw(a))
        elif a.command == "metrics":
            run_metrics(a.score_dir, a.labels, a.out, a.positive_label)
        elif a.command == "pav-groups":
            run_pav_groups(a.score_file, a.labels, a.out, a.positive_label)
        elif a.command == "report":
            run_report(a.score_dir, a.out_dir, a.labels, a.metadata, a.groups, a.method,
                       a.seed, a.threads, a.positive_label, **_plot_kw(a))
    except (AdjvizError, OSError, ValueError) as e:
        msg = " ".join(str(e).split()) or type(e).__name__
        sys.stderr.write(f"error: {type(e).__name__}: {msg}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
