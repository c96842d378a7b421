"""Command line front end.

Exit codes: 0 success, 2 usage, 3 data/validation, 4 I/O.  Failures print
one JSON object on a single stderr line, e.g.
``{"error": "DegenerateVector", "message": "...", "file": "a.rsaf"}``.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import io as rsaio
from .clustering import Linkage, cluster, cut
from .errors import DataError, IoFailure, RSAError
from .rdm import DegeneratePolicy, compute_rdm
from .selection import rank_by_similarity, ranking_correlation, topk_agreement
from .similarity import similarity_matrix
from .synthetic import generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class CommandFailed(Exception):
    """Wraps a package error with the file that triggered it."""

    def __init__(self, error: Exception, path=None):
        super().__init__(str(error))
        self.error = error
        self.path = path


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jobs_default() -> int:
    raw = os.environ.get("RSA_JOBS", "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise UsageError(f"RSA_JOBS must be a positive integer, got {raw!r}") from None
    if jobs < 1:
        raise UsageError(f"RSA_JOBS must be a positive integer, got {raw!r}")
    return jobs


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _guard(fn, path):
    try:
        return fn()
    except RSAError as exc:
        raise CommandFailed(exc, path) from exc


def _write_text(path, text: str) -> None:
    _guard(lambda: rsaio._write(path, text), path)


def _mkdir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CommandFailed(IoFailure(f"cannot create {path}: {exc.strerror or exc}"), path) from exc
    return path


def _csv_text(rows) -> str:
    out = _stdio.StringIO()
    csv.writer(out, lineterminator="\n").writerows(rows)
    return out.getvalue()


# -- commands ---------------------------------------------------------------


def cmd_rdm(args) -> None:
    policy = DegeneratePolicy(args.degenerate)
    stems = [Path(p).name.rsplit(".", 1)[0] for p in args.features]
    if len(set(stems)) != len(stems):
        raise UsageError("feature files must have distinct base names")

    def work(path):
        try:
            return compute_rdm(rsaio.read_features(path), policy), None
        except RSAError as exc:
            return None, exc

    jobs = args.jobs if args.jobs is not None else _jobs_default()
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(work, args.features))
    for path, (_, exc) in zip(args.features, results):
        if exc is not None:
            raise CommandFailed(exc, path)

    out_dir = _mkdir(args.out_dir)
    for stem, (rdm, _) in zip(stems, results):
        target = out_dir / f"{stem}.rdm.csv"
        _guard(lambda: rsaio.write_matrix(rdm, target), target)


def cmd_simmat(args) -> None:
    rdms = [_guard(lambda p=p: rsaio.read_matrix(p), p) for p in args.rdm]
    for path, r in zip(args.rdm, rdms):
        if not hasattr(r, "conditions"):
            raise CommandFailed(DataError("file holds a similarity matrix, not an RDM"), path)
    sim = _guard(lambda: similarity_matrix(rdms), None)
    _guard(lambda: rsaio.write_matrix(sim, args.out), args.out)


def cmd_cluster(args) -> None:
    sim = _guard(lambda: rsaio.read_task_matrix(args.simmat), args.simmat)
    dend = _guard(lambda: cluster(sim, Linkage(args.linkage)), args.simmat)
    fmt = args.format or ("json" if str(args.out).lower().endswith(".json") else "newick")
    _guard(lambda: rsaio.write_dendrogram(dend, args.out, fmt), args.out)
    if args.cut is not None:
        labels = _guard(lambda: cut(dend, args.cut), args.simmat)
        target = args.clusters_out or str(Path(args.out).with_suffix("")) + ".clusters.csv"
        rows = [("task", "cluster")] + [(t, c) for t, c in labels.items()]
        _write_text(target, _csv_text(rows))


def cmd_rank(args) -> None:
    if (args.affinity is None) != (args.topk is None):
        raise UsageError("--affinity and --topk must be given together")
    probe = _guard(lambda: rsaio.read_matrix(args.probe_rdm), args.probe_rdm)
    candidates = []
    for path in args.candidates:
        rdm = _guard(lambda: rsaio.read_matrix(path), path)
        if not hasattr(rdm, "conditions"):
            raise CommandFailed(DataError("file holds a similarity matrix, not an RDM"), path)
        candidates.append((rdm.task, rdm))
    # A candidate may share the probe's task (e.g. the probe file itself); the
    # probe is then labelled by its path so it stays distinct from the list.
    probe_id = probe.task
    if any(name == probe.task for name, _ in candidates):
        probe_id = str(args.probe_rdm)
        if any(name == probe_id for name, _ in candidates):
            raise CommandFailed(DataError(f"candidate task name {probe_id!r} clashes with the probe"), args.probe_rdm)
    ranking = _guard(lambda: rank_by_similarity(probe, candidates, probe_id), None)

    rows = [("task", "score", "rank")]
    rows += [(t, rsaio.fmt_float(s), i) for i, (t, s) in enumerate(ranking.ordered, start=1)]
    if args.affinity is not None:
        table = _guard(lambda: rsaio.read_affinity(args.affinity), args.affinity)
        agree = _guard(lambda: topk_agreement(ranking, table, args.topk), args.affinity)
        reference = table.as_ranking()
        rows.append(("topk_agreement", args.topk, "true" if agree else "false"))
        for method in ("pearson", "spearman"):
            value = _guard(lambda: ranking_correlation(ranking, reference, method), args.affinity)
            rows.append(("ranking_correlation", method, rsaio.fmt_float(value)))
    _write_text(args.out, _csv_text(rows))


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def cmd_synth(args) -> None:
    spec = _guard(lambda: rsaio.read_spec(args.spec), args.spec)
    names = [_UNSAFE.sub("_", t) for t in spec.tasks]
    if len(set(names)) != len(names):
        raise CommandFailed(DataError("task names collide after filename sanitising"), args.spec)
    features = generate(spec)
    out_dir = _mkdir(args.out_dir)
    for name, fm in zip(names, features):
        target = out_dir / f"{name}.rsaf"
        _guard(lambda: rsaio.write_features(fm, target), target)


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taskrsa", description="Task similarity from representations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rdm", help="compute one RDM CSV per feature file")
    p.add_argument("--features", nargs="+", required=True, metavar="PATH")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--degenerate", choices=["error", "max"], default="error")
    p.add_argument("--jobs", type=_positive_int, default=None,
                   help="worker threads (default: $RSA_JOBS or 1)")
    p.set_defaults(func=cmd_rdm)

    p = sub.add_parser("simmat", help="task similarity matrix from RDM CSVs")
    p.add_argument("--rdm", nargs="+", required=True, metavar="PATH")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simmat)

    p = sub.add_parser("cluster", help="agglomerative clustering of a similarity matrix")
    p.add_argument("--simmat", required=True)
    p.add_argument("--linkage", choices=[k.value for k in Linkage], default="average")
    p.add_argument("--out", required=True, help="dendrogram path; .json selects JSON, else Newick")
    p.add_argument("--format", choices=["newick", "json"], default=None)
    p.add_argument("--cut", type=_positive_int, default=None, metavar="K")
    p.add_argument("--clusters-out", default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("rank", help="rank candidate models by similarity to a probe")
    p.add_argument("--probe-rdm", required=True)
    p.add_argument("--candidates", nargs="+", required=True, metavar="PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--affinity", default=None)
    p.add_argument("--topk", type=_positive_int, default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("synth", help="write feature files for a synthetic study")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def _report(kind: str, message: str, path=None) -> None:
    record = {"error": kind, "message": message}
    if path is not None:
        record["file"] = str(path)
    print(json.dumps(record), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        _report("UsageError", str(exc))
        return EXIT_USAGE
    except CommandFailed as exc:
        err = exc.error
        _report(type(err).__name__, str(err), exc.path)
        return EXIT_IO if isinstance(err, IoFailure) else EXIT_DATA
    return EXIT_OK


def run() -> None:
    sys.exit(main())
