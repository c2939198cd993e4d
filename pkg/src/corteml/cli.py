"""Command-line entry point: synth | extract | select | regress | classify | report.

Exit codes: 0 success, 1 computational error (degenerate data),
2 I/O or schema error. Output files are written atomically
(temp file + rename) and contain no timestamps, so identical
configurations reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import featsel, synth
from .cv import CvScheme
from .errors import CortemlError, DataError
from .evaluate import (
    run_pipeline,
    write_classification_report_csv,
    write_regression_report_csv,
)
from .models import TABLE_BEST, TABLE_GRIDS, check_assumptions
from .signal import SEGMENTS, bandpass_filter, load_recording, segment
from .spectral import (
    FEATURE_NAMES,
    FeatureTable,
    SubjectRecord,
    exclude_outliers,
    extract_features,
    read_feature_table,
    table_from_records,
    write_feature_table,
)
from .signal import SegmentedRecording


def _atomic_write(path: Path, writer) -> None:
    """writer(tmp_path) then rename, so failures leave no partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        writer(tmp)
        os.replace(tmp, path)
    except Exception:
        tmp.unlink(missing_ok=True)
        raise


def _read_manifest(data_dir: Path) -> tuple[list[dict], bool]:
    manifest = data_dir / "manifest.csv"
    if not manifest.is_file():
        raise DataError(f"manifest not found: {manifest}")
    with open(manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "subject" not in reader.fieldnames or "score" not in reader.fieldnames:
            raise DataError(f"{manifest}: needs at least 'subject' and 'score' columns")
        has_file = "file" in reader.fieldnames
        rows = []
        for row in reader:
            try:
                rows.append(
                    {
                        "subject": row["subject"],
                        "score": int(row["score"]),
                        "file": row.get("file"),
                    }
                )
            except (TypeError, ValueError):
                raise DataError(f"{manifest}: non-integer score for subject {row.get('subject')!r}")
    if not rows:
        raise DataError(f"{manifest}: no subjects listed")
    return rows, has_file


def cmd_synth(args) -> int:
    seconds = args.seconds
    if len(seconds) == 1:
        seconds = seconds * 3
    if len(seconds) != 3:
        raise DataError("--seconds takes one value or three")
    spec = synth.SynthSpec(
        n_subjects=args.subjects,
        fs=args.fs,
        segment_seconds=tuple(seconds),
        coupling=args.coupling,
        noise_sd=args.noise_sd,
        score_range=tuple(args.score_range),
        seed=args.seed,
    )
    manifest = synth.gen_dataset(spec, args.outdir)
    print(f"wrote {spec.n_subjects * 3} recordings and {manifest}")
    return 0


def cmd_extract(args) -> int:
    data_dir = Path(args.data)
    if not data_dir.is_dir():
        raise DataError(f"data directory not found: {data_dir}")
    rows, has_file = _read_manifest(data_dir)
    if has_file and args.boundaries is None:
        raise DataError("whole-recording manifests require --boundaries B1 B2")
    if not has_file and args.boundaries is not None:
        raise DataError("--boundaries given but the manifest lists pre-segmented files")

    records = []
    for row in rows:
        sid = row["subject"]
        if has_file:
            rec = load_recording(data_dir / row["file"], fs=args.fs)
            segmented = segment(bandpass_filter(rec), tuple(args.boundaries))
        else:
            parts = {}
            for label in SEGMENTS:
                path = data_dir / f"{sid}_{label}.csv"
                parts[label] = bandpass_filter(load_recording(path, fs=args.fs))
            segmented = SegmentedRecording(segments=parts)
        records.append(
            SubjectRecord(
                subject_id=sid,
                empathy_score=row["score"],
                features=extract_features(segmented),
            )
        )
    kept, removed = exclude_outliers(records, threshold=args.z_threshold)
    for rec in removed:
        print(
            f"excluded subject {rec.subject_id}: asymmetry |z| > {args.z_threshold}",
            file=sys.stderr,
        )
    if not kept:
        raise CortemlError("outlier exclusion removed every subject")
    table = table_from_records(kept)
    _atomic_write(Path(args.output), lambda p: write_feature_table(p, table))
    print(f"wrote feature table for {len(kept)} subjects to {args.output}")
    return 0


def _segments_arg(value: str) -> list[str]:
    if value == "all":
        return list(SEGMENTS)
    return [value]


def cmd_select(args) -> int:
    table = read_feature_table(args.table)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    names = list(FEATURE_NAMES)
    for seg in _segments_arg(args.segment):
        X, y = table.segment_matrix(seg)
        rankings = featsel.rank_ensemble(X, y, seed=args.seed)
        agg = featsel.aggregate_rankings(rankings, k=args.top)
        corr = featsel.correlate(X, y)
        _atomic_write(
            outdir / f"ranking_{seg}.csv",
            lambda p: featsel.write_ranking_csv(p, names, rankings, agg),
        )
        _atomic_write(
            outdir / f"correlations_{seg}.csv",
            lambda p: featsel.write_correlation_csv(p, names, corr),
        )
        chosen = ", ".join(names[j] for j in agg.selected)
        print(f"{seg}: selected {chosen}")
    return 0


def _selection_for(segment_name: str, selection: str | None) -> list[int] | None:
    if selection is None:
        return None
    path = Path(selection)
    if path.is_dir():
        path = path / f"ranking_{segment_name}.csv"
    return featsel.read_selection(path, list(FEATURE_NAMES))


def _cv_scheme(args) -> CvScheme:
    if args.cv == "loo":
        return CvScheme("loo")
    return CvScheme("kfold", args.folds, args.seed)


def cmd_regress(args) -> int:
    if args.features == "selected" and args.selection is None and not args.select_within_folds:
        raise DataError("--features selected requires --selection (or --select-within-folds)")
    table = read_feature_table(args.table)
    cv = _cv_scheme(args)
    rows = []
    coeff_rows = []
    assumption_rows = []
    for seg in _segments_arg(args.segment):
        feature_idx = None
        swf = None
        if args.select_within_folds:
            swf = args.top
        elif args.features == "selected":
            feature_idx = _selection_for(seg, args.selection)
        result = run_pipeline(
            table, seg, "continuous", "ols",
            cv=cv, seed=args.seed, feature_idx=feature_idx, select_within_folds=swf,
        )
        fit = result.extra["full_fit"]
        n_feat = len(fit.coef)
        rows.append(
            {
                "model": f"ols_{n_feat}",
                "segment": seg,
                "mse": result.report.mse,
                "mae": result.report.mae,
                "p": result.report.model_p,
            }
        )
        if feature_idx is not None:
            names = [FEATURE_NAMES[j] for j in feature_idx]
        elif swf is not None:
            names = [FEATURE_NAMES[j] for j in result.extra["selected"]]
        else:
            names = list(FEATURE_NAMES)
        for name, coef, t, p in zip(names, fit.coef, fit.t, fit.p):
            coeff_rows.append((seg, name, coef, t, p))
        X, _ = table.segment_matrix(seg)
        if feature_idx is not None:
            X = X[:, feature_idx]
        elif swf is not None:
            X = X[:, result.extra["selected"]]
        rep = check_assumptions(fit, X)
        assumption_rows.append(
            (
                seg,
                rep.jarque_bera,
                rep.jarque_bera_p,
                rep.breusch_pagan,
                rep.breusch_pagan_p,
                max(v for v in rep.vif) if len(rep.vif) else 1.0,
                len(rep.vif_overflow),
            )
        )

    def write_report(p):
        write_regression_report_csv(p, rows)

    _atomic_write(Path(args.output), write_report)
    if args.coeffs:
        def write_coeffs(p):
            with open(p, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(("segment", "feature", "coef", "t", "p"))
                for seg, name, coef, t, pv in coeff_rows:
                    writer.writerow([seg, name, repr(float(coef)), repr(float(t)), repr(float(pv))])

        _atomic_write(Path(args.coeffs), write_coeffs)
    if args.assumptions:
        def write_assumptions(p):
            with open(p, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(
                    ("segment", "jarque_bera", "jb_p", "breusch_pagan", "bp_p", "max_vif", "vif_overflow")
                )
                for seg, jb, jbp, bp, bpp, mv, ov in assumption_rows:
                    writer.writerow(
                        [seg, repr(float(jb)), repr(float(jbp)), repr(float(bp)),
                         repr(float(bpp)), repr(float(mv)), ov]
                    )

        _atomic_write(Path(args.assumptions), write_assumptions)
    print(f"wrote regression report to {args.output}")
    return 0


def cmd_classify(args) -> int:
    if args.features == "selected" and args.selection is None and not args.select_within_folds:
        raise DataError("--features selected requires --selection (or --select-within-folds)")
    table = read_feature_table(args.table)
    cv = _cv_scheme(args)
    scheme = "binary_median" if args.scheme == "binary" else "three_equal_interval"
    families = ["lr", "svm", "dt"] if args.model == "all" else [args.model]
    rows = []
    for seg in _segments_arg(args.segment):
        feature_idx = None
        swf = None
        if args.select_within_folds:
            swf = args.top
        elif args.features == "selected":
            feature_idx = _selection_for(seg, args.selection)
        for family in families:
            grid = None if args.no_grid else TABLE_GRIDS[family]
            params = TABLE_BEST[family] if args.no_grid else None
            result = run_pipeline(
                table, seg, scheme, family,
                grid=grid, cv=cv, seed=args.seed,
                feature_idx=feature_idx, params=params,
                grid_global=args.grid_global, select_within_folds=swf,
            )
            rows.append(
                {
                    "segment": seg,
                    "model": family,
                    "accuracy": result.report.accuracy,
                    "precision": result.report.precision,
                    "recall": result.report.recall,
                    "f1": result.report.f1,
                }
            )
            if result.report.skipped_folds:
                print(
                    f"{seg}/{family}: skipped {result.report.skipped_folds} single-class fold(s)",
                    file=sys.stderr,
                )
    _atomic_write(Path(args.output), lambda p: write_classification_report_csv(p, rows))
    print(f"wrote classification report to {args.output}")
    return 0


def _render_table(rows: list[list[str]], precision: int) -> str:
    def fmt(cell: str) -> str:
        try:
            return f"{float(cell):.{precision}f}"
        except ValueError:
            return cell

    formatted = [rows[0]] + [[fmt(c) for c in row] for row in rows[1:]]
    widths = [max(len(row[i]) for row in formatted) for i in range(len(rows[0]))]
    lines = []
    for k, row in enumerate(formatted):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise DataError(f"report file not found: {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path}: empty report")
    text = _render_table(rows, args.precision)
    if args.output:
        _atomic_write(Path(args.output), lambda p: Path(p).write_text(text))
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corteml",
        description="EEG asymmetry features and empathy-score models with a synthetic oracle",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--outdir", required=True)
    p.add_argument("--subjects", type=int, default=12)
    p.add_argument("--fs", type=float, default=128.0)
    p.add_argument("--seconds", type=float, nargs="+", default=[20.0])
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--noise-sd", type=float, default=0.2)
    p.add_argument("--score-range", type=int, nargs=2, default=[49, 86])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="raw recordings -> feature table")
    p.add_argument("--data", required=True, help="directory with manifest.csv")
    p.add_argument("--output", required=True)
    p.add_argument("--fs", type=float, default=None, help="sampling rate when files lack '# fs='")
    p.add_argument("--boundaries", type=int, nargs=2, default=None, metavar=("B1", "B2"))
    p.add_argument("--z-threshold", type=float, default=3.0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("select", help="rank features and pick the top subset")
    p.add_argument("--table", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--segment", choices=list(SEGMENTS) + ["all"], default="all")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("regress", help="cross-validated linear regression")
    p.add_argument("--table", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--segment", choices=list(SEGMENTS) + ["all"], default="all")
    p.add_argument("--features", choices=["all", "selected"], default="all")
    p.add_argument("--selection", default=None, help="ranking CSV or the select outdir")
    p.add_argument("--select-within-folds", action="store_true")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--coeffs", default=None, help="write per-segment coefficient table CSV")
    p.add_argument("--assumptions", default=None, help="write assumption-check CSV")
    p.add_argument("--cv", choices=["kfold", "loo"], default="kfold")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("classify", help="cross-validated classification")
    p.add_argument("--table", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--scheme", choices=["binary", "three"], required=True)
    p.add_argument("--segment", choices=list(SEGMENTS) + ["all"], default="all")
    p.add_argument("--model", choices=["lr", "svm", "dt", "all"], default="all")
    p.add_argument("--features", choices=["all", "selected"], default="all")
    p.add_argument("--selection", default=None, help="ranking CSV or the select outdir")
    p.add_argument("--select-within-folds", action="store_true")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--cv", choices=["loo", "kfold"], default="loo")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-global", action="store_true",
                   help="tune hyperparameters once on all data instead of per training fold")
    p.add_argument("--no-grid", action="store_true",
                   help="skip the search and use the stock best hyperparameters")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="render a report CSV as an aligned text table")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--precision", type=int, default=3)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CortemlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
