"""Command-line surface: per-metric commands, batch eval, synth, and tables.

Exit codes: 0 success, 1 usage error, 2 unreadable/malformed input,
3 metric precondition failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace

import numpy as np

from ._version import VERSION
from .adfd import adfd
from .errors import (EXIT_OK, EXIT_USAGE, FtevalError, exit_code_for)
from .frechet import DEFAULT_FID_EPS, fid, frechet_distance, read_stats
from .image_metrics import psnr, ssim
from .ingest import read_features, read_frames, read_landmarks, write_features, write_landmarks
from .lmd import lmd
from .model import AdfdWeights, LandmarkScheme
from .report import (EvaluationManifest, MetricReport, canonical_json, evaluate,
                     fmt6, load_manifest, render_report, render_table, round6)
from .schemes import resolve_scheme
from .sync import DEFAULT_MAX_OFFSET, EmbeddingStream, sync_score
from .synth import SynthSpec, synth_features, synth_landmarks


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the documented usage-error code is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_indices(spec: str) -> tuple[int, ...]:
    """Parse '48-67' / '1,3,5-9' style index lists."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty index list {spec!r}")
    return tuple(out)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_flat(doc: dict, format: str) -> str:
    if format == "json":
        return canonical_json(doc)
    items = []
    for key in sorted(doc):
        value = doc[key]
        if isinstance(value, (list, tuple)):
            text = ";".join(fmt6(v) if v is not None else "IDENTICAL" for v in value)
        elif value is None:
            text = "IDENTICAL"
        elif isinstance(value, str):
            text = value
        else:
            text = fmt6(value)
        items.append((key, text))
    if format == "csv":
        return "\n".join(f"{k},{v}" for k, v in items) + "\n"
    if format == "markdown":
        lines = ["| key | value |", "| --- | --- |"]
        lines += [f"| {k} | {v} |" for k, v in items]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")


def _round_seq(values) -> list:
    return [round6(v) for v in values]


def _cmd_adfd(args) -> int:
    gen = read_landmarks(args.gen)
    gt = read_landmarks(args.gt)
    res = adfd(gen, gt, AdfdWeights(args.w1, args.w2), args.mismatch)
    doc = {"adfd": round6(res.score), "spatial": round6(res.spatial),
           "motion": round6(res.motion),
           "per_frame_spatial": _round_seq(res.per_frame_spatial),
           "per_transition_motion": _round_seq(res.per_transition_motion)}
    _emit(_render_flat(doc, args.format), args.out)
    return EXIT_OK


def _scheme_from_args(args, n: int) -> LandmarkScheme:
    if args.mouth_indices:
        return LandmarkScheme(name="generic", total=n,
                              mouth_indices=_parse_indices(args.mouth_indices))
    return resolve_scheme(args.scheme)


def _cmd_lmd(args) -> int:
    gen = read_landmarks(args.gen)
    gt = read_landmarks(args.gt)
    scheme = _scheme_from_args(args, gen.n)
    res = lmd(gen, gt, scheme, args.mismatch)
    doc = {"f_lmd": round6(res.f_lmd), "m_lmd": round6(res.m_lmd),
           "scheme": scheme.name,
           "per_frame_f": _round_seq(f for f, _ in res.per_frame),
           "per_frame_m": _round_seq(m for _, m in res.per_frame)}
    _emit(_render_flat(doc, args.format), args.out)
    return EXIT_OK


def _cmd_psnr(args) -> int:
    gen = read_frames(args.gen)
    gt = read_frames(args.gt)
    res = psnr(gen, gt, args.mismatch)
    doc = {"psnr_db": round6(res.mean_db) if res.mean_db is not None else None,
           "identical_frames": res.identical,
           "per_frame": [round6(v) if v is not None else None for v in res.per_frame]}
    _emit(_render_flat(doc, args.format), args.out)
    return EXIT_OK


def _cmd_ssim(args) -> int:
    gen = read_frames(args.gen)
    gt = read_frames(args.gt)
    res = ssim(gen, gt, args.mismatch)
    doc = {"ssim": round6(res.mean), "per_frame": _round_seq(res.per_frame)}
    _emit(_render_flat(doc, args.format), args.out)
    return EXIT_OK


def _cmd_fid(args) -> int:
    if bool(args.gen_stats) != bool(args.gt_stats):
        raise ValueError("--gen-stats and --gt-stats must be given together")
    if args.gen_stats:
        if args.gen or args.gt:
            raise ValueError("give either feature files or stats files, not both")
        value = frechet_distance(read_stats(args.gen_stats), read_stats(args.gt_stats))
        doc = {"frechet_distance": round6(value)}
    else:
        if not (args.gen and args.gt):
            raise ValueError("fid needs --gen/--gt feature files or "
                             "--gen-stats/--gt-stats")
        value = fid(read_features(args.gen), read_features(args.gt), args.fid_eps)
        doc = {"fid": round6(value), "eps": round6(args.fid_eps)}
    _emit(_render_flat(doc, args.format), args.out)
    return EXIT_OK


def _cmd_sync(args) -> int:
    audio = EmbeddingStream.from_features(read_features(args.audio), args.hop)
    visual = EmbeddingStream.from_features(read_features(args.visual), args.hop)
    res = sync_score(audio, visual, args.max_offset)
    doc = {"best_offset": res.best_offset, "lse_d": round6(res.lse_d),
           "lse_c": round6(res.lse_c), "offsets": list(res.offsets),
           "distance_curve": _round_seq(res.distance_curve)}
    _emit(_render_flat(doc, args.format), args.out)
    return EXIT_OK


def _cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    opts = manifest.options
    overrides = {}
    for name in ("w1", "w2", "mismatch", "max_offset", "fid_eps", "hop", "scheme"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if overrides:
        opts = replace(opts, **overrides)
    if args.label is not None:
        manifest = EvaluationManifest(manifest.entries, opts, args.label)
    else:
        manifest = EvaluationManifest(manifest.entries, opts, manifest.label)
    report = evaluate(manifest, jobs=args.jobs)
    _emit(render_report(report, args.format), args.out)
    return EXIT_OK


def _cmd_table(args) -> int:
    reports = []
    for path in args.reports:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise FtevalError(f"{path}: cannot load report: {e}") from e
        reports.append(MetricReport.from_json_obj(doc))
    _emit(render_table(reports, args.format), args.out)
    return EXIT_OK


def _cmd_synth_landmarks(args) -> int:
    spec = SynthSpec(seed=args.seed, T=args.frames, n=args.points,
                     width=args.width, height=args.height,
                     head_drift=(args.drift_amp, args.drift_period),
                     mouth_open=tuple(float(v) for v in args.mouth_env.split(",")),
                     jitter_sigma=args.jitter)
    write_landmarks(synth_landmarks(spec), args.out, format=args.landmark_format)
    return EXIT_OK


def _cmd_synth_features(args) -> int:
    mean = 0.0 if args.mean is None else np.array([float(v) for v in args.mean.split(",")])
    fs = synth_features(args.seed, args.rows, args.dim, mean=mean, scale=args.scale)
    write_features(fs, args.out, format=args.feature_format)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="fteval",
                     description="Talking-face video evaluation toolkit")
    parser.add_argument("--version", action="version", version=f"fteval {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt_parent(default="json"):
        # fresh instance per subcommand: parent parsers share action objects,
        # so a per-command default would otherwise leak to every command
        parent = _Parser(add_help=False)
        parent.add_argument("--format", choices=("json", "csv", "markdown"),
                            default=default)
        parent.add_argument("--out", metavar="PATH",
                            help="write output here instead of stdout")
        return parent

    def pair_parent():
        parent = _Parser(add_help=False)
        parent.add_argument("--mismatch", choices=("strict", "truncate"),
                            default="strict")
        return parent

    p = sub.add_parser("adfd", parents=[fmt_parent(), pair_parent()],
                       help="audio-driven facial dynamics score")
    p.add_argument("--gen", required=True, help="generated landmark file")
    p.add_argument("--gt", required=True, help="ground-truth landmark file")
    p.add_argument("--w1", type=float, default=1.0)
    p.add_argument("--w2", type=float, default=1.0)
    p.set_defaults(func=_cmd_adfd)

    p = sub.add_parser("lmd", parents=[fmt_parent(), pair_parent()], help="mouth/full landmark distance")
    p.add_argument("--gen", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--scheme", default="ibug68")
    p.add_argument("--mouth-indices", metavar="SPEC",
                   help="explicit mouth indices, e.g. 48-67 or 1,2,5-9")
    p.set_defaults(func=_cmd_lmd)

    p = sub.add_parser("psnr", parents=[fmt_parent(), pair_parent()], help="peak signal-to-noise ratio")
    p.add_argument("--gen", required=True, help="generated PNG frame directory")
    p.add_argument("--gt", required=True, help="ground-truth PNG frame directory")
    p.set_defaults(func=_cmd_psnr)

    p = sub.add_parser("ssim", parents=[fmt_parent(), pair_parent()], help="structural similarity")
    p.add_argument("--gen", required=True)
    p.add_argument("--gt", required=True)
    p.set_defaults(func=_cmd_ssim)

    p = sub.add_parser("fid", parents=[fmt_parent()], help="Frechet distance over features")
    p.add_argument("--gen", help="generated feature file (ftev/csv)")
    p.add_argument("--gt", help="ground-truth feature file")
    p.add_argument("--gen-stats", help="JSON Gaussian stats instead of features")
    p.add_argument("--gt-stats")
    p.add_argument("--fid-eps", type=float, default=DEFAULT_FID_EPS)
    p.set_defaults(func=_cmd_fid)

    p = sub.add_parser("sync", parents=[fmt_parent()], help="audio-visual sync offset/confidence")
    p.add_argument("--audio", required=True, help="audio embedding file (ftev/csv)")
    p.add_argument("--visual", required=True, help="visual embedding file")
    p.add_argument("--max-offset", type=int, default=DEFAULT_MAX_OFFSET)
    p.add_argument("--hop", type=int, default=1, help="video frames per embedding vector")
    p.set_defaults(func=_cmd_sync)

    p = sub.add_parser("eval", parents=[fmt_parent()], help="evaluate a manifest of video pairs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--label", help="method label for the report")
    p.add_argument("--scheme")
    p.add_argument("--w1", type=float)
    p.add_argument("--w2", type=float)
    p.add_argument("--mismatch", choices=("strict", "truncate"))
    p.add_argument("--max-offset", type=int, dest="max_offset")
    p.add_argument("--fid-eps", type=float, dest="fid_eps")
    p.add_argument("--hop", type=int)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("table", parents=[fmt_parent(default="markdown")],
                       help="method-comparison table")
    p.add_argument("reports", nargs="+", metavar="REPORT", help="report JSON files")
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("synth", help="generate deterministic synthetic fixtures")
    synth_sub = p.add_subparsers(dest="synth_kind", required=True)

    q = synth_sub.add_parser("landmarks", help="write a synthetic landmark file")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--frames", type=int, default=25)
    q.add_argument("--points", type=int, default=68)
    q.add_argument("--width", type=int, default=256)
    q.add_argument("--height", type=int, default=256)
    q.add_argument("--drift-amp", type=float, default=0.0)
    q.add_argument("--drift-period", type=float, default=25.0)
    q.add_argument("--mouth-env", default="0.0,1.0,0.0",
                   help="comma-separated envelope samples in [0,1]")
    q.add_argument("--jitter", type=float, default=0.0)
    q.add_argument("--landmark-format", choices=("jsonl", "csv"), default="jsonl")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_synth_landmarks)

    q = synth_sub.add_parser("features", help="write a synthetic feature file")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--rows", type=int, default=100)
    q.add_argument("--dim", type=int, default=8)
    q.add_argument("--mean", help="comma-separated mean vector (default zeros)")
    q.add_argument("--scale", type=float, default=1.0)
    q.add_argument("--feature-format", choices=("ftev", "csv"), default="ftev")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_synth_features)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except FtevalError as e:
        print(f"fteval: error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError, PermissionError) as e:
        print(f"fteval: error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except ValueError as e:
        # bad flag values (unparsable index lists, envelopes, vectors)
        print(f"fteval: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
