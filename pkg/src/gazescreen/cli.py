"""``gazescreen`` command line.

Exit codes: 0 success, 1 data or runtime failure, 2 usage error.  Every
command that takes ``--seed`` falls back to ``$GAZESCREEN_SEED`` and then 42.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .classifier import EXPERIMENT_CONFIG, MlpConfig, evaluate, load_model, save_model, write_curve_csv
from .errors import GazeScreenError
from .features import cohort_zone_means
from .fixation import (DEFAULT_DISPERSION, DEFAULT_MIN_DURATION_MS, DEFAULT_VELOCITY, IdtParams, IvtParams,
                       detect_fixations_idt, detect_fixations_ivt)
from .ingest import (atomic_write_text, read_aoi_json, read_features_csv, read_gaze_csv, read_manifest,
                     write_features_csv, write_gaze_csv)
from .noise import DEFAULT_SIGMA, NoiseSpec, add_webcam_noise
from .pipeline import DEFAULT_TEST_FRACTION, config_for_seed, manifest_features, run_experiment, staged_directory, train_split
from .synth import CohortSpec, default_aoi, generate_cohort, load_profiles
from .viz import DEFAULT_KERNEL_SIGMA_PX, render_heatmap, render_scanpath

SEED_ENV = "GAZESCREEN_SEED"
FALLBACK_SEED = 42
FIXATION_HEADER = "start_ms,duration_ms,cx,cy,sample_count"


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return FALLBACK_SEED
    try:
        return _uint64(raw)
    except argparse.ArgumentTypeError:
        raise SystemExit(_usage_error(f"{SEED_ENV} must be a non-negative integer, got {raw!r}"))


def _usage_error(msg: str) -> int:
    print(f"gazescreen: error: {msg}", file=sys.stderr)
    return 2


def _uint64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed out of range: {v}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v >= 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a finite non-negative number: {text}")
    return v


def _positive_float(text: str) -> float:
    v = _nonneg_float(text)
    if v == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _fraction(text: str) -> float:
    v = _nonneg_float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1: {text}")
    return v


def _hidden(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if not parts:
        raise argparse.ArgumentTypeError("hidden layer list is empty")
    return tuple(_positive_int(p) for p in parts)


# -- commands ------------------------------------------------------------------

def cmd_synth(args) -> int:
    td, asd = load_profiles(args.profiles) if args.profiles else (None, None)
    kw = {"n_per_group": args.n_per_group, "seed": _seed(args)}
    if td is not None:
        kw.update(td_profile=td, asd_profile=asd)
    if args.duration_ms is not None:
        kw["duration_ms"] = args.duration_ms
    spec = CohortSpec(**kw)
    out = Path(args.out)
    with staged_directory(out) as tmp:
        generate_cohort(spec, tmp)
    print(out / "manifest.json")
    return 0


def cmd_features(args) -> int:
    manifest = read_manifest(args.manifest)
    aoi = read_aoi_json(args.aoi)
    rows = manifest_features(manifest, aoi, args.sigma, _seed(args))
    write_features_csv(args.out, rows)
    print(f"{len(rows)} feature rows -> {args.out}")
    return 0


def cmd_noise(args) -> int:
    rec = read_gaze_csv(args.in_path)
    spec = NoiseSpec(args.sigma, _seed(args))
    write_gaze_csv(add_webcam_noise(rec, spec), args.out, sidecar=spec.metadata())
    return 0


def _fixations(args, rec):
    if args.algo == "idt":
        return detect_fixations_idt(rec, IdtParams(args.dispersion, args.min_dur))
    return detect_fixations_ivt(rec, IvtParams(args.velocity, args.min_dur))


def format_fixations(fixes) -> str:
    lines = [FIXATION_HEADER]
    lines += [f"{f.start_ms:.6f},{f.duration_ms:.6f},{f.centroid_x:.6f},{f.centroid_y:.6f},{f.sample_count}"
              for f in fixes]
    return "\n".join(lines) + "\n"


def cmd_fixations(args) -> int:
    text = format_fixations(_fixations(args, read_gaze_csv(args.in_path)))
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_render(args) -> int:
    rec = read_gaze_csv(args.in_path)
    if args.kind == "heatmap":
        render_heatmap(rec, rec.geometry, args.kernel_sigma_px, args.out)
        return 0
    aoi = read_aoi_json(args.aoi) if args.aoi else default_aoi()
    render_scanpath(_fixations(args, rec), aoi, rec.geometry, args.out)
    return 0


def cmd_train(args) -> int:
    feats = read_features_csv(args.features, require_labels=True)
    base = MlpConfig(hidden_sizes=args.hidden, learning_rate=args.lr, epochs=args.epochs)
    cfg = config_for_seed(_seed(args), base)
    model, curve, _, _ = train_split(feats, cfg, args.test_fraction, _seed(args))
    save_model(model, args.out_model)
    write_curve_csv(curve, args.curves)
    print(f"train_accuracy {curve[-1].train_accuracy:.4f}")
    print(f"eval_accuracy {curve[-1].eval_accuracy:.4f}")
    return 0


def cmd_eval(args) -> int:
    ev = evaluate(load_model(args.model), read_features_csv(args.features, require_labels=True))
    print(f"accuracy {ev.accuracy:.4f}")
    print(f"loss {ev.loss:.6f}")
    print(f"tp {ev.tp} fp {ev.fp} tn {ev.tn} fn {ev.fn}")
    return 0


def cmd_experiment(args) -> int:
    s = run_experiment(args.out, _seed(args), args.sigma, args.n_per_group)
    for cond in ("clean", "noised"):
        c = s[cond]
        print(f"{cond}: train_accuracy {c['final_train_accuracy']:.4f} "
              f"eval_accuracy {c['final_eval_accuracy']:.4f} "
              f"epochs_to_95pct {c['epochs_to_95pct_of_final']}")
    print(f"eyes_ratio {s['eyes_ratio_asd_over_td']:.4f}")
    print(Path(args.out) / "summary.json")
    return 0


# -- parser ----------------------------------------------------------------------

def _add_fixation_flags(p):
    p.add_argument("--algo", choices=("idt", "ivt"), default="idt")
    p.add_argument("--dispersion", type=_positive_float, default=DEFAULT_DISPERSION)
    p.add_argument("--min-dur", type=_nonneg_float, default=DEFAULT_MIN_DURATION_MS)
    p.add_argument("--velocity", type=_positive_float, default=DEFAULT_VELOCITY)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gazescreen", description="Gaze dwell-time screening toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="generate a synthetic labeled cohort")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-group", type=_positive_int, default=25)
    p.add_argument("--seed", type=_uint64)
    p.add_argument("--profiles")
    p.add_argument("--duration-ms", type=_positive_float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="zone dwell fractions for every manifest entry")
    p.add_argument("--manifest", required=True)
    p.add_argument("--aoi", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma", type=_nonneg_float, default=0.0)
    p.add_argument("--seed", type=_uint64)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("noise", help="add simulated webcam error to a gaze CSV")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma", type=_nonneg_float, default=DEFAULT_SIGMA)
    p.add_argument("--seed", type=_uint64)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("fixations", help="detect fixations in a gaze CSV")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out")
    _add_fixation_flags(p)
    p.set_defaults(func=cmd_fixations)

    p = sub.add_parser("render", help="render a heatmap (PGM) or scanpath (SVG)")
    p.add_argument("kind", choices=("heatmap", "scanpath"))
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--aoi")
    p.add_argument("--out", required=True)
    p.add_argument("--kernel-sigma-px", type=_positive_float, default=DEFAULT_KERNEL_SIGMA_PX)
    _add_fixation_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("train", help="train the classifier on a features CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--curves", required=True)
    p.add_argument("--epochs", type=_positive_int, default=EXPERIMENT_CONFIG.epochs)
    p.add_argument("--lr", type=_positive_float, default=EXPERIMENT_CONFIG.learning_rate)
    p.add_argument("--hidden", type=_hidden, default=EXPERIMENT_CONFIG.hidden_sizes)
    p.add_argument("--seed", type=_uint64)
    p.add_argument("--test-fraction", type=_fraction, default=DEFAULT_TEST_FRACTION)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a features CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="clean-vs-noised study on a synthetic cohort")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_uint64)
    p.add_argument("--sigma", type=_nonneg_float, default=DEFAULT_SIGMA)
    p.add_argument("--n-per-group", type=_positive_int, default=25)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (GazeScreenError, OSError, ValueError) as exc:
        print(f"gazescreen {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
