"""Multi-stage workflows shared by the command line: cohort features and the
clean-vs-noised training experiment."""
from __future__ import annotations

import contextlib
import json
import os
import shutil
import tempfile
from pathlib import Path
from typing import Sequence

from .classifier import EXPERIMENT_CONFIG, LearningCurve, MlpConfig, MlpModel, save_model, split_stratified, train
from .core import AoiSet, FeatureVector, Label
from .errors import GazeScreenError, IoFailure, StageFailure
from .features import cohort_zone_means, dwell_fractions, emit_zone_distribution_table, eyes_ratio, zone_gap
from .ingest import CohortManifest, _umask, atomic_write_text, read_features_csv, write_features_csv
from .noise import DEFAULT_SIGMA, NOISE_RNG, NoiseSpec, add_webcam_noise
from .synth import SYNTH_RNG, CohortSpec, derive_seed, generate_cohort
from .viz import emit_curves_csv

SPLIT_RNG = "numpy.PCG64"
DEFAULT_TEST_FRACTION = 0.2
_NOISE_STREAM = 2


def entry_noise_seed(seed: int, index: int) -> int:
    """Noise seed for the ``index``-th recording of a cohort noised under ``seed``."""
    return derive_seed(seed, index, _NOISE_STREAM)


@contextlib.contextmanager
def staged_directory(out_dir):
    """Build a directory under a temporary name and move it into place on success.

    ``out_dir`` must be absent or empty.  On any error the staging directory
    is removed and ``out_dir`` is left as it was.
    """
    out = Path(out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise IoFailure(f"{out} exists and is not an empty directory")
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(dir=out.parent, prefix=f".{out.name}.", suffix=".tmp"))
        os.chmod(tmp, 0o777 & ~_umask())
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    try:
        yield tmp
        if out.exists():
            out.rmdir()
        os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def manifest_features(manifest: CohortManifest, aoi: AoiSet, sigma: float = 0.0,
                      seed: int = 0) -> list[FeatureVector]:
    """Dwell fractions for every manifest entry, optionally after webcam noise."""
    out = []
    for i, entry in enumerate(manifest.entries):
        try:
            rec = manifest.load(entry)
            if sigma > 0:
                rec = add_webcam_noise(rec, NoiseSpec(sigma, entry_noise_seed(seed, i)))
            out.append(dwell_fractions(rec, aoi, entry.label))
        except GazeScreenError as exc:
            raise StageFailure(f"entry {entry.subject_id}", str(exc)) from exc
    return out


def config_for_seed(seed: int, base: MlpConfig = EXPERIMENT_CONFIG) -> MlpConfig:
    return MlpConfig(hidden_sizes=base.hidden_sizes, learning_rate=base.learning_rate, epochs=base.epochs,
                     batch_size=base.batch_size, init_seed=int(seed) & ((1 << 64) - 1), l2=base.l2)


def train_split(features: Sequence[FeatureVector], cfg: MlpConfig, test_fraction: float,
                seed: int) -> tuple[MlpModel, LearningCurve, list[FeatureVector], list[FeatureVector]]:
    train_set, eval_set = split_stratified(features, test_fraction, seed)
    model, curve = train(cfg, train_set, eval_set)
    return model, curve, train_set, eval_set


def _condition_summary(curve: LearningCurve) -> dict:
    last = curve[-1]
    return {"final_train_accuracy": last.train_accuracy, "final_eval_accuracy": last.eval_accuracy,
            "final_train_loss": last.train_loss, "final_eval_loss": last.eval_loss,
            "epochs_to_95pct_of_final": curve.epochs_to_fraction_of_final(0.95)}


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except StageFailure as exc:
        raise StageFailure(name, str(exc)) from exc
    except (GazeScreenError, ValueError) as exc:
        raise StageFailure(name, str(exc)) from exc


def run_experiment(out_dir, seed: int, sigma: float = DEFAULT_SIGMA, n_per_group: int = 25,
                   base_config: MlpConfig = EXPERIMENT_CONFIG, test_fraction: float = DEFAULT_TEST_FRACTION) -> dict:
    """Synthesize a cohort, extract clean and noised features, train one model on each.

    Both conditions share the subject split and the init seed, so the only
    difference between the two runs is the noise.  Returns the summary that
    is also written to ``summary.json``.
    """
    spec = CohortSpec(n_per_group=n_per_group, seed=seed)
    cfg = config_for_seed(seed, base_config)
    with staged_directory(out_dir) as root:
        manifest = _stage("synth", generate_cohort, spec, root / "cohort")
        clean = _stage("features", manifest_features, manifest, spec.aoi)
        noised = _stage("noise", manifest_features, manifest, spec.aoi, sigma, seed)
        _stage("features", write_features_csv, root / "features_clean.csv", clean)
        _stage("features", write_features_csv, root / "features_noised.csv", noised)
        # train on what was written so a later `train` on these files matches exactly
        clean = _stage("features", read_features_csv, root / "features_clean.csv", require_labels=True)
        noised = _stage("features", read_features_csv, root / "features_noised.csv", require_labels=True)
        stats_clean = _stage("zone_means", cohort_zone_means, clean)
        stats_noised = _stage("zone_means", cohort_zone_means, noised)
        _stage("zone_means", emit_zone_distribution_table, stats_clean, stats_noised, root / "zone_distribution.csv")

        model_c, curve_c, train_c, _ = _stage("train_clean", train_split, clean, cfg, test_fraction, seed)
        train_ids = {f.subject_id for f in train_c}
        noised_train = [f for f in noised if f.subject_id in train_ids]
        noised_eval = [f for f in noised if f.subject_id not in train_ids]
        model_n, curve_n = _stage("train_noised", train, cfg, noised_train, noised_eval)
        _stage("train_clean", save_model, model_c, root / "model_clean.json")
        _stage("train_noised", save_model, model_n, root / "model_noised.json")
        _stage("curves", emit_curves_csv, {"clean": curve_c, "noised": curve_n}, root / "curves.csv")

        summary = {
            "seed": int(seed),
            "sigma_frac": sigma,
            "n_per_group": int(n_per_group),
            "test_fraction": test_fraction,
            "n_train": len(train_c),
            "n_eval": len(clean) - len(train_c),
            "config": cfg.to_dict(),
            "clean": _condition_summary(curve_c),
            "noised": _condition_summary(curve_n),
            "eyes_ratio_asd_over_td": eyes_ratio(stats_clean),
            "eyes_gap_clean": zone_gap(stats_clean),
            "eyes_gap_noised": zone_gap(stats_noised),
            "group_sizes": {lab.value: sum(f.label is lab for f in clean) for lab in Label},
            "generators": {"cohort": SYNTH_RNG, "noise": NOISE_RNG, "split": SPLIT_RNG, "init": "numpy.PCG64"},
        }
        _stage("summary", atomic_write_text, root / "summary.json",
               json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
