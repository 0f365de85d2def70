"""Command-line pipeline: simulate -> augment -> train -> evaluate/compare.

Every stage reads and writes CSV (or the text model format), so each step
is independently reproducible: identical flags and inputs give
byte-identical outputs. Plots are emitted as data CSVs, not images.
"""

import math
import os

import click

from . import dataset as ds
from . import metrics as mx
from .phase import classify_by_threshold, process_frame
from .radar import cohort_scenarios, default_radar_params, simulate_frame
from .svm import KERNEL_KINDS, KernelSvm, load_model, save_model

_SEED_HELP = "Seed for all randomness in this command."


def _seed_option():
    return click.option("--seed", type=int, default=42, envvar="RESPIRA_SEED",
                        show_default=True, show_envvar=True, help=_SEED_HELP)


def _out_option(help="Output directory."):
    return click.option("--out", "out_dir", type=click.Path(file_okay=False),
                        required=True, help=help)


def _ensure_out(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _fail(err):
    raise click.ClickException(str(err))


def _parse_factors(text):
    if not text:
        return []
    try:
        factors = [float(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise click.BadParameter(f"could not parse noise factors {text!r}")
    if any(not (math.isfinite(f) and f >= 0) for f in factors):
        raise click.BadParameter("noise factors must be non-negative numbers")
    return factors


def _load_records(path):
    try:
        return ds.load_csv(path)
    except (OSError, ds.DatasetFormatError) as err:
        _fail(err)


@click.group()
def main():
    """Breath-rate classification pipeline on simulated FMCW radar data."""


@main.command("simulate")
@click.option("--count", type=int, required=True, help="Number of subjects (>= 2).")
@click.option("--breaths-min", type=float, default=2.0, show_default=True,
              help="Lower bound of true breaths per window.")
@click.option("--breaths-max", type=float, default=12.0, show_default=True,
              help="Upper bound of true breaths per window.")
@click.option("--amplitude-mm-min", type=float, default=0.5, show_default=True,
              help="Lower bound of chest displacement amplitude (mm).")
@click.option("--amplitude-mm-max", type=float, default=5.0, show_default=True,
              help="Upper bound of chest displacement amplitude (mm).")
@click.option("--snr-db", type=float, default=15.0, show_default=True,
              help="IF-sample signal-to-noise ratio in dB.")
@_seed_option()
@_out_option("Directory for phases.csv and manifest.csv.")
def cmd_simulate(count, breaths_min, breaths_max, amplitude_mm_min,
                 amplitude_mm_max, snr_db, seed, out_dir):
    """Simulate a cohort of breathing subjects 1 m from the radar and write
    their processed phase records plus a ground-truth manifest."""
    if count < 2:
        raise click.BadParameter("count must be >= 2")
    params = default_radar_params()
    window = params.window_duration
    try:
        scenarios = cohort_scenarios(
            count=count,
            breath_range=(breaths_min / window, breaths_max / window),
            amplitude_range=(amplitude_mm_min * 1e-3, amplitude_mm_max * 1e-3),
            snr_db=snr_db,
            seed=seed,
        )
    except ValueError as err:
        _fail(err)

    width = max(3, len(str(count - 1)))
    records = []
    manifest = ["id,breath_freq_hz,amplitude_m,snr_db,seed"]
    for i, scenario in enumerate(scenarios):
        rec_id = f"s{i:0{width}d}"
        frame = simulate_frame(params, scenario)
        filtered = process_frame(frame)
        breaths_true = scenario.breath_freq * window
        records.append(ds.PhaseRecord(
            id=rec_id,
            label=classify_by_threshold(breaths_true),
            breaths_true=breaths_true,
            features=filtered.values,
        ))
        manifest.append(
            f"{rec_id},{scenario.breath_freq:.17g},{scenario.breath_amplitude:.17g},"
            f"{scenario.snr_db:.17g},{scenario.seed}"
        )

    _ensure_out(out_dir)
    ds.save_csv(records, os.path.join(out_dir, "phases.csv"))
    ds._atomic_write(os.path.join(out_dir, "manifest.csv"), "\n".join(manifest) + "\n")
    click.echo(f"wrote {len(records)} records to {out_dir}")


@main.command("augment")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Input phases CSV.")
@click.option("--noise-factors", default="", show_default="none",
              help="Comma-separated noise factors, e.g. '0.1,0.2'.")
@click.option("--smote", "use_smote", is_flag=True,
              help="Balance classes with synthetic minority oversampling.")
@_seed_option()
@_out_option("Directory for augmented.csv.")
def cmd_augment(in_path, noise_factors, use_smote, seed, out_dir):
    """Enlarge a dataset with noisy copies and optionally balance it.

    Augmenting a whole file ahead of splitting leaks augmented twins across
    the split; prefer the same flags on 'train'/'compare', which augment the
    training side only."""
    factors = _parse_factors(noise_factors)
    records = _load_records(in_path)
    try:
        out_records = list(records)
        for idx, factor in enumerate(factors):
            out_records += ds.augment_noise(records, factor, seed + 1 + idx)
        if use_smote:
            out_records = ds.smote(out_records, seed=seed + 101)
    except ValueError as err:
        _fail(err)
    _ensure_out(out_dir)
    ds.save_csv(out_records, os.path.join(out_dir, "augmented.csv"))
    click.echo(f"wrote {len(out_records)} records to {out_dir}")


def _prepare_split(records, train_fraction, seed, factors, use_smote):
    """split -> per-record mean removal -> standardize on train -> augment
    the training side only. Returns (split, standardizer, train, validation)."""
    split = ds.split_records(records, train_fraction, seed)
    train_pre = [ds.preprocess(r) for r in split.train]
    val_pre = [ds.preprocess(r) for r in split.validation]
    standardizer = ds.standardize_fit(train_pre)
    train_std = ds.standardize_apply(standardizer, train_pre)
    val_std = ds.standardize_apply(standardizer, val_pre)
    final_train = list(train_std)
    for idx, factor in enumerate(factors):
        final_train += ds.augment_noise(train_std, factor, seed + 1 + idx)
    if use_smote:
        final_train = ds.smote(final_train, seed=seed + 101)
    return split, standardizer, final_train, val_std


def _fit_kernel(kernel, train_records, standardizer, c, gamma, coef0, seed):
    model = KernelSvm(kernel=kernel, c=c, gamma=gamma, coef0=coef0, seed=seed)
    model.fit(ds.to_matrix(train_records), ds.labels_of(train_records))
    model.standardizer_ = standardizer
    return model


def _write_split_manifest(split, path):
    train_ids = {rec.id for rec in split.train}
    lines = ["id,role"]
    for rec in sorted(split.train + split.validation, key=lambda r: r.id):
        role = "train" if rec.id in train_ids else "validation"
        lines.append(f"{rec.id},{role}")
    ds._atomic_write(path, "\n".join(lines) + "\n")


_train_options = [
    click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
                 required=True, help="Input phases CSV."),
    click.option("--c", "c_penalty", type=float, default=1.0, show_default=True,
                 help="Soft-margin box constraint C."),
    click.option("--gamma", type=float, default=None,
                 help="RBF width; defaults to 1/(n_features * mean feature variance)."),
    click.option("--coef0", type=float, default=1.0, show_default=True,
                 help="Additive constant of the quadratic kernel."),
    click.option("--train-fraction", type=float, default=0.75, show_default=True,
                 help="Fraction of records used for training."),
    click.option("--noise-factors", default="", show_default="none",
                 help="Noise factors applied to the training split only."),
    click.option("--smote", "use_smote", is_flag=True,
                 help="Balance the training split after augmentation."),
]


def _with_train_options(func):
    for option in reversed(_train_options):
        func = option(func)
    return func


@main.command("train")
@_with_train_options
@click.option("--kernel", type=click.Choice(KERNEL_KINDS), default="quadratic",
              show_default=True, help="Kernel family.")
@_seed_option()
@_out_option("Directory for model.svm and split.csv.")
def cmd_train(in_path, c_penalty, gamma, coef0, train_fraction, noise_factors,
              use_smote, kernel, seed, out_dir):
    """Train one kernel SVM on a stratified split of the input records."""
    factors = _parse_factors(noise_factors)
    records = _load_records(in_path)
    try:
        split, standardizer, train_records, _ = _prepare_split(
            records, train_fraction, seed, factors, use_smote)
        model = _fit_kernel(kernel, train_records, standardizer,
                            c_penalty, gamma, coef0, seed)
    except (ValueError, RuntimeError) as err:
        _fail(err)
    _ensure_out(out_dir)
    save_model(model, os.path.join(out_dir, "model.svm"))
    _write_split_manifest(split, os.path.join(out_dir, "split.csv"))
    click.echo(
        f"trained {kernel} kernel on {len(train_records)} records, "
        f"{model.n_support_} support vectors"
    )


@main.command("evaluate")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="Trained model file.")
@click.option("--data", "data_path", type=click.Path(exists=True, dir_okay=False),
              help="Phase records to score.")
@click.option("--fixture", type=click.Choice(["fig5"]),
              help="Print the reference confusion-matrix scores and exit.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for metrics.csv, confusion.csv and decisions.csv.")
def cmd_evaluate(model_path, data_path, fixture, out_dir):
    """Score a model on labeled records and write the report CSVs."""
    if fixture == "fig5":
        cm = mx.ConfusionMatrix(tp=17, tn=22, fp=1, fn=1)
        scores = (mx.accuracy(cm), mx.precision(cm), mx.recall(cm), mx.f1(cm))
        click.echo("/".join(f"{100 * s:.2f}" for s in scores))
        if out_dir:
            _ensure_out(out_dir)
            mx.write_confusion_csv(os.path.join(out_dir, "confusion.csv"), cm)
        return
    if not model_path or not data_path:
        raise click.UsageError("either --fixture or both --model and --data are required")
    if not out_dir:
        raise click.UsageError("--out is required when scoring a model")
    try:
        model = load_model(model_path)
    except ValueError as err:
        _fail(f"{model_path}: {err}")
    records = _load_records(data_path)
    try:
        prepared = ds.standardize_apply(model.standardizer_,
                                        [ds.preprocess(r) for r in records])
        X = ds.to_matrix(prepared)
        decisions = model.decision_function(X)
        predictions = model.predict(X)
        cm = mx.confusion(predictions, ds.labels_of(records))
        row = (model.kernel_spec_.kind, mx.accuracy(cm), mx.precision(cm),
               mx.recall(cm), mx.f1(cm), model.n_support_)
    except (ValueError, RuntimeError) as err:
        _fail(err)

    _ensure_out(out_dir)
    mx.write_metrics_csv(os.path.join(out_dir, "metrics.csv"), [row])
    mx.write_confusion_csv(os.path.join(out_dir, "confusion.csv"), cm)
    plot_lines = ["id,breaths_true,actual,predicted,decision_value"]
    for rec, pred, value in zip(records, predictions, decisions):
        breaths = "" if rec.breaths_true is None else f"{rec.breaths_true:.17g}"
        plot_lines.append(f"{rec.id},{breaths},{rec.label},{pred},{value:.17g}")
    ds._atomic_write(os.path.join(out_dir, "decisions.csv"), "\n".join(plot_lines) + "\n")
    click.echo(f"accuracy {row[1]:.4f} on {cm.total} records")


@main.command("compare")
@_with_train_options
@click.option("--kernels", default="all", show_default=True,
              help="Comma-separated kernel names, or 'all'.")
@_seed_option()
@_out_option("Directory for comparison.csv.")
def cmd_compare(in_path, c_penalty, gamma, coef0, train_fraction, noise_factors,
                use_smote, kernels, seed, out_dir):
    """Train every requested kernel on one shared split and tabulate
    accuracy, precision, recall, F1 and support-vector counts."""
    if kernels == "all":
        names = sorted(KERNEL_KINDS)
    else:
        names = sorted(set(part.strip() for part in kernels.split(",") if part.strip()))
        unknown = [n for n in names if n not in KERNEL_KINDS]
        if unknown:
            raise click.BadParameter(
                f"unknown kernels {unknown}; choose from {sorted(KERNEL_KINDS)}")
        if not names:
            raise click.BadParameter("no kernels requested")
    factors = _parse_factors(noise_factors)
    records = _load_records(in_path)
    try:
        split, standardizer, train_records, val_records = _prepare_split(
            records, train_fraction, seed, factors, use_smote)
        actuals = ds.labels_of(split.validation)
        X_val = ds.to_matrix(val_records)
        rows = []
        for kernel in names:
            model = _fit_kernel(kernel, train_records, standardizer,
                                c_penalty, gamma, coef0, seed)
            cm = mx.confusion(model.predict(X_val), actuals)
            rows.append((kernel, mx.accuracy(cm), mx.precision(cm),
                         mx.recall(cm), mx.f1(cm), model.n_support_))
    except (ValueError, RuntimeError) as err:
        _fail(err)
    _ensure_out(out_dir)
    mx.write_metrics_csv(os.path.join(out_dir, "comparison.csv"), rows)
    for row in rows:
        click.echo(f"{row[0]}: accuracy {row[1]:.4f}, {row[5]} support vectors")


if __name__ == "__main__":
    main()
