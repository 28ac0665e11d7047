"""Command-line front end.

Subcommands cover the whole pipeline: ``mockgen`` writes simulated spectra,
``fit`` turns a spectrum manifest into a persisted regression model,
``predict`` emits per-spectrum predictions with conformal bands, ``bootstrap``
writes a wild-bootstrap confidence band and scree data, and ``eval`` compares
saved predictions against truth curves. Exit codes: 0 success, 2 validation
error, 3 numerical failure. Every command is deterministic given its config
and seeds.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np

from . import conformal as conformal_mod
from . import evaluation, fileio, fpca, mockgen
from . import regression as regression_mod
from . import wild_bootstrap as wb
from .curves import resample
from .pipeline import (
    PipelineConfig,
    covers_response_range,
    fit_pairs,
    load_config,
    spectrum_to_pair,
    spectrum_to_predictor,
)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _exit_codes(func):
    # LinAlgError subclasses ValueError, so the numerical branch must come first
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as err:
            click.echo(f"numerical failure: {err}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except (ValueError, OSError, KeyError) as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


def _config_options(func):
    decorators = [
        click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None, help="JSON config file; flags override its keys."),
        click.option("--seed", type=int, default=None, help="Root random seed."),
        click.option("--alpha", type=float, default=None, help="Miscoverage level in (0, 1)."),
        click.option("--semimetric", type=click.Choice(["l2", "deriv1", "deriv2"]), default=None, help="Predictor-space distance."),
        click.option("--kappa", type=int, default=None, help="Fixed neighbor count (skips CV)."),
        click.option("--span", type=float, default=None, help="Fixed smoothing span (skips CV)."),
        click.option("--span-candidates", default=None, help="Comma-separated CV spans."),
        click.option("--kappa-candidates", default=None, help="Comma-separated CV neighbor counts."),
    ]
    for dec in reversed(decorators):
        func = dec(func)
    return func


def _build_config(config_path, **flags) -> PipelineConfig:
    if flags.get("span_candidates") is not None:
        flags["span_candidates"] = [float(s) for s in flags["span_candidates"].split(",")]
    if flags.get("kappa_candidates") is not None:
        flags["kappa_candidates"] = [int(s) for s in flags["kappa_candidates"].split(",")]
    return load_config(config_path, **flags)


@click.group()
def main() -> None:
    """Functional regression for spectrum continua, with uncertainty bands."""


@main.command("mockgen")
@_config_options
@click.option("--count", type=int, default=None, help="Number of mock spectra.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Output directory.")
@_exit_codes
def cmd_mockgen(config_path, count, out_dir, **flags) -> None:
    """Generate mock spectra, their true continua, and a manifest."""
    config = _build_config(config_path, mock_count=count, **flags)
    model = mockgen.synthetic_model(
        config.mock_grid(),
        n_components=config.mock_components,
        eigenvalue_decay=config.mock_eigenvalue_decay,
        variance_scale=config.mock_variance_scale,
        noise_level=config.mock_noise_level,
        seed=config.seed,
        normalization_wavelength=config.normalization_wavelength,
    )
    realizations = mockgen.generate(model, config.mock_count, config.seed)

    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for i, realization in enumerate(realizations):
        name = f"mock_{i:04d}"
        spectrum_path = out_dir / "spectra" / f"{name}.csv"
        truth_path = out_dir / "truths" / f"{name}.csv"
        fileio.write_spectrum(spectrum_path, realization.noisy)
        fileio.write_curve(truth_path, realization.true_continuum)
        records.append(
            fileio.SpectrumRecord(id=name, path=spectrum_path, z=0.0, truth_path=truth_path)
        )
    fileio.write_manifest(out_dir / "manifest.json", records)
    mockgen.save_model(model, out_dir / "model")
    click.echo(f"wrote {len(records)} mock spectra under {out_dir}")


@main.command("fit")
@_config_options
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True, help="Spectrum manifest to fit on.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True, help="Model file to write.")
@_exit_codes
def cmd_fit(config_path, manifest, out_path, **flags) -> None:
    """Smooth the manifest spectra into curve pairs and fit the regression."""
    config = _build_config(config_path, **flags)
    records = fileio.read_manifest(manifest)
    pairs = []
    for record in records:
        spectrum = fileio.read_spectrum(record.path, record.z)
        if not covers_response_range(spectrum, config):
            if record.predict_only:
                click.echo(f"skipping predict-only spectrum {record.id}", err=True)
                continue
            raise ValueError(
                f"spectrum {record.id} has no usable samples in the response "
                f"range {config.response_range}; mark it predict_only or drop it"
            )
        pair, _ = spectrum_to_pair(spectrum, config)
        pairs.append(pair)
    model, cv_table = fit_pairs(pairs, config)
    fileio.save_regression(model, out_path)
    if cv_table:
        click.echo("kappa  loo_error")
        for kappa, score in cv_table:
            click.echo(f"{kappa:5d}  {score:.6g}")
    click.echo(f"selected kappa={model.kappa} on n={model.n} pairs -> {out_path}")


@main.command("predict")
@_config_options
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path), required=True, help="Fitted model file.")
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True, help="Spectra to predict.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Output directory.")
@_exit_codes
def cmd_predict(config_path, model_path, manifest, out_dir, **flags) -> None:
    """Predict each spectrum's response segment with a conformal band.

    The calibration split is built from the model's stored training pairs;
    when the manifest carries truth curves an evaluation summary is written
    too.
    """
    config = _build_config(config_path, **flags)
    model = fileio.load_regression(model_path)
    calibration = conformal_mod.calibrate(
        model.pairs,
        config.alpha,
        model.semimetric,
        model.kernel,
        config.kappa_candidates,
        split_seed=config.seed,
    )

    records = fileio.read_manifest(manifest)
    out_dir.mkdir(parents=True, exist_ok=True)
    bands, truths, predictions = [], [], []
    for record in records:
        spectrum = fileio.read_spectrum(record.path, record.z)
        predictor, ref = spectrum_to_predictor(spectrum, config)
        prediction = regression_mod.predict(model, predictor)
        band = conformal_mod.band(calibration, predictor)
        if band.degenerate:
            click.echo(
                f"warning: alpha={config.alpha} is too small for the calibration "
                f"size; band for {record.id} is degenerate", err=True,
            )
        fileio.write_curve(out_dir / f"{record.id}_prediction.csv", prediction)
        fileio.save_conformal_band(band, out_dir / f"{record.id}_band.json")
        if record.truth_path is not None:
            truth = resample(fileio.read_curve(record.truth_path), prediction.grid)
            truths.append(truth.with_values(truth.values / ref))
            bands.append(band)
            predictions.append(prediction)
    if truths:
        rel = [evaluation.relative_error(p, t) for p, t in zip(predictions, truths)]
        plain = [evaluation.plain_error(p, t) for p, t in zip(predictions, truths)]
        rel_summary = evaluation.summarize(rel)
        fileio.write_error_summary(out_dir / "relative_error_summary.csv", rel_summary)
        fileio.write_error_summary(out_dir / "plain_error_summary.csv", evaluation.summarize(plain))
        coverage = evaluation.coverage_rate(bands, truths)
        click.echo(
            f"mean relative error {rel_summary.overall_mean:.4f}; "
            f"band coverage {coverage:.3f} at alpha={config.alpha}"
        )
    click.echo(f"wrote predictions for {len(records)} spectra under {out_dir}")


@main.command("bootstrap")
@_config_options
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path), required=True, help="Fitted model file.")
@click.option("--spectrum", "spectrum_path", type=click.Path(exists=True, path_type=Path), required=True, help="Query spectrum.")
@click.option("--redshift", type=float, default=0.0, help="Query spectrum redshift.")
@click.option("--components", "-m", "components", type=int, default=None, help="Number of principal components.")
@click.option("--replicates", "-B", "replicates", type=int, default=None, help="Bootstrap replicates.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Output directory.")
@_exit_codes
def cmd_bootstrap(config_path, model_path, spectrum_path, redshift, components, replicates, out_dir, **flags) -> None:
    """Wild-bootstrap confidence band for the projected prediction at one spectrum."""
    config = _build_config(
        config_path,
        bootstrap_components=components,
        bootstrap_replicates=replicates,
        **flags,
    )
    model = fileio.load_regression(model_path)
    responses = [p.response for p in model.pairs]
    fpca_model = fpca.fit_fpca(responses, config.bootstrap_components)

    spectrum = fileio.read_spectrum(spectrum_path, redshift)
    predictor, _ = spectrum_to_predictor(spectrum, config)
    band = wb.bootstrap_bands(
        model.pairs,
        model,
        predictor,
        fpca_model,
        wb.WildBootstrapConfig(
            replicates=config.bootstrap_replicates,
            components=config.bootstrap_components,
            alpha=config.alpha,
            seed=config.seed,
        ),
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    fileio.save_bootstrap_band(band, out_dir / "bootstrap_band.json")
    fileio.write_scree(out_dir / "scree.csv", fpca.scree_rows(fpca_model))
    click.echo(
        f"wrote bootstrap band ({config.bootstrap_components} components, "
        f"B={config.bootstrap_replicates}) under {out_dir}"
    )


@main.command("eval")
@_config_options
@click.option("--predictions", "pred_dir", type=click.Path(exists=True, path_type=Path), required=True, help="Directory written by predict.")
@click.option("--manifest", type=click.Path(exists=True, path_type=Path), required=True, help="Manifest with truth paths.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Output directory.")
@_exit_codes
def cmd_eval(config_path, pred_dir, manifest, out_dir, **flags) -> None:
    """Compare saved predictions and bands against the manifest's truth curves."""
    config = _build_config(config_path, **flags)
    records = [r for r in fileio.read_manifest(manifest) if r.truth_path is not None]
    if not records:
        raise ValueError("no manifest entry carries a truth_path")
    rel, plain, bands, truths = [], [], [], []
    for record in records:
        prediction = fileio.read_curve(pred_dir / f"{record.id}_prediction.csv")
        band = fileio.load_conformal_band(pred_dir / f"{record.id}_band.json")
        spectrum = fileio.read_spectrum(record.path, record.z)
        _, ref = spectrum_to_predictor(spectrum, config)
        truth = resample(fileio.read_curve(record.truth_path), prediction.grid)
        truth = truth.with_values(truth.values / ref)
        rel.append(evaluation.relative_error(prediction, truth))
        plain.append(evaluation.plain_error(prediction, truth))
        bands.append(band)
        truths.append(truth)
    out_dir.mkdir(parents=True, exist_ok=True)
    rel_summary = evaluation.summarize(rel)
    fileio.write_error_summary(out_dir / "relative_error_summary.csv", rel_summary)
    fileio.write_error_summary(out_dir / "plain_error_summary.csv", evaluation.summarize(plain))
    coverage = evaluation.coverage_rate(bands, truths)
    click.echo(
        f"mean relative error {rel_summary.overall_mean:.4f}; "
        f"band coverage {coverage:.3f} over {len(records)} spectra"
    )


if __name__ == "__main__":
    main()
