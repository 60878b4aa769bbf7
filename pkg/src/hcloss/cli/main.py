"""Main CLI entry point for hcloss."""

import csv
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
import numpy as np
import typer
from loguru import logger
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from hcloss.arch import PRESETS, format_graph, format_shape_chain, infer_shapes, parse, preset_text
from hcloss.data import load_dataset
from hcloss.errors import ConfigError, DataFormatError, NumericalError
from hcloss.settings import HclossSettings
from hcloss.stats import WeightedSample, class_centered, class_stats, scatter, variance
from hcloss.training import (
    RunMetrics,
    TrainConfig,
    evaluate,
    export_centroid_snapshots,
    export_embeddings,
    load_checkpoint,
    save_checkpoint,
    train,
)

app = typer.Typer(help="Train and evaluate image classifiers with learned class centroids (Hadamard layer + intra-class variance loss)")
console = Console(stderr=True)

METRICS_FILE = "metrics.txt"
CHECKPOINT_FILE = "model.hclk"
SNAPSHOT_FILE = "centroids_by_epoch.csv"


def setup_logging(level: str = "INFO"):
    """Configure logging for CLI."""
    logger.remove()
    logger.add(
        lambda msg: console.print(msg.rstrip("\n"), highlight=False),
        format="{message}",
        level=level,
    )


def exit_code_for(error: BaseException) -> int:
    """1 for usage and config errors, 2 for data errors, 3 for numerical failures."""
    if isinstance(error, NumericalError):
        return 3
    if isinstance(error, (DataFormatError, FileNotFoundError)):
        return 2
    return 1


def _fail(error: Exception, verbose: bool) -> typer.Exit:
    console.print(f"[red]❌ Error: {escape(str(error))}[/red]")
    if verbose:
        console.print_exception()
    return typer.Exit(code=exit_code_for(error))


def _settings(data_root: Optional[Path], out: Optional[Path], verbose: bool, dtype: Optional[str] = None) -> HclossSettings:
    settings = HclossSettings(data_root=data_root, out_dir=out, log_level="DEBUG" if verbose else None, dtype=dtype)
    setup_logging(settings.log_level)
    return settings


def _overrides(**values) -> dict:
    return {k: v for k, v in values.items() if v is not None}


def _results_table(title: str, rows: Sequence) -> Table:
    table = Table(title=title)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green", justify="right")
    for name, value in rows:
        table.add_row(name, "n/a" if value is None else f"{value:.4f}" if isinstance(value, float) else str(value))
    return table


@app.command("train")
def train_command(
    dataset: Optional[str] = typer.Option(None, help="Dataset: mnist or fashion-mnist"),
    arch: Optional[str] = typer.Option(None, help=f"Architecture preset {list(PRESETS)} or path to a .stnn file"),
    embed_dim: Optional[int] = typer.Option(None, "--embed-dim", help="Embedding size n"),
    classes: Optional[int] = typer.Option(None, "--classes", help="Class count K bound in the architecture"),
    normalize: Optional[bool] = typer.Option(None, "--normalize/--no-normalize", help="Project embeddings onto the unit sphere"),
    loss: Optional[str] = typer.Option(None, help="Loss: shannon or shannon+var"),
    lambdas: Optional[List[float]] = typer.Option(None, "--lambda", help="Weight of the intra-class variance; repeat to sweep"),
    epochs: Optional[int] = typer.Option(None, help="Number of epochs"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size", help="Mini-batch size"),
    lr: Optional[float] = typer.Option(None, help="Learning rate"),
    seed: Optional[int] = typer.Option(None, help="Random seed"),
    optimizer: Optional[str] = typer.Option(None, help="Optimizer: adam or msgd"),
    momentum: Optional[float] = typer.Option(None, help="Momentum for msgd"),
    baseline: Optional[str] = typer.Option(None, help="Centroid rule outside the tape: none, wen:ALPHA or sample:ALPHA"),
    train_limit: Optional[int] = typer.Option(None, "--train-limit", help="Use only the first N training samples"),
    test_limit: Optional[int] = typer.Option(None, "--test-limit", help="Use only the first N test samples"),
    dtype: Optional[str] = typer.Option(None, help="Training precision: float32 or float64"),
    freeze_network: Optional[bool] = typer.Option(None, "--freeze-network/--no-freeze-network", help="Optimise only the centroids"),
    track_epoch_stats: Optional[bool] = typer.Option(None, "--track-epoch-stats/--no-track-epoch-stats", help="Record within-class variance after each epoch"),
    config_from: Optional[Path] = typer.Option(None, "--config-from", help="Re-run the experiment recorded in a metrics file"),
    data_root: Optional[Path] = typer.Option(None, "--data-root", help="Directory with the IDX files (default: $HCLOSS_DATA_ROOT or ./data)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory (default: $HCLOSS_OUT_DIR or ./runs)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show detailed output"),
):
    """Train a network and write metrics, checkpoint and centroid snapshots.

    Examples:
        hcloss train --dataset mnist --embed-dim 2 --lambda 0.05 --epochs 20 --batch-size 256 --lr 0.001 --seed 7
        hcloss train --loss shannon --train-limit 10000 --epochs 5
        hcloss train --lambda 0 --lambda 0.05 --lambda 0.5 --out runs/sweep
    """
    try:
        settings = _settings(data_root, out, verbose)
        base = RunMetrics.read(config_from).config if config_from else TrainConfig(dtype=settings.dtype_name)
        base = base.replace(
            **_overrides(
                dataset=dataset,
                arch=arch,
                embed_dim=embed_dim,
                num_classes=classes,
                normalize=normalize,
                loss=loss,
                epochs=epochs,
                batch_size=batch_size,
                lr=lr,
                seed=seed,
                optimizer=optimizer,
                momentum=momentum,
                baseline=baseline,
                train_limit=train_limit,
                test_limit=test_limit,
                dtype=dtype,
                freeze_network=freeze_network,
                track_epoch_stats=track_epoch_stats,
            )
        )
        configs = [base.replace(lam=lam).validate() for lam in (lambdas or [base.lam])]

        dtype_ = np.dtype(base.dtype)
        train_set = load_dataset(settings.data_root, base.dataset, "train", base.train_limit, dtype_)
        test_set = load_dataset(settings.data_root, base.dataset, "test", base.test_limit, dtype_)

        for config in configs:
            run_dir = settings.out_dir / f"lambda-{config.lam:g}" if len(configs) > 1 else settings.out_dir
            console.print(f"[blue]🏋️ Training {config.arch} on {config.dataset}: n={config.embed_dim}, loss={config.loss}, lambda={config.effective_lambda:g}[/blue]")
            result = train(config, train_set)
            report = evaluate(result.network, train_set, test_set, result.initial_centroids)
            metrics = RunMetrics(
                config=config,
                history=result.history,
                nearest_centroid_accuracy=report.nearest_centroid_accuracy,
                max_score_accuracy=report.max_score_accuracy,
                learned_centroid_accuracy=report.learned_centroid_accuracy,
                centroid_distance=report.distances.learned.tolist() if report.distances else None,
                initial_centroid_distance=report.distances.initial.tolist() if report.distances else None,
                train_size=len(train_set),
                test_size=len(test_set),
            )
            metrics_path = metrics.write(run_dir / METRICS_FILE)
            save_checkpoint(run_dir / CHECKPOINT_FILE, result.network, config)
            export_centroid_snapshots(result.snapshots, run_dir / SNAPSHOT_FILE)

            console.print(
                _results_table(
                    f"Results (lambda={config.effective_lambda:g})",
                    [
                        ("final L0", result.history[-1].l0),
                        ("final L_var", result.history[-1].l_var),
                        ("nearest-centroid accuracy", report.nearest_centroid_accuracy),
                        ("learned-centroid accuracy", report.learned_centroid_accuracy),
                        ("max-score accuracy", report.max_score_accuracy),
                    ],
                )
            )
            console.print(f"[green]✅ Metrics saved to: {metrics_path}[/green]")
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, verbose) from e


@app.command("eval")
def eval_command(
    checkpoint: Path = typer.Argument(..., help="Checkpoint written by 'hcloss train'"),
    data_root: Optional[Path] = typer.Option(None, "--data-root", help="Directory with the IDX files"),
    train_limit: Optional[int] = typer.Option(None, "--train-limit", help="Override the training subset used for class means"),
    test_limit: Optional[int] = typer.Option(None, "--test-limit", help="Override the test subset"),
    out: Optional[Path] = typer.Option(None, "--out", help="Also write a metrics file here"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show detailed output"),
):
    """Recompute nearest-centroid and max-score accuracy from a checkpoint."""
    try:
        settings = _settings(data_root, None, verbose)
        network, config = load_checkpoint(checkpoint)
        config = config.replace(**_overrides(train_limit=train_limit, test_limit=test_limit))
        dtype_ = np.dtype(config.dtype)
        train_set = load_dataset(settings.data_root, config.dataset, "train", config.train_limit, dtype_)
        test_set = load_dataset(settings.data_root, config.dataset, "test", config.test_limit, dtype_)
        report = evaluate(network, train_set, test_set)
        console.print(
            _results_table(
                f"Evaluation of {checkpoint}",
                [
                    ("nearest-centroid accuracy", report.nearest_centroid_accuracy),
                    ("learned-centroid accuracy", report.learned_centroid_accuracy),
                    ("max-score accuracy", report.max_score_accuracy),
                ],
            )
        )
        if out is not None:
            RunMetrics(
                config=config,
                nearest_centroid_accuracy=report.nearest_centroid_accuracy,
                max_score_accuracy=report.max_score_accuracy,
                learned_centroid_accuracy=report.learned_centroid_accuracy,
                centroid_distance=report.distances.learned.tolist() if report.distances else None,
                train_size=len(train_set),
                test_size=len(test_set),
            ).write(out)
            console.print(f"[green]✅ Metrics saved to: {out}[/green]")
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, verbose) from e


def read_point_cloud(path: Path) -> WeightedSample:
    """Read ``label[,weight],x_1..x_n`` rows (header required) into a weighted sample."""
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 2:
        raise DataFormatError(f"{path}: needs a header and at least one point")
    header = [h.strip() for h in rows[0]]
    if "label" not in header:
        raise DataFormatError(f"{path}: header must contain a 'label' column")
    label_col = header.index("label")
    weight_col = header.index("weight") if "weight" in header else None
    coord_cols = [i for i in range(len(header)) if i not in (label_col, weight_col)]
    if not coord_cols:
        raise DataFormatError(f"{path}: no coordinate columns")
    try:
        table = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=np.float64)
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}") from e
    if table.ndim != 2 or table.shape[1] != len(header):
        raise DataFormatError(f"{path}: every row needs {len(header)} values")
    labels = table[:, label_col].astype(np.intp)
    points = table[:, coord_cols]
    if weight_col is None:
        return WeightedSample.uniform(points, labels)
    return WeightedSample.from_raw_weights(points, table[:, weight_col], labels)


@app.command("stats")
def stats_command(
    points: Path = typer.Argument(..., help="CSV with a header: label, optional weight, coordinates"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show detailed output"),
):
    """Scatter / variance identities of a labelled point cloud."""
    try:
        setup_logging("DEBUG" if verbose else "INFO")
        sample = read_point_cloud(points)
        stats = class_stats(sample)
        per_class = sum(p * scatter(sample.restrict(sample.labels == k)) for k, p in zip(stats.classes, stats.class_masses))
        rows = [
            ("points", len(sample)),
            ("dimension", sample.dim),
            ("classes", len(stats.classes)),
            ("variance", variance(sample)),
            ("scatter", scatter(sample)),
            ("within-class variance", stats.within_variance),
            ("trace of within-class covariance", float(np.trace(stats.within_covariance))),
            ("variance of class-centred points", variance(class_centered(sample))),
            ("sum of P_k * scatter(X_k)", per_class),
        ]
        table = Table(title=f"Statistics of {points.name}")
        table.add_column("Statistic", style="cyan")
        table.add_column("Value", style="green", justify="right")
        for name, value in rows:
            table.add_row(name, f"{value:.12g}" if isinstance(value, float) else str(value))
        Console().print(table)
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, verbose) from e


@app.command("parse-arch")
def parse_arch_command(
    source: str = typer.Argument(..., help=f"Path to a .stnn file or a preset name {list(PRESETS)}"),
    input_extent: Optional[int] = typer.Option(None, "--input", help="Square input size (default: the extent in the file)"),
    n: int = typer.Option(2, "--n", help="Embedding size bound to 'n'"),
    classes: int = typer.Option(10, "--classes", help="Class count bound to 'K' / 'P'"),
    canonical: bool = typer.Option(False, "--canonical", help="Also print the canonical form"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show every layer"),
):
    """Validate an architecture file and print its shape chain.

    Examples:
        hcloss parse-arch mnist.stnn --input 28 --n 2 --classes 10
        hcloss parse-arch face --canonical
    """
    try:
        setup_logging("DEBUG" if verbose else "INFO")
        path = Path(source)
        if path.is_file():
            text = path.read_text(encoding="utf-8")
        elif source in PRESETS:
            text = preset_text(source)
        else:
            raise FileNotFoundError(f"{source}: no such file or preset")
        graph = parse(text, name=path.stem)
        shapes = infer_shapes(graph, input_extent, n, classes)
        if verbose:
            table = Table(title=f"{source}: {len(graph)} layers")
            table.add_column("#", justify="right")
            table.add_column("Layer", style="cyan")
            table.add_column("Output shape", style="green")
            for item in shapes:
                table.add_row(str(item.index), f"{item.spec.kind}" + (f" ->{item.spec.label}" if item.spec.label else ""), " x ".join(str(d) for d in item.shape))
            console.print(table)
        if canonical:
            typer.echo(format_graph(graph), nl=False)
        typer.echo(format_shape_chain(shapes))
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, verbose) from e


@app.command("export")
def export_command(
    checkpoint: Path = typer.Argument(..., help="Checkpoint written by 'hcloss train'"),
    out: Path = typer.Option(Path("embeddings.csv"), "--out", help="CSV file to write"),
    split: str = typer.Option("test", help="Split to embed: train or test"),
    limit: Optional[int] = typer.Option(None, help="Embed only the first N samples"),
    data_root: Optional[Path] = typer.Option(None, "--data-root", help="Directory with the IDX files"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Show detailed output"),
):
    """Write embeddings and learned centroids as CSV (plus a 2-D PCA file for n > 2)."""
    try:
        if split not in ("train", "test"):
            raise ConfigError("split", f"must be train or test, got '{split}'")
        settings = _settings(data_root, None, verbose)
        network, config = load_checkpoint(checkpoint)
        data = load_dataset(settings.data_root, config.dataset, split, limit, np.dtype(config.dtype))
        for path in export_embeddings(network, data, out):
            console.print(f"[green]✅ Wrote {path}[/green]")
    except typer.Exit:
        raise
    except Exception as e:
        raise _fail(e, verbose) from e


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting.

    Usage errors return 1 here (click itself would use 2, which is reserved for data errors).
    """
    try:
        code = app(args=list(argv) if argv is not None else None, prog_name="hcloss", standalone_mode=False)
    except click.ClickException as e:
        e.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        console.print("[yellow]Aborted[/yellow]")
        return 1
    return code if isinstance(code, int) else 0


def main():
    """Main entry point for hcloss CLI."""
    sys.exit(run())


if __name__ == "__main__":
    main()
