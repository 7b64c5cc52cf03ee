"""
Entry point de FedGraph-VASP.
CLI para ingerir datasets, particionar, entrenar, comparar, auditar y medir el túnel.
"""

import functools
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import numpy as np
import pandas as pd
from loguru import logger
from scipy.stats import ttest_rel

from . import __version__
from .audit import AuditError, inversion_attack, membership_inference
from .audit.inversion import MIN_ROWS
from .config import (
    DATASET_KINDS,
    MODES,
    PARTITION_METHODS,
    Config,
    ConfigError,
    ExperimentConfig,
    load_config,
)
from .federation import (
    ProtocolError,
    local_view,
    run_experiment,
    split_rule,
    summarize,
    write_metrics_csv,
    write_summary_json,
)
from .gnn import ModelError, load_checkpoint, save_checkpoint
from .graph import (
    GraphError,
    TransactionGraph,
    generate_synthetic,
    load_elliptic_dir,
    load_ethereum,
    load_graph_text,
    make_split,
    save_graph_text,
)
from .graph.loaders import (
    ELLIPTIC_CLASSES_FILE,
    ELLIPTIC_EDGELIST_FILE,
    ELLIPTIC_FEATURES_FILE,
)
from .manifest import RunManifest
from .partition import (
    PartitionError,
    SiloPartition,
    create_partitioner,
    read_partition_file,
    write_partition_file,
)
from .tunnel import TunnelError, create_kem_provider, measure_overhead, overhead_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

DATA_ERRORS = (GraphError, PartitionError, AuditError, FileNotFoundError)
RUNTIME_ERRORS = (TunnelError, ProtocolError, ModelError)

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


def setup_logging(log_config: Dict[str, Any], debug: bool = False):
    """Configura el sistema de logging."""
    level = "DEBUG" if debug else log_config.get("level", "INFO")

    # Remover handler por defecto
    logger.remove()

    # Consola
    if log_config.get("console", True):
        logger.add(sys.stderr, level=level, format=CONSOLE_FORMAT)

    # Archivo
    log_file = log_config.get("file")
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        logger.add(
            str(log_path),
            level=log_config.get("level", "INFO"),
            rotation=f"{log_config.get('max_size_mb', 10)} MB",
            retention=log_config.get("backup_count", 5),
            compression="zip",
        )


def handle_errors(func: Callable) -> Callable:
    """Traduce las excepciones de dominio a códigos de salida."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.ClickException:
            raise
        except ConfigError as e:
            click.echo(f"Error de configuración: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except DATA_ERRORS as e:
            click.echo(f"Error de datos: {e}", err=True)
            sys.exit(EXIT_DATA)
        except RUNTIME_ERRORS as e:
            click.echo(f"Error de ejecución: {e}", err=True)
            sys.exit(EXIT_RUNTIME)
        except Exception as e:
            logger.exception("Error inesperado")
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_RUNTIME)

    return wrapper


def _parse_list(value: Optional[str], cast: Callable, name: str) -> Optional[List[Any]]:
    if value is None:
        return None
    try:
        items = [cast(v) for v in value.replace(" ", "").split(",") if v]
    except ValueError:
        raise click.BadParameter(f"lista inválida: {value}", param_hint=name)
    if not items:
        raise click.BadParameter("la lista está vacía", param_hint=name)
    return items


# ============================================================
# Contexto de ejecución
# ============================================================

@dataclass
class RunContext:
    config: Optional[Config]
    experiment: ExperimentConfig
    dataset: Dict[str, Any]
    output: Dict[str, Any]


def load_context(
    config_path: Optional[str],
    debug: bool = False,
    dataset: Optional[str] = None,
    data: Optional[str] = None,
    knn: Optional[int] = None,
) -> RunContext:
    """Carga la configuración (opcional), configura logging y aplica las opciones de datos."""
    cfg = load_config(config_path) if config_path else None
    setup_logging(cfg.logging if cfg else {}, debug)

    settings = dict(cfg.dataset) if cfg else {}
    if dataset:
        settings["kind"] = dataset
    if data:
        settings["path"] = data
    if knn:
        settings["k"] = knn
    settings.setdefault("kind", "elliptic")
    if settings["kind"] not in DATASET_KINDS:
        raise ConfigError(f"dataset.kind debe ser uno de {DATASET_KINDS}")

    return RunContext(
        config=cfg,
        experiment=cfg.experiment() if cfg else ExperimentConfig(),
        dataset=settings,
        output=cfg.output if cfg else {},
    )


def load_dataset(settings: Dict[str, Any]) -> Tuple[TransactionGraph, List[Path]]:
    """
    Carga el grafo según `settings["kind"]`.

    Returns:
        (grafo, archivos de entrada para el manifiesto)
    """
    kind = settings["kind"]
    if kind == "synthetic":
        graph = generate_synthetic(**(settings.get("synthetic") or {}))
        inputs: List[Path] = []
    else:
        if not settings.get("path"):
            raise ConfigError(f"El dataset {kind} requiere --data, dataset.path o FGV_DATA_DIR")
        path = Path(settings["path"])
        if kind == "elliptic":
            graph = load_elliptic_dir(path)
            inputs = [path / ELLIPTIC_FEATURES_FILE, path / ELLIPTIC_CLASSES_FILE,
                      path / ELLIPTIC_EDGELIST_FILE]
        elif kind == "ethereum":
            graph = load_ethereum(
                path,
                k=int(settings.get("k", 10)),
                label_column=settings.get("label_column", "FLAG"),
            )
            inputs = [path]
        else:
            graph = load_graph_text(path)
            inputs = [path.with_name(path.name + ".nodes"), path.with_name(path.name + ".edges")]

    logger.info(f"Dataset {kind}: {graph.summary()}")
    return graph, inputs


def build_partition(graph: TransactionGraph, experiment: ExperimentConfig) -> SiloPartition:
    partitioner = create_partitioner(
        experiment.partition,
        {
            "resolution": experiment.louvain_resolution,
            "passes": experiment.edgecut_passes,
            "path": experiment.partition_file,
        },
    )
    return partitioner.partition(graph, experiment.num_silos, experiment.partition_seed)


def echo_partition(partition: SiloPartition):
    stats = partition.summary()
    click.echo(f"K: {stats['k']} ({stats['method']})")
    click.echo(f"  Tamaños de silo: {stats['silo_sizes']}")
    click.echo(f"  Nodos frontera: {stats['boundary_counts']}")
    click.echo(f"  Aristas cruzadas: {stats['cross_edges']}")
    click.echo(f"  Fracción de aristas cruzadas: {stats['cross_edge_fraction']:.6f}")


# ============================================================
# Opciones compartidas
# ============================================================

def data_options(func: Callable) -> Callable:
    options = [
        click.option(
            "-c", "--config",
            type=click.Path(exists=True),
            help="Archivo de configuración (YAML o clave = valor)",
        ),
        click.option("--dataset", type=click.Choice(DATASET_KINDS), help="Tipo de dataset"),
        click.option(
            "--data",
            type=click.Path(),
            envvar="FGV_DATA_DIR",
            help="Directorio o archivo del dataset (por defecto FGV_DATA_DIR)",
        ),
        click.option("--knn", type=int, help="Vecinos del grafo k-NN (Ethereum)"),
        click.option("--debug", is_flag=True, help="Habilitar modo debug"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def experiment_options(func: Callable) -> Callable:
    options = [
        click.option("--mode", type=click.Choice(MODES), help="Modo de entrenamiento"),
        click.option("--rounds", type=int, help="Rondas federadas R"),
        click.option("--epochs", type=int, help="Épocas locales E"),
        click.option("--lambda", "lam", type=float, help="Peso λ de la pérdida de alineación"),
        click.option("--k", "num_silos", type=int, help="Número de silos K"),
        click.option("--seed", type=int, help="Semilla única"),
        click.option("--seeds", help="Lista de semillas separadas por coma"),
        click.option("--partition", type=click.Choice(PARTITION_METHODS), help="Particionador"),
        click.option("--partition-file", type=click.Path(), help="Partición precalculada"),
        click.option("--workers", type=int, help="Hilos de clientes por ronda"),
        click.option("--no-exchange", is_flag=True, help="Desactivar el intercambio de embeddings"),
        click.option("--exchange-rounds", type=int, help="Última ronda con intercambio"),
        click.option("--out-dir", type=click.Path(), help="Directorio de salida"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def resolve_experiment(ctx: RunContext, **options) -> ExperimentConfig:
    """Aplica los overrides de la CLI sobre la configuración y la valida."""
    seeds = _parse_list(options.pop("seeds", None), int, "--seeds")
    seed = options.pop("seed", None)
    if seeds is None and seed is not None:
        seeds = [seed]
    partition_file = options.get("partition_file")
    if partition_file and not options.get("partition"):
        options["partition"] = "file"
    if options.pop("no_exchange", False):
        options["exchange"] = False
    return ctx.experiment.with_overrides(seeds=seeds, **options).validate()


def output_dir(ctx: RunContext, out_dir: Optional[str], default: str) -> Path:
    base = out_dir or ctx.output.get("dir") or default
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_and_write(
    experiment: ExperimentConfig,
    graph: TransactionGraph,
    partition: SiloPartition,
    out: Path,
    manifest: RunManifest,
) -> Dict[str, Any]:
    """Ejecuta un experimento y escribe métricas, resumen y checkpoints en `out`."""
    mask = make_split(graph, split_rule(experiment))
    result = run_experiment(experiment, graph, partition, mask)

    metrics_path = write_metrics_csv(result.rounds, out / "metrics.csv")
    summary = summarize(result)
    summary["partition"] = partition.summary()
    summary_path = write_summary_json(summary, out / "summary.json")

    comm = pd.concat(
        [s.comm.frame().assign(seed=s.seed) for s in result.seeds], ignore_index=True
    )
    comm.to_csv(out / "comm.csv", index=False)

    for seed_result in result.seeds:
        key = f"{experiment.mode}/seed_{seed_result.seed}"
        metadata = {"seed": seed_result.seed, "mode": experiment.mode,
                    "k": partition.num_silos, "rounds": experiment.rounds}
        if seed_result.model is not None:
            path = save_checkpoint(
                seed_result.model, out / "checkpoints" / f"seed_{seed_result.seed}.ckpt", metadata
            )
            manifest.add_output(key, "checkpoint", path)
        else:
            for client in seed_result.clients:
                path = save_checkpoint(
                    client.model,
                    out / "checkpoints" / f"seed_{seed_result.seed}_silo_{client.silo_id}.ckpt",
                    {**metadata, "silo": client.silo_id},
                )
                manifest.add_output(key, f"checkpoint_silo_{client.silo_id}", path)
        manifest.add_output(key, "metrics", metrics_path)
        manifest.add_output(key, "summary", summary_path)
        manifest.record_time(key, seed_result.seconds)

    first = result.seeds[0]
    click.echo(f"\n{experiment.mode}: comunicación promedio por ronda (semilla {first.seed})")
    click.echo(first.comm.format_table())
    final = summary["final"]
    click.echo(
        f"F1 final: {final['f1']['mean']:.4f} ± {final['f1']['std']:.4f} "
        f"(P={final['precision']['mean']:.4f}, R={final['recall']['mean']:.4f})"
    )
    summary["per_seed_f1"] = [s.final.f1 for s in result.seeds]
    return summary


# ============================================================
# CLI
# ============================================================

@click.group()
@click.version_option(__version__, prog_name="FedGraph-VASP")
def cli():
    """Simulador federado de detección de fraude sobre grafos de transacciones."""
    pass


@cli.command()
@data_options
@click.option("--export", "export_prefix", type=click.Path(), help="Exportar en formato de texto")
@handle_errors
def ingest(config, dataset, data, knn, debug, export_prefix):
    """Carga un dataset y muestra sus conteos."""
    ctx = load_context(config, debug, dataset, data, knn)
    graph, _ = load_dataset(ctx.dataset)

    click.echo(f"Dataset: {ctx.dataset['kind']}")
    for key, value in graph.summary().items():
        click.echo(f"  {key}: {value}")

    if export_prefix:
        nodes_path, edges_path = save_graph_text(graph, export_prefix)
        click.echo(f"✓ Exportado a {nodes_path} y {edges_path}")


@cli.command()
@data_options
@click.option("--method", type=click.Choice(PARTITION_METHODS), help="Método de partición")
@click.option("--k", "num_silos", type=int, help="Número de silos K")
@click.option("--seed", type=int, help="Semilla del particionador")
@click.option("--in", "partition_in", type=click.Path(), help="Partición de entrada")
@click.option("--out", type=click.Path(), help="Escribir la partición en este archivo")
@handle_errors
def partition(config, dataset, data, knn, debug, method, num_silos, seed, partition_in, out):
    """Particiona el grafo en silos e imprime sus estadísticas."""
    ctx = load_context(config, debug, dataset, data, knn)
    if partition_in and not method:
        method = "file"
    experiment = ctx.experiment.with_overrides(
        partition=method, num_silos=num_silos, partition_seed=seed, partition_file=partition_in
    ).validate()
    graph, inputs = load_dataset(ctx.dataset)
    silos = build_partition(graph, experiment)
    echo_partition(silos)

    if out:
        path = write_partition_file(silos, graph, out)
        manifest = RunManifest("partition", config=experiment.to_dict())
        manifest.add_inputs(inputs + ([Path(partition_in)] if partition_in else []))
        manifest.add_output("partition", "file", path)
        manifest.extra["partition"] = silos.summary()
        manifest.write(path.parent)


@cli.command()
@data_options
@experiment_options
@handle_errors
def train(config, dataset, data, knn, debug, **options):
    """Ejecuta el entrenamiento para todas las semillas."""
    ctx = load_context(config, debug, dataset, data, knn)
    out_dir = options.pop("out_dir")
    experiment = resolve_experiment(ctx, **options)
    out = output_dir(ctx, out_dir, f"./runs/{experiment.mode}")

    graph, inputs = load_dataset(ctx.dataset)
    silos = build_partition(graph, experiment)
    echo_partition(silos)
    write_partition_file(silos, graph, out / "partition.tsv")

    manifest = RunManifest("train", config=experiment.to_dict())
    manifest.add_inputs(inputs + [config, experiment.partition_file])
    run_and_write(experiment, graph, silos, out, manifest)
    manifest.write(out)
    click.echo(f"✓ Resultados en {out}")


@cli.command()
@data_options
@experiment_options
@click.option("--modes", default="local,fedavg,fedgraph", show_default=True,
              help="Modos a comparar")
@handle_errors
def compare(config, dataset, data, knn, debug, modes, **options):
    """Compara modos sobre las mismas semillas con t-tests pareados contra fedgraph."""
    ctx = load_context(config, debug, dataset, data, knn)
    mode_list = _parse_list(modes, str, "--modes")
    unknown = [m for m in mode_list if m not in MODES]
    if unknown:
        raise click.BadParameter(f"modos desconocidos: {unknown}", param_hint="--modes")
    out_dir = options.pop("out_dir")
    options.pop("mode", None)
    base = resolve_experiment(ctx, **options)
    out = output_dir(ctx, out_dir, "./runs/compare")

    graph, inputs = load_dataset(ctx.dataset)
    silos = build_partition(graph, base)
    echo_partition(silos)
    write_partition_file(silos, graph, out / "partition.tsv")

    manifest = RunManifest("compare", config=base.to_dict())
    manifest.add_inputs(inputs + [config, base.partition_file])
    summaries = {}
    for mode in mode_list:
        experiment = base.with_overrides(mode=mode)
        summaries[mode] = run_and_write(experiment, graph, silos, out / mode, manifest)

    rows = []
    reference = summaries.get("fedgraph")
    for mode, summary in summaries.items():
        row = {"mode": mode}
        for name in ("f1", "precision", "recall"):
            row[f"{name}_mean"] = summary["final"][name]["mean"]
            row[f"{name}_std"] = summary["final"][name]["std"]
        row["t_stat"], row["p_value"] = np.nan, np.nan
        if reference is not None and mode != "fedgraph" and len(base.seeds) > 1:
            test = ttest_rel(reference["per_seed_f1"], summary["per_seed_f1"])
            row["t_stat"], row["p_value"] = float(test.statistic), float(test.pvalue)
        rows.append(row)

    table = pd.DataFrame(rows)
    table.to_csv(out / "compare.csv", index=False, float_format="%.6f")
    manifest.add_output("compare", "table", out / "compare.csv")
    manifest.write(out)
    click.echo("\n" + table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))


@cli.command()
@data_options
@experiment_options
@click.option("--lambdas", default="0.01,0.1,0.5", show_default=True, help="Valores de λ")
@click.option("--ks", default="2,3", show_default=True, help="Valores de K")
@handle_errors
def ablate(config, dataset, data, knn, debug, lambdas, ks, **options):
    """Barridos de λ y de K en modo fedgraph."""
    ctx = load_context(config, debug, dataset, data, knn)
    lambda_values = _parse_list(lambdas, float, "--lambdas")
    k_values = _parse_list(ks, int, "--ks")
    out_dir = options.pop("out_dir")
    options["mode"] = "fedgraph"
    base = resolve_experiment(ctx, **options)
    out = output_dir(ctx, out_dir, "./runs/ablation")

    graph, inputs = load_dataset(ctx.dataset)
    manifest = RunManifest("ablate", config=base.to_dict())
    manifest.add_inputs(inputs + [config, base.partition_file])

    rows = []
    silos = build_partition(graph, base)
    for lam in lambda_values:
        experiment = base.with_overrides(lam=lam)
        summary = run_and_write(experiment, graph, silos, out / f"lambda_{lam:g}", manifest)
        rows.append(_ablation_row("lambda", lam, silos, summary))
    for k in k_values:
        experiment = base.with_overrides(num_silos=k)
        k_silos = build_partition(graph, experiment)
        summary = run_and_write(experiment, graph, k_silos, out / f"k_{k}", manifest)
        rows.append(_ablation_row("k", k, k_silos, summary))

    table = pd.DataFrame(rows)
    table.to_csv(out / "ablation.csv", index=False, float_format="%.6f")
    manifest.add_output("ablation", "table", out / "ablation.csv")
    manifest.write(out)
    click.echo("\n" + table.to_string(index=False))


def _ablation_row(sweep: str, value: float, silos: SiloPartition, summary: Dict) -> Dict:
    return {
        "sweep": sweep,
        "value": value,
        "k": silos.num_silos,
        "cross_edge_fraction": silos.cross_edge_fraction,
        "f1_mean": summary["final"]["f1"]["mean"],
        "f1_std": summary["final"]["f1"]["std"],
    }


@cli.command()
@data_options
@click.option("--checkpoint", required=True, type=click.Path(exists=True),
              help="Checkpoint del modelo auditado")
@click.option("--partition-file", type=click.Path(exists=True), help="Partición del entrenamiento")
@click.option("--k", "num_silos", type=int, help="Número de silos K (si no hay archivo)")
@click.option("--attack", type=click.Choice(["inversion", "mia", "all"]), default="all",
              show_default=True)
@click.option("--nodes", type=click.Choice(["boundary", "all"]), default="boundary",
              show_default=True, help="Embeddings que ve el atacante de inversión")
@click.option("--shadow-models", type=int, default=1, show_default=True)
@click.option("--shadow-steps", type=int, default=150, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default="audit_report.json", show_default=True)
@handle_errors
def audit(config, dataset, data, knn, debug, checkpoint, partition_file, num_silos, attack,
          nodes, shadow_models, shadow_steps, seed, out):
    """Ejecuta las auditorías de privacidad sobre un modelo entrenado."""
    ctx = load_context(config, debug, dataset, data, knn)
    experiment = ctx.experiment.with_overrides(num_silos=num_silos).validate()
    model, metadata = load_checkpoint(checkpoint)
    graph, inputs = load_dataset(ctx.dataset)
    if model.in_dim != graph.feature_dim:
        raise ModelError(
            f"El checkpoint espera {model.in_dim} features y el dataset tiene {graph.feature_dim}"
        )

    silos = (
        read_partition_file(partition_file, graph)
        if partition_file
        else build_partition(graph, experiment)
    )
    mask = make_split(graph, split_rule(experiment))
    view = local_view(graph, silos, mask)

    report: Dict[str, Any] = {
        "checkpoint": str(checkpoint),
        "metadata": metadata,
        "config": experiment.to_dict(),
        "partition": silos.summary(),
    }
    if attack in ("inversion", "all"):
        if nodes == "boundary":
            rows = np.unique(np.concatenate(silos.boundary_sets))
            if rows.shape[0] < MIN_ROWS:
                raise AuditError(
                    f"Solo {rows.shape[0]} nodos frontera; usar --nodes all o más silos"
                )
        else:
            rows = np.arange(graph.num_nodes)
        embeddings, _, _ = model.forward(view)
        inversion = inversion_attack(embeddings[rows], view.features[rows], seed=seed)
        report["inversion"] = {**inversion.to_dict(), "nodes": nodes}
        click.echo(f"Inversión: R²={inversion.r2:.4f} MSE={inversion.mse:.4f} "
                   f"Pearson={inversion.pearson_mean:.4f}")
    if attack in ("mia", "all"):
        mia = membership_inference(
            model, view, mask, seed=seed, shadow_models=shadow_models,
            shadow_steps=shadow_steps, lr=experiment.lr, weight_decay=experiment.weight_decay,
        )
        report["membership"] = mia.to_dict()
        click.echo(f"Pertenencia: AUC={mia.auc:.4f}")

    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        json.dump(report, f, ensure_ascii=False, indent=2, sort_keys=True)
    manifest = RunManifest("audit", config=experiment.to_dict())
    manifest.add_inputs(inputs + [checkpoint, partition_file])
    manifest.add_output("audit", "report", out_path)
    manifest.write(out_path.parent)
    click.echo(f"✓ Reporte en {out_path}")


@cli.command("bench-pqc")
@click.option("-c", "--config", type=click.Path(exists=True), help="Archivo de configuración")
@click.option("--batch-sizes", default="1,10,100,1000", show_default=True)
@click.option("--dim", type=int, default=128, show_default=True, help="Dimensión del embedding")
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--provider", type=click.Choice(["kyber-py", "oqs"]), help="Proveedor ML-KEM")
@click.option("--out", type=click.Path(), default="pqc_bench.csv", show_default=True)
@click.option("--debug", is_flag=True, help="Habilitar modo debug")
@handle_errors
def bench_pqc(config, batch_sizes, dim, repeats, seed, provider, out, debug):
    """Mide latencia, throughput y expansión del túnel ML-KEM + AES-GCM."""
    ctx = load_context(config, debug)
    sizes = _parse_list(batch_sizes, int, "--batch-sizes")
    kem = create_kem_provider(provider or ctx.experiment.kem_provider)
    rows = measure_overhead(sizes, dim=dim, repeats=repeats, seed=seed, provider=kem)
    table = overhead_table(rows)

    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out_path, index=False, float_format="%.6f")
    click.echo(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
    click.echo(f"✓ Tabla en {out_path}")


def main():
    """Entry point del script `fgv`: errores de uso salen con código 1."""
    try:
        code = cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Abortado", err=True)
        sys.exit(EXIT_USAGE)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)
    sys.exit(code if isinstance(code, int) else EXIT_OK)


if __name__ == "__main__":
    main()
