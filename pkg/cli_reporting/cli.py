"""`asymprune` command line.

Every subcommand accepts `--seed`, `--config` and `--out`. Failures print a single line
`error code=<code> message="<text>"` on stderr and exit 1; usage errors exit 2.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import click
import orjson
from rich.console import Console
from rich.table import Table

from cli_reporting.schemas import Command
from utils.errors import AsymPruneError, ConfigError
from utils.logging import setup_from_settings

logger = logging.getLogger(__name__)

console = Console()


_COMMON_OPTIONS = [
    click.option("--seed", type=int, default=None, help="Overrides the config seed"),
    click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Experiment YAML file"),
    click.option("--out", type=click.Path(), default=None, help="Output file or directory"),
]


def common_options(func):
    for option in reversed(_COMMON_OPTIONS):
        func = option(func)
    return func


def _experiment(config_path: Optional[str], seed: Optional[int], out: Optional[str]):
    from stf_pipeline.experiment_config import load_experiment_config

    if not config_path:
        raise ConfigError("this command needs --config", field="config")
    config = load_experiment_config(config_path)
    update = {}
    if seed is not None:
        update["seed"] = seed
    if out is not None:
        update["output_dir"] = out
    return config.model_copy(update=update) if update else config


def _pick_scale(config, scales, tag: Optional[str]):
    if tag is None:
        return scales[0]
    for scale in scales:
        if scale.tag == tag:
            return scale
    raise ConfigError(f"no scale {tag!r} in {config.name}", field="scale")


def _write_json(path: str, payload) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(orjson.dumps(payload, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2))


@click.group()
def cli():
    """Asymmetric encoder/decoder pruning experiments on toy encoder-decoders."""
    setup_from_settings()


@cli.command(Command.TRAIN.value)
@common_options
@click.option("--scale", "scale_tag", default=None, help="Scale tag from the config (default: first)")
def train(seed, config_path, out, scale_tag):
    """Train one baseline and save its checkpoint."""
    from seq2seq_model.checkpoint import save_checkpoint
    from seq2seq_model.init import init_model
    from stf_pipeline.training import token_accuracy
    from stf_pipeline.training import train as train_model
    from utils.rng import derive_seed

    config = _experiment(config_path, seed, None)
    corpus = config.load_corpus()
    scale = _pick_scale(config, config.scale_configs(len(corpus.vocab)), scale_tag)
    hyper = config.hyper()
    weights = init_model(scale.config, seed=derive_seed(hyper.seed, "init", scale.tag))
    result = train_model(weights, corpus, hyper, label=scale.tag)
    path = Path(out) if out else config.run_dir() / "checkpoints" / f"{scale.tag}-baseline.ckpt"
    save_checkpoint(result.weights, path)
    accuracy = token_accuracy(result.weights, corpus.valid) if corpus.valid else float("nan")
    console.print(f"{scale.tag}: {result.steps} steps, valid token accuracy {accuracy:.4f} -> {path}")


@cli.command(Command.PRUNE.value)
@common_options
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Model to prune")
@click.option("--enc", "enc_keep", required=True, type=int, help="Encoder layers to keep")
@click.option("--dec", "dec_keep", required=True, type=int, help="Decoder layers to keep")
@click.option("--strategy", type=click.Choice(["EvenlySpaced", "FirstK", "LastK"]), default="EvenlySpaced")
def prune(seed, config_path, out, checkpoint, enc_keep, dec_keep, strategy):
    """Remove whole layers from a checkpoint."""
    from seq2seq_model.checkpoint import load_checkpoint, save_checkpoint
    from structural_pruning.pruning import prune as prune_weights
    from structural_pruning.schemas import PruneSpec

    if not out:
        raise ConfigError("prune needs --out for the pruned checkpoint", field="out")
    spec = PruneSpec(enc_keep=enc_keep, dec_keep=dec_keep, strategy=strategy)
    save_checkpoint(prune_weights(load_checkpoint(checkpoint), spec), out)
    console.print(f"{spec.label()} -> {out}")


@cli.command(Command.FINETUNE.value)
@common_options
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="Trained baseline")
@click.option("--enc", "enc_keep", required=True, type=int)
@click.option("--dec", "dec_keep", required=True, type=int)
@click.option("--scale", "scale_tag", default="model", help="Tag used in the record name")
def finetune(seed, config_path, out, checkpoint, enc_keep, dec_keep, scale_tag):
    """Shrink a trained baseline, re-fine-tune, evaluate, benchmark and record it."""
    from seq2seq_model.checkpoint import load_checkpoint
    from stf_pipeline.agent import shrink_then_finetune
    from structural_pruning.schemas import PruneSpec

    config = _experiment(config_path, seed, out)
    corpus = config.load_corpus()
    spec = PruneSpec(enc_keep=enc_keep, dec_keep=dec_keep, strategy=config.strategy)
    record = shrink_then_finetune(
        load_checkpoint(checkpoint), spec, corpus, config.hyper(),
        scale_tag=scale_tag, run_name=config.name, finetune=config.finetune,
        evaluation=config.evaluation, bench=config.bench, output_dir=str(config.run_dir()),
    )
    recall, speedup = record.comparison.recall_pct, record.comparison.speedup
    recall_text = f"{recall:.2f}%" if recall is not None else "-"
    speedup_text = f"{speedup:.2f}" if speedup is not None else "-"
    console.print(f"{record.name}: R-2 {record.scores.r2.f1:.4f}, R {recall_text}, speedup {speedup_text}")


@cli.command(Command.GENERATE.value)
@common_options
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False))
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False), help="Sources, one per line (first TSV column)")
@click.option("--max-new-tokens", type=int, default=64)
@click.option("--batch-size", type=int, default=16)
def generate(seed, config_path, out, checkpoint, input_path, max_new_tokens, batch_size):
    """Greedy summaries for every source line; the vocabulary comes from the config's corpus."""
    from corpus.io import detokenize, load_column
    from seq2seq_model.checkpoint import load_checkpoint
    from stf_pipeline.evaluation import summarize

    config = _experiment(config_path, seed, None)
    vocab = config.load_corpus().vocab
    sources = [vocab.encode(words) for words in load_column(input_path, column=0)]
    summaries, _ = summarize(load_checkpoint(checkpoint), sources, max_new_tokens=max_new_tokens, batch_size=batch_size)
    lines = [detokenize(vocab.decode(summary)) for summary in summaries]
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    else:
        for line in lines:
            click.echo(line)


@cli.command(Command.EVALUATE.value)
@common_options
@click.option("--ref", "ref_path", required=True, type=click.Path(dir_okay=False), help="References (last TSV column)")
@click.option("--hyp", "hyp_path", required=True, type=click.Path(dir_okay=False), help="Hypotheses (last TSV column)")
def evaluate(seed, config_path, out, ref_path, hyp_path):
    """ROUGE-1/2/L/Lsum between two aligned files."""
    from corpus.io import load_column
    from corpus.schemas import Vocabulary
    from eval_metrics.comparison import evaluate_generations

    references = load_column(ref_path)
    hypotheses = load_column(hyp_path)
    vocab = Vocabulary.from_words(word for text in references + hypotheses for word in text)
    scores = evaluate_generations(
        [vocab.encode(h) for h in hypotheses], [vocab.encode(r) for r in references], separator=vocab.newline_id,
    )
    table = Table(title="ROUGE")
    for column in ("metric", "precision", "recall", "f1"):
        table.add_column(column)
    for name, prf in (("R-1", scores.r1), ("R-2", scores.r2), ("R-L", scores.rl), ("R-Lsum", scores.rlsum)):
        table.add_row(name, f"{prf.precision:.4f}", f"{prf.recall:.4f}", f"{prf.f1:.4f}")
    console.print(table)
    if out:
        _write_json(out, scores.model_dump(mode="json"))


@cli.command(Command.BENCHMARK.value)
@common_options
@click.option("--checkpoint", "checkpoints", required=True, multiple=True, type=click.Path(dir_okay=False), help="First one is the baseline")
@click.option("--batch-size", "batch_sizes", multiple=True, type=int, help="Repeatable; default 1, 8 and 16")
@click.option("--runs", type=int, default=None, help="Timed runs per report (default 7)")
@click.option("--warmup", type=int, default=None)
@click.option("--size", type=int, default=None, help="Workload sequences")
@click.option("--input-len", type=int, default=None)
@click.option("--new-tokens", type=int, default=None)
@click.option("--stragglers", is_flag=True, help="One long sequence per batch, the rest stop early")
@click.option("--quick", is_flag=True, help="Smoke-test defaults: batch size 1, 3 runs, short workload")
def benchmark(seed, config_path, out, checkpoints, batch_sizes, runs, warmup, size, input_len, new_tokens, stragglers, quick):
    """Latency of each checkpoint on one shared random workload, with speedups vs the first."""
    from bench_harness.timing import measure_all, speedup_table
    from bench_harness.workload import random_workload, straggler_lengths
    from seq2seq_model.checkpoint import load_checkpoint
    from stf_pipeline.schemas import BenchSettings

    given = {
        "batch_sizes": list(batch_sizes) or None, "runs": runs, "warmup": warmup, "size": size,
        "input_len": input_len, "new_tokens": new_tokens,
    }
    bench = BenchSettings(stragglers=stragglers, quick=quick, **{k: v for k, v in given.items() if v is not None})

    models = [load_checkpoint(path) for path in checkpoints]
    forced = straggler_lengths(bench.new_tokens, max(bench.batch_sizes)) if bench.stragglers else None
    workload = random_workload(
        models[0].config.vocab_size, seed=seed or 0, size=bench.size, input_len=bench.input_len,
        new_tokens=bench.new_tokens, forced_lengths=forced,
    )
    options = {"runs": bench.runs, "warmup": bench.warmup}
    reports = [
        measure_all(m, workload, bench.batch_sizes, label=Path(p).stem, **options) for m, p in zip(models, checkpoints)
    ]

    table = Table(title="Latency")
    for column in ("checkpoint", "layers", "BS", "mean ms", "std ms", "speedup"):
        table.add_column(column)
    for path, model, by_batch in zip(checkpoints, models, reports):
        speedups = speedup_table(reports[0], by_batch)
        for bs, report in sorted(by_batch.items()):
            table.add_row(
                Path(path).stem, f"{model.config.n_enc_layers}+{model.config.n_dec_layers}", str(bs),
                f"{report.mean_ms:.2f}", f"{report.std_ms:.2f}", f"{speedups[bs]:.2f}",
            )
    console.print(table)
    if out:
        _write_json(out, {
            Path(path).stem: {str(bs): r.model_dump(mode="json") for bs, r in by_batch.items()}
            for path, by_batch in zip(checkpoints, reports)
        })


@cli.command(Command.GRID.value)
@common_options
def grid(seed, config_path, out):
    """Baseline and every pruned variant for each scale, then the report."""
    from stf_pipeline.agent import run_experiment

    config = _experiment(config_path, seed, out)
    records = run_experiment(config)
    console.print(f"{len(records)} records in {config.run_dir()}")


@cli.command(Command.SWEEP.value)
@common_options
def sweep(seed, config_path, out):
    """Train every scale and report quality gain and latency against the smallest."""
    from cli_reporting.reports import write_report
    from stf_pipeline.agent import run_experiment_sweep

    config = _experiment(config_path, seed, out)
    result = run_experiment_sweep(config)
    table = Table(title="Scale sweep")
    for column in ("scale", "params", "R-2", "gain %", "GenL"):
        table.add_column(column)
    for point in result.points:
        gain = f"{point.gain_pct:.2f}" if point.gain_pct is not None else "-"
        table.add_row(point.scale, str(point.params), f"{point.r2_f1:.4f}", gain, f"{point.genl:.2f}")
    console.print(table)
    write_report(config.run_dir())


@cli.command(Command.REPORT.value)
@common_options
@click.option("--runs", "run_dir", required=True, type=click.Path(file_okay=False), help="Run directory with records/")
def report(seed, config_path, out, run_dir):
    """Write report.csv, tables.md and curve files for a run directory."""
    from cli_reporting.reports import write_report

    bundle = write_report(run_dir, out_dir=out, console=console)
    console.print(f"{bundle.n_records} records -> {bundle.report_csv.parent}")


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code instead of exiting."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="asymprune", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except AsymPruneError as exc:
        logger.debug(f"command failed: {exc.message}")
        click.echo(exc.one_line(), err=True)
        return 1
    return result if isinstance(result, int) else 0
