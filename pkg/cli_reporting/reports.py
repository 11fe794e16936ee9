"""Tables and curve data for a run directory.

Every cell is formatted from a stored record field (2 decimals for milliseconds,
percentages, speedups and GenL; 4 for ROUGE), so files are byte-identical for identical
records and nothing is recomputed at print time.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import orjson
import pandas as pd
from rich.console import Console
from rich.table import Table

from bench_harness.cost_model import fit_cost_model
from bench_harness.schemas import Measurement
from bench_harness.store import ResultsStore
from cli_reporting.schemas import ReportBundle
from eval_metrics.schemas import format_score
from stf_pipeline.nodes.scale_sweep import SWEEP_FILE
from stf_pipeline.schemas import ExperimentRecord, ScaleSweep
from utils.errors import AsymPruneError, RecordError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REPORT_COLUMNS = [
    "scale", "l_enc", "l_dec", "batch_size", "mean_ms", "std_ms", "speedup", "r2_score", "recall_pct", "impact_pct", "genl",
]
SERIES = ("decoder", "encoder", "both")
_SERIES_RANK = {"baseline": 0, "decoder": 1, "encoder": 2, "both": 3}


def _f2(value: Optional[float]) -> str:
    return f"{value:.2f}" if value is not None else ""


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def ordered(records: Sequence[ExperimentRecord]) -> List[ExperimentRecord]:
    """Grid order within each scale: baseline, decoder-only, encoder-only, both; deepest first."""
    return sorted(
        records,
        key=lambda r: (r.scale, _SERIES_RANK[r.series], -r.spec.enc_keep, -r.spec.dec_keep, r.spec.strategy.value),
    )


def load_records(run_dir: PathLike) -> List[ExperimentRecord]:
    store = ResultsStore(run_dir)
    records = [ExperimentRecord.model_validate(store.read(name)) for name in store.names()]
    if not records:
        raise RecordError(f"no records under {store.records_dir}")
    return ordered(records)


def report_frame(records: Sequence[ExperimentRecord]) -> pd.DataFrame:
    rows = []
    for record in ordered(records):
        base = {
            "scale": record.scale,
            "l_enc": record.spec.enc_keep,
            "l_dec": record.spec.dec_keep,
            "r2_score": format_score(record.scores.r2.f1),
            "recall_pct": _f2(record.comparison.recall_pct),
            "impact_pct": _f2(record.comparison.impact_pct),
            "genl": _f2(record.scores.genl),
        }
        if not record.latency:
            rows.append({**base, "batch_size": "", "mean_ms": "", "std_ms": "", "speedup": ""})
            continue
        for bs in sorted(record.latency):
            report = record.latency[bs]
            speedup = record.speedups.get(bs)
            rows.append({
                **base,
                "batch_size": str(bs),
                "mean_ms": _f2(report.mean_ms),
                "std_ms": _f2(report.std_ms),
                "speedup": _f2(speedup) if speedup is not None else "",
            })
    return pd.DataFrame(rows, columns=REPORT_COLUMNS, dtype=str)


def _markdown(header: List[str], rows: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join(["---"] * len(header)) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return lines


def _cost_model_lines(records: Sequence[ExperimentRecord]) -> List[str]:
    points = [
        Measurement(l_enc=r.spec.enc_keep, l_dec=r.spec.dec_keep, steps=rep.steps, batch_size=bs, mean_ms=rep.mean_ms)
        for r in records
        for bs, rep in r.latency.items()
    ]
    if not points:
        return []
    try:
        model = fit_cost_model(points)
    except AsymPruneError as exc:
        logger.warning(f"Latency model skipped: {exc.message}")
        return []
    rows = [
        [str(bs), f"{c.alpha:.4f}", f"{c.beta_enc:.4f}", f"{c.beta_dec:.6f}", format_score(c.r2)]
        for bs, c in sorted(model.by_batch.items())
    ]
    return ["", "Latency model: ms = alpha + beta_enc * l_enc + beta_dec * l_dec * steps", ""] + _markdown(
        ["BS", "alpha", "beta_enc", "beta_dec", "R²"], rows
    )


def markdown_tables(records: Sequence[ExperimentRecord]) -> str:
    lines: List[str] = []
    by_scale: Dict[str, List[ExperimentRecord]] = {}
    for record in ordered(records):
        by_scale.setdefault(record.scale, []).append(record)

    for scale, group in by_scale.items():
        lines += [f"## {scale}", ""]
        quality = [
            [
                str(r.spec.enc_keep), str(r.spec.dec_keep),
                format_score(r.scores.r1.f1), format_score(r.scores.r2.f1),
                format_score(r.scores.rl.f1), format_score(r.scores.rlsum.f1),
                _f2(r.scores.genl), _f2(r.comparison.impact_pct),
            ]
            for r in group
        ]
        lines += _markdown(["l_enc", "l_dec", "R-1", "R-2", "R-L", "RSL", "GenL", "Impact"], quality)

        batch_sizes = sorted({bs for r in group for bs in r.latency})
        if batch_sizes:
            header = ["l_enc", "l_dec"]
            for bs in batch_sizes:
                header += [f"BS{bs} ms", f"BS{bs} speedup"]
            rows = []
            for r in group:
                row = [str(r.spec.enc_keep), str(r.spec.dec_keep)]
                for bs in batch_sizes:
                    report = r.latency.get(bs)
                    speedup = r.speedups.get(bs)
                    row.append(f"{_f2(report.mean_ms)} ± {_f2(report.std_ms)}" if report else "")
                    row.append(_f2(speedup) if speedup is not None else "")
                rows.append(row)
            lines += [""] + _markdown(header, rows)
            lines += _cost_model_lines(group)
        lines.append("")
    return "\n".join(lines)


def rich_table(records: Sequence[ExperimentRecord]) -> Table:
    table = Table(title="Shrink-then-fine-tune results")
    for column in ("scale", "l_enc", "l_dec", "R-2", "R %", "Impact %", "GenL", "Speedup BS1"):
        table.add_column(column, justify="left" if column == "scale" else "right")
    for r in ordered(records):
        speedup = r.speedups.get(1)
        table.add_row(
            r.scale, str(r.spec.enc_keep), str(r.spec.dec_keep), format_score(r.scores.r2.f1),
            _f2(r.comparison.recall_pct), _f2(r.comparison.impact_pct), _f2(r.scores.genl),
            _f2(speedup) if speedup is not None else "-",
        )
    return table


def _degradation(record: ExperimentRecord) -> Optional[float]:
    recall = record.comparison.recall_pct
    return round(100.0 - recall, 4) if recall is not None else None


def speedup_curves(records: Sequence[ExperimentRecord]) -> pd.DataFrame:
    """Per scale, the decoder-only, encoder-only and both series of (speedup, degradation) points.

    Each series starts from the baseline point (1.0, 0.0) and is sorted by speedup.
    """
    rows = []
    for record in ordered(records):
        if 1 not in record.speedups:
            raise RecordError(f"record {record.name} has no batch-size-1 latency")
        for series in (SERIES if record.series == "baseline" else (record.series,)):
            rows.append({
                "scale": record.scale,
                "series": series,
                "l_enc": record.spec.enc_keep,
                "l_dec": record.spec.dec_keep,
                "speedup": round(record.speedups[1], 4),
                "degradation_pct": _degradation(record),
            })
    frame = pd.DataFrame(rows, columns=["scale", "series", "l_enc", "l_dec", "speedup", "degradation_pct"])
    frame["series_rank"] = frame["series"].map({name: i for i, name in enumerate(SERIES)})
    frame = frame.sort_values(["scale", "series_rank", "speedup", "l_enc", "l_dec"], kind="mergesort")
    frame = frame.drop(columns="series_rank").reset_index(drop=True)
    frame["speedup"] = frame["speedup"].map(lambda v: f"{v:.4f}")
    frame["degradation_pct"] = frame["degradation_pct"].map(lambda v: f"{v:.4f}" if pd.notna(v) else "")
    return frame


def genl_curves(records: Sequence[ExperimentRecord]) -> pd.DataFrame:
    baseline_genl = {r.scale: r.scores.genl for r in records if r.series == "baseline"}
    rows = []
    for record in ordered(records):
        base = baseline_genl.get(record.scale)
        for series in (SERIES if record.series == "baseline" else (record.series,)):
            rows.append({
                "scale": record.scale,
                "series": series,
                "l_enc": record.spec.enc_keep,
                "l_dec": record.spec.dec_keep,
                "genl": _f2(record.scores.genl),
                "genl_delta": _f2(record.scores.genl - base) if base is not None else "",
            })
    return pd.DataFrame(rows, columns=["scale", "series", "l_enc", "l_dec", "genl", "genl_delta"])


def scale_curves(sweep: ScaleSweep) -> pd.DataFrame:
    batch_sizes = sorted({bs for p in sweep.points for bs in p.latency_ms})
    rows = []
    for point in sweep.points:
        row = {
            "scale": point.scale,
            "params": point.params,
            "r2_score": format_score(point.r2_f1),
            "gain_pct": _f2(point.gain_pct),
            "genl": _f2(point.genl),
        }
        for bs in batch_sizes:
            row[f"bs{bs}_ms"] = _f2(point.latency_ms[bs]) if bs in point.latency_ms else ""
            row[f"bs{bs}_impact"] = _f2(point.latency_impact[bs]) if bs in point.latency_impact else ""
        rows.append(row)
    return pd.DataFrame(rows)


def emit_curves(records: Sequence[ExperimentRecord], out_dir: PathLike) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return {
        "speedup": _write_csv(speedup_curves(records), out / "curves_speedup.csv"),
        "genl": _write_csv(genl_curves(records), out / "curves_genl.csv"),
    }


def load_sweep(run_dir: PathLike) -> Optional[ScaleSweep]:
    path = Path(run_dir) / SWEEP_FILE
    if not path.exists():
        return None
    try:
        return ScaleSweep.model_validate(orjson.loads(path.read_bytes()))
    except orjson.JSONDecodeError as exc:
        raise RecordError(f"sweep file {path} is corrupt: {exc}") from exc


def write_report(run_dir: PathLike, out_dir: Optional[PathLike] = None, console: Optional[Console] = None) -> ReportBundle:
    """Write report.csv, tables.md and curve files for every record of a run."""
    out = Path(out_dir or run_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweep = load_sweep(run_dir)
    store = ResultsStore(run_dir)
    records = load_records(run_dir) if store.names() or sweep is None else []

    curves: Dict[str, Path] = {}
    if records:
        if all(r.latency for r in records):
            curves.update(emit_curves(records, out))
        else:
            curves["genl"] = _write_csv(genl_curves(records), out / "curves_genl.csv")
            logger.warning("Speedup curves skipped: some records carry no latency")
    if sweep is not None:
        curves["scale"] = _write_csv(scale_curves(sweep), out / "curves_scale.csv")

    bundle = ReportBundle(
        report_csv=_write_csv(report_frame(records), out / "report.csv"),
        tables_md=out / "tables.md",
        curves=curves,
        n_records=len(records),
        sweep=(Path(run_dir) / SWEEP_FILE) if sweep is not None else None,
    )
    bundle.tables_md.write_text(markdown_tables(records), encoding="utf-8")
    if records:
        (console or Console()).print(rich_table(records))
    logger.info(f"Report for {len(records)} records written to {out}")
    return bundle
