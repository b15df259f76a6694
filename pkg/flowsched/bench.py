"""
BENCHMARK HARNESS
Runs algorithms over generated or stored instances and writes a CSV plus a
Markdown summary. Rows keep instance order whatever the worker count.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from .costs import exact_text, render
from .errors import FlowschedError
from .gen import GenSpec, gen_random
from .models import CostModel, Instance
from .runner import run_algorithm
from .storage import load_instance

logger = logging.getLogger(__name__)

COLUMNS = ["instance", "seed", "algo", "p", "epsilon", "objective", "oracle", "ratio", "millis", "cells"]


@dataclass(frozen=True)
class BenchTask:
    name: str
    seed: Optional[int]
    instance: Instance
    algorithm: str
    model: CostModel
    with_oracle: bool
    migration: bool = True
    delta: Optional[Fraction] = None


def generated_tasks(spec: GenSpec, count: int, algorithms: Sequence[str], model: CostModel,
                    with_oracle: bool, migration: bool = True,
                    delta: Optional[Fraction] = None) -> List[BenchTask]:
    tasks = []
    for k in range(count):
        seed = spec.seed + k
        instance = gen_random(replace(spec, seed=seed))
        for algorithm in algorithms:
            tasks.append(BenchTask(f"gen-{seed}", seed, instance, algorithm, model, with_oracle, migration, delta))
    return tasks


def directory_tasks(directory: Path, algorithms: Sequence[str], model: CostModel,
                    with_oracle: bool, migration: bool = True,
                    delta: Optional[Fraction] = None) -> List[BenchTask]:
    tasks = []
    for path in sorted(Path(directory).glob("*.json")):
        instance = load_instance(path)
        for algorithm in algorithms:
            tasks.append(BenchTask(path.stem, None, instance, algorithm, model, with_oracle, migration, delta))
    return tasks


def run_task(task: BenchTask) -> Dict[str, object]:
    row: Dict[str, object] = {
        "instance": task.name,
        "seed": "" if task.seed is None else task.seed,
        "algo": task.algorithm,
        "p": str(task.model.exponent),
        "epsilon": str(task.model.epsilon),
        "objective": "",
        "oracle": "",
        "ratio": "",
        "millis": "",
        "cells": "",
    }
    try:
        report = run_algorithm(task.algorithm, task.instance, task.model, migration=task.migration,
                               delta=task.delta, with_oracle=task.with_oracle)
    except (FlowschedError, ValueError) as e:
        logger.warning(f"⚠️ {task.algorithm} failed on {task.name}: {e}")
        row["objective"] = f"ERROR:{type(e).__name__}"
        return row
    row["objective"] = exact_text(report.objective)
    if report.oracle is not None:
        row["oracle"] = exact_text(report.oracle)
        row["ratio"] = render(report.ratio)
    row["millis"] = f"{report.wall_ms:.3f}"
    row["cells"] = report.cells
    return row


def run_bench(tasks: Sequence[BenchTask], workers: int = 1) -> pd.DataFrame:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_task, tasks))
    else:
        rows = [run_task(task) for task in tasks]
    logger.info(f"🚀 Benchmark finished: {len(rows)} runs")
    return pd.DataFrame(rows, columns=COLUMNS)


def summarize(table: pd.DataFrame) -> pd.DataFrame:
    """Max and mean oracle ratio and run count per algorithm"""
    if table.empty:
        return pd.DataFrame(columns=["algo", "runs", "failures", "max_ratio", "mean_ratio"])
    frame = table.copy()
    frame["ratio_value"] = pd.to_numeric(frame["ratio"], errors="coerce")
    frame["failed"] = frame["objective"].astype(str).str.startswith("ERROR:")
    grouped = frame.groupby("algo", sort=True)
    summary = pd.DataFrame({
        "runs": grouped.size(),
        "failures": grouped["failed"].sum().astype(int),
        "max_ratio": grouped["ratio_value"].max(),
        "mean_ratio": grouped["ratio_value"].mean(),
    }).reset_index()
    return summary


def _stringify(value: object) -> str:
    if isinstance(value, float):
        return "" if value != value else f"{value:.6g}"
    return str(value)


def _rendered(table: pd.DataFrame) -> pd.DataFrame:
    """Fixed-point view of the exact objective and oracle columns"""
    def _cell(value: object) -> object:
        text = str(value)
        if not text or text == "nan" or text.startswith("ERROR:"):
            return value
        return render(Fraction(text))

    frame = table.copy()
    for column in ("objective", "oracle"):
        frame[column] = frame[column].map(_cell)
    return frame


def _compute_column_widths(columns: Iterable[str], rows: Iterable[Iterable[str]]) -> List[int]:
    widths = [len(col) for col in columns]
    for row in rows:
        for idx, cell in enumerate(row):
            widths[idx] = max(widths[idx], len(cell))
    return widths


def dataframe_to_markdown(table: pd.DataFrame) -> str:
    if table.empty:
        return "No records available."

    columns = [str(col) for col in table.columns]
    string_rows = [[_stringify(row[col]) for col in table.columns] for _, row in table.iterrows()]
    widths = _compute_column_widths(columns, string_rows)

    def _format_row(values: Iterable[str]) -> str:
        cells = [f" {value.ljust(widths[idx])} " for idx, value in enumerate(values)]
        return "|" + "|".join(cells) + "|"

    separator = "|" + "|".join("-" * (width + 2) for width in widths) + "|"
    return "\n".join([_format_row(columns), separator, *(_format_row(row) for row in string_rows)])


def export_results(table: pd.DataFrame, csv_path: Optional[Path] = None,
                   markdown_path: Optional[Path] = None) -> None:
    if csv_path is not None:
        Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(csv_path, index=False)
        logger.info(f"✅ Wrote {len(table)} rows to {csv_path}")
    if markdown_path is not None:
        lines = ["# Benchmark Summary", "", dataframe_to_markdown(summarize(table)), "",
                 "## Runs", "", dataframe_to_markdown(_rendered(table)), ""]
        Path(markdown_path).parent.mkdir(parents=True, exist_ok=True)
        Path(markdown_path).write_text("\n".join(lines), encoding="utf-8")
        logger.info(f"✅ Wrote summary to {markdown_path}")
