"""
(alpha, beta, repeat) sweeps.

Cells run on a thread pool but rows are consumed in key order, so the
rows file grows deterministically and a partial run is still usable.
"""

import logging
import os
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from npga.models import RunConfig
from npga.runner.experiment import Splits, load_splits, run_experiment
from npga.settings import get_max_workers

logger = logging.getLogger(__name__)

ROWS_FILE = "grid_rows.csv"
SUMMARY_FILE = "grid_summary.csv"
ROW_COLUMNS = [
    "alpha",
    "beta",
    "repeat",
    "seed",
    "test_error",
    "test_accuracy",
    "val_accuracy",
    "train_accuracy",
    "status",
    "error",
]

CellKey = Tuple[float, float, int]


@dataclass
class GridResult:
    rows: pd.DataFrame
    summary: pd.DataFrame
    rows_path: Optional[str] = None
    summary_path: Optional[str] = None

    @property
    def failed(self) -> int:
        return int((self.rows["status"] != "ok").sum())


def grid_keys(config: RunConfig) -> List[CellKey]:
    return [(a, b, r) for a in config.grid.alphas for b in config.grid.betas for r in range(config.grid.repeats)]


def cell_config(config: RunConfig, key: CellKey) -> RunConfig:
    """Config for one cell; repeats shift the seed, alpha and beta are overridden."""
    alpha, beta, repeat = key
    model = config.model.model_copy(update={"alpha": alpha, "beta": beta, "seed": config.model.seed + repeat})
    # re-validate so an override cannot slip past the model invariants
    return RunConfig.model_validate({**config.model_dump(), "model": model.model_dump()})


def run_cell(config: RunConfig, key: CellKey, splits: Optional[Splits] = None) -> Dict:
    alpha, beta, repeat = key
    cfg = cell_config(config, key)
    row = {"alpha": alpha, "beta": beta, "repeat": repeat, "seed": cfg.model.seed}
    try:
        metrics = run_experiment(cfg, splits).metrics
        row.update({k: metrics.get(k, np.nan) for k in ("test_error", "test_accuracy", "val_accuracy", "train_accuracy")})
        row.update(status="ok", error="")
    except Exception as e:
        logger.error(f"Grid cell alpha={alpha} beta={beta} repeat={repeat} failed: {e}")
        row.update(test_error=np.nan, test_accuracy=np.nan, val_accuracy=np.nan, train_accuracy=np.nan)
        row.update(status="error", error=f"{type(e).__name__}: {e}")
    return row


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Mean/std of the per-repeat results for each (alpha, beta); failed cells are left out."""
    ok = rows[rows["status"] == "ok"]
    grouped = ok.groupby(["alpha", "beta"], sort=True)
    summary = grouped.agg(
        test_error_mean=("test_error", "mean"),
        test_error_std=("test_error", "std"),
        test_accuracy_mean=("test_accuracy", "mean"),
        repeats=("test_error", "size"),
    ).reset_index()
    return summary


def _append_row(path: str, row: Dict) -> None:
    frame = pd.DataFrame([row], columns=ROW_COLUMNS)
    frame.to_csv(path, mode="a", header=not os.path.exists(path), index=False, float_format="%.17g")


def run_grid(
    config: RunConfig,
    out_dir: Optional[str] = None,
    max_workers: Optional[int] = None,
    on_row: Optional[Callable[[Dict], None]] = None,
) -> GridResult:
    """Run every cell; rows are appended to `<out_dir>/grid_rows.csv` as they complete in key order."""
    keys = grid_keys(config)
    workers = max_workers or get_max_workers()
    rows_path = summary_path = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        rows_path = os.path.join(out_dir, ROWS_FILE)
        summary_path = os.path.join(out_dir, SUMMARY_FILE)
        if os.path.exists(rows_path):
            os.remove(rows_path)

    # splits depend only on the repeat's seed; cells of one repeat share them read-only
    split_cache: Dict[int, Optional[Splits]] = {}
    for repeat in range(config.grid.repeats):
        seed = config.model.seed + repeat
        try:
            split_cache[repeat] = load_splits(config.data, seed)
        except Exception as e:
            logger.error(f"Loading data for repeat {repeat} failed: {e}")
            split_cache[repeat] = None

    logger.info(f"Running {len(keys)} grid cells on {workers} worker(s)")
    rows = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures: List[Tuple[CellKey, Future]] = [
            (key, executor.submit(run_cell, config, key, split_cache[key[2]])) for key in keys
        ]
        for i, (key, future) in enumerate(futures):
            row = future.result()
            rows.append(row)
            if rows_path is not None:
                _append_row(rows_path, row)
            if on_row is not None:
                on_row(row)
            logger.debug(f"Cell {i + 1}/{len(keys)} {key}: {row['status']}")

    frame = pd.DataFrame(rows, columns=ROW_COLUMNS)
    summary = summarize(frame)
    if summary_path is not None:
        summary.to_csv(summary_path, index=False, float_format="%.17g")
    return GridResult(rows=frame, summary=summary, rows_path=rows_path, summary_path=summary_path)
