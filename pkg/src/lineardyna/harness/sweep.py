"""Grid sweeps and run output files."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .config import ExperimentConfig, expand_sweep
from .curves import AggregatedCurve, LearningCurve, format_value, aggregate, emit_csv
from .runner import run_experiment


@dataclass
class CellResult:
    label: dict[str, str]
    config: ExperimentConfig
    curves: list[LearningCurve]
    aggregated: AggregatedCurve

    @property
    def n_diverged(self) -> int:
        return sum(c.diverged for c in self.curves)

    @property
    def mean_loss(self) -> float:
        """Loss averaged over all evaluation points (area under the mean curve)."""
        m = self.aggregated.mean
        return sum(m) / len(m) if m else math.inf

    @property
    def final(self) -> tuple[float, float]:
        a = self.aggregated
        return (a.mean[-1], a.stderr[-1]) if a.mean else (math.inf, math.inf)


def summarize(curves: list[LearningCurve]) -> AggregatedCurve:
    if len(curves) == 1:
        c = curves[0]
        pts = [] if c.diverged else c.episodes
        vals = [] if c.diverged else c.losses
        return AggregatedCurve(list(pts), list(vals), [math.nan] * len(pts), 0 if c.diverged else 1,
                               int(c.diverged))
    return aggregate(curves)


def write_run(cfg: ExperimentConfig, curves: list[LearningCurve], out_dir, stem: str) -> Path:
    """Write ``<stem>.csv`` and a ``<stem>.meta.json`` describing the run; returns the CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    agg = summarize(curves)
    csv_path = out / f"{stem}.csv"
    emit_csv(agg, csv_path)
    meta = {
        "config": cfg.to_text().splitlines(),
        "config_hash": cfg.config_hash(),
        "runs": [
            {
                "seed": c.seed,
                "diverged": c.diverged,
                "diverged_at": c.diverged_at,
                "trajectory_digest": c.trajectory_digest,
            }
            for c in curves
        ],
    }
    if cfg.env == "mountain-car" and not cfg.is_control:
        meta["eval_dataset"] = {
            "episodes": cfg.eval_episodes,
            "seed": cfg.eval_seed,
            "note": "desk-scale evaluation set; the original study used 200000 episodes",
        }
    with open(out / f"{stem}.meta.json", "w", encoding="ascii", newline="\n") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return csv_path


def _cell_stem(stem: str, label: dict[str, str]) -> str:
    parts = [f"{k.split('.')[-1]}={v}" for k, v in label.items()]
    return "__".join([stem, *parts]) if parts else stem


def run_sweep(text: str, out_dir=None, stem: str = "sweep", jobs: int = 1, **overrides) -> list[CellResult]:
    """Run every cell of a sweep config independently, optionally writing per-cell CSVs and a summary."""
    results = []
    for label, cfg in expand_sweep(text, **overrides):
        curves = run_experiment(cfg, jobs)
        results.append(CellResult(label, cfg, curves, summarize(curves)))
        if out_dir is not None:
            write_run(cfg, curves, out_dir, _cell_stem(stem, label))
    if out_dir is not None:
        write_summary(results, Path(out_dir) / f"{stem}.summary.csv")
    return results


def write_summary(results: list[CellResult], path: str | os.PathLike) -> None:
    keys = list(results[0].label) if results else []
    best = {id(r) for r in select_best(results).values() if r is not None}
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*keys, "algorithm", "alpha0", "n0", "mean_loss", "final_mean", "final_stderr",
                    "n_runs", "n_diverged", "best"])
        for r in results:
            fm, fs = r.final
            w.writerow([*(r.label[k] for k in keys), r.config.algorithm, format_value(r.config.alpha0),
                        format_value(r.config.n0), format_value(r.mean_loss), format_value(fm), format_value(fs),
                        r.aggregated.n_runs, r.n_diverged, int(id(r) in best)])


def select_best(results: list[CellResult]) -> dict[str, CellResult | None]:
    """Lowest mean-over-curve loss per algorithm among cells with no diverged run."""
    best: dict[str, CellResult | None] = {}
    for r in results:
        alg = r.config.algorithm
        best.setdefault(alg, None)
        if r.n_diverged or not r.aggregated.mean:
            continue
        cur = best[alg]
        if cur is None or r.mean_loss < cur.mean_loss:
            best[alg] = r
    return best
