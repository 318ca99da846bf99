"""Grid runner: ground truths x model variants x seeds."""

import csv
import dataclasses
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import kernels
from ..activations import CATALOG, Activation
from ..model import DivergenceError, EpochRecord, Network, TrainConfig, TrainTrace, evaluate, train
from ..routing import RoutedLayer
from ..synthdata import Dataset, DatasetSpec, generate, split
from .svg import Chart

TRACE_COLUMNS = ["epoch", "task_loss", "kl_loss", "total_loss", "tau"] + [f"p_{a.key}" for a in CATALOG]


@dataclass(frozen=True)
class ModelSpec:
    """A routed model with KL weight ``alpha``, or a fixed-activation baseline."""

    fixed: Activation = None
    alpha: float = 0.0

    @classmethod
    def routed(cls, alpha: float) -> "ModelSpec":
        return cls(None, float(alpha))

    @property
    def is_routed(self) -> bool:
        return self.fixed is None

    @property
    def name(self) -> str:
        return f"flex-a{self.alpha:g}" if self.is_routed else f"fixed-{self.fixed.key}"

    @property
    def label(self) -> str:
        return f"Flex-Act (alpha={self.alpha:g})" if self.is_routed else f"{self.fixed.label} Model"


DEFAULT_MODELS = (ModelSpec.routed(0.3), ModelSpec.routed(0.0)) + tuple(ModelSpec(a) for a in CATALOG)


@dataclass(frozen=True)
class DataConfig:
    scale: float = 5.0
    n_train: int = 2048
    n_test: int = 512
    d_in: int = 4


@dataclass(frozen=True)
class Cell:
    truth: Activation
    model: ModelSpec
    seed: int

    @property
    def run_id(self) -> str:
        return f"{self.truth.key}_{self.model.name}_{self.seed}"


@dataclass
class ExperimentSpec:
    truths: tuple = CATALOG
    models: tuple = DEFAULT_MODELS
    seeds: tuple = (0, 1, 2, 3, 4)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    out: Path = Path("runs")
    jobs: int = 1
    plots: bool = True
    export_data: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        cells = self.cells()
        if len({c.run_id for c in cells}) != len(cells):
            raise ValueError("grid contains duplicate cells")

    def cells(self):
        return [Cell(t, m, s) for t in self.truths for m in self.models for s in self.seeds]

    def train_config(self, cell: Cell) -> TrainConfig:
        return dataclasses.replace(self.train, alpha=cell.model.alpha, seed=cell.seed)

    def dataset_spec(self, truth: Activation, seed: int) -> DatasetSpec:
        d = self.data
        return DatasetSpec(truth, scale=d.scale, n_samples=d.n_train + d.n_test, d_in=d.d_in,
                           seed=seed, slope=self.train.slope)


@dataclass
class RunRecord:
    cell: Cell
    status: str
    mse: float = None
    selected: Activation = None
    trace: TrainTrace = None
    duration: float = 0.0
    failed_epoch: int = None
    W: list = None
    b: list = None
    logits: list = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def network(self, slope: float) -> Network:
        layer = RoutedLayer(np.array(self.W), np.array(self.b), np.array(self.logits), slope=slope)
        return Network(layer, self.cell.model.fixed)

    def to_json(self) -> dict:
        return {
            "run_id": self.cell.run_id,
            "truth": self.cell.truth.key,
            "model": self.cell.model.name,
            "alpha": self.cell.model.alpha if self.cell.model.is_routed else None,
            "seed": self.cell.seed,
            "status": self.status,
            "test_mse": self.mse,
            "selected": self.selected.key if self.selected is not None else None,
            "failed_epoch": self.failed_epoch,
            "duration_s": self.duration,
            "W": self.W,
            "b": self.b,
            "logits": self.logits,
        }


def load_data(spec: ExperimentSpec, truth: Activation, seed: int):
    data = generate(spec.dataset_spec(truth, seed))
    return split(data, spec.data.n_train / (spec.data.n_train + spec.data.n_test), seed)


def run_cell(spec: ExperimentSpec, cell: Cell) -> RunRecord:
    train_set, test_set = load_data(spec, cell.truth, cell.seed)
    cfg = spec.train_config(cell)
    net = Network.init(spec.data.d_in, 1, cell.seed, cell.model.fixed, slope=cfg.slope)
    start = time.perf_counter()
    try:
        trace = train(net, train_set, cfg)
    except DivergenceError as err:
        return RunRecord(cell, "diverged", duration=time.perf_counter() - start, failed_epoch=err.epoch)
    duration = time.perf_counter() - start
    return RunRecord(
        cell, "ok", mse=evaluate(net, test_set), selected=net.selected() if net.routed else None,
        trace=trace, duration=duration, W=net.layer.W.tolist(), b=net.layer.b.tolist(),
        logits=net.layer.logits.tolist(),
    )


def trace_csv(trace: TrainTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace.records:
        w.writerow([r.epoch] + [repr(float(v)) for v in (r.task, r.kl, r.total, r.tau, *r.probs)])
    return buf.getvalue()


def read_trace(path, alpha: float) -> TrainTrace:
    trace = TrainTrace(alpha)
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        if next(rows) != TRACE_COLUMNS:
            raise ValueError(f"{path}: unexpected trace header")
        for row in rows:
            v = [float(x) for x in row[1:]]
            trace.records.append(EpochRecord(int(row[0]), v[0], v[1], v[2], v[3], tuple(v[4:])))
    return trace


def emit_trajectory_plot(record: RunRecord, path):
    if not record.cell.model.is_routed or record.trace is None:
        raise ValueError(f"{record.cell.run_id}: only routed runs have selection probabilities")
    chart = Chart(f"Selection probabilities: truth={record.cell.truth.label}, {record.cell.model.label}",
                  "epoch", "probability", ylim=(0.0, 1.0))
    probs = record.trace.probs()
    epochs = [r.epoch for r in record.trace.records]
    for a in CATALOG:
        chart.line(epochs, probs[:, int(a)], a.label)
    chart.save(path)


def emit_fit_plot(record: RunRecord, data: Dataset, path, slope: float, informative_index: int = 0):
    if not record.ok:
        raise ValueError(f"{record.cell.run_id}: run did not finish")
    pred = record.network(slope).predict(data.X).reshape(-1)
    x1 = data.X[:, informative_index]
    chart = Chart(f"Fit: truth={record.cell.truth.label}, {record.cell.model.label}", "x1", "y")
    chart.scatter(x1, data.y, "target", color="#7f7f7f", radius=2.5)
    chart.scatter(x1, pred, "prediction", color="#d62728", radius=1.5)
    chart.save(path)
    return pred


@dataclass
class SummaryTable:
    truths: tuple
    models: tuple
    mse_mean: dict
    mse_std: dict
    selection_fraction: dict
    n_ok: dict
    n_failed: dict

    @classmethod
    def from_records(cls, spec: ExperimentSpec, records) -> "SummaryTable":
        mean, std, frac, n_ok, n_fail = {}, {}, {}, {}, {}
        for m in spec.models:
            for t in spec.truths:
                rs = [r for r in records if r.cell.model == m and r.cell.truth == t]
                ok = [r for r in rs if r.ok]
                key = (m.name, t.key)
                n_ok[key] = len(ok)
                n_fail[key] = len(rs) - len(ok)
                mses = np.array([r.mse for r in ok])
                mean[key] = float(mses.mean()) if len(ok) else math.nan
                std[key] = float(mses.std()) if len(ok) else math.nan
                if m.is_routed:
                    frac[key] = sum(r.selected == t for r in ok) / len(rs)
        return cls(tuple(spec.truths), tuple(spec.models), mean, std, frac, n_ok, n_fail)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model"] + [t.label for t in self.truths])
        for m in self.models:
            w.writerow([m.label] + [self._cell(m.name, t.key) for t in self.truths])
        return buf.getvalue()

    def _cell(self, model, truth):
        key = (model, truth)
        text = f"{self.mse_mean[key]:.6f} ± {self.mse_std[key]:.6f}"
        if self.n_failed[key]:
            text += f" ({self.n_failed[key]} failed)"
        return text

    def to_json(self) -> dict:
        rows = []
        for m in self.models:
            for t in self.truths:
                key = (m.name, t.key)
                row = {"model": m.name, "truth": t.key, "mse_mean": self.mse_mean[key],
                       "mse_std": self.mse_std[key], "n_ok": self.n_ok[key], "n_failed": self.n_failed[key]}
                if key in self.selection_fraction:
                    row["selection_fraction"] = self.selection_fraction[key]
                rows.append(row)
        return {"catalog": [a.key for a in CATALOG], "cells": rows}


def _worker(args):
    spec, cell = args
    return run_cell(spec, cell)


def resolved_config(spec: ExperimentSpec) -> str:
    t = spec.train
    lines = [
        f"truth = {','.join(a.key for a in spec.truths)}",
        f"model = {','.join(m.name for m in spec.models)}",
        f"seeds = {','.join(str(s) for s in spec.seeds)}",
        f"epochs = {t.epochs}",
        f"batch-size = {t.batch_size}",
        f"lr = {t.learning_rate!r}",
        f"lambda = {t.lam!r}",
        f"tau-start = {t.tau_start!r}",
        f"tau-end = {t.tau_end!r}",
        f"straight-through = {str(t.straight_through).lower()}",
        f"slope = {t.slope!r}",
        f"scale = {spec.data.scale!r}",
        f"n-train = {spec.data.n_train}",
        f"n-test = {spec.data.n_test}",
        f"catalog = {','.join(a.key for a in CATALOG)}",
    ]
    return "\n".join(lines) + "\n"


def run_grid(spec: ExperimentSpec, log=None):
    """Train and evaluate every cell, persist artifacts, return ``(summary, records)``."""
    out = Path(spec.out)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    started = time.time()
    cells = spec.cells()
    if spec.jobs > 1:
        with ProcessPoolExecutor(spec.jobs) as pool:
            records = list(pool.map(_worker, [(spec, c) for c in cells]))
    else:
        records = []
        for i, c in enumerate(cells):
            records.append(run_cell(spec, c))
            if log:
                r = records[-1]
                log(f"[{i + 1}/{len(cells)}] {c.run_id}: {r.status} mse={r.mse}")

    for r in records:
        d = out / "runs" / r.cell.run_id
        d.mkdir(exist_ok=True)
        (d / "record.json").write_text(json.dumps(r.to_json(), indent=2) + "\n", encoding="utf-8")
        if r.trace is not None:
            (d / "trace.csv").write_text(trace_csv(r.trace), encoding="utf-8")
        if spec.plots and r.ok:
            if r.cell.model.is_routed:
                emit_trajectory_plot(r, d / "trajectory.svg")
            _, test_set = load_data(spec, r.cell.truth, r.cell.seed)
            emit_fit_plot(r, test_set, d / "fit.svg", spec.train.slope)

    if spec.export_data:
        (out / "data").mkdir(exist_ok=True)
        for t in spec.truths:
            for s in spec.seeds:
                tr, te = load_data(spec, t, s)
                tr.to_csv(out / "data" / f"{t.key}_{s}_train.csv")
                te.to_csv(out / "data" / f"{t.key}_{s}_test.csv")

    summary = SummaryTable.from_records(spec, records)
    (out / "summary.csv").write_text(summary.to_csv(), encoding="utf-8")
    (out / "summary.json").write_text(json.dumps(summary.to_json(), indent=2) + "\n", encoding="utf-8")
    (out / "config.txt").write_text(resolved_config(spec), encoding="utf-8")
    meta = {
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
        "wall_clock_s": time.time() - started,
        "backend": kernels.BACKEND,
        "runs": len(records),
        "failed": sum(not r.ok for r in records),
        "pid": os.getpid(),
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return summary, records
