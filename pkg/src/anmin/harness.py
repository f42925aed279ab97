"""Run orchestration: benchmark campaigns over seeded splits, serialized
run records, paired significance comparison and trace export.

Record files are line-delimited JSON: the first line holds the run metadata
and final metrics, each following line one trace row. Campaign summaries
are CSV. Both are plain text and diff-able.
"""

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
from scipy import stats

from . import __version__
from .baselines import GdConfig, train_gd
from .data import SplitSpec, gen_dae, gen_sdf, gen_sin, load_csv, split
from .driver import AblationConfig, train
from .errors import AnminError, DataError, UnpairedRuns
from .model import ActivationConfig, Dataset, HyperParams, mse, r_squared

METHODS = ("anmin", "sgd", "adam")
METRICS = ("train_mse", "test_mse", "train_r2", "test_r2")


@dataclass
class RunRecord:
    run_id: str
    dataset_id: str
    method: str
    method_name: str
    alpha: float
    hyperparams: dict
    seed: int
    split_index: int
    trace: List[dict] = field(default_factory=list)
    train_mse: Optional[float] = None
    test_mse: Optional[float] = None
    train_r2: Optional[float] = None
    test_r2: Optional[float] = None
    started: str = ""
    finished: str = ""
    code_version: str = __version__

    def meta_dict(self):
        d = self.__dict__.copy()
        d.pop("trace")
        return d


def write_record(record: RunRecord, path):
    with open(path, "w") as f:
        f.write(json.dumps(record.meta_dict()) + "\n")
        for row in record.trace:
            f.write(json.dumps(row) + "\n")


def read_record(path) -> RunRecord:
    with open(path) as f:
        lines = [ln for ln in f if ln.strip()]
    meta = json.loads(lines[0])
    rec = RunRecord(**meta)
    rec.trace = [json.loads(ln) for ln in lines[1:]]
    return rec


def load_records(directory) -> List[RunRecord]:
    paths = sorted(Path(directory).glob("*.jsonl"))
    return [read_record(p) for p in paths]


@dataclass
class MethodConfig:
    """One method entry of a campaign: optimizer name plus its settings."""

    name: str
    method: str
    alpha: float = 0.0
    hidden: int = 64
    lam: float = 0.001
    # analytic trainer settings
    tau: float = -10000.0
    iters: int = 30
    clamp: float = 0.0001
    accumulation_batch: int = 256
    track_min: bool = True
    degenerate_policy: str = "pseudo_solve"
    # gradient-descent settings
    lr0: float = 0.03
    epochs: int = 300
    batch: int = 256
    decay_every: int = 100
    decay_factor: float = 10.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class CampaignConfig:
    dataset: dict
    methods: List[MethodConfig]
    splits: int = 1
    base_seed: int = 0
    output_dir: str = "campaign_out"
    train_fraction: float = 0.8
    workers: int = 1

    def __post_init__(self):
        if self.splits < 1:
            raise ValueError("splits must be >= 1")
        self.methods = [
            m if isinstance(m, MethodConfig) else MethodConfig(**m) for m in self.methods
        ]
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")

    @classmethod
    def from_file(cls, path):
        with open(path) as f:
            return cls(**json.load(f))


def resolve_dataset(spec: dict) -> Dataset:
    """Materialize a campaign dataset spec.

    Supported kinds: {"csv": path, ...}, {"generator": "sin"|"sdf"|"dae", ...}.
    """
    if "csv" in spec:
        return load_csv(
            spec["csv"],
            target_columns=spec.get("targets"),
            drop_columns=spec.get("drop", ()),
            column_spec=spec.get("column_spec"),
        )
    gen = spec.get("generator")
    if gen == "sin":
        return gen_sin(spec.get("n", 1000), spec.get("d", 3), spec.get("seed", 0))
    if gen == "sdf":
        return gen_sdf(spec["image"], normalize=spec.get("normalize", False))
    if gen == "dae":
        return gen_dae(
            spec["image"],
            patch=spec.get("patch", 15),
            stride=spec.get("stride", 3),
            noise_sigma=spec.get("noise_sigma", 10.0),
            seed=spec.get("seed", 0),
        )
    raise DataError(f"unrecognized dataset spec: {spec}")


def run_single(train_data: Dataset, test_data: Dataset, mc: MethodConfig, seed: int,
               split_index: int, dataset_id: str) -> RunRecord:
    """Train one method on one split and evaluate both splits."""
    act = ActivationConfig(mc.alpha)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    if mc.method == "anmin":
        hp = HyperParams(mc.lam, mc.tau, mc.iters, mc.clamp, mc.accumulation_batch)
        ab = AblationConfig(mc.track_min, mc.degenerate_policy)
        params, trace = train(train_data, act, hp, mc.hidden, ab, seed)
        rows = [
            {
                "iter": r.iteration,
                "train_loss": r.train_loss,
                "train_mse": r.train_mse,
                "logdet": r.logdet,
                "wall_seconds": r.wall_seconds,
            }
            for r in trace.rows
        ]
        hyper = {"hidden": mc.hidden, "lambda": mc.lam, "tau": mc.tau,
                 "iters": mc.iters, "clamp": mc.clamp,
                 "track_min": mc.track_min, "degenerate_policy": mc.degenerate_policy,
                 "init": "scaled-uniform"}
    else:
        cfg = GdConfig(mc.method, mc.lr0, mc.epochs, mc.batch,
                       mc.decay_every, mc.decay_factor)
        params, gd_trace = train_gd(train_data, act, cfg, mc.hidden, mc.lam, seed)
        rows = [
            {
                "iter": r.epoch,
                "train_loss": r.train_loss,
                "train_mse": r.train_mse,
                "logdet": None,
                "wall_seconds": r.wall_seconds,
            }
            for r in gd_trace
        ]
        hyper = {"hidden": mc.hidden, "lambda": mc.lam, "lr0": mc.lr0,
                 "epochs": mc.epochs, "batch": mc.batch,
                 "decay_every": mc.decay_every, "decay_factor": mc.decay_factor,
                 "init": "scaled-uniform"}

    def safe_r2(d):
        try:
            return r_squared(params, act, d)
        except AnminError:
            return None

    return RunRecord(
        run_id=f"{dataset_id}_{mc.name}_{split_index:03d}",
        dataset_id=dataset_id,
        method=mc.method,
        method_name=mc.name,
        alpha=mc.alpha,
        hyperparams=hyper,
        seed=seed,
        split_index=split_index,
        trace=rows,
        train_mse=mse(params, act, train_data),
        test_mse=mse(params, act, test_data),
        train_r2=safe_r2(train_data),
        test_r2=safe_r2(test_data),
        started=started,
        finished=time.strftime("%Y-%m-%dT%H:%M:%S"),
    )


def _campaign_job(args):
    data, mc, seed, split_index, dataset_id, train_fraction = args
    try:
        tr, te = split(data, SplitSpec(train_fraction, seed, split_index))
        return run_single(tr, te, mc, seed, split_index, dataset_id)
    except AnminError as exc:
        return {"method": mc.name, "split": split_index,
                "error": f"{type(exc).__name__}: {exc}"}


def run_campaign(cfg: CampaignConfig):
    """Run every (split, method) pair, write one record file per run plus a
    campaign summary CSV; per-run failures are recorded without aborting."""
    data = resolve_dataset(cfg.dataset)
    dataset_id = cfg.dataset.get("id") or cfg.dataset.get("generator") \
        or Path(str(cfg.dataset.get("csv", "dataset"))).stem
    out = Path(cfg.output_dir)
    rec_dir = out / "records"
    rec_dir.mkdir(parents=True, exist_ok=True)

    jobs = []
    for i in range(cfg.splits):
        seed = cfg.base_seed + i
        for mc in cfg.methods:
            jobs.append((data, mc, seed, i, dataset_id, cfg.train_fraction))

    workers = int(os.environ.get("ANMIN_WORKERS", cfg.workers))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_campaign_job, jobs))
    else:
        results = [_campaign_job(job) for job in jobs]
    records = [r for r in results if isinstance(r, RunRecord)]
    failures = [r for r in results if not isinstance(r, RunRecord)]

    for rec in records:
        write_record(rec, rec_dir / f"{rec.run_id}.jsonl")
    write_summary(records, failures, cfg, out / "summary.csv")
    if failures:
        with open(out / "failures.json", "w") as f:
            json.dump(failures, f, indent=2)
    return records


def write_summary(records, failures, cfg: CampaignConfig, path):
    groups = {}
    for rec in records:
        groups.setdefault(rec.method_name, []).append(rec)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        header = ["method", "n_runs", "n_failed"]
        for m in METRICS:
            header += [f"{m}_mean", f"{m}_std"]
        w.writerow(header)
        for mc in cfg.methods:
            recs = groups.get(mc.name, [])
            n_failed = sum(1 for fl in failures if fl["method"] == mc.name)
            row = [mc.name, len(recs), n_failed]
            for m in METRICS:
                vals = [getattr(r, m) for r in recs if getattr(r, m) is not None]
                if vals:
                    row += [repr(float(np.mean(vals))), repr(float(np.std(vals)))]
                else:
                    row += ["", ""]
            w.writerow(row)


def compare(records, method_a, method_b, metric):
    """Paired t-test on per-split metric differences (a - b).

    Zero-variance differences are reported with the documented conventions:
    identical vectors give (t=0, p=1); a constant nonzero difference is a
    deterministic difference, reported as p=0.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    by = {m: {} for m in (method_a, method_b)}
    for rec in records:
        for m in (method_a, method_b):
            if m in (rec.method, rec.method_name):
                by[m][rec.split_index] = getattr(rec, metric)
    a, b = by[method_a], by[method_b]
    if set(a) != set(b) or not a:
        raise UnpairedRuns(
            f"{method_a} ran on splits {sorted(a)} but {method_b} on {sorted(b)}"
        )
    idx = sorted(a)
    va = np.array([a[i] for i in idx], dtype=np.float64)
    vb = np.array([b[i] for i in idx], dtype=np.float64)
    diff = va - vb
    if np.all(diff == 0.0):
        t, p = 0.0, 1.0
    elif np.std(diff) == 0.0:
        t, p = math.copysign(math.inf, float(np.mean(diff))), 0.0
    else:
        t, p = stats.ttest_rel(va, vb)
    return {
        "metric": metric,
        "n_pairs": len(idx),
        "mean_a": float(np.mean(va)),
        "mean_b": float(np.mean(vb)),
        "mean_diff": float(np.mean(diff)),
        "t": float(t),
        "p": float(p),
        "significant": bool(float(p) < 0.01),
    }


def export_traces(records, out_dir):
    """Per-run CSV of (wall_seconds, train_mse, logdet) plus the min-so-far
    series, with round-trip exact float formatting."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for rec in records:
        path = out / f"trace_{rec.run_id}.csv"
        best = math.inf
        with open(path, "w", newline="") as f:
            f.write("wall_seconds,train_mse,logdet,best_train_mse\n")
            for row in rec.trace:
                best = min(best, row["train_mse"])
                ld = "" if row.get("logdet") is None else repr(float(row["logdet"]))
                f.write(
                    f"{row['wall_seconds']!r},{row['train_mse']!r},{ld},{best!r}\n"
                )
        paths.append(path)
    return paths
