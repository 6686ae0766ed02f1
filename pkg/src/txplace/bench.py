"""Experiment orchestration behind the ``gen``, ``label`` and ``eval`` subcommands.

Every file these functions write is a deterministic function of their inputs,
with one exception: wall-clock timings go to separate ``timing*.csv`` files.
"""

from __future__ import annotations

import configparser
import csv
import logging
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset_io as dio
from .estimators import DEFAULT_RULE, PlacementSelector
from .grid import feasible_region, generate_building_map
from .ledger import DEFAULT_BATCH_SIZE, EvalLedger
from .objectives import dataset_l2, mean_std
from .oracle import label_map, normalize
from .propagation import MODELS, PropagationParams, get_evaluator
from .selection import ReferenceOptima
from .validation import InvalidArgumentError

log = logging.getLogger(__name__)

DATASET_INI = "dataset.ini"
MANIFEST = "manifest.csv"


def _map_jobs(fn, items, n_jobs):
    if n_jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([dio.fmt_real(v) if isinstance(v, float) else v for v in row])


# gen

def cmd_gen(seed, count, out_dir, width=32, height=32, density=0.25, block_size_range=(2, 6)):
    out = Path(out_dir)
    (out / "maps").mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(count):
        sid = f"m{i:05d}"
        bmap = generate_building_map(
            [seed, i], width, height, density, block_size_range, id=sid
        )
        rel = f"maps/{sid}.pgm"
        dio.write_building_map(bmap, out / rel)
        records.append(dio.ScenarioRecord(id=sid, map=rel))
    dio.write_manifest(records, out / MANIFEST)
    return records


# label

def _params_dict(params):
    return {k: float(getattr(params, k)) for k in PropagationParams.__dataclass_fields__}


def write_dataset_info(out, margin, model, params, batch_size, split_seed):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["dataset"] = {
        "margin": str(margin),
        "model": model,
        "batch_size": str(batch_size),
        "split_seed": str(split_seed),
    }
    cp["params"] = {k: dio.fmt_real(v) for k, v in _params_dict(params).items()}
    with open(Path(out) / DATASET_INI, "w") as fh:
        cp.write(fh)


@dataclass(frozen=True)
class DatasetInfo:
    root: Path
    margin: int
    model: str
    params: PropagationParams
    batch_size: int
    split_seed: int

    def evaluator(self):
        return get_evaluator(self.model, self.params)


def read_dataset_info(root):
    root = Path(root)
    path = root / DATASET_INI
    if not path.exists():
        raise InvalidArgumentError(f"{root}: not a labeled dataset (missing {DATASET_INI})")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read(path)
    d = cp["dataset"]
    params = PropagationParams(**{k: float(v) for k, v in cp["params"].items()})
    return DatasetInfo(
        root, int(d["margin"]), d["model"], params, int(d["batch_size"]), int(d["split_seed"])
    )


def cmd_label(
    manifest,
    out_dir,
    margin=8,
    model="wall_count",
    params=None,
    batch_size=DEFAULT_BATCH_SIZE,
    n_jobs=1,
    split_seed=42,
    fractions=(0.8, 0.1, 0.1),
):
    """Label every scenario in ``manifest`` into ``out_dir``; returns the dataset manifest."""
    manifest = Path(manifest)
    out = Path(out_dir)
    for sub in ("maps", "scores", "gt"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    params = params if params is not None else PropagationParams()
    evaluator = get_evaluator(model, params)
    fingerprint = evaluator.fingerprint()
    records = dio.read_manifest(manifest)

    def work(rec):
        bmap = dio.read_building_map(manifest.parent / rec.map, id=rec.id)
        region = feasible_region(bmap, margin)
        if region.size == 0:
            return rec.id, None, "empty feasible region", 0.0
        start = time.perf_counter()
        scen = label_map(bmap, margin, evaluator, None, batch_size)
        seconds = time.perf_counter() - start
        dio.write_building_map(bmap, out / f"maps/{rec.id}.pgm")
        dio.write_score_map(normalize(scen.power), out / f"scores/{rec.id}_power.f64")
        dio.write_score_map(normalize(scen.coverage), out / f"scores/{rec.id}_coverage.f64")
        dio.write_ground_truth(scen.optimum, out / f"gt/{rec.id}.gt", fingerprint)
        return rec.id, scen, None, seconds

    results = _map_jobs(work, records, n_jobs)

    labeled, ledger_rows, skipped, timing = [], [], [], []
    for sid, scen, reason, seconds in results:
        if scen is None:
            log.warning("skipping %s: %s", sid, reason)
            skipped.append((sid, reason))
            continue
        labeled.append(
            dio.ScenarioRecord(
                id=sid,
                map=f"maps/{sid}.pgm",
                power_scores=f"scores/{sid}_power.f64",
                coverage_scores=f"scores/{sid}_coverage.f64",
                ground_truth=f"gt/{sid}.gt",
            )
        )
        ledger_rows.append((sid, scen.region.size, scen.ledger.evaluator_calls, scen.ledger.batches))
        timing.append((sid, seconds))

    if labeled:
        labeled = dio.make_splits(labeled, split_seed, fractions)
    dio.write_manifest(labeled, out / MANIFEST)
    write_dataset_info(out, margin, model, params, batch_size, split_seed)
    _write_csv(out / "ledger.csv", ("id", "feasible", "evaluator_calls", "batches"), sorted(ledger_rows))
    _write_csv(out / "skipped.csv", ("id", "reason"), sorted(skipped))
    _write_csv(out / "timing.csv", ("id", "seconds"), sorted(timing))
    return labeled


# eval

@dataclass(eq=False)
class DatasetScenario:
    bmap: object
    region: object
    power_values: np.ndarray
    coverage_values: np.ndarray
    reference: ReferenceOptima
    optimum: object

    @property
    def id(self):
        return self.bmap.id


def load_scenario(info, rec, source="oracle_scores"):
    """Building map, region, score values from ``source`` and ground-truth optima."""
    root = info.root
    if not rec.ground_truth or not (root / rec.ground_truth).exists():
        raise InvalidArgumentError(f"scenario {rec.id}: missing ground truth")
    bmap = dio.read_building_map(root / rec.map, id=rec.id)
    region = feasible_region(bmap, info.margin)
    if source == "oracle_scores" or source == "sampler":
        pwr = dio.read_score_map(root / rec.power_scores, region=region).values
        cov = dio.read_score_map(root / rec.coverage_scores, region=region).values
    elif source.startswith("file:"):
        pred_dir = Path(source[len("file:") :])
        pwr = dio.read_prediction(_prediction_path(pred_dir, rec.id, "power"), region).values
        cov = dio.read_prediction(_prediction_path(pred_dir, rec.id, "coverage"), region).values
    else:
        raise InvalidArgumentError(f"unknown score source {source!r}")
    opt, _ = dio.read_ground_truth(root / rec.ground_truth)
    return DatasetScenario(bmap, region, np.asarray(pwr), np.asarray(cov), ReferenceOptima.from_dual(opt), opt)


def _prediction_path(pred_dir, sid, objective):
    for suffix in (".pgm", ".f64"):
        p = pred_dir / f"{sid}_{objective}{suffix}"
        if p.exists():
            return p
    raise InvalidArgumentError(f"scenario {sid}: no {objective} prediction in {pred_dir}")


SCENARIO_FIELDS = (
    "id", "pool", "strategy", "param", "y", "x", "pwr_pct", "cov_pct", "d_n",
    "err_pwr", "err_cov", "pool_size", "overlap_pct", "evals", "batches",
    "exhaustive_evals", "speedup",
)

RESULT_FIELDS = (
    "pool", "strategy", "param", "n", "pwr_mean", "pwr_std", "cov_mean", "cov_std", "d_bar",
    "err_pwr_mean", "err_pwr_std", "err_cov_mean", "err_cov_std", "evals_mean", "batches_mean",
    "speedup_mean", "pool_size_mean", "overlap_mean",
)


def _scenario_seed(seed, sid):
    return [int(seed), zlib.crc32(sid.encode())]


def cmd_eval(
    data_dir,
    pool="union",
    params_list=(16,),
    strategy=None,
    source="oracle_scores",
    seed=0,
    sigma=2.0,
    split="test",
    out=None,
    n_jobs=1,
    batch_size=None,
):
    """Run one pool/strategy over a labeled split for each pool size in ``params_list``.

    Writes ``out`` (one aggregate row per pool size) plus ``<out>.scenarios.csv``
    and ``<out>.timing.csv`` next to it. A pool size of ``None`` means the whole region.
    """
    info = read_dataset_info(data_dir)
    batch_size = batch_size or info.batch_size
    records = dio.read_manifest(info.root / MANIFEST)
    if split != "all":
        records = [r for r in records if r.split == split]
    rule = strategy or DEFAULT_RULE[pool]
    evaluator = info.evaluator()
    scenarios = _map_jobs(lambda r: load_scenario(info, r, source), records, n_jobs)

    scenario_rows, timing_rows, summary_rows = [], [], []
    for param in params_list:
        def work(scen):
            sel = PlacementSelector(
                pool=pool, param=param, strategy=rule, seed=seed, sigma=sigma,
                model=evaluator, batch_size=batch_size,
            ).fit()
            start = time.perf_counter()
            outcome, cand, overlap = sel.predict_one(scen, seed=_scenario_seed(seed, scen.id))
            return scen, outcome, cand, overlap, time.perf_counter() - start

        done = _map_jobs(work, scenarios, n_jobs)
        rows = []
        for scen, o, cand, overlap, seconds in done:
            exhaustive = scen.region.size
            p = exhaustive if param is None else param
            rows.append((
                scen.id, pool, rule, p, o.chosen.y, o.chosen.x, o.pwr_pct, o.cov_pct, o.d_n,
                o.err_pwr, o.err_cov, len(cand), "" if overlap is None else overlap,
                o.evals_used, o.batches_used, exhaustive, exhaustive / o.evals_used,
            ))
            timing_rows.append((scen.id, pool, rule, p, seconds))
        scenario_rows.extend(rows)
        if rows:
            summary_rows.append(summarize(rows, pool, rule, "all" if param is None else param))

    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        _write_csv(out, RESULT_FIELDS, summary_rows)
        _write_csv(_sibling(out, "scenarios"), SCENARIO_FIELDS, scenario_rows)
        _write_csv(_sibling(out, "timing"), ("id", "pool", "strategy", "param", "seconds"), timing_rows)
    return summary_rows, scenario_rows


def _sibling(path, tag):
    return path.with_name(f"{path.stem}.{tag}.csv")


def summarize(rows, pool, rule, param):
    col = {f: i for i, f in enumerate(SCENARIO_FIELDS)}

    def values(name):
        return [r[col[name]] for r in rows]

    pwr = mean_std(values("pwr_pct"))
    cov = mean_std(values("cov_pct"))
    e_p = mean_std(values("err_pwr"))
    e_c = mean_std(values("err_cov"))
    overlaps = [v for v in values("overlap_pct") if v != ""]
    return (
        pool, rule, param, len(rows), pwr[0], pwr[1], cov[0], cov[1], dataset_l2(cov[0], pwr[0]),
        e_p[0], e_p[1], e_c[0], e_c[1],
        float(np.mean(values("evals"))), float(np.mean(values("batches"))),
        float(np.mean(values("speedup"))), float(np.mean(values("pool_size"))),
        float(np.mean(overlaps)) if overlaps else "",
    )


def label_corpus_ledger(data_dir):
    """Total evaluator calls and batches recorded while labeling ``data_dir``."""
    ledger = EvalLedger()
    with open(Path(data_dir) / "ledger.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            ledger.record(int(row["evaluator_calls"]), int(row["batches"]))
    return ledger


def parse_model(model):
    if model in MODELS or model.startswith("file:"):
        return model
    raise InvalidArgumentError(f"unknown model {model!r}; expected free_space, wall_count or file:<path>")
