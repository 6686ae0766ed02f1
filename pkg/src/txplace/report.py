"""Text tables, the ground-truth bounds summary, and objective-space scatter export."""

from __future__ import annotations

import csv
from pathlib import Path

from . import dataset_io as dio
from .bench import MANIFEST, _write_csv, read_dataset_info
from .objectives import dataset_l2, percent_of
from .oracle import bounds_report, denormalize

TABLE_COLUMNS = ("Pool", "Select", "Param", "n", "d_bar", "Cov", "Pwr", "ErrP", "ErrC", "Evals", "Speedup")
SCATTER_FIELDS = ("kind", "label", "y", "x", "cov_pct", "pwr_pct")


class ReportError(ValueError):
    pass


def read_results(paths):
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    return rows


def check_row(row, tol=1e-9):
    """Stored d_bar must equal the distance recomputed from the row's mean percents."""
    d = dataset_l2(float(row["cov_mean"]), float(row["pwr_mean"]))
    if abs(d - float(row["d_bar"])) > tol:
        raise ReportError(
            f"row {row['pool']}/{row['strategy']}/{row['param']}: d_bar {row['d_bar']} != recomputed {d!r}"
        )


def _pm(mean, std):
    return f"{float(mean):.2f}±{float(std):.2f}"


def render_table(rows, columns, title=None):
    widths = [len(c) for c in columns]
    for r in rows:
        widths = [max(w, len(v)) for w, v in zip(widths, r)]
    lines = [title] if title else []
    lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in rows)
    return "\n".join(lines) + "\n"


def results_table(rows):
    for r in rows:
        check_row(r)
    body = [
        (
            r["pool"], r["strategy"], r["param"], r["n"], f"{float(r['d_bar']):.2f}",
            _pm(r["cov_mean"], r["cov_std"]), _pm(r["pwr_mean"], r["pwr_std"]),
            _pm(r["err_pwr_mean"], r["err_pwr_std"]), _pm(r["err_cov_mean"], r["err_cov_std"]),
            f"{float(r['evals_mean']):.1f}", f"{float(r['speedup_mean']):.2f}",
        )
        for r in rows
    ]
    return render_table(body, TABLE_COLUMNS)


BOUNDS_FIELDS = ("placement", "cov_mean", "cov_std", "pwr_mean", "pwr_std", "d_bar")


def bounds_rows(summary):
    """One row per ground-truth placement type; stds for the single-objective cases are zero on their own axis."""
    s = summary
    return [
        ("power_opt", s.cov_at_power_opt[0], s.cov_at_power_opt[1], 100.0, 0.0, s.d_power_opt),
        ("cov_opt", 100.0, 0.0, s.pwr_at_cov_opt[0], s.pwr_at_cov_opt[1], s.d_cov_opt),
        ("balanced_opt", s.balanced_cov[0], s.balanced_cov[1], s.balanced_pwr[0], s.balanced_pwr[1], s.d_balanced),
    ]


def bounds_text(summary):
    body = [
        (name, _pm(cm, cs), _pm(pm, ps), f"{d:.2f}")
        for name, cm, cs, pm, ps, d in bounds_rows(summary)
    ]
    dist = summary.optimum_distance
    return render_table(body, ("Placement", "Cov", "Pwr", "d_bar"), title=f"Ground-truth bounds (n={summary.n})") + (
        f"power_opt <-> cov_opt distance: {_pm(*dist)} px\n"
    )


def load_optima(data_dir, split="all"):
    info = read_dataset_info(data_dir)
    records = dio.read_manifest(info.root / MANIFEST)
    if split != "all":
        records = [r for r in records if r.split == split]
    return [dio.read_ground_truth(info.root / r.ground_truth)[0] for r in records]


def scatter_rows(data_dir, scenario_id, scenario_result_rows=()):
    """Every feasible candidate of one scenario in (cov %, pwr %) space, plus strategy markers."""
    info = read_dataset_info(data_dir)
    rec = next((r for r in dio.read_manifest(info.root / MANIFEST) if r.id == scenario_id), None)
    if rec is None:
        raise ReportError(f"scenario {scenario_id!r} not in dataset {data_dir}")
    bmap = dio.read_building_map(info.root / rec.map, id=rec.id)
    pwr = denormalize(dio.read_score_map(info.root / rec.power_scores, bmap=bmap))
    cov = denormalize(dio.read_score_map(info.root / rec.coverage_scores, bmap=bmap))
    opt, _ = dio.read_ground_truth(info.root / rec.ground_truth)
    rows = []
    for i, (y, x) in enumerate(pwr.region.members.tolist()):
        rows.append((
            "candidate", "", y, x,
            percent_of(float(cov.values[i]), opt.cov_opt_value),
            percent_of(float(pwr.values[i]), opt.power_opt_value),
        ))
    for r in scenario_result_rows:
        if r["id"] != scenario_id:
            continue
        rows.append((
            "marker", f"{r['pool']}/{r['strategy']}/{r['param']}", int(r["y"]), int(r["x"]),
            float(r["cov_pct"]), float(r["pwr_pct"]),
        ))
    return rows


def cmd_report(result_paths, out_dir, data_dir=None, scenario=None, split="all"):
    """Write ``tables.txt``, and with a dataset also ``bounds.csv``/``bounds.txt`` and ``scatter.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = read_results(result_paths)
    text = results_table(rows)
    written = {"tables": out / "tables.txt"}
    summary = None
    if data_dir is not None:
        optima = load_optima(data_dir, split)
        if optima:
            summary = bounds_report(optima)
            _write_csv(out / "bounds.csv", BOUNDS_FIELDS, bounds_rows(summary))
            (out / "bounds.txt").write_text(bounds_text(summary))
            text = bounds_text(summary) + "\n" + text
            written["bounds"] = out / "bounds.csv"
        if scenario is not None:
            scen_paths = [Path(p).with_name(f"{Path(p).stem}.scenarios.csv") for p in result_paths]
            scen_rows = read_results([p for p in scen_paths if p.exists()])
            _write_csv(out / "scatter.csv", SCATTER_FIELDS, scatter_rows(data_dir, scenario, scen_rows))
            written["scatter"] = out / "scatter.csv"
    written["tables"].write_text(text)
    return written, summary
