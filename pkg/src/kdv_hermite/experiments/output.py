"""CSV and JSON files describing a finished experiment."""

import csv
import json
import math
from pathlib import Path

from .config import ExperimentConfig, config_from_json


class OutputError(OSError):
    pass


def _num(x):
    if x is None:
        return ""
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return repr(float(x)) if isinstance(x, float) else str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def _write_csv(path: Path, header, rows):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def profile_filename(t: float) -> str:
    return f"t_{t:g}.csv"


def emit_outputs(artifacts, cfg: ExperimentConfig | None = None, output_dir=None):
    """Write table.csv, profiles/t_<time>.csv, steps.csv and run.json; return the paths."""
    cfg = cfg or artifacts.config
    out = Path(output_dir or cfg.output_dir)
    paths = []

    p = out / "table.csv"
    _write_csv(p, ["M", "E", "rate"],
               [[r.M_nodes, _num(r.E_percent), _num(r.rate_vs_previous)] for r in artifacts.table])
    paths.append(p)

    for t, (x, un, ue) in sorted(artifacts.profiles.items()):
        p = out / "profiles" / profile_filename(t)
        rows = [[_num(float(xi)), _num(float(ui)), "" if ue is None else _num(float(ue[i]))]
                for i, (xi, ui) in enumerate(zip(x, un))]
        _write_csv(p, ["x", "u_numeric", "u_exact"], rows)
        paths.append(p)

    p = out / "steps.csv"
    rows = []
    for run in artifacts.runs:
        for rec in run.step_log:
            rows.append([run.M, *(_num(float(v)) if isinstance(v, float) else v for v in rec)])
    _write_csv(p, ["M", "t", "iterations", "contraction", "cfl_margin", "l2", "weighted", "h1_local"], rows)
    paths.append(p)

    doc = {
        "config": cfg.to_dict(),
        "derived": artifacts.derived,
        "quadrature": {"scheme": cfg.quad_order, "error": cfg.error_order, "projection": cfg.projection_order},
        "profile_M": artifacts.profile_M,
        "self_differences": [list(d) for d in artifacts.self_differences],
        "oracle_available": artifacts.oracle_available,
        "table": [
            {"M": r.M_nodes, "E": r.E_percent, "rate": r.rate_vs_previous,
             "l2_exact": r.l2_exact, "l2_numeric": r.l2_numeric}
            for r in artifacts.table
        ],
    }
    p = out / "run.json"
    try:
        out.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {p}: {exc}") from exc
    paths.append(p)
    return paths


def read_table(output_dir):
    path = Path(output_dir) / "table.csv"
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def read_config(output_dir) -> ExperimentConfig:
    return config_from_json((Path(output_dir) / "run.json").read_text())
