"""CSV serialisation of result records.

Layout: ``# key=value`` metadata lines (values JSON-encoded, dotted keys for
nested mappings), one header row, then data rows. Floats are written as
their shortest round-trip decimal, so files are diff-able and re-parse to
identical values.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable

import numpy as np

from ..evolve import TimeSeries
from ..experiments import Peak, ResonanceScan, RisetimeScan
from ..model import params_from_dict, params_to_dict


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def flatten(meta: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, val in meta.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict) and val:
            out.update(flatten(val, name + "."))
        else:
            out[name] = val
    return out


def unflatten(flat: dict[str, Any]) -> dict:
    out: dict = {}
    for key, val in flat.items():
        node = out
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = val
    return out


def _jsonable(val):
    if isinstance(val, np.ndarray):
        return val.tolist()
    if isinstance(val, (np.floating,)):
        return float(val)
    if isinstance(val, (np.integer,)):
        return int(val)
    if hasattr(val, "value") and not isinstance(val, (int, float, str)):
        return val.value
    raise TypeError(f"not JSON serialisable: {type(val)}")


def write_csv(metadata: dict, header: list[str], rows: Iterable[Iterable], stream=None) -> str:
    """Serialise to ``stream`` (or return the text)."""
    buf = io.StringIO() if stream is None else stream
    for key, val in flatten(metadata).items():
        buf.write(f"# {key}={json.dumps(val, default=_jsonable, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue() if stream is None else ""


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Parse into ``(nested metadata, header, rows of strings)``."""
    flat = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition("=")
            flat[key] = json.loads(val)
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise ValueError("CSV has no header row")
    return unflatten(flat), rows[0], rows[1:]


def _columns(header, rows):
    data = np.array([[float(v) for v in r] for r in rows]) if rows else np.zeros((0, len(header)))
    return {name: data[:, j] for j, name in enumerate(header)}


# -- TimeSeries ---------------------------------------------------------------

def timeseries_to_csv(series: TimeSeries, extra: dict | None = None) -> str:
    meta = {"record": "timeseries", **series.metadata, **(extra or {})}
    rows = zip(series.t, series.sigma_z, series.sigma_x, series.norm)
    return write_csv(meta, ["t", "sigma_z", "sigma_x", "norm"], rows)


def timeseries_from_csv(text: str) -> TimeSeries:
    meta, header, rows = read_csv(text)
    meta.pop("record", None)
    cols = _columns(header, rows)
    return TimeSeries(cols["t"], cols["sigma_z"], cols["sigma_x"], cols["norm"], meta)


# -- ResonanceScan -----------------------------------------------------------

def scan_to_csv(scan: ResonanceScan, extra: dict | None = None) -> str:
    meta = {
        "record": "resonance-scan",
        "params": params_to_dict(scan.params),
        "t_l": scan.t_l,
        "peaks": [[p.position, p.height, p.m] for p in scan.peaks],
        "degraded": scan.degraded,
        "failed_points": list(scan.failed_points),
        "info": scan.metadata,
        **(extra or {}),
    }
    return write_csv(meta, ["amplitude", "M"], zip(scan.grid, scan.means))


def scan_from_csv(text: str) -> ResonanceScan:
    meta, header, rows = read_csv(text)
    cols = _columns(header, rows)
    params, _, _ = params_from_dict(meta["params"])
    peaks = [Peak(float(x), float(h), int(m)) for x, h, m in meta.get("peaks", [])]
    return ResonanceScan(cols["amplitude"], cols["M"], float(meta["t_l"]), params, peaks,
                         bool(meta["degraded"]), [float(v) for v in meta["failed_points"]], meta.get("info", {}))


# -- RisetimeScan -----------------------------------------------------------

def risetime_to_csv(scan: RisetimeScan, extra: dict | None = None) -> str:
    orders = sorted(scan.means)
    meta = {
        "record": "risetime-scan",
        "params": params_to_dict(scan.params),
        "t_l": scan.t_l,
        "info": scan.metadata,
        **(extra or {}),
    }
    header = ["rise_time"] + [f"M_{m}" for m in orders]
    rows = ([tc] + [scan.means[m][k] for m in orders] for k, tc in enumerate(scan.tc_grid))
    return write_csv(meta, header, rows)


def risetime_from_csv(text: str) -> RisetimeScan:
    meta, header, rows = read_csv(text)
    cols = _columns(header, rows)
    params, _, _ = params_from_dict(meta["params"])
    means = {int(name[2:]): cols[name] for name in header if name.startswith("M_")}
    return RisetimeScan(cols["rise_time"], means, params, float(meta["t_l"]), meta.get("info", {}))
