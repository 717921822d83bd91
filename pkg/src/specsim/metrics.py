"""Deviation statistics and file output (CSV tables, SVG charts)."""

from __future__ import annotations

import math
import os
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .engine import RECORD_COLUMNS
from .model import SpecSimError

SI_MEAN_ENTITY = "SI-avg"
GROUP_KEYS = ("run_id", "axis_name", "axis_value", "policy", "level", "entity")


class EmptyTable(SpecSimError):
    pass


@dataclass(frozen=True)
class DeviationSummary:
    run_id: str
    axis_name: str
    axis_value: str
    policy: str
    level: str
    entity: str
    window_count: int
    mean_deviation_mhz: float
    std_deviation_mhz: float

    def __post_init__(self):
        if self.window_count < 1:
            raise SpecSimError("window_count must be >= 1")

    @property
    def std_error(self) -> float:
        return self.std_deviation_mhz / math.sqrt(self.window_count)


SUMMARY_COLUMNS = [f.name for f in fields(DeviationSummary)]


def deviation(demand_mhz: float, grant_mhz: float) -> float:
    return abs(demand_mhz - grant_mhz)


def _stats(values: np.ndarray) -> tuple[int, float, float]:
    # sorting first makes the result independent of row order
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    mean = math.fsum(v) / n
    std = math.sqrt(math.fsum((v - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    return n, mean, std


def _axis_sort_key(value: str):
    try:
        return (0, float(value), "")
    except ValueError:
        return (1, 0.0, value)


def summarize(records: pd.DataFrame, include_si_mean: bool = True) -> list[DeviationSummary]:
    """Mean and sample std of deviation per (run, axis value, policy, level, entity).

    With ``include_si_mean`` every inter-level group also gets an ``SI-avg``
    row: the per-window mean over the two slices, then summarized over windows.
    """
    if records is None or len(records) == 0:
        raise EmptyTable("no records to summarize")
    keys = list(GROUP_KEYS)
    out = []
    for key, grp in records.groupby(keys, sort=False, observed=True):
        n, mean, std = _stats(grp["deviation_mhz"].to_numpy())
        out.append(DeviationSummary(*key, n, mean, std))
    if include_si_mean:
        inter = records[records["level"] == "inter"]
        if len(inter):
            pair_keys = [k for k in keys if k not in ("entity",)] + ["window"]
            wide = inter.set_index(pair_keys + ["entity"])["deviation_mhz"].unstack("entity")
            per_window = (wide.sum(axis=1) / wide.shape[1]).rename("deviation_mhz").reset_index()
            for key, grp in per_window.groupby([k for k in pair_keys if k != "window"], sort=False, observed=True):
                n, mean, std = _stats(grp["deviation_mhz"].to_numpy())
                run_id, axis_name, axis_value, policy, level = key
                out.append(DeviationSummary(run_id, axis_name, axis_value, policy, level,
                                            SI_MEAN_ENTITY, n, mean, std))
    out.sort(key=lambda s: (s.run_id, s.axis_name, _axis_sort_key(s.axis_value), s.policy,
                            s.level, _entity_key(s.entity)))
    return out


def _entity_key(entity: str):
    order = {"SI-I": 0, "SI-II": 1, SI_MEAN_ENTITY: 2}
    if entity in order:
        return (order[entity], 0)
    if entity.startswith("MNO-"):
        return (3, int(entity[4:]))
    return (4, entity)


def lookup(summaries: Iterable[DeviationSummary], **match) -> list[DeviationSummary]:
    return [s for s in summaries if all(getattr(s, k) == v for k, v in match.items())]


# --- CSV -----------------------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_csv_text(records: pd.DataFrame) -> str:
    return records.to_csv(columns=RECORD_COLUMNS, index=False, float_format="%.9f",
                          lineterminator="\n")


def summaries_frame(summaries: Sequence[DeviationSummary]) -> pd.DataFrame:
    return pd.DataFrame([astuple(s) for s in summaries], columns=SUMMARY_COLUMNS)


def write_csv(data, path) -> Path:
    """Write records (a DataFrame) or a list of summaries; the file appears atomically."""
    path = Path(path)
    if isinstance(data, pd.DataFrame):
        text = records_csv_text(data)
    else:
        text = summaries_frame(list(data)).to_csv(index=False, float_format="%.9f",
                                                  lineterminator="\n")
    _atomic_write(path, text)
    return path


_STR_COLS = {"run_id": str, "policy": str, "level": str, "entity": str, "axis_name": str,
             "axis_value": str, "case_label": str}


def read_records(path) -> pd.DataFrame:
    return pd.read_csv(path, dtype=_STR_COLS, keep_default_na=False)


def read_summaries(path) -> list[DeviationSummary]:
    df = pd.read_csv(path, dtype=_STR_COLS, keep_default_na=False)
    return [DeviationSummary(r.run_id, r.axis_name, r.axis_value, r.policy, r.level, r.entity,
                             int(r.window_count), float(r.mean_deviation_mhz),
                             float(r.std_deviation_mhz))
            for r in df.itertuples(index=False)]


# --- SVG -----------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
            "#7f7f7f")


def render_summary_chart(summaries: Sequence[DeviationSummary], path, title: str = "") -> Path:
    """One polyline of mean deviation per (run, policy, level, entity) over the sweep axis."""
    summaries = list(summaries)
    if not summaries:
        raise EmptyTable("no summaries to chart")
    series: dict[tuple, list[DeviationSummary]] = {}
    for s in summaries:
        series.setdefault((s.run_id, s.policy, s.level, s.entity), []).append(s)
    axis_values = sorted({s.axis_value for s in summaries}, key=_axis_sort_key)
    numeric = all(_axis_sort_key(v)[0] == 0 for v in axis_values)
    xs = {v: (float(v) if numeric else i) for i, v in enumerate(axis_values)}
    x_lo, x_hi = min(xs.values()), max(xs.values())
    y_hi = max(s.mean_deviation_mhz for s in summaries) or 1.0

    width, height = 720, 440
    left, right, top, bottom = 70, 190, 40, 60
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (pw / 2 if x_hi == x_lo else (x - x_lo) / (x_hi - x_lo) * pw)

    def py(y):
        return top + ph - y / (y_hi * 1.05) * ph

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width),
                     height=str(height), viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    if title:
        t = ET.SubElement(svg, "text", x=str(left), y="24", **{"font-size": "15"})
        t.text = title
    ET.SubElement(svg, "line", x1=str(left), y1=str(top + ph), x2=str(left + pw),
                  y2=str(top + ph), stroke="black")
    ET.SubElement(svg, "line", x1=str(left), y1=str(top), x2=str(left), y2=str(top + ph),
                  stroke="black")
    for v in axis_values:
        t = ET.SubElement(svg, "text", x=f"{px(xs[v]):.2f}", y=str(top + ph + 18),
                          **{"font-size": "11", "text-anchor": "middle"})
        t.text = v
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y_hi * frac
        t = ET.SubElement(svg, "text", x=str(left - 6), y=f"{py(y) + 4:.2f}",
                          **{"font-size": "11", "text-anchor": "end"})
        t.text = f"{y:.2f}"
    xl = ET.SubElement(svg, "text", x=str(left + pw / 2), y=str(height - 16),
                       **{"font-size": "13", "text-anchor": "middle"})
    xl.text = summaries[0].axis_name or "axis"
    yl = ET.SubElement(svg, "text", x="16", y=str(top + ph / 2),
                       transform=f"rotate(-90 16 {top + ph / 2})",
                       **{"font-size": "13", "text-anchor": "middle"})
    yl.text = "mean deviation (MHz)"

    for i, (key, rows) in enumerate(series.items()):
        rows = sorted(rows, key=lambda s: _axis_sort_key(s.axis_value))
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(xs[s.axis_value]):.2f},{py(s.mean_deviation_mhz):.2f}" for s in rows)
        name = " ".join(k for k in (key[1], key[3]) if k)
        ET.SubElement(svg, "polyline", points=pts, fill="none", stroke=color,
                      **{"stroke-width": "2", "data-series": name})
        for s in rows:
            ET.SubElement(svg, "circle", cx=f"{px(xs[s.axis_value]):.2f}",
                          cy=f"{py(s.mean_deviation_mhz):.2f}", r="3", fill=color)
        ly = top + 14 + 18 * i
        ET.SubElement(svg, "line", x1=str(left + pw + 12), y1=str(ly - 4), x2=str(left + pw + 32),
                      y2=str(ly - 4), stroke=color, **{"stroke-width": "2"})
        lt = ET.SubElement(svg, "text", x=str(left + pw + 38), y=str(ly), **{"font-size": "11"})
        lt.text = name
    path = Path(path)
    _atomic_write(path, ET.tostring(svg, encoding="unicode", xml_declaration=True) + "\n")
    return path
