"""Scan the desk-scale rate divisor against the fig4/fig6a trend statistics.

The published rate table saturates a 30 MHz pool with a handful of users, so
the presets divide every class rate by a constant. This script shows, per
divisor, the CS rank correlation over overloaded points and the smallest PR
margin on the two-slice average; it is how the shipped divisor was picked.

    python3 scripts/rate_scale_scan.py --scales 20 25 30 35 --windows 10000
"""

import argparse
import math
from dataclasses import replace

from scipy.stats import spearmanr

from specsim.config import PRESETS
from specsim.engine import format_axis_value, run_sweep
from specsim.metrics import lookup, summarize
from specsim.model import PAPER_RATES_MBPS, make_classes


def scan(scale, windows, seed):
    preset = PRESETS["fig4"]
    cfg = replace(preset.base, windows=windows, seed=seed,
                  classes=make_classes(tuple(r / scale for r in PAPER_RATES_MBPS)))
    values = list(preset.values)
    df = run_sweep(cfg, preset.axis, values, ["FR", "PR", "CS"])
    S = summarize(df)
    si2 = df[(df.entity == "SI-II") & (df.policy == "PR")].groupby("axis_value", observed=True).demand_mhz.mean()
    labels = [format_axis_value(v) for v in values]
    heavy = [v for v in labels if si2[v] > 30]
    cs = [lookup(S, policy="CS", entity="SI-I", axis_value=v)[0].mean_deviation_mhz for v in heavy]
    rho = spearmanr([float(v) for v in heavy], cs)[0] if len(heavy) > 2 else float("nan")

    def z(v, p):
        a = lookup(S, policy="PR", entity="SI-avg", axis_value=v)[0]
        b = lookup(S, policy=p, entity="SI-avg", axis_value=v)[0]
        return (b.mean_deviation_mhz - a.mean_deviation_mhz) / math.hypot(a.std_error, b.std_error)

    zmin = min(z(v, p) for v in labels for p in ("FR", "CS"))
    return len(heavy), rho, zmin


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--scales", type=float, nargs="+", default=[20, 25, 30, 35])
    ap.add_argument("--windows", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    print("divisor  overloaded-points  CS-Spearman  min-PR-margin(SE)")
    for s in a.scales:
        n, rho, zmin = scan(s, a.windows, a.seed)
        print(f"{s:7g}  {n:17d}  {rho:11.3f}  {zmin:17.2f}")
