"""Run every figure preset and print the trend statistics the acceptance suite checks.

    python3 scripts/reproduce_figures.py --out results/ [--windows 10000] [--seed 0]

Each preset lands in its own sub-directory (records, summary.csv, chart.svg).
"""

import argparse
import math
import sys

from scipy.stats import spearmanr

from specsim.cli import main as cli_main
from specsim.config import PRESETS
from specsim.metrics import lookup, read_summaries


def margin(S, entity, value, other):
    pr = lookup(S, policy="PR", entity=entity, axis_value=value, level="inter")[0]
    o = lookup(S, policy=other, entity=entity, axis_value=value, level="inter")[0]
    return (o.mean_deviation_mhz - pr.mean_deviation_mhz) / math.hypot(pr.std_error, o.std_error)


def describe(name, S):
    values = sorted({s.axis_value for s in S}, key=float)
    if name in ("fig4", "fig5"):
        ent = PRESETS[name].entities[0]
        for p in ("FR", "PR", "CS"):
            means = [lookup(S, policy=p, entity=ent, axis_value=v)[0].mean_deviation_mhz for v in values]
            print(f"  {p} {ent}: " + " ".join(f"{m:.2f}" for m in means))
    if name in ("fig6a", "fig6b"):
        z = min(min(margin(S, "SI-avg", v, p) for p in ("FR", "CS")) for v in values)
        print(f"  PR lead on SI-avg: at least {z:.1f} pooled SE at every point")
    if name in ("fig7", "fig8"):
        for run in sorted({s.run_id for s in S}):
            rows = [s for s in S if s.run_id == run]
            r1 = spearmanr([float(v) for v in values],
                           [lookup(rows, entity="SI-I", axis_value=v)[0].mean_deviation_mhz for v in values])[0]
            r2 = spearmanr([1 - float(v) for v in values],
                           [lookup(rows, entity="SI-II", axis_value=v)[0].mean_deviation_mhz for v in values])[0]
            print(f"  {run}: Spearman vs own share SI-I {r1:.3f}, SI-II {r2:.3f}")


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--windows", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--only", nargs="*", choices=sorted(PRESETS))
    args = ap.parse_args(argv)
    for name in args.only or PRESETS:
        flags = ["sweep", "--preset", name, "--out", f"{args.out}/{name}"]
        if args.windows:
            flags += ["--windows", str(args.windows)]
        if args.seed is not None:
            flags += ["--seed", str(args.seed)]
        print(f"{name}: {PRESETS[name].description}")
        code = cli_main(flags)
        if code:
            return code
        describe(name, read_summaries(f"{args.out}/{name}/summary.csv"))
    return 0


if __name__ == "__main__":
    sys.exit(run())
