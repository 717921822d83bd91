"""Command-line entry point: ``specsim run``, ``specsim sweep``, ``specsim selftest``.

Exit codes: 0 success, 1 runtime error, 2 usage or config error. Output files
are written only after the whole computation has finished, each one atomically.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfgmod
from .engine import POLICY_KINDS, SWEEP_AXES, UnknownAxis, run_experiment, run_sweep
from .metrics import render_summary_chart, summarize, write_csv
from .model import SpecSimError, ValidationError

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

STRICT_WARNING = ("warning: --strict-paper uses the literal rate table with every user active; "
                  "SI-II demand will saturate the 30 MHz pool at almost every point")


class UsageError(SpecSimError):
    pass


def _out_dir(arg: str | None) -> Path:
    out = arg or os.environ.get("SPECSIM_OUT")
    if not out:
        raise UsageError("no output directory: pass --out or set SPECSIM_OUT")
    return Path(out)


def _values(raw: str) -> list[str]:
    vals = [v.strip() for v in raw.split(",") if v.strip()]
    if not vals:
        raise UnknownAxis("--values is empty")
    return vals


def _axis_value(axis: str, raw: str):
    if axis == "policy_kind":
        return raw.upper()
    try:
        return int(raw) if axis in ("mno_user_count", "n_mno") else float(raw)
    except ValueError:
        raise ValidationError(f"bad value {raw!r} for axis {axis}") from None


def _file_label(value: str) -> str:
    return value.replace("/", "_")


def cmd_run(args) -> int:
    cfg = cfgmod.parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.windows is not None:
        cfg = replace(cfg, windows=args.windows)
    if args.policy:
        cfg = replace(cfg, inter=cfg.inter.with_kind(args.policy))
    if args.strict_paper:
        print(STRICT_WARNING, file=sys.stderr)
        cfg = cfgmod.strict_paper(cfg)
    out = _out_dir(args.out)
    records = run_experiment(cfg)
    summaries = summarize(records)
    write_csv(records, out / "records.csv")
    write_csv(summaries, out / "summary.csv")
    print(f"wrote {len(records)} records to {out / 'records.csv'}")
    return EXIT_OK


def _sweep_jobs(args):
    """Jobs (label, config, axis, values, policies, entities) and a chart title."""
    if args.preset:
        if args.config or args.axis or args.values:
            raise UsageError("--preset cannot be combined with --config/--axis/--values")
        preset = cfgmod.get_preset(args.preset)
        policies = (args.policy.upper(),) if args.policy else preset.policies
        jobs = [(label, cfg, preset.axis, list(preset.values), policies, preset.entities)
                for label, cfg in preset.runs(args.windows, args.seed, args.strict_paper)]
        return jobs, preset.description
    if not (args.config and args.axis and args.values is not None):
        raise UsageError("sweep needs --preset, or --config with --axis and --values")
    if args.axis not in SWEEP_AXES:
        raise UnknownAxis(f"unknown sweep axis {args.axis!r}; expected one of {SWEEP_AXES}")
    cfg = cfgmod.parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.windows is not None:
        cfg = replace(cfg, windows=args.windows)
    if args.strict_paper:
        cfg = cfgmod.strict_paper(cfg)
    values = [_axis_value(args.axis, v) for v in _values(args.values)]
    policies = (args.policy.upper(),) if args.policy else (cfg.inter.kind,)
    return [(cfg.run_id, cfg, args.axis, values, policies, None)], f"sweep over {args.axis}"


def cmd_sweep(args) -> int:
    jobs, title = _sweep_jobs(args)
    if args.strict_paper:
        print(STRICT_WARNING, file=sys.stderr)
    out = _out_dir(args.out)
    tables, summaries = [], []
    for label, cfg, axis, values, policies, entities in jobs:
        records = run_sweep(cfg, axis, values, list(policies))
        tables.append((label, records))
        s = summarize(records)
        if entities:
            s = [x for x in s if x.entity in entities]
        summaries.extend(s)
    # everything is computed; now write
    multi = len(jobs) > 1
    for label, records in tables:
        for value, part in records.groupby("axis_value", sort=False, observed=True):
            stem = f"records_{_file_label(label)}_{_file_label(value)}" if multi \
                else f"records_{_file_label(value)}"
            write_csv(part, out / f"{stem}.csv")
    write_csv(summaries, out / "summary.csv")
    render_summary_chart(summaries, out / "chart.svg", title)
    print(f"wrote {sum(len(t) for _, t in tables)} records and {len(summaries)} summary rows to {out}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    problems = cfgmod.check_presets()
    # expanding every run validates the configs it produces
    n_runs = sum(len(preset.runs()) for preset in cfgmod.PRESETS.values())
    if problems:
        for p in problems:
            print(f"FAIL {p}")
        return EXIT_RUNTIME
    print(f"ok: {len(cfgmod.PRESETS)} presets ({n_runs} runs) match their published parameters")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specsim",
                                description="Neutral-host spectrum coordination simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=lambda s: int(s, 0))
        sp.add_argument("--windows", type=int)
        sp.add_argument("--out", help="output directory (default: $SPECSIM_OUT)")
        sp.add_argument("--policy", type=str.lower, choices=[k.lower() for k in POLICY_KINDS])
        sp.add_argument("--strict-paper", action="store_true",
                        help="literal rate table, alpha=1, omega=1, uniform usage")

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", required=True)
    common(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run a preset or a custom one-axis sweep")
    sweep.add_argument("--preset", choices=sorted(cfgmod.PRESETS))
    sweep.add_argument("--config")
    sweep.add_argument("--axis")
    sweep.add_argument("--values", help="comma-separated axis values")
    common(sweep)
    sweep.set_defaults(func=cmd_sweep)

    st = sub.add_parser("selftest", help="check presets against the published parameters")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, cfgmod.ParseError, cfgmod.UnknownPreset, UnknownAxis,
            ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
