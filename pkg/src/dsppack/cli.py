"""Command-line front end: ``dsppack <subcommand> ...``.

Exit codes: 0 success, 1 domain or feasibility failure, 2 usage or
configuration error.  Negative operand lists must be attached with ``=``,
e.g. ``--w=-7,-4``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import addpack as addpack_mod
from .analysis import (EnumerationSpec, density_report, display, display_rho, error_stats,
                       exact_decimal, render, summary_line)
from .correction import run_scheme
from .errors import ConfigError, DspPackError
from .packing import derive_layout, packing_density, validate
from .presets import DENSITY_PRESETS, PRESETS, load_config

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _delta_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError("empty delta range")
    return lo_i, hi_i


def _enum_from_args(args) -> EnumerationSpec:
    if args.samples is not None:
        return EnumerationSpec.sample(args.samples, args.seed)
    return EnumerationSpec.exhaustive()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(header, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
        return "\n".join(lines + ["| " + " | ".join(map(str, r)) + " |" for r in rows]) + "\n"
    return "\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n"


# -- subcommands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    diag = validate(cfg)
    status = "infeasible" if not diag.feasible else ("feasible-with-overlap" if diag.overlaps else "feasible")
    print(f"{status}, δ={cfg.delta}, ρ={display_rho(packing_density(cfg))}")
    print(f"target={cfg.target} lanes={cfg.lane_count} padding={list(diag.padding)}")
    for d in diag:
        print(f"{d.severity}[{d.code}]: {d.message}")
    return EXIT_OK if diag.feasible else EXIT_DOMAIN


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    ev = run_scheme(cfg, args.a, args.w, args.correction)
    width = cfg.out_width
    print(f"P = 0x{ev.p.bits:0{(width + 3) // 4}x} ({width}-bit, {ev.p.value})")
    if ev.c.value:
        print(f"C = 0x{ev.c.bits:0{(width + 3) // 4}x}")
    header = ("lane", "offset", "width", "raw", "naive", "corrected", "oracle", "error")
    rows = []
    for naive, corr, exp in zip(ev.naive, ev.corrected, ev.expected):
        rows.append((naive.name, naive.offset, naive.width, naive.raw.binary(), naive.value,
                     corr.value, exp, corr.value - exp))
    sys.stdout.write(_table(header, rows, args.format))
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    stats = error_stats(cfg, args.correction, _enum_from_args(args), workers=args.workers)
    _emit(render(stats, args.format), args.out)
    print(summary_line(stats), file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_density(args) -> int:
    names = args.configs or list(DENSITY_PRESETS)
    configs = {}
    for ref in names:
        cfg = load_config(ref)
        configs[cfg.name or ref] = cfg
    rows = density_report(configs, literature=not args.no_literature)
    _emit(render(rows, args.format), args.out)
    return EXIT_OK


def cmd_addpack(args) -> int:
    guard = args.guard[0] if len(args.guard) == 1 else tuple(args.guard)
    cfg = addpack_mod.AdditionPackConfig(tuple(args.widths), guard, args.total_width)
    if args.x is not None or args.y is not None:
        if args.x is None or args.y is None:
            raise ConfigError("--x and --y must be given together")
        results = addpack_mod.add_packed(cfg, args.x, args.y)
        header = ("lane", "offset", "width", "actual", "expected", "carry_in", "error")
        rows = [(f"add{r.lane}", off, r.width, r.actual, r.expected, r.carry_in, r.error)
                for r, off in zip(results, cfg.offsets)]
        sys.stdout.write(_table(header, rows, args.format))
        return EXIT_OK
    if args.analyze:
        stats = addpack_mod.addpack_stats(cfg, _enum_from_args(args))
        _emit(render(stats, args.format), args.out)
        print(summary_line(stats), file=sys.stdout if args.out else sys.stderr)
        return EXIT_OK
    report = addpack_mod.feasible_layouts(cfg.total_width, list(cfg.lane_widths))
    print(f"lanes={report.lane_count} offsets={list(cfg.offsets)} spare_bits={report.spare_bits} "
          f"guarded_boundaries={report.guarded_boundaries} approximate_lanes={report.approximate_lanes}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    lo, hi = args.delta_range
    found = []
    for delta in range(lo, hi + 1):
        try:
            cfg = derive_layout([args.a_width] * args.a_count, [args.w_width] * args.w_count, delta,
                                target=args.target)
        except ConfigError:
            continue
        diag = validate(cfg)
        if not diag.feasible:
            continue
        top = cfg.lanes[-1]
        found.append((cfg, top.offset + top.width))
    if not found:
        print("no feasible configuration in the requested range", file=sys.stderr)
        return EXIT_DOMAIN
    found.sort(key=lambda item: (-packing_density(item[0]), item[1], item[0].delta))
    header = ["delta", "a_offsets", "w_offsets", "r_offsets", "span", "rho", "rho_exact"]
    if args.measure:
        header.append("mae_bar")
    rows = []
    for cfg, span in found:
        rho = packing_density(cfg)
        row = [cfg.delta, " ".join(map(str, cfg.a_offsets)), " ".join(map(str, cfg.w_offsets)),
               " ".join(str(ln.offset) for ln in cfg.lanes), span, display_rho(rho), exact_decimal(rho)]
        if args.measure:
            row.append(display(error_stats(cfg, "none", EnumerationSpec.exhaustive()).mae_bar))
        rows.append(row)
    _emit(_table(header, rows, args.format), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dsppack",
                                     description="Bit-exact DSP multiplication and addition packing.")
    sub = parser.add_subparsers(dest="command", required=True)
    presets = ", ".join(PRESETS)

    p = sub.add_parser("validate", help="check a packing configuration against its target")
    p.add_argument("config", help=f"JSON file or preset ({presets})")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run one operand tuple through the packed multiplier")
    p.add_argument("config")
    p.add_argument("--a", type=_int_list, required=True, help="a operands, e.g. --a=10,3")
    p.add_argument("--w", type=_int_list, required=True, help="w operands, e.g. --w=-7,-4")
    p.add_argument("--correction", default="none", choices=["none", "full", "approx", "mr"])
    p.add_argument("--format", default="markdown", choices=["csv", "json", "markdown"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="error statistics over all or sampled operands")
    p.add_argument("config")
    p.add_argument("--correction", default="none", choices=["none", "full", "approx", "mr"])
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="enumerate every tuple (default)")
    mode.add_argument("--samples", type=int, help="number of seeded random tuples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="csv", choices=["csv", "json", "markdown"])
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--workers", type=int, help="parallel workers (default: DSPPACK_THREADS or CPU count)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("density", help="packing density of presets or configs")
    p.add_argument("configs", nargs="*", help="presets or JSON files (default: the density presets)")
    p.add_argument("--no-literature", action="store_true", help="omit literature reference values")
    p.add_argument("--format", default="csv", choices=["csv", "json", "markdown"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("addpack", help="packed addition: single shot, statistics or layout")
    p.add_argument("--widths", type=_int_list, required=True)
    p.add_argument("--guard", type=_int_list, default=[0], help="guard bits, one value or one per boundary")
    p.add_argument("--total-width", type=int, default=48)
    p.add_argument("--x", type=_int_list)
    p.add_argument("--y", type=_int_list)
    p.add_argument("--analyze", action="store_true")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="csv", choices=["csv", "json", "markdown"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_addpack)

    p = sub.add_parser("sweep", help="enumerate regular layouts over a padding range")
    p.add_argument("--a-count", type=int, required=True)
    p.add_argument("--w-count", type=int, required=True)
    p.add_argument("--a-width", type=int, required=True)
    p.add_argument("--w-width", type=int, required=True)
    p.add_argument("--delta-range", type=_delta_range, required=True, help="LO..HI, e.g. --delta-range=-3..3")
    p.add_argument("--target", default="dsp48e2", choices=["ideal", "dsp48e2"])
    p.add_argument("--measure", action="store_true", help="add exhaustive mae_bar (scheme none)")
    p.add_argument("--format", default="csv", choices=["csv", "json", "markdown"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DspPackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
