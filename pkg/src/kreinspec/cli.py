"""Command line front end.

Subcommands:

    solve    full pipeline: region, both searches, cross-validation,
             bound verdicts; exit code reflects the outcome
    scan     CSV grid of both characteristic functions over a rectangle
    bounds   norms, the three bounds, and the derived search region
    kernel   CSV grid of the free resolvent kernel at one lambda

Every subcommand takes --config PATH (required), repeatable
--set KEY=VALUE overrides with dotted paths, --out PATH, and
--format {json,csv}.  Grid subcommands default to CSV, the others to
the configured output format (json unless overridden).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .bounds import ABS_COEFF, IM_COEFF, eigenvalue_region
from .config import (ConfigError, OutputParams, RunConfig, apply_override,
                     config_from_dict, load_config)
from .pipeline import (KERNEL_COLUMNS, SCAN_COLUMNS, dumps_17g, format_float,
                       kernel_rows, report_to_dict, rows_to_csv, scan_rows,
                       solve)
from .potentials import potential_from_config


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kreinspec",
        description="non-real eigenvalues of the sign-indefinite "
                    "Sturm-Liouville operator, two independent routes")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = (
        ("solve", "run the full two-route eigenvalue pipeline"),
        ("scan", "tabulate |D| and |det| on a lambda grid (CSV)"),
        ("bounds", "print norms, bounds, and the search region"),
        ("kernel", "tabulate the free resolvent kernel (CSV)"),
    )
    for name, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH",
                       help="JSON configuration file")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE",
                       help="override a config key (dotted path, repeatable)")
        p.add_argument("--out", metavar="PATH", help="write output here "
                       "instead of the configured path or stdout")
        p.add_argument("--format", choices=("json", "csv"),
                       help="output format (grids default to csv)")
    return parser


def _load(args) -> RunConfig:
    doc = load_config(args.config)
    for ov in args.overrides:
        apply_override(doc, ov)
    cfg = config_from_dict(doc)
    if args.out or args.format:
        cfg = replace(cfg, output=OutputParams(
            path=args.out if args.out else cfg.output.path,
            format=args.format if args.format else cfg.output.format))
    return cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(cfg: RunConfig) -> int:
    report = solve(cfg)
    if cfg.output.format == "csv":
        rows = [(l.real, l.imag) for l in report.eigenvalues]
        rows += [(l.real, l.imag) for l in report.mirrored]
        text = rows_to_csv(("re", "im"), rows)
    else:
        text = dumps_17g(report_to_dict(report)) + "\n"
    _emit(text, cfg.output.path)
    return report.exit_code


def _cmd_scan(cfg: RunConfig, explicit_format: str | None) -> int:
    rows = scan_rows(cfg)
    fmt = explicit_format or "csv"
    if fmt == "json":
        text = dumps_17g({"columns": list(SCAN_COLUMNS),
                          "rows": [list(r) for r in rows]}) + "\n"
    else:
        text = rows_to_csv(SCAN_COLUMNS, rows)
    _emit(text, cfg.output.path)
    return 0


def _cmd_kernel(cfg: RunConfig, explicit_format: str | None) -> int:
    rows = kernel_rows(cfg)
    fmt = explicit_format or "csv"
    if fmt == "json":
        text = dumps_17g({"columns": list(KERNEL_COLUMNS),
                          "rows": [list(r) for r in rows]}) + "\n"
    else:
        text = rows_to_csv(KERNEL_COLUMNS, rows)
    _emit(text, cfg.output.path)
    return 0


def _cmd_bounds(cfg: RunConfig) -> int:
    if cfg.potential is None:
        raise ConfigError("bounds requires a potential")
    try:
        q = potential_from_config(cfg.potential)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    norms = q.l1_norms()
    region = eigenvalue_region(q, eps_floor=cfg.eps_floor)
    data = {
        "norms": {"total": norms.total, "positive": norms.positive,
                  "negative": norms.negative},
        "bound_values": {
            "abs_vs_total_norm": norms.total ** 2,
            "im_vs_negative_norm": IM_COEFF * norms.negative ** 2,
            "abs_vs_negative_norm": ABS_COEFF * norms.negative ** 2,
        },
        "region": None if region is None else {
            "re_min": region.re_min, "re_max": region.re_max,
            "im_min": region.im_min, "im_max": region.im_max},
    }
    if cfg.output.format == "json":
        text = dumps_17g(data) + "\n"
    else:
        lines = [
            f"norm_q = {format_float(norms.total)}",
            f"norm_q_plus = {format_float(norms.positive)}",
            f"norm_q_minus = {format_float(norms.negative)}",
            "bound_abs_vs_total_norm = "
            + format_float(norms.total ** 2),
            "bound_im_vs_negative_norm = "
            + format_float(IM_COEFF * norms.negative ** 2),
            "bound_abs_vs_negative_norm = "
            + format_float(ABS_COEFF * norms.negative ** 2),
        ]
        if region is None:
            lines.append("no non-real eigenvalues possible")
        else:
            lines.append(
                "region = "
                f"[{format_float(region.re_min)}, {format_float(region.re_max)}]"
                f" x [{format_float(region.im_min)}, {format_float(region.im_max)}]")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.output.path)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "solve":
            return _cmd_solve(cfg)
        if args.command == "scan":
            return _cmd_scan(cfg, args.format)
        if args.command == "kernel":
            return _cmd_kernel(cfg, args.format)
        return _cmd_bounds(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
