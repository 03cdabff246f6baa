"""``cvdvrate`` command line: compare, dv-rate, cv-rate, validate.

Exit codes: 0 success, 2 infeasible configuration, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings

from . import compare as C
from .config import add_override_flags, config_from_args
from .cv_repeater import CvLinkConfig, InfeasibleEof, default_nla_cutoff, run_two_link_repeater
from .dv_repeater import InfeasibleSchedule
from .fock import TruncationWarning, ZeroProbabilityBranch
from .rates import InfeasibleRate, cv_repeater_rate

EXIT_OK, EXIT_INTERNAL, EXIT_INFEASIBLE = 0, 1, 2
INFEASIBLE = (C.InfeasibleConfig, InfeasibleSchedule, InfeasibleEof, InfeasibleRate,
              ZeroProbabilityBranch)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(rows, stream) -> None:
    extra = []
    for r in rows:
        extra += [k for k in r if k not in C.CSV_COLUMNS and k not in extra]
    writer = csv.DictWriter(stream, fieldnames=list(C.CSV_COLUMNS) + extra,
                            restval="", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(v) for k, v in r.items()})


def cmd_compare(args) -> int:
    cfg = config_from_args(args)
    comp = C.run_comparison(cfg)
    if args.csv == "-":
        buf = io.StringIO()
        write_csv(comp.rows, buf)
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(comp.rows, fh)
    print(C.summary(comp))
    if not comp.cv.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_dv_rate(args) -> int:
    cfg = config_from_args(args)
    f_req, _ = C.resolve_targets(cfg)
    point = C.dv_point(cfg, float(args.f_initial), f_req)
    if not point.feasible:
        print(f"F_req={f_req:.4f} unreachable from F_i={args.f_initial}")
        return EXIT_INFEASIBLE
    print(f"F_i={point.f_initial:.4f} F_req={f_req:.4f} rounds={point.rounds} "
          f"F_pur={point.f_after_purification:.6f} F_swap={point.f_after_swap:.6f}")
    print(f"teleporter success={point.teleport_success:.4e}  EoF={point.eof:.4f}")
    for name, t in point.rate.components:
        print(f"  {name:>16s}: {t:.6e} s")
    print(f"rate={point.rate_hz:.6e} Hz")
    return EXIT_OK


def cmd_cv_rate(args) -> int:
    cfg = config_from_args(args)
    if args.gain is not None:
        link_cfg = CvLinkConfig(cfg.chi, cfg.link, gain=float(args.gain),
                                nla_cutoff=cfg.nla_cutoff or default_nla_cutoff(cfg.chi),
                                top_gain=None if args.top_gain is None else float(args.top_gain),
                                cutoff=cfg.cutoff, teleport_gain=cfg.teleport_gain)
        out = run_two_link_repeater(link_cfg, cfg.total)
        rate = cv_repeater_rate(out, cfg.link)
        gain = float(args.gain)
    else:
        _, target = C.resolve_targets(cfg)
        point = C.cv_point(cfg, target)
        if not point.feasible:
            print(point.message)
            return EXIT_INFEASIBLE
        out, rate, gain = point.optimum.output, point.optimum.rate, point.optimum.gain
    print(f"gain={gain:.6g} teleport_gain={out.teleport_gain:.4f} EoF={out.eof.eof:.4f} "
          f"p_link={out.p_link:.4e} p_top={out.p_top:.4e}")
    for name, t in rate.components:
        print(f"  {name:>16s}: {t:.6e} s")
    print(f"rate={rate.pairs_per_second:.6e} Hz")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import run_all

    cfg = config_from_args(args)
    return EXIT_OK if run_all(cfg.mc_trials, cfg.seed) else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvdvrate",
                                     description="DV vs CV repeater rates at matched EoF")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="YAML file of config keys")
        add_override_flags(p)
        p.set_defaults(func=func)
        return p

    p = add("compare", cmd_compare, "sweep F_i and compare DV and CV rates")
    p.add_argument("--csv", default="comparison.csv", help="output CSV path, '-' for stdout")
    p = add("dv-rate", cmd_dv_rate, "DV pipeline at one initial fidelity")
    p.add_argument("--f-initial", "--f_initial", dest="f_initial", required=True, type=float)
    p = add("cv-rate", cmd_cv_rate, "CV pipeline (optimised gain unless --gain is given)")
    p.add_argument("--gain", type=float)
    p.add_argument("--top-gain", "--top_gain", dest="top_gain", type=float)
    add("validate", cmd_validate, "run the oracle checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            if not getattr(args, "verbose", False):
                warnings.simplefilter("ignore", TruncationWarning)
            return args.func(args)
    except INFEASIBLE as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
