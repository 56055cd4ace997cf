"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 input error, 3 band-limit error.
Defaults for --lmax, --tol, --depth, --family, --format and --seed can be set
through SU2PDO_LMAX, SU2PDO_TOL, and so on.
"""
import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import serialize as ser
from .diffops import FAMILIES, named, apply, apply_multi, admissibility_report, taylor_frame
from .harmonic import FourierCoefficients, build_grid, forward, inverse, parseval_gap, sample
from .opcatalog import CATALOG, builtin, entry, gh_classify
from .su2rep import TWICE_LMAX, BandLimitError, HalfInt
from .symcalc import fit_symbol_class, hypoellipticity_check, parametrix
from .verify import all_checks

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BAND = 0, 1, 2, 3
ENV_PREFIX = "SU2PDO_"


@dataclass
class RunConfig:
    lmax: HalfInt
    tol: float = 0.15
    depth: int = 2
    family: str = "qij"
    out: str = None
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.lmax.twice <= TWICE_LMAX:
            raise ser.InputError(f"lmax must lie in [0, {TWICE_LMAX / 2}]")
        if self.tol <= 0:
            raise ser.InputError("tolerance must be positive")
        if self.family not in FAMILIES:
            raise ser.InputError(f"unknown family {self.family!r}")


def _env(name, default):
    return os.environ.get(ENV_PREFIX + name.upper(), default)


def _halfint(text):
    try:
        return HalfInt.of(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a half-integer: {text}") from None


def _complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lmax", type=_halfint, default=_halfint(_env("lmax", "16")))
    common.add_argument("--tol", type=float, default=float(_env("tol", "0.15")))
    common.add_argument("--depth", type=int, default=int(_env("depth", "2")))
    common.add_argument("--family", default=_env("family", "qij"))
    common.add_argument("--out", default=_env("out", None))
    common.add_argument("--format", choices=("json", "csv"), default=_env("format", "json"))
    common.add_argument("--seed", type=int, default=int(_env("seed", "0")))

    p = argparse.ArgumentParser(prog="su2pdo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("transform", parents=[common], help="samples or modes -> coefficients")
    s.add_argument("input")
    s.add_argument("--parseval", action="store_true", help="report the Parseval gap")

    s = sub.add_parser("synthesize", parents=[common], help="coefficients -> grid samples")
    s.add_argument("input")

    def symbol_source(s):
        g = s.add_mutually_exclusive_group(required=True)
        g.add_argument("input", nargs="?")
        g.add_argument("--builtin", dest="name")
        s.add_argument("--c", type=_complex, default=0j)
        s.add_argument("--k", type=int, default=1)

    s = sub.add_parser("diff", parents=[common], help="apply difference operators")
    symbol_source(s)
    s.add_argument("--op", action="append", default=[], help="D11, D12, tri+, ... (repeatable)")
    s.add_argument("--alpha", type=int, nargs="+", help="multi-index over --family")

    s = sub.add_parser("classify", parents=[common], help="fit (m, rho, delta)")
    symbol_source(s)
    s.add_argument("--parametrix", action="store_true", help="classify the parametrix instead")

    s = sub.add_parser("hypoel", parents=[common], help="hypoellipticity report")
    s.add_argument("--name", required=True)
    s.add_argument("--c", type=_complex, default=0j)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--m", type=float, default=2.0)
    s.add_argument("--m0", type=float, default=1.0)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=0.0)

    s = sub.add_parser("parametrix", parents=[common], help="parametrix symbol")
    symbol_source(s)
    s.add_argument("--N", type=int, default=0)

    s = sub.add_parser("catalog", parents=[common], help="list entries or verify all examples")
    s.add_argument("--verify-all", action="store_true")
    return p


def _emit(cfg, payload, rows=None):
    if cfg.format == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf)
        for r in rows:
            w.writerow(r)
        text = buf.getvalue()
    else:
        text = ser.dumps(payload) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_function(d, cfg):
    kind = d.get("kind")
    if kind == "function":
        return ser.function_from_json(d)
    grid = build_grid(cfg.lmax)
    if kind == "constant":
        v = ser.decode_complex(d.get("value", 1.0))
        return sample(lambda e: np.full(e.shape[:-1], v), grid)
    if kind == "fourier_coefficients":
        return inverse(ser.coefficients_from_json(d), build_grid(HalfInt(
            max(int(d.get("twice_ell_max", 0)), cfg.lmax.twice))))
    raise ser.InputError(f"unknown function kind {kind!r}")


def _read_symbol(args, cfg):
    if args.name:
        return builtin(args.name, cfg.lmax.twice, args.c, args.k)
    return ser.symbol_from_json(ser.load(args.input), cfg.lmax.twice)


def cmd_transform(args, cfg):
    f = _read_function(ser.load(args.input), cfg)
    L = cfg.lmax if "lmax" in args.explicit else None
    c = forward(f, L)
    out = ser.coefficients_to_json(c)
    if args.parseval:
        out["parseval_gap"] = parseval_gap(f, L)
    _emit(cfg, out)
    return EXIT_OK


def cmd_synthesize(args, cfg):
    c = ser.coefficients_from_json(ser.load(args.input))
    tb = max(c.twice_max, cfg.lmax.twice) if "lmax" in args.explicit else c.twice_max
    _emit(cfg, ser.function_to_json(inverse(c, build_grid(HalfInt(tb)))))
    return EXIT_OK


def cmd_diff(args, cfg):
    sym = _read_symbol(args, cfg)
    for key in reversed(args.op):
        sym = apply(named(key), sym)
    if args.alpha:
        fam = FAMILIES[cfg.family]()
        if len(args.alpha) != len(fam):
            raise ser.InputError(f"--alpha needs {len(fam)} entries for family {cfg.family}")
        sym = apply_multi(fam, tuple(args.alpha), sym)
    _emit(cfg, ser.symbol_to_json(sym))
    return EXIT_OK


def cmd_classify(args, cfg):
    sym = _read_symbol(args, cfg)
    if args.parametrix:
        sym = parametrix([sym], 0).symbol
    fit = fit_symbol_class(sym, FAMILIES[cfg.family](), alpha_depth=cfg.depth)
    rows = [("alpha", "beta", "slope", "residual")]
    rows += [(" ".join(map(str, a)), " ".join(map(str, b)), s, r)
             for (a, b), (s, r) in fit.slopes.items()]
    _emit(cfg, fit.to_dict(), rows)
    return EXIT_OK


def cmd_hypoel(args, cfg):
    sym = builtin(args.name, cfg.lmax.twice, args.c, args.k)
    rep = hypoellipticity_check(sym, args.m, args.m0, args.rho, args.delta,
                                FAMILIES[cfg.family](), cfg.depth, cfg.tol)
    out = rep.to_dict()
    try:
        out["classification"] = gh_classify(args.name, args.c, args.k, cfg.lmax.twice).to_dict()
    except (KeyError, ValueError):
        pass
    _emit(cfg, out)
    return EXIT_OK if rep.verdict else EXIT_FAIL


def cmd_parametrix(args, cfg):
    sym = _read_symbol(args, cfg)
    frame = taylor_frame(FAMILIES[cfg.family](), args.N + 1) if args.N else None
    par = parametrix([sym], args.N, frame) if frame else parametrix([sym], 0)
    _emit(cfg, {"symbol": ser.symbol_to_json(par.symbol), "singular_ells":
                [float(x) for x in par.singular_ells], "N": args.N})
    return EXIT_OK


def cmd_catalog(args, cfg):
    if args.verify_all:
        checks = all_checks(cfg.seed)
        rows = [("check", "passed", "detail")] + [(c.name, c.passed, c.detail) for c in checks]
        _emit(cfg, {"checks": [vars(c) for c in checks],
                    "passed": all(c.passed for c in checks)}, rows)
        return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
    items = []
    for name, e in CATALOG.items():
        items.append({"name": name, "order": e.order, "elliptic": e.elliptic,
                      "hypoelliptic": e.hypoelliptic, "params": list(e.params),
                      "description": e.provenance})
    rows = [("name", "order", "elliptic", "hypoelliptic", "description")]
    rows += [(i["name"], i["order"], i["elliptic"], i["hypoelliptic"], i["description"])
             for i in items]
    _emit(cfg, {"entries": items}, rows)
    return EXIT_OK


COMMANDS = {"transform": cmd_transform, "synthesize": cmd_synthesize, "diff": cmd_diff,
            "classify": cmd_classify, "hypoel": cmd_hypoel, "parametrix": cmd_parametrix,
            "catalog": cmd_catalog}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.explicit = {a.split("=")[0].lstrip("-") for a in argv if a.startswith("--")}
    if ENV_PREFIX + "LMAX" in os.environ:
        args.explicit.add("lmax")
    try:
        cfg = RunConfig(args.lmax, args.tol, args.depth, args.family, args.out, args.format,
                        args.seed)
        return COMMANDS[args.command](args, cfg)
    except BandLimitError as exc:
        print(f"band-limit error: {exc}", file=sys.stderr)
        return EXIT_BAND
    except (ValueError, KeyError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
