"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 capacity error, 3 acceptance FAIL.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from fractions import Fraction

from . import asymptotics, config, matrixlaw, network, simulate, tau, verify
from .errors import CapacityError, HeavyTailError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY, EXIT_FAIL = 0, 1, 2, 3


def fmt(v) -> str:
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "INF"
        if math.isnan(v):
            raise ValueError("NaN in numeric output")
        return repr(v)
    return str(v)


def write_csv(rows, header, out=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def write_figure3(alpha: int, out_dir: str) -> str:
    path = os.path.join(out_dir, f"fig3_alpha{alpha}.csv")
    write_csv(network.figure3_data(alpha), ["t", "set", "independent", "dependent"], path)
    return path


def _need(cfg, *fields):
    for f in fields:
        if getattr(cfg, f) is None:
            raise ValidationError(f"config: field {f!r} is required for this command")


def cmd_tau(args):
    cfg = config.load(args.config)
    _need(cfg, "law")
    rows = []
    for m, (A, _) in enumerate(matrixlaw.enumerate_support(cfg.law)):
        q, d = A.shape
        for k in range(1, q + 1):
            ik = tau.critical_index(A, k)[0]
            for i in range(1, d + 1):
                rows.append((m, k, i, float(tau.tau_matrix(A, k, i)), ik))
    write_csv(rows, ["atom", "k", "i", "tau", "i_k"], args.out)


def cmd_partition(args):
    cfg = config.load(args.config)
    _need(cfg, "law")
    rep = matrixlaw.partition(cfg.law, args.k, seed=args.seed or cfg.seed or 0)
    rows = [(i, float(m), str(m) if isinstance(m, Fraction) else fmt(m), int(i == rep.i_star))
            for i, m in rep.masses.items()]
    write_csv(rows, ["i", "mass", "exact", "i_star"], args.out)


def _expansion(cfg, args):
    _need(cfg, "margins", "law", "risk_set")
    n = args.samples or cfg.samples or 400_000
    seed = args.seed if args.seed is not None else (cfg.seed or 0)
    return asymptotics.expansion(cfg.margins, cfg.law, cfg.risk_set, args.k, n=n, seed=seed)


def cmd_expand(args):
    cfg = config.load(args.config)
    exp = _expansion(cfg, args)
    rows = [(t.i, t.exponent, t.coefficient, t.stderr, t.method) for t in exp.terms]
    write_csv(rows, ["i", "exponent", "coefficient", "stderr", "method"], args.out)


def cmd_simulate(args):
    cfg = config.load(args.config)
    _need(cfg, "margins", "law", "risk_set")
    if not cfg.t_grid:
        raise ValidationError("t_grid: needs at least one value")
    seed = args.seed if args.seed is not None else cfg.seed
    if seed is None:
        raise ValidationError("seed: required for Monte Carlo (config field or --seed)")
    n = args.samples or cfg.samples or 1_000_000
    exp = _expansion(cfg, args)
    rows = simulate.ratio_table(cfg.margins, cfg.law, cfg.risk_set, cfg.t_grid, n, seed,
                                expansion=exp, threads=args.threads)
    write_csv([(r.t, r.p_hat, r.stderr, r.full_eval, r.leading_eval, r.ratio_full, r.ratio_leading)
               for r in rows],
              ["t", "p_hat", "stderr", "full_eval", "leading_eval", "ratio_full", "ratio_leading"], args.out)


def cmd_verify(args):
    if args.name not in verify.NAMES and not args.name.isdigit():
        raise ValidationError(f"unknown acceptance scenario {args.name!r}; "
                              f"choose from {', '.join(verify.NAMES)} or 1-9")
    numbers = (int(args.name),) if args.name.isdigit() else verify.NAMES[args.name]
    if any(not 1 <= n <= 9 for n in numbers):
        raise ValidationError("criterion numbers run from 1 to 9")
    ok = True
    for n in numbers:
        res = verify.run(n)
        for c in res.checks:
            print(f"  {'ok ' if c.passed else 'BAD'} {c.name}: {c.detail}")
        print(res.line())
        ok &= res.passed
    if args.name == "example-3-8":
        rows = verify.example_38_table()
        write_csv([(r.t, r.p_hat, r.stderr, r.full_eval, r.leading_eval, r.ratio_full, r.ratio_leading)
                   for r in rows],
                  ["t", "p_hat", "stderr", "full_eval", "leading_eval", "ratio_full", "ratio_leading"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_network(args):
    if args.name not in network.SCENARIOS:
        raise ValidationError(f"unknown scenario {args.name!r}; choose from {', '.join(network.SCENARIOS)}")
    sc = network.scenario(args.name)
    rows = []
    for key, model in sc.models.items():
        for s, C in sc.sets.items():
            exp = asymptotics.expansion(model, sc.law, C, C.k, seed=args.seed or 0)
            e, c = asymptotics.leading_order(exp)
            stated = sc.expected.get((key, s), ("", ""))
            method = next(t.method for t in exp.terms if t.i == exp.iota_bar)
            rows.append((key, s, C.k, e, c, stated[0], stated[1], method))
    write_csv(rows, ["model", "set", "k", "exponent", "coefficient", "stated_exponent",
                     "stated_coefficient", "method"], args.out)
    if args.name == "prop41":
        print(network.pair_mass_report(5, 3).text(), file=sys.stderr)
    if args.figure3:
        for alpha in (1, 2):
            print(write_figure3(alpha, args.out_dir), file=sys.stderr)


def build_parser():
    p = argparse.ArgumentParser(prog="heavytail", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: HEAVYTAIL_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("tau", help="tau table for every atom of a law")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_tau)

    for name, func, helptext in (("partition", cmd_partition, "masses of i_k(A) = i"),
                                 ("expand", cmd_expand, "tail expansion terms"),
                                 ("simulate", cmd_simulate, "empirical ratios against the expansion")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config")
        s.add_argument("--k", type=int, required=True)
        s.add_argument("--out")
        s.set_defaults(func=func)

    s = sub.add_parser("verify", help="run an acceptance scenario")
    s.add_argument("name")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("network", help="canned network scenarios")
    s.add_argument("name")
    s.add_argument("--figure3", action="store_true", help="write fig3_alpha1.csv and fig3_alpha2.csv")
    s.add_argument("--out-dir", default=".")
    s.add_argument("--out")
    s.set_defaults(func=cmd_network)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be positive", file=sys.stderr)
            return EXIT_INVALID
        os.environ["HEAVYTAIL_THREADS"] = str(args.threads)
    try:
        code = args.func(args)
    except CapacityError as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, HeavyTailError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK if code is None else code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
