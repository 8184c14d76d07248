"""crossmap command line: gen, grid, rho, validate.

Exit codes: 0 ok, 1 validation failure, 2 bad flags, 3 I/O failure,
4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as cio
from . import specfun, validate
from .bundles import HopfTarget, ProductSpace
from .crosses import Ball, CrossSpace
from .samplers import CHUNK, parse_sampler, rng_for
from .targets import parse_target

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4
EDGE = 1e-12
RHO_TOL = 1e-10


class UsageError(Exception):
    pass


def _target(text):
    try:
        return parse_target(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def thread_count(flag):
    env = os.environ.get("CROSSMAP_THREADS")
    n = flag if flag is not None else (int(env) if env else 1)
    if env:
        n = min(n, int(env))
    return max(1, n)


def map_chunks(target, sampler, count, threads=1, numeric=False):
    """Mapped rows in sampler index order; chunking fixes the arithmetic."""
    nchunks = -(-count // CHUNK)

    def work(c):
        x = sampler.chunk(c, count)
        if isinstance(target, (ProductSpace, HopfTarget)):
            return target.phi(x)
        return target.phi(x, numeric=numeric)

    if nchunks == 0:
        return np.zeros((0, target.ambient_dim))
    if threads > 1 and nchunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, range(nchunks)))
    else:
        parts = [work(c) for c in range(nchunks)]
    return np.concatenate(parts, axis=0)


def _write(path, data: bytes):
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _verify(target, rows):
    ok = np.asarray(target.check_points(rows))
    if not np.all(ok):
        bad = int(np.count_nonzero(~ok))
        raise specfun.SpecfunError(f"verify: {bad} rows violate the point invariant")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    target = _target(args.target)
    try:
        sampler = parse_sampler(args.sampler, target.dim, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    count = args.count if args.count is not None else sampler.natural_count()
    if count is None:
        raise UsageError(f"--count is required for the {sampler.kind} sampler")
    if count < 0:
        raise UsageError("--count must be >= 0")
    rows = map_chunks(target, sampler, count, thread_count(args.threads), args.numeric)
    if args.verify:
        _verify(target, rows)
    _write(args.output, cio.encode(rows, args.format))
    if args.meta:
        meta = {"target": args.target, "sampler": args.sampler, "seed": args.seed,
                "count": int(count), "dim_out": int(target.ambient_dim), "format": args.format}
        with open(args.meta, "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def grid_lines(k: int, m: int):
    """Cube polylines: k+1 lines u = i/k and k+1 lines v = i/k, m points each."""
    ticks = np.clip(np.arange(k + 1) / k, EDGE, 1 - EDGE)
    s = np.clip(np.linspace(0.0, 1.0, m), EDGE, 1 - EDGE)
    lines = []
    for t in ticks:
        lines.append(np.column_stack([np.full(m, t), s]))
    for t in ticks:
        lines.append(np.column_stack([s, np.full(m, t)]))
    return lines


def cmd_grid(args):
    target = _target(args.target)
    if args.k < 1 or args.m < 2:
        raise UsageError("--k must be >= 1 and --m >= 2")
    if target.dim == 2:
        header = ["polyline", "vertex"] + [f"x{j}" for j in range(target.ambient_dim)]
        out = [",".join(header)]
        for i, line in enumerate(grid_lines(args.k, args.m)):
            for j, row in enumerate(target.phi(line)):
                out.append(f"{i},{j}," + ",".join("%.17g" % v for v in row))
        _write(args.output, ("\n".join(out) + "\n").encode())
    else:
        sampler = parse_sampler(f"grid:{args.k}", target.dim)
        rows = map_chunks(target, sampler, sampler.natural_count())
        _write(args.output, cio.encode(rows, "csv"))
    if args.audit:
        n = args.audit_n or max(20 * args.k ** target.dim * 25, 1000)
        rep = validate.chi2_cell_test(target, args.k, n, seed=args.seed)
        print(rep.to_line(), file=sys.stderr)
        return EXIT_OK if rep.passed else EXIT_FAIL
    return EXIT_OK


def _radii(args):
    if args.r is not None and args.r_grid is not None:
        raise UsageError("use either --r or --r-grid")
    try:
        if args.r is not None:
            r = np.array([float(v) for v in args.r.split(",")])
        elif args.r_grid is not None:
            a, b, n = args.r_grid.split(":")
            r = np.linspace(float(a), float(b), int(n))
        else:
            r = np.linspace(0.0, 6.0, 13)
    except ValueError:
        raise UsageError("bad radius list (use --r 0,1,2 or --r-grid 0:6:100)") from None
    if np.any(~(r >= 0)):
        raise UsageError("radii must be >= 0")
    return r


def cmd_rho(args):
    target = _target(args.target)
    if not isinstance(target, (CrossSpace, Ball)):
        raise UsageError("rho needs a single space target (sphere, rp, cp, hp, op2, ball)")
    prof = target.profile
    r = _radii(args)
    rho = np.atleast_1d(prof.rho_of_r(r, numeric=args.numeric))
    a = prof.d / 2
    x = r * r / 2
    p = np.atleast_1d(specfun.gammainc_p(a, x))
    q = np.atleast_1d(specfun.gammainc_q(a, x))
    res = np.where(p <= 0.5, np.abs(np.atleast_1d(prof.cdf(rho)) - p),
                   np.abs(np.atleast_1d(prof.sf(rho)) - q))
    lines = ["r\trho\tresidual"]
    lines += [f"{ri:.17g}\t{pi:.17g}\t{ei:.3e}" for ri, pi, ei in zip(r, rho, res)]
    _write(args.output, ("\n".join(lines) + "\n").encode())
    if np.any(res > RHO_TOL):
        print(f"crossmap: residual above {RHO_TOL}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _profiles(target):
    if isinstance(target, ProductSpace):
        return [p for f in target.factors for p in _profiles(f)]
    return [target.profile]


def _jacobian_reports(target, points, seed):
    reports = []
    for prof in _profiles(target):
        rng = rng_for(seed, f"jacobian:{prof!r}")
        for _ in range(points):
            y = rng.standard_normal(prof.d)
            while np.linalg.norm(y) < 1e-3:
                y = rng.standard_normal(prof.d)
            reports.append(validate.jacobian_check(prof, y))
    return reports


def cmd_validate(args):
    target = _target(args.target)
    try:
        seeds = [int(s) for s in str(args.seed).split(",")]
    except ValueError:
        raise UsageError("--seed takes an integer or a comma list") from None
    reports = []
    for seed in seeds:
        if args.test == "radial-ks":
            reports.append(validate.ks_radial_test(target, args.n, seed=seed, warp=args.warp))
        elif args.test == "chi2":
            reports.append(validate.chi2_cell_test(target, args.k, args.n, seed=seed,
                                                   warp=args.warp))
        elif args.test == "jacobian":
            reports.extend(_jacobian_reports(target, args.points, seed))
        elif args.test == "hopf-ks":
            if not isinstance(target, HopfTarget):
                raise UsageError("hopf-ks needs a hopf:n target")
            reports.append(validate.hopf_vs_sphere_test(target.n, args.n, seed=seed))
        elif args.test == "cap":
            if not (isinstance(target, CrossSpace) and target.kind == "sphere" and target.n == 2):
                raise UsageError("cap test needs the sphere:2 target")
            reports.append(validate.cap_test_s2([0.0, 0.0, 1.0], args.theta, args.n, seed=seed))
        elif args.test == "njac":
            if not isinstance(target, HopfTarget):
                raise UsageError("njac needs a hopf:n target")
            reports.append(validate.njac_hopf_check(target.n, args.points, seed=seed))
    text = "".join(r.to_line() + "\n" for r in reports)
    _write(args.output, text.encode())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def read_config(path):
    """``key = value`` lines; '#' starts a comment."""
    cfg = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{num}: expected key = value")
            cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def build_parser():
    p = argparse.ArgumentParser(prog="crossmap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_type=int):
        sp.add_argument("--config", help="file of key = value defaults")
        sp.add_argument("--target", required=True, help="e.g. sphere:2, cp:1, op2, hopf:1")
        sp.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        sp.add_argument("--seed", default=0, type=seed_type)

    g = sub.add_parser("gen", help="map sampler points onto a target")
    common(g)
    g.add_argument("--sampler", default="random", help="random | grid:K | stratified:K | halton")
    g.add_argument("--count", type=int)
    g.add_argument("--format", choices=cio.FORMATS, default="csv")
    g.add_argument("--threads", type=int)
    g.add_argument("--numeric", action="store_true", help="force numeric radius inversion")
    g.add_argument("--verify", action="store_true", help="check every row's point invariant")
    g.add_argument("--meta", help="write a JSON provenance sidecar here")
    g.set_defaults(func=cmd_gen)

    gr = sub.add_parser("grid", help="images of cube grid lines")
    common(gr)
    gr.add_argument("--k", type=int, default=37)
    gr.add_argument("--m", type=int, default=64, help="points per polyline")
    gr.add_argument("--audit", action="store_true", help="run the equal-measure cell test")
    gr.add_argument("--audit-n", type=int)
    gr.set_defaults(func=cmd_grid)

    r = sub.add_parser("rho", help="tabulate the radius map")
    common(r)
    r.add_argument("--r", help="comma-separated radii")
    r.add_argument("--r-grid", help="a:b:n evenly spaced radii")
    r.add_argument("--numeric", action="store_true")
    r.set_defaults(func=cmd_rho)

    v = sub.add_parser("validate", help="run measure-preservation tests")
    common(v, seed_type=str)
    v.set_defaults(seed="1")
    v.add_argument("--test", choices=["radial-ks", "chi2", "jacobian", "hopf-ks", "cap", "njac"],
                   default="radial-ks")
    v.add_argument("--n", type=int, default=100_000)
    v.add_argument("--k", type=int, default=37)
    v.add_argument("--points", type=int, default=20)
    v.add_argument("--theta", type=float, default=math.pi / 2)
    v.add_argument("--warp", action="store_true", help="negative control: x -> x^2")
    v.set_defaults(func=cmd_validate)
    return p, sub


def _apply_config(parser, sub, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    cmd = next((a for a in argv if a in sub.choices), None)
    if cmd is None:
        return
    sp = sub.choices[cmd]
    acts = {a.dest: a for a in sp._actions}
    for key, val in cfg.items():
        if key not in acts:
            raise UsageError(f"unknown config key {key!r}")
        act = acts[key]
        if isinstance(act, argparse._StoreTrueAction):
            val = val.lower() in ("1", "true", "yes", "on")
        elif act.type is not None:
            try:
                val = act.type(val)
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {val!r}") from None
        act.required = False
        sp.set_defaults(**{key: val})


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    try:
        _apply_config(parser, sub, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except UsageError as e:
        print(f"crossmap: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"crossmap: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, specfun.SpecfunError, validate.UndersampledError,
            validate.StepSizeError, ValueError) as e:
        print(f"crossmap: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
