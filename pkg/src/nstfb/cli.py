"""``nstfb`` command line interface.

Subcommands: ``gen``, ``solve``, ``bench``, ``rip``, ``certify``, ``superres``.
Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
"""
import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from . import bench, io, problems, rip, solvers
from .schedules import parse_schedule

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


# bench flags mirror ExperimentConfig keys; lists are comma separated
_BENCH_FLAG_TYPES = {
    "M": int,
    "N": int,
    "sparsity_grid": _int_list,
    "ensemble": str,
    "algorithms": _str_list,
    "trials": int,
    "success_threshold": float,
    "noise_sigmas": _float_list,
    "base_seed": int,
    "time_limit_per_solve": float,
    "epsilon": float,
    "max_iters": int,
    "noise_epsilon_factor": float,
    "matrix": str,
}


def _build_parser():
    p = _Parser(prog="nstfb", description="Sparse recovery solvers, RIP tools and benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a seeded instance (A.txt, x.txt, y.txt, manifest.json)")
    g.add_argument("--M", type=int, required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--ensemble", choices=[e.value for e in problems.Ensemble], default="gaussian")
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--matrix", choices=["gaussian", "identity"], default="gaussian")
    g.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("solve", help="solve one instance from files")
    s.add_argument("--matrix", required=True, help="matrix file for A")
    s.add_argument("--data", required=True, help="vector file for y")
    s.add_argument("--algo", choices=bench.ALGORITHMS, default="adpt")
    s.add_argument("--schedule", default="quad")
    s.add_argument("--s", type=int, help="sparsity for nst/iht/htp")
    s.add_argument("--P", type=int, default=1, help="indices per iteration for gomp")
    s.add_argument("--max-support", type=int)
    s.add_argument("--step", default="1.0", help="gradient step for iht/htp/ghtp, or 'auto'")
    s.add_argument("--eps", type=float, default=1e-10)
    s.add_argument("--max-iters", type=int, default=100)
    s.add_argument("--truth", help="vector file with the true signal, for error reporting")
    s.add_argument("--out", help="write the estimate to this vector file")

    b = sub.add_parser("bench", help="run a success/NMSE sweep and write a summary CSV")
    b.add_argument("--config", help="JSON experiment config")
    b.add_argument("--out", required=True, help="summary CSV path")
    b.add_argument("--records", help="also write per-trial records as CSV")
    b.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    b.add_argument("--jobs", type=int, default=bench.default_jobs())
    for key, typ in _BENCH_FLAG_TYPES.items():
        b.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)

    r = sub.add_parser("rip", help="restricted isometry constant of a matrix file")
    r.add_argument("--matrix", required=True)
    r.add_argument("--order", type=int, required=True)
    r.add_argument("--which", choices=rip.WHICH, default="delta")
    r.add_argument("--mc", type=int, metavar="TRIALS", help="Monte-Carlo lower bound instead")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--budget", type=int, help="enumeration budget (env NSTFB_ENUM_BUDGET)")
    r.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("certify", help="per-iteration convergence certificate")
    c.add_argument("--matrix", required=True)
    c.add_argument("--s", type=int, required=True)
    c.add_argument("--schedule", required=True)
    c.add_argument("--k-max", type=int, default=5)
    c.add_argument("--budget", type=int)

    sr = sub.add_parser("superres", help="on-grid spectral super-resolution pipeline")
    sr.add_argument("--J", type=int, required=True)
    sr.add_argument("--M", type=int, required=True)
    sr.add_argument("--grid", type=int, required=True)
    sr.add_argument("--seed", type=int, default=0)
    sr.add_argument("--trials", type=int, default=1)
    sr.add_argument("--schedule", default="quad")
    sr.add_argument("--eps", type=float, default=1e-10)
    sr.add_argument("--max-iters", type=int, default=100)
    return p


def _schedule(text):
    try:
        return parse_schedule(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_gen(args, out):
    if args.matrix == "identity" and args.M != args.N:
        raise UsageError("--matrix identity requires --M == --N")
    inst = problems.make_instance(args.M, args.N, args.s, args.ensemble, args.sigma, args.seed,
                                  args.matrix)
    path = problems.save_instance(inst, args.out)
    print(f"wrote instance to {path}", file=out)


def _cmd_solve(args, out):
    needs_s = args.algo in ("nst", "iht", "htp")
    if needs_s and args.s is None:
        raise UsageError(f"--s is required for --algo {args.algo}")
    A = io.read_matrix(args.matrix)
    y = io.read_vector(args.data)
    config = solvers.SolverConfig(args.eps, args.max_iters)
    try:
        step = solvers.resolve_step(args.step if args.step == "auto" else float(args.step), A)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    algo = args.algo
    if algo == "adpt":
        res = solvers.adpt_nst_ht_fb(A, y, _schedule(args.schedule), config)
    elif algo == "nst":
        res = solvers.nst_ht_fb(A, y, args.s, config)
    elif algo == "omp":
        res = solvers.omp(A, y, args.max_support, config)
    elif algo == "gomp":
        res = solvers.gomp(A, y, args.P, args.max_support, config)
    elif algo == "iht":
        res = solvers.iht(A, y, args.s, step, config)
    elif algo == "htp":
        res = solvers.htp(A, y, args.s, step, config)
    else:
        res = solvers.ghtp(A, y, _schedule(args.schedule), step, config)

    is_complex = res.estimate.dtype.kind == "c"
    print(f"status: {res.status}", file=out)
    print(f"iterations: {res.iterations}", file=out)
    print(f"residual: {res.residual!r}", file=out)
    print(f"support: {' '.join(map(str, res.support.tolist()))}", file=out)
    if args.truth:
        x = io.read_vector(args.truth)
        err = problems.relative_error(res.estimate, x)
        print(f"rel_error: {err!r}", file=out)
    print("estimate:", " ".join(io.format_scalar(v, is_complex) for v in res.estimate), file=out)
    if args.out:
        io.write_matrix(args.out, res.estimate)


def _cmd_bench(args, out):
    base = bench.load_config(args.config).to_dict() if args.config else {}
    base.pop("schema_version", None)
    for key in _BENCH_FLAG_TYPES:
        value = getattr(args, key)
        if value is not None:
            base[key] = value
    try:
        cfg = bench.ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid experiment config: {exc}") from None
    records = bench.run_experiment(cfg, jobs=args.jobs)
    rows = bench.summarize(records)
    bench.write_csv(rows, args.out)
    manifest = args.manifest or str(Path(args.out).with_suffix(".manifest.json"))
    bench.write_manifest(cfg, manifest)
    if args.records:
        with open(args.records, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            names = [f.name for f in dataclasses.fields(bench.TrialRecord)]
            w.writerow(names)
            for rec in records:
                w.writerow([getattr(rec, n) for n in names])
    print(f"wrote {len(rows)} summary rows to {args.out}", file=out)


def _cmd_rip(args, out):
    A = io.read_matrix(args.matrix)
    if args.mc:
        report = rip.mc_lower_bound(A, args.order, args.which, args.mc, args.seed)
    else:
        report = rip.exact_constant(A, args.order, args.which, args.budget, args.jobs)
    csv.writer(out, lineterminator="\n").writerow(report.as_row(Path(args.matrix).stem))


def _cmd_certify(args, out):
    A = io.read_matrix(args.matrix)
    rows = solvers.convergence_certificate(A, args.s, _schedule(args.schedule), args.k_max,
                                           args.budget)
    w = csv.writer(out, lineterminator="\n")
    names = [f.name for f in dataclasses.fields(solvers.CertificateRow)]
    w.writerow(names)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in dataclasses.astuple(row)])


def _cmd_superres(args, out):
    config = solvers.SolverConfig(args.eps, args.max_iters)
    seeds = range(args.seed, args.seed + args.trials)
    recs = bench.run_superres(args.J, args.M, args.grid, seeds, _schedule(args.schedule), config)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["seed", "locations_ok", "amp_rel_error", "iterations", "status",
                "true_locations", "found_locations"])
    for r in recs:
        w.writerow([r.seed, r.locations_ok, repr(r.amp_rel_error), r.iterations, r.status,
                    " ".join(map(str, r.true_locations)), " ".join(map(str, r.found_locations))])
    ok = sum(r.locations_ok and r.amp_rel_error <= 1e-6 for r in recs)
    print(f"# recovered {ok}/{len(recs)}", file=out)


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "rip": _cmd_rip,
    "certify": _cmd_certify,
    "superres": _cmd_superres,
}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](args, out)
    except UsageError as exc:
        parser.print_usage(err)
        print(f"nstfb {args.command}: error: {exc}", file=err)
        return USAGE_ERROR
    except Exception as exc:
        print(f"nstfb {args.command}: {type(exc).__name__}: {exc}", file=err)
        return RUNTIME_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
