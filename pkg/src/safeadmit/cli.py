"""Command line entry point: simulate, bounds, metrics, compare.

Exit status: 0 ok, 2 rejected configuration or input, 3 safety violation,
4 numerical divergence.
"""
import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import load_scenario
from .errors import ConfigRejected, NumericalDivergence, SafeAdmitError
from .simkit import compute_metrics, precheck, run_scenario
from .simkit.log import SchemaError, TrajectoryLog

EXIT_OK, EXIT_REJECTED, EXIT_UNSAFE, EXIT_DIVERGED = 0, 2, 3, 4
OUT_DIR_ENV = "SAFEADMIT_OUT_DIR"
DEFAULT_OUT_DIR = "safeadmit_out"


def _section(name, lines, stream=None):
    stream = stream or sys.stdout
    print(f"[{name}]", file=stream)
    for line in lines:
        print(line, file=stream)
    print(file=stream)


def _out_dir(arg):
    out = Path(arg or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(path, seed=None, dt=None, duration=None):
    s = load_scenario(path)
    changes = {k: v for k, v in (("seed", seed), ("dt", dt), ("duration", duration)) if v is not None}
    return s.with_(**changes) if changes else s


def _write(path, text):
    Path(path).write_text(text)
    return Path(path)


def simulate_one(cfg_path, out_dir, seed=None, dt=None, duration=None, figures=True):
    """Run one config and write its artifacts. Returns (exit status, printed text)."""
    from io import StringIO
    buf = StringIO()
    try:
        s = _load(cfg_path, seed, dt, duration)
        pre = precheck(s)
    except ConfigRejected as exc:
        return EXIT_REJECTED, f"error: {exc}\n"
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pre_text = "\n".join(pre.lines()) + "\n"
    buf.write(pre_text + "\n")
    pre_path = _write(out_dir / "prechecks.txt", pre_text)
    try:
        log = run_scenario(s, pre)
    except NumericalDivergence as exc:
        print(f"error: {exc}", file=buf)
        return EXIT_DIVERGED, buf.getvalue()
    written = [pre_path, out_dir / "trajectory.csv"]
    log.to_csv(written[1])
    report = log.safety_report()
    written.append(_write(out_dir / "safety_report.txt", report))
    metrics = compute_metrics(log, s.error_channel)
    written.append(_write(out_dir / "metrics.txt", "\n".join(["[metrics]"] + metrics.lines()) + "\n"))
    if figures:
        from .plots import render_run
        written.extend(render_run(log, out_dir, s))
    buf.write(report + "\n")
    _section("metrics", metrics.lines(), buf)
    _section("artifacts", [str(p) for p in written], buf)
    return (EXIT_UNSAFE if log.violated else EXIT_OK), buf.getvalue()


def _simulate_job(args):
    return simulate_one(*args)


def cmd_simulate(args):
    target = Path(args.config)
    out = _out_dir(args.out)
    if target.is_dir():
        cfgs = sorted(target.glob("*.cfg"))
        if not cfgs:
            print(f"error: no .cfg files in {target}", file=sys.stderr)
            return EXIT_REJECTED
        jobs = [(c, out / c.stem, args.seed, args.dt, args.duration, not args.no_figures) for c in cfgs]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                results = list(ex.map(_simulate_job, jobs))
        else:
            results = [_simulate_job(j) for j in jobs]
        for cfg, (code, text) in zip(cfgs, results):
            _section("run", [f"config = {cfg}", f"exit_status = {code}"])
            sys.stdout.write(text)
        return max(code for code, _ in results)
    code, text = simulate_one(target, out, args.seed, args.dt, args.duration, not args.no_figures)
    (sys.stderr if code == EXIT_REJECTED else sys.stdout).write(text)
    return code


def cmd_bounds(args):
    try:
        s = _load(args.config)
        from .bounds import envelope_table
        models = s.reference_models()
        rows, dbar = envelope_table(s.mismatch, (models.A1, models.A2))
    except (ConfigRejected, SafeAdmitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    lines = ["subsystem,axis,lam1,lam2,delta,t_s,beta,neg_inv_k1"]
    for r in rows:
        lines.append(f"{r['subsystem']},{r['axis']},{r['lam1']:.9g},{r['lam2']:.9g},{r['delta']:.9g},"
                     f"{r['t_s']:.9g},{r['beta']:.9g},{r['pos_limit']:.9g}")
    _section("envelope", lines)
    _section("dbar", [f"mismatch = {s.mismatch:.9g}", f"dbar = {dbar:.9g}"])
    return EXIT_OK


def cmd_metrics(args):
    try:
        log = TrajectoryLog.from_csv(args.csv)
        metrics = compute_metrics(log, args.channel)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    _section("metrics", metrics.lines())
    return EXIT_OK


def cmd_compare(args):
    out = _out_dir(args.out)
    try:
        base = _load(args.config, args.seed, duration=args.duration)
        runs = {}
        for ctrl in ("proposed", "invariance_baseline"):
            s = base.with_(controller=ctrl)
            runs[ctrl] = run_scenario(s, precheck(s))
    except ConfigRejected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except NumericalDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    records = {k: compute_metrics(v, base.error_channel) for k, v in runs.items()}
    fields = ["ISE", "IAE", "ITSE", "ITAE", "rms_u", "tv_u", "switch_count"]
    rows = ["controller," + ",".join(fields)]
    for k, r in records.items():
        d = r.as_dict()
        rows.append(k + "," + ",".join(repr(float(d[f])) if f != "switch_count" else str(d[f]) for f in fields))
    _write(out / "compare.csv", "\n".join(rows) + "\n")
    for k, log in runs.items():
        log.to_csv(out / f"trajectory_{k}.csv")
    verdict = records["invariance_baseline"].tv_u > records["proposed"].tv_u
    from .plots import plot_comparison
    fig = plot_comparison(runs, out / "comparison.png")
    _section("compare", rows)
    _section("verdict", [
        f"tv_u_proposed = {records['proposed'].tv_u:.9g}",
        f"tv_u_baseline = {records['invariance_baseline'].tv_u:.9g}",
        f"baseline_chatters_more = {'true' if verdict else 'false'}",
    ])
    _section("artifacts", [str(out / "compare.csv"), str(fig)] + [str(out / f"trajectory_{k}.csv") for k in runs])
    return EXIT_UNSAFE if any(log.violated for log in runs.values()) else EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="safeadmit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write trajectory, reports and figures")
    p.add_argument("config", help="scenario config file, or a directory of them")
    p.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--jobs", type=int, default=1, help="parallel runs when CONFIG is a directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="print the error envelope table")
    p.add_argument("config")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("metrics", help="error and effort metrics of a trajectory CSV")
    p.add_argument("csv")
    p.add_argument("--channel", default="axis:1", help="axis[:i], norm or sum")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="proposed controller against the invariance baseline")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
