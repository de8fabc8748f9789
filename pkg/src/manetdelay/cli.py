"""Command-line front end: analytic rows, simulations, sweeps, CCDFs.

All output is long-format CSV with the fixed header
``param...,quantity,value,method,stderr,diverged,seed,window_radius``
(swept parameter columns first, absent fields empty).  Infinite values
are written as the literal ``INF``.  Exit codes: 0 ok, 1 verification
failure, 2 input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import __version__
from .analytic import (
    DelayValue,
    NoAnalyticRuleError,
    UnsupportedModelError,
    mean_delay,
    phase_classify,
)
from .configfile import (
    ConfigError,
    SweepSpec,
    override_scenario,
    read_scenario,
    read_sweep,
)
from .models import validate
from .quadrature import QuadratureError
from .simulate import (
    default_window_radius,
    estimate_delay_ccdf,
    estimate_mean_delay,
    estimate_shannon_delay,
)

HEADER_FIXED = ["quantity", "value", "method", "stderr", "diverged", "seed",
                "window_radius"]


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "INF"
        return f"{x:.10g}"
    return str(x)


class CsvSink:
    def __init__(self, param_names, out_path=None, echo=()):
        self.param_names = list(param_names)
        self.lines = [f"# manetdelay {__version__}"]
        self.lines += [f"# {line}" for line in echo]
        self.lines.append(",".join(self.param_names + HEADER_FIXED))
        self.out_path = out_path

    def row(self, params=(), quantity="", value="", method="", stderr="",
            diverged="", seed="", window_radius=""):
        cells = [_fmt(p) for p in params]
        cells += [_fmt(v) for v in
                  (quantity, value, method, stderr, diverged, seed, window_radius)]
        self.lines.append(",".join(cells))

    def flush(self, stream=None):
        text = "\n".join(self.lines) + "\n"
        if self.out_path:
            with open(self.out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            (stream or sys.stdout).write(text)


def _echo_config(path):
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                yield line


def _load_validated(path):
    cfg = read_scenario(path)
    violations = validate(cfg)
    errors = [v for v in violations if v.is_error]
    for v in violations:
        print(f"{v.level}: {v.message}", file=sys.stderr)
    if errors:
        raise ConfigError(f"{len(errors)} validation error(s) in {path}")
    return cfg


def _delay_row(sink, cfg, params=()):
    try:
        dv = mean_delay(cfg)
        sink.row(params, "mean_delay", dv.value, dv.method,
                 stderr=dv.abs_error if dv.abs_error else "")
        return dv
    except NoAnalyticRuleError:
        raise
    except UnsupportedModelError as exc:
        sink.row(params, "mean_delay", "", f"unsupported: {exc}")
        return None


def _verdict_row(sink, cfg, params=()):
    try:
        pv = phase_classify(cfg)
        sink.row(params, "phase_verdict", pv.verdict, pv.rule)
        sink.row(params, "threshold_lhs", pv.threshold_lhs, pv.rule)
        sink.row(params, "threshold_rhs", pv.threshold_rhs, pv.rule)
        return pv
    except NoAnalyticRuleError as exc:
        sink.row(params, "phase_verdict", "no_rule", str(exc))
        return None


def cmd_analytic(args) -> int:
    cfg = _load_validated(args.config)
    sink = CsvSink([], args.out, echo=_echo_config(args.config))
    _delay_row(sink, cfg)
    _verdict_row(sink, cfg)
    sink.flush()
    return 0


def _estimate_rows(sink, est, quantity, seed, params=()):
    sink.row(params, quantity, est.mean, est.estimator, est.std_error,
             est.diverged, seed, est.window_radius)
    for count, value in est.checkpoints:
        sink.row(params, f"running_mean_n{count}", value, est.estimator,
                 "", "", seed, est.window_radius)


def cmd_simulate(args) -> int:
    cfg = _load_validated(args.config)
    sink = CsvSink([], args.out, echo=_echo_config(args.config))
    est = estimate_mean_delay(cfg, args.samples, args.estimator,
                              seed=args.seed, window_radius=args.window_radius,
                              n_jobs=args.jobs)
    _estimate_rows(sink, est, "mean_delay", args.seed)
    if est.report is not None:
        print(f"divergence report: diverged={est.report.diverged} "
              f"growth={tuple(round(g, 4) for g in est.report.growth_factors)} "
              f"max_share={est.report.max_share:.4g} "
              f"tail_index={est.report.tail_index}", file=sys.stderr)
    if est.censor_biased:
        print(f"warning: {est.n_censored} censored runs; the mean is "
              f"censor-biased", file=sys.stderr)
    failed = False
    if args.verify:
        failed = _verify_against_analytic(cfg, est)
    sink.flush()
    return 1 if failed else 0


def _verify_against_analytic(cfg, est) -> bool:
    try:
        dv = mean_delay(cfg)
    except (UnsupportedModelError, QuadratureError) as exc:
        print(f"verify: no analytic value ({exc})", file=sys.stderr)
        return False
    if dv.is_infinite:
        if not est.diverged:
            print("verify: analytic value infinite but simulation converged",
                  file=sys.stderr)
            return True
        return False
    if est.diverged or math.isinf(est.mean):
        print("verify: simulation diverged on a finite-regime point",
              file=sys.stderr)
        return True
    rel = abs(est.mean - dv.value) / dv.value
    tol = 3.0 * (est.std_error / dv.value + dv.abs_error / dv.value + 1e-6)
    if rel > tol:
        print(f"verify: |sim-analytic|/analytic = {rel:.4g} exceeds "
              f"3x combined tolerance {tol:.4g}", file=sys.stderr)
        return True
    print(f"verify: ok (rel {rel:.4g} <= tol {tol:.4g})", file=sys.stderr)
    return False


def _grid(spec: SweepSpec):
    if len(spec.axes) == 1:
        for v1 in spec.axes[0].values:
            yield (v1,), {spec.axes[0].param: v1}
    else:
        for v1 in spec.axes[0].values:
            for v2 in spec.axes[1].values:
                yield (v1, v2), {spec.axes[0].param: v1,
                                 spec.axes[1].param: v2}


def _is_finite_verdict(cfg):
    try:
        return phase_classify(cfg).verdict == "finite"
    except NoAnalyticRuleError:
        return None


def _bisect_boundary(make_cfg, lo, hi, iters=80):
    flo, fhi = _is_finite_verdict(make_cfg(lo)), _is_finite_verdict(make_cfg(hi))
    if flo is None or fhi is None or flo == fhi:
        return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fmid = _is_finite_verdict(make_cfg(mid))
        if fmid is None:
            return None
        if fmid == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmd_sweep(args) -> int:
    spec = read_sweep(args.sweep)
    violations = [v for v in validate(spec.base) if v.is_error]
    if violations:
        for v in violations:
            print(f"error: {v.message}", file=sys.stderr)
        raise ConfigError("sweep base scenario is invalid")
    names = [ax.param for ax in spec.axes]
    sink = CsvSink(names, args.out, echo=_echo_config(args.sweep))
    failed = False
    for index, (params, updates) in enumerate(_grid(spec)):
        cfg = override_scenario(spec.base_kv, updates)
        dv = None
        if "analytic_delay" in spec.outputs:
            try:
                dv = _delay_row(sink, cfg, params)
            except NoAnalyticRuleError:
                sink.row(params, "mean_delay", "", "no_rule")
        if "phase_verdict" in spec.outputs:
            _verdict_row(sink, cfg, params)
        if "simulated_delay" in spec.outputs and args.simulate:
            est = estimate_mean_delay(cfg, args.samples, args.estimator,
                                      seed=args.seed,
                                      window_radius=args.window_radius,
                                      n_jobs=args.jobs)
            _estimate_rows(sink, est, "simulated_delay", args.seed, params)
            if args.verify and dv is not None:
                failed |= _verify_against_analytic(cfg, est)
        if "shannon_delay" in spec.outputs and args.simulate:
            est = estimate_shannon_delay(cfg, args.samples, seed=args.seed,
                                         window_radius=args.window_radius)
            _estimate_rows(sink, est, "shannon_delay", args.seed, params)
        if "ccdf" in spec.outputs and args.simulate:
            ccdf = estimate_delay_ccdf(cfg, [args.m_max], args.samples,
                                       seed=args.seed,
                                       window_radius=args.window_radius)
            sink.row(params, "ccdf", float(ccdf.ccdf[0]), "geometric_mixture",
                     "", "", args.seed, ccdf.window_radius)

    boundary = _boundary_csv(spec)
    if args.out:
        stem, dot, ext = args.out.rpartition(".")
        bpath = f"{stem}_boundary.{ext}" if dot else f"{args.out}_boundary"
        sink.flush()
        with open(bpath, "w", encoding="utf-8") as fh:
            fh.write(boundary)
    else:
        sink.flush()
        sys.stdout.write("# boundary\n" + boundary)
    return 1 if failed else 0


def _boundary_csv(spec: SweepSpec) -> str:
    axes = spec.axes
    if len(axes) == 1:
        ax = axes[0]
        b = _bisect_boundary(
            lambda v: override_scenario(spec.base_kv, {ax.param: v}),
            min(ax.values), max(ax.values))
        lines = [f"{ax.param}_boundary", _fmt(b) if b is not None else ""]
        return "\n".join(lines) + "\n"
    ax1, ax2 = axes
    lines = [f"{ax1.param},{ax2.param}_boundary"]
    for v1 in ax1.values:
        b = _bisect_boundary(
            lambda v2: override_scenario(spec.base_kv,
                                         {ax1.param: v1, ax2.param: v2}),
            min(ax2.values), max(ax2.values))
        lines.append(f"{_fmt(v1)},{_fmt(b) if b is not None else ''}")
    return "\n".join(lines) + "\n"


def cmd_ccdf(args) -> int:
    cfg = _load_validated(args.config)
    m_grid = [0.0]
    m = 1.0
    while m <= args.m_max:
        m_grid.append(m)
        m *= 10.0 ** 0.25
    est = estimate_delay_ccdf(cfg, m_grid, args.samples, seed=args.seed,
                              window_radius=args.window_radius,
                              n_jobs=args.jobs)
    sink = CsvSink(["m"], args.out, echo=_echo_config(args.config))
    for i, m in enumerate(est.m):
        common = dict(seed=args.seed, window_radius=est.window_radius,
                      method="geometric_mixture")
        sink.row([m], "ccdf", float(est.ccdf[i]), **common)
        sink.row([m], "ccdf_lo", float(est.lo[i]), **common)
        sink.row([m], "ccdf_hi", float(est.hi[i]), **common)
        sink.row([m], "ccdf_partial_sum", float(est.partial_sum[i]), **common)
    sink.flush()
    return 0


def cmd_shannon(args) -> int:
    cfg = _load_validated(args.config)
    sink = CsvSink([], args.out, echo=_echo_config(args.config))
    est = estimate_shannon_delay(cfg, args.samples, seed=args.seed,
                                 window_radius=args.window_radius)
    _estimate_rows(sink, est, "shannon_delay", args.seed)
    sink.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="manetdelay",
        description="Mean local delays of slotted-Aloha Poisson networks: "
                    "closed forms, Monte-Carlo estimators, phase diagrams")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="scenario file")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--samples", type=int, default=10_000)
        p.add_argument("--window-radius", type=float, default=None,
                       dest="window_radius")
        p.add_argument("--out", default=None, help="output CSV (default stdout)")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("analytic", help="closed-form / quadrature delay rows")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_analytic)

    p = sub.add_parser("simulate", help="Palm Monte-Carlo delay estimate")
    common(p)
    p.add_argument("--estimator", choices=["semi", "slot"], default="semi")
    p.add_argument("--verify", action="store_true",
                   help="exit 1 if simulation disagrees with analytics")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("sweep", help="phase-diagram parameter sweep")
    common(p, config=False)
    p.add_argument("--sweep", required=True, help="sweep file")
    p.add_argument("--estimator", choices=["semi", "slot"], default="semi")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--m-max", type=float, default=1e6, dest="m_max")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("ccdf", help="delay tail by the geometric mixture")
    common(p)
    p.add_argument("--m-max", type=float, default=1e6, dest="m_max")
    p.set_defaults(fn=cmd_ccdf)

    p = sub.add_parser("shannon", help="adaptive-coding delay estimate")
    common(p)
    p.set_defaults(fn=cmd_shannon)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError, UnsupportedModelError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
