"""Command-line interface.

One command per process, selected with --command:

    verify-paper    run the full verification battery
    matrix-action   closed-form vs pipeline action on an sl(n) frame
    torus-action    total (and split) action of a torus model
    palatini-check  residuals and action of a block metric / connection pair
    palatini-solve  Gauss-Newton search for a critical point

Exit codes: 0 all checks passed, 1 a verification failed, 2 bad usage or
configuration.  All randomness flows from --seed.  Reports render as a
table (default) or as machine-readable key=value records.
"""

import argparse
import sys
import time

import numpy as np

from . import (__version__, action, checks, engine, liealg, palatini, solver,
               torus)
from .checks import CheckRecord
from .errors import DegenerateMetricError, InvalidDimensionError

COMMANDS = ("verify-paper", "matrix-action", "torus-action",
            "palatini-check", "palatini-solve")
FAMILIES = ("identity", "paper-g0", "paper-counterexample-8x8",
            "random-spd", "fourier-perturbed")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ncgeo",
        description="Derivation-based geometry on matrix algebras: actions, "
                    "curvature residuals, critical-point searches.")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--n", type=int, default=2,
                        help="matrix algebra size (default 2)")
    parser.add_argument("--m", type=int, default=1,
                        help="torus dimension (default 1)")
    parser.add_argument("--grid", type=int, default=16,
                        help="grid points per axis (default 16)")
    parser.add_argument("--metric", default="identity",
                        help="builtin metric family, optionally with "
                             "parameters: family[:key=value,...]; families: "
                             + ", ".join(FAMILIES))
    parser.add_argument("--metric-file", default=None,
                        help="tabulated-field file (torus-action only)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=None,
                        help="override every check tolerance")
    parser.add_argument("--out", default=None,
                        help="also write the report to this path")
    parser.add_argument("--format", choices=("table", "records"),
                        default="table")
    return parser


def _parse_metric(text):
    family, _, rest = text.partition(":")
    if family not in FAMILIES:
        raise InvalidDimensionError(
            "unknown metric family %r; choose from %s"
            % (family, ", ".join(FAMILIES)))
    params = {}
    if rest:
        for token in rest.split(","):
            key, eq, value = token.partition("=")
            if not eq or not key:
                raise InvalidDimensionError(
                    "malformed metric parameter %r (expected key=value)" % token)
            try:
                params[key] = float(value)
            except ValueError:
                raise InvalidDimensionError(
                    "metric parameter %r is not a number" % token)
    return family, params


def _info_record(name, claim, value, t0):
    return CheckRecord(name=name, claim=claim, expected="reported value",
                       computed=float(value), tolerance=float("nan"),
                       passed=True,
                       runtime_ms=(time.perf_counter() - t0) * 1e3)


def _random_spd(d, rng, scale=1.0):
    a = rng.standard_normal((d, d))
    return scale * (a @ a.T + d * np.eye(d))


def _cmd_matrix_action(args):
    family, params = _parse_metric(args.metric)
    if family not in ("identity", "random-spd"):
        raise InvalidDimensionError(
            "matrix-action supports the identity and random-spd families")
    d = args.n * args.n - 1
    rng = np.random.default_rng(args.seed)
    if family == "identity":
        g = np.eye(d)
    else:
        g = _random_spd(d, rng, params.get("scale", 1.0))
    frame = engine.sl_frame(args.n)
    c = frame.structure
    kill = liealg.killing_form(c)
    records = []
    t0 = time.perf_counter()
    closed = action.action_closed_form(g, c, kill)
    records.append(_info_record(
        "matrix-closed-form-action",
        "closed-form action of the metric on the sl(%d) frame" % args.n,
        closed, t0))
    t0 = time.perf_counter()
    pipe = action.levi_civita_action(g, frame)
    records.append(_info_record(
        "matrix-pipeline-action",
        "full connection/curvature pipeline action of the same metric",
        pipe, t0))
    tol = 1e-8 if args.tol is None else args.tol
    rel = abs(closed - pipe) / max(1.0, abs(closed))
    records.append(CheckRecord(
        name="matrix-closed-vs-pipeline",
        claim="closed form and pipeline agree on this metric",
        expected="relative difference < %.3g" % tol,
        computed=rel, tolerance=tol, passed=bool(rel < tol), runtime_ms=0.0))
    return records


def _torus_model_from_args(args):
    d = args.n * args.n - 1
    if args.metric_file is not None:
        return torus.build_model_from_file(args.metric_file)
    family, params = _parse_metric(args.metric)
    rng = np.random.default_rng(args.seed)
    if family == "identity":
        gq = np.eye(d)
    elif family == "random-spd":
        gq = _random_spd(d, rng, params.get("scale", 1.0))
    elif family == "fourier-perturbed":
        base = _random_spd(d, rng, params.get("scale", 1.0))
        gq = torus.fourier_scaled(base,
                                  amplitude=params.get("amplitude", 0.4),
                                  axis=int(params.get("axis", 0)),
                                  mode=int(params.get("mode", 1)))
    else:
        raise InvalidDimensionError(
            "torus-action supports the identity, random-spd and "
            "fourier-perturbed families (or --metric-file)")
    return torus.build_model(args.m, args.n, args.grid, np.eye(args.m), gq)


def _cmd_torus_action(args):
    model = _torus_model_from_args(args)
    records = []
    t0 = time.perf_counter()
    total = torus.total_action(model)
    records.append(_info_record(
        "torus-total-action",
        "quadrature of the curvature contraction over the %d-torus grid "
        "(N=%d, n=%d)" % (model.grid.m, model.grid.points, model.n),
        total, t0))
    if model.constant_gq() is not None:
        t0 = time.perf_counter()
        classical, quantum = torus.split_action_constant_gq(model)
        records.append(_info_record(
            "torus-split-classical",
            "classical block contribution, weighted by the quantum volume "
            "element", classical, t0))
        records.append(_info_record(
            "torus-split-quantum",
            "constant quantum block action times the torus volume",
            quantum, t0))
        tol = 1e-6 if args.tol is None else args.tol
        rel = abs(total - (classical + quantum)) / max(1.0, abs(total))
        records.append(CheckRecord(
            name="torus-split-agreement",
            claim="the split terms reproduce the total action",
            expected="relative gap < %.3g" % tol,
            computed=rel, tolerance=tol, passed=bool(rel < tol),
            runtime_ms=0.0))
    return records


def _block_metric_from_args(args):
    family, params = _parse_metric(args.metric)
    rng = np.random.default_rng(args.seed)
    if family == "identity":
        return palatini.BlockMetric.from_matrix(np.eye(8)), family
    if family == "paper-g0":
        return palatini.noncritical_pair()[0], family
    if family == "paper-counterexample-8x8":
        return palatini.asymmetric_inverse_example(), family
    if family == "random-spd":
        return palatini.random_spd_block_metric(
            rng, off_scale=params.get("off_scale", 0.2)), family
    raise InvalidDimensionError(
        "palatini commands support the identity, paper-g0, "
        "paper-counterexample-8x8 and random-spd families")


def _cmd_palatini_check(args):
    g, family = _block_metric_from_args(args)
    records = []
    if family == "paper-g0":
        g0, conn = palatini.noncritical_pair()
        t0 = time.perf_counter()
        value = palatini.action_m4(g0, conn)
        tol = 1e-10 if args.tol is None else args.tol
        gap = abs(value + 1.0)
        records.append(CheckRecord(
            name="palatini-reference-action",
            claim="the reference pair evaluates to action %.6g" % value,
            expected="|E + 1| < %.3g" % tol,
            computed=gap, tolerance=tol, passed=bool(gap < tol),
            runtime_ms=(time.perf_counter() - t0) * 1e3))
        t0 = time.perf_counter()
        records.append(_info_record(
            "palatini-residual-norm",
            "stacked field + connection residual norm at the reference pair",
            solver.residual_norm(g0, conn), t0))
        return records
    conn = palatini.critical_connection(g)
    tol = 1e-10 if args.tol is None else args.tol
    t0 = time.perf_counter()
    worst_c = float(np.abs(palatini.connection_residuals(g, conn)).max())
    worst_f = float(np.abs(palatini.field_residual(g, conn)).max())
    worst_r = float(np.abs(palatini.ricci_matrix(conn)).max())
    value = palatini.action_m4(g, conn)
    ms = (time.perf_counter() - t0) * 1e3
    records.append(CheckRecord(
        name="palatini-connection-equations",
        claim="the distinguished connection of the %s metric satisfies the "
              "eight connection equations" % family,
        expected="max residual < %.3g" % tol,
        computed=worst_c, tolerance=tol, passed=bool(worst_c < tol),
        runtime_ms=ms))
    records.append(CheckRecord(
        name="palatini-field-equation",
        claim="the metric field equation holds at the same pair",
        expected="max residual < %.3g" % tol,
        computed=worst_f, tolerance=tol, passed=bool(worst_f < tol),
        runtime_ms=ms))
    records.append(CheckRecord(
        name="palatini-ricci-flat",
        claim="the distinguished connection is Ricci flat",
        expected="max |Ric| < %.3g" % tol,
        computed=worst_r, tolerance=tol, passed=bool(worst_r < tol),
        runtime_ms=ms))
    records.append(_info_record(
        "palatini-action-value",
        "action value at (g, distinguished connection)", value, time.perf_counter()))
    if family == "paper-counterexample-8x8":
        b11, b12, b21, b22 = g.inverse_blocks()
        norm = float(np.linalg.norm(b12 - b21))
        threshold = 1e-6 if args.tol is None else args.tol
        records.append(CheckRecord(
            name="palatini-asymmetric-inverse",
            claim="the inverse metric has unequal off-diagonal blocks",
            expected="||g^12 - g^21|| > %.3g" % threshold,
            computed=norm, tolerance=threshold, passed=bool(norm > threshold),
            runtime_ms=0.0))
    return records


def _cmd_palatini_solve(args):
    records = []
    rng = np.random.default_rng(args.seed)
    if args.metric.partition(":")[0] == "paper-g0":
        g, conn = palatini.noncritical_pair()
    else:
        g, family = _block_metric_from_args(args)
        if family == "identity":
            conn = palatini.zero_connection()
        else:
            conn = palatini.critical_connection(g)
            noise = rng.standard_normal(conn.shape)
            noise *= 0.1 / np.linalg.norm(noise)
            conn = conn + noise
    config = solver.SolverConfig(seed=args.seed)
    if args.tol is not None:
        config = solver.SolverConfig(tolerance=args.tol, seed=args.seed)
    t0 = time.perf_counter()
    _, _, rep = solver.solve(g, conn, config)
    ms = (time.perf_counter() - t0) * 1e3
    records.append(CheckRecord(
        name="solver-converged",
        claim="Gauss-Newton reached the residual tolerance in %d iterations"
              % rep.iterations,
        expected="residual < %.3g" % config.tolerance,
        computed=rep.residual_norm, tolerance=config.tolerance,
        passed=bool(rep.converged), runtime_ms=ms))
    tol_e = 1e-6
    records.append(CheckRecord(
        name="solver-critical-value",
        claim="the converged endpoint has vanishing action "
              "(distance to distinguished connection %.3g)"
              % rep.distance_to_critical_connection,
        expected="converged implies |E| < %.3g" % tol_e,
        computed=abs(rep.action_value), tolerance=tol_e,
        passed=bool((not rep.converged) or abs(rep.action_value) < tol_e),
        runtime_ms=0.0))
    records.append(_info_record(
        "solver-stationarity-certificate",
        "max FD directional derivative over %d random admissible directions"
        % rep.certificate_directions,
        rep.stationarity_certificate, time.perf_counter()))
    records.append(_info_record(
        "solver-trace-residual", "tr(g^-1 r) at the endpoint",
        rep.trace_residual, time.perf_counter()))
    return records


def run(args):
    """Execute a parsed command; returns (records, exit_code)."""
    if args.command == "verify-paper":
        records = checks.run_battery(seed=args.seed,
                                     tolerance_override=args.tol)
    elif args.command == "matrix-action":
        records = _cmd_matrix_action(args)
    elif args.command == "torus-action":
        records = _cmd_torus_action(args)
    elif args.command == "palatini-check":
        records = _cmd_palatini_check(args)
    else:
        records = _cmd_palatini_solve(args)
    _, failed = checks.summarize(records)
    return records, (1 if failed else 0)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.n < 2:
        parser.error("--n must be at least 2")
    if not 1 <= args.m <= 3:
        parser.error("--m must be 1, 2 or 3")
    if args.grid < 8:
        parser.error("--grid must be at least 8")
    if args.metric_file is not None and args.command != "torus-action":
        parser.error("--metric-file applies only to torus-action")
    try:
        records, code = run(args)
    except (InvalidDimensionError, OSError) as exc:
        print("ncgeo: %s" % exc, file=sys.stderr)
        return 2
    except DegenerateMetricError as exc:
        print("ncgeo: degenerate input: %s" % exc, file=sys.stderr)
        return 2
    meta = {"version": __version__, "seed": args.seed, "command": args.command}
    if args.format == "table":
        text = checks.format_table(records, meta)
    else:
        text = checks.format_records(records, meta)
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
