"""Command-line front end.

Subcommands: state, path, cycle, optimize, secondlaw, adapt, validate.
Options may come from a JSON config file (--config); explicit flags win.
Reports are JSON by default; --format csv flattens them to key,value rows
(or emits the natural table where one exists), and --plot-data writes
whitespace-separated tables.  Numbers are serialised with full precision,
so reports re-parse to the exact binary values.

Exit status: 0 when every requested check passes, 1 when a check fails,
2 on malformed input or an infeasible request.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import adaptation, control, cycles, montecarlo, paths, state
from .errors import InfothermError, UndefinedRatioError

LN2 = math.log(2.0)


def _read_text(spec: str) -> str:
    if spec == "-":
        return sys.stdin.read()
    with open(spec, "r") as fh:
        return fh.read()


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InfothermError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in raw.items()}


def _merge(args: argparse.Namespace, config: dict, defaults: dict) -> argparse.Namespace:
    # priority: explicit flag > config entry > built-in default
    for key, fallback in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, fallback))
    return args


def _flatten(payload, prefix=""):
    rows = []
    if isinstance(payload, dict):
        for k, v in payload.items():
            rows.extend(_flatten(v, f"{prefix}{k}." if prefix or True else k))
    elif isinstance(payload, (list, tuple)):
        for i, v in enumerate(payload):
            rows.extend(_flatten(v, f"{prefix}{i}."))
    else:
        rows.append((prefix[:-1], payload))
    return rows


def _emit(args, payload: dict, table=None) -> None:
    out = sys.stdout if args.output in (None, "-") else open(args.output, "w")
    try:
        if args.plot_data and table is not None:
            header, rows = table
            out.write("# " + " ".join(header) + "\n")
            for row in rows:
                out.write(" ".join(repr(float(v)) for v in row) + "\n")
        elif args.format == "csv":
            writer = csv.writer(out)
            if table is not None:
                header, rows = table
                writer.writerow(header)
                for row in rows:
                    writer.writerow([repr(float(v)) for v in row])
            else:
                writer.writerow(["key", "value"])
                for key, value in _flatten(payload):
                    writer.writerow([key, json.dumps(value)])
        else:
            out.write(json.dumps(payload, indent=2))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _noise(args) -> state.NoiseModel:
    return state.NoiseModel(args.sigma_r2, args.convention, args.constant)


def _maybe_bits(args, value):
    if value is None:
        return None
    return value / LN2 if args.bits else value


# ---------------------------------------------------------------- state

def _run_state(args) -> int:
    st = state.InferenceState(args.m, args.sigma2)
    noise = _noise(args)
    th = state.theta(st, noise)
    payload = {
        "m": st.m, "sigma2": st.sigma2, "sigma_r2": noise.sigma_r2,
        "convention": noise.convention,
        "units": "bits" if args.bits else "nats",
        "h": _maybe_bits(args, state.entropy(st, noise)),
        "theta": th,
        "theta_floor": state.theta_floor(st.m, noise),
    }
    try:
        payload["efficiency"] = state.efficiency(st, noise)
    except InfothermError:
        payload["efficiency"] = None
    try:
        payload["mmse"] = state.mmse(st, noise)
    except InfothermError:
        payload["mmse"] = None
    try:
        p = state.partials(st, noise)
        payload["partials"] = {"dh_dsigma2": p.dh_dsigma2, "dh_dm": p.dh_dm,
                               "dsigma2_dm": p.dsigma2_dm,
                               "dtheta_dm": p.dtheta_dm,
                               "dsigma2_dtheta": p.dsigma2_dtheta}
    except InfothermError:
        payload["partials"] = None
    qp = state.quasi_potentials(st, noise)
    payload["potentials"] = {"a": qp.a, "g": qp.g}
    _emit(args, payload)
    return 0


# ----------------------------------------------------------------- path

def _run_path(args) -> int:
    path = paths.ProcessPath.from_json(_read_text(args.input))
    noise = _noise(args)
    work = paths.sampling_work(path)
    gain = paths.information_gain(path, noise)
    flux = paths.reversible_entropy_flux(path, noise)
    dh = state.entropy(path.end, noise) - state.entropy(path.start, noise)
    residual = paths.first_law_residual(path, noise, args.n_steps)
    consistent = abs(flux - gain - dh) <= 1e-8
    payload = {
        "n_nodes": path.n_nodes,
        "units": "bits" if args.bits else "nats",
        "sampling_work": work,
        "information_gain": _maybe_bits(args, gain),
        "entropy_flux": _maybe_bits(args, flux),
        "delta_h": _maybe_bits(args, dh),
        "first_law_residual": residual,
        "n_steps": args.n_steps,
        "consistent": consistent,
    }
    table = (("m", "sigma2"), list(zip(path.m, path.sigma2)))
    _emit(args, payload, table)
    return 0 if consistent else 1


# ---------------------------------------------------------------- cycle

def _run_cycle(args) -> int:
    cyc = paths.CyclePath.from_json(_read_text(args.input))
    noise = _noise(args)
    closure = paths.cycle_closure_check(cyc, noise)
    work = paths.sampling_work(cyc)
    gain = paths.information_gain(cyc, noise)
    closure_ok = max(abs(closure.dh), abs(closure.dsigma2),
                     abs(closure.dtheta)) <= args.closure_tol
    payload = {
        "n_nodes": cyc.n_nodes,
        "units": "bits" if args.bits else "nats",
        "closure": {"dh": _maybe_bits(args, closure.dh),
                    "dsigma2": closure.dsigma2, "dtheta": closure.dtheta},
        "closure_ok": closure_ok,
        "sampling_work": work,
        "information_gain": _maybe_bits(args, gain),
        "signed_area": cyc.signed_area(),
    }
    bound_ok = True
    try:
        rep = control.global_efficiency_bound(cyc, noise)
        payload["efficiency_bound"] = {
            "ratio": rep.ratio, "bound": rep.bound, "holds": rep.holds,
            "m_star": rep.m_star, "sign_definite": rep.sign_definite,
        }
        bound_ok = rep.holds
    except UndefinedRatioError:
        payload["efficiency_bound"] = None
    table = (("m", "sigma2"), list(zip(cyc.m, cyc.sigma2)))
    _emit(args, payload, table)
    return 0 if (closure_ok and bound_ok) else 1


# -------------------------------------------------------------- optimize

def _run_optimize(args) -> int:
    noise = state.NoiseModel(args.sigma_r2, state.RAW)
    problem = control.BudgetProblem(args.m_a, args.m_b, args.work, noise)
    traj = control.solve_optimal(problem)
    gain = control.optimal_info_gain(problem)
    a = traj.coefficient
    sr2 = noise.sigma_r2
    m = np.linspace(problem.m_a, problem.m_b, args.n_points)
    root = np.sqrt(m)
    root_a = math.sqrt(problem.m_a)
    sigma_opt = np.maximum(a * root - m * sr2, 0.0)
    run_work = 2.0 * a * (root - root_a) - sr2 * (m - problem.m_a)
    if a > 0:
        run_gain = 0.5 * np.log(m / problem.m_a) - (sr2 / a) * (root - root_a)
    else:
        run_gain = np.zeros_like(m)
    payload = {
        "m_a": problem.m_a, "m_b": problem.m_b, "work": problem.work,
        "sigma_r2": sr2,
        "units": "bits" if args.bits else "nats",
        "coefficient": a,
        "gain": _maybe_bits(args, gain),
        "max_bound": _maybe_bits(args, control.max_info_bound(problem.m_a,
                                                              problem.m_b)),
    }
    ok = True
    if args.oracle:
        sol = control.dp_oracle(problem, args.m_grid, args.sigma_grid,
                                args.budget_grid)
        gap = abs(sol.gain - gain)
        ok = gap <= args.oracle_tol and sol.work_used <= problem.work * (1 + 1e-12)
        payload["oracle"] = {
            "gain": _maybe_bits(args, sol.gain), "gap": gap,
            "work_used": sol.work_used, "quantum": sol.quantum,
            "within_tol": ok,
        }
    if args.bits:
        run_gain = run_gain / LN2
    table = (("m", "sigma2_opt", "theta", "running_work", "running_gain"),
             list(zip(m, sigma_opt, traj.theta(m), run_work, run_gain)))
    if args.format is None and not args.plot_data:
        args.format = "csv"   # the trajectory table is the primary product
    _emit(args, payload, table)
    return 0 if ok else 1


# ------------------------------------------------------------- secondlaw

def _run_secondlaw(args) -> int:
    pts = json.loads(_read_text(args.stimulus) if args.stimulus
                     else args.breakpoints)
    stim = cycles.PiecewiseLinearStimulus.from_breakpoints(pts)
    dyn = cycles.SamplingDynamics(a=args.a)
    scal = cycles.ConstitutiveScaling(c=args.c, p=args.p)
    noise = state.NoiseModel(args.sigma_r2, state.RAW)
    t_end = args.t_end if args.t_end is not None else 4.0 * stim.period
    loop = cycles.simulate_driven_cycle(stim, dyn, scal, t_end, args.dt)
    verdict = cycles.second_law_check(loop, scal, noise, greens=args.greens)
    ok = verdict.holds
    if args.greens and verdict.greens_rel_gap is not None:
        ok = ok and verdict.greens_rel_gap <= args.greens_tol
    payload = {
        "n_nodes": int(loop.mu.size),
        "units": "bits" if args.bits else "nats",
        "cyclic_information": _maybe_bits(args, verdict.cyclic_info),
        "orientation": verdict.orientation,
        "signed_area": loop.signed_area(),
        "holds": verdict.holds,
        "simple": verdict.simple,
        "greens_value": _maybe_bits(args, verdict.greens_value),
        "greens_rel_gap": verdict.greens_rel_gap,
        "greens_skipped": verdict.greens_skipped,
    }
    table = (("mu", "m"), list(zip(loop.mu, loop.m)))
    _emit(args, payload, table)
    return 0 if ok else 1


# ----------------------------------------------------------------- adapt

def _run_adapt(args) -> int:
    params = adaptation.AdaptationParams(k=args.k, beta=args.beta, p=args.p,
                                         delta_i=args.delta_i, a=args.a)
    payload = {"params": {"k": params.k, "beta": params.beta, "p": params.p,
                          "delta_i": params.delta_i, "a": params.a}}
    table = None
    ok = True
    if args.i is not None:
        fp = adaptation.fixed_points(args.i, params)
        payload["i"] = args.i
        payload["fixed_points"] = {"sr": fp.sr, "pr": fp.pr,
                                   "ss": fp.ss, "tr": fp.tr}
        payload["cycle_balance"] = adaptation.cycle_balance(args.i, params)
        if args.t_grid:
            start, stop, step = (float(x) for x in args.t_grid.split(":"))
            t = np.arange(start, stop + 0.5 * step, step)
            m = adaptation.m_of_t(t, args.i, params)
            f = adaptation.firing_rate(args.i, t, params)
            payload["response"] = [{"t": float(a_), "m": float(b_),
                                    "f": float(c_)}
                                   for a_, b_, c_ in zip(t, m, f)]
            table = (("t", "m", "f"), list(zip(t, m, f)))
    if args.triples:
        triples, report = adaptation.ingest_triples(args.triples)
        payload["corpus"] = report.to_dict()
        payload["corpus"]["errors"] = [
            {"line": ln, "message": msg} for ln, msg in report.errors]
        ok = (report.n_pass_lower == report.n_rows
              and report.n_pass_upper == report.n_rows
              and report.n_rows > 0)
    _emit(args, payload, table)
    return 0 if ok else 1


# -------------------------------------------------------------- validate

def _run_validate(args) -> int:
    sigma2 = args.sigma2 if args.family == montecarlo.GAUSSIAN else None
    payload = {}
    ok = True
    spec = montecarlo.SamplingSpec(
        family=args.family, mu=args.mu, m=args.m, sigma_r2=args.sigma_r2,
        trials=args.trials, seed=args.seed, sigma2=sigma2)
    report = montecarlo.validate_entropy_formula(
        spec, convention=args.convention, constant=args.constant,
        method=args.method, k=args.k_neighbors, tol=args.tol)
    payload["entropy"] = {
        "h_empirical": _maybe_bits(args, report.h_empirical),
        "h_formula": _maybe_bits(args, report.h_formula),
        "gap": report.gap, "tol": report.tol,
        "asymptotic": report.asymptotic, "passed": report.passed,
        "method": report.method,
    }
    if report.passed is False:
        ok = False
    if args.m_list:
        m_list = [int(x) for x in args.m_list.split(",")]
        pts = montecarlo.validate_variance_scaling(
            args.family, args.mu, m_list, args.scaling_trials, args.seed,
            sigma2=sigma2)
        payload["scaling"] = [{"m": p.m, "variance": p.variance,
                               "ratio": p.ratio} for p in pts]
        if any(not (0.9 <= p.ratio <= 1.1) for p in pts):
            ok = False
    if args.normality:
        ens = montecarlo.simulate_estimator(spec)
        rep = montecarlo.normality_check(ens)
        payload["normality"] = {"skewness": rep.skewness,
                                "excess_kurtosis": rep.excess_kurtosis,
                                "passed": rep.passed}
        if not rep.passed:
            ok = False
    _emit(args, payload)
    return 0 if ok else 1


# ----------------------------------------------------------------- main

def _add_common(sp):
    sp.add_argument("--config", help="JSON file with default option values")
    sp.add_argument("--output", help="write the report here instead of stdout")
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("--bits", action="store_true",
                    help="display entropy-like values in bits")
    sp.add_argument("--plot-data", action="store_true",
                    help="write a whitespace table for plotting")


def _noise_flags(sp):
    sp.add_argument("--sigma-r2", type=float, dest="sigma_r2")
    sp.add_argument("--convention", choices=(state.MUTUAL_INFO, state.RAW))
    sp.add_argument("--constant", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infotherm",
        description="state functions and cycle laws of asymptotic inference")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("state", help="evaluate state functions at a point")
    _add_common(sp)
    _noise_flags(sp)
    sp.add_argument("--m", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.set_defaults(func=_run_state, defaults=dict(
        m=None, sigma2=None, sigma_r2=1.0, convention=state.MUTUAL_INFO,
        constant=0.0, format=None))

    sp = sub.add_parser("path", help="path functionals of a process")
    _add_common(sp)
    _noise_flags(sp)
    sp.add_argument("--input", help="path JSON file, or - for stdin")
    sp.add_argument("--n-steps", type=int, dest="n_steps")
    sp.set_defaults(func=_run_path, defaults=dict(
        input="-", sigma_r2=1.0, convention=state.MUTUAL_INFO, constant=0.0,
        n_steps=256, format=None))

    sp = sub.add_parser("cycle", help="closure and bound checks on a cycle")
    _add_common(sp)
    _noise_flags(sp)
    sp.add_argument("--input", help="cycle JSON file, or - for stdin")
    sp.add_argument("--closure-tol", type=float, dest="closure_tol")
    sp.set_defaults(func=_run_cycle, defaults=dict(
        input="-", sigma_r2=1.0, convention=state.MUTUAL_INFO, constant=0.0,
        closure_tol=1e-9, format=None))

    sp = sub.add_parser("optimize", help="budgeted acquisition profile")
    _add_common(sp)
    sp.add_argument("--m-a", type=float, dest="m_a")
    sp.add_argument("--m-b", type=float, dest="m_b")
    sp.add_argument("--work", type=float)
    sp.add_argument("--sigma-r2", type=float, dest="sigma_r2")
    sp.add_argument("--n-points", type=int, dest="n_points")
    sp.add_argument("--oracle", action="store_true", default=None,
                    help="cross-check against the discrete search")
    sp.add_argument("--oracle-tol", type=float, dest="oracle_tol")
    sp.add_argument("--m-grid", type=int, dest="m_grid")
    sp.add_argument("--sigma-grid", type=int, dest="sigma_grid")
    sp.add_argument("--budget-grid", type=int, dest="budget_grid")
    sp.set_defaults(func=_run_optimize, defaults=dict(
        sigma_r2=1.0, n_points=65, oracle=False, oracle_tol=5e-3,
        m_grid=64, sigma_grid=64, budget_grid=64, format=None))

    sp = sub.add_parser("secondlaw", help="driven-loop dissipation check")
    _add_common(sp)
    sp.add_argument("--breakpoints",
                    help="inline JSON [[t, mu], ...] over one period")
    sp.add_argument("--stimulus", help="JSON breakpoint file, or - for stdin")
    sp.add_argument("--a", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--sigma-r2", type=float, dest="sigma_r2")
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--greens", action="store_true", default=None)
    sp.add_argument("--greens-tol", type=float, dest="greens_tol")
    sp.set_defaults(func=_run_secondlaw, defaults=dict(
        breakpoints=None, stimulus=None, a=1.0, c=1.0, p=2.0, sigma_r2=1.0,
        t_end=None, dt=0.01, greens=False, greens_tol=1e-4, format=None))

    sp = sub.add_parser("adapt", help="adaptation model and triple corpus")
    _add_common(sp)
    for name in ("k", "beta", "p", "delta-i", "a", "i"):
        sp.add_argument(f"--{name}", type=float, dest=name.replace("-", "_"))
    sp.add_argument("--t-grid", dest="t_grid",
                    help="response sample times as start:stop:step")
    sp.add_argument("--triples", help="CSV corpus unit_id,sr,pr,ss")
    sp.set_defaults(func=_run_adapt, defaults=dict(
        k=2.0, beta=1.0, p=2.0, delta_i=1.0, a=1.0, i=None, t_grid=None,
        triples=None, format=None))

    sp = sub.add_parser("validate", help="Monte Carlo entropy validation")
    _add_common(sp)
    sp.add_argument("--family", choices=(montecarlo.GAUSSIAN,
                                         montecarlo.POISSON))
    sp.add_argument("--mu", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--m", type=int)
    sp.add_argument("--sigma-r2", type=float, dest="sigma_r2")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--convention", choices=(state.MUTUAL_INFO, state.RAW))
    sp.add_argument("--constant", type=float)
    sp.add_argument("--method", choices=(montecarlo.NEAREST_NEIGHBOR,
                                         montecarlo.GAUSSIAN_MOMENT))
    sp.add_argument("--k-neighbors", type=int, dest="k_neighbors")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--m-list", dest="m_list",
                    help="comma-separated sizes for the 1/m scaling check")
    sp.add_argument("--scaling-trials", type=int, dest="scaling_trials")
    sp.add_argument("--normality", action="store_true", default=None)
    sp.set_defaults(func=_run_validate, defaults=dict(
        family=montecarlo.GAUSSIAN, mu=0.0, sigma2=1.0, m=100, sigma_r2=0.5,
        trials=10_000, seed=int(os.environ.get("INFOTHERM_SEED", "0")),
        convention=state.MUTUAL_INFO, constant=0.0,
        method=montecarlo.NEAREST_NEIGHBOR, k_neighbors=1, tol=0.02,
        m_list=None, scaling_trials=10_000, normality=False, format=None))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        args = _merge(args, config, args.defaults)
        if args.command == "state" and (args.m is None or args.sigma2 is None):
            raise InfothermError("state needs --m and --sigma2")
        if args.command == "secondlaw" and not (args.breakpoints or args.stimulus):
            raise InfothermError("secondlaw needs --breakpoints or --stimulus")
        return args.func(args)
    except InfothermError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
