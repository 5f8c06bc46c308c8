"""Command-line front end.

Subcommands: solve (extremal + trajectory export), certify (full
turnpike-certification pipeline), sweep (horizon sweep with warm
starts).  Outputs are deterministic: CSV with 17-significant-digit
floats, JSON with fixed key order.

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 non-hyperbolic steady point.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import drivers, problems, shooting, steady, turnpike
from .errors import TrimTurnpikeError
from .shooting import ShootingConfig

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_NONHYPERBOLIC = 3

PROBLEM_NAMES = ("lq", "nlq_flat", "nlq_nonflat", "kepler")

_CONFIG_KEYS = {"problem", "params", "boundary", "solver", "grid", "out", "continuation", "T_list"}
_PARAM_KEYS = {"x0", "xT", "y0", "yT", "T", "alpha", "s_tilde", "theta_T"}
_BOUNDARY_KEYS = {"x0", "xT", "y0", "yT", "T"}
_SOLVER_KEYS = {
    "nodes", "newton_tol", "max_iters", "jacobian_mode",
    "jac_method", "jac_steps", "init",
}
_CONTINUATION_KEYS = {"T_start", "T_end", "steps"}


class ConfigError(Exception):
    pass


# -- deterministic serialization ----------------------------------------------

def _fmt_float(v):
    if v != v:  # NaN
        return "NaN"
    return format(float(v), ".17g")


def _json_dumps(obj, indent=0):
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_json_dumps(v, indent + 1) for v in obj]
        return "[" + ", ".join(items) + "]"
    if isinstance(obj, dict):
        inner = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_json_dumps(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)}")


def _write_json(path, obj):
    Path(path).write_text(_json_dumps(obj) + "\n", encoding="utf-8")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\r\n".join(lines) + "\r\n")


# -- configuration -------------------------------------------------------------

def _check_keys(d, allowed, where):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, _CONFIG_KEYS, "config")
    for key, allowed in (
        ("params", _PARAM_KEYS),
        ("boundary", _BOUNDARY_KEYS),
        ("solver", _SOLVER_KEYS),
        ("continuation", _CONTINUATION_KEYS),
    ):
        if key in raw:
            if not isinstance(raw[key], dict):
                raise ConfigError(f"config.{key} must be an object")
            _check_keys(raw[key], allowed, f"config.{key}")
    return raw


def _merge_cli(cfg, args):
    cfg = dict(cfg)
    if args.problem:
        cfg["problem"] = args.problem
    params = dict(cfg.get("params", {}))
    boundary = dict(cfg.get("boundary", {}))
    solver = dict(cfg.get("solver", {}))
    if args.T is not None:
        boundary["T"] = args.T
    if args.yT is not None:
        vals = [float(v) for v in args.yT.split(",")]
        boundary["yT"] = vals[0] if len(vals) == 1 else vals
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.s_tilde is not None:
        params["s_tilde"] = args.s_tilde
    if args.theta_T is not None:
        params["theta_T"] = args.theta_T
    if args.nodes is not None:
        solver["nodes"] = args.nodes
    if args.tol is not None:
        solver["newton_tol"] = args.tol
    if args.grid is not None:
        cfg["grid"] = args.grid
    if args.out is not None:
        cfg["out"] = args.out
    if args.continuation is not None:
        try:
            t0, t1, steps = args.continuation.split(":")
            cfg["continuation"] = {"T_start": float(t0), "T_end": float(t1), "steps": int(steps)}
        except ValueError as exc:
            raise ConfigError("--continuation expects T0:T1:steps") from exc
    if getattr(args, "T_list", None):
        cfg["T_list"] = [float(v) for v in args.T_list.split(",")]
    cfg["params"], cfg["boundary"], cfg["solver"] = params, boundary, solver
    return cfg


def build_problem(cfg):
    name = cfg.get("problem")
    if name not in PROBLEM_NAMES:
        raise ConfigError(f"problem must be one of {PROBLEM_NAMES}, got {name!r}")
    params = cfg.get("params", {})
    boundary = cfg.get("boundary", {})
    kw = {}
    try:
        if name == "lq":
            for key in ("x0", "xT", "y0", "yT", "T"):
                if key in boundary:
                    v = boundary[key]
                    kw[key] = float(v[0]) if isinstance(v, list) else float(v)
            prob = problems.lq_problem(**kw)
        elif name in ("nlq_flat", "nlq_nonflat"):
            alpha = params.get("alpha", 0.0 if name == "nlq_flat" else 0.1)
            if name == "nlq_flat" and alpha != 0.0:
                raise ConfigError("nlq_flat requires alpha = 0")
            if name == "nlq_nonflat" and alpha == 0.0:
                raise ConfigError("nlq_nonflat requires alpha != 0")
            for key in ("x0", "xT", "y0", "yT", "T"):
                if key in boundary:
                    kw[key] = boundary[key]
            prob = problems.nlq_problem(alpha=alpha, **kw)
        else:
            if "s_tilde" in params:
                kw["s_tilde"] = float(params["s_tilde"])
            if "theta_T" in params:
                kw["theta_T"] = float(params["theta_T"])
            if "T" in boundary:
                kw["T"] = float(boundary["T"])
            if "x0" in boundary:
                kw["x0"] = boundary["x0"]
            if "y0" in boundary:
                v = boundary["y0"]
                kw["y0"] = float(v[0]) if isinstance(v, list) else float(v)
            prob = problems.kepler_problem(**kw)
            over = {}
            for key in ("xT", "yT"):
                if key in boundary:
                    over[key] = boundary[key]
            if over:
                prob = prob.with_boundary(**over)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid problem parameters: {exc}") from exc
    return prob


def build_solver_config(cfg, problem_name):
    solver = dict(cfg.get("solver", {}))
    init_mode = solver.pop("init", "auto")
    defaults = {}
    if problem_name == "kepler":
        # stiff boundary layers and a distant turnpike: more nodes and
        # the cheap fixed-step variational Jacobian
        defaults = {"nodes": 40, "jac_method": "rk4", "jac_steps": 4}
    defaults.update(solver)
    defaults["grid"] = int(cfg.get("grid", 600))
    try:
        sc = ShootingConfig(**defaults)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc
    return sc, init_mode


def _prepare_initial_guess(prob, sc, init_mode):
    use_turnpike = init_mode == "turnpike" or (init_mode == "auto" and prob.name == "kepler")
    if not use_turnpike:
        return sc, None
    target = (prob.yT - prob.y0) / prob.T
    lam_star, sp = steady.match_trim_rate(prob, target)
    from dataclasses import replace
    return replace(sc, init=shooting.turnpike_guess(prob, sp, sc.nodes)), sp


def _solve(prob, cfg):
    sc, init_mode = build_solver_config(cfg, prob.name)
    cont = cfg.get("continuation")
    t0 = time.perf_counter()
    if prob.name == "kepler" and init_mode == "auto":
        # homotopy + horizon continuation recipe; cold starts stagnate
        c = cont or {"T_start": 10.0, "T_end": prob.T, "steps": 10}
        sol, _ = drivers.solve_kepler(
            prob, T_start=float(c["T_start"]), steps=int(c["steps"]),
            nodes=sc.nodes, grid=sc.grid, newton_tol=sc.newton_tol,
        )
    elif prob.name == "nlq_nonflat" and init_mode == "auto" and not cont:
        # the non-flat trim carries no cyclic transport, so cold starts
        # stagnate at long horizons; use the layered continuation recipe
        sol, _ = drivers.solve_layered(
            prob, nodes=sc.nodes, grid=sc.grid, newton_tol=sc.newton_tol,
        )
    elif cont:
        ratio = np.asarray(prob.yT) / prob.T
        sols = shooting.continuation_in_T(
            prob, float(cont["T_start"]), float(cont["T_end"]), int(cont["steps"]),
            config=sc, yT_of_T=lambda T: ratio * T,
        )
        sol = sols[-1]
    else:
        sc, _ = _prepare_initial_guess(prob, sc, init_mode)
        sol = shooting.solve_bvp(prob, sc)
    return sol, time.perf_counter() - t0


def _write_trajectory(out, prob, sol):
    n, p, m = prob.dims.n, prob.dims.p, prob.dims.m
    header = (
        ["t"]
        + [f"x_{i+1}" for i in range(n)]
        + [f"y_{i+1}" for i in range(p)]
        + [f"px_{i+1}" for i in range(n)]
        + [f"u_{i+1}" for i in range(m)]
    )
    rows = [
        [sol.times[i], *sol.x[i], *sol.y[i], *sol.p_x[i], *sol.u[i]]
        for i in range(len(sol.times))
    ]
    _write_csv(Path(out) / "trajectory.csv", header, rows)


def cmd_solve(cfg):
    prob = build_problem(cfg)
    out = Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    sol, seconds = _solve(prob, cfg)
    _write_trajectory(out, prob, sol)
    _write_json(out / "solution.json", {
        "problem": prob.name,
        "T": prob.T,
        "lambda": sol.lam,
        "residual_norm": sol.residual_norm,
        "iterations": sol.iterations,
        "timings": {"solve_seconds": seconds},
        "grid": len(sol.times) - 1,
        "px0": sol.px0,
    })
    return EXIT_OK


def _certificate_dict(prob, sol, sp, rep, cert):
    eig = [[float(e.real), float(e.imag)] for e in rep.spectrum.eigenvalues]
    return {
        "problem": prob.name,
        "T": prob.T,
        "lambda": sol.lam,
        "xbar": sp.xbar,
        "pxbar": sp.pxbar,
        "ubar": sp.ubar,
        "eigenvalues": eig,
        "mu_star": rep.mu_star,
        "hyperbolic": rep.hyperbolic,
        "C_fit": None if cert is None else cert.C_fit,
        "mu_fit": None if cert is None else cert.mu_fit,
        "anchor": None if cert is None else cert.trim.anchor_value,
        "epsilon_data": None if cert is None else cert.epsilon_data,
        "max_deviation_x": None if cert is None else float(np.max(cert.dev_x)),
        "max_deviation_u": None if cert is None else float(np.max(cert.dev_u)),
        "max_deviation_y": None if cert is None else float(np.max(cert.dev_y)),
        "boundary_layer": None if cert is None else cert.boundary_layer,
        "max_relative_violation": None if cert is None else cert.max_relative_violation,
        "floor": None if cert is None else cert.floor,
        "exact_turnpike": False if cert is None else cert.exact_turnpike,
        "degraded": False if cert is None else cert.degraded,
    }


def _certify_solution(prob, sol):
    """(SteadyPoint, HyperbolicityReport, certificate-or-None)."""
    mid = sol.state_at(sol.T / 2.0)
    n, p = prob.dims.n, prob.dims.p
    sp = steady.solve_static(prob, sol.lam, x_init=mid[:n], p_init=mid[n + p:])
    rep = steady.check_hyperbolicity(prob, sp)
    if not rep.hyperbolic:
        return sp, rep, None
    return sp, rep, turnpike.certify(prob, sol, sp, rep)


def cmd_certify(cfg):
    prob = build_problem(cfg)
    out = Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    sol, seconds = _solve(prob, cfg)
    _write_trajectory(out, prob, sol)
    sp, rep, cert = _certify_solution(prob, sol)
    _write_json(out / "certificate.json", _certificate_dict(prob, sol, sp, rep, cert))
    if cert is not None:
        env = cert.envelope if cert.envelope is not None else np.full(len(cert.times), np.nan)
        rows = [
            [cert.times[i], cert.dev_x[i], cert.dev_u[i], cert.dev_y[i], env[i]]
            for i in range(len(cert.times))
        ]
        _write_csv(out / "deviation.csv", ["t", "dev_x", "dev_u", "dev_y", "envelope"], rows)
    if not rep.hyperbolic:
        print("steady point is not hyperbolic", file=sys.stderr)
        return EXIT_NONHYPERBOLIC
    return EXIT_OK


def cmd_sweep(cfg, parallel_cold=False):
    prob = build_problem(cfg)
    out = Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    T_list = cfg.get("T_list")
    if not T_list and cfg.get("continuation"):
        c = cfg["continuation"]
        T_list = list(np.linspace(float(c["T_start"]), float(c["T_end"]), int(c["steps"])))
    if not T_list or len(T_list) < 2:
        raise ConfigError("sweep needs at least 2 horizons (T_list or continuation)")
    sc, init_mode = build_solver_config(cfg, prob.name)
    from dataclasses import replace
    n, p = prob.dims.n, prob.dims.p
    header = (
        ["T"]
        + [f"lambda_{i+1}" for i in range(p)]
        + [f"xbar_{i+1}" for i in range(n)]
        + ["mu_fit", "C_fit", "status"]
    )
    rows = []
    guess = None
    for T in T_list:
        prob_T = prob.with_boundary(T=float(T))
        try:
            sc_T, _ = (replace(sc, init=guess), None) if (guess is not None and not parallel_cold) \
                else _prepare_initial_guess(prob_T, sc, init_mode)
            sol = shooting.solve_bvp(prob_T, sc_T)
            sp, rep, cert = _certify_solution(prob_T, sol)
            mu_fit = cert.mu_fit if cert is not None else None
            C_fit = cert.C_fit if cert is not None else None
            rows.append(
                [float(T), *sol.lam, *sp.xbar,
                 float("nan") if mu_fit is None else mu_fit,
                 float("nan") if C_fit is None else C_fit,
                 "ok" if rep.hyperbolic else "non-hyperbolic"]
            )
            if not parallel_cold:
                guess = shooting._warm_guess(prob_T, sol, sc.nodes)
        except (TrimTurnpikeError, ValueError) as exc:
            rows.append([float(T)] + [float("nan")] * (p + n + 2) + [type(exc).__name__])
    _write_csv(out / "sweep.csv", header, rows)
    return EXIT_OK


def _make_parser():
    ap = argparse.ArgumentParser(
        prog="trimturnpike",
        description="Extremal solver and exponential trim-turnpike certification "
                    "for optimal control problems with cyclic states.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("solve", "solve the boundary value problem and export the trajectory"),
        ("certify", "solve, then certify the exponential trim-turnpike estimates"),
        ("sweep", "solve over a list of horizons and tabulate lambda_T, xbar, fit constants"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--problem", choices=PROBLEM_NAMES)
        sp.add_argument("--config", type=str)
        sp.add_argument("--T", type=float)
        sp.add_argument("--out", type=str)
        sp.add_argument("--grid", type=int)
        sp.add_argument("--yT", type=str, help="terminal cyclic value (comma-separated if p > 1)")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--s-tilde", dest="s_tilde", type=float)
        sp.add_argument("--theta-T", dest="theta_T", type=float)
        sp.add_argument("--nodes", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--continuation", type=str, metavar="T0:T1:steps")
        if name == "sweep":
            sp.add_argument("--T-list", dest="T_list", type=str, help="comma-separated horizons")
            sp.add_argument("--parallel-cold", action="store_true",
                            help="independent cold starts instead of the warm-start chain")
    return ap


def main(argv=None):
    ap = _make_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        cfg = _merge_cli(cfg, args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "certify":
            return cmd_certify(cfg)
        return cmd_sweep(cfg, parallel_cold=getattr(args, "parallel_cold", False))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrimTurnpikeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
