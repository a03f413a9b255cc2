"""Command-line front end.

Seven subcommands cover the library's verification surface:

  solve             integrate the three-point scheme with the implicit stepper
  exact             emit a closed-form trajectory and its residual report
  verify-integrals  constancy reports for j1..j4 and the c/ctilde forms
  symmetry-table    invariance table of the three schemes under all flows
  backlund-check    fit the transformation constants and verify both directions
  convergence       theta = 1 error-vs-eps study against the continuous solution
  singular          line-solution mesh check and the consistency root in eps

Outputs are written into --out: trajectory.csv plus one or more of
integrals.json, symmetry.json, backlund.json, summary.json. All numeric text
uses 17 significant digits in lowercase scientific notation, so identical
configs produce byte-identical artifacts. Exit status: 0 when every
configured check passes, 1 on a numerical failure (summary.json then carries
an error object), 2 on invalid configuration.

Config precedence: command-line flag > --config JSON file > built-in
default; the defaults are the canonical worked case (c = 2, eps = 0.01,
theta exact, k = 4). Non-finite numbers are serialized as null.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from dataclasses import dataclass, fields

import numpy as np

from .backlund import (
    PairedTrajectories,
    compatibility_backward,
    compatibility_forward,
    fit_alphas,
    residual_profiles,
)
from .continuous import Ode2SolutionParams, ode2_solution, singular_slope_residual
from .errors import ConvergenceError, SchwarzFDError
from .integrals import INTEGRAL_NAMES, constancy_report
from .schemes import (
    Ode2ExactParams,
    WinternitzExactParams,
    derived_residual_profile,
    mesh_residual,
    mesh_residual_profile,
    ode2_exact_node,
    ode2_exact_trajectory,
    ode2_run,
    scheme_residual_profile,
    singular_consistency_residual,
    singular_eps_root,
    singular_trajectory,
    theta_exact,
    winternitz_exact_trajectory,
)
from .stencil import (
    SchemeParams,
    read_trajectory_csv,
    write_trajectory_csv,
)
from .symmetry import GENERATORS, JOINT_GENERATORS, invariance_table

_FMT = "{:.16e}"

COMMANDS = ("solve", "exact", "verify-integrals", "symmetry-table",
            "backlund-check", "convergence", "singular")

# per-command verdict tolerances, overridable with --tol
TOL_DEFAULTS = {
    "solve": 1e-8,
    "exact": 1e-10,
    "verify-integrals": 1e-9,
    "symmetry-table": 1e-9,
    "backlund-check": 1e-8,
    "convergence": 1.0,     # required observed order
    "singular": 1e-12,      # mesh residual bound
}

B_RES_TOL = 1e-9            # transformation residuals on the exact pairing
SYMMETRY_S = 0.3            # group parameter of the canonical table
CONV_EPS = (0.1, 0.05, 0.025, 0.0125)


class ConfigError(Exception):
    """Invalid configuration; maps to exit status 2."""


@dataclass
class RunConfig:
    """Resolved run configuration (flags over config file over defaults)."""

    command: str
    c: float = 2.0
    eps: float = 0.01
    theta: str = "exact"        # "exact" | "one" | numeric literal
    k: float = 4.0
    rho: float = 12.0
    A: float = 1.0
    B: float = 2.0
    c1: float = 1.0
    c2: float = 0.25
    c3: float = 0.0
    c4: float = 0.5
    c5: float = 0.3
    c6: float = 0.2
    n_start: int = 1
    n_end: int = 16
    tol: float | None = None
    out: str = "."
    seed: int = 0


# command-specific default overrides (applied below the config file)
PER_COMMAND_DEFAULTS = {
    "symmetry-table": {"rho": 15.0, "n_end": 13},
    "singular": {"c": -2.0, "theta": "2.0", "B": 1.0},
}


def _parse_n(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", text.strip())
    if not m:
        raise ConfigError(f"--n expects START..END, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)} - {"command"}
    out = {}
    for key, val in raw.items():
        if key == "n":
            if isinstance(val, str):
                out["n_start"], out["n_end"] = _parse_n(val)
            elif isinstance(val, (list, tuple)) and len(val) == 2:
                out["n_start"], out["n_end"] = int(val[0]), int(val[1])
            else:
                raise ConfigError("config key 'n' expects \"START..END\" or [start, end]")
            continue
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "theta":
            val = str(val)
        out[key] = val
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file, and defaults into a validated RunConfig."""
    merged: dict = {}
    merged.update(PER_COMMAND_DEFAULTS.get(args.command, {}))
    if args.config is not None:
        merged.update(_load_config_file(args.config))
    flag_values = {k: v for k, v in vars(args).items()
                   if v is not None and k not in ("command", "config", "n")}
    if args.n is not None:
        flag_values["n_start"], flag_values["n_end"] = _parse_n(args.n)
    merged.update(flag_values)

    cfg = RunConfig(command=args.command)
    for key, val in merged.items():
        setattr(cfg, key, val)

    if not cfg.eps > 0.0:
        raise ConfigError("eps must be positive")
    if cfg.n_end - cfg.n_start + 1 < 4:
        raise ConfigError("index range must cover at least 4 nodes")
    if cfg.theta not in ("exact", "one"):
        try:
            float(cfg.theta)
        except ValueError:
            raise ConfigError(
                f"--theta expects 'exact', 'one', or a number, got {cfg.theta!r}"
            ) from None
    if cfg.tol is not None and not cfg.tol > 0.0:
        raise ConfigError("tol must be positive")
    return cfg


def _theta_value(cfg: RunConfig) -> float:
    if cfg.theta == "exact":
        return theta_exact(cfg.c, cfg.eps)
    if cfg.theta == "one":
        return 1.0
    return float(cfg.theta)


def _tol(cfg: RunConfig) -> float:
    return cfg.tol if cfg.tol is not None else TOL_DEFAULTS[cfg.command]


def _n_range(cfg: RunConfig) -> range:
    return range(cfg.n_start, cfg.n_end + 1)


# ---------------------------------------------------------------------------
# deterministic JSON

def _jfmt(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad}  {json.dumps(str(k))}: {_jfmt(v, indent + 1)}'
                for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        rows = [f"{pad}  {_jfmt(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        return _FMT.format(v)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(_jfmt(obj) + "\n")


def _config_dict(cfg: RunConfig) -> dict:
    # the output directory is environment, not numerics: identical runs into
    # different directories must produce byte-identical reports
    d = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)
         if f.name != "out"}
    d["tol"] = _tol(cfg)
    return d


# ---------------------------------------------------------------------------
# commands: each returns (ok, summary_checks)

def _scheme_params(cfg: RunConfig) -> SchemeParams:
    return SchemeParams(c=cfg.c, eps=cfg.eps, theta=_theta_value(cfg), k=cfg.k)


def _residual_maxima(tr, p: SchemeParams) -> dict:
    r1, r2 = derived_residual_profile(tr)
    return {
        "scheme_max": float(np.max(np.abs(scheme_residual_profile(tr, p)))),
        "mesh_max": float(np.max(np.abs(mesh_residual_profile(tr, p.eps)))),
        "derived_max": float(max(np.max(np.abs(r1)), np.max(np.abs(r2)))),
    }


def _cmd_exact(cfg: RunConfig) -> tuple[bool, dict]:
    epar = Ode2ExactParams(a=cfg.A, b=cfg.B, c=cfg.c, eps=cfg.eps, rho=cfg.rho)
    tr = ode2_exact_trajectory(epar, _n_range(cfg))
    write_trajectory_csv(tr, os.path.join(cfg.out, "trajectory.csv"))
    checks = _residual_maxima(tr, _scheme_params(cfg))
    ok = all(v <= _tol(cfg) for v in checks.values())
    return ok, checks


def _cmd_solve(cfg: RunConfig) -> tuple[bool, dict]:
    p = _scheme_params(cfg)
    # seed from the exact family whose sign matches the scheme's branch:
    # trajectories of (c, theta) follow the sgn = -sgn(c/theta) family
    seed_c = 2.0 if cfg.c / p.theta < 0 else -2.0
    seed = Ode2ExactParams(a=cfg.A, b=cfg.B, c=seed_c, eps=cfg.eps, rho=cfg.rho)
    x0, u0 = ode2_exact_node(seed, cfg.n_start)
    x1, u1 = ode2_exact_node(seed, cfg.n_start + 1)
    count = cfg.n_end - cfg.n_start + 1
    tr = ode2_run(x0, u0, x1, u1, count - 2, p, n0=cfg.n_start)
    write_trajectory_csv(tr, os.path.join(cfg.out, "trajectory.csv"))
    checks = {
        "scheme_max": float(np.max(np.abs(scheme_residual_profile(tr, p)))),
        "mesh_max": float(np.max(np.abs(mesh_residual_profile(tr, p.eps)))),
    }
    ok = all(v <= _tol(cfg) for v in checks.values())
    return ok, checks


def _cmd_verify_integrals(cfg: RunConfig) -> tuple[bool, dict]:
    path = os.path.join(cfg.out, "trajectory.csv")
    if not os.path.exists(path):
        raise ConfigError(f"no trajectory at {path}; run exact or solve first")
    tr = read_trajectory_csv(path)
    p = _scheme_params(cfg)
    reports = [constancy_report(tr, name, p) for name in INTEGRAL_NAMES]
    write_json(os.path.join(cfg.out, "integrals.json"),
               [r.to_dict() for r in reports])
    rel = {
        r.name: r.max_abs_drift / max(abs(r.mean), 1e-300)
        for r in reports
    }
    ok = all(v <= _tol(cfg) for v in rel.values())
    return ok, {"relative_drift": rel}


def _cmd_symmetry_table(cfg: RunConfig) -> tuple[bool, dict]:
    p = _scheme_params(cfg)
    epar = Ode2ExactParams(a=cfg.A, b=cfg.B, c=cfg.c, eps=cfg.eps, rho=cfg.rho)
    xu = ode2_exact_trajectory(epar, _n_range(cfg))
    wpar = WinternitzExactParams(cfg.c1, cfg.c2, cfg.c3, cfg.c4, cfg.c5, cfg.c6)
    ty = winternitz_exact_trajectory(wpar, _n_range(cfg))
    cases = [("winternitz", ty, g, SYMMETRY_S, p) for g in GENERATORS]
    cases += [("ode2", xu, g, SYMMETRY_S, p) for g in GENERATORS]
    cases += [("derived", xu, g, SYMMETRY_S, None) for g in GENERATORS]
    rows = invariance_table(cases)
    write_json(os.path.join(cfg.out, "symmetry.json"), rows)

    def _rows(scheme, gens):
        return [r for r in rows if r["scheme"] == scheme
                and r["generator"] in gens]

    wint_ok = all(r["pass"] for r in _rows("winternitz", GENERATORS))
    joint_ok = all(r["pass"]
                   for r in _rows("ode2", JOINT_GENERATORS)
                   + _rows("derived", JOINT_GENERATORS))
    singles = set(GENERATORS) - set(JOINT_GENERATORS)
    single_fail = not any(r["pass"]
                          for r in _rows("ode2", singles)
                          + _rows("derived", singles))
    # flows that error out report an infinite residual; the witness must be
    # an evaluable violation, and infinities would serialize as null anyway
    finite = [r["max_residual"] for r in _rows("derived", singles)
              if math.isfinite(r["max_residual"])]
    witness = max(finite) if finite else 0.0
    checks = {
        "winternitz_all_pass": wint_ok,
        "joint_flows_pass": joint_ok,
        "single_flows_all_fail": single_fail,
        "strongest_witness": witness,
    }
    ok = wint_ok and joint_ok and single_fail and witness > 1e-3
    return ok, checks


def _cmd_backlund_check(cfg: RunConfig) -> tuple[bool, dict]:
    epar = Ode2ExactParams(a=cfg.A, b=cfg.B, c=cfg.c, eps=cfg.eps, rho=cfg.rho)
    xu = ode2_exact_trajectory(epar, _n_range(cfg))
    wpar = WinternitzExactParams(cfg.c1, cfg.c2, cfg.c3, cfg.c4, cfg.c5, cfg.c6)
    ty = winternitz_exact_trajectory(wpar, _n_range(cfg))
    pair = PairedTrajectories(xu=xu, ty=ty)
    alphas = fit_alphas(pair)
    b1s, b2s = residual_profiles(pair, alphas)
    fit_max = float(max(np.max(np.abs(b1s)), np.max(np.abs(b2s))))
    fwd = compatibility_forward(ty, alphas, cfg.eps)
    bwd = compatibility_backward(xu, alphas, cfg.eps, ty_ref=ty)
    write_json(os.path.join(cfg.out, "backlund.json"),
               {"alphas": {"alpha1": alphas.alpha1, "alpha2": alphas.alpha2},
                "fit_max_residual": fit_max,
                "forward": fwd,
                "backward": bwd})
    checks = {
        "alpha1": alphas.alpha1,
        "alpha2": alphas.alpha2,
        "fit_max_residual": fit_max,
        "forward_max_residual": fwd["max_residual"],
        "backward_max_residual": bwd["max_residual"],
    }
    ok = (fit_max <= B_RES_TOL
          and fwd["verdict"] == "compatible"
          and bwd["verdict"] == "compatible"
          and fwd["max_residual"] <= _tol(cfg)
          and bwd["max_residual"] <= _tol(cfg))
    return ok, checks


def _cmd_convergence(cfg: RunConfig) -> tuple[bool, dict]:
    """Fixed-protocol study: theta = 1, c = 2, seeds on the curve
    y = 1/(2 - x) + 4 from x = 2.5, eight nodes per run."""
    sol = Ode2SolutionParams(a0=1.0, b0=2.0, c0=-2.0)

    def curve(x: float) -> float:
        return ode2_solution(sol, x).y

    x0, hi, count = 2.5, 2.97, 8
    errors, h_means = [], []
    for eps in CONV_EPS:
        y0 = curve(x0)

        def f(x1: float, _eps=eps) -> float:
            return mesh_residual(x0, y0, x1, curve(x1), _eps)

        # incremental scan to a sign change, then bisection
        step = (hi - x0) / 400.0
        xa = x0 + step
        fa = f(xa)
        xb = xa
        for kk in range(2, 401):
            xb = x0 + kk * step
            fb = f(xb)
            if fa * fb <= 0.0:
                break
            xa, fa = xb, fb
        else:
            raise ConvergenceError("no second-seed bracket on the scan range")
        for _ in range(200):
            xm = 0.5 * (xa + xb)
            fm = f(xm)
            if fa * fm <= 0.0:
                xb = xm
            else:
                xa, fa = xm, fm
        x1 = 0.5 * (xa + xb)

        p = SchemeParams(c=2.0, eps=eps, theta=1.0)
        tr = ode2_run(x0, y0, x1, curve(x1), count - 2, p)
        err = float(np.max(np.abs(tr.us - np.array([curve(x) for x in tr.xs]))))
        errors.append(err)
        h_means.append(float((tr.xs[-1] - tr.xs[0]) / (len(tr) - 1)))

    pairwise = [
        math.log(errors[i] / errors[i + 1]) / math.log(h_means[i] / h_means[i + 1])
        for i in range(len(errors) - 1)
    ]
    observed = float(np.polyfit(np.log(h_means), np.log(errors), 1)[0])
    checks = {
        "eps": list(CONV_EPS),
        "errors": errors,
        "h_means": h_means,
        "pairwise_orders": pairwise,
        "observed_order": observed,
    }
    decreasing = all(errors[i + 1] < errors[i] for i in range(len(errors) - 1))
    ok = decreasing and observed >= _tol(cfg)
    return ok, checks


def _cmd_singular(cfg: RunConfig) -> tuple[bool, dict]:
    a, b, c = cfg.A, cfg.B, cfg.c
    p_theta = _theta_value(cfg)
    tr = singular_trajectory(a, b, cfg.eps, x0=1.0, count=6,
                             n0=cfg.n_start)
    write_trajectory_csv(tr, os.path.join(cfg.out, "trajectory.csv"))
    mesh_max = float(np.max(np.abs(mesh_residual_profile(tr, cfg.eps))))
    slope_res = singular_slope_residual(a, c)
    root = singular_eps_root(a, c, p_theta)
    res_at_root = singular_consistency_residual(a, c, root, p_theta)
    checks = {
        "mesh_max": mesh_max,
        "slope_residual": float(slope_res),
        "eps_root": float(root),
        "residual_at_root": float(res_at_root),
    }
    ok = (mesh_max <= _tol(cfg)
          and abs(slope_res) <= 1e-12
          and abs(res_at_root) <= 1e-10)
    return ok, checks


_DISPATCH = {
    "solve": _cmd_solve,
    "exact": _cmd_exact,
    "verify-integrals": _cmd_verify_integrals,
    "symmetry-table": _cmd_symmetry_table,
    "backlund-check": _cmd_backlund_check,
    "convergence": _cmd_convergence,
    "singular": _cmd_singular,
}


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schwarzfd",
        description="Invariant finite-difference schemes: trajectories, "
                    "integrals, symmetries, and the discrete transformation.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "integrate the three-point scheme with the implicit stepper",
        "exact": "closed-form trajectory with a residual report",
        "verify-integrals": "constancy reports for the six first integrals",
        "symmetry-table": "invariance table at group parameter s = 0.3",
        "backlund-check": "fit alphas and verify both compatibility directions",
        "convergence": "theta = 1 error study on eps = 0.1 .. 0.0125",
        "singular": "line-solution mesh check and consistency root",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("--c", type=float, help="scheme constant C")
        sp.add_argument("--eps", type=float, help="mesh cross-ratio value")
        sp.add_argument("--theta", type=str,
                        help="scheme weight: exact, one, or a number")
        sp.add_argument("--k", type=float, help="cross-ratio constant K")
        sp.add_argument("--rho", type=float, help="index shift of the exact family")
        sp.add_argument("--A", "--a", dest="A", type=float,
                        help="family constant A (slope for singular)")
        sp.add_argument("--B", "--b", dest="B", type=float,
                        help="family constant B (intercept for singular)")
        for i in range(1, 7):
            sp.add_argument(f"--c{i}", type=float,
                            help=f"Winternitz family constant c{i}")
        sp.add_argument("--n", type=str, metavar="START..END",
                        help="inclusive node index range")
        sp.add_argument("--tol", type=float, help="verdict tolerance override")
        sp.add_argument("--out", type=str, help="output directory (default .)")
        sp.add_argument("--config", type=str, help="JSON config file")
        sp.add_argument("--seed", type=int, help="recorded RNG seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(cfg.out, exist_ok=True)
    summary_path = os.path.join(cfg.out, "summary.json")
    try:
        ok, checks = _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchwarzFDError, ValueError) as exc:
        summary = {
            "command": cfg.command,
            "config": _config_dict(cfg),
            "verdict": "error",
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        write_json(summary_path, summary)
        print(_jfmt(summary["error"]), file=sys.stderr)
        print(f"{cfg.command}: error ({exc})")
        return 1

    summary = {
        "command": cfg.command,
        "config": _config_dict(cfg),
        "checks": checks,
        "verdict": "pass" if ok else "fail",
    }
    write_json(summary_path, summary)
    print(f"{cfg.command}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
