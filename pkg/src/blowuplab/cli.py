"""Command-line front end.

Subcommands:

    predict       rate law + constants table for (d, k, N)
    simulate      run the moving-mesh solver from a JSON config
    fit           (re-)fit the rate law of an existing run directory
    compare       prediction-vs-experiment report for one or two runs
    profile-dump  boundary-layer orbit as CSV
    basis-dump    eigenbasis table as CSV

Every printed number is mirrored in a JSON artifact, and a run directory
(config.json, trace.csv, snapshots/, fit.json, manifest.json) is the
stable on-disk contract.  BLOWUPLAB_OUT overrides the output root.
Exit codes: 0 success, 2 malformed config/arguments, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__, coupling, meshsim, rates, spectral
from . import profile as profile_mod
from .errors import BlowupLabError, NoBlowup
from .params import ModelParams, classify, derive, eigenvalue

#: SimConfig fields settable from a config file, with their converters
_CONFIG_FIELDS = {
    "L": float, "M": int, "initial_data": None, "monitor_alpha": float,
    "monitor_scale_weight": float, "monitor_smooth_passes": int,
    "uniform_fraction": float, "tau": float, "rtol": float,
    "atol_u": float, "atol_r_rel": float, "max_gradient": float,
    "t_max": float, "snapshot_decades": float,
}


class ConfigError(Exception):
    """Malformed simulation config (exit code 2)."""


def _out_root(arg):
    return arg or os.environ.get("BLOWUPLAB_OUT", ".")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pipeline(d, k, N):
    """params -> profile -> basis -> coupling -> rate law."""
    consts = derive(ModelParams(d=d, k=k, N=N))
    prof = profile_mod.solve_profile(consts)
    basis = spectral.build_basis(consts, max_n=max(8, N))
    coup = coupling.coupling_constants(prof, basis, N)
    law = rates.predict_rate(consts, N, prof, basis, coup)
    return consts, prof, basis, coup, law


def _default_N(consts):
    """The generic construction index: the smallest admissible N."""
    return max(classify(consts).min_admissible_N, 1)


# ----------------------------------------------------------------------------
# predict

def cmd_predict(args):
    consts, prof, basis, coup, law = _pipeline(args.d, args.k, args.N)
    spec_N = eigenvalue(consts, args.N)
    table = {
        "d": args.d, "k": args.k, "N": args.N,
        "gamma": consts.gamma, "omega": consts.omega, "delta": consts.delta,
        "lambda_n": [eigenvalue(consts, n).lam for n in range(args.N + 2)],
        "h": prof.h, "Cs": prof.Cs,
        "cN": float(basis.c_origin[args.N]), "DN": float(coup.D[args.N]),
    }
    if spec_N.lam == 0:
        table["CN"] = law.constants["CN"]
    print(f"rate law: {law.kind}, exponent {law.exponent:.7f}")
    for key in ("gamma", "omega", "delta", "h", "Cs", "cN", "DN"):
        print(f"  {key:>6s} = {table[key]:.8f}")
    if "CN" in table:
        print(f"      CN = {table['CN']:.8f}")
    out = {"rate_law": json.loads(law.to_json()), "constants": table}
    if args.json:
        _write_json(args.json, out)
    return 0


# ----------------------------------------------------------------------------
# simulate

def _load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("d", "k"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")
    kwargs = {}
    for key, val in raw.items():
        if key in ("d", "k"):
            continue
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        conv = _CONFIG_FIELDS[key]
        kwargs[key] = conv(val) if conv else val
    try:
        params = ModelParams(d=float(raw["d"]), k=int(raw["k"]))
        return meshsim.SimConfig(params=params, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def _config_hash(config):
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _auto_fit(config, trace):
    """Fit the law selected by the spectrum of (d, k): logarithmic when the
    generic index is neutral, power otherwise."""
    consts = derive(config.params)
    N = _default_N(consts)
    if eigenvalue(consts, N).lam == 0:
        return meshsim.fit_log(trace, delta=consts.delta)
    return meshsim.fit_power(trace)


def _run_one(config_path, out_root):
    config = _load_config(config_path)
    run_dir = os.path.join(
        out_root, f"run_{config.params.d:g}d{config.params.k}k_{_config_hash(config)}"
    )
    os.makedirs(os.path.join(run_dir, "snapshots"), exist_ok=True)
    started = time.time()
    trace = meshsim.run(config)
    _write_json(os.path.join(run_dir, "config.json"),
                config.to_dict() | {"stopped": trace.stopped})
    trace.to_csv(os.path.join(run_dir, "trace.csv"))
    snap_paths = []
    for j, snap in enumerate(trace.snapshots):
        base = os.path.join(run_dir, "snapshots", f"snap_{j:03d}")
        snap.to_csv(base + ".csv")
        _write_json(base + ".json", {"t": snap.t, "index": j})
        snap_paths.append(base + ".csv")
    fit_path = os.path.join(run_dir, "fit.json")
    try:
        fit = _auto_fit(config, trace)
        _write_json(fit_path, json.loads(fit.to_json()))
    except BlowupLabError as exc:
        fit = None
        _write_json(fit_path, {"error": type(exc).__name__, "message": str(exc)})
    manifest = {
        "command": "simulate",
        "config_hash": _config_hash(config),
        "started": started,
        "finished": time.time(),
        "artifacts": [os.path.join(run_dir, p) for p in
                      ("config.json", "trace.csv", "fit.json")] + snap_paths,
        "versions": {"blowuplab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
    }
    _write_json(os.path.join(run_dir, "manifest.json"), manifest)
    return run_dir, trace, fit


def cmd_simulate(args):
    out_root = _out_root(args.out)
    configs = [args.config] + (args.sweep or [])
    if len(configs) == 1:
        results = [_run_one(configs[0], out_root)]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_one, configs,
                                    [out_root] * len(configs)))
    for run_dir, trace, fit in results:
        line = f"{run_dir}: stopped={trace.stopped}"
        if fit is not None:
            if fit.kind == "power":
                line += f" beta={fit.beta:.5f} T={fit.T:.8f}"
            else:
                line += f" C={fit.C:.5f} s0={fit.s0:.4f} T={fit.T:.8f}"
        print(line)
    return 0


# ----------------------------------------------------------------------------
# fit / compare

def _load_run(run_dir):
    with open(os.path.join(run_dir, "config.json")) as fh:
        saved = json.load(fh)
    params = ModelParams(d=float(saved["d"]), k=int(saved["k"]))
    kwargs = {key: saved[key] for key in _CONFIG_FIELDS if key in saved}
    config = meshsim.SimConfig(params=params, **kwargs)
    trace = meshsim.trace_from_csv(os.path.join(run_dir, "trace.csv"),
                                   config=config,
                                   stopped=saved.get("stopped", "blowup"))
    return config, trace


def cmd_fit(args):
    config, trace = _load_run(args.run)
    if args.kind == "power":
        fit = meshsim.fit_power(trace)
    elif args.kind == "log":
        fit = meshsim.fit_log(trace, delta=derive(config.params).delta)
    else:
        fit = _auto_fit(config, trace)
    print(fit.to_json())
    _write_json(os.path.join(args.run, "fit.json"), json.loads(fit.to_json()))
    return 0


def _d7_plot_csv(path, trace, T):
    mask = trace.t < T
    x = -np.log(T - trace.t[mask])
    y = np.sqrt(T - trace.t[mask]) * np.abs(trace.dr_u0[mask])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["neg_log_T_minus_t", "sqrt_T_minus_t_dr_u0"])
        for xj, yj in zip(x, y):
            writer.writerow([repr(float(xj)), repr(float(yj))])


def _overlay_csv(path, run_dir, config, T, prof, basis, N):
    """Latest usable snapshot against the matched ansatz, in (y, f)."""
    snap_dir = os.path.join(run_dir, "snapshots")
    metas = sorted(f for f in os.listdir(snap_dir) if f.endswith(".json"))
    best = None
    for meta in metas:
        with open(os.path.join(snap_dir, meta)) as fh:
            t = json.load(fh)["t"]
        if t < T:
            best = meta[:-5]
    if best is None:
        return False
    data = np.genfromtxt(os.path.join(snap_dir, best + ".csv"),
                         delimiter=",", names=True)
    state = meshsim.MeshState(
        t=float(json.load(open(os.path.join(snap_dir, best + ".json")))["t"]),
        r=data["r"], u=data["u"])
    g0 = (state.u[1] - state.u[0]) / (state.r[1] - state.r[0])
    tau = T - state.t
    eps = 1.0 / (prof.Cs * math.sqrt(tau) * abs(g0))
    if not 0.0 < eps <= 0.1:
        return False
    ss = meshsim.to_self_similar(state, T)
    mask = (ss.y >= eps * 1e-2) & (ss.y <= 2.0)
    ansatz = rates.assemble_ansatz(prof, basis, N, eps, y_grid=ss.y[mask])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "f_numeric", "f_ansatz"])
        for yj, fj, aj in zip(ss.y[mask], ss.f[mask], ansatz.f):
            writer.writerow([repr(float(v)) for v in (yj, fj, aj)])
    return True


def cmd_compare(args):
    config, trace = _load_run(args.run)
    report = {"run": args.run, "d": config.params.d, "k": config.params.k}
    if trace.no_blowup:
        report["status"] = "NoBlowup"
        print(json.dumps(report, indent=2))
        _write_json(os.path.join(args.run, "compare.json"), report)
        return 0
    consts = derive(config.params)
    N = _default_N(consts)
    prof, basis, coup, law = _pipeline(config.params.d, config.params.k, N)[1:]
    report["status"] = "ok"
    if law.kind == "power":
        fit = meshsim.fit_power(trace)
        beta_pred = law.exponent - 0.5
        report["fit"] = {"beta": fit.beta, "T": fit.T,
                         "uncertainty": fit.uncertainty}
        report["predicted_beta"] = beta_pred
        report["relative_error"] = abs(fit.beta - beta_pred) / beta_pred
        print(f"beta: fitted {fit.beta:.5f} vs predicted {beta_pred:.5f} "
              f"(relative error {report['relative_error']:.2%})")
    else:
        fit = meshsim.fit_log(trace, delta=consts.delta)
        # the trace measures 1/R, so the fitted slope is the reciprocal of
        # the rate-law prefactor Cs*CN
        C_pred = 1.0 / law.prefactor
        report["fit"] = {"C": fit.C, "s0": fit.s0, "T": fit.T,
                         "r_squared": fit.r_squared}
        report["predicted_C"] = C_pred
        report["relative_error"] = abs(fit.C - C_pred) / C_pred
        report["C_ratio"] = fit.C / C_pred
        print(f"C: fitted {fit.C:.5f} vs predicted {C_pred:.5f} "
              f"(relative error {report['relative_error']:.2%})")
        if args.run2:
            _, trace2 = _load_run(args.run2)
            fit2 = meshsim.fit_log(trace2, delta=consts.delta)
            agree = abs(fit.C - fit2.C) / min(fit.C, fit2.C)
            report["run2"] = args.run2
            report["C2"] = fit2.C
            report["C_agreement"] = agree
            print(f"C agreement across runs: {agree:.2%}")
    plot_path = os.path.join(args.run, "rate_plot.csv")
    _d7_plot_csv(plot_path, trace, fit.T)
    report["rate_plot"] = plot_path
    overlay_path = os.path.join(args.run, "overlay.csv")
    if _overlay_csv(overlay_path, args.run, config, fit.T, prof, basis, N):
        report["overlay"] = overlay_path
    print(f"report relative error: {report['relative_error']:.4f}")
    _write_json(os.path.join(args.run, "compare.json"), report)
    return 0


# ----------------------------------------------------------------------------
# dumps

def cmd_profile_dump(args):
    consts = derive(ModelParams(d=args.d, k=args.k))
    prof = profile_mod.solve_profile(consts)
    prof.to_csv(args.out)
    print(f"{args.out}: h={prof.h:.8f} Cs={prof.Cs:.8f}")
    return 0


def cmd_basis_dump(args):
    consts = derive(ModelParams(d=args.d, k=args.k))
    basis = spectral.build_basis(consts, max_n=args.n)
    basis.to_csv(args.out)
    print(f"{args.out}: n<={args.n}, "
          f"gram residual target {spectral.ORTHO_TARGET:g}")
    return 0


# ----------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="blowuplab",
        description="Type-II blow-up rates: matched asymptotics vs. "
                    "moving-mesh simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="closed-form rate law for (d, k, N)")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--json", help="write constants/rate-law JSON here")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="run the moving-mesh solver")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--sweep", nargs="*", help="additional config files")
    p.add_argument("--out", help="output root (default BLOWUPLAB_OUT or .)")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="(re-)fit a run directory")
    p.add_argument("--run", required=True)
    p.add_argument("--kind", choices=("auto", "power", "log"), default="auto")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="prediction vs. experiment report")
    p.add_argument("--run", required=True)
    p.add_argument("--run2", help="second run for C-universality check")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("profile-dump", help="boundary-layer orbit CSV")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile_dump)

    p = sub.add_parser("basis-dump", help="eigenbasis table CSV")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_basis_dump)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlowupLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
