"""Command-line entry point: ``kraichnan <subcommand> [options]``.

Options can also come from a flat ``key = value`` file given with
``--config``; command-line flags win over the file.  Every run writes its
artifacts atomically into ``--out`` together with ``manifest.json``.
Exit codes: 0 ok, 1 runtime failure or failed invariant, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import artifacts as art
from .correlation_pde import (
    SpectralCorrelation,
    autocorrelation,
    default_discard,
    fit_decay,
    loglog_slope,
    nash_profile,
    solve,
)
from .flows import MODELS, FlowParams
from .inequalities import SUITES, run_suite
from .spectrum import ShearSpectrum, SpectrumConfig, SpectrumError
from .tensor import assemble_tensor, quotient_min, uniform_tensor, verify_lower_bound
from .transport import (
    cosine_initial,
    dissipation_sweep,
    energy_gap_witness,
    mc_energy,
    retained_kmax,
)


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


# defaults per key; None means "derived later"
DEFAULTS = {
    "alpha": 0.5, "eta": 0.0, "rho": "gaussian", "kappa": None, "kappa_list": None,
    "grid": None, "dt": None, "tmax": None, "model": "white_kraichnan", "eps": None,
    "realizations": 32, "seed": None, "kmax": None, "beta": None, "gamma": 0.5,
    "out_dir": "out", "theta": 1.0, "discard": None, "suite": "all", "samples": 200,
    "degree": 8, "quad": None, "integrator": "chebyshev", "plot": True, "jobs": 1,
}

# g(t, 0) below this fraction of g(0, 0) is roundoff and is left out of decay fits
FIT_FLOOR = 1e-10

FLOATS = {"alpha", "eta", "kappa", "dt", "tmax", "eps", "beta", "gamma", "theta", "discard"}
INTS = {"grid", "realizations", "seed", "kmax", "samples", "degree", "quad", "jobs"}


def read_config_file(path) -> dict:
    """Flat key = value lines; '#' starts a comment; dashes in keys become underscores."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("config", f"line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key == "out":
                key = "out_dir"
            if key not in DEFAULTS:
                raise ConfigError(key, f"unknown key in {path} line {lineno}")
            out[key] = value
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in FLOATS:
            return float(value)
        if key in INTS:
            return int(value)
        if key == "kappa_list":
            if isinstance(value, (list, tuple)):
                return [float(v) for v in value]
            return [float(v) for v in str(value).replace(",", " ").split()]
        if key == "plot":
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
    except ValueError as e:
        raise ConfigError(key, f"cannot parse {value!r}: {e}") from None
    return value


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    env_seed = os.environ.get("KRAICHNAN_SEED")
    if env_seed is not None:
        cfg["seed"] = env_seed
    if args.config:
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    if cfg["seed"] is None:
        cfg["seed"] = 0
    cfg["command"] = args.command
    return cfg


def _range(cfg, key, lo=None, hi=None, lo_open=False, hi_open=False):
    v = cfg[key]
    if v is None:
        return
    if isinstance(v, float) and not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(key, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ConfigError(key, f"must be {'<' if hi_open else '<='} {hi}, got {v}")


def validate(cfg: dict) -> dict:
    """Fill derived defaults and check ranges before any computation."""
    cmd = cfg["command"]
    if cfg["kappa"] is None:
        cfg["kappa"] = {"verify-tensor": 0.0, "nash-profile": 1e-4}.get(cmd, 1e-3)
    _range(cfg, "alpha", 0.0, 1.0, True, True)
    _range(cfg, "eta", 0.0)
    _range(cfg, "kappa", 0.0)
    _range(cfg, "gamma", 0.0, 1.0, False, True)
    _range(cfg, "theta", 0.5, 1.0)
    _range(cfg, "jobs", 1)
    if cfg["rho"] not in ("gaussian", "exponential"):
        raise ConfigError("rho", f"unknown cutoff {cfg['rho']!r}")
    if cfg["kappa_list"] is not None:
        if not cfg["kappa_list"] or any(k < 0 for k in cfg["kappa_list"]):
            raise ConfigError("kappa_list", "needs non-negative values")
    if cmd in ("correlation", "nash-profile"):
        cfg["grid"] = cfg["grid"] or (128 if cmd == "correlation" else 64)
        cfg["dt"] = cfg["dt"] or (1e-2 if cmd == "correlation" else 1e-3)
        cfg["tmax"] = cfg["tmax"] or (20.0 if cmd == "correlation" else 0.1)
        cfg["kmax"] = cfg["kmax"] or cfg["grid"] // 2
        cfg["beta"] = cfg["beta"] if cfg["beta"] is not None else cfg["alpha"]
        if cfg["discard"] is None:
            cfg["discard"] = min(default_discard(cfg["alpha"]), 0.5 * cfg["tmax"])
    if cmd in ("mc", "sweep"):
        if cfg["model"] not in MODELS:
            raise ConfigError("model", f"must be one of {', '.join(MODELS)}")
        cfg["grid"] = cfg["grid"] or (64 if cmd == "mc" else 128)
        if cfg["model"] == "bounded_shear_drift" and cfg["alpha"] <= 0.5:
            raise ConfigError("alpha", "bounded_shear_drift needs alpha > 1/2 (try 0.75)")
        white = cfg["model"].startswith("white")
        cfg["eps"] = cfg["eps"] or (0.01 if white else 0.1)
        cfg["dt"] = cfg["dt"] or cfg["eps"]
        cfg["tmax"] = cfg["tmax"] or 4.0
        K = retained_kmax(cfg["grid"])
        cfg["kmax"] = cfg["kmax"] or K
        if cfg["kmax"] > K:
            raise ConfigError("kmax", f"flow kmax {cfg['kmax']} exceeds the retained box K={K} at grid {cfg['grid']}")
        _range(cfg, "realizations", 2 if cmd == "mc" else 1)
        ratio = cfg["eps"] / cfg["dt"]
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError("dt", f"dt must divide eps={cfg['eps']}")
        if abs(cfg["tmax"] / cfg["dt"] - round(cfg["tmax"] / cfg["dt"])) > 1e-9:
            raise ConfigError("tmax", "must be a multiple of dt")
        if cmd == "sweep":
            kl = cfg["kappa_list"] or [1e-2, 1e-3, 1e-4]
            if any(b >= a for a, b in zip(kl, kl[1:])):
                raise ConfigError("kappa_list", "must be strictly decreasing")
            cfg["kappa_list"] = kl
    if cmd == "verify-tensor":
        cfg["grid"] = cfg["grid"] or 128
        cfg["kmax"] = cfg["kmax"] or 64
        cfg["beta"] = cfg["beta"] if cfg["beta"] is not None else cfg["alpha"]
        _range(cfg, "beta", cfg["alpha"], 1.0)
    if cmd == "ineq":
        if cfg["suite"] != "all" and cfg["suite"] not in SUITES:
            raise ConfigError("suite", f"must be 'all' or one of {', '.join(SUITES)}")
        cfg["beta"] = cfg["beta"] if cfg["beta"] is not None else 0.5
        _range(cfg, "beta", 0.0, 1.0, True, True)
        _range(cfg, "samples", 1)
        _range(cfg, "degree", 1)
        if cfg["quad"] is not None and cfg["quad"] < 4 * cfg["degree"]:
            raise ConfigError("quad", f"must be >= 4 * degree = {4 * cfg['degree']}")
    for key in ("grid",):
        if cfg.get(key) is not None:
            _range(cfg, key, 4)
    for key in ("dt", "tmax", "eps"):
        if cfg.get(key) is not None:
            _range(cfg, key, 0.0, lo_open=True)
    if cfg.get("kmax") is not None:
        _range(cfg, "kmax", 1)
    if cfg["dt"] and cfg["tmax"] and cmd in ("correlation", "nash-profile"):
        if abs(cfg["tmax"] / cfg["dt"] - round(cfg["tmax"] / cfg["dt"])) > 1e-9:
            raise ConfigError("tmax", "must be a multiple of dt")
    return cfg


# --------------------------------------------------------------------------
# subcommands


class InvariantFailure(RuntimeError):
    pass


def _spectrum(cfg):
    return SpectrumConfig(2, cfg["alpha"], cfg["eta"], cfg["rho"], cfg["kmax"])


def _correlation_run(cfg, kappa):
    n = cfg["grid"]
    a = assemble_tensor(_spectrum(cfg), kappa, n)
    g0 = autocorrelation(cosine_initial(n))
    sol = solve(g0, a, cfg["tmax"], cfg["dt"], theta=cfg["theta"])
    fit = fit_decay(sol.t, sol.g_at_0, cfg["discard"], cfg["tmax"], floor=FIT_FLOOR)
    return sol, fit


def _check_correlation(sol):
    drift = np.max(np.abs(sol.mean - sol.mean[0]))
    if drift > 1e-12:
        raise InvariantFailure(f"mean drifted by {drift:.3e}")
    inc = np.max(np.diff(sol.l2_norm))
    if inc > 1e-12 * sol.l2_norm[0]:
        raise InvariantFailure(f"L2 norm increased by {inc:.3e}")


def cmd_correlation(cfg, out: Path):
    kappas = cfg["kappa_list"] or [cfg["kappa"]]
    files, fits = [], []
    if cfg["jobs"] > 1 and len(kappas) > 1:
        with ProcessPoolExecutor(cfg["jobs"]) as ex:
            results = list(ex.map(_correlation_run, [cfg] * len(kappas), kappas))
    else:
        results = [_correlation_run(cfg, k) for k in kappas]
    series = []
    for kappa, (sol, fit) in zip(kappas, results):
        _check_correlation(sol)
        sub = out if len(kappas) == 1 else out / f"kappa_{kappa:g}"
        files.append(art.write_csv(sub / "trace.csv", ["t", "g_at_0", "l2_norm", "linf_norm"], sol.trace_rows()))
        files.append(art.write_json(sub / "fit.json", {"kappa": kappa, **json.loads(fit.to_json())}))
        pos = sol.g_at_0 > 0
        s = {"x": sol.t[pos], "y": sol.g_at_0[pos], "label": f"kappa={kappa:g}"}
        series.append(s)
        if cfg["plot"]:
            files.append(art.line_plot(sub / "decay.svg", [s, {"x": sol.t, "y": fit.prefactor * np.exp(-fit.rate * sol.t),
                                                               "style": "--", "label": f"fit rate {fit.rate:.3f}"}],
                                       "t", "g(t, 0)", logy=True))
        fits.append((kappa, fit))
    if len(kappas) > 1:
        files.append(art.write_csv(out / "summary.csv", ["kappa", "rate", "prefactor", "residual"],
                                   [(k, f.rate, f.prefactor, f.residual) for k, f in fits]))
        if cfg["plot"]:
            files.append(art.line_plot(out / "decay.svg", series, "t", "g(t, 0)", logy=True))
    return files, {"fits": {f"{k:g}": f.rate for k, f in fits}}


def _theta0(n):
    return cosine_initial(n)


def _params(cfg):
    return FlowParams(cfg["grid"], cfg["alpha"], cfg["eta"], cfg["rho"], cfg["kmax"])


def _white_prediction(cfg, kappa, times):
    K = retained_kmax(cfg["grid"])
    if cfg["model"] == "white_kraichnan":
        sc = SpectralCorrelation.kraichnan(_spectrum(cfg), K, kappa, cfg["kmax"])
    else:
        sc = SpectralCorrelation.shear(ShearSpectrum(cfg["alpha"], cfg["kmax"]), K, kappa, cfg["kmax"])
    return sc.energies(sc.initial_from_field(_theta0(cfg["grid"])), times)


def _check_transport(energy, mean_drift, kappas):
    if mean_drift > 1e-12:
        raise InvariantFailure(f"scalar mean drifted by {mean_drift:.3e}")
    for j, k in enumerate(kappas):
        E = energy[:, :, j]
        if k > 0 and np.any(np.diff(E, axis=1) > 1e-10 * E[:, :1]):
            raise InvariantFailure(f"energy increased at kappa={k:g}")


def cmd_mc(cfg, out: Path):
    kappas = cfg["kappa_list"] or [cfg["kappa"]]
    st = mc_energy(cfg["model"], _params(cfg), cfg["eps"], kappas, _theta0(cfg["grid"]), cfg["tmax"],
                   cfg["realizations"], cfg["seed"], cfg["dt"], cfg["jobs"], cfg["integrator"])
    files, extra = [], {}
    series = []
    for j, kappa in enumerate(kappas):
        name = "energy.csv" if len(kappas) == 1 else f"energy_kappa_{kappa:g}.csv"
        files.append(art.write_csv(out / name, ["t", "energy", "stderr"],
                                   zip(st.t, st.mean_energy[:, j], st.stderr[:, j])))
        series.append({"x": st.t, "y": st.mean_energy[:, j], "label": f"MC kappa={kappa:g}"})
        if cfg["model"].startswith("white"):
            times = [t for t in (0.5, 1.0, 2.0, 4.0, 8.0) if t <= cfg["tmax"] + 1e-12]
            pred = _white_prediction(cfg, kappa, times)
            cname = "correlation.csv" if len(kappas) == 1 else f"correlation_kappa_{kappa:g}.csv"
            rows = []
            for t, p in zip(times, pred):
                m, se = st.at(t, j)
                rows.append((t, p, m, se, (m - p) / se if se > 0 else float("nan")))
            files.append(art.write_csv(out / cname, ["t", "predicted_energy", "mc_energy", "stderr", "z_score"], rows))
            extra.setdefault("cross_check", []).append(cname)
            series.append({"x": times, "y": pred, "style": "o--", "label": f"correlation kappa={kappa:g}"})
    _check_transport(st.samples, st.mean_drift, kappas)
    if cfg["plot"]:
        files.append(art.line_plot(out / "energy.svg", series, "t", "E ||theta||^2", logy=True))
    return files, extra


def cmd_sweep(cfg, out: Path):
    kl = cfg["kappa_list"]
    table = dissipation_sweep(cfg["model"], _params(cfg), cfg["eps"], kl, _theta0(cfg["grid"]), cfg["tmax"],
                              cfg["realizations"], cfg["seed"], cfg["dt"], cfg["jobs"], cfg["integrator"])
    _check_transport(table.energy, table.mean_drift, kl)
    files = [art.write_csv(out / "sweep.csv", ["kappa", "dissipated", "stderr"], table.rows())]
    extra = {"initial_energy": table.initial_energy, "fractions": table.fractions().tolist()}
    if len(kl) >= 3 and kl[0] / kl[-1] >= 99:
        gap = energy_gap_witness(table)
        files.append(art.write_json(out / "gap.json", json.loads(gap.to_json())))
        extra["verdict"] = gap.verdict
    if cfg["plot"]:
        pos = table.kappa > 0
        files.append(art.line_plot(out / "dissipation.svg",
                                   [{"x": table.kappa[pos], "y": table.fractions()[pos],
                                     "yerr": table.stderr[pos] / table.initial_energy, "style": "o-"}],
                                   "kappa", "dissipated fraction", logx=True))
    return files, extra


def cmd_verify_tensor(cfg, out: Path):
    spec = _spectrum(cfg)
    a = assemble_tensor(spec, cfg["kappa"], cfg["grid"])
    rep = verify_lower_bound(a, cfg["beta"], seed=cfg["seed"], refine=True)
    files = [art.write_json(out / "report.json", json.loads(rep.to_json()))]
    alpha = cfg["alpha"]
    rows = []
    for beta in sorted({alpha, (alpha + 1) / 2, 1.0}):
        r = verify_lower_bound(a, beta, seed=cfg["seed"])
        rows.append((beta, r.empirical_c, r.regime_mins["inner"], r.regime_mins["outer"]))
    files.append(art.write_csv(out / "beta_sweep.csv", ["beta", "empirical_c", "inner_min", "outer_min"], rows))
    if cfg["plot"]:
        sampled, _, r = quotient_min(a, cfg["beta"], seed=cfg["seed"])
        edges = np.linspace(0, r.max() + 1e-9, 41)
        idx = np.digitize(r.ravel(), edges)
        xs, ys = [], []
        for b in range(1, len(edges)):
            sel = (idx == b) & np.isfinite(sampled.ravel())
            if sel.any():
                xs.append(r.ravel()[sel].mean())
                ys.append(sampled.ravel()[sel].min())
        files.append(art.line_plot(out / "quotient.svg", [{"x": xs, "y": ys, "style": "o-"}],
                                   "|x|", "min w.a(x)w / |x|^(2 beta)"))
    return files, {"empirical_c": rep.empirical_c, "refinement_delta": rep.refinement_delta}


def cmd_nash_profile(cfg, out: Path):
    n = cfg["grid"]
    a = assemble_tensor(_spectrum(cfg), cfg["kappa"], n)
    t, l2 = nash_profile(a, cfg["dt"], cfg["tmax"], theta=cfg["theta"])
    th, l2h = nash_profile(uniform_tensor(n), cfg["dt"], cfg["tmax"], theta=cfg["theta"])
    lo, hi = 10 * cfg["dt"], cfg["tmax"]
    slope = loglog_slope(t, l2, lo, hi)
    heat = loglog_slope(th, l2h, lo, hi)
    files = [art.write_csv(out / "nash.csv", ["t", "l2_norm", "heat_l2_norm"], zip(t, l2, l2h)),
             art.write_json(out / "nash.json", {"slope": slope, "heat_slope": heat, "window": [lo, hi],
                                                "envelope_slope": -2 / (4 * (1 - cfg["beta"]))})]
    if cfg["plot"]:
        files.append(art.line_plot(out / "nash.svg", [
            {"x": t[1:], "y": l2[1:], "label": f"assembled a, slope {slope:.3f}"},
            {"x": th[1:], "y": l2h[1:], "style": "--", "label": f"a = I, slope {heat:.3f}"}],
            "t", "||g(t)||_2", logx=True, logy=True))
    return files, {"slope": slope, "heat_slope": heat}


def cmd_ineq(cfg, out: Path):
    suites = SUITES if cfg["suite"] == "all" else (cfg["suite"],)
    files, summary, ratios = [], {}, {}
    for s in suites:
        rep = run_suite(s, cfg["samples"], cfg["degree"], cfg["seed"], cfg["quad"], cfg["beta"], cfg["gamma"])
        files.append(art.write_json(out / f"report_{s}.json", json.loads(rep.to_json())))
        files.append(art.write_csv(out / f"ratios_{s}.csv", ["sample", "ratio"], enumerate(rep.ratios)))
        summary[s] = rep.max_ratio
        ratios[s] = rep.ratios
        if not all(math.isfinite(r) and r > 0 for r in rep.ratios):
            raise InvariantFailure(f"suite {s} produced a non-finite ratio")
    if cfg["plot"]:
        series = [{"x": np.arange(1, cfg["samples"] + 1), "y": np.maximum.accumulate(r), "label": s}
                  for s, r in ratios.items()]
        files.append(art.line_plot(out / "running_max.svg", series, "sample", "running max ratio"))
    return files, {"max_ratio": summary}


COMMANDS = {
    "correlation": cmd_correlation,
    "mc": cmd_mc,
    "sweep": cmd_sweep,
    "verify-tensor": cmd_verify_tensor,
    "nash-profile": cmd_nash_profile,
    "ineq": cmd_ineq,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("shared options")
    g.add_argument("--config", help="flat key = value file; flags override it")
    g.add_argument("--out", dest="out_dir", help="artifact directory")
    g.add_argument("--seed", type=int, help="root seed (default: $KRAICHNAN_SEED or 0)")
    g.add_argument("--jobs", type=int, help="worker processes for sweeps and realizations")
    g.add_argument("--no-plot", dest="plot", action="store_false", default=None, help="skip SVG output")

    phys = argparse.ArgumentParser(add_help=False)
    p = phys.add_argument_group("model parameters")
    p.add_argument("--alpha", type=float, help="Hoelder exponent in (0, 1)")
    p.add_argument("--eta", type=float, help="cutoff scale >= 0")
    p.add_argument("--rho", choices=["gaussian", "exponential"], help="cutoff profile")
    p.add_argument("--kappa", type=float, help="molecular diffusivity")
    p.add_argument("--kappa-list", dest="kappa_list", help="comma separated diffusivities")
    p.add_argument("--kmax", type=int, help="spectral truncation")
    p.add_argument("--grid", type=int, help="points per axis")
    p.add_argument("--dt", type=float)
    p.add_argument("--tmax", type=float, help="final time")

    parser = argparse.ArgumentParser(prog="kraichnan", description="Kraichnan passive scalar laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    c = sub.add_parser("correlation", parents=[common, phys], help="correlation equation solve and decay fit")
    c.add_argument("--theta", type=float, help="time stepping: 1 implicit Euler, 0.5 Crank-Nicolson")
    c.add_argument("--discard", type=float, help="fit window start")
    for name, helptext in (("mc", "Monte Carlo energy of the transported scalar"),
                           ("sweep", "dissipation sweep over kappa_list")):
        m = sub.add_parser(name, parents=[common, phys], help=helptext)
        m.add_argument("--model", choices=MODELS)
        m.add_argument("--eps", type=float, help="correlation time (white models: MC step)")
        m.add_argument("--realizations", type=int)
        m.add_argument("--integrator", choices=["chebyshev", "rk4"])
    v = sub.add_parser("verify-tensor", parents=[common, phys], help="lower bounds on a(x)")
    v.add_argument("--beta", type=float)
    nsh = sub.add_parser("nash-profile", parents=[common, phys], help="L2 norm from a point source")
    nsh.add_argument("--beta", type=float)
    nsh.add_argument("--theta", type=float)
    q = sub.add_parser("ineq", parents=[common], help="weighted inequality suites")
    q.add_argument("--suite", help="suite id or 'all'")
    q.add_argument("--samples", type=int)
    q.add_argument("--degree", type=int)
    q.add_argument("--quad", type=int)
    q.add_argument("--beta", type=float)
    q.add_argument("--gamma", type=float)
    return parser


def _error(code, kind, message, field=None, out_dir=None):
    err = {"error": kind, "message": message}
    if field is not None:
        err["field"] = field
    text = json.dumps(err)
    print(text, file=sys.stderr)
    if out_dir is not None:
        try:
            art.write_json(Path(out_dir) / "error.json", err)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = validate(resolve(args))
    except (ConfigError, SpectrumError) as e:
        return _error(2, "config", str(e), getattr(e, "field", None))
    except OSError as e:
        return _error(2, "config", str(e), "config")
    out = Path(cfg["out_dir"])
    try:
        files, extra = COMMANDS[cfg["command"]](cfg, out)
        public = {k: v for k, v in cfg.items() if k != "command"}
        art.write_manifest(out, cfg["command"], public, [Path(f).relative_to(out) for f in files], extra)
    except (ConfigError, SpectrumError) as e:
        return _error(2, "config", str(e), getattr(e, "field", None), out)
    except InvariantFailure as e:
        return _error(1, "invariant", str(e), None, out)
    except Exception as e:  # noqa: BLE001
        traceback.print_exc()
        return _error(1, "runtime", f"{type(e).__name__}: {e}", None, out)
    print(json.dumps({"status": "ok", "out_dir": str(out), **extra}, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
