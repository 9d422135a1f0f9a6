"""Command-line interface.

Experiments are described by a flat key=value configuration (dotted
namespaces), assembled from built-in defaults, an optional --config file,
and key=value arguments, in that order. Every command writes the resolved
configuration to <out>/effective.cfg; re-running from that file reproduces
all outputs byte for byte. Exit codes: 0 ok, 2 configuration problem,
3 runtime or numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, dynamics, hyperopt, pipeline, tasks
from ._csvio import fmt, write_csv
from .exceptions import ConfigurationError, DataFormatError, DelayRCError

__all__ = ["main", "entrypoint"]


def _bool(raw: str) -> bool:
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no"):
        return False
    raise ConfigurationError(f"expected a boolean, got {raw!r}")


def _floats(raw: str) -> tuple:
    """Comma list '0.49,1.0' or inclusive range spec 'lo:hi:step'."""
    if ":" in raw:
        lo, hi, step = (float(v) for v in raw.split(":"))
        if step <= 0 or hi < lo:
            raise ConfigurationError(f"bad range spec {raw!r}")
        n = int(round((hi - lo) / step))
        return tuple(float(v) for v in (lo + step * np.arange(n + 1))
                     if v <= hi + 1e-12)
    return tuple(float(v) for v in raw.split(","))


# key -> (coercer, default). None default means "only meaningful if set".
_SCHEMA = {
    "command": (str, None),
    "out": (str, None),
    "seed.mask": (int, 0),
    "seed.data": (int, 0),
    "seed.sampler": (int, 0),
    "task": (str, "sine_square"),
    "task.n_waveforms": (int, 20),
    "task.spp_lo": (int, 3),
    "task.spp_hi": (int, 5),
    "task.periods": (int, 128),
    "task.length": (int, 8000),
    "task.fraction": (float, 0.5),
    "task.washout": (int, None),
    "task.path": (str, None),
    "task.n_per_class": (int, 40),
    "reservoir.k": (int, 50),
    "reservoir.beta": (float, 1.0),
    "reservoir.M": (float, 0.983),
    "reservoir.rho": (float, 0.19),
    "reservoir.G": (float, 0.39),
    "reservoir.Phi0": (float, 0.67 * np.pi),
    "reservoir.tau_over_T": (float, 0.27),
    "readout.lam": (float, 1.4e-3),
    "readout.bias": (_bool, False),
    "optimize.budget": (int, 300),
    "optimize.sampler": (str, "tpe"),
    "optimize.n_startup": (int, 20),
    "optimize.gamma": (float, 0.25),
    "optimize.n_candidates": (int, 24),
    "optimize.width": (int, 1),
    "optimize.record_timings": (_bool, False),
    "space.rho": (_floats, (0.0, 1.0)),
    "space.G": (_floats, (0.0, 1.2)),
    "space.Phi0": (_floats, (0.0, float(np.pi))),
    "space.tau_over_T": (_floats, (0.0, 5.0)),
    "space.lam": (_floats, (1e-8, 1.0)),
    "sweep.grid": (_floats, None),
    "sweep.repeats": (int, 5),
    "dynamics.G": (float, 0.56),
    "dynamics.M": (float, 0.983),
    "dynamics.x_b": (float, 0.0),
    "dynamics.V_pi": (float, 1.0),
    "dynamics.P_max": (float, 0.0),
    "dynamics.G_star": (float, 0.0),
    "dynamics.T_R": (float, 0.0),
    "dynamics.tau": (float, 1.0),
    "dynamics.x0": (float, 0.1),
    "dynamics.n": (int, 100),
    "dynamics.N_max": (int, 8),
    "dynamics.axis": (str, "G"),
    "dynamics.lo": (float, 0.1),
    "dynamics.hi": (float, 1.6),
    "dynamics.steps": (int, 151),
    "dde.duration": (float, 50.0),
    "dde.dt": (float, 0.01),
    "dde.history_value": (float, 0.0),
}

_TASK_WASHOUT = {"sine_square": 10, "narma10": 100, "vowels": 12}


def _coerce(key: str, raw):
    if key not in _SCHEMA:
        raise ConfigurationError(f"unknown config key {key!r}")
    if not isinstance(raw, str):
        return raw
    coerce = _SCHEMA[key][0]
    try:
        return coerce(raw)
    except ConfigurationError:
        raise
    except ValueError:
        raise ConfigurationError(
            f"bad value for {key!r}: {raw!r}") from None


def _load_config_file(path) -> dict:
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file not found: {path}")
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def _resolve(command: str, config_path, overrides) -> dict:
    cfg = {k: v for k, (_, v) in _SCHEMA.items() if v is not None}
    cfg["command"] = command
    layered = {}
    if config_path:
        layered.update(_load_config_file(config_path))
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"expected key=value argument, got {item!r}")
        key, _, val = item.partition("=")
        layered[key.strip()] = val.strip()
    for key, raw in layered.items():
        if key == "command":
            if str(raw) != command:
                raise ConfigurationError(
                    f"config was written for command {raw!r}, invoked as {command!r}")
            continue
        cfg[key] = _coerce(key, raw)
    if "out" not in cfg or cfg["out"] is None:
        cfg["out"] = os.environ.get("DELAYRC_OUTDIR", "delayrc-out")
    return cfg


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(fmt(x) for x in v)
    return fmt(v)


def _echo_config(cfg: dict):
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    lines = [f"{k}={_fmt_value(cfg[k])}" for k in sorted(cfg)]
    with open(os.path.join(out, "effective.cfg"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _comment(cfg, *seed_keys) -> str:
    seeds = " ".join(f"{k.split('.')[1]}={cfg[k]}" for k in seed_keys)
    return f"delayrc {__version__} | seeds: {seeds}" if seeds else f"delayrc {__version__}"


def _params(cfg) -> dict:
    return {"rho": cfg["reservoir.rho"], "G": cfg["reservoir.G"],
            "Phi0": cfg["reservoir.Phi0"],
            "tau_over_T": cfg["reservoir.tau_over_T"],
            "lam": cfg["readout.lam"]}


def _task_options(cfg) -> dict:
    task = cfg["task"]
    washout = cfg.get("task.washout")
    if washout is None:
        washout = _TASK_WASHOUT[task] if task in _TASK_WASHOUT else 0
    if task == "sine_square":
        return {"n_waveforms": cfg["task.n_waveforms"],
                "samples_per_period": (cfg["task.spp_lo"], cfg["task.spp_hi"]),
                "periods_per_waveform": cfg["task.periods"],
                "fraction": cfg["task.fraction"], "washout": washout}
    if task == "narma10":
        return {"length": cfg["task.length"], "fraction": cfg["task.fraction"],
                "washout": washout}
    if task == "vowels":
        return {"path": cfg.get("task.path"),
                "n_per_class": cfg["task.n_per_class"],
                "synthetic_seed": cfg["seed.data"], "washout": washout}
    raise ConfigurationError(
        f"unknown task {cfg['task']!r}, expected one of {pipeline.TASK_IDS}")


def _template(cfg) -> dict:
    return {"k": cfg["reservoir.k"], "beta": cfg["reservoir.beta"],
            "M": cfg["reservoir.M"], "add_bias": cfg["readout.bias"]}


def _space(cfg) -> hyperopt.SearchSpace:
    def pair(key):
        v = cfg[key]
        if len(v) != 2:
            raise ConfigurationError(f"{key} must be a lo,hi pair, got {v}")
        return (float(v[0]), float(v[1]))
    return hyperopt.SearchSpace(
        rho=pair("space.rho"), G=pair("space.G"), Phi0=pair("space.Phi0"),
        tau_over_T=pair("space.tau_over_T"), lam=pair("space.lam"))


# ---------------------------------------------------------------- commands

def _oscillator(cfg) -> dynamics.OscillatorParams:
    return dynamics.OscillatorParams(
        G=cfg["dynamics.G"], M=cfg["dynamics.M"], x_b=cfg["dynamics.x_b"],
        V_pi=cfg["dynamics.V_pi"], P_max=cfg["dynamics.P_max"],
        G_star=cfg["dynamics.G_star"], T_R=cfg["dynamics.T_R"],
        tau=cfg["dynamics.tau"])


def cmd_dynamics(sub: str, cfg: dict) -> int:
    p = _oscillator(cfg)
    out = cfg["out"]
    note = _comment(cfg)
    if sub == "cobweb":
        pts = dynamics.cobweb(cfg["dynamics.x0"], cfg["dynamics.n"], p)
        dynamics.cobweb_to_csv(pts, os.path.join(out, "cobweb.csv"), note)
        print(f"cobweb: {len(pts)} points -> {out}/cobweb.csv")
    elif sub == "bifurcation":
        rows = dynamics.bifurcation_sweep(
            cfg["dynamics.axis"], (cfg["dynamics.lo"], cfg["dynamics.hi"]),
            cfg["dynamics.steps"], p, N_max=cfg["dynamics.N_max"])
        dynamics.bifurcation_to_csv(rows, os.path.join(out, "bifurcation.csv"), note)
        print(f"bifurcation: {len(rows)} axis values -> {out}/bifurcation.csv")
    elif sub == "regime":
        r = dynamics.classify_regime(p)
        dynamics.regime_to_csv([(p, r)], os.path.join(out, "regime.csv"), note)
        print(f"regime={r.kind} period={r.period} lyapunov={r.lyapunov!r}")
    elif sub == "dde":
        hist_v = cfg["dde.history_value"]
        t, V = dynamics.integrate_dde(p, lambda _t: hist_v,
                                      cfg["dde.duration"], cfg["dde.dt"])
        write_csv(os.path.join(out, "dde_trace.csv"), ["t", "V"],
                  ([float(a), float(b)] for a, b in zip(t, V)), note)
        print(f"dde: {t.size} samples -> {out}/dde_trace.csv")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigurationError(f"unknown dynamics subcommand {sub!r}")
    return 0


def cmd_run(cfg: dict) -> int:
    eval_fn = pipeline.make_eval(
        cfg["task"], k=cfg["reservoir.k"], mask_seed=cfg["seed.mask"],
        beta=cfg["reservoir.beta"], M=cfg["reservoir.M"],
        add_bias=cfg["readout.bias"], options=_task_options(cfg))
    res = eval_fn(_params(cfg), cfg["seed.data"])
    out = cfg["out"]
    note = _comment(cfg, "seed.mask", "seed.data")

    metrics = [["nmse_train", res.nmse_train], ["nmse_test", res.nmse_test],
               ["nrmse_test", res.nrmse_test]]
    if res.wer is not None:
        metrics.append(["wer_test", res.wer])
    write_csv(os.path.join(out, "metrics.csv"), ["metric", "value"], metrics, note)

    series, split = res.series, res.split
    part = np.where(split.train.steps, "train", "test")
    o = series.y.shape[0]
    header = (["step", "u"] + [f"target_{j}" for j in range(o)]
              + [f"readout_{j}" for j in range(o)] + ["part"])

    def gen():
        for t in range(series.n_steps):
            yield ([t, float(series.u[t])]
                   + [float(series.y[j, t]) for j in range(o)]
                   + [float(res.y_hat[j, t]) for j in range(o)]
                   + [str(part[t])])
    write_csv(os.path.join(out, "trace.csv"), header, gen(), note)

    from .readout import weights_to_csv
    weights_to_csv(res.weights, os.path.join(out, "weights.csv"), note)
    line = f"task={cfg['task']} nmse_test={res.nmse_test!r} nrmse_test={res.nrmse_test!r}"
    if res.wer is not None:
        line += f" wer_test={res.wer!r}"
    print(line)
    return 0


def cmd_optimize(cfg: dict) -> int:
    out = cfg["out"]
    study = hyperopt.run_study(
        cfg["task"], template=_template(cfg), space=_space(cfg),
        budget=cfg["optimize.budget"],
        seeds={"sampler": cfg["seed.sampler"], "data": cfg["seed.data"],
               "mask": cfg["seed.mask"]},
        path=os.path.join(out, "study.jsonl"),
        width=cfg["optimize.width"], sampler=cfg["optimize.sampler"],
        n_startup=cfg["optimize.n_startup"], gamma=cfg["optimize.gamma"],
        n_candidates=cfg["optimize.n_candidates"],
        record_timing=cfg["optimize.record_timings"],
        task_options=_task_options(cfg))
    best = study.best
    if best is None:
        print("no successful trial", file=sys.stderr)
        return 3
    best_cfg = dict(cfg)
    best_cfg["command"] = "run"
    best_cfg["reservoir.rho"] = best.params["rho"]
    best_cfg["reservoir.G"] = best.params["G"]
    best_cfg["reservoir.Phi0"] = best.params["Phi0"]
    best_cfg["reservoir.tau_over_T"] = best.params["tau_over_T"]
    best_cfg["readout.lam"] = best.params["lam"]
    lines = [f"{k}={_fmt_value(best_cfg[k])}" for k in sorted(best_cfg)
             if not k.startswith(("optimize.", "space.", "sweep."))]
    with open(os.path.join(out, "best.cfg"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"best trial {best.trial_id}: loss={best.loss!r} params="
          + " ".join(f"{k}={best.params[k]!r}" for k in hyperopt.DIMS))
    print(f"study -> {out}/study.jsonl ({len(study.trials)} trials), "
          f"best config -> {out}/best.cfg")
    return 0


def cmd_sweep_delay(cfg: dict) -> int:
    grid = cfg.get("sweep.grid")
    if not grid:
        raise ConfigurationError("sweep.grid is required (comma list or lo:hi:step)")
    k = cfg["reservoir.k"]
    # collapse grid values landing on the same integer delay, keep first
    seen, kept, dropped = set(), [], 0
    for v in grid:
        d = int(round(k * v))
        if d in seen:
            dropped += 1
            continue
        seen.add(d)
        kept.append(v)
    rows = hyperopt.resonance_sweep(
        cfg["task"], _params(cfg), kept, repeats=cfg["sweep.repeats"],
        template=_template(cfg),
        seeds={"sampler": cfg["seed.sampler"], "data": cfg["seed.data"],
               "mask": cfg["seed.mask"]},
        task_options=_task_options(cfg))
    out = cfg["out"]
    write_csv(os.path.join(out, "sweep.csv"),
              ["tau_over_T", "d", "nmse_mean", "nmse_std", "repeats"],
              hyperopt.sweep_to_rows(rows),
              _comment(cfg, "seed.mask", "seed.data"))
    peak = max(rows, key=lambda r: r.nmse_mean)
    print(f"sweep: {len(rows)} rows ({dropped} duplicate delays collapsed) "
          f"-> {out}/sweep.csv")
    print(f"peak: tau_over_T={peak.tau_over_T!r} d={peak.d} "
          f"nmse_mean={peak.nmse_mean!r}")
    return 0


# ------------------------------------------------------------------ driver

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="delayrc",
        description="Delay-based reservoir computing simulator and optimizer")
    ap.add_argument("--version", action="version", version=f"delayrc {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.epilog = "trailing key=value arguments override config values"

    pd = sub.add_parser("dynamics", help="map analysis data (CSV)")
    pd.add_argument("sub", choices=["cobweb", "bifurcation", "regime", "dde"])
    common(pd)
    common(sub.add_parser("run", help="single end-to-end benchmark evaluation"))
    common(sub.add_parser("optimize", help="hyperparameter study on a benchmark"))
    common(sub.add_parser("sweep-delay", help="NMSE versus delay/clock ratio"))
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    ns, extras = ap.parse_known_args(argv)
    for item in extras:
        if item.startswith("-") or "=" not in item:
            ap.error(f"unrecognized argument: {item}")
    ns.overrides = extras
    command = ns.cmd if ns.cmd != "dynamics" else f"dynamics.{ns.sub}"
    try:
        cfg = _resolve(command, ns.config, ns.overrides)
        if cfg["task"] not in pipeline.TASK_IDS:
            raise ConfigurationError(
                f"unknown task {cfg['task']!r}, expected one of {pipeline.TASK_IDS}\n"
                + ap.format_usage())
        _echo_config(cfg)
        if ns.cmd == "dynamics":
            return cmd_dynamics(ns.sub, cfg)
        if ns.cmd == "run":
            return cmd_run(cfg)
        if ns.cmd == "optimize":
            return cmd_optimize(cfg)
        return cmd_sweep_delay(cfg)
    except (ConfigurationError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DelayRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


def entrypoint():  # pragma: no cover - console script shim
    raise SystemExit(main())
