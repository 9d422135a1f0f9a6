"""Hyperparameter search over the five reservoir tunables (input scaling,
gain, phase bias, delay ratio, ridge constant): random search, a
Parzen-density suggester, study persistence, and the delay-resonance sweep.

A study's objective is deterministic (fixed data seed), so re-running a
study with the same seeds reproduces every trial; suggestion randomness is
keyed by (sampler seed, trial id) which also makes interrupted studies
resumable without drift.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import pipeline
from .exceptions import ConfigurationError

__all__ = [
    "SearchSpace", "Trial", "Study", "SweepRow",
    "random_search", "tpe_suggest", "run_study", "resonance_sweep",
    "save_study", "load_study", "sweep_to_rows",
]

logger = logging.getLogger("delayrc.hyperopt")

DIMS = ("rho", "G", "Phi0", "tau_over_T", "lam")
_LOG_DIMS = ("lam",)          # sampled and modeled in log10 space
_LOW_OPEN = ("G", "tau_over_T")   # lower bound excluded


@dataclass(frozen=True)
class SearchSpace:
    rho: tuple = (0.0, 1.0)
    G: tuple = (0.0, 1.2)
    Phi0: tuple = (0.0, math.pi)
    tau_over_T: tuple = (0.0, 5.0)
    lam: tuple = (1e-8, 1.0)

    def __post_init__(self):
        for name in DIMS:
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise ConfigurationError(f"empty interval for {name}: ({lo}, {hi})")
        if self.lam[0] <= 0:
            raise ConfigurationError("lam interval must be positive (log sampling)")

    def sample(self, rng) -> dict:
        out = {}
        for name in DIMS:
            lo, hi = getattr(self, name)
            if name in _LOG_DIMS:
                out[name] = 10.0 ** rng.uniform(math.log10(lo), math.log10(hi))
            elif name in _LOW_OPEN:
                # draw on (lo, hi]: reflect the half-open uniform
                out[name] = hi - (hi - lo) * rng.random()
            else:
                out[name] = rng.uniform(lo, hi)
        return out

    def contains(self, params: dict) -> bool:
        for name in DIMS:
            lo, hi = getattr(self, name)
            v = params[name]
            if not (lo <= v <= hi) or (name in _LOW_OPEN and v == lo):
                return False
        return True

    def as_dict(self) -> dict:
        return {name: list(getattr(self, name)) for name in DIMS}

    @classmethod
    def from_dict(cls, d) -> "SearchSpace":
        return cls(**{name: tuple(d[name]) for name in DIMS})


@dataclass
class Trial:
    trial_id: int
    params: dict
    loss: float | None
    seed: int
    status: str = "ok"
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class Study:
    space: SearchSpace
    objective: dict
    sampler_seed: int
    trials: list = field(default_factory=list)

    def ok_trials(self) -> list:
        return [t for t in self.trials if t.ok]

    @property
    def best(self) -> Trial | None:
        ok = self.ok_trials()
        return min(ok, key=lambda t: t.loss) if ok else None


def _run_objective(objective, params, trial_id, seed, record_timing):
    t0 = time.perf_counter() if record_timing else 0.0
    try:
        loss = float(objective(params))
        status = "ok"
        if not np.isfinite(loss):
            loss, status = None, "failed:non-finite loss"
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # recorded, never aborts the study
        loss, status = None, f"failed:{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0 if record_timing else 0.0
    return Trial(trial_id=trial_id, params=params, loss=loss, seed=seed,
                 status=status, wall_time=wall)


def random_search(objective, space: SearchSpace, n_trials: int,
                  seed: int = 0, record_timing: bool = False) -> Study:
    """n independent draws from the space, evaluated in order."""
    if n_trials < 1:
        raise ConfigurationError(f"n_trials must be >= 1, got {n_trials}")
    study = Study(space=space, objective={"kind": "callable"}, sampler_seed=seed)
    for i in range(n_trials):
        rng = np.random.default_rng([seed, i])
        params = space.sample(rng)
        study.trials.append(
            _run_objective(objective, params, i, i, record_timing))
    return study


def _kde_logpdf(x, centers, bw):
    z = (x - centers[:, None]) / bw
    dens = np.mean(np.exp(-0.5 * z * z), axis=0) / (bw * math.sqrt(2 * math.pi))
    return np.log(np.maximum(dens, 1e-300))


def _to_model_space(name, v):
    return np.log10(v) if name in _LOG_DIMS else np.asarray(v, dtype=float)


def tpe_suggest(history, space: SearchSpace, gamma: float = 0.25,
                n_candidates: int = 24, rng=None, n_startup: int = 20) -> dict:
    """Parzen-density suggestion: split past trials at the gamma loss
    quantile, model each parameter with Gaussian kernel densities over the
    good and bad sets, and return the candidate with the best density ratio.

    Falls back to a uniform draw while fewer than n_startup trials exist or
    when the history is degenerate (all losses identical).
    """
    rng = np.random.default_rng() if rng is None else rng
    trials = history.trials if isinstance(history, Study) else list(history)
    ok = [t for t in trials if t.ok and t.loss is not None]
    if len(ok) < n_startup:
        return space.sample(rng)
    losses = np.array([t.loss for t in ok])
    if np.all(losses == losses[0]):
        logger.debug("degenerate history (all losses equal), uniform draw")
        return space.sample(rng)
    n_good = max(2, math.ceil(gamma * len(ok)))
    order = np.argsort(losses, kind="stable")
    good = [ok[i] for i in order[:n_good]]
    bad = [ok[i] for i in order[n_good:]] or good

    cand = np.empty((n_candidates, len(DIMS)))
    score = np.zeros(n_candidates)
    for j, name in enumerate(DIMS):
        lo, hi = getattr(space, name)
        if name in _LOG_DIMS:
            lo, hi = math.log10(lo), math.log10(hi)
        g = _to_model_space(name, np.array([t.params[name] for t in good]))
        b = _to_model_space(name, np.array([t.params[name] for t in bad]))
        floor = 0.01 * (hi - lo)

        def bandwidth(v):
            if v.size < 2:
                return floor
            s = float(np.std(v, ddof=1))
            return max(s * v.size ** (-0.2), floor)

        bw_g, bw_b = bandwidth(g), bandwidth(b)
        centers = g[rng.integers(0, g.size, n_candidates)]
        draws = np.clip(centers + rng.normal(0.0, bw_g, n_candidates), lo, hi)
        score += _kde_logpdf(draws, g, bw_g) - _kde_logpdf(draws, b, bw_b)
        cand[:, j] = draws
    best = cand[int(np.argmax(score))]
    params = {}
    for j, name in enumerate(DIMS):
        v = 10.0 ** best[j] if name in _LOG_DIMS else float(best[j])
        lo, hi = getattr(space, name)
        if name in _LOW_OPEN and v <= lo:
            v = lo + 1e-12 * (hi - lo)
        params[name] = float(min(max(v, lo), hi))
    return params


def _suggest(study: Study, space, sampler, trial_id, n_startup, gamma,
             n_candidates):
    rng = np.random.default_rng([study.sampler_seed, trial_id])
    if sampler == "random" or len(study.ok_trials()) < n_startup:
        return space.sample(rng)
    return tpe_suggest(study, space, gamma=gamma, n_candidates=n_candidates,
                       rng=rng, n_startup=n_startup)


def run_study(task: str, template: dict | None = None,
              space: SearchSpace | None = None, budget: int = 1,
              seeds: dict | None = None, path=None, width: int = 1,
              sampler: str = "tpe", n_startup: int = 20, gamma: float = 0.25,
              n_candidates: int = 24, record_timing: bool = False,
              task_options: dict | None = None) -> Study:
    """Optimize the five tunables on a benchmark and persist the study.

    template fixes the non-searched reservoir fields (k, beta, M, add_bias).
    seeds: {"sampler", "data", "mask"}. The data seed is held fixed so the
    surrogate sees a noiseless objective. If path exists the study found
    there is continued up to the requested budget (deterministically
    identical to an uninterrupted run).
    """
    if budget < 1:
        raise ConfigurationError(f"budget must be >= 1, got {budget}")
    if sampler not in ("tpe", "random"):
        raise ConfigurationError(f"sampler must be tpe or random, got {sampler!r}")
    if width < 1:
        raise ConfigurationError(f"width must be >= 1, got {width}")
    space = space or SearchSpace()
    seeds = {"sampler": 0, "data": 0, "mask": 0, **(seeds or {})}
    template = {"k": 50, "beta": 1.0, "M": 0.983, "add_bias": False,
                **(template or {})}
    eval_fn = pipeline.make_eval(
        task, k=template["k"], mask_seed=seeds["mask"], beta=template["beta"],
        M=template["M"], add_bias=template["add_bias"], options=task_options)

    def objective(params):
        return eval_fn(params, seeds["data"]).nmse_test

    descriptor = {"task": task, "template": template, "seeds": seeds,
                  "sampler": sampler, "n_startup": n_startup, "gamma": gamma,
                  "n_candidates": n_candidates,
                  "task_options": dict(task_options or {})}
    # canonicalize through JSON so tuples compare equal after a reload
    descriptor = json.loads(_json(descriptor))
    if path is not None and os.path.exists(path):
        study = load_study(path)
        if study.objective != descriptor or study.space != space:
            raise ConfigurationError(
                f"existing study at {path} was run with a different setup")
    else:
        study = Study(space=space, objective=descriptor,
                      sampler_seed=seeds["sampler"])
        if path is not None:
            save_study(study, path)

    while len(study.trials) < budget:
        base = len(study.trials)
        batch = min(width, budget - base)
        suggestions = [
            _suggest(study, space, sampler, base + i, n_startup, gamma,
                     n_candidates) for i in range(batch)]
        if batch == 1:
            results = [_run_objective(objective, suggestions[0], base, base,
                                      record_timing)]
        else:
            with ThreadPoolExecutor(max_workers=batch) as pool:
                results = list(pool.map(
                    lambda iv: _run_objective(objective, iv[1], base + iv[0],
                                              base + iv[0], record_timing),
                    enumerate(suggestions)))
        for t in results:
            study.trials.append(t)
            if path is not None:
                _append_trial(path, t)
    return study


@dataclass(frozen=True)
class SweepRow:
    tau_over_T: float
    d: int
    nmse_mean: float
    nmse_std: float
    repeats: int


def resonance_sweep(task: str, base_params: dict, tau_over_T_grid,
                    repeats: int = 5, template: dict | None = None,
                    seeds: dict | None = None,
                    task_options: dict | None = None) -> list[SweepRow]:
    """NMSE versus delay-to-clock ratio with all other tunables held fixed.

    Each grid value must map to a distinct integer sample delay d
    (collapse duplicates upstream). Statistics are over `repeats` data
    seeds (seeds["data"] + r).
    """
    grid = [float(v) for v in tau_over_T_grid]
    if not grid:
        raise ConfigurationError("tau_over_T grid is empty")
    if repeats < 1:
        raise ConfigurationError(f"repeats must be >= 1, got {repeats}")
    template = {"k": 50, "beta": 1.0, "M": 0.983, "add_bias": False,
                **(template or {})}
    seeds = {"sampler": 0, "data": 0, "mask": 0, **(seeds or {})}
    k = template["k"]
    ds = [int(round(k * v)) for v in grid]
    if len(set(ds)) != len(ds):
        raise ConfigurationError(
            f"grid values collide on the sample grid (d values {ds})")
    eval_fn = pipeline.make_eval(
        task, k=k, mask_seed=seeds["mask"], beta=template["beta"],
        M=template["M"], add_bias=template["add_bias"], options=task_options)
    rows = []
    for v, d in zip(grid, ds):
        params = {**base_params, "tau_over_T": v}
        losses = np.array([
            eval_fn(params, seeds["data"] + r).nmse_test
            for r in range(repeats)])
        rows.append(SweepRow(v, d, float(losses.mean()), float(losses.std()),
                             repeats))
    return rows


def sweep_to_rows(rows):
    """SweepRow list -> plain rows for CSV emission."""
    for r in rows:
        yield [r.tau_over_T, r.d, r.nmse_mean, r.nmse_std, r.repeats]


# -------------------------------------------------------------- persistence

_FORMAT_VERSION = 1


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _trial_record(t: Trial) -> dict:
    return {"record": "trial", "trial_id": t.trial_id, "params": t.params,
            "loss": t.loss, "seed": t.seed, "status": t.status,
            "wall_time": t.wall_time}


def save_study(study: Study, path):
    """Line-delimited persistence: one header record, then one trial per
    line in trial-id order."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(_json({"record": "header", "format_version": _FORMAT_VERSION,
                        "space": study.space.as_dict(),
                        "objective": study.objective,
                        "sampler_seed": study.sampler_seed}) + "\n")
        for t in study.trials:
            fh.write(_json(_trial_record(t)) + "\n")


def _append_trial(path, t: Trial):
    with open(path, "a") as fh:
        fh.write(_json(_trial_record(t)) + "\n")


def load_study(path) -> Study:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ConfigurationError(f"empty study file: {path}")
    head = json.loads(lines[0])
    if head.get("record") != "header":
        raise ConfigurationError(f"{path} does not start with a study header")
    study = Study(space=SearchSpace.from_dict(head["space"]),
                  objective=head["objective"],
                  sampler_seed=head["sampler_seed"])
    for ln in lines[1:]:
        rec = json.loads(ln)
        if rec.get("record") != "trial":
            raise ConfigurationError("unexpected record in study file")
        study.trials.append(Trial(
            trial_id=rec["trial_id"], params=rec["params"], loss=rec["loss"],
            seed=rec["seed"], status=rec["status"],
            wall_time=rec["wall_time"]))
    expected = list(range(len(study.trials)))
    if [t.trial_id for t in study.trials] != expected:
        raise ConfigurationError(f"study file {path} has non-contiguous trial ids")
    return study
