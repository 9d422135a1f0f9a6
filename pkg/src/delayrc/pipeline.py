"""End-to-end evaluation: data generation, reservoir run, ridge training
and scoring. Everything downstream (CLI, hyperparameter search, sweeps)
funnels through evaluate_series so train/test bookkeeping lives in exactly
one place."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import tasks
from .exceptions import ConfigurationError
from .readout import classify_sequences, nmse, nrmse, predict, train_ridge
from .reservoir import ReservoirConfig, make_input_mask, run_reservoir
from .tasks import LabeledSeries, Split, SplitPart

__all__ = [
    "EvalResult", "evaluate_series", "split_from_tags", "make_eval",
    "TASK_IDS",
]

TASK_IDS = ("sine_square", "narma10", "vowels")


@dataclass
class EvalResult:
    nmse_train: float
    nmse_test: float
    nrmse_test: float
    wer: float | None
    weights: object
    y_hat: np.ndarray
    series: LabeledSeries
    split: Split
    cfg: ReservoirConfig


def _scoring_mask(side: SplitPart, series: LabeledSeries, washout: int):
    """Drop the first `washout` steps of every segment (or of every
    contiguous block when there are no segments): those steps still carry
    state from the previous span and have ambiguous targets."""
    m = side.steps.copy()
    if washout <= 0:
        return m
    if series.segments:
        for a, b, _ in series.segments:
            m[a:min(a + washout, b)] = False
    else:
        starts = np.flatnonzero(m & ~np.concatenate(([False], m[:-1])))
        for s in starts:
            m[s:s + washout] = False
    return m


def evaluate_series(series: LabeledSeries, cfg: ReservoirConfig, lam: float,
                    split: Split, part_washout: int = 0,
                    add_bias: bool = False) -> EvalResult:
    """Run the reservoir over the whole stream, fit on the train side,
    score both sides.

    The reservoir is run with washout_cycles forced to 0 so state columns
    stay aligned one-to-one with series steps; transient suppression is the
    per-part washout applied to the scoring masks instead.
    """
    cfg0 = replace(cfg, washout_cycles=0)
    mask = make_input_mask(cfg0.k, cfg0.mask_seed)
    X = run_reservoir(series.u, cfg0, mask).entries
    tr = _scoring_mask(split.train, series, part_washout)
    te = _scoring_mask(split.test, series, part_washout)
    if not tr.any() or not te.any():
        raise ConfigurationError("washout removed all scoring steps on one side")
    w = train_ridge(X[:, tr], series.y[:, tr], lam, add_bias=add_bias)
    y_hat = predict(w, X)
    wer = None
    if series.y.shape[0] >= 2 and split.test.segments:
        spans = [(min(a + part_washout, b - 1), b, c)
                 for a, b, c in split.test.segments]
        _, wer = classify_sequences(y_hat, spans)
    return EvalResult(
        nmse_train=nmse(series.y[:, tr], y_hat[:, tr]),
        nmse_test=nmse(series.y[:, te], y_hat[:, te]),
        nrmse_test=nrmse(series.y[:, te], y_hat[:, te]),
        wer=wer, weights=w, y_hat=y_hat, series=series, split=split, cfg=cfg0)


def split_from_tags(series: LabeledSeries) -> Split:
    """Split segments by the train/test tags recorded at encoding time."""
    tags = series.meta.get("splits")
    if not tags or not series.segments:
        raise ConfigurationError("series carries no split tags")
    n = series.n_steps
    tr_mask = np.zeros(n, dtype=bool)
    tr_segs, te_segs = [], []
    for tag, seg in zip(tags, series.segments):
        if tag == "train":
            tr_mask[seg[0]:seg[1]] = True
            tr_segs.append(seg)
        else:
            te_segs.append(seg)
    if not tr_segs or not te_segs:
        raise ConfigurationError("split tags put every sequence on one side")
    return Split(SplitPart(steps=tr_mask, segments=tuple(tr_segs)),
                 SplitPart(steps=~tr_mask, segments=tuple(te_segs)))


# defaults for each benchmark; overridable through task options
_SS_DEFAULTS = dict(n_waveforms=20, samples_per_period=(3, 5),
                    periods_per_waveform=128, fraction=0.5, washout=10)
_NARMA_DEFAULTS = dict(length=8000, fraction=0.5, washout=100)
_VOWEL_DEFAULTS = dict(washout=12, n_per_class=40, synthetic_seed=0, path=None)


def make_eval(task: str, k: int = 50, mask_seed: int = 0, beta: float = 1.0,
              M: float = 0.983, add_bias: bool = False, options: dict | None = None):
    """Build eval_fn(params, data_seed) -> EvalResult for a benchmark id.

    params carries the five tunables: rho, G, Phi0, tau_over_T, lam.
    Vowel data (real file or synthetic) is prepared once at closure
    creation, not per call.
    """
    if task not in TASK_IDS:
        raise ConfigurationError(f"unknown task {task!r}, expected one of {TASK_IDS}")
    opt = dict(options or {})

    def build_cfg(params):
        return ReservoirConfig.from_ratio(
            k=k, rho=params["rho"], G=params["G"], Phi0=params["Phi0"],
            tau_over_T=params["tau_over_T"], beta=beta, M=M,
            washout_cycles=0, mask_seed=mask_seed)

    if task == "sine_square":
        o = {**_SS_DEFAULTS, **opt}

        def eval_fn(params, data_seed):
            series = tasks.gen_sine_square(
                o["n_waveforms"], o["samples_per_period"],
                o["periods_per_waveform"], seed=data_seed)
            split = tasks.split_train_test(series, o["fraction"],
                                           seed=data_seed, unit="segment")
            return evaluate_series(series, build_cfg(params), params["lam"],
                                   split, part_washout=o["washout"],
                                   add_bias=add_bias)
        return eval_fn

    if task == "narma10":
        o = {**_NARMA_DEFAULTS, **opt}

        def eval_fn(params, data_seed):
            series = tasks.gen_narma10(o["length"], seed=data_seed)
            split = tasks.split_train_test(series, o["fraction"],
                                           seed=data_seed, unit="step-block")
            return evaluate_series(series, build_cfg(params), params["lam"],
                                   split, part_washout=o["washout"],
                                   add_bias=add_bias)
        return eval_fn

    o = {**_VOWEL_DEFAULTS, **opt}
    if o["path"]:
        samples = tasks.load_japanese_vowels(o["path"])
    else:
        samples = tasks.gen_synthetic_vowels(o["n_per_class"],
                                             seed=o["synthetic_seed"])
    series = tasks.encode_multiplexed(samples, tasks.N_VOWEL_SPEAKERS)
    split = split_from_tags(series)

    def eval_fn(params, data_seed):
        # data_seed is ignored: the utterance set is fixed
        return evaluate_series(series, build_cfg(params), params["lam"],
                               split, part_washout=o["washout"],
                               add_bias=add_bias)
    return eval_fn
