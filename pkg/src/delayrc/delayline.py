"""Sample-clocked FIR filter standing in for the programmable delayed
feedback path, plus pure-delay construction helpers."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError

__all__ = ["FirConfig", "fir_apply", "make_pure_delay", "delay_time"]


@dataclass(frozen=True)
class FirConfig:
    """taps h_0..h_{L-1} applied at a fixed sample rate.

    latency_samples models extra pipeline delay ahead of the filter; it
    shifts the output without touching the coefficients.
    """

    taps: tuple
    rate: float
    latency_samples: int = 0

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(float(t) for t in self.taps))
        if len(self.taps) < 1:
            raise ConfigurationError("FIR needs at least one tap")
        if not self.rate > 0:
            raise ConfigurationError(f"rate must be positive, got {self.rate}")
        if self.latency_samples < 0:
            raise ConfigurationError(
                f"latency_samples must be nonnegative, got {self.latency_samples}")

    @property
    def order(self) -> int:
        return len(self.taps)

    @property
    def is_pure_delay(self) -> bool:
        # delay-only means a single unit tap at the end and >= 1 sample of lag
        nz = [i for i, t in enumerate(self.taps) if t != 0.0]
        return self.order >= 2 and nz == [self.order - 1] and self.taps[-1] == 1.0


def fir_apply(x, cfg: FirConfig) -> np.ndarray:
    """y[m] = sum_l h_l x[m - l - latency], zero history before the stream.

    Output length equals input length; the convolution tail is dropped.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ConfigurationError("input must be nonempty")
    y = np.convolve(x, np.asarray(cfg.taps))[:x.size]
    if cfg.latency_samples:
        lat = cfg.latency_samples
        y = np.concatenate([np.zeros(min(lat, x.size)), y[:max(x.size - lat, 0)]])
    return y


def make_pure_delay(L: int, rate: float) -> FirConfig:
    """Delay-only filter: all taps zero but the last, giving (L-1)/rate."""
    if L < 2:
        raise ConfigurationError(f"pure delay needs L >= 2, got {L}")
    taps = [0.0] * L
    taps[-1] = 1.0
    return FirConfig(taps=tuple(taps), rate=rate)


def delay_time(cfg: FirConfig) -> float:
    """Total delay in seconds of a pure-delay config, latency included."""
    if not cfg.is_pure_delay:
        raise ConfigurationError("delay_time is only defined for pure-delay configs")
    return (cfg.order - 1) / cfg.rate + cfg.latency_samples / cfg.rate
