"""Output-quality metrics comparing the clean signal with a denoised estimate."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateMetricError
from .signals import Signal


def _pair(clean, estimate, min_len=1):
    a = clean.samples if isinstance(clean, Signal) else np.asarray(clean, dtype=np.float64)
    b = estimate.samples if isinstance(estimate, Signal) else np.asarray(estimate, dtype=np.float64)
    if a.shape != b.shape:
        raise ConfigurationError(f"length mismatch ({a.shape[0]} != {b.shape[0]})")
    if a.shape[0] < min_len:
        raise ConfigurationError(f"need at least {min_len} samples")
    return a, b


def mse(clean, estimate) -> float:
    """Mean squared error."""
    a, b = _pair(clean, estimate)
    diff = a - b
    return float(diff @ diff / diff.shape[0])


def snr_db(clean, estimate) -> float:
    """``10 log10(sum clean^2 / sum (clean - estimate)^2)`` in dB.

    Returns ``math.inf`` when the residual is exactly zero.
    """
    a, b = _pair(clean, estimate)
    signal_energy = float(a @ a)
    if signal_energy == 0:
        raise ConfigurationError("clean signal has zero power")
    diff = a - b
    residual = float(diff @ diff)
    if residual == 0:
        return math.inf
    return 10.0 * math.log10(signal_energy / residual)


def correlation(clean, estimate) -> float:
    """Pearson correlation coefficient, clipped to [-1, 1] against rounding."""
    a, b = _pair(clean, estimate, min_len=2)
    a = a - a.mean()
    b = b - b.mean()
    va = float(a @ a)
    vb = float(b @ b)
    if va == 0 or vb == 0:
        raise DegenerateMetricError("correlation undefined for a zero-variance signal")
    r = float(a @ b) / math.sqrt(va * vb)
    return max(-1.0, min(1.0, r))


@dataclass
class AncReport:
    """Metric triple for one run plus the configuration that produced it.

    A run that diverged has ``diverged_at`` set and NaN metrics; a metric
    that is undefined for the output is NaN and named in ``degenerate``.
    """

    snr_db: float
    correlation: float
    mse: float
    algorithm: str = ""
    order: int = 0
    step_size: float = float("nan")
    noise_kind: str = ""
    seed: int = 0
    forgetting: float | None = None
    input_snr_db: float = float("nan")
    noise_level: float = float("nan")
    channel: str = "identity"
    source: str = ""
    diverged_at: int | None = None
    degenerate: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.diverged_at is None

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(clean: Signal, estimate: Signal, **config) -> AncReport:
    """Compute all three metrics; degenerate ones become NaN and are flagged."""
    degenerate = []
    values = {}
    for name, fn in (("snr_db", snr_db), ("correlation", correlation), ("mse", mse)):
        try:
            values[name] = fn(clean, estimate)
        except DegenerateMetricError:
            values[name] = float("nan")
            degenerate.append(name)
    return AncReport(**values, degenerate=degenerate, **config)
