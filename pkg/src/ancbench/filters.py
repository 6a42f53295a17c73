"""LMS, NLMS and RLS adaptive filters for two-input noise cancellation.

Each filter is a single-sample state machine: a tap line holding the most
recent ``order`` reference samples (newest first), a weight vector that
starts at zero, and algorithm-specific state. Every sample is processed in
the fixed order push -> output -> error -> update.

The module-level functions (:func:`filter_output`, :func:`lms_update`, ...)
are the per-equation building blocks and never mutate their inputs. The
filter classes run whole blocks through the block kernels selected in
:mod:`ancbench._backend`; :meth:`AdaptiveFilter.process_sample` is the same
kernel on a one-sample block, so folding it over a signal reproduces
:meth:`AdaptiveFilter.process_block` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import _backend
from .errors import ConfigurationError, DivergenceError, NumericalBreakdownError, UndefinedBoundError
from .signals import Signal, check_compatible

WeightVector = np.ndarray

DEFAULT_FORGETTING = 0.999
DEFAULT_INIT_SCALE = 100.0
DEFAULT_REGULARIZER = 1e-8

ALGORITHMS = ("lms", "nlms", "rls")


def _check_order(order) -> int:
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise ConfigurationError(f"order must be a positive integer, got {order!r}")
    return int(order)


class TapLine:
    """Fixed-length delay line of reference samples, newest first.

    Taps not yet filled are zero.
    """

    __slots__ = ("taps",)

    def __init__(self, length: int):
        self.taps = np.zeros(_check_order(length))

    @classmethod
    def from_values(cls, values) -> "TapLine":
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        line = cls(len(values))
        line.taps[:] = values
        return line

    @property
    def length(self) -> int:
        return self.taps.shape[0]

    def __len__(self):
        return self.length

    def push(self, sample: float) -> None:
        self.taps[1:] = self.taps[:-1]
        self.taps[0] = sample

    def clear(self) -> None:
        self.taps[:] = 0.0

    def __repr__(self):
        return f"TapLine({self.taps.tolist()!r})"


def _taps(taps) -> np.ndarray:
    return taps.taps if isinstance(taps, TapLine) else np.asarray(taps, dtype=np.float64)


# ---------------------------------------------------------------------------
# Configs


@dataclass(frozen=True)
class LmsConfig:
    step_size: float
    order: int

    def __post_init__(self):
        _check_order(self.order)
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ConfigurationError(
                f"LMS step size must be > 0, got {self.step_size!r} "
                "(stable choices satisfy mu <= 1/lambda_max, see lms_step_bound)"
            )


@dataclass(frozen=True)
class NlmsConfig:
    step_size: float
    order: int
    regularizer: float = DEFAULT_REGULARIZER

    def __post_init__(self):
        _check_order(self.order)
        if not (0.0 < self.step_size < 2.0):
            raise ConfigurationError(f"NLMS step size must lie in the open range (0, 2), got {self.step_size!r}")
        if not (math.isfinite(self.regularizer) and self.regularizer >= 0):
            raise ConfigurationError(f"NLMS regularizer must be >= 0, got {self.regularizer!r}")


@dataclass(frozen=True)
class RlsConfig:
    order: int
    forgetting: float = DEFAULT_FORGETTING
    init_scale: float = DEFAULT_INIT_SCALE

    def __post_init__(self):
        _check_order(self.order)
        if not (0.0 < self.forgetting <= 1.0):
            raise ConfigurationError(f"RLS forgetting factor must lie in (0, 1], got {self.forgetting!r}")
        if not (math.isfinite(self.init_scale) and self.init_scale > 0):
            raise ConfigurationError(f"RLS init scale must be > 0, got {self.init_scale!r}")


@dataclass
class RlsState:
    """Inverse correlation matrix, last gain vector and RLS constants."""

    inv_corr: np.ndarray
    gain: np.ndarray
    forgetting: float = DEFAULT_FORGETTING
    init_scale: float = DEFAULT_INIT_SCALE

    @classmethod
    def initial(cls, order, forgetting=DEFAULT_FORGETTING, init_scale=DEFAULT_INIT_SCALE) -> "RlsState":
        cfg = RlsConfig(order, forgetting, init_scale)
        return cls(
            inv_corr=np.eye(cfg.order) * cfg.init_scale,
            gain=np.zeros(cfg.order),
            forgetting=cfg.forgetting,
            init_scale=cfg.init_scale,
        )

    @property
    def order(self) -> int:
        return self.gain.shape[0]

    def reset(self) -> None:
        """Restore ``inv_corr = init_scale * I`` (recovery after breakdown)."""
        self.inv_corr = np.eye(self.order) * self.init_scale
        self.gain = np.zeros(self.order)

    def copy(self) -> "RlsState":
        return RlsState(self.inv_corr.copy(), self.gain.copy(), self.forgetting, self.init_scale)

    def asymmetry(self) -> float:
        """``||P - P^T||_inf / ||P||_inf``."""
        p = self.inv_corr
        norm = np.max(np.sum(np.abs(p), axis=1))
        return float(np.max(np.sum(np.abs(p - p.T), axis=1)) / norm) if norm else 0.0


class FilterStep(NamedTuple):
    output: float
    error: float


# ---------------------------------------------------------------------------
# Per-equation operations


def filter_output(taps, w) -> float:
    """Noise estimate ``y = u^T w``."""
    u = _taps(taps)
    w = np.asarray(w, dtype=np.float64)
    if u.shape != w.shape:
        raise ConfigurationError(f"tap line length {u.shape[0]} does not match {w.shape[0]} weights")
    return float(u @ w)


def _check_update_inputs(w, u, error):
    if u.shape != w.shape:
        raise ConfigurationError(f"tap line length {u.shape[0]} does not match {w.shape[0]} weights")
    if not (math.isfinite(error) and np.all(np.isfinite(u)) and np.all(np.isfinite(w))):
        raise DivergenceError(0)


def lms_update(w, taps, error: float, cfg: LmsConfig) -> WeightVector:
    """``w + mu * e * u``."""
    u = _taps(taps)
    w = np.asarray(w, dtype=np.float64)
    _check_update_inputs(w, u, error)
    return w + cfg.step_size * error * u


def nlms_update(w, taps, error: float, cfg: NlmsConfig) -> WeightVector:
    """``w + mu * e * u / (||u||^2 + eps)``."""
    u = _taps(taps)
    w = np.asarray(w, dtype=np.float64)
    _check_update_inputs(w, u, error)
    return w + cfg.step_size * error * u / (u @ u + cfg.regularizer)


def rls_gain(state: RlsState, taps) -> np.ndarray:
    """``k = P u / (m + u^T P u)``; also stored as ``state.gain``."""
    u = _taps(taps)
    p = state.inv_corr
    if p.shape != (u.shape[0], u.shape[0]):
        raise ConfigurationError(f"inverse correlation matrix {p.shape} does not match {u.shape[0]} taps")
    pu = p @ u
    den = state.forgetting + u @ pu
    if not (den > 0 and math.isfinite(den)):
        raise NumericalBreakdownError(0)
    state.gain = pu / den
    return state.gain


def rls_update(state: RlsState, w, taps, error: float) -> tuple[WeightVector, RlsState]:
    """Apply ``w + e k`` and the Riccati step ``P <- (P - k u^T P) / m``.

    ``state.gain`` must come from :func:`rls_gain` on the same taps. Returns
    the new weights and a new state; the inputs are left untouched.
    """
    u = _taps(taps)
    w = np.asarray(w, dtype=np.float64)
    _check_update_inputs(w, u, error)
    k = state.gain
    p = state.inv_corr
    p_new = (p - np.outer(k, u @ p)) / state.forgetting
    p_new = (p_new + p_new.T) / 2.0
    if not np.all(np.isfinite(p_new)):
        raise NumericalBreakdownError(0)
    return w + error * k, RlsState(p_new, k.copy(), state.forgetting, state.init_scale)


# ---------------------------------------------------------------------------
# Stateful filters


class BlockResult(NamedTuple):
    error: Signal
    snapshots: dict
    output: Signal


class AdaptiveFilter:
    """Shared machinery; subclasses provide ``_kernel`` and state."""

    algorithm = ""

    def __init__(self, order: int):
        self.order = _check_order(order)
        self.tapline = TapLine(self.order)
        self.weights = np.zeros(self.order)
        self.samples_seen = 0

    @property
    def taps(self) -> np.ndarray:
        return self.tapline.taps

    def reset(self) -> None:
        self.tapline.clear()
        self.weights = np.zeros(self.order)
        self.samples_seen = 0

    def _kernel(self, d, r, out_y, out_e):
        raise NotImplementedError

    def _run(self, d: np.ndarray, r: np.ndarray, out_y: np.ndarray, out_e: np.ndarray) -> None:
        status, where = self._kernel(d, r, out_y, out_e)
        if status:
            index = self.samples_seen + where
            self.samples_seen += where + 1
            if status == 2:
                raise NumericalBreakdownError(index, self.algorithm)
            raise DivergenceError(index, self.algorithm)
        self.samples_seen += d.shape[0]

    def process_sample(self, desired: float, reference: float) -> FilterStep:
        d = np.array([desired], dtype=np.float64)
        r = np.array([reference], dtype=np.float64)
        y = np.empty(1)
        e = np.empty(1)
        self._run(d, r, y, e)
        return FilterStep(float(y[0]), float(e[0]))

    def process_block(self, desired: Signal, reference: Signal, snapshot_at: Iterable[int] = ()) -> BlockResult:
        """Run a whole block; the error signal is the denoised estimate.

        ``snapshot_at`` lists block-relative indices ``i`` at which to record
        the weights after sample ``i`` has been processed.
        """
        check_compatible(desired, reference, "desired and reference")
        n = len(desired)
        d = desired.samples
        r = reference.samples
        out_y = np.empty(n)
        out_e = np.empty(n)
        marks = sorted({int(i) for i in snapshot_at})
        if marks and (marks[0] < 0 or marks[-1] >= n):
            raise ConfigurationError(f"snapshot indices must lie in [0, {n})")
        snapshots = {}
        start = 0
        for stop in [i + 1 for i in marks] + [n]:
            if stop > start:
                self._run(d[start:stop], r[start:stop], out_y[start:stop], out_e[start:stop])
            if stop - 1 in marks and (stop - 1) not in snapshots:
                snapshots[stop - 1] = self.weights.copy()
            start = stop
        return BlockResult(desired.with_samples(out_e), snapshots, desired.with_samples(out_y))


class LmsFilter(AdaptiveFilter):
    algorithm = "lms"

    def __init__(self, config: LmsConfig):
        super().__init__(config.order)
        self.config = config

    def _kernel(self, d, r, out_y, out_e):
        return _backend.kernels.lms_block(d, r, self.weights, self.taps, self.config.step_size, out_y, out_e)


class NlmsFilter(AdaptiveFilter):
    algorithm = "nlms"

    def __init__(self, config: NlmsConfig):
        super().__init__(config.order)
        self.config = config

    def _kernel(self, d, r, out_y, out_e):
        cfg = self.config
        return _backend.kernels.nlms_block(d, r, self.weights, self.taps, cfg.step_size, cfg.regularizer, out_y, out_e)


class RlsFilter(AdaptiveFilter):
    algorithm = "rls"

    def __init__(self, config: RlsConfig):
        super().__init__(config.order)
        self.config = config
        self.state = RlsState.initial(config.order, config.forgetting, config.init_scale)

    def reset(self) -> None:
        super().reset()
        self.state.reset()

    def _kernel(self, d, r, out_y, out_e):
        s = self.state
        return _backend.kernels.rls_block(d, r, self.weights, self.taps, s.inv_corr, s.gain, s.forgetting, out_y, out_e)


def make_filter(
    algorithm: str,
    order: int,
    step_size: float | None = None,
    *,
    forgetting: float = DEFAULT_FORGETTING,
    init_scale: float = DEFAULT_INIT_SCALE,
    regularizer: float = DEFAULT_REGULARIZER,
) -> AdaptiveFilter:
    """Build a fresh filter by name. ``step_size`` is ignored for RLS."""
    algorithm = str(algorithm).lower()
    if algorithm == "lms":
        return LmsFilter(LmsConfig(step_size, order))
    if algorithm == "nlms":
        return NlmsFilter(NlmsConfig(step_size, order, regularizer))
    if algorithm == "rls":
        return RlsFilter(RlsConfig(order, forgetting, init_scale))
    raise ConfigurationError(f"unknown algorithm {algorithm!r} (choose from {', '.join(ALGORITHMS)})")


def process_sample(filt: AdaptiveFilter, desired: float, reference: float) -> FilterStep:
    return filt.process_sample(desired, reference)


def process_block(filt: AdaptiveFilter, desired: Signal, reference: Signal, snapshot_at=()) -> BlockResult:
    return filt.process_block(desired, reference, snapshot_at)


# ---------------------------------------------------------------------------
# Step-size bound


def autocorrelation_matrix(reference: Signal, order: int) -> np.ndarray:
    """Toeplitz matrix of the biased sample autocorrelation, lags 0..order-1."""
    x = reference.samples if isinstance(reference, Signal) else np.asarray(reference, dtype=np.float64)
    order = _check_order(order)
    n = x.shape[0]
    r = np.zeros(order)
    for lag in range(min(order, n)):
        r[lag] = x[: n - lag] @ x[lag:] / n
    idx = np.abs(np.arange(order)[:, None] - np.arange(order)[None, :])
    return r[idx]


def power_iteration(matrix: np.ndarray, rtol: float = 1e-8, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of a symmetric PSD matrix via power iteration.

    Stops when the Rayleigh quotient changes by less than ``rtol`` relative.
    """
    n = matrix.shape[0]
    v = np.ones(n) + np.linspace(0.0, 0.5, n)  # fixed start, not orthogonal to a positive Perron vector
    v /= np.linalg.norm(v)
    lam = float(v @ matrix @ v)
    for _ in range(max_iter):
        mv = matrix @ v
        norm = np.linalg.norm(mv)
        if norm == 0:
            return 0.0
        v = mv / norm
        new = float(v @ matrix @ v)
        if abs(new - lam) <= rtol * abs(new):
            return new
        lam = new
    return lam


def lms_step_bound(reference: Signal, order: int) -> float:
    """``1 / lambda_max`` of the reference autocorrelation matrix."""
    if len(reference) == 0:
        raise ConfigurationError("reference must be non-empty")
    lam = power_iteration(autocorrelation_matrix(reference, order))
    if not lam > 0:
        raise UndefinedBoundError("reference has zero power; LMS step bound is undefined")
    return 1.0 / lam
