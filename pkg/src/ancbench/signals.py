"""Signal containers, seeded noise, the noise path and a synthetic speech source.

All randomness comes from :class:`NoiseStream`, a thin wrapper over the raw
64-bit output of PCG64. Doubles and Gaussian variates are derived here
rather than through ``numpy.random.Generator`` methods, whose streams are
not guaranteed stable across numpy releases.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

GENERATOR_ID = "pcg64+boxmuller/v1"

DEFAULT_NOISE_LEVEL = 0.35


@dataclass(frozen=True, eq=False)
class Signal:
    """Mono float64 sample buffer with a constant sample rate.

    Samples are stored read-only and contiguous; nominal range is [-1, 1]
    but is not enforced (only finiteness is).
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(data)):
            raise ConfigurationError("signal samples must be finite")
        rate = int(self.sample_rate)
        if rate <= 0 or rate != self.sample_rate:
            raise ConfigurationError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        data.flags.writeable = False
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self):
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    __hash__ = None

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def power(self) -> float:
        """Mean square of the samples (0 for an empty signal)."""
        if len(self) == 0:
            return 0.0
        return float(np.mean(self.samples * self.samples))

    def with_samples(self, samples) -> "Signal":
        return Signal(samples, self.sample_rate)


def check_compatible(a: Signal, b: Signal, what: str = "signals") -> None:
    if len(a) != len(b):
        raise ConfigurationError(f"{what} differ in length ({len(a)} != {len(b)})")
    if a.sample_rate != b.sample_rate:
        raise ConfigurationError(f"{what} differ in sample rate ({a.sample_rate} != {b.sample_rate})")


# ---------------------------------------------------------------------------
# Random streams


class NoiseStream:
    """Reproducible uniform and Gaussian variates from a 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self._bits = np.random.PCG64(self.seed)

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles on [0, 1) with 53 bits of resolution."""
        raw = self._bits.random_raw(n) if n else np.empty(0, dtype=np.uint64)
        return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal variates by the Box-Muller transform."""
        pairs = (n + 1) // 2
        u1 = 1.0 - self.uniform(pairs)  # (0, 1], keeps log finite
        u2 = self.uniform(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]


class NoiseKind(str, enum.Enum):
    WHITE_GAUSSIAN = "white_gaussian"
    UNIFORM_RANDOM = "uniform_random"

    @classmethod
    def parse(cls, value) -> "NoiseKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"white": cls.WHITE_GAUSSIAN, "random": cls.UNIFORM_RANDOM}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown noise kind {value!r} (use white or random)") from None

    @property
    def short(self) -> str:
        return "white" if self is NoiseKind.WHITE_GAUSSIAN else "random"


@dataclass(frozen=True)
class NoiseSpec:
    """Noise source description.

    ``level`` is the RMS amplitude of the raw stream for both kinds, so the
    two kinds are power-matched: Gaussian noise has standard deviation
    ``level`` and uniform noise lives on ``[-a, a]`` with ``a = sqrt(3) * level``.
    The raw stream is what the reference sensor sees.
    """

    kind: NoiseKind = NoiseKind.WHITE_GAUSSIAN
    level: float = DEFAULT_NOISE_LEVEL
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind.parse(self.kind))
        if not (math.isfinite(self.level) and self.level >= 0):
            raise ConfigurationError(f"noise level must be finite and >= 0, got {self.level!r}")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def peak(self) -> float:
        """Half-width ``a`` of the uniform distribution."""
        return math.sqrt(3.0) * self.level


def gen_noise(spec: NoiseSpec, length: int, sample_rate: int) -> Signal:
    """Generate ``length`` i.i.d. samples of the noise described by ``spec``."""
    if length < 0:
        raise ConfigurationError("length must be >= 0")
    stream = NoiseStream(spec.seed)
    if spec.kind is NoiseKind.WHITE_GAUSSIAN:
        samples = spec.level * stream.normal(length)
    else:
        samples = spec.peak * (2.0 * stream.uniform(length) - 1.0)
    return Signal(samples, sample_rate)


def mix_at_snr(clean: Signal, noise: Signal, target_snr_db: float) -> tuple[Signal, Signal]:
    """Scale ``noise`` so that ``10 log10(P_clean / P_noise) == target_snr_db``
    and add it to ``clean``.

    ``math.inf`` means no noise: the scaled noise is all zeros and the
    corrupted signal equals ``clean``. Returns ``(corrupted, scaled_noise)``.
    """
    check_compatible(clean, noise, "clean and noise")
    p_clean = clean.power()
    if not p_clean > 0:
        raise ConfigurationError("clean signal has zero power")
    if math.isnan(target_snr_db) or target_snr_db == -math.inf:
        raise ConfigurationError(f"invalid target SNR {target_snr_db!r}")
    if target_snr_db == math.inf:
        return clean, noise.with_samples(np.zeros(len(noise)))
    p_noise = noise.power()
    if not p_noise > 0:
        raise ConfigurationError("noise has zero power; cannot reach a finite target SNR")
    scale = math.sqrt(p_clean / (p_noise * 10.0 ** (target_snr_db / 10.0)))
    scaled = noise.samples * scale
    return clean.with_samples(clean.samples + scaled), noise.with_samples(scaled)


# ---------------------------------------------------------------------------
# Noise path


def _unit_energy(h):
    h = np.asarray(h, dtype=np.float64)
    return h / np.sqrt(np.sum(h * h))


def _echo_path():
    h = np.zeros(13)
    h[[0, 6, 12]] = (1.0, 0.8, 0.7)
    return _unit_energy(h)


CHANNEL_PRESETS = {
    "identity": lambda: np.array([1.0]),
    "lowpass3": lambda: _unit_energy([1.0, 2.0, 1.0]),
    # direct path plus two reflections, 0.75 ms and 1.5 ms late at 8 kHz
    "echo": _echo_path,
}


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """FIR noise path from the reference noise to the primary input."""

    impulse_response: np.ndarray = field(default_factory=lambda: np.array([1.0]))
    name: str = ""

    def __post_init__(self):
        h = np.array(self.impulse_response, dtype=np.float64).reshape(-1)
        if h.size == 0:
            raise ConfigurationError("channel impulse response must be non-empty")
        if not np.all(np.isfinite(h)):
            raise ConfigurationError("channel impulse response must be finite")
        h.flags.writeable = False
        object.__setattr__(self, "impulse_response", h)

    def __eq__(self, other):
        if not isinstance(other, ChannelSpec):
            return NotImplemented
        return np.array_equal(self.impulse_response, other.impulse_response)

    __hash__ = None

    @classmethod
    def preset(cls, name: str) -> "ChannelSpec":
        try:
            return cls(CHANNEL_PRESETS[name](), name=name)
        except KeyError:
            raise ConfigurationError(
                f"unknown channel preset {name!r} (choose from {', '.join(CHANNEL_PRESETS)})"
            ) from None

    @classmethod
    def identity(cls) -> "ChannelSpec":
        return cls.preset("identity")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return "fir:" + ",".join(repr(float(c)) for c in self.impulse_response)


def apply_channel(noise: Signal, channel: ChannelSpec) -> Signal:
    """Linear convolution with zero initial state, truncated to the input length."""
    n = len(noise)
    if n == 0:
        return noise
    out = np.convolve(noise.samples, channel.impulse_response)[:n]
    return noise.with_samples(out)


# ---------------------------------------------------------------------------
# Synthetic speech


def synth_speech(duration_s: float, sample_rate: int = 8000, seed: int = 42) -> Signal:
    """Deterministic speech-like test signal.

    Alternates voiced segments (3-5 harmonics of a gliding pitch with
    syllabic amplitude modulation), unvoiced segments (smoothed noise) and
    silence gaps. The result is peak-normalised to 0.9.
    """
    if not (duration_s > 0 and math.isfinite(duration_s)):
        raise ConfigurationError(f"duration must be > 0, got {duration_s!r}")
    if sample_rate <= 0:
        raise ConfigurationError("sample_rate must be positive")
    length = max(1, int(round(duration_s * sample_rate)))
    rng = NoiseStream(seed)
    out = np.zeros(length)

    def draw(lo, hi):
        return lo + (hi - lo) * float(rng.uniform(1)[0])

    pos = 0
    voiced_next = True
    while pos < length:
        seg = max(1, int(draw(0.08, 0.25) * sample_rate))
        n = min(seg, length - pos)
        t = np.arange(n) / sample_rate
        env = np.sin(np.pi * (np.arange(n) + 0.5) / n)
        if voiced_next:
            f0 = draw(95.0, 220.0)
            glide = draw(-0.15, 0.15)
            phase = 2 * np.pi * np.cumsum(f0 * (1.0 + glide * t / max(t[-1], 1e-9))) / sample_rate
            n_harm = 3 + int(draw(0.0, 3.0))
            voiced = np.zeros(n)
            for h in range(1, n_harm + 1):
                voiced += (0.7 ** (h - 1)) * np.sin(h * phase + draw(0.0, 2 * np.pi))
            am = 1.0 + 0.5 * np.sin(2 * np.pi * draw(3.0, 8.0) * t + draw(0.0, 2 * np.pi))
            out[pos : pos + n] = env * am * voiced
            kind = draw(0.0, 1.0)
            voiced_next = kind < 0.4
        else:
            kind = draw(0.0, 1.0)
            if kind < 0.5:
                hiss = rng.normal(n)
                hiss = np.diff(hiss, prepend=0.0)  # tilt energy upwards like fricatives
                out[pos : pos + n] = 0.25 * env * hiss
            # else: silence gap
            voiced_next = True
        pos += n

    peak = np.max(np.abs(out))
    if peak == 0:  # pragma: no cover - first segment is always voiced
        raise ConfigurationError("synthesised signal is silent")
    return Signal(out * (0.9 / peak), sample_rate)
