"""End-to-end noise-cancellation runs and parameter sweeps.

A run corrupts a clean signal and cancels the noise with one adaptive
filter::

    raw noise  --------------------------------------> reference n0
         |
    mix_at_snr (scale to input SNR) -> channel -> + -> primary d = x + N
                                                  ^
    clean x ---------------------------------------+

The reference sensor sees the raw noise stream at its generator level; the
primary input receives the same realization scaled to the requested input
SNR and shaped by the noise path. The filter's error output is the denoised
estimate that gets scored against ``x``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .filters import (
    ALGORITHMS,
    DEFAULT_FORGETTING,
    DEFAULT_INIT_SCALE,
    DEFAULT_REGULARIZER,
    AdaptiveFilter,
    make_filter,
)
from .metrics import AncReport, evaluate
from .signals import (
    DEFAULT_NOISE_LEVEL,
    ChannelSpec,
    NoiseKind,
    NoiseSpec,
    Signal,
    apply_channel,
    gen_noise,
    mix_at_snr,
    synth_speech,
)

DEFAULT_ORDERS = (5, 10, 15)
DEFAULT_STEP_SIZES = (0.05, 0.10, 0.15)
TABLE_ALGORITHMS = ("nlms", "lms", "rls")
NOISE_KINDS = (NoiseKind.WHITE_GAUSSIAN, NoiseKind.UNIFORM_RANDOM)

STANDARD_SEED = 42
STANDARD_RATE = 8000
STANDARD_DURATION = 2.0
STANDARD_INPUT_SNR_DB = 5.0
STANDARD_CHANNEL = "echo"


@dataclass(frozen=True)
class SourceSpec:
    """Where the clean signal comes from: a WAV file or the synthesiser."""

    wav: str | None = None
    synth_seed: int = STANDARD_SEED
    duration_s: float = STANDARD_DURATION
    sample_rate: int = STANDARD_RATE

    def load(self) -> Signal:
        if self.wav is not None:
            from .wav import wav_read

            return wav_read(self.wav)
        return synth_speech(self.duration_s, self.sample_rate, self.synth_seed)

    @property
    def label(self) -> str:
        if self.wav is not None:
            return f"wav:{self.wav}"
        return f"synth:{self.synth_seed}@{self.sample_rate}Hz/{self.duration_s:g}s"


def standard_fixture() -> Signal:
    """The reference clean signal: synthetic speech, seed 42, 2 s at 8 kHz."""
    return synth_speech(STANDARD_DURATION, STANDARD_RATE, STANDARD_SEED)


@dataclass(frozen=True)
class RunConfig:
    """One noise-cancellation run.

    ``step_size`` drives LMS/NLMS; RLS uses ``forgetting`` instead and only
    echoes ``step_size`` (it is the table row the run belongs to).
    """

    algorithm: str = "nlms"
    order: int = 15
    step_size: float = 0.05
    forgetting: float = DEFAULT_FORGETTING
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec.identity)
    input_snr_db: float = STANDARD_INPUT_SNR_DB
    source: SourceSpec = field(default_factory=SourceSpec)
    init_scale: float = DEFAULT_INIT_SCALE
    regularizer: float = DEFAULT_REGULARIZER

    def __post_init__(self):
        object.__setattr__(self, "algorithm", str(self.algorithm).lower())
        if math.isnan(self.input_snr_db) or self.input_snr_db == -math.inf:
            raise ConfigurationError(f"invalid input SNR {self.input_snr_db!r}")
        self.make_filter()  # validates parameters

    def make_filter(self) -> AdaptiveFilter:
        return make_filter(
            self.algorithm,
            self.order,
            self.step_size,
            forgetting=self.forgetting,
            init_scale=self.init_scale,
            regularizer=self.regularizer,
        )

    def echo(self) -> dict:
        return dict(
            algorithm=self.algorithm,
            order=self.order,
            step_size=self.step_size,
            noise_kind=self.noise.kind.short,
            seed=self.noise.seed,
            forgetting=self.forgetting if self.algorithm == "rls" else None,
            input_snr_db=self.input_snr_db,
            noise_level=self.noise.level,
            channel=self.channel.label,
            source=self.source.label,
        )


class AncSignals(NamedTuple):
    clean: Signal
    primary: Signal
    reference: Signal


def build_inputs(config: RunConfig, clean: Signal) -> AncSignals:
    """Primary and reference inputs for ``config`` around ``clean``.

    An infinite input SNR switches the noise source off: both the corruption
    and the reference are zero.
    """
    if math.isinf(config.input_snr_db):
        raw = clean.with_samples(np.zeros(len(clean)))
    else:
        raw = gen_noise(config.noise, len(clean), clean.sample_rate)
    _, scaled = mix_at_snr(clean, raw, config.input_snr_db)
    path_noise = apply_channel(scaled, config.channel)
    primary = clean.with_samples(clean.samples + path_noise.samples)
    return AncSignals(clean, primary, raw)


def run_anc(config: RunConfig, *, clean: Signal | None = None, return_signal: bool = False):
    """Run one ANC experiment and score it.

    Returns an :class:`AncReport`, or ``(report, denoised)`` when
    ``return_signal`` is true. Divergence is reported, not raised:
    ``report.diverged_at`` holds the sample index and the metrics are NaN
    (``denoised`` is then ``None``).
    """
    if clean is None:
        clean = config.source.load()
    inputs = build_inputs(config, clean)
    filt = config.make_filter()
    try:
        result = filt.process_block(inputs.primary, inputs.reference)
    except DivergenceError as exc:
        nan = float("nan")
        report = AncReport(nan, nan, nan, diverged_at=exc.index, **config.echo())
        return (report, None) if return_signal else report
    report = evaluate(clean, result.error, **config.echo())
    return (report, result.error) if return_signal else report


# ---------------------------------------------------------------------------
# Sweeps


def _hash64(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def cell_seed(master_seed: int, noise_kind, repetition: int) -> int:
    """Noise seed for one repetition of one noise kind.

    ``master_seed XOR blake2b("<kind>/<rep>")``. Algorithms, orders and step
    sizes share the realization, so comparisons across them are paired,
    and adding grid values never changes existing seeds.
    """
    kind = NoiseKind.parse(noise_kind)
    return (int(master_seed) ^ _hash64(f"{kind.value}/{int(repetition)}")) & 0xFFFF_FFFF_FFFF_FFFF


class CellKey(NamedTuple):
    algorithm: str
    noise_kind: str
    order: int
    step_size: float


@dataclass(frozen=True)
class SweepGrid:
    """Parameter grid; the defaults give the standard 3 x 3 x 3 x 2 table."""

    orders: tuple = DEFAULT_ORDERS
    step_sizes: tuple = DEFAULT_STEP_SIZES
    algorithms: tuple = TABLE_ALGORITHMS
    noise_kinds: tuple = NOISE_KINDS
    repetitions: int = 5
    master_seed: int = 0
    input_snr_db: float = STANDARD_INPUT_SNR_DB
    noise_level: float = DEFAULT_NOISE_LEVEL
    channel: ChannelSpec = field(default_factory=lambda: ChannelSpec.preset(STANDARD_CHANNEL))
    forgetting: float = DEFAULT_FORGETTING
    init_scale: float = DEFAULT_INIT_SCALE
    regularizer: float = DEFAULT_REGULARIZER

    def __post_init__(self):
        conv = {
            "orders": lambda v: tuple(int(x) for x in v),
            "step_sizes": lambda v: tuple(float(x) for x in v),
            "algorithms": lambda v: tuple(str(x).lower() for x in v),
            "noise_kinds": lambda v: tuple(NoiseKind.parse(x) for x in v),
        }
        for name, fn in conv.items():
            values = fn(getattr(self, name))
            if not values:
                raise ConfigurationError(f"sweep axis {name!r} is empty")
            if len(set(values)) != len(values):
                raise ConfigurationError(f"sweep axis {name!r} has duplicate values")
            object.__setattr__(self, name, values)
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {a!r} in sweep grid")
        if int(self.repetitions) < 1:
            raise ConfigurationError("repetitions must be >= 1")
        # validate every algorithm/order/step combination up front
        for key in self.keys():
            self.config_for(key, 0)

    def keys(self) -> list[CellKey]:
        """Cells in canonical order: noise kind, order, step size, algorithm."""
        return [
            CellKey(a, k.short, n, mu)
            for k in self.noise_kinds
            for n in self.orders
            for mu in self.step_sizes
            for a in self.algorithms
        ]

    def __len__(self):
        return len(self.keys())

    def config_for(self, key: CellKey, repetition: int, source: SourceSpec | None = None) -> RunConfig:
        kind = NoiseKind.parse(key.noise_kind)
        return RunConfig(
            algorithm=key.algorithm,
            order=key.order,
            step_size=key.step_size,
            forgetting=self.forgetting,
            noise=NoiseSpec(kind, self.noise_level, cell_seed(self.master_seed, kind, repetition)),
            channel=self.channel,
            input_snr_db=self.input_snr_db,
            source=source or SourceSpec(),
            init_scale=self.init_scale,
            regularizer=self.regularizer,
        )


CSV_COLUMNS = ("algorithm", "noise_kind", "order", "step_size", "seed", "snr_db", "correlation", "mse", "diverged_at")


@dataclass
class SweepTable:
    """Per-run reports in cell order, with helpers for aggregation."""

    reports: list = field(default_factory=list)
    grid: SweepGrid | None = None

    def __len__(self):
        return len(self.reports)

    def cells(self) -> dict:
        out: dict = {}
        for rep in self.reports:
            out.setdefault(CellKey(rep.algorithm, rep.noise_kind, rep.order, rep.step_size), []).append(rep)
        return out

    def mean(self, key: CellKey, metric: str = "snr_db") -> float:
        """Mean of ``metric`` over the cell's non-diverged runs (NaN if none)."""
        values = [getattr(r, metric) for r in self.cells().get(CellKey(*key), []) if r.ok]
        values = [v for v in values if not math.isnan(v)]
        return float(np.mean(values)) if values else float("nan")

    def axes(self):
        keys = list(self.cells())
        if self.grid is not None:
            algorithms = list(self.grid.algorithms)
            kinds = [k.short for k in self.grid.noise_kinds]
        else:
            algorithms = _ordered_unique(k.algorithm for k in keys)
            kinds = _ordered_unique(k.noise_kind for k in keys)
        algorithms = sorted(algorithms, key=lambda a: TABLE_ALGORITHMS.index(a) if a in TABLE_ALGORITHMS else 99)
        kinds = sorted(kinds, key=lambda k: ("white", "random").index(k) if k in ("white", "random") else 99)
        orders = _ordered_unique(k.order for k in keys)
        steps = _ordered_unique(k.step_size for k in keys)
        return algorithms, kinds, sorted(orders), sorted(steps)


def _ordered_unique(items) -> list:
    seen = []
    for x in items:
        if x not in seen:
            seen.append(x)
    return seen


def run_sweep(grid: SweepGrid, fixture: Signal | None = None, *, source: SourceSpec | None = None, jobs: int = 1) -> SweepTable:
    """Run every grid cell for every repetition on the same clean fixture.

    Cells are independent (fresh filter each); with ``jobs > 1`` they run on
    a thread pool, and results are collected in cell order regardless.
    Divergence is recorded in the cell, never raised.
    """
    if fixture is None:
        fixture = (source or SourceSpec()).load()
    tasks = [grid.config_for(key, rep, source) for rep in range(grid.repetitions) for key in grid.keys()]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda cfg: run_anc(cfg, clean=fixture), tasks))
    else:
        reports = [run_anc(cfg, clean=fixture) for cfg in tasks]
    order = {key: i for i, key in enumerate(grid.keys())}
    reports.sort(key=lambda r: order[CellKey(r.algorithm, r.noise_kind, r.order, r.step_size)])
    return SweepTable(reports, grid)


# ---------------------------------------------------------------------------
# Rendering


def _fmt(value, digits=4) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{digits}f}"
    return str(value)


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def table_to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in table.reports:
        writer.writerow([_csv_value(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def table_from_csv(text: str) -> SweepTable:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ConfigurationError(f"unexpected CSV header {reader.fieldnames!r}")
    reports = []
    for row in reader:
        reports.append(
            AncReport(
                snr_db=float(row["snr_db"]),
                correlation=float(row["correlation"]),
                mse=float(row["mse"]),
                algorithm=row["algorithm"],
                order=int(row["order"]),
                step_size=float(row["step_size"]),
                noise_kind=row["noise_kind"],
                seed=int(row["seed"]),
                diverged_at=int(row["diverged_at"]) if row["diverged_at"] else None,
            )
        )
    return SweepTable(reports)


_METRIC_ROWS = (("snr_db", "SNR (dB)"), ("correlation", "Correlation coefficient"), ("mse", "MSE"))
_NOISE_TITLES = {"white": "WHITE NOISE", "random": "RANDOM NOISE"}


def table_to_text(table: SweepTable) -> str:
    """Aligned table: one block per filter length, rows by step size."""
    algorithms, kinds, orders, steps = table.axes()
    if not algorithms:
        algorithms = list(TABLE_ALGORITHMS)
    if not kinds:
        kinds = ["white", "random"]
    w0, w1, wc = 11, 24, 9
    group = wc * len(algorithms)

    def header() -> list[str]:
        top = "PARAMETERS".ljust(w0 + w1) + "".join(
            ("  " + _NOISE_TITLES.get(k, k.upper())).ljust(group + 2) for k in kinds
        )
        sub = "STEP SIZE".ljust(w0) + "METRICS".ljust(w1) + "".join(
            "  " + "".join(a.upper().rjust(wc) for a in algorithms) for _ in kinds
        )
        return [top.rstrip(), sub.rstrip()]

    lines = []
    if not orders:
        return "\n".join(header()) + "\n"
    cell_runs = table.cells()
    for n in orders:
        if lines:
            lines.append("")
        lines.append(f"Filter length N={n}")
        lines.extend(header())
        for mu in steps:
            for i, (metric, label) in enumerate(_METRIC_ROWS):
                cells = []
                for k in kinds:
                    vals = []
                    for a in algorithms:
                        key = CellKey(a, k, n, mu)
                        runs = cell_runs.get(key)
                        if not runs:
                            vals.append("-".rjust(wc))
                        elif not any(r.ok for r in runs):
                            vals.append("div".rjust(wc))
                        else:
                            vals.append(_fmt(table.mean(key, metric)).rjust(wc))
                    cells.append("  " + "".join(vals))
                lead = (f"{mu:.2f}" if i == 0 else "").ljust(w0)
                lines.append((lead + label.ljust(w1) + "".join(cells)).rstrip())
    return "\n".join(lines) + "\n"


def table_to_records(table: SweepTable) -> str:
    """One ``key=value`` line per cell, aggregated over repetitions."""
    lines = []
    for key, runs in table.cells().items():
        ok = [r for r in runs if r.ok]
        fields = [
            f"algorithm={key.algorithm}",
            f"noise_kind={key.noise_kind}",
            f"order={key.order}",
            f"step_size={key.step_size:.4f}",
            f"snr_db={_fmt(table.mean(key, 'snr_db'))}",
            f"correlation={_fmt(table.mean(key, 'correlation'))}",
            f"mse={_fmt(table.mean(key, 'mse'))}",
            f"runs={len(runs)}",
            f"diverged={len(runs) - len(ok)}",
        ]
        lines.append(" ".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


FORMATS = ("text", "csv", "records")


def emit_table(table: SweepTable, format: str = "text") -> str:
    if format == "text":
        return table_to_text(table)
    if format == "csv":
        return table_to_csv(table)
    if format == "records":
        return table_to_records(table)
    raise ConfigurationError(f"unknown table format {format!r} (choose from {', '.join(FORMATS)})")
