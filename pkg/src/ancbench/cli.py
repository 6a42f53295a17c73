"""Command-line interface: ``ancbench {denoise,sweep,synth}``.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines whose
keys are flag names (dashes or underscores); flags given on the command
line override the file. ``ANC_SEED`` supplies the default seed.

Exit codes: 0 success, 2 usage/configuration, 3 I/O or WAV parse error,
4 filter divergence.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .errors import AncError, ConfigurationError, WavError
from .filters import DEFAULT_FORGETTING, DEFAULT_INIT_SCALE, DEFAULT_REGULARIZER
from .harness import (
    FORMATS,
    STANDARD_DURATION,
    STANDARD_INPUT_SNR_DB,
    STANDARD_RATE,
    STANDARD_SEED,
    TABLE_ALGORITHMS,
    RunConfig,
    SourceSpec,
    SweepGrid,
    emit_table,
    run_anc,
    run_sweep,
)
from .signals import CHANNEL_PRESETS, DEFAULT_NOISE_LEVEL, ChannelSpec, NoiseKind, NoiseSpec, synth_speech
from .wav import wav_write

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIVERGED = 4


class UsageError(Exception):
    pass


def _env_seed(default=0) -> int:
    raw = os.environ.get("ANC_SEED")
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"ANC_SEED must be an integer, got {raw!r}") from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _channel(text):
    text = text.strip()
    if text in CHANNEL_PRESETS:
        return ChannelSpec.preset(text)
    try:
        coeffs = [float(c) for c in text.split(",") if c.strip()]
        return ChannelSpec(coeffs)
    except (ValueError, ConfigurationError):
        raise argparse.ArgumentTypeError(
            f"expected a preset ({', '.join(CHANNEL_PRESETS)}) or comma-separated coefficients, got {text!r}"
        ) from None


def _list_of(conv):
    def parse(text):
        items = [t.strip() for t in str(text).split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(conv(t) for t in items)

    return parse


# ---------------------------------------------------------------------------
# Parser


MU_HELP = (
    "step size / forgetting factor. lms: mu > 0, mean convergence needs "
    "mu <= 1/lambda_max of the reference autocorrelation matrix (a sufficient "
    "bound, and only for the mean); nlms: 0 < mu < 2; rls: forgetting factor "
    "0 < m <= 1 (default 0.999)"
)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(
        prog="ancbench",
        description="Adaptive noise cancellation (LMS / NLMS / RLS) and benchmark sweeps.",
        epilog="Exit codes: 0 ok, 2 usage, 3 I/O or WAV parse error, 4 divergence.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=S, metavar="FILE", help="key = value file; keys are flag names, flags override it")

    d = sub.add_parser("denoise", help="corrupt a clean signal and cancel the noise with one filter", argument_default=S)
    d.add_argument("input", nargs="?", metavar="INPUT.wav", help="clean 16-bit PCM WAV input")
    d.add_argument("--synth", type=int, metavar="SEED", help="use synthetic speech with this seed instead of a WAV input")
    d.add_argument("--duration", type=_positive_float, metavar="SEC", help=f"synthetic input length in seconds, > 0 (default {STANDARD_DURATION:g})")
    d.add_argument("--rate", type=_positive_int, metavar="HZ", help=f"synthetic input sample rate, positive integer (default {STANDARD_RATE})")
    d.add_argument("--algorithm", choices=TABLE_ALGORITHMS[::-1], help="adaptive algorithm (default rls)")
    d.add_argument("--order", type=_positive_int, metavar="N", help="filter length N >= 1 (default 15)")
    d.add_argument("--mu", type=float, metavar="MU", help=MU_HELP + "; default 0.05 (lms/nlms)")
    d.add_argument("--noise", choices=("white", "random"), help="white Gaussian or uniform random noise (default white)")
    d.add_argument("--noise-level", type=float, metavar="RMS", help=f"RMS of the reference noise, >= 0 (default {DEFAULT_NOISE_LEVEL})")
    d.add_argument("--input-snr-db", type=float, metavar="DB", help=f"corruption SNR at the primary input in dB, or inf for no noise (default {STANDARD_INPUT_SNR_DB:g})")
    d.add_argument("--channel", type=_channel, metavar="SPEC", help=f"noise path: {', '.join(CHANNEL_PRESETS)} or comma-separated FIR taps (default identity)")
    d.add_argument("--seed", type=int, help="noise seed, 64-bit integer (default $ANC_SEED or 0)")
    d.add_argument("--init-scale", type=_positive_float, metavar="DELTA", help=f"rls: P(0) = DELTA * I, > 0 (default {DEFAULT_INIT_SCALE:g})")
    d.add_argument("--regularizer", type=float, metavar="EPS", help=f"nlms: added to ||u||^2, >= 0 (default {DEFAULT_REGULARIZER:g})")
    d.add_argument("--out", metavar="OUT.wav", help="write the denoised signal here")
    d.add_argument("--report", metavar="PATH", help="write the run report (JSON) here")
    common(d)

    s = sub.add_parser("sweep", help="run the step-size x filter-length x algorithm x noise grid", argument_default=S)
    s.add_argument("--grid", metavar="FILE", help="grid file (key = value): orders, step_sizes, algorithms, noise_kinds, repetitions, seed, input_snr_db, noise_level, channel, forgetting, init_scale, regularizer")
    s.add_argument("--fixture", metavar="SRC", help=f"clean signal: a WAV path or synth[:SEED] (default synth:{STANDARD_SEED}, {STANDARD_DURATION:g} s at {STANDARD_RATE} Hz)")
    s.add_argument("--format", choices=FORMATS, help="output format (default text)")
    s.add_argument("--out", metavar="PATH", help="write the table here instead of stdout")
    s.add_argument("--seed", type=int, help="master seed (default $ANC_SEED or 0)")
    s.add_argument("--repetitions", type=_positive_int, metavar="R", help="seeds per cell, >= 1 (default 5)")
    s.add_argument("--jobs", type=_positive_int, metavar="J", help="worker threads (default 1)")
    common(s)

    y = sub.add_parser("synth", help="write the synthetic speech fixture as WAV", argument_default=S)
    y.add_argument("--duration", type=float, metavar="SEC", help=f"length in seconds, > 0 (default {STANDARD_DURATION:g})")
    y.add_argument("--rate", type=_positive_int, metavar="HZ", help=f"sample rate (default {STANDARD_RATE})")
    y.add_argument("--seed", type=int, help=f"synthesis seed (default $ANC_SEED or {STANDARD_SEED})")
    y.add_argument("--out", required=False, metavar="OUT.wav", help="output WAV path (required)")
    common(y)
    return parser


def _subparser(parser, name) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)  # pragma: no cover


# ---------------------------------------------------------------------------
# Config files


def read_key_values(path) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise UsageError(f"{path}:{lineno}: missing key")
        if key in values:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _convert_file_values(sub: argparse.ArgumentParser, values: dict, path) -> dict:
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    out = {}
    for key, text in values.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"{path}: unknown key {key!r}")
        try:
            value = action.type(text) if action.type else text
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}: invalid value for {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{path}: invalid value for {key!r}: {text!r} (choose from {', '.join(map(str, action.choices))})")
        out[key] = value
    return out


def _merge(sub, args: argparse.Namespace) -> dict:
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if "config" in vars(args):
        file_values = _convert_file_values(sub, read_key_values(args.config), args.config)
        if ("input" in cli or "synth" in cli) and ("input" in file_values or "synth" in file_values):
            file_values.pop("input", None)
            file_values.pop("synth", None)
        return {**file_values, **cli}
    return cli


# ---------------------------------------------------------------------------
# Grid files


_GRID_KEYS = {
    "orders": _list_of(int),
    "step_sizes": _list_of(float),
    "algorithms": _list_of(str),
    "noise_kinds": _list_of(str),
    "repetitions": int,
    "seed": int,
    "master_seed": int,
    "input_snr_db": float,
    "noise_level": float,
    "channel": _channel,
    "forgetting": float,
    "init_scale": float,
    "regularizer": float,
}


def read_grid(path) -> dict:
    fields = {}
    for key, text in read_key_values(path).items():
        conv = _GRID_KEYS.get(key)
        if conv is None:
            raise UsageError(f"{path}: unknown grid key {key!r}")
        try:
            value = conv(text)
            if key == "noise_kinds":
                value = tuple(NoiseKind.parse(v) for v in value)
            if key == "algorithms":
                bad = [a for a in value if a.lower() not in TABLE_ALGORITHMS]
                if bad:
                    raise ValueError(f"unknown algorithm {bad[0]!r}")
        except (argparse.ArgumentTypeError, ValueError, ConfigurationError) as exc:
            raise UsageError(f"{path}: invalid value for grid key {key!r}: {exc}") from None
        fields["master_seed" if key == "seed" else key] = value
    return fields


# ---------------------------------------------------------------------------
# Commands


def _report_line(report) -> str:
    parts = []
    for key, value in report.to_dict().items():
        if isinstance(value, float):
            value = f"{value:.4f}" if math.isfinite(value) else str(value)
        elif isinstance(value, list):
            value = ",".join(value) or "-"
        elif value is None:
            value = "-"
        parts.append(f"{key}={value}")
    return " ".join(parts)


def cmd_denoise(opts: dict, out) -> int:
    if "input" in opts and "synth" in opts:
        raise UsageError("conflicting inputs: INPUT.wav and --synth given together; choose one")
    if "input" not in opts and "synth" not in opts:
        raise UsageError("no input: give INPUT.wav or --synth SEED")
    if "input" in opts:
        source = SourceSpec(wav=opts["input"])
    else:
        source = SourceSpec(
            synth_seed=opts["synth"],
            duration_s=opts.get("duration", STANDARD_DURATION),
            sample_rate=opts.get("rate", STANDARD_RATE),
        )
    algorithm = opts.get("algorithm", "rls")
    mu = opts.get("mu")
    if algorithm == "rls":
        step_size, forgetting = float("nan"), DEFAULT_FORGETTING if mu is None else mu
    else:
        step_size, forgetting = 0.05 if mu is None else mu, DEFAULT_FORGETTING
    try:
        config = RunConfig(
            algorithm=algorithm,
            order=opts.get("order", 15),
            step_size=step_size,
            forgetting=forgetting,
            noise=NoiseSpec(
                NoiseKind.parse(opts.get("noise", "white")),
                opts.get("noise_level", DEFAULT_NOISE_LEVEL),
                opts["seed"] if "seed" in opts else _env_seed(0),
            ),
            channel=opts.get("channel") or ChannelSpec.identity(),
            input_snr_db=opts.get("input_snr_db", STANDARD_INPUT_SNR_DB),
            source=source,
            init_scale=opts.get("init_scale", DEFAULT_INIT_SCALE),
            regularizer=opts.get("regularizer", DEFAULT_REGULARIZER),
        )
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None

    clean = source.load()
    report, denoised = run_anc(config, clean=clean, return_signal=True)
    if "report" in opts:
        with open(opts["report"], "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    print(_report_line(report), file=out)
    if not report.ok:
        print(f"error: {config.algorithm} filter diverged at sample {report.diverged_at}", file=sys.stderr)
        return EXIT_DIVERGED
    if "out" in opts:
        wav_write(opts["out"], denoised)
    return EXIT_OK


def _fixture(spec: str | None):
    if spec is None or spec == "synth":
        return SourceSpec()
    if spec.startswith("synth:"):
        try:
            return SourceSpec(synth_seed=int(spec.split(":", 1)[1], 0))
        except ValueError:
            raise UsageError(f"--fixture: bad synth seed in {spec!r}") from None
    return SourceSpec(wav=spec)


def cmd_sweep(opts: dict, out) -> int:
    fields = read_grid(opts["grid"]) if "grid" in opts else {}
    if "seed" in opts:
        fields["master_seed"] = opts["seed"]
    elif "master_seed" not in fields:
        fields["master_seed"] = _env_seed(0)
    if "repetitions" in opts:
        fields["repetitions"] = opts["repetitions"]
    try:
        grid = SweepGrid(**fields)
    except ConfigurationError as exc:
        raise UsageError(f"invalid grid: {exc}") from None
    source = _fixture(opts.get("fixture"))
    table = run_sweep(grid, source.load(), source=source, jobs=opts.get("jobs", 1))
    text = emit_table(table, opts.get("format", "text"))
    if "out" in opts:
        with open(opts["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_synth(opts: dict, out) -> int:
    if "out" not in opts:
        raise UsageError("synth: --out is required")
    duration = opts.get("duration", STANDARD_DURATION)
    if not (duration > 0 and math.isfinite(duration)):
        raise UsageError(f"--duration must be > 0, got {duration:g}")
    seed = opts["seed"] if "seed" in opts else _env_seed(STANDARD_SEED)
    signal = synth_speech(duration, opts.get("rate", STANDARD_RATE), seed)
    wav_write(opts["out"], signal)
    print(f"wrote {len(signal)} frames at {signal.sample_rate} Hz (seed {seed}) to {opts['out']}", file=out)
    return EXIT_OK


COMMANDS = {"denoise": cmd_denoise, "sweep": cmd_sweep, "synth": cmd_synth}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit 2 already
        return int(exc.code or 0)
    sub = _subparser(parser, args.command)
    try:
        opts = _merge(sub, args)
        return COMMANDS[args.command](opts, out)
    except UsageError as exc:
        sub.print_usage(sys.stderr)
        print(f"ancbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"ancbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WavError as exc:
        print(f"ancbench {args.command}: WAV error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"ancbench {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AncError as exc:  # pragma: no cover - divergence is reported, not raised
        print(f"ancbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
