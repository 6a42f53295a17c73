"""Streaming adaptive noise cancellation (LMS, NLMS, RLS) and benchmark harness."""
from ._backend import NAME as BACKEND
from .errors import (
    AncError,
    ConfigurationError,
    DegenerateMetricError,
    DivergenceError,
    NumericalBreakdownError,
    TruncatedDataError,
    UndefinedBoundError,
    UnsupportedCodecError,
    WavError,
    WavHeaderError,
)
from .filters import (
    FilterStep,
    LmsConfig,
    LmsFilter,
    NlmsConfig,
    NlmsFilter,
    RlsConfig,
    RlsFilter,
    RlsState,
    TapLine,
    filter_output,
    lms_step_bound,
    lms_update,
    make_filter,
    nlms_update,
    process_block,
    process_sample,
    rls_gain,
    rls_update,
)
from .harness import RunConfig, SweepGrid, SweepTable, emit_table, run_anc, run_sweep, standard_fixture
from .metrics import AncReport, correlation, mse, snr_db
from .signals import ChannelSpec, NoiseKind, NoiseSpec, Signal, apply_channel, gen_noise, mix_at_snr, synth_speech
from .wav import wav_read, wav_write

__version__ = "0.1.0"
