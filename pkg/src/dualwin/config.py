"""Flat key=value run configuration for the ``enhance`` command.

One ``key = value`` pair per line, ``#`` starts a comment. Sizes carry an
explicit unit suffix: ``iws_ms = 16`` or ``iws_samples = 256`` (same for
``ows`` and ``hop``); setting both units for one size is an error. Example::

    seed = 7
    sample_rate = 16000
    window = tukey
    iws_ms = 16
    ows_ms = 4
    hop_ms = 2
    n_dft = 256
    frames_ahead = 0
    stage1 = oracle_mag_mask
    beamformer = woodbury
    stage2 = passthrough:beamformer
    ref_mic = 0
    mixture = mixture.wav
    reference = reference.wav
    output = enhanced.wav
    report = report.json

Estimator values: ``passthrough[:source[:channel]]`` (source one of
mixture/stage1/beamformer), ``oracle_complex``, ``oracle_mag_mask``,
``file:PATH``, ``external:COMMAND``; ``stage2`` may be ``none``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .estimators import EstimatorKind
from .framing import FrameParams
from .pipeline import ConfigError, PipelineConfig
from .windows import WindowKind

_SIZE_NAMES = ("iws", "ows", "hop")
_KNOWN_KEYS = {
    "seed",
    "sample_rate",
    "window",
    "tukey_alpha",
    "n_dft",
    "frames_ahead",
    "stage1",
    "stage2",
    "beamformer",
    "ref_mic",
    "loading",
    "update_stride",
    "forgetting",
    "mixture",
    "reference",
    "output",
    "report",
    "bit_depth",
} | {f"{name}_{unit}" for name in _SIZE_NAMES for unit in ("ms", "samples")}


@dataclass
class EnhanceJob:
    """A parsed enhance run: pipeline settings plus file paths."""

    pipeline: PipelineConfig
    mixture_path: str
    output_path: str
    reference_path: str | None = None
    report_path: str | None = None
    seed: int | None = None
    bit_depth: int = 32


def parse_pairs(text: str) -> dict[str, str]:
    """Split config text into raw key/value strings; duplicates are errors."""
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip("\"'")
    return pairs


def _int(pairs, key, default=None, minimum=None):
    if key not in pairs:
        return default
    try:
        value = int(pairs[key])
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {pairs[key]!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def _float(pairs, key, default=None):
    if key not in pairs:
        return default
    try:
        return float(pairs[key])
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {pairs[key]!r}") from None


def _size_samples(pairs, name, sample_rate, default):
    ms_key, smp_key = f"{name}_ms", f"{name}_samples"
    if ms_key in pairs and smp_key in pairs:
        raise ConfigError(f"{ms_key} and {smp_key} are both set; give exactly one")
    if smp_key in pairs:
        return _int(pairs, smp_key, minimum=1)
    if ms_key in pairs:
        ms = _float(pairs, ms_key)
        samples = ms * sample_rate / 1000.0
        rounded = int(round(samples))
        if abs(samples - rounded) > 1e-6 or rounded < 1:
            raise ConfigError(
                f"{ms_key}: {ms} ms is not a whole number of samples at "
                f"{sample_rate} Hz"
            )
        return rounded
    return default


def _estimator(value: str, key: str, ref_mic: int) -> EstimatorKind | None:
    value = value.strip()
    if value.lower() in ("", "none", "off"):
        return None
    if value.startswith("file:"):
        return EstimatorKind("file", path=value[len("file:") :].strip())
    if value.startswith("external:"):
        return EstimatorKind("external", command=value[len("external:") :].strip())
    head, _, rest = value.partition(":")
    if head == "passthrough":
        source, _, channel = rest.partition(":")
        source = source or "mixture"
        try:
            return EstimatorKind(
                "passthrough",
                source=source,
                channel=int(channel) if channel else ref_mic,
            )
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    if value in ("oracle_complex", "oracle_mag_mask"):
        return EstimatorKind(value)
    raise ConfigError(f"{key}: unknown estimator {value!r}")


def build_job(pairs: dict[str, str]) -> EnhanceJob:
    """Interpret raw pairs into an :class:`EnhanceJob`, validating fields."""
    unknown = sorted(set(pairs) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    for key in ("mixture", "output"):
        if key not in pairs:
            raise ConfigError(f"{key}: required key is missing")

    sample_rate = _int(pairs, "sample_rate", default=16000, minimum=1)
    try:
        params = FrameParams(
            sample_rate=sample_rate,
            iws=_size_samples(pairs, "iws", sample_rate, 256),
            ows=_size_samples(pairs, "ows", sample_rate, 64),
            hop=_size_samples(pairs, "hop", sample_rate, 32),
            n_dft=_int(pairs, "n_dft", default=256, minimum=2),
            frames_ahead=_int(pairs, "frames_ahead", default=0, minimum=0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    window_name = pairs.get("window", "tukey")
    try:
        if "tukey_alpha" in pairs:
            window = WindowKind(window_name, _float(pairs, "tukey_alpha"))
        else:
            window = WindowKind(window_name)
    except ValueError as exc:
        raise ConfigError(f"window: {exc}") from None

    beamformer = pairs.get("beamformer", "off").lower()
    if beamformer in ("off", "none", ""):
        beamformer = None
    ref_mic = _int(pairs, "ref_mic", default=0, minimum=0)
    stage1 = _estimator(pairs.get("stage1", "passthrough"), "stage1", ref_mic)
    if stage1 is None:
        raise ConfigError("stage1: an estimator is required")
    stage2 = _estimator(pairs.get("stage2", "none"), "stage2", ref_mic)

    bit_depth = _int(pairs, "bit_depth", default=32)
    if bit_depth not in (16, 24, 32):
        raise ConfigError(f"bit_depth: expected 16, 24, or 32, got {bit_depth}")

    pipeline = PipelineConfig(
        params=params,
        window=window,
        stage1=stage1,
        beamformer=beamformer,
        stage2=stage2,
        ref_mic=ref_mic,
        loading=_float(pairs, "loading", default=1e-6),
        update_stride=_int(pairs, "update_stride", default=1, minimum=1),
        forgetting=_float(pairs, "forgetting", default=1.0),
    )
    return EnhanceJob(
        pipeline=pipeline,
        mixture_path=pairs["mixture"],
        output_path=pairs["output"],
        reference_path=pairs.get("reference"),
        report_path=pairs.get("report"),
        seed=_int(pairs, "seed"),
        bit_depth=bit_depth,
    )


def load_job(path) -> EnhanceJob:
    with open(path, "r", encoding="utf-8") as fh:
        return build_job(parse_pairs(fh.read()))
