"""Streaming dual-window STFT analysis and synthesis.

Analysis uses an input window of ``iws`` samples with a hop of ``hop``
samples and an ``n_dft``-point real DFT (zero-padded on the right when
``iws < n_dft``). Synthesis inverts each frame, keeps only the last ``ows``
samples of the windowed segment, applies the synthesis window, and
overlap-adds with the same hop. Keeping ``ows < iws`` is what cuts the
algorithmic latency from the input window length down to the output window
length; predicting ``frames_ahead`` frames shifts each synthesis chunk one
hop later per frame and cuts a further hop of latency each.

Streams are primed with ``iws - hop`` zeros so that frame ``t`` ends at
input sample ``(t+1)*hop`` and output sample indices line up exactly with
input sample indices from the first sample on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .windows import AnalysisWindow, SynthesisWindow, WindowKind, make_analysis_window, make_synthesis_window


@dataclass(frozen=True)
class FrameParams:
    """STFT/iSTFT geometry: sizes in samples, plus the prediction horizon.

    ``iws`` is the analysis (input) window size, ``ows`` the output window
    size used for overlap-add, ``hop`` the hop size, and ``frames_ahead``
    the number of frames the final estimator predicts into the future.
    Defaults are 16 kHz with 16/4/2 ms sizes and a 256-point DFT.
    """

    sample_rate: int = 16000
    iws: int = 256
    ows: int = 64
    hop: int = 32
    n_dft: int = 256
    frames_ahead: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.hop <= 0:
            raise ValueError(f"hop must be positive, got {self.hop}")
        if self.ows <= 0 or self.ows % self.hop != 0:
            raise ValueError(
                f"ows ({self.ows}) must be a positive multiple of hop ({self.hop})"
            )
        if not self.ows <= self.iws <= self.n_dft:
            raise ValueError(
                f"need ows <= iws <= n_dft, got {self.ows}/{self.iws}/{self.n_dft}"
            )
        if self.n_dft % 2 != 0:
            raise ValueError(f"n_dft must be even, got {self.n_dft}")
        if self.frames_ahead < 0:
            raise ValueError(f"frames_ahead must be >= 0, got {self.frames_ahead}")

    @property
    def n_bins(self) -> int:
        return self.n_dft // 2 + 1

    def ms(self, samples: int) -> float:
        return 1000.0 * samples / self.sample_rate

    @property
    def iws_ms(self) -> float:
        return self.ms(self.iws)

    @property
    def ows_ms(self) -> float:
        return self.ms(self.ows)

    @property
    def hop_ms(self) -> float:
        return self.ms(self.hop)


def algorithmic_latency(params: FrameParams) -> float:
    """Algorithmic latency in ms: output window span minus predicted hops.

    May be negative when ``frames_ahead > ows/hop - 1`` (the system emits
    samples before their aligned input arrives, fully predicted).
    """
    return params.ows_ms - params.frames_ahead * params.hop_ms


def schedule_frame(t: int, frames_ahead: int) -> int:
    """Output frame slot for a chunk predicted at frame ``t``."""
    if frames_ahead < 0:
        raise ValueError(f"frames_ahead must be >= 0, got {frames_ahead}")
    return t + frames_ahead


@dataclass(frozen=True)
class SpectrumFrame:
    """One-sided DFT coefficients of a single channel at frame ``frame_index``."""

    bins: np.ndarray
    frame_index: int


@dataclass(frozen=True)
class MultichannelSpectrumFrame:
    """One-sided DFT coefficients, shape (channels, n_bins), at one frame."""

    bins: np.ndarray
    frame_index: int

    @property
    def channels(self) -> int:
        return self.bins.shape[0]

    def channel(self, p: int) -> SpectrumFrame:
        return SpectrumFrame(self.bins[p], self.frame_index)


class AnalysisStream:
    """Chunk-in, frames-out STFT analysis with internal buffering.

    The internal buffer starts as ``iws`` zeros, so the first frame is
    emitted after one hop of input and contains ``iws - hop`` priming
    zeros followed by the first hop of samples. Arbitrary chunk sizes are
    accepted; leftovers shorter than a hop are carried over. Single-writer:
    do not push concurrently on one stream.
    """

    def __init__(self, window: AnalysisWindow, params: FrameParams, channels: int = 1):
        if window.n != params.iws:
            raise ValueError(
                f"window length {window.n} does not match iws {params.iws}"
            )
        if channels < 1:
            raise ValueError(f"channels must be >= 1, got {channels}")
        self.window = window
        self.params = params
        self.channels = channels
        self._buf = np.zeros((channels, params.iws))
        self._carry = np.zeros((channels, 0))
        self._t = 0

    @property
    def frames_emitted(self) -> int:
        return self._t

    def push(self, chunk: np.ndarray) -> list[MultichannelSpectrumFrame]:
        """Ingest samples, shape (n,) for mono or (channels, n); returns
        one frame per completed hop (possibly none)."""
        chunk = np.asarray(chunk, dtype=np.float64)
        if chunk.ndim == 1:
            chunk = chunk[np.newaxis, :]
        if chunk.shape[0] != self.channels:
            raise ValueError(
                f"expected {self.channels} channels, got {chunk.shape[0]}"
            )
        data = np.concatenate([self._carry, chunk], axis=1)
        hop, iws, n_dft = self.params.hop, self.params.iws, self.params.n_dft
        g = self.window.samples
        frames = []
        n_hops = data.shape[1] // hop
        for i in range(n_hops):
            self._buf[:, : iws - hop] = self._buf[:, hop:]
            self._buf[:, iws - hop :] = data[:, i * hop : (i + 1) * hop]
            bins = np.fft.rfft(g * self._buf, n=n_dft, axis=1)
            frames.append(MultichannelSpectrumFrame(bins, self._t))
            self._t += 1
        self._carry = data[:, n_hops * hop :]
        return frames


def analyze(
    signal: np.ndarray,
    window: AnalysisWindow,
    params: FrameParams,
    flush: bool = False,
) -> np.ndarray:
    """One-shot analysis of a full signal.

    ``signal`` may be (n,) or (channels, n). Returns the complex
    spectrogram, shape (T, n_bins) or (T, channels, n_bins), with
    ``T = floor(n / hop)``. With ``flush=True`` the signal is zero-padded
    by ``ows + hop`` samples first, so the extra frames needed to
    resynthesize the signal tail are included.
    """
    signal = np.asarray(signal, dtype=np.float64)
    mono = signal.ndim == 1
    channels = 1 if mono else signal.shape[0]
    if flush:
        pad_shape = (params.ows + params.hop,) if mono else (channels, params.ows + params.hop)
        signal = np.concatenate([signal, np.zeros(pad_shape)], axis=-1)
    stream = AnalysisStream(window, params, channels)
    frames = stream.push(signal)
    bins = np.stack([f.bins for f in frames]) if frames else np.zeros(
        (0, channels, params.n_bins), dtype=np.complex128
    )
    return bins[:, 0, :] if mono else bins


def synthesize_frame(
    frame: SpectrumFrame, l: SynthesisWindow, params: FrameParams
) -> np.ndarray:
    """Invert one frame and return its windowed overlap-add chunk.

    Inverse DFT (real output, length ``n_dft``), keep the last ``ows``
    samples of the first ``iws`` (the analysis segment before padding),
    multiply by the synthesis window.
    """
    bins = np.asarray(frame.bins)
    if bins.shape != (params.n_bins,):
        raise ValueError(f"expected {params.n_bins} bins, got {bins.shape}")
    if not np.all(np.isfinite(bins)):
        raise ValueError(f"non-finite bins in frame {frame.frame_index}")
    if l.a != params.ows or l.hop != params.hop:
        raise ValueError(
            f"synthesis window ({l.a}/{l.hop}) does not match params "
            f"({params.ows}/{params.hop})"
        )
    seg = np.fft.irfft(bins, n=params.n_dft)
    return seg[params.iws - params.ows : params.iws] * l.samples


class SynthesisStream:
    """Overlap-add of ``ows``-sample chunks with future-frame scheduling.

    The chunk pushed at frame ``t`` is placed in the output slot
    ``t + frames_ahead``; each push releases the hop-sized prefix that can
    receive no further contributions. When ``frames_ahead > 0`` the first
    ``frames_ahead * hop`` output samples are released with their missing
    past contributions treated as zeros.
    """

    def __init__(self, params: FrameParams):
        self.params = params
        self._acc = np.zeros(params.ows)
        self._t = 0
        self._released = 0

    @property
    def released(self) -> int:
        """Total output samples released so far."""
        return self._released

    def push(self, chunk: np.ndarray) -> np.ndarray:
        """Add one synthesis chunk; returns the output samples (possibly
        empty) that became final."""
        a, b, k = self.params.ows, self.params.hop, self.params.frames_ahead
        chunk = np.asarray(chunk, dtype=np.float64)
        if chunk.shape != (a,):
            raise ValueError(f"expected chunk of {a} samples, got {chunk.shape}")
        self._acc += chunk
        # this chunk covers output samples [start, start + a)
        start = (schedule_frame(self._t, k) + 1) * b - a
        self._t += 1
        end = start + b
        if end <= 0:
            out = np.empty(0)
        else:
            gap = start - self._released  # never-contributed samples, k > 0 only
            head = self._acc[:b]
            out = np.concatenate([np.zeros(gap), head]) if gap > 0 else head.copy()
            self._released = end
        self._acc[:-b] = self._acc[b:]
        self._acc[-b:] = 0.0
        return out


def synthesize(
    frames: np.ndarray,
    l: SynthesisWindow,
    params: FrameParams,
    length: int | None = None,
) -> np.ndarray:
    """One-shot synthesis of a (T, n_bins) spectrogram.

    Overlap-adds every frame and flushes; the result is trimmed (or
    zero-extended) to ``length`` when given, else to ``T * hop`` samples.
    Contributions beyond the given frames are zeros, so the last
    ``ows - hop`` covered samples are only fully reconstructed when the
    spectrogram includes the tail frames (see ``analyze(..., flush=True)``).
    """
    frames = np.asarray(frames)
    if length is None:
        length = frames.shape[0] * params.hop
    stream = SynthesisStream(params)
    parts = [
        stream.push(synthesize_frame(SpectrumFrame(bins, t), l, params))
        for t, bins in enumerate(frames)
    ]
    zero = np.zeros(params.ows)
    while stream.released < length:
        parts.append(stream.push(zero))
    out = np.concatenate(parts) if parts else np.zeros(0)
    if len(out) < length:
        out = np.concatenate([out, np.zeros(length - len(out))])
    return out[:length]


def build_windows(
    kind: WindowKind, params: FrameParams
) -> tuple[AnalysisWindow, SynthesisWindow]:
    """Matched analysis/synthesis pair for the given geometry."""
    g = make_analysis_window(kind, params.iws, hop=params.hop)
    l = make_synthesis_window(g, params.ows, params.hop)
    return g, l
