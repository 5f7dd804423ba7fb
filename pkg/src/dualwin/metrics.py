"""Evaluation metrics: SI-SDR and two diagnostic loss scalars.

``si_sdr`` measures time-domain sample-level quality after optimally
scaling the reference onto the estimate. ``ri_mag_loss`` is the L1 loss on
real/imaginary spectrogram components plus their magnitude; ``wav_mag_loss``
is the L1 loss on the re-synthesized waveform plus the magnitude of a
dedicated loss STFT (square-root Hann, 32 ms window, 8 ms hop by default,
deliberately independent of the enhancement pipeline's frame geometry).
Both losses are evaluated as plain scalars; there is no gradient machinery
here.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .framing import FrameParams, analyze
from .windows import AnalysisWindow, SQRT_HANN, make_analysis_window

SI_SDR_CAP_DB = 100.0


def si_sdr(estimate: np.ndarray, reference: np.ndarray, cap_db: float = SI_SDR_CAP_DB) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    ``10*log10(||a*s||^2 / ||a*s - s_hat||^2)`` with ``a = <s_hat, s>/||s||^2``.
    The value is clamped to ``[-cap_db, cap_db]`` so that exact matches (and
    exactly orthogonal estimates) stay finite in reports.
    """
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if est.shape != ref.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {ref.shape}")
    ref_energy = float(np.dot(ref, ref))
    if ref_energy == 0.0:
        raise ValueError("reference signal has zero energy")
    alpha = float(np.dot(est, ref)) / ref_energy
    target = alpha * ref
    err_energy = float(np.dot(target - est, target - est))
    if err_energy == 0.0:
        return cap_db
    target_energy = float(np.dot(target, target))
    if target_energy == 0.0:
        return -cap_db
    return float(np.clip(10.0 * np.log10(target_energy / err_energy), -cap_db, cap_db))


def ri_mag_loss(
    estimate: np.ndarray, reference: np.ndarray, reduce: str = "sum"
) -> float:
    """L1 loss on RI components and magnitude of two complex spectrograms.

    Sum of three terms: |dRe|, |dIm|, and | |S_hat| - |S| |, each summed
    over every bin. ``reduce="mean"`` divides by the number of summed
    scalar terms (three per bin).
    """
    s_hat = np.asarray(estimate)
    s = np.asarray(reference)
    if s_hat.shape != s.shape:
        raise ValueError(f"shape mismatch: {s_hat.shape} vs {s.shape}")
    d = s_hat - s
    total = (
        np.sum(np.abs(d.real))
        + np.sum(np.abs(d.imag))
        + np.sum(np.abs(np.abs(s_hat) - np.abs(s)))
    )
    if reduce == "mean":
        return float(total / (3 * s.size)) if s.size else 0.0
    if reduce != "sum":
        raise ValueError(f"reduce must be 'sum' or 'mean', got {reduce!r}")
    return float(total)


def default_loss_stft(sample_rate: int = 16000) -> tuple[AnalysisWindow, FrameParams]:
    """Loss-STFT geometry: sqrt-Hann, 32 ms window, 8 ms hop."""
    iws = int(round(0.032 * sample_rate))
    hop = int(round(0.008 * sample_rate))
    params = FrameParams(
        sample_rate=sample_rate, iws=iws, ows=hop, hop=hop, n_dft=iws
    )
    return make_analysis_window(SQRT_HANN, iws), params


def wav_mag_loss(
    estimate: np.ndarray,
    reference: np.ndarray,
    loss_stft: tuple[AnalysisWindow, FrameParams] | None = None,
    reduce: str = "sum",
) -> float:
    """L1 waveform loss plus L1 loss on the loss-STFT magnitudes.

    The STFT used here is fixed by ``loss_stft`` (default
    :func:`default_loss_stft`) and is unrelated to whatever frame geometry
    produced the signals.
    """
    s_hat = np.asarray(estimate, dtype=np.float64)
    s = np.asarray(reference, dtype=np.float64)
    if s_hat.shape != s.shape:
        raise ValueError(f"length mismatch: {s_hat.shape} vs {s.shape}")
    window, params = loss_stft if loss_stft is not None else default_loss_stft()
    mag_hat = np.abs(analyze(s_hat, window, params))
    mag_ref = np.abs(analyze(s, window, params))
    total = np.sum(np.abs(s_hat - s)) + np.sum(np.abs(mag_hat - mag_ref))
    if reduce == "mean":
        n_terms = s.size + mag_ref.size
        return float(total / n_terms) if n_terms else 0.0
    if reduce != "sum":
        raise ValueError(f"reduce must be 'sum' or 'mean', got {reduce!r}")
    return float(total)


@dataclass
class MetricReport:
    """Scalar metrics for one enhanced signal against its reference."""

    si_sdr_db: float
    ri_mag_loss: float
    ri_mag_loss_mean: float
    wav_mag_loss: float
    wav_mag_loss_mean: float
    n_samples: int
    alignment_offset: int

    def to_dict(self) -> dict:
        return asdict(self)


def compute_metrics(
    estimate: np.ndarray,
    reference: np.ndarray,
    loss_stft: tuple[AnalysisWindow, FrameParams] | None = None,
    offset: int = 0,
    spectra: tuple[np.ndarray, np.ndarray] | None = None,
) -> MetricReport:
    """Build a :class:`MetricReport`.

    ``offset`` > 0 drops the first ``offset`` estimate samples and the last
    ``offset`` reference samples before comparison (the estimate lags the
    reference by a known integer amount); there is no alignment search.
    ``spectra``, when given, is an (estimate, reference) spectrogram pair
    for the RI+magnitude loss; otherwise that loss is computed on the
    loss-STFT spectra of the (aligned) signals.
    """
    est = np.asarray(estimate, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset}")
    if offset:
        est = est[offset:]
        ref = ref[: len(est)]
    window, params = loss_stft if loss_stft is not None else default_loss_stft()
    if spectra is None:
        spectra = (analyze(est, window, params), analyze(ref, window, params))
    return MetricReport(
        si_sdr_db=si_sdr(est, ref),
        ri_mag_loss=ri_mag_loss(*spectra),
        ri_mag_loss_mean=ri_mag_loss(*spectra, reduce="mean"),
        wav_mag_loss=wav_mag_loss(est, ref, (window, params)),
        wav_mag_loss_mean=wav_mag_loss(est, ref, (window, params), reduce="mean"),
        n_samples=len(est),
        alignment_offset=offset,
    )
