"""Pluggable frame-online target estimators.

These stand in for the trained networks of a two-stage enhancement system:
each estimator consumes the current mixture frame (plus, in stage 2, the
stage-1 estimate and the beamformed frame) and produces an estimate of the
target spectrum at the reference channel for frame ``t + frames_ahead``.

Oracle estimators are deliberately clairvoyant: they are bound to
spectrograms of the clean reference (and, for the magnitude mask, of the
mixture reference channel) computed with the identical analysis framing as
the live stream, so they exercise the exact dual-window signal path while
providing performance ceilings. The ``external`` kind delegates to a child
process speaking a synchronous one-frame-in/one-frame-out stdio protocol,
which is the extension point for real models.

External protocol: after spawn, the parent writes one ASCII handshake line
``"<n_bins> <channels> <stage>\\n"``. Per frame it then writes a 4-byte
little-endian unsigned length followed by that many bytes of little-endian
float32 values, interleaved (re, im) per bin: the mixture frame
(channels * n_bins pairs, channel-major), and for stage 2 additionally the
stage-1 estimate (n_bins pairs) and the beamformed frame (n_bins pairs,
zeros when no beamformer runs). The child must reply with the same framing:
a 4-byte length then n_bins (re, im) float32 pairs for the estimate.
"""

from __future__ import annotations

import os
import select
import shlex
import struct
import subprocess
from dataclasses import dataclass

import numpy as np

from .framing import FrameParams

ESTIMATOR_KINDS = ("passthrough", "oracle_complex", "oracle_mag_mask", "file", "external")
PASSTHROUGH_SOURCES = ("mixture", "stage1", "beamformer")


class ExternalProtocolError(RuntimeError):
    """The external estimator child violated the frame protocol or timed out."""


@dataclass(frozen=True)
class EstimatorInput:
    """Everything a stage may look at for the current frame."""

    mixture: np.ndarray  # (channels, n_bins)
    stage1: np.ndarray | None = None  # (n_bins,), stage 2 only
    beamformed: np.ndarray | None = None  # (n_bins,), stage 2 only


@dataclass(frozen=True)
class EstimatorKind:
    """Declarative estimator selection, as written in configs.

    ``passthrough`` forwards one input unchanged (``source`` picks the
    mixture reference channel, the stage-1 estimate, or the beamformed
    frame); the oracle kinds need a clean reference bound at run time;
    ``file`` replays precomputed frames; ``external`` runs a child process.
    """

    kind: str
    channel: int = 0
    source: str = "mixture"
    path: str | None = None
    command: str | None = None
    mask_floor: float = 1e-8
    mask_clip: float = 5.0
    timeout: float = 10.0

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(
                f"unknown estimator kind {self.kind!r}, expected one of {ESTIMATOR_KINDS}"
            )
        if self.kind == "passthrough" and self.source not in PASSTHROUGH_SOURCES:
            raise ValueError(
                f"passthrough source must be one of {PASSTHROUGH_SOURCES}, "
                f"got {self.source!r}"
            )
        if self.kind == "file" and not self.path:
            raise ValueError("file estimator requires a path")
        if self.kind == "external" and not self.command:
            raise ValueError("external estimator requires a command")

    @property
    def is_oracle(self) -> bool:
        return self.kind in ("oracle_complex", "oracle_mag_mask")


class Estimator:
    """Session-bound estimator: maps (input, t) to the estimate at t + k."""

    def __init__(self, n_bins: int, frames_ahead: int):
        self.n_bins = n_bins
        self.frames_ahead = frames_ahead

    def _zeros(self) -> np.ndarray:
        return np.zeros(self.n_bins, dtype=np.complex128)

    def estimate(self, inp: EstimatorInput, t: int) -> np.ndarray:
        raise NotImplementedError

    def close(self):
        pass


class PassthroughEstimator(Estimator):
    """Identity stage: forwards current-frame input, zeros when asked to
    predict ahead (the future input is simply not available to it)."""

    def __init__(self, n_bins, frames_ahead, channel=0, source="mixture"):
        super().__init__(n_bins, frames_ahead)
        self.channel = channel
        self.source = source

    def estimate(self, inp, t):
        if self.frames_ahead != 0:
            return self._zeros()
        if self.source == "mixture":
            return np.asarray(inp.mixture[self.channel])
        picked = inp.stage1 if self.source == "stage1" else inp.beamformed
        if picked is None:
            raise ValueError(f"passthrough source {self.source!r} not present at this stage")
        return np.asarray(picked)


class OracleComplexEstimator(Estimator):
    """Returns the true reference spectrum at frame t + k."""

    def __init__(self, n_bins, frames_ahead, reference_frames):
        super().__init__(n_bins, frames_ahead)
        self.reference_frames = np.asarray(reference_frames)

    def estimate(self, inp, t):
        idx = t + self.frames_ahead
        if 0 <= idx < len(self.reference_frames):
            return self.reference_frames[idx]
        return self._zeros()


class OracleMagnitudeMaskEstimator(Estimator):
    """Scales the mixture reference channel by |S| / max(|Y|, floor).

    Keeps the mixture phase; the mask is clipped to [0, clip] so spectral
    nulls cannot blow the filter up.
    """

    def __init__(
        self, n_bins, frames_ahead, reference_frames, mixture_frames,
        floor=1e-8, clip=5.0,
    ):
        super().__init__(n_bins, frames_ahead)
        self.reference_frames = np.asarray(reference_frames)
        self.mixture_frames = np.asarray(mixture_frames)
        self.floor = floor
        self.clip = clip

    def estimate(self, inp, t):
        idx = t + self.frames_ahead
        if not (0 <= idx < len(self.reference_frames) and idx < len(self.mixture_frames)):
            return self._zeros()
        y = self.mixture_frames[idx]
        s = self.reference_frames[idx]
        mask = np.clip(np.abs(s) / np.maximum(np.abs(y), self.floor), 0.0, self.clip)
        return mask * y


class FileBackedEstimator(Estimator):
    """Replays frames from a file produced by :func:`save_frame_file`."""

    def __init__(self, n_bins, frames_ahead, frames):
        super().__init__(n_bins, frames_ahead)
        self.frames = np.asarray(frames)

    def estimate(self, inp, t):
        idx = t + self.frames_ahead
        if 0 <= idx < len(self.frames):
            return self.frames[idx]
        return self._zeros()


def save_frame_file(path, frames: np.ndarray, params: FrameParams):
    """Write an estimate spectrogram (T, n_bins) with its frame geometry."""
    frames = np.asarray(frames, dtype=np.complex128)
    np.savez(
        path,
        frames=frames,
        sample_rate=params.sample_rate,
        iws=params.iws,
        ows=params.ows,
        hop=params.hop,
        n_dft=params.n_dft,
    )


def load_frame_file(path, params: FrameParams, expected_frames: int | None = None) -> np.ndarray:
    """Load and validate a frame file against the pipeline geometry."""
    with np.load(path) as data:
        frames = np.asarray(data["frames"])
        stored = {k: int(data[k]) for k in ("sample_rate", "iws", "ows", "hop", "n_dft")}
    for key, value in stored.items():
        if value != getattr(params, key):
            raise ValueError(
                f"frame file {key}={value} does not match pipeline {key}="
                f"{getattr(params, key)}"
            )
    if frames.ndim != 2 or frames.shape[1] != params.n_bins:
        raise ValueError(
            f"frame file shape {frames.shape} does not match {params.n_bins} bins"
        )
    if expected_frames is not None and frames.shape[0] != expected_frames:
        raise ValueError(
            f"frame file holds {frames.shape[0]} frames, stream expects "
            f"{expected_frames}"
        )
    return frames


class ExternalEstimator(Estimator):
    """Child process speaking the stdio frame protocol (see module docs)."""

    def __init__(self, n_bins, frames_ahead, command, channels, stage, timeout=10.0):
        super().__init__(n_bins, frames_ahead)
        self.channels = channels
        self.stage = stage
        self.timeout = timeout
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        # unbuffered pipes: every byte is either consumed or still visible
        # to select(), so timeouts cannot fire with data in flight
        self._proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
        )
        self._write_all(f"{n_bins} {channels} {stage}\n".encode("ascii"))

    @staticmethod
    def _interleave(values: np.ndarray) -> bytes:
        flat = np.asarray(values, dtype=np.complex128).ravel()
        out = np.empty(2 * flat.size, dtype="<f4")
        out[0::2] = flat.real
        out[1::2] = flat.imag
        return out.tobytes()

    def _write_all(self, data: bytes):
        view = memoryview(data)
        try:
            while view:
                written = self._proc.stdin.write(view)
                view = view[written:]
        except (BrokenPipeError, ValueError) as exc:
            raise ExternalProtocolError(f"external estimator pipe closed: {exc}") from exc

    def _read_exact(self, n: int) -> bytes:
        fd = self._proc.stdout.fileno()
        chunks = []
        got = 0
        while got < n:
            ready, _, _ = select.select([fd], [], [], self.timeout)
            if not ready:
                raise ExternalProtocolError(
                    f"external estimator timed out after {self.timeout}s"
                )
            chunk = os.read(fd, n - got)
            if not chunk:
                raise ExternalProtocolError(
                    "external estimator closed its output mid-frame"
                )
            chunks.append(chunk)
            got += len(chunk)
        return b"".join(chunks)

    def estimate(self, inp, t):
        payload = self._interleave(inp.mixture)
        if self.stage == 2:
            stage1 = inp.stage1 if inp.stage1 is not None else self._zeros()
            beamformed = inp.beamformed if inp.beamformed is not None else self._zeros()
            payload += self._interleave(stage1) + self._interleave(beamformed)
        self._write_all(struct.pack("<I", len(payload)) + payload)
        (length,) = struct.unpack("<I", self._read_exact(4))
        expected = self.n_bins * 2 * 4
        if length != expected:
            raise ExternalProtocolError(
                f"external estimator replied {length} bytes, expected {expected}"
            )
        raw = np.frombuffer(self._read_exact(length), dtype="<f4")
        return (raw[0::2] + 1j * raw[1::2]).astype(np.complex128)

    def close(self):
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


def make_estimator(
    kind: EstimatorKind,
    params: FrameParams,
    frames_ahead: int,
    channels: int,
    stage: int,
    reference_frames: np.ndarray | None = None,
    mixture_ref_frames: np.ndarray | None = None,
    expected_frames: int | None = None,
) -> Estimator:
    """Bind a declarative :class:`EstimatorKind` to one streaming session."""
    n_bins = params.n_bins
    if kind.kind == "passthrough":
        if kind.channel >= channels:
            raise ValueError(
                f"passthrough channel {kind.channel} out of range for "
                f"{channels} channels"
            )
        return PassthroughEstimator(n_bins, frames_ahead, kind.channel, kind.source)
    if kind.is_oracle and reference_frames is None:
        raise ValueError(f"{kind.kind} estimator requires a reference signal")
    if kind.kind == "oracle_complex":
        return OracleComplexEstimator(n_bins, frames_ahead, reference_frames)
    if kind.kind == "oracle_mag_mask":
        if mixture_ref_frames is None:
            raise ValueError("oracle_mag_mask requires mixture reference-channel frames")
        return OracleMagnitudeMaskEstimator(
            n_bins, frames_ahead, reference_frames, mixture_ref_frames,
            kind.mask_floor, kind.mask_clip,
        )
    if kind.kind == "file":
        frames = load_frame_file(kind.path, params, expected_frames)
        return FileBackedEstimator(n_bins, frames_ahead, frames)
    return ExternalEstimator(
        n_bins, frames_ahead, kind.command, channels, stage, kind.timeout
    )
