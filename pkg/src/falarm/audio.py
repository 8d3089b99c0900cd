"""PCM WAV decode/encode and standardization to the transcription format
(16 kHz, 8-bit, mono)."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AudioClip",
    "WavFormatError",
    "read_wav",
    "write_wav",
    "standardize",
    "TARGET_RATE",
    "TARGET_DEPTH",
]

TARGET_RATE = 16_000
TARGET_DEPTH = 8

_SUPPORTED_DEPTHS = (8, 16, 24, 32)


class WavFormatError(ValueError):
    """Malformed or unsupported RIFF/WAVE data; carries a byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class AudioClip:
    """Decoded PCM audio: samples is (channels, n) float64 in [-1, 1]."""

    sample_rate: int
    bit_depth: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.bit_depth not in _SUPPORTED_DEPTHS:
            raise WavFormatError(f"unsupported bit depth {self.bit_depth}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise ValueError("samples must be a (channels, n) array")
        if samples.shape[0] < 1:
            raise ValueError("at least one channel required")
        if samples.size and (np.max(samples) > 1.0 or np.min(samples) < -1.0):
            raise ValueError("amplitudes must lie in [-1, 1]")
        object.__setattr__(self, "samples", samples)
        self.samples.setflags(write=False)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]


def _full_scale(bit_depth: int) -> float:
    return float(2 ** (bit_depth - 1))


def read_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE integer-PCM byte stream.

    8-bit data is unsigned with a 0x80 midpoint; wider depths are signed
    two's-complement little-endian. Both map onto [-1, 1].
    """
    if len(data) < 12 or data[0:4] != b"RIFF":
        raise WavFormatError("missing RIFF header", 0)
    if data[8:12] != b"WAVE":
        raise WavFormatError("not a WAVE container", 8)

    fmt = None
    pcm_bytes = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavFormatError("fmt chunk too short", pos)
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise WavFormatError("truncated data chunk", pos + 8)
            pcm_bytes = body
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise WavFormatError("missing fmt chunk", len(data))
    if pcm_bytes is None:
        raise WavFormatError("missing data chunk", len(data))

    audio_format, channels, sample_rate, _, block_align, bits = fmt
    if audio_format != 1:
        raise WavFormatError(f"non-PCM codec {audio_format}", 12)
    if bits not in _SUPPORTED_DEPTHS:
        raise WavFormatError(f"unsupported bit depth {bits}", 12)
    if channels < 1:
        raise WavFormatError("zero channels", 12)

    bytes_per_sample = bits // 8
    frame = bytes_per_sample * channels
    if block_align not in (0, frame):
        raise WavFormatError(f"block align {block_align} != {frame}", 12)
    if len(pcm_bytes) % frame:
        raise WavFormatError("data chunk not a whole number of frames", len(data))

    n = len(pcm_bytes) // frame
    if bits == 8:
        raw = np.frombuffer(pcm_bytes, dtype=np.uint8).astype(np.float64) - 128.0
    elif bits == 16:
        raw = np.frombuffer(pcm_bytes, dtype="<i2").astype(np.float64)
    elif bits == 32:
        raw = np.frombuffer(pcm_bytes, dtype="<i4").astype(np.float64)
    else:  # 24-bit: sign-extend three little-endian bytes
        b = np.frombuffer(pcm_bytes, dtype=np.uint8).reshape(-1, 3).astype(np.int64)
        vals = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
        raw = vals.astype(np.float64)

    samples = (raw / _full_scale(bits)).reshape(n, channels).T
    return AudioClip(sample_rate=sample_rate, bit_depth=bits, samples=samples)


def write_wav(clip: AudioClip) -> bytes:
    """Encode a clip as canonical RIFF/WAVE PCM; deterministic bytes."""
    bits = clip.bit_depth
    if bits not in _SUPPORTED_DEPTHS:
        raise WavFormatError(f"unsupported bit depth {bits}")
    scale = _full_scale(bits)
    interleaved = clip.samples.T.reshape(-1)
    quantized = np.clip(np.rint(interleaved * scale), -scale, scale - 1).astype(np.int64)
    if bits == 8:
        pcm = (quantized + 128).astype(np.uint8).tobytes()
    elif bits == 16:
        pcm = quantized.astype("<i2").tobytes()
    elif bits == 32:
        pcm = quantized.astype("<i4").tobytes()
    else:
        vals = np.where(quantized < 0, quantized + (1 << 24), quantized)
        out = np.empty((len(vals), 3), dtype=np.uint8)
        out[:, 0] = vals & 0xFF
        out[:, 1] = (vals >> 8) & 0xFF
        out[:, 2] = (vals >> 16) & 0xFF
        pcm = out.tobytes()

    channels = clip.channels
    byte_rate = clip.sample_rate * channels * bits // 8
    block_align = channels * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(pcm),
        b"WAVE",
        b"fmt ",
        16,
        1,
        channels,
        clip.sample_rate,
        byte_rate,
        block_align,
        bits,
        b"data",
        len(pcm),
    )
    body = header + pcm
    if len(pcm) & 1:
        body += b"\x00"
    return body


def _downmix(samples: np.ndarray) -> np.ndarray:
    if samples.shape[0] == 1:
        return samples
    return np.clip(samples.mean(axis=0, keepdims=True), -1.0, 1.0)


def _resample_linear(channel: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    if src_rate == dst_rate or channel.size == 0:
        return channel
    n = channel.size
    out_n = max(1, int(round(n * dst_rate / src_rate)))
    src_t = np.arange(n) / src_rate
    dst_t = np.arange(out_n) / dst_rate
    return np.interp(dst_t, src_t, channel)


def standardize(clip: AudioClip) -> AudioClip:
    """Convert to 16 kHz mono 8-bit-grid amplitudes; idempotent.

    Downmix is the channel mean; resampling is linear interpolation;
    quantization is round-to-nearest on the 256-level grid, no dither.
    """
    mono = _downmix(clip.samples)[0]
    resampled = _resample_linear(mono, clip.sample_rate, TARGET_RATE)
    scale = _full_scale(TARGET_DEPTH)
    quantized = np.clip(np.rint(resampled * scale), -scale, scale - 1) / scale
    return AudioClip(
        sample_rate=TARGET_RATE,
        bit_depth=TARGET_DEPTH,
        samples=quantized.reshape(1, -1),
    )
