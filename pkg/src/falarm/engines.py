"""TTS/ASR engine adapters.

Engines are black boxes behind a fixed command protocol:

  TTS:  <cmd> --text-file <in.txt> --out <out.wav>       (exit 0 on success)
  ASR:  <cmd> --audio <in.wav>                            (transcript on stdout)

A deterministic in-process mock family covers pipeline testing without any
real engine: mock TTS writes a placeholder waveform plus a `.meta` sidecar
carrying the scripted transcription, and mock ASRs read the sidecar instead
of parsing audio. Real adapters ignore sidecars.
"""
from __future__ import annotations

import hashlib
import json
import os
import subprocess
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import AudioClip, read_wav, standardize, write_wav, TARGET_RATE

__all__ = [
    "EngineDescriptor",
    "EngineFailure",
    "load_registry",
    "synthesize",
    "transcribe",
    "mock_invocations",
    "reset_mock_invocations",
    "check_tts_conformance",
    "check_asr_conformance",
]

DEFAULT_TIMEOUT = 120.0

MOCK_BEHAVIORS = ("verbatim", "drop_suffix", "substitute", "garble")


class EngineFailure(RuntimeError):
    """An engine invocation failed; carries the engine id and diagnostics."""

    def __init__(self, engine_id: str, message: str, diagnostics: str = ""):
        super().__init__(f"engine {engine_id}: {message}")
        self.engine_id = engine_id
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class MockRule:
    """Scripted behavior for a mock engine, first match wins.

    utterance_id / source of None match anything; source is "tts" or "human".
    """

    behavior: str
    utterance_id: str | None = None
    source: str | None = None
    args: dict = field(default_factory=dict)

    def matches(self, utterance_id: str | None, source: str | None) -> bool:
        return (self.utterance_id is None or self.utterance_id == utterance_id) and (
            self.source is None or self.source == source
        )


@dataclass(frozen=True)
class EngineDescriptor:
    id: str
    kind: str  # "tts" | "asr"
    command: tuple[str, ...] | None = None
    mock: str | None = None
    script: tuple[MockRule, ...] = ()
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self):
        if self.kind not in ("tts", "asr"):
            raise ValueError(f"engine {self.id}: kind must be tts or asr")
        if (self.command is None) == (self.mock is None):
            raise ValueError(
                f"engine {self.id}: exactly one of command/mock is required"
            )
        if self.timeout <= 0:
            raise ValueError(f"engine {self.id}: timeout must be positive")
        if self.mock is not None and self.mock not in MOCK_BEHAVIORS:
            raise ValueError(f"engine {self.id}: unknown mock behavior {self.mock}")

    @property
    def is_mock(self) -> bool:
        return self.mock is not None


def load_registry(path: str | Path) -> dict[str, EngineDescriptor]:
    """Load an engine registry from a JSON file: {"engines": [descriptor...]}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    registry: dict[str, EngineDescriptor] = {}
    for entry in raw["engines"]:
        rules = tuple(
            MockRule(
                behavior=r["behavior"],
                utterance_id=r.get("utterance_id"),
                source=r.get("source"),
                args=r.get("args", {}),
            )
            for r in entry.get("script", [])
        )
        desc = EngineDescriptor(
            id=entry["id"],
            kind=entry["kind"],
            command=tuple(entry["command"]) if "command" in entry else None,
            mock=entry.get("mock"),
            script=rules,
            timeout=entry.get("timeout", DEFAULT_TIMEOUT),
        )
        if desc.id in registry:
            raise ValueError(f"duplicate engine id {desc.id!r} in {path}")
        registry[desc.id] = desc
    return registry


# --- mock behaviors -------------------------------------------------------

_invocations: Counter = Counter()


def mock_invocations(engine_id: str, op: str) -> int:
    return _invocations[(engine_id, op)]


def reset_mock_invocations() -> None:
    _invocations.clear()


def _drop_suffixes(text: str) -> str:
    words = []
    for w in text.split():
        for suffix in ("ing", "ed", "s"):
            if w.endswith(suffix) and len(w) - len(suffix) >= 3:
                w = w[: -len(suffix)]
                break
        words.append(w)
    return " ".join(words)


def _garble(text: str) -> str:
    # rotate each word one letter; doubles single letters, so the output is
    # always different from the input and still deterministic
    return " ".join(w[1:] + w[0] if len(w) > 1 else w + w for w in text.split())


def _apply_behavior(behavior: str, args: dict, text: str) -> str:
    if behavior == "verbatim":
        return text
    if behavior == "drop_suffix":
        return _drop_suffixes(text)
    if behavior == "substitute":
        return " ".join(
            args["to"] if w == args["from"] else w for w in text.split()
        )
    if behavior == "garble":
        return _garble(text)
    raise ValueError(f"unknown mock behavior {behavior}")


def _select_behavior(
    engine: EngineDescriptor, utterance_id: str | None, source: str | None
) -> tuple[str, dict]:
    for rule in engine.script:
        if rule.matches(utterance_id, source):
            return rule.behavior, rule.args
    return engine.mock or "verbatim", {}


def _placeholder_waveform(text: str) -> AudioClip:
    # short deterministic tone derived from the text hash; content is
    # irrelevant because mock ASRs read the sidecar
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    freq = 200 + digest[0] * 4
    t = np.arange(TARGET_RATE // 10) / TARGET_RATE
    samples = 0.5 * np.sin(2 * np.pi * freq * t)
    return standardize(AudioClip(TARGET_RATE, 16, samples.reshape(1, -1)))


def write_mock_audio(
    out_path: str | Path,
    transcript: str,
    utterance_id: str | None = None,
    source: str = "tts",
) -> None:
    """Write a mock WAV plus the `.meta` sidecar mock ASRs read."""
    out_path = Path(out_path)
    out_path.write_bytes(write_wav(_placeholder_waveform(transcript)))
    sidecar = {
        "transcript": transcript,
        "utterance_id": utterance_id,
        "source": source,
    }
    Path(str(out_path) + ".meta").write_text(
        json.dumps(sidecar, ensure_ascii=False, sort_keys=True), encoding="utf-8"
    )


def _adapter_tmpdir() -> str | None:
    return os.environ.get("FA_ADAPTER_TMPDIR") or None


# --- public operations ----------------------------------------------------


def synthesize(
    engine: EngineDescriptor,
    text: str,
    out_path: str | Path,
    utterance_id: str | None = None,
) -> Path:
    """Synthesize `text` to a standardized WAV at `out_path`."""
    if engine.kind != "tts":
        raise ValueError(f"engine {engine.id} is not a TTS engine")
    if not text:
        raise ValueError("text must be nonempty")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    if engine.is_mock:
        _invocations[(engine.id, "synthesize")] += 1
        behavior, args = _select_behavior(engine, utterance_id, "tts")
        scripted = _apply_behavior(behavior, args, text)
        write_mock_audio(out_path, scripted, utterance_id, source="tts")
        return out_path

    with tempfile.NamedTemporaryFile(
        "w", suffix=".txt", dir=_adapter_tmpdir(), encoding="utf-8", delete=False
    ) as f:
        f.write(text)
        text_file = f.name
    try:
        _run_adapter(
            engine,
            list(engine.command) + ["--text-file", text_file, "--out", str(out_path)],
            cleanup=out_path,
        )
    finally:
        os.unlink(text_file)
    if not out_path.exists():
        raise EngineFailure(engine.id, f"adapter produced no file at {out_path}")
    try:
        clip = read_wav(out_path.read_bytes())
    except Exception as exc:
        out_path.unlink(missing_ok=True)
        raise EngineFailure(engine.id, f"adapter output is not valid WAV: {exc}")
    std = standardize(clip)
    if std.samples.shape != clip.samples.shape or not np.array_equal(
        std.samples, clip.samples
    ):
        out_path.write_bytes(write_wav(std))
    return out_path


def transcribe(engine: EngineDescriptor, audio_path: str | Path) -> str:
    """Transcribe a WAV file; returns the raw transcription (may be empty)."""
    if engine.kind != "asr":
        raise ValueError(f"engine {engine.id} is not an ASR engine")
    audio_path = Path(audio_path)
    if not audio_path.exists():
        raise EngineFailure(engine.id, f"audio file missing: {audio_path}")

    if engine.is_mock:
        _invocations[(engine.id, "transcribe")] += 1
        sidecar_path = Path(str(audio_path) + ".meta")
        if not sidecar_path.exists():
            raise EngineFailure(
                engine.id, f"mock ASR requires a sidecar next to {audio_path}"
            )
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        behavior, args = _select_behavior(
            engine, sidecar.get("utterance_id"), sidecar.get("source")
        )
        return _apply_behavior(behavior, args, sidecar["transcript"])

    result = _run_adapter(engine, list(engine.command) + ["--audio", str(audio_path)])
    return result.stdout.decode("utf-8").rstrip("\n")


def _run_adapter(
    engine: EngineDescriptor, argv: list[str], cleanup: Path | None = None
) -> subprocess.CompletedProcess:
    try:
        result = subprocess.run(
            argv, capture_output=True, timeout=engine.timeout, check=False
        )
    except subprocess.TimeoutExpired:
        if cleanup is not None:
            cleanup.unlink(missing_ok=True)
        raise EngineFailure(engine.id, f"timed out after {engine.timeout}s")
    except OSError as exc:
        if cleanup is not None:
            cleanup.unlink(missing_ok=True)
        raise EngineFailure(engine.id, f"cannot launch adapter: {exc}")
    if result.returncode != 0:
        if cleanup is not None:
            cleanup.unlink(missing_ok=True)
        raise EngineFailure(
            engine.id,
            f"adapter exited with {result.returncode}",
            diagnostics=result.stderr.decode("utf-8", "replace"),
        )
    return result


# --- protocol conformance -------------------------------------------------


def check_tts_conformance(engine: EngineDescriptor, workdir: str | Path) -> None:
    """Raise EngineFailure/AssertionError if a TTS adapter violates the protocol."""
    workdir = Path(workdir)
    out = workdir / "conformance_tts.wav"
    synthesize(engine, "hello world", out, utterance_id="conformance")
    clip = read_wav(out.read_bytes())
    std = standardize(clip)
    assert clip.sample_rate == std.sample_rate, "output not at 16 kHz"
    assert clip.channels == 1, "output not mono"
    assert np.array_equal(clip.samples, std.samples), "output not standardized"


def check_asr_conformance(
    engine: EngineDescriptor, workdir: str | Path, tts: EngineDescriptor
) -> None:
    """Check an ASR adapter returns a transcription for a synthesized WAV."""
    workdir = Path(workdir)
    wav = workdir / "conformance_asr.wav"
    synthesize(tts, "hello world", wav, utterance_id="conformance")
    text = transcribe(engine, wav)
    assert isinstance(text, str)
