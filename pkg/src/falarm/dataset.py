"""Corpus loaders: LJSpeech-style pipe-delimited metadata and a generic
tab-separated manifest for pre-converted corpora."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .pipeline import Utterance

__all__ = ["Corpus", "load_ljspeech", "load_manifest", "sample"]


@dataclass
class Corpus:
    utterances: list[Utterance] = field(default_factory=list)
    loaded: int = 0
    dropped: int = 0  # empty text or missing audio
    malformed: int = 0

    def __iter__(self):
        return iter(self.utterances)

    def __len__(self):
        return len(self.utterances)


def load_ljspeech(metadata_path: str | Path, wav_dir: str | Path) -> Corpus:
    """Load LJSpeech metadata: `id|transcription|normalized_transcription`.

    The normalized transcription is preferred when present. Entries with
    empty text or a missing WAV file are dropped and counted.
    """
    metadata_path = Path(metadata_path)
    wav_dir = Path(wav_dir)
    corpus = Corpus()
    seen: set[str] = set()
    for line in metadata_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.split("|")
        if len(parts) < 2 or not parts[0].strip():
            corpus.malformed += 1
            continue
        utt_id = parts[0].strip()
        if utt_id in seen:
            corpus.malformed += 1
            continue
        text = parts[2].strip() if len(parts) >= 3 and parts[2].strip() else parts[1].strip()
        wav = wav_dir / f"{utt_id}.wav"
        if not text or not wav.exists():
            corpus.dropped += 1
            continue
        seen.add(utt_id)
        corpus.utterances.append(Utterance(id=utt_id, raw_text=text, human_audio=wav))
        corpus.loaded += 1
    return corpus


def load_manifest(tsv_path: str | Path) -> Corpus:
    """Load a generic manifest: `id<TAB>audio_path<TAB>text` per line.

    An audio_path of `-` means no human audio (false-alarm status will be
    not-applicable for those utterances). Relative audio paths resolve
    against the manifest's directory. Duplicate ids are a load error.
    """
    tsv_path = Path(tsv_path)
    root = tsv_path.parent
    corpus = Corpus()
    seen: set[str] = set()
    for lineno, line in enumerate(
        tsv_path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            corpus.malformed += 1
            continue
        utt_id, audio_path, text = (p.strip() for p in parts)
        if utt_id in seen:
            raise ValueError(f"{tsv_path}:{lineno}: duplicate utterance id {utt_id!r}")
        seen.add(utt_id)
        if not text:
            corpus.dropped += 1
            continue
        human_audio: Path | None = None
        if audio_path != "-":
            human_audio = Path(audio_path)
            if not human_audio.is_absolute():
                human_audio = root / human_audio
            if not human_audio.exists():
                corpus.dropped += 1
                continue
        corpus.utterances.append(
            Utterance(id=utt_id, raw_text=text, human_audio=human_audio)
        )
        corpus.loaded += 1
    return corpus


def sample(corpus: Corpus, n: int, seed: int) -> Corpus:
    """Seeded uniform subsample of a corpus, order-stable for a given seed."""
    if n >= len(corpus.utterances):
        return corpus
    rng = random.Random(seed)
    chosen = rng.sample(corpus.utterances, n)
    return Corpus(
        utterances=chosen,
        loaded=len(chosen),
        dropped=corpus.dropped,
        malformed=corpus.malformed,
    )
