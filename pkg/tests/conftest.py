"""Shared test oracles and fixtures.

The edit-distance oracles here are deliberately independent of the library's
alignment kernel: one enumerates edit scripts recursively, the other is a
plain quadratic DP with no tie-break logic.
"""
from __future__ import annotations

import itertools
from pathlib import Path

import pytest

from falarm.engines import EngineDescriptor, MockRule, write_mock_audio
from falarm.pipeline import Utterance


def brute_force_edit_distance(ref, hyp) -> int:
    """Minimal I+D+S by exhaustive edit-script enumeration (no DP)."""
    best = [len(ref) + len(hyp)]

    def recurse(i: int, j: int, cost: int) -> None:
        remaining = max(len(ref) - i, len(hyp) - j) - min(
            len(ref) - i, len(hyp) - j
        )
        if cost + remaining > best[0]:
            return
        if i == len(ref) and j == len(hyp):
            best[0] = min(best[0], cost)
            return
        if i < len(ref) and j < len(hyp):
            recurse(i + 1, j + 1, cost + (ref[i] != hyp[j]))
        if i < len(ref):
            recurse(i + 1, j, cost + 1)
        if j < len(hyp):
            recurse(i, j + 1, cost + 1)

    recurse(0, 0, 0)
    return best[0]


def reference_dp_distance(ref, hyp) -> int:
    """Independent textbook Levenshtein DP (distance only)."""
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i]
        for j, h in enumerate(hyp, start=1):
            cur.append(min(prev[j - 1] + (r != h), prev[j] + 1, cur[-1] + 1))
        prev = cur
    return prev[-1]


def all_sequences(alphabet: str, max_len: int):
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


def make_corpus_with_false_alarms(
    tmp_path: Path, total: int, confirmed: int
) -> tuple[list[Utterance], EngineDescriptor, EngineDescriptor, EngineDescriptor]:
    """Mock corpus engineered to contain exactly `confirmed` confirmed false
    alarms out of `total` executed cases (single TTS, one cross-ref ASR).

    The TTS garbles the scripted utterances, so both the ASR under test and
    the cross-reference ASR fail on TTS audio while human audio stays correct.
    """
    utterances = []
    for i in range(total):
        uid = f"u{i:03d}"
        text = f"sample utterance number {i}"
        human = tmp_path / "human" / f"{uid}.wav"
        human.parent.mkdir(parents=True, exist_ok=True)
        write_mock_audio(human, text, uid, source="human")
        utterances.append(Utterance(id=uid, raw_text=text, human_audio=human))
    rules = tuple(
        MockRule(behavior="garble", utterance_id=f"u{i:03d}", source="tts")
        for i in range(confirmed)
    )
    tts = EngineDescriptor(id="mock-tts", kind="tts", mock="verbatim", script=rules)
    under_test = EngineDescriptor(id="asr-under-test", kind="asr", mock="verbatim")
    cross_ref = EngineDescriptor(id="asr-cross", kind="asr", mock="verbatim")
    return utterances, tts, under_test, cross_ref


@pytest.fixture
def scripted_corpus(tmp_path):
    return make_corpus_with_false_alarms(tmp_path, total=100, confirmed=17)
