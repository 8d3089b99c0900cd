"""End-to-end differential-testing pipeline.

Per test case: synthesize (or reuse cached) TTS audio for an utterance,
transcribe it with the ASR under test plus cross-reference ASRs, transcribe
the human audio when available, classify the outcome, and decide the
false-alarm status. Results append to a crash-safe JSONL store so interrupted
runs resume where they stopped.
"""
from __future__ import annotations

import concurrent.futures
import datetime
import enum
import hashlib
import json
import os
import shutil
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import metrics, textnorm
from .engines import EngineDescriptor, EngineFailure, synthesize, transcribe
from .metrics import WerBreakdown

__all__ = [
    "Utterance",
    "CaseOutcome",
    "FalseAlarmStatus",
    "TestCaseResult",
    "ResultsStore",
    "AudioCache",
    "RunSummary",
    "classify_crossasr",
    "determine_false_alarm",
    "run_case",
    "run_experiment",
    "aggregate",
    "audio_cache_key",
]


@dataclass(frozen=True)
class Utterance:
    id: str
    raw_text: str
    human_audio: Path | None = None

    @property
    def normalized(self) -> list[str]:
        return textnorm.normalize_text(self.raw_text)


class CaseOutcome(str, enum.Enum):
    SUCCESS = "success"
    FAILED = "failed"
    INDETERMINABLE = "indeterminable"
    ENGINE_ERROR = "engine_error"


class FalseAlarmStatus(str, enum.Enum):
    NOT_APPLICABLE = "not_applicable"
    POTENTIAL_UNCONFIRMED = "potential_unconfirmed"
    CONFIRMED = "confirmed"


def classify_crossasr(
    under_test_correct: bool, others_correct: list[bool]
) -> CaseOutcome:
    """Outcome class of one differential test case.

    Success when the ASR under test matches the ground truth; failed when it
    does not but some cross-reference ASR does; indeterminable when every ASR
    is wrong (the audio itself is suspect).
    """
    if not others_correct:
        raise ValueError("at least one cross-reference ASR is required")
    if under_test_correct:
        return CaseOutcome.SUCCESS
    if any(others_correct):
        return CaseOutcome.FAILED
    return CaseOutcome.INDETERMINABLE


def determine_false_alarm(
    human_correct: bool,
    tts_correct: bool,
    others_tts_correct: list[bool],
    min_other_failures: int = 1,
) -> FalseAlarmStatus:
    """False-alarm status of a failed synthetic test case.

    A case is a potential false alarm only when the ASR under test transcribes
    the human audio correctly but the TTS audio incorrectly; it is confirmed
    when at least `min_other_failures` cross-reference ASRs also fail on the
    same TTS audio.
    """
    if not others_tts_correct:
        raise ValueError("at least one cross-reference ASR is required")
    if not human_correct or tts_correct:
        return FalseAlarmStatus.NOT_APPLICABLE
    other_failures = sum(1 for ok in others_tts_correct if not ok)
    if other_failures >= min_other_failures:
        return FalseAlarmStatus.CONFIRMED
    return FalseAlarmStatus.POTENTIAL_UNCONFIRMED


def audio_cache_key(tts_id: str, raw_text: str) -> str:
    """Stable content hash of (TTS id, normalized text)."""
    normalized = " ".join(textnorm.normalize_text(raw_text))
    payload = tts_id.encode("utf-8") + b"\x00" + normalized.encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def _breakdown_to_json(b: WerBreakdown | None) -> dict | None:
    if b is None:
        return None
    return {
        "insertions": b.insertions,
        "deletions": b.deletions,
        "substitutions": b.substitutions,
        "reference_length": b.reference_length,
    }


def _breakdown_from_json(d: dict | None) -> WerBreakdown | None:
    if d is None:
        return None
    return WerBreakdown(
        d["insertions"], d["deletions"], d["substitutions"], d["reference_length"]
    )


@dataclass(frozen=True)
class TestCaseResult:
    __test__ = False  # keep pytest from collecting this as a test class

    utterance_id: str
    tts_id: str
    asr_under_test: str
    cross_ref_ids: tuple[str, ...]
    # per-ASR breakdown of the TTS-audio transcription (None on engine error)
    tts_breakdowns: dict[str, WerBreakdown | None]
    # under-test breakdown on human audio, when human audio exists
    human_breakdown: WerBreakdown | None
    outcome: CaseOutcome
    fa_status: FalseAlarmStatus
    started_at: str
    finished_at: str

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.utterance_id, self.tts_id, self.asr_under_test)

    def to_json(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "tts_id": self.tts_id,
            "asr_under_test": self.asr_under_test,
            "cross_ref_ids": list(self.cross_ref_ids),
            "tts_breakdowns": {
                k: _breakdown_to_json(v) for k, v in self.tts_breakdowns.items()
            },
            "human_breakdown": _breakdown_to_json(self.human_breakdown),
            "outcome": self.outcome.value,
            "fa_status": self.fa_status.value,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TestCaseResult":
        return cls(
            utterance_id=d["utterance_id"],
            tts_id=d["tts_id"],
            asr_under_test=d["asr_under_test"],
            cross_ref_ids=tuple(d["cross_ref_ids"]),
            tts_breakdowns={
                k: _breakdown_from_json(v) for k, v in d["tts_breakdowns"].items()
            },
            human_breakdown=_breakdown_from_json(d["human_breakdown"]),
            outcome=CaseOutcome(d["outcome"]),
            fa_status=FalseAlarmStatus(d["fa_status"]),
            started_at=d["started_at"],
            finished_at=d["finished_at"],
        )

    def rederive(self, min_other_failures: int = 1) -> tuple[CaseOutcome, FalseAlarmStatus]:
        """Recompute outcome and false-alarm status from the stored breakdowns."""
        if self.outcome is CaseOutcome.ENGINE_ERROR:
            return CaseOutcome.ENGINE_ERROR, FalseAlarmStatus.NOT_APPLICABLE
        under = self.tts_breakdowns[self.asr_under_test]
        others = [self.tts_breakdowns[i] for i in self.cross_ref_ids]
        under_ok = under is not None and under.errors == 0
        others_ok = [b is not None and b.errors == 0 for b in others]
        outcome = classify_crossasr(under_ok, others_ok)
        if self.human_breakdown is None:
            return outcome, FalseAlarmStatus.NOT_APPLICABLE
        fa = determine_false_alarm(
            self.human_breakdown.errors == 0, under_ok, others_ok, min_other_failures
        )
        return outcome, fa


class ResultsStore:
    """Append-only JSONL store of test-case results, safe to resume from."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._keys: set[tuple[str, str, str]] = set()
        self._results: list[TestCaseResult] = []
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                result = TestCaseResult.from_json(json.loads(line))
                self._keys.add(result.key)
                self._results.append(result)

    def __contains__(self, key: tuple[str, str, str]) -> bool:
        return key in self._keys

    def __len__(self) -> int:
        return len(self._results)

    def append(self, result: TestCaseResult) -> None:
        line = json.dumps(result.to_json(), ensure_ascii=False, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line + "\n")
                f.flush()
                os.fsync(f.fileno())
            self._keys.add(result.key)
            self._results.append(result)

    def results(self) -> list[TestCaseResult]:
        return list(self._results)


class AudioCache:
    """Synthesized-audio cache: `<cache>/<tts-id>/<hash>.wav` plus `.meta`
    sidecars for mocks. Writes go through create-then-rename so concurrent
    writers of the same key are safe."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, tts_id: str, raw_text: str) -> Path:
        return self.root / tts_id / f"{audio_cache_key(tts_id, raw_text)}.wav"

    def get_or_synthesize(
        self, tts: EngineDescriptor, utterance: Utterance
    ) -> Path:
        final = self.path_for(tts.id, utterance.raw_text)
        if final.exists():
            return final
        final.parent.mkdir(parents=True, exist_ok=True)
        tmpdir = tempfile.mkdtemp(dir=final.parent)
        try:
            tmp_wav = Path(tmpdir) / final.name
            synthesize(tts, utterance.raw_text, tmp_wav, utterance.id)
            tmp_meta = Path(str(tmp_wav) + ".meta")
            if tmp_meta.exists():
                os.replace(tmp_meta, str(final) + ".meta")
            os.replace(tmp_wav, final)
        finally:
            shutil.rmtree(tmpdir, ignore_errors=True)
        return final


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _transcribe_breakdown(
    asr: EngineDescriptor, audio: Path, reference: list[str]
) -> WerBreakdown | None:
    """Breakdown of one transcription; None when the engine fails."""
    try:
        raw = transcribe(asr, audio)
    except EngineFailure:
        return None
    hypothesis = textnorm.normalize_text(raw)
    return metrics.align(reference, hypothesis)


def run_case(
    utterance: Utterance,
    tts: EngineDescriptor,
    under_test: EngineDescriptor,
    cross_refs: list[EngineDescriptor],
    cache: AudioCache,
    store: ResultsStore,
    min_other_failures: int = 1,
) -> TestCaseResult:
    """Execute one (utterance, TTS, ASR-under-test) test case and record it."""
    if not cross_refs:
        raise ValueError("at least one cross-reference ASR is required")
    if any(c.id == under_test.id for c in cross_refs):
        raise ValueError("cross-reference pool must exclude the ASR under test")
    reference = utterance.normalized
    if not reference:
        raise ValueError(f"utterance {utterance.id} normalizes to empty text")

    started = _now()
    cross_ids = tuple(c.id for c in cross_refs)
    tts_breakdowns: dict[str, WerBreakdown | None] = {}
    human_breakdown: WerBreakdown | None = None

    try:
        audio = cache.get_or_synthesize(tts, utterance)
    except EngineFailure:
        result = TestCaseResult(
            utterance_id=utterance.id,
            tts_id=tts.id,
            asr_under_test=under_test.id,
            cross_ref_ids=cross_ids,
            tts_breakdowns={a.id: None for a in [under_test, *cross_refs]},
            human_breakdown=None,
            outcome=CaseOutcome.ENGINE_ERROR,
            fa_status=FalseAlarmStatus.NOT_APPLICABLE,
            started_at=started,
            finished_at=_now(),
        )
        store.append(result)
        return result

    for asr in [under_test, *cross_refs]:
        tts_breakdowns[asr.id] = _transcribe_breakdown(asr, audio, reference)
    if utterance.human_audio is not None:
        human_breakdown = _transcribe_breakdown(
            under_test, utterance.human_audio, reference
        )

    under = tts_breakdowns[under_test.id]
    others = [tts_breakdowns[i] for i in cross_ids]
    # any engine failing inside the case marks the whole case as an engine
    # error; the partial breakdowns are still stored
    engine_error = under is None or any(b is None for b in others)
    if utterance.human_audio is not None and human_breakdown is None:
        engine_error = True

    if engine_error:
        outcome = CaseOutcome.ENGINE_ERROR
        fa_status = FalseAlarmStatus.NOT_APPLICABLE
    else:
        under_ok = under.errors == 0
        others_ok = [b.errors == 0 for b in others]
        outcome = classify_crossasr(under_ok, others_ok)
        if human_breakdown is None:
            fa_status = FalseAlarmStatus.NOT_APPLICABLE
        else:
            fa_status = determine_false_alarm(
                human_breakdown.errors == 0, under_ok, others_ok, min_other_failures
            )

    result = TestCaseResult(
        utterance_id=utterance.id,
        tts_id=tts.id,
        asr_under_test=under_test.id,
        cross_ref_ids=cross_ids,
        tts_breakdowns=tts_breakdowns,
        human_breakdown=human_breakdown,
        outcome=outcome,
        fa_status=fa_status,
        started_at=started,
        finished_at=_now(),
    )
    store.append(result)
    return result


def run_experiment(
    utterances: list[Utterance],
    tts_engines: list[EngineDescriptor],
    under_test: EngineDescriptor,
    cross_refs: list[EngineDescriptor],
    cache: AudioCache,
    store: ResultsStore,
    jobs: int = 1,
    min_other_failures: int = 1,
) -> list[TestCaseResult]:
    """Run every missing (utterance, TTS) pair; already-stored cases are
    skipped, which makes interrupted runs resumable."""
    pending = [
        (u, t)
        for t in tts_engines
        for u in utterances
        if (u.id, t.id, under_test.id) not in store
    ]
    if jobs <= 1:
        for u, t in pending:
            run_case(u, t, under_test, cross_refs, cache, store, min_other_failures)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(
                    run_case, u, t, under_test, cross_refs, cache, store,
                    min_other_failures,
                )
                for u, t in pending
            ]
            for fut in futures:
                fut.result()
    return store.results()


@dataclass
class RunSummary:
    """Per-(TTS, ASR-under-test) aggregates plus grand totals."""

    cells: list[dict] = field(default_factory=list)
    totals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"cells": self.cells, "totals": self.totals}


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def _pooled(breakdowns: list[WerBreakdown]) -> float | None:
    n = sum(b.reference_length for b in breakdowns)
    return sum(b.errors for b in breakdowns) / n if n else None


def aggregate(results: list[TestCaseResult]) -> RunSummary:
    """Aggregate per-case results into per-(TTS, ASR) report cells.

    Engine-error cases are excluded from false-alarm rate denominators. Mean
    WER is the per-utterance mean; the corpus-pooled WER (total errors over
    total reference words) is also reported for comparison.
    """
    groups: dict[tuple[str, str], list[TestCaseResult]] = {}
    for r in results:
        groups.setdefault((r.tts_id, r.asr_under_test), []).append(r)

    summary = RunSummary()
    total_counts = {o.value: 0 for o in CaseOutcome}
    total_fa = 0
    total_executed = 0
    for (tts_id, asr_id), rs in sorted(groups.items()):
        counts = {o.value: 0 for o in CaseOutcome}
        for r in rs:
            counts[r.outcome.value] += 1
        confirmed = sum(1 for r in rs if r.fa_status is FalseAlarmStatus.CONFIRMED)
        executed = len(rs)
        denom = executed - counts[CaseOutcome.ENGINE_ERROR.value]
        tts_wers = [
            float(metrics.wer(r.tts_breakdowns[asr_id]))
            for r in rs
            if r.tts_breakdowns.get(asr_id) is not None
        ]
        tts_bds = [
            r.tts_breakdowns[asr_id]
            for r in rs
            if r.tts_breakdowns.get(asr_id) is not None
        ]
        human_wers = [
            float(metrics.wer(r.human_breakdown))
            for r in rs
            if r.human_breakdown is not None
        ]
        human_bds = [r.human_breakdown for r in rs if r.human_breakdown is not None]
        summary.cells.append(
            {
                "tts_id": tts_id,
                "asr_under_test": asr_id,
                "executed": executed,
                "outcome_counts": counts,
                "false_alarms": confirmed,
                "false_alarm_rate": confirmed / denom if denom else 0.0,
                "mean_wer_tts": _mean(tts_wers),
                "pooled_wer_tts": _pooled(tts_bds),
                "mean_wer_human": _mean(human_wers),
                "pooled_wer_human": _pooled(human_bds),
            }
        )
        for k, v in counts.items():
            total_counts[k] += v
        total_fa += confirmed
        total_executed += executed

    denom = total_executed - total_counts[CaseOutcome.ENGINE_ERROR.value]
    summary.totals = {
        "executed": total_executed,
        "outcome_counts": total_counts,
        "false_alarms": total_fa,
        "false_alarm_rate": total_fa / denom if denom else 0.0,
    }
    return summary
