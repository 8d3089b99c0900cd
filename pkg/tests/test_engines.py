import json
import sys

import numpy as np
import pytest

from falarm.audio import TARGET_DEPTH, TARGET_RATE, read_wav, standardize
from falarm.engines import (
    EngineDescriptor,
    EngineFailure,
    MockRule,
    _apply_behavior,
    check_asr_conformance,
    check_tts_conformance,
    load_registry,
    mock_invocations,
    reset_mock_invocations,
    synthesize,
    transcribe,
    write_mock_audio,
)

REF_ADAPTER = (sys.executable, "-m", "falarm.refadapter")


def ref_engine(kind, engine_id="ref", timeout=30.0):
    return EngineDescriptor(
        id=engine_id, kind=kind, command=REF_ADAPTER, timeout=timeout
    )


class TestDescriptor:
    def test_command_xor_mock(self):
        with pytest.raises(ValueError):
            EngineDescriptor(id="x", kind="tts")
        with pytest.raises(ValueError):
            EngineDescriptor(id="x", kind="tts", command=("a",), mock="verbatim")

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            EngineDescriptor(id="x", kind="stt", mock="verbatim")

    def test_bad_behavior(self):
        with pytest.raises(ValueError):
            EngineDescriptor(id="x", kind="asr", mock="shuffle")

    def test_bad_timeout(self):
        with pytest.raises(ValueError):
            EngineDescriptor(id="x", kind="asr", mock="verbatim", timeout=0)


class TestRegistry:
    def test_load(self, tmp_path):
        path = tmp_path / "engines.json"
        path.write_text(json.dumps({
            "engines": [
                {"id": "t1", "kind": "tts", "mock": "verbatim"},
                {"id": "a1", "kind": "asr", "mock": "drop_suffix",
                 "script": [{"behavior": "verbatim", "utterance_id": "u1"}]},
                {"id": "ext", "kind": "asr", "command": ["asr-cmd", "--flag"],
                 "timeout": 10},
            ]
        }))
        reg = load_registry(path)
        assert set(reg) == {"t1", "a1", "ext"}
        assert reg["a1"].script[0].utterance_id == "u1"
        assert reg["ext"].command == ("asr-cmd", "--flag")
        assert reg["ext"].timeout == 10

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "engines.json"
        path.write_text(json.dumps({"engines": [
            {"id": "a", "kind": "tts", "mock": "verbatim"},
            {"id": "a", "kind": "asr", "mock": "verbatim"},
        ]}))
        with pytest.raises(ValueError):
            load_registry(path)


class TestMockBehaviors:
    def test_verbatim(self):
        assert _apply_behavior("verbatim", {}, "we asked him") == "we asked him"

    def test_drop_suffix(self):
        assert _apply_behavior("drop_suffix", {}, "we asked") == "we ask"
        assert _apply_behavior("drop_suffix", {}, "running dogs") == "runn dog"
        # too-short remainders survive: "sing" would leave "s"
        assert _apply_behavior("drop_suffix", {}, "sing as") == "sing as"

    def test_substitute(self):
        out = _apply_behavior(
            "substitute", {"from": "officers", "to": "offices"},
            "the officers left",
        )
        assert out == "the offices left"

    def test_garble_always_differs(self):
        for text in ("a", "ab", "hello world", "x y z"):
            out = _apply_behavior("garble", {}, text)
            assert out != text
            assert len(out.split()) == len(text.split())

    def test_garble_deterministic(self):
        assert _apply_behavior("garble", {}, "hello") == _apply_behavior(
            "garble", {}, "hello"
        )


class TestMockEngines:
    def test_synthesize_writes_standard_wav_and_sidecar(self, tmp_path):
        tts = EngineDescriptor(id="t", kind="tts", mock="verbatim")
        out = tmp_path / "u.wav"
        synthesize(tts, "hello there", out, utterance_id="u1")
        clip = read_wav(out.read_bytes())
        assert clip.sample_rate == TARGET_RATE
        assert clip.bit_depth == TARGET_DEPTH
        assert clip.channels == 1
        meta = json.loads((tmp_path / "u.wav.meta").read_text())
        assert meta == {
            "transcript": "hello there", "utterance_id": "u1", "source": "tts",
        }

    def test_transcribe_round_trip(self, tmp_path):
        tts = EngineDescriptor(id="t", kind="tts", mock="verbatim")
        asr = EngineDescriptor(id="a", kind="asr", mock="verbatim")
        out = tmp_path / "u.wav"
        synthesize(tts, "the quick fox", out, utterance_id="u1")
        assert transcribe(asr, out) == "the quick fox"

    def test_scripted_rule_takes_precedence(self, tmp_path):
        tts = EngineDescriptor(id="t", kind="tts", mock="verbatim")
        asr = EngineDescriptor(
            id="a", kind="asr", mock="verbatim",
            script=(MockRule(behavior="garble", utterance_id="u9", source="tts"),),
        )
        hit = tmp_path / "hit.wav"
        miss = tmp_path / "miss.wav"
        synthesize(tts, "some words", hit, utterance_id="u9")
        synthesize(tts, "some words", miss, utterance_id="u0")
        assert transcribe(asr, hit) != "some words"
        assert transcribe(asr, miss) == "some words"

    def test_rule_source_filter(self, tmp_path):
        asr = EngineDescriptor(
            id="a", kind="asr", mock="verbatim",
            script=(MockRule(behavior="garble", source="tts"),),
        )
        human = tmp_path / "h.wav"
        write_mock_audio(human, "clean words", "u1", source="human")
        assert transcribe(asr, human) == "clean words"

    def test_invocation_counters(self, tmp_path):
        reset_mock_invocations()
        tts = EngineDescriptor(id="ctr-t", kind="tts", mock="verbatim")
        asr = EngineDescriptor(id="ctr-a", kind="asr", mock="verbatim")
        out = tmp_path / "u.wav"
        synthesize(tts, "one", out)
        synthesize(tts, "two", tmp_path / "v.wav")
        transcribe(asr, out)
        assert mock_invocations("ctr-t", "synthesize") == 2
        assert mock_invocations("ctr-a", "transcribe") == 1

    def test_kind_mismatch(self, tmp_path):
        asr = EngineDescriptor(id="a", kind="asr", mock="verbatim")
        with pytest.raises(ValueError):
            synthesize(asr, "text", tmp_path / "x.wav")
        tts = EngineDescriptor(id="t", kind="tts", mock="verbatim")
        with pytest.raises(ValueError):
            transcribe(tts, tmp_path / "x.wav")

    def test_missing_audio(self):
        asr = EngineDescriptor(id="a", kind="asr", mock="verbatim")
        with pytest.raises(EngineFailure):
            transcribe(asr, "/nonexistent/file.wav")

    def test_empty_text_rejected(self, tmp_path):
        tts = EngineDescriptor(id="t", kind="tts", mock="verbatim")
        with pytest.raises(ValueError):
            synthesize(tts, "", tmp_path / "x.wav")


class TestExternalAdapters:
    def test_reference_adapter_round_trip(self, tmp_path):
        tts = ref_engine("tts")
        asr = ref_engine("asr")
        out = tmp_path / "u.wav"
        synthesize(tts, "external round trip", out)
        assert transcribe(asr, out) == "external round trip"

    def test_tts_conformance(self, tmp_path):
        check_tts_conformance(ref_engine("tts"), tmp_path)

    def test_asr_conformance(self, tmp_path):
        check_asr_conformance(ref_engine("asr"), tmp_path, ref_engine("tts"))

    def test_nonzero_exit_raises_with_diagnostics(self, tmp_path):
        # --audio on a file with no sidecar makes the adapter exit 1
        bogus = tmp_path / "nothing.wav"
        bogus.write_bytes(b"")
        asr = ref_engine("asr")
        with pytest.raises(EngineFailure) as e:
            transcribe(asr, bogus)
        assert "no sidecar" in e.value.diagnostics

    def test_unlaunchable_command(self, tmp_path):
        tts = EngineDescriptor(
            id="ghost", kind="tts", command=("/nonexistent/binary",)
        )
        with pytest.raises(EngineFailure):
            synthesize(tts, "hello", tmp_path / "x.wav")

    def test_timeout_enforced_and_partial_output_removed(self, tmp_path):
        script = tmp_path / "slow.py"
        script.write_text(
            "import sys, time\n"
            "out = sys.argv[sys.argv.index('--out') + 1]\n"
            "open(out, 'wb').write(b'partial')\n"
            "time.sleep(30)\n"
        )
        tts = EngineDescriptor(
            id="slow", kind="tts", command=(sys.executable, str(script)),
            timeout=1.0,
        )
        out = tmp_path / "u.wav"
        with pytest.raises(EngineFailure) as e:
            synthesize(tts, "hello", out)
        assert "timed out" in str(e.value)
        assert not out.exists()

    def test_invalid_wav_output_rejected(self, tmp_path):
        script = tmp_path / "bad.py"
        script.write_text(
            "import sys\n"
            "out = sys.argv[sys.argv.index('--out') + 1]\n"
            "open(out, 'wb').write(b'not a wav at all')\n"
        )
        tts = EngineDescriptor(
            id="bad", kind="tts", command=(sys.executable, str(script)),
        )
        out = tmp_path / "u.wav"
        with pytest.raises(EngineFailure):
            synthesize(tts, "hello", out)
        assert not out.exists()

    def test_nonstandard_output_gets_standardized(self, tmp_path):
        # adapter writes a 44.1 kHz stereo 16-bit WAV; synthesize must
        # rewrite it to 16 kHz mono 8-bit
        script = tmp_path / "hifi.py"
        script.write_text(
            "import sys, struct\n"
            "import numpy as np\n"
            "out = sys.argv[sys.argv.index('--out') + 1]\n"
            "t = np.arange(4410) / 44100\n"
            "x = (np.sin(2*np.pi*440*t) * 16000).astype('<i2')\n"
            "pcm = np.repeat(x, 2).tobytes()\n"
            "h = struct.pack('<4sI4s4sIHHIIHH4sI', b'RIFF', 36+len(pcm),\n"
            "    b'WAVE', b'fmt ', 16, 1, 2, 44100, 176400, 4, 16,\n"
            "    b'data', len(pcm))\n"
            "open(out, 'wb').write(h + pcm)\n"
        )
        tts = EngineDescriptor(
            id="hifi", kind="tts", command=(sys.executable, str(script)),
        )
        out = tmp_path / "u.wav"
        synthesize(tts, "hello", out)
        clip = read_wav(out.read_bytes())
        assert clip.sample_rate == TARGET_RATE
        assert clip.bit_depth == TARGET_DEPTH
        assert clip.channels == 1
        std = standardize(clip)
        assert np.array_equal(clip.samples, std.samples)

    def test_missing_flag_exits_two(self, tmp_path):
        # calling the reference adapter with --text-file but no --out must
        # exit 2, which surfaces as an EngineFailure
        txt = tmp_path / "in.txt"
        txt.write_text("hello")
        import subprocess

        r = subprocess.run(
            list(REF_ADAPTER) + ["--text-file", str(txt)], capture_output=True
        )
        assert r.returncode == 2

    def test_version_manifest(self):
        import subprocess

        r = subprocess.run(
            list(REF_ADAPTER) + ["--version"], capture_output=True, text=True
        )
        assert r.returncode == 0
        manifest = json.loads(r.stdout)
        assert manifest["adapter"] == "falarm-reference"
