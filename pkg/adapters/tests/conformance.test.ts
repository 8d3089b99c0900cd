/**
 * Cross-language check: the TS mock adapter must pass the Python harness's
 * protocol conformance suite, and converter manifests must load through the
 * harness's manifest loader. Skipped when the Python package is not
 * importable in this environment.
 */
import { spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { encodeWav, placeholderTone } from "../dist/wav.js";

const ADAPTER = join(__dirname, "..", "dist", "mockAdapter.js");

function python(code: string) {
  return spawnSync("python3", ["-c", code], { encoding: "utf-8" });
}

const harnessAvailable = python("import falarm").status === 0;

describe.skipIf(!harnessAvailable)("python harness conformance", () => {
  it("TS adapter passes the TTS and ASR conformance checks", () => {
    const workdir = mkdtempSync(join(tmpdir(), "falarm-conf-"));
    const result = python(
      `
import json
from falarm.engines import (
    EngineDescriptor, check_asr_conformance, check_tts_conformance,
)
tts = EngineDescriptor(id="ts-tts", kind="tts",
                       command=("node", ${JSON.stringify(ADAPTER)}))
asr = EngineDescriptor(id="ts-asr", kind="asr",
                       command=("node", ${JSON.stringify(ADAPTER)}))
check_tts_conformance(tts, ${JSON.stringify("WORKDIR")})
check_asr_conformance(asr, ${JSON.stringify("WORKDIR")}, tts)
print("conformance ok")
`.replaceAll('"WORKDIR"', JSON.stringify(workdir)),
    );
    expect(result.stderr).toBe("");
    expect(result.status).toBe(0);
    expect(result.stdout).toContain("conformance ok");
  });

  it("TS-written WAVs decode with the harness reader", () => {
    const dir = mkdtempSync(join(tmpdir(), "falarm-wav-"));
    const wavPath = join(dir, "tone.wav");
    writeFileSync(wavPath, encodeWav(placeholderTone("cross language")));
    const result = python(
      `
from falarm.audio import read_wav, standardize
import numpy as np
clip = read_wav(open(${JSON.stringify(wavPath)}, "rb").read())
assert clip.sample_rate == 16000 and clip.channels == 1
assert clip.bit_depth == 8
std = standardize(clip)
assert np.array_equal(std.samples, clip.samples), "not standardized"
print("wav ok")
`,
    );
    expect(result.stderr).toBe("");
    expect(result.status).toBe(0);
  });

  it("converter-style manifests round-trip through load_manifest", () => {
    const dir = mkdtempSync(join(tmpdir(), "falarm-manifest-"));
    writeFileSync(join(dir, "utt-0001.wav"), encodeWav(placeholderTone("a")));
    writeFileSync(join(dir, "utt-0002.wav"), encodeWav(placeholderTone("b")));
    writeFileSync(
      join(dir, "manifest.tsv"),
      "utt-0001\tutt-0001.wav\tA SHORT TEST SENTENCE\n" +
        "utt-0002\tutt-0002.wav\tANOTHER ONE ENTIRELY\n",
    );
    const result = python(
      `
from falarm.dataset import load_manifest
corpus = load_manifest(${JSON.stringify(join(dir, "manifest.tsv"))})
assert corpus.loaded == 2 and corpus.dropped == 0 and corpus.malformed == 0
ids = [u.id for u in corpus]
assert ids == ["utt-0001", "utt-0002"], ids
assert corpus.utterances[0].human_audio.exists()
print("manifest ok")
`,
    );
    expect(result.stderr).toBe("");
    expect(result.status).toBe(0);
  });
});
