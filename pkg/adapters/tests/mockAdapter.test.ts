import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { decodeWav, encodeWav, placeholderTone, TARGET_RATE } from "../dist/wav.js";

const ADAPTER = join(__dirname, "..", "dist", "mockAdapter.js");

function run(args: string[]) {
  return spawnSync("node", [ADAPTER, ...args], { encoding: "utf-8" });
}

function freshDir(): string {
  return mkdtempSync(join(tmpdir(), "falarm-adapter-"));
}

describe("wav codec", () => {
  it("round-trips header fields", () => {
    const tone = placeholderTone("hello");
    const decoded = decodeWav(encodeWav(tone));
    expect(decoded.sampleRate).toBe(TARGET_RATE);
    expect(decoded.channels).toBe(1);
    expect(decoded.bitsPerSample).toBe(8);
    expect(Buffer.from(decoded.samples)).toEqual(Buffer.from(tone));
  });

  it("pads odd-length data to an even byte count", () => {
    const data = encodeWav(new Uint8Array([128, 128, 128]));
    expect(data.length % 2).toBe(0);
  });

  it("rejects garbage", () => {
    expect(() => decodeWav(Buffer.from("definitely not a wav file"))).toThrow();
  });
});

describe("mock adapter TTS role", () => {
  it("writes a valid 16 kHz mono 8-bit WAV plus sidecar", () => {
    const dir = freshDir();
    const textFile = join(dir, "in.txt");
    const outFile = join(dir, "out.wav");
    writeFileSync(textFile, "hello adapter world");
    const result = run(["--text-file", textFile, "--out", outFile]);
    expect(result.status).toBe(0);
    const wav = decodeWav(readFileSync(outFile));
    expect(wav.sampleRate).toBe(TARGET_RATE);
    expect(wav.channels).toBe(1);
    expect(wav.bitsPerSample).toBe(8);
    const sidecar = JSON.parse(readFileSync(`${outFile}.meta`, "utf-8"));
    expect(sidecar.transcript).toBe("hello adapter world");
    expect(sidecar.source).toBe("tts");
  });

  it("is byte-deterministic for identical inputs", () => {
    const dir = freshDir();
    const textFile = join(dir, "in.txt");
    writeFileSync(textFile, "same text every time");
    const outA = join(dir, "a.wav");
    const outB = join(dir, "b.wav");
    expect(run(["--text-file", textFile, "--out", outA]).status).toBe(0);
    expect(run(["--text-file", textFile, "--out", outB]).status).toBe(0);
    expect(readFileSync(outA)).toEqual(readFileSync(outB));
    expect(readFileSync(`${outA}.meta`)).toEqual(readFileSync(`${outB}.meta`));
  });

  it("fails on empty text with exit 1", () => {
    const dir = freshDir();
    const textFile = join(dir, "in.txt");
    writeFileSync(textFile, "   ");
    const result = run(["--text-file", textFile, "--out", join(dir, "o.wav")]);
    expect(result.status).toBe(1);
  });
});

describe("mock adapter ASR role", () => {
  it("echoes the sidecar transcript", () => {
    const dir = freshDir();
    const textFile = join(dir, "in.txt");
    const outFile = join(dir, "out.wav");
    writeFileSync(textFile, "transcribe me please");
    run(["--text-file", textFile, "--out", outFile]);
    const result = run(["--audio", outFile]);
    expect(result.status).toBe(0);
    expect(result.stdout).toBe("transcribe me please\n");
  });

  it("fails without a sidecar", () => {
    const dir = freshDir();
    const lone = join(dir, "lone.wav");
    writeFileSync(lone, encodeWav(placeholderTone("x")));
    const result = run(["--audio", lone]);
    expect(result.status).toBe(1);
    expect(result.stderr).toContain("no sidecar");
  });
});

describe("protocol violations", () => {
  it("exits 2 with usage when --out is missing", () => {
    const dir = freshDir();
    const textFile = join(dir, "in.txt");
    writeFileSync(textFile, "hello");
    const result = run(["--text-file", textFile]);
    expect(result.status).toBe(2);
    expect(result.stderr).toContain("usage");
  });

  it("exits 2 with usage when no role flag is given", () => {
    const result = run([]);
    expect(result.status).toBe(2);
    expect(result.stderr).toContain("usage");
  });
});

describe("--version", () => {
  it("prints the manifest as JSON", () => {
    const result = run(["--version"]);
    expect(result.status).toBe(0);
    const manifest = JSON.parse(result.stdout);
    expect(manifest.adapter).toBe("falarm-mock-ts");
    expect(manifest.kind).toBe("tts+asr");
    expect(typeof manifest.version).toBe("string");
  });
});
