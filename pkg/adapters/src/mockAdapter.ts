#!/usr/bin/env node
/**
 * Scripted mock adapter speaking the harness's external-command protocol:
 *
 *   mock-adapter --text-file IN.txt --out OUT.wav   (TTS role)
 *   mock-adapter --audio IN.wav                     (ASR role)
 *   mock-adapter --version
 *
 * The TTS role writes a 16 kHz mono 8-bit WAV plus a `.meta` JSON sidecar
 * carrying the transcript; the ASR role prints the sidecar transcript to
 * stdout. Exit 2 on protocol violations, 1 on runtime errors.
 */
import { readFileSync, writeFileSync, existsSync } from "node:fs";
import { encodeWav, placeholderTone } from "./wav.js";

export interface AdapterManifest {
  adapter: string;
  kind: string;
  engine: string;
  version: string;
}

export const MANIFEST: AdapterManifest = {
  adapter: "falarm-mock-ts",
  kind: "tts+asr",
  engine: "mock",
  version: "1.0",
};

function parseArgs(argv: string[]): Map<string, string | true> {
  const args = new Map<string, string | true>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) continue;
    const next = argv[i + 1];
    if (next !== undefined && !next.startsWith("--")) {
      args.set(arg, next);
      i++;
    } else {
      args.set(arg, true);
    }
  }
  return args;
}

export function runTts(textFile: string, outPath: string): void {
  const text = readFileSync(textFile, "utf-8").trim();
  if (!text) throw new Error("empty input text");
  writeFileSync(outPath, encodeWav(placeholderTone(text)));
  const sidecar = { source: "tts", transcript: text, utterance_id: null };
  writeFileSync(`${outPath}.meta`, JSON.stringify(sidecar));
}

export function runAsr(audioPath: string): string {
  const sidecarPath = `${audioPath}.meta`;
  if (!existsSync(sidecarPath)) {
    throw new Error(`no sidecar next to ${audioPath}`);
  }
  const sidecar = JSON.parse(readFileSync(sidecarPath, "utf-8"));
  return sidecar.transcript;
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);

  if (args.has("--version")) {
    process.stdout.write(JSON.stringify(MANIFEST) + "\n");
    return 0;
  }

  if (args.has("--text-file") || args.has("--out")) {
    const textFile = args.get("--text-file");
    const outPath = args.get("--out");
    if (typeof textFile !== "string" || typeof outPath !== "string") {
      process.stderr.write("usage: --text-file IN --out OUT\n");
      return 2;
    }
    try {
      runTts(textFile, outPath);
    } catch (err) {
      process.stderr.write(`${err}\n`);
      return 1;
    }
    return 0;
  }

  const audio = args.get("--audio");
  if (typeof audio === "string") {
    try {
      process.stdout.write(runAsr(audio) + "\n");
    } catch (err) {
      process.stderr.write(`${err}\n`);
      return 1;
    }
    return 0;
  }

  process.stderr.write("usage: (--text-file IN --out OUT) | (--audio WAV)\n");
  return 2;
}

if (process.argv[1] && process.argv[1].endsWith("mockAdapter.js")) {
  process.exit(main(process.argv.slice(2)));
}
