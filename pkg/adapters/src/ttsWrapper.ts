#!/usr/bin/env node
/**
 * Template TTS wrapper: adapt a local speech-synthesis binary to the
 * harness protocol (`--text-file IN --out OUT`, exit 0 on success).
 *
 * Only `invokeEngine` should need editing for a different engine; the
 * protocol handling around it stays fixed. The default invocation targets
 * espeak, which writes RIFF WAV directly.
 */
import { spawnSync } from "node:child_process";
import { readFileSync } from "node:fs";
import type { AdapterManifest } from "./mockAdapter.js";

export const MANIFEST: AdapterManifest = {
  adapter: "falarm-tts-wrapper",
  kind: "tts",
  engine: "espeak",
  version: "1.0",
};

/** The single engine-specific call; swap this out for another TTS binary. */
function invokeEngine(text: string, outPath: string): number {
  const result = spawnSync("espeak", ["-w", outPath, text], {
    stdio: ["ignore", "ignore", "inherit"],
  });
  return result.status ?? 1;
}

export function main(argv: string[]): number {
  if (argv.includes("--version")) {
    process.stdout.write(JSON.stringify(MANIFEST) + "\n");
    return 0;
  }
  const textIdx = argv.indexOf("--text-file");
  const outIdx = argv.indexOf("--out");
  const textFile = textIdx >= 0 ? argv[textIdx + 1] : undefined;
  const outPath = outIdx >= 0 ? argv[outIdx + 1] : undefined;
  if (!textFile || !outPath) {
    process.stderr.write("usage: --text-file IN --out OUT\n");
    return 2;
  }
  const text = readFileSync(textFile, "utf-8").trim();
  if (!text) {
    process.stderr.write("empty input text\n");
    return 1;
  }
  return invokeEngine(text, outPath);
}

if (process.argv[1] && process.argv[1].endsWith("ttsWrapper.js")) {
  process.exit(main(process.argv.slice(2)));
}
