#!/usr/bin/env node
/**
 * Template ASR wrapper: adapt a pretrained speech-to-text command to the
 * harness protocol (`--audio WAV`, transcript on stdout, exit 0).
 *
 * Only `invokeEngine` should need editing for a different model runner; the
 * protocol handling around it stays fixed. The default invocation targets a
 * whisper-style CLI that prints the transcript.
 */
import { spawnSync } from "node:child_process";
import { existsSync } from "node:fs";
import type { AdapterManifest } from "./mockAdapter.js";

export const MANIFEST: AdapterManifest = {
  adapter: "falarm-asr-wrapper",
  kind: "asr",
  engine: "whisper",
  version: "1.0",
};

/** The single engine-specific call; swap this out for another STT runner. */
function invokeEngine(audioPath: string): { status: number; transcript: string } {
  const result = spawnSync(
    "whisper-cli",
    ["--no-timestamps", "--output-txt=false", audioPath],
    { encoding: "utf-8" },
  );
  return {
    status: result.status ?? 1,
    transcript: (result.stdout ?? "").trim(),
  };
}

export function main(argv: string[]): number {
  if (argv.includes("--version")) {
    process.stdout.write(JSON.stringify(MANIFEST) + "\n");
    return 0;
  }
  const audioIdx = argv.indexOf("--audio");
  const audioPath = audioIdx >= 0 ? argv[audioIdx + 1] : undefined;
  if (!audioPath) {
    process.stderr.write("usage: --audio WAV\n");
    return 2;
  }
  if (!existsSync(audioPath)) {
    process.stderr.write(`audio file missing: ${audioPath}\n`);
    return 1;
  }
  const { status, transcript } = invokeEngine(audioPath);
  if (status !== 0) return status;
  process.stdout.write(transcript + "\n");
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("asrWrapper.js")) {
  process.exit(main(process.argv.slice(2)));
}
