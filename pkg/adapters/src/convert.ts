#!/usr/bin/env node
/**
 * FLAC-to-WAV corpus converter.
 *
 *   convert --in flac_dir --out wav_dir
 *
 * Walks the input directory recursively (LibriSpeech layout: `.flac` files
 * with `*.trans.txt` transcription files alongside, one `id text` line per
 * utterance), converts each FLAC to a 16 kHz mono 8-bit WAV via ffmpeg, and
 * writes `manifest.tsv` (`id<TAB>audio_path<TAB>text`) plus `convert.log`
 * listing skipped files to the output directory. Undecodable files and
 * utterances without a transcription are skipped, never fatal.
 */
import { spawnSync } from "node:child_process";
import {
  existsSync,
  mkdirSync,
  readdirSync,
  readFileSync,
  writeFileSync,
} from "node:fs";
import { basename, join } from "node:path";

export interface ConversionReport {
  converted: number;
  skipped: string[]; // one log line per skipped file
}

export function ffmpegAvailable(): boolean {
  return spawnSync("ffmpeg", ["-version"], { stdio: "ignore" }).status === 0;
}

function walk(dir: string, out: string[] = []): string[] {
  for (const entry of readdirSync(dir, { withFileTypes: true })) {
    const full = join(dir, entry.name);
    if (entry.isDirectory()) walk(full, out);
    else out.push(full);
  }
  return out;
}

/** Parse every `*.trans.txt` under the corpus root into an id -> text map. */
export function readTranscriptions(root: string): Map<string, string> {
  const texts = new Map<string, string>();
  for (const file of walk(root)) {
    if (!file.endsWith(".trans.txt")) continue;
    for (const line of readFileSync(file, "utf-8").split("\n")) {
      const trimmed = line.trim();
      if (!trimmed) continue;
      const space = trimmed.indexOf(" ");
      if (space < 1) continue;
      texts.set(trimmed.slice(0, space), trimmed.slice(space + 1).trim());
    }
  }
  return texts;
}

function convertOne(flacPath: string, wavPath: string): string | null {
  const result = spawnSync(
    "ffmpeg",
    ["-y", "-v", "error", "-i", flacPath, "-ar", "16000", "-ac", "1",
     "-acodec", "pcm_u8", wavPath],
    { encoding: "utf-8" },
  );
  if (result.error) return String(result.error);
  if (result.status !== 0) return result.stderr.trim() || `exit ${result.status}`;
  return null;
}

export function convertCorpus(inDir: string, outDir: string): ConversionReport {
  mkdirSync(outDir, { recursive: true });
  const texts = readTranscriptions(inDir);
  const flacs = existsSync(inDir)
    ? walk(inDir).filter((f) => f.endsWith(".flac")).sort()
    : [];
  const manifestLines: string[] = [];
  const skipped: string[] = [];
  for (const flac of flacs) {
    const id = basename(flac, ".flac");
    const text = texts.get(id);
    if (!text) {
      skipped.push(`${flac}: no transcription`);
      continue;
    }
    const wavName = `${id}.wav`;
    const error = convertOne(flac, join(outDir, wavName));
    if (error !== null) {
      skipped.push(`${flac}: ${error}`);
      continue;
    }
    manifestLines.push(`${id}\t${wavName}\t${text}`);
  }
  writeFileSync(
    join(outDir, "manifest.tsv"),
    manifestLines.map((l) => l + "\n").join(""),
  );
  writeFileSync(
    join(outDir, "convert.log"),
    skipped.map((l) => l + "\n").join(""),
  );
  return { converted: manifestLines.length, skipped };
}

export function main(argv: string[]): number {
  const inIdx = argv.indexOf("--in");
  const outIdx = argv.indexOf("--out");
  const inDir = inIdx >= 0 ? argv[inIdx + 1] : undefined;
  const outDir = outIdx >= 0 ? argv[outIdx + 1] : undefined;
  if (!inDir || !outDir) {
    process.stderr.write("usage: convert --in FLAC_DIR --out WAV_DIR\n");
    return 2;
  }
  if (!ffmpegAvailable()) {
    process.stderr.write("error: ffmpeg not found on PATH\n");
    return 1;
  }
  const report = convertCorpus(inDir, outDir);
  process.stdout.write(
    `converted ${report.converted} files, skipped ${report.skipped.length}\n`,
  );
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("convert.js")) {
  process.exit(main(process.argv.slice(2)));
}
