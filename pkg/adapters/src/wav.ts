/**
 * Minimal PCM WAV encode/decode for the harness's standard transcription
 * format: 16 kHz, mono, 8-bit unsigned with a 0x80 midpoint.
 */
import { createHash } from "node:crypto";

export const TARGET_RATE = 16000;

export interface WavInfo {
  sampleRate: number;
  channels: number;
  bitsPerSample: number;
  samples: Uint8Array; // raw PCM payload
}

/** Encode 8-bit unsigned mono samples as a canonical RIFF/WAVE byte stream. */
export function encodeWav(samples: Uint8Array, sampleRate = TARGET_RATE): Buffer {
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + samples.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16); // fmt chunk size
  header.writeUInt16LE(1, 20); // PCM
  header.writeUInt16LE(1, 22); // mono
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate, 28); // byte rate (1 byte/sample)
  header.writeUInt16LE(1, 32); // block align
  header.writeUInt16LE(8, 34); // bits per sample
  header.write("data", 36, "ascii");
  header.writeUInt32LE(samples.length, 40);
  const body = Buffer.concat([header, Buffer.from(samples)]);
  // RIFF chunks are word-aligned: pad odd-length data with one zero byte
  return samples.length % 2 === 1 ? Buffer.concat([body, Buffer.of(0)]) : body;
}

/** Decode enough of a RIFF/WAVE stream to validate it; throws on malformed data. */
export function decodeWav(data: Buffer): WavInfo {
  if (data.length < 44 || data.toString("ascii", 0, 4) !== "RIFF") {
    throw new Error("missing RIFF header");
  }
  if (data.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error("not a WAVE container");
  }
  let pos = 12;
  let fmt: { sampleRate: number; channels: number; bits: number } | null = null;
  let payload: Buffer | null = null;
  while (pos + 8 <= data.length) {
    const id = data.toString("ascii", pos, pos + 4);
    const size = data.readUInt32LE(pos + 4);
    const body = data.subarray(pos + 8, pos + 8 + size);
    if (id === "fmt ") {
      if (body.readUInt16LE(0) !== 1) throw new Error("not integer PCM");
      fmt = {
        channels: body.readUInt16LE(2),
        sampleRate: body.readUInt32LE(4),
        bits: body.readUInt16LE(14),
      };
    } else if (id === "data") {
      if (body.length < size) throw new Error("truncated data chunk");
      payload = body;
    }
    pos += 8 + size + (size % 2);
  }
  if (!fmt) throw new Error("missing fmt chunk");
  if (!payload) throw new Error("missing data chunk");
  return {
    sampleRate: fmt.sampleRate,
    channels: fmt.channels,
    bitsPerSample: fmt.bits,
    samples: new Uint8Array(payload),
  };
}

/**
 * Deterministic placeholder waveform for a transcript: a short sine tone
 * whose frequency derives from the text hash. Byte-identical for identical
 * inputs; the content is irrelevant because mock ASRs read the sidecar.
 */
export function placeholderTone(text: string): Uint8Array {
  const digest = createHash("sha256").update(text, "utf-8").digest();
  const freq = 200 + digest[0] * 4;
  const n = Math.floor(TARGET_RATE / 10);
  const samples = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const amp = 0.5 * Math.sin((2 * Math.PI * freq * i) / TARGET_RATE);
    samples[i] = Math.max(0, Math.min(255, Math.round(amp * 128) + 128));
  }
  return samples;
}
