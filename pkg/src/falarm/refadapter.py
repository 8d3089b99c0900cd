"""Reference external-command adapter, used by the protocol conformance
tests. Behaves like the in-process verbatim mock but runs as a separate
process:

  python3 -m falarm.refadapter --text-file in.txt --out out.wav   (TTS role)
  python3 -m falarm.refadapter --audio out.wav                    (ASR role)

Exit status 2 on protocol violations.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engines import write_mock_audio

MANIFEST = {
    "adapter": "falarm-reference",
    "kind": "tts+asr",
    "engine": "mock",
    "version": "1.0",
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="falarm-refadapter", add_help=True)
    parser.add_argument("--text-file")
    parser.add_argument("--out")
    parser.add_argument("--audio")
    parser.add_argument("--version", action="store_true")
    args = parser.parse_args(argv)

    if args.version:
        print(json.dumps(MANIFEST))
        return 0

    if args.text_file is not None or args.out is not None:
        if args.text_file is None or args.out is None:
            print("usage: --text-file IN --out OUT", file=sys.stderr)
            return 2
        text = Path(args.text_file).read_text(encoding="utf-8").strip()
        if not text:
            print("empty input text", file=sys.stderr)
            return 1
        write_mock_audio(args.out, text, source="tts")
        return 0

    if args.audio is not None:
        sidecar = Path(args.audio + ".meta")
        if not sidecar.exists():
            print(f"no sidecar next to {args.audio}", file=sys.stderr)
            return 1
        print(json.loads(sidecar.read_text(encoding="utf-8"))["transcript"])
        return 0

    print("usage: (--text-file IN --out OUT) | (--audio WAV)", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
