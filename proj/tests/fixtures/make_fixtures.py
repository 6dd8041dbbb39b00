#!/usr/bin/env python3
"""Regenerates the golden WAV/LRC fixtures and their expected values.

Writes headers by hand with struct so the files do not depend on the
decoder under test. Run from any directory; outputs land next to this file.
"""
import json
import pathlib
import struct

HERE = pathlib.Path(__file__).resolve().parent


def riff(fmt_chunk: bytes, data: bytes, extra_chunks: bytes = b"") -> bytes:
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk + extra_chunks
    body += b"data" + struct.pack("<I", len(data)) + data
    if len(data) % 2:
        body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


def fmt_pcm(tag, channels, rate, bits):
    block = channels * bits // 8
    return struct.pack("<HHIIHH", tag, channels, rate, rate * block, block, bits)


def fmt_extensible(channels, rate, bits, subformat_tag):
    base = fmt_pcm(0xFFFE, channels, rate, bits)
    guid_tail = bytes.fromhex("000000001000800000aa00389b71")
    ext = struct.pack("<HHI", 22, bits, 0) + struct.pack("<H", subformat_tag) + guid_tail
    return base + ext


def pcm24(v):
    return struct.pack("<i", v)[:3]


def main():
    expected = {}

    # PCM16 mono, with a LIST chunk before data to exercise chunk walking.
    ints16 = [0, 1, -1, 32767, -32768, 16384, -16384, 12345, -2222]
    data = b"".join(struct.pack("<h", v) for v in ints16)
    info = b"LIST" + struct.pack("<I", 10) + b"INFOabcdef"
    (HERE / "pcm16_mono.wav").write_bytes(riff(fmt_pcm(1, 1, 8000, 16), data, info))
    expected["pcm16_mono.wav"] = {"sample_rate": 8000, "samples": [v / 32768 for v in ints16]}

    # PCM24 stereo, averaged to mono.
    frames24 = [(0, 0), (8388607, 0), (-8388608, -8388608), (4194304, -4194304), (123456, 654321), (-1, 1)]
    data = b"".join(pcm24(l) + pcm24(r) for l, r in frames24)
    (HERE / "pcm24_stereo.wav").write_bytes(riff(fmt_pcm(1, 2, 44100, 24), data))
    expected["pcm24_stereo.wav"] = {"sample_rate": 44100,
                                    "samples": [(l / 8388608 + r / 8388608) / 2 for l, r in frames24]}

    # IEEE float32 mono in a WAVE_FORMAT_EXTENSIBLE header.
    floats = [0.0, 0.5, -0.25, 1.0, -1.0, 0.125, 0.001, -0.75, 0.3333333]
    data = b"".join(struct.pack("<f", v) for v in floats)
    (HERE / "float32_mono.wav").write_bytes(riff(fmt_extensible(1, 22050, 32, 3), data))
    expected["float32_mono.wav"] = {"sample_rate": 22050,
                                    "samples": [struct.unpack("<f", struct.pack("<f", v))[0] for v in floats]}

    (HERE / "wav_expected.json").write_text(json.dumps(expected, indent=1) + "\n")

    lrc = "\n".join([
        "﻿[ti:Weasel Song]",
        "[ar:Nobody]",
        "[offset:+0]",
        "",
        "[00:12.50]be my weasel",
        "[00:01.00][00:30.25]chorus line",
        "[00:05]plain seconds",
        "[01:02.345]three decimals",
        "[00:07:10]colon fraction",
        "[00:09.00]",
        "[00:05]tie after plain seconds",
        "untagged line is ignored",
        "",
    ])
    (HERE / "golden.lrc").write_text(lrc, encoding="utf-8")
    lines = [
        (12.5, "be my weasel"), (1.0, "chorus line"), (30.25, "chorus line"), (5.0, "plain seconds"),
        (62.345, "three decimals"), (7.1, "colon fraction"), (5.0, "tie after plain seconds"),
    ]
    ordered = sorted(lines, key=lambda x: x[0])  # Python's sort is stable
    (HERE / "lrc_expected.json").write_text(
        json.dumps([{"time_s": t, "text": s} for t, s in ordered], indent=1) + "\n")


if __name__ == "__main__":
    main()
