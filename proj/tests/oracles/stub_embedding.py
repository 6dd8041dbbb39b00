#!/usr/bin/env python3
"""Independent reimplementation of the stub text embedding.

Prints the vectors frozen into test_embed.cpp. Uses only Python integers and
floats so it shares no code with the C++ implementation.
"""
import math

MASK = 2**64 - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def symmetric(self):
        return 2.0 * ((self.next() >> 11) * 2.0**-53) - 1.0


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for c in data:
        h ^= c
        h = (h * 0x100000001B3) & MASK
    return h


def text_embedding(text, dim, seed, buckets=64):
    raw = text.encode("utf-8")
    features = [0.0] * (buckets + 1)
    for i in range(len(raw)):
        for n in (1, 2, 3):
            if i + n <= len(raw):
                h = fnv1a64(raw[i:i + n])
                features[h % buckets] += -1.0 if h >> 63 else 1.0
    features[buckets] = 1.0
    rng = SplitMix64(seed)
    out = []
    for _ in range(dim):
        acc = 0.0
        for f in features:
            acc += rng.symmetric() * f
        out.append(acc)
    norm = math.sqrt(sum(x * x for x in out))
    return [x / norm for x in out]


if __name__ == "__main__":
    print("splitmix64(0).next() =", hex(SplitMix64(0).next()))
    print("fnv1a64('a') =", hex(fnv1a64(b"a")))
    for text, dim, seed in (("a", 8, 42), ("be my weasel", 4, 7)):
        print(f"{text!r} D={dim} seed={seed}:", ", ".join(repr(v) for v in text_embedding(text, dim, seed)))
