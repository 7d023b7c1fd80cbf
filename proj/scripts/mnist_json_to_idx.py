#!/usr/bin/env python3
"""Convert the digit JSON files of the `mnist` npm package into IDX files.

Usage: mnist_json_to_idx.py <package/src/digits> <out_dir>

Samples are interleaved by class (0,1,...,9,0,1,...) so that any prefix of
the output is close to class-balanced. Pixel floats in [0,1] are rounded to
bytes.
"""
import json
import struct
import sys
from pathlib import Path


def main() -> int:
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    per_class = []
    for d in range(10):
        flat = json.loads((src / f"{d}.json").read_text())["data"]
        n = len(flat) // 784
        per_class.append([flat[i * 784:(i + 1) * 784] for i in range(n)])
    images, labels = [], []
    depth = max(len(c) for c in per_class)
    for i in range(depth):
        for d in range(10):
            if i < len(per_class[d]):
                images.append(per_class[d][i])
                labels.append(d)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(min(255, max(0, round(v * 255))) for v in img))
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))
    print(f"wrote {len(images)} samples to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
