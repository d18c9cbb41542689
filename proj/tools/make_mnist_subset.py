"""Writes a fixed MNIST subset in LIBSVM format for the desk-scale comparison.

Input is a CSV with 784 pixel columns followed by the digit label (for example the
5000-image sample shipped with mlxtend as data/mnist_5k.csv.gz). Pixels are scaled to
[0, 1]; labels stay as raw digits and are binarized at load time.
"""

import argparse
import gzip

import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", help="CSV (optionally .gz) with 784 pixels + label per row")
    parser.add_argument("output", help="destination .libsvm.gz")
    parser.add_argument("--count", type=int, default=2500)
    parser.add_argument("--seed", type=int, default=20240101)
    args = parser.parse_args()

    opener = gzip.open if args.source.endswith(".gz") else open
    with opener(args.source, "rt") as f:
        table = np.loadtxt(f, delimiter=",")
    pixels, labels = table[:, :784] / 255.0, table[:, 784].astype(int)

    order = np.random.default_rng(args.seed).permutation(len(labels))[: args.count]
    lines = []
    for row in order:
        cells = [f"{j + 1}:{v:.6g}" for j, v in enumerate(pixels[row]) if v != 0.0]
        lines.append(" ".join([str(labels[row])] + cells))

    with open(args.output, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as out:
        out.write(("\n".join(lines) + "\n").encode())


if __name__ == "__main__":
    main()
