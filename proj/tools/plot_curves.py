#!/usr/bin/env python3
"""Render permod .dat curve files (curve or sensitivity output) to PNG."""
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_blocks(path):
    blocks, label, xs, ys = [], None, [], []
    for line in path.read_text().splitlines():
        if line.startswith("# model="):
            label = line[2:]
        elif line.startswith("#"):
            continue
        elif not line.strip():
            if xs:
                blocks.append((label, xs, ys))
                xs, ys = [], []
        else:
            x, y = line.split()
            xs.append(float(x))
            ys.append(float(y))
    if xs:
        blocks.append((label, xs, ys))
    return blocks


def main(directory):
    files = sorted(pathlib.Path(directory).glob("*.dat"))
    if not files:
        print(f"no .dat files in {directory}")
        return 0
    for path in files:
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, xs, ys in read_blocks(path):
            ax.plot(xs, ys, label=label)
        ax.set_xlabel("recovery time (s)")
        ax.set_ylabel("recovery ratio (%)")
        ax.set_ylim(0, 105)
        if any(label for label, _, _ in read_blocks(path)):
            ax.legend(fontsize=7)
        out = path.with_suffix(".png")
        fig.tight_layout()
        fig.savefig(out, dpi=120)
        plt.close(fig)
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "."))
