#!/usr/bin/env python3
"""BER against Es/N0 for every (channel, mode) in desk_awgn.csv."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "desk_awgn.csv")
curves = defaultdict(list)
with open(src, newline="") as f:
    for row in csv.DictReader(f):
        curves[(row["channel"], row["mode"])].append((float(row["es_n0_db"]), float(row["ber"])))

channels = sorted({c for c, _ in curves})
fig, axes = plt.subplots(1, len(channels), figsize=(6 * len(channels), 4.5), squeeze=False)
for ax, channel in zip(axes[0], channels):
    for (c, mode), pts in sorted(curves.items()):
        if c != channel:
            continue
        pts.sort()
        xs = [x for x, b in pts if b > 0]
        ys = [b for x, b in pts if b > 0]
        ax.semilogy(xs, ys, marker="o", label=mode)
    ax.set_title(channel)
    ax.set_xlabel("Es/N0 (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
fig.tight_layout()
out = os.path.splitext(src)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
