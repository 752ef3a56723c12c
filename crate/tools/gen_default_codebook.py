#!/usr/bin/env python3
"""Generate the bundled 6-user / 4-resource / M=4 SCMA codebook.

Each user places a 4-PAM mother constellation on its two resources. The
second dimension uses a permuted PAM so the pairwise product distance is 8,
and every resource carries its three users at rotations 0, 60 and 120 deg.
"""
import math
import sys

SUPPORT = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
# rotation index for (resource, user); each resource sees {0, 1, 2} once
ROTATION = {
    (0, 0): 0, (0, 1): 1, (0, 2): 2,
    (1, 0): 2, (1, 3): 0, (1, 4): 1,
    (2, 1): 2, (2, 3): 1, (2, 5): 0,
    (3, 2): 0, (3, 4): 2, (3, 5): 1,
}
ANGLES = [0.0, math.pi / 3.0, 2.0 * math.pi / 3.0]
DIM1 = [-3.0, -1.0, 3.0, 1.0]
DIM2 = [1.0, -3.0, -1.0, 3.0]
SCALE = 1.0 / math.sqrt(10.0)


def main(out):
    lines = [
        "# Default SCMA codebook: 6 users, 4 resources, 4 codewords per user.",
        "# Generated by tools/gen_default_codebook.py; do not edit by hand.",
        "J = 6",
        "K = 4",
        "M = 4",
        "N = 2",
    ]
    for j, (a, b) in enumerate(SUPPORT):
        lines.append("")
        lines.append("[[user]]")
        lines.append(f"support = [{a + 1}, {b + 1}]")
        lines.append("codewords = [")
        for m in range(4):
            row = []
            for k in range(4):
                if k == a:
                    z = DIM1[m] * SCALE, ROTATION[(k, j)]
                elif k == b:
                    z = DIM2[m] * SCALE, ROTATION[(k, j)]
                else:
                    row.append("[0.0, 0.0]")
                    continue
                amp, rot = z
                re = amp * math.cos(ANGLES[rot])
                im = amp * math.sin(ANGLES[rot])
                row.append(f"[{re!r}, {im!r}]")
            lines.append("  [" + ", ".join(row) + "],")
        lines.append("]")
        lines.append("labels = [[0, 0], [0, 1], [1, 0], [1, 1]]")
    text = "\n".join(lines) + "\n"
    with open(out, "w") as f:
        f.write(text)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/scma_j6_k4_m4.toml")
