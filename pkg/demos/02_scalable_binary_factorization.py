"""Decompose images into scalable weighted binary factors.

Takes a small stack of grayscale images and factors it into binary
code images weighted by continuous basis images, refined over several
quality levels. Shows the residual shrinking level by level and the
bit cost of the binary part.
"""

import argparse

import numpy as np

from lflc.wbi import WbiConfig, decode_levels, encode_scalable


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--images", type=int, default=4)
    ap.add_argument("--size", type=int, default=24)
    ap.add_argument("--partition", default="2,2",
                    help="components per quality level, comma separated")
    ap.add_argument("--seed", type=int, default=17)
    args = ap.parse_args()

    partition = tuple(int(p) for p in args.partition.split(","))
    rng = np.random.default_rng(args.seed)

    # low-rank-ish target: few smooth outer products plus a little noise
    target = np.zeros((args.images, 1, args.size, args.size))
    for _ in range(3):
        row = np.cumsum(rng.standard_normal(args.size))
        col = np.cumsum(rng.standard_normal(args.size))
        weights = rng.uniform(-1.0, 1.0, args.images)
        target += weights[:, None, None, None] * np.outer(row, col)
    target += 0.05 * rng.standard_normal(target.shape)
    target /= np.abs(target).max()

    config = WbiConfig(components=sum(partition), partition=partition)
    code = encode_scalable(target, config)

    print(f"target stack: {target.shape}, partition {partition}")
    norm = np.linalg.norm(target)
    for m in range(1, len(partition) + 1):
        approx = decode_levels(code, m)
        err = np.linalg.norm(target - approx)
        bits = sum(
            lvl.codes.size for lvl in code.levels[:m]
        )
        print(f"level {m}: relative residual {err / norm:.4f}, "
              f"{bits} code bits")

    # each level refines the residual of the previous ones
    full = decode_levels(code, len(partition))
    print(f"full reconstruction max error: {np.abs(target - full).max():.4f}")


if __name__ == "__main__":
    main()
