"""Synthesize a piecewise-smooth grayscale corpus for the image runs.

Stand-in for a photographic corpus: smooth backgrounds with soft-edged
shapes give compressible spectra without shipping image data.

    python scripts/make_corpus.py corpus/ --count 20 --size 128 --seed 0
"""

import argparse

from corrupt_recover.experiments import synthesize_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    paths = synthesize_corpus(args.out_dir, count=args.count, size=args.size,
                              seed=args.seed)
    print(f"wrote {len(paths)} images under {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
