"""Patch-spectrum recovery benchmark over a grayscale image corpus.

Needs --corpus DIR (any directory of grayscale-convertible images; see
scripts/make_corpus.py for a synthesized stand-in).  All corrupt-recover
image-exp flags pass through, e.g.:

    python scripts/make_corpus.py corpus/
    python scripts/run_image_experiment.py --corpus corpus/ --patch-size 32 \
        --runs 50 --out results/image
"""

import sys

from corrupt_recover.cli import main

if __name__ == "__main__":
    sys.exit(main(["image-exp", *sys.argv[1:]]))
