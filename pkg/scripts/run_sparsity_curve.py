"""Mean k-sparse-indicator curves for the standard signal families.

Without --corpus the image-spectrum family is dropped with a note; the
gaussian and synthetic-sparse families need no external data, e.g.:

    python scripts/run_sparsity_curve.py --n 1024 --out results/curves
    python scripts/run_sparsity_curve.py --n 1024 --corpus corpus/ \
        --patch-size 32 --out results/curves
"""

import sys

from corrupt_recover.cli import main

if __name__ == "__main__":
    sys.exit(main(["sparsity-curve", *sys.argv[1:]]))
