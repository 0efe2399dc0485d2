"""Full success-rate phase map over the default (theta_m, theta_f) grid.

Desk-scale defaults (25 runs per triple, 20 prime dimensions) finish in
roughly an hour serially; set CORRUPT_RECOVER_THREADS or pass --threads
to fan trials out over processes.  All corrupt-recover phase-map flags
pass through, e.g.:

    python scripts/run_phase_map.py --out results/phase_map --threads 8
    python scripts/run_phase_map.py --n-mode nonprimes --out results/nonprime
"""

import sys

from corrupt_recover.cli import main

if __name__ == "__main__":
    sys.exit(main(["phase-map", *sys.argv[1:]]))
