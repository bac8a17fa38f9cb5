"""Evolve small chains and compare entropy and energy with exact diagonalization.

Run with ``python3 demos/ed_check.py``.  Deviations are at the 1e-7 level
for a fine cutoff and grow to ~1e-4 with the coarser ``--cutoff 1e-12``.
"""

import argparse

from thermofield.evolution import EvolutionConfig
from thermofield.models import bilinear_biquadratic, bose_hubbard, xxz
from thermofield.verify import compare_with_ed


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dtau", type=float, default=0.05)
    parser.add_argument("--cutoff", type=float, default=1e-16)
    args = parser.parse_args()

    cfg = EvolutionConfig(4.0, dtau=args.dtau, order=4, rel_weight_cutoff=args.cutoff)
    for spec in (xxz(8, 1.0), bilinear_biquadratic(6, 0.0), bose_hubbard(4, J=0.25, n_max=3)):
        print(f"{spec.kind} L={spec.L}")
        for beta, ds, de in compare_with_ed(spec, cfg, [0.5, 1.0, 2.0, 4.0]):
            print(f"  beta={beta:4.1f}  dS1={ds:+.2e}  dE={de:+.2e}")


if __name__ == "__main__":
    main()
