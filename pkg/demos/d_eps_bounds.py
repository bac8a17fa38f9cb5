"""Bond dimension needed for accuracy eps, measured and bounded.

Reads the Schmidt spectra of an XX run, counts the values needed to keep
the discarded weight below eps and compares the fitted exponent with the
optimal-alpha prediction lambda*.
"""

import argparse

import numpy as np

from thermofield.evolution import EvolutionConfig
from thermofield.experiment import ExperimentConfig, run_experiment
from thermofield.fitting import Series, fit_line, truncation_dimension
from thermofield.models import xxz
from thermofield.theory import (bond_dimension_bound, d_scaling_exponent, optimal_alpha,
                                optimal_exponent)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--L", type=int, default=32)
    parser.add_argument("--beta", type=float, default=16.0)
    parser.add_argument("--eps", type=float, default=1e-5)
    parser.add_argument("--out", default="demo_deps")
    args = parser.parse_args()

    grid = [float(b) for b in range(1, int(args.beta) + 1)]
    cfg = ExperimentConfig(xxz(args.L, 0.0),
                           EvolutionConfig(args.beta, dtau=0.5, rel_weight_cutoff=1e-12,
                                           beta_grid=grid), epsilons=[args.eps])
    res = run_experiment(cfg, args.out)
    with np.load(res.output_dir / "spectra.npz") as data:
        betas = data["betas"]
        dims = [truncation_dimension(data[f"m{i:05d}_l{args.L // 2}"], args.eps)
                for i in range(betas.size)]
    for b, dim in zip(betas, dims):
        print(f"beta={b:5.1f}  D_eps={dim}")

    sel = betas >= args.beta / 3
    window = (np.log(betas[sel][0]), np.log(betas[-1]))
    lam = fit_line(Series(np.log(betas), np.log(np.array(dims, float))), window).slope
    a_star = optimal_alpha(1.0, args.eps, args.beta)
    print(f"fitted lambda {lam:.3f}")
    print(f"alpha* {a_star:.3f}, lambda* {optimal_exponent(1.0, args.eps, args.beta):.3f}, "
          f"c/3 {d_scaling_exponent(1.0, 1.0):.3f}")
    s_star = 1.0 / 6 * (1 + 1 / a_star) * np.log(args.beta)
    print(f"bound on D at beta={args.beta:g}: {bond_dimension_bound(s_star, a_star, args.eps):.3g}")


if __name__ == "__main__":
    main()
