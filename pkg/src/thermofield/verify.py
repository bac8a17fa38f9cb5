"""Self-checks against exact diagonalization and randomized inequality suites.

Each suite returns a :class:`SuiteResult`; failures are reported, never
raised.  Suite sizes default to the full acceptance sizes and can be shrunk
for quick smoke runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import read_results
from .errors import DomainError
from .evolution import EvolutionConfig, build_trotter_plan, evolve
from .fitting import Series, fit_line
from .models import ModelSpec, bilinear_biquadratic, bose_hubbard, build_bond_terms, xxz
from .mps import (build_infinite_temperature_tds, canonicalize, from_dense, renyi_entropy,
                  to_dense, truncate_to)
from .oracle import dense_hamiltonian, exact_tds, exact_thermal_density, reduced_spectrum
from .theory import (entropy_lower_bound_from_truncation, log_bond_dimension_bound,
                     majorizing_distribution, mps_error_bound, optimal_alpha,
                     optimal_plateau_height, partial_sums_dominate, purification_density,
                     trace_norm)

SUITES = ("ed", "inequality", "majorization", "trotter", "norms")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def lines(self):
        yield f"[{'PASS' if self.passed else 'FAIL'}] suite {self.name} ({self.seconds:.1f}s)"
        for c in self.checks:
            yield f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.monotonic()
        res = fn(*args, **kwargs)
        res.seconds = time.monotonic() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- exact diagonalization ----------------------------------------------------

def compare_with_ed(spec: ModelSpec, config: EvolutionConfig, betas, bond=None):
    """Run the evolution and return ``(beta, dS1, dE)`` against the dense oracle."""
    bond = bond or spec.L // 2
    terms = build_bond_terms(spec)
    H = dense_hamiltonian(spec)
    out = []

    def observer(snap):
        s_mps = renyi_entropy(snap.spectra[bond - 1], 1.0)
        s_ed = renyi_entropy(reduced_spectrum(exact_tds(spec, snap.beta), bond), 1.0)
        e_ed = float(np.trace(exact_thermal_density(spec, snap.beta) @ H).real)
        out.append((snap.beta, s_mps - s_ed, snap.energy - e_ed))

    cfg = EvolutionConfig(max(betas), config.dtau, config.order, config.max_rank,
                          config.rel_weight_cutoff, list(betas))
    evolve(build_infinite_temperature_tds(spec.d, spec.L), terms, cfg, observer)
    return out


@_timed
def ed_suite(tolerance=1e-6, dtau=0.05, cutoff=1e-16, results_dir=None) -> SuiteResult:
    """Entropy and energy of evolved states against exact diagonalization.

    Without ``results_dir`` three small chains are evolved here.  With it,
    every row of a finished run is compared instead (small chains only).
    """
    res = SuiteResult("ed")
    if results_dir is not None:
        _ed_results(res, Path(results_dir), tolerance)
        return res
    cases = [xxz(6, 1.0), bilinear_biquadratic(4, 0.0), bose_hubbard(3, J=0.25, n_max=3)]
    for spec in cases:
        cfg = EvolutionConfig(2.0, dtau=dtau, order=4, rel_weight_cutoff=cutoff)
        for beta, ds, de in compare_with_ed(spec, cfg, [0.5, 1.0, 2.0]):
            res.add(f"{spec.kind} L={spec.L} beta={beta:g}",
                    abs(ds) <= tolerance and abs(de) <= tolerance,
                    f"|dS1|={abs(ds):.2e} |dE|={abs(de):.2e} tol={tolerance:g}")
    return res


def _ed_results(res, results_dir, tolerance):
    import json

    info = json.loads((results_dir / "run.json").read_text())
    spec = ModelSpec.from_dict(info["config"]["model"])
    table = read_results(results_dir / "results.csv")
    H = dense_hamiltonian(spec)
    for i in range(table.beta.size):
        beta, bond = float(table.beta[i]), int(table.bond[i])
        state = exact_tds(spec, beta)
        spectrum = reduced_spectrum(state, bond)
        e_ed = float(np.trace(exact_thermal_density(spec, beta) @ H).real)
        worst = abs(table.energy[i] - e_ed)
        for a in table.alphas:
            worst = max(worst, abs(table.entropy[a][i] - renyi_entropy(spectrum, a)))
        res.add(f"beta={beta:g} bond={bond}", worst <= tolerance,
                f"max deviation {worst:.2e} tol={tolerance:g}")


# -- Trotter order ----------------------------------------------------------

def trotter_errors(order, dtaus=(0.2, 0.1, 0.05, 0.025), beta=1.0, spec=None,
                   plan_factory: Callable | None = None):
    """Dense two-norm distance to the exact thermofield double for each step size."""
    spec = spec or xxz(6, 1.0)
    terms = build_bond_terms(spec)
    exact = exact_tds(spec, beta).vector
    errs = []
    for dt in dtaus:
        plan = (plan_factory or build_trotter_plan)(order, dt)
        cfg = EvolutionConfig(beta, dtau=dt, order=order, rel_weight_cutoff=0.0)
        out = evolve(build_infinite_temperature_tds(spec.d, spec.L), terms, cfg, plan=plan)
        v = to_dense(out)
        v = v * np.sign(np.vdot(exact, v).real)
        errs.append(float(np.linalg.norm(v - exact)))
    return np.array(errs)


def trotter_slope(order, dtaus=(0.2, 0.1, 0.05, 0.025), plan_factory=None, **kwargs):
    errs = trotter_errors(order, dtaus, plan_factory=plan_factory, **kwargs)
    fit = fit_line(Series(np.log(dtaus[::-1]), np.log(errs[::-1])),
                   (math.log(min(dtaus)), math.log(max(dtaus))))
    return fit.slope, errs


@_timed
def trotter_suite(plan_factory=None) -> SuiteResult:
    """Log-log slope of the Trotter error: 4 +- 0.4 (order 4) and 2 +- 0.3 (order 2)."""
    res = SuiteResult("trotter")
    for order, target, tol in ((4, 4.0, 0.4), (2, 2.0, 0.3)):
        slope, errs = trotter_slope(order, plan_factory=plan_factory)
        res.add(f"order {order} slope", abs(slope - target) <= tol,
                f"slope={slope:.3f} target={target}+-{tol} errors={np.array2string(errs, precision=2)}")
    return res


# -- random spectra -----------------------------------------------------------

def random_spectrum(rng, n_min=4, n_max=64):
    """Sorted probability vector with a random length and random peakedness."""
    n = int(rng.integers(n_min, n_max + 1))
    w = rng.dirichlet(np.full(n, 10 ** rng.uniform(-2, 0.5)))
    w = np.sort(np.maximum(w, 0.0))[::-1]
    return w / w.sum()


def sample_bound_case(rng, alpha, max_tries=10_000):
    """Random ``(spectrum, D, eps)`` inside the validity window of the entropy bound."""
    for _ in range(max_tries):
        w = random_spectrum(rng)
        D = int(rng.integers(2, w.size))
        eps = float(w[D:].sum())
        if eps <= 0 or D - 1 - eps <= 0:
            continue
        if eps * D / (D - 1 - eps) <= alpha < 1:
            return w, D, eps
    raise RuntimeError("could not sample a valid case")


def entropy_bound_slack(n_samples, alphas=(0.1, 0.3, 0.5, 0.9), seed=0, sharp=False):
    """Minimum of ``S_alpha(w) - bound`` over random spectra, per alpha."""
    rng = np.random.default_rng(seed)
    out = {}
    for a in alphas:
        worst = np.inf
        for _ in range(n_samples):
            w, D, eps = sample_bound_case(rng, a)
            bound, _ = entropy_lower_bound_from_truncation(eps, D, a, sharp=sharp)
            worst = min(worst, renyi_entropy(w, a) - bound)
        out[a] = worst
    return out


def random_truncation_distances(n_cases, seed=0, L=6, d=2):
    """``(distance, bound)`` pairs for random states truncated at random ranks."""
    rng = np.random.default_rng(seed)
    p = d * d
    out = []
    for _ in range(n_cases):
        # product of random local factors plus noise keeps the spectra varied
        v = rng.standard_normal(p ** L)
        v *= np.exp(-rng.uniform(0, 6) * rng.random(p ** L))
        v /= np.linalg.norm(v)
        state = from_dense(v, d, L)
        exact = canonicalize(state)
        max_rank = int(rng.integers(1, 17))
        trunc, _ = truncate_to(state, max_rank, 0.0)
        eps = [float(np.sum(exact.bond_spectra[ell].weights[D:]))
               for ell, D in enumerate(trunc.bond_dims)]
        dist = float(np.linalg.norm(v - to_dense(trunc, normalized=False)))
        out.append((dist, mps_error_bound(eps)))
    return out


def optimal_alpha_grid_check(n_cases, seed=0, grid_points=10_000):
    """Largest relative excess of the bound at ``alpha*`` over the grid minimum."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(0, 1, grid_points + 2)[1:-1]
    worst = -np.inf
    count = 0
    while count < n_cases:
        c = 10 ** rng.uniform(-0.5, 0.5)
        eps = 10 ** rng.uniform(-14, -2)
        y = 10 ** rng.uniform(0.5, 4)
        try:
            a_star = optimal_alpha(c, eps, y)
        except DomainError:
            continue
        count += 1

        def logd(a):
            return log_bond_dimension_bound(c / 6 * (1 + 1 / a) * math.log(y), a, eps)

        grid_min = min(logd(a) for a in grid)
        worst = max(worst, logd(a_star) - grid_min)
    return worst


@_timed
def inequality_suite(seed=0, n_truncations=100, n_spectra=10_000, n_alpha=100) -> SuiteResult:
    """Error bound on truncations, entropy lower bound, optimal plateau and optimal alpha."""
    res = SuiteResult("inequality")
    pairs = random_truncation_distances(n_truncations, seed)
    viol = max(d - b for d, b in pairs)
    res.add("two-norm distance <= sqrt(2 sum eps)", viol <= 1e-12,
            f"{len(pairs)} truncations, max(distance - bound) = {viol:.2e}")
    for sharp in (False, True):
        slack = entropy_bound_slack(n_spectra, seed=seed, sharp=sharp)
        worst = min(slack.values())
        res.add(f"entropy lower bound{' (sharp)' if sharp else ''}", worst >= -1e-12,
                f"{n_spectra} spectra per alpha, min slack "
                + ", ".join(f"a={a:g}: {s:.2e}" for a, s in slack.items()))
    rng = np.random.default_rng(seed + 1)
    worst_h = 0.0
    for _ in range(100):
        a = rng.uniform(0.05, 0.95)
        D = int(rng.integers(2, 50))
        eps = 10 ** rng.uniform(-8, -1)
        h_star = optimal_plateau_height(eps, D, a)
        hs = h_star * np.geomspace(0.2, 5, 401)

        def g(h):
            # log of sum_k w_k^alpha over the plateau and tail of the majorizing family
            return math.log((D - 1) * h ** a + eps * h ** (a - 1))

        grid_best = min(g(h) for h in hs)
        worst_h = max(worst_h, g(h_star) - grid_best)
    res.add("h* minimizes the plateau expression", worst_h <= 1e-12,
            f"max excess over log-grid = {worst_h:.2e}")
    excess = optimal_alpha_grid_check(n_alpha, seed)
    res.add("alpha* minimizes the bond-dimension bound", excess <= 1e-9,
            f"{n_alpha} (c, eps, y) triples, max log-excess over 1e4-point grid = {excess:.2e}")
    return res


@_timed
def majorization_suite(seed=0, n_cases=1000) -> SuiteResult:
    """The constructed distribution dominates matched random spectra."""
    res = SuiteResult("majorization")
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(n_cases):
        w = random_spectrum(rng)
        D = int(rng.integers(1, w.size))
        eps = float(w[D:].sum())
        h = float(w[D - 1])
        if h <= 0:
            continue
        wt = majorizing_distribution(eps, D, h)
        ok = partial_sums_dominate(wt, w) and abs(wt.sum() - 1) < 1e-12
        failures += not ok
    res.add("partial sums dominate", failures == 0, f"{failures} failures in {n_cases} spectra")
    return res


def random_projector(rng, n):
    k = int(rng.integers(0, n + 1))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q[:, :k] @ q[:, :k].conj().T


@_timed
def norms_suite(seed=0, n_cases=1000) -> SuiteResult:
    """Purification distance bound and trace-norm inequalities on random inputs."""
    res = SuiteResult("norms")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(n_cases):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(1, 16 // n + 1))
        a = rng.standard_normal(n * k) + 1j * rng.standard_normal(n * k)
        b = a + rng.uniform(0, 2) * (rng.standard_normal(n * k) + 1j * rng.standard_normal(n * k))
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        lhs = trace_norm(purification_density(a, n) - purification_density(b, n))
        worst = max(worst, lhs - 2 * np.linalg.norm(a - b))
    res.add("||rho - rho'||_1 <= 2 || |rho> - |rho'> ||_2", worst <= 1e-12,
            f"{n_cases} pairs, max excess {worst:.2e}")
    w1 = w2 = w3 = -np.inf
    for _ in range(n_cases):
        n = int(rng.integers(1, 17))
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        p = random_projector(rng, n)
        tx = trace_norm(x)
        w1 = max(w1, tx - math.sqrt(n) * np.linalg.norm(x))
        w2 = max(w2, trace_norm(x @ p) - tx)
        w3 = max(w3, trace_norm(p @ x @ p) - tx)
    tol = 1e-10
    res.add("||X||_1 <= sqrt(dim) ||X||_2", w1 <= tol, f"max excess {w1:.2e}")
    res.add("||XP||_1 <= ||X||_1", w2 <= tol, f"max excess {w2:.2e}")
    res.add("||PXP||_1 <= ||X||_1", w3 <= tol, f"max excess {w3:.2e}")
    return res


def run_suites(names=SUITES, seed=0, results_dir=None, quick=False,
               tolerance=1e-6) -> list[SuiteResult]:
    """Run the selected suites; ``quick`` shrinks the random sample sizes tenfold."""
    scale = 10 if quick else 1
    out = []
    for name in names:
        if name == "ed":
            out.append(ed_suite(tolerance, results_dir=results_dir))
        elif name == "inequality":
            out.append(inequality_suite(seed, 100 // scale, 10_000 // scale, 100 // scale))
        elif name == "majorization":
            out.append(majorization_suite(seed, 1000 // scale))
        elif name == "trotter":
            out.append(trotter_suite())
        elif name == "norms":
            out.append(norms_suite(seed, 1000 // scale))
        else:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return out
