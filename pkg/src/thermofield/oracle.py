"""Exact reference results for small chains and for the free-fermion XX chain.

Dense Hamiltonians are assembled here straight from site operators with
Kronecker products, independently of :func:`thermofield.models.build_bond_terms`.
Thermofield-double vectors use the same ``(sigma_1, sigma_bar_1, ...)``
ordering as :mod:`thermofield.mps`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import RangeError, SizeError
from .models import ModelSpec, boson_matrices, spin_matrices
from .mps import BondSpectrum

DEFAULT_HILBERT_CAP = 4096
OCCUPATION_SNAP = 1e-14


@dataclass
class DenseState:
    """Dense vector on ``(C^d ⊗ C^d)^{⊗L}``, site-locally paired."""

    vector: np.ndarray
    d: int
    L: int

    @property
    def dimension(self):
        return self.vector.size


def _embed(ops, L):
    """Kronecker product with ``ops[site]`` placed on the given sites."""
    d = next(iter(ops.values())).shape[0]
    eye = np.eye(d)
    return reduce(np.kron, [ops.get(i, eye) for i in range(L)])


def _check_cap(d, L, cap):
    if d ** L > cap:
        raise SizeError(f"Hilbert space {d}^{L} exceeds cap {cap}")


def dense_hamiltonian(spec: ModelSpec, cap: int = DEFAULT_HILBERT_CAP) -> np.ndarray:
    """Full many-body Hamiltonian of ``spec`` as a dense real matrix."""
    L, d, p = spec.L, spec.d, spec.params
    _check_cap(d, L, cap)
    H = np.zeros((d ** L, d ** L), dtype=complex)
    if spec.kind == "bose_hubbard":
        b, bd, n = boson_matrices(p["n_max"])
        onsite = p["U"] * n @ (n - np.eye(d)) / 2 - p["mu"] * n
        for i in range(L):
            H += _embed({i: onsite}, L)
        for i in range(L - 1):
            H -= p["J"] * (_embed({i: bd, i + 1: b}, L) + _embed({i: b, i + 1: bd}, L))
        return H.real.copy()

    spin = {"xxz_half": 0.5, "bilinear_biquadratic_spin1": 1}.get(spec.kind, p.get("spin"))
    sx, sy, sz = spin_matrices(spin)
    for i in range(L - 1):
        xy = _embed({i: sx, i + 1: sx}, L) + _embed({i: sy, i + 1: sy}, L)
        zz = _embed({i: sz, i + 1: sz}, L)
        if spec.kind == "xxz_half":
            H += xy + p["delta"] * zz
        elif spec.kind == "heisenberg_spin_s":
            H += xy + zz
        else:
            dot = xy + zz
            H += np.cos(p["theta"]) * dot + np.sin(p["theta"]) * dot @ dot
    return H.real.copy()


def embed_bond_operator(op, site, d, L):
    """Lift a ``d^2 x d^2`` operator on ``(site, site+1)`` to the full chain."""
    left = np.eye(d ** site)
    right = np.eye(d ** (L - site - 2))
    return np.kron(np.kron(left, op), right)


def _thermal_factors(H, beta):
    e, v = np.linalg.eigh(H)
    shifted = e - e[0]
    return e, v, shifted


def thermal_density(H, beta) -> np.ndarray:
    """``exp(-beta H) / Z`` for a dense Hermitian ``H``."""
    _, v, shifted = _thermal_factors(H, beta)
    w = np.exp(-beta * shifted)
    w /= w.sum()
    return (v * w) @ v.conj().T


def tds_vector(H, d, L, beta) -> DenseState:
    """Thermofield double ``(exp(-beta H/2) ⊗ 1)|1> / sqrt(Z)`` from a dense ``H``."""
    _, v, shifted = _thermal_factors(H, beta)
    w = np.exp(-beta * shifted / 2)
    w /= np.sqrt(np.sum(w * w))
    m = (v * w) @ v.conj().T
    # m[sigma, sigma_bar] -> interleave (sigma_1, sigma_bar_1, ...)
    t = np.real_if_close(m).reshape((d,) * (2 * L))
    order = [k for i in range(L) for k in (i, L + i)]
    return DenseState(np.ascontiguousarray(t.transpose(order)).reshape(-1), d, L)


def exact_thermal_density(spec: ModelSpec, beta: float,
                          cap: int = DEFAULT_HILBERT_CAP) -> np.ndarray:
    return thermal_density(dense_hamiltonian(spec, cap), beta)


def exact_tds(spec: ModelSpec, beta: float, cap: int = DEFAULT_HILBERT_CAP) -> DenseState:
    return tds_vector(dense_hamiltonian(spec, cap), spec.d, spec.L, beta)


def trace_out_ancilla(state: DenseState) -> np.ndarray:
    """Reduced density matrix of the physical copy."""
    d, L = state.d, state.L
    t = state.vector.reshape((d,) * (2 * L))
    phys = list(range(0, 2 * L, 2))
    anc = list(range(1, 2 * L, 2))
    m = t.transpose(phys + anc).reshape(d ** L, d ** L)
    return m @ m.conj().T


def reduced_spectrum(state: DenseState, bond: int) -> BondSpectrum:
    """Eigenvalues of the reduced density matrix of sites ``0..bond-1`` (both copies)."""
    if not 1 <= bond <= state.L - 1:
        raise RangeError(f"bond {bond} outside 1..{state.L - 1}")
    p = state.d * state.d
    m = state.vector.reshape(p ** bond, -1)
    if m.shape[0] <= m.shape[1]:
        rho = m @ m.conj().T
    else:
        rho = m.conj().T @ m
    w = np.clip(np.linalg.eigvalsh(rho), 0.0, None)[::-1]
    return BondSpectrum(w / w.sum(), bond)


def thermal_expectation(spec: ModelSpec, beta: float, op) -> float:
    """``Tr(rho_beta O)`` for a full-chain operator."""
    return float(np.real(np.trace(exact_thermal_density(spec, beta) @ op)))


def energy_gap(spec: ModelSpec, cap: int = DEFAULT_HILBERT_CAP) -> float:
    """Difference of the two lowest eigenvalues of the dense Hamiltonian."""
    e = np.linalg.eigvalsh(dense_hamiltonian(spec, cap))
    return float(e[1] - e[0])


def ground_state(spec: ModelSpec, cap: int = DEFAULT_HILBERT_CAP) -> np.ndarray:
    _, v = np.linalg.eigh(dense_hamiltonian(spec, cap))
    return v[:, 0]


def pure_state_spectrum(vector, d, L, bond) -> np.ndarray:
    """Schmidt weights of an ordinary (unpurified) chain state."""
    m = np.asarray(vector).reshape(d ** bond, -1)
    s = np.linalg.svd(m, compute_uv=False)
    w = s * s
    return w / w.sum()


# -- free fermions -----------------------------------------------------------

def xx_single_particle_energies(L):
    """Hopping spectrum of ``sum_i (Sx Sx + Sy Sy)`` after Jordan-Wigner."""
    return np.cos(np.pi * np.arange(1, L + 1) / (L + 1))


def xx_tds_correlation_matrix(L, beta):
    """Correlation matrix of the XX-chain thermofield double as a Slater determinant.

    Each physical fermion ``c_i`` is paired with an ancilla mode ``a_i``
    (a particle-hole transformed Jordan-Wigner ancilla); the thermofield
    double is then a number-conserving Gaussian state with ``L`` particles
    in ``2L`` modes ordered ``c_1, a_1, c_2, a_2, ...``.
    """
    h = np.zeros((L, L))
    i = np.arange(L - 1)
    h[i, i + 1] = h[i + 1, i] = 0.5
    e, u = np.linalg.eigh(h)
    x = beta * e

    def conj(diag):
        return (u * diag) @ u.T

    c = np.empty((2 * L, 2 * L))
    c[0::2, 0::2] = conj(0.5 * (1 - np.tanh(x / 2)))
    c[1::2, 1::2] = conj(0.5 * (1 + np.tanh(x / 2)))
    off = conj(0.5 / np.cosh(x / 2))
    c[0::2, 1::2] = off
    c[1::2, 0::2] = off
    return c


def xx_tds_mode_occupations(L, beta, bond):
    """Eigenvalues of the correlation matrix restricted to sites ``0..bond-1``."""
    c = xx_tds_correlation_matrix(L, beta)
    nu = np.clip(np.linalg.eigvalsh(c[: 2 * bond, : 2 * bond]), 0.0, 1.0)
    # eigenvalue round-off would otherwise leak into Renyi indices below one
    nu[nu < OCCUPATION_SNAP] = 0.0
    nu[nu > 1.0 - OCCUPATION_SNAP] = 1.0
    return nu


def xx_tds_entropy(L, beta, bond, alpha):
    """Renyi entropy of the XX-chain thermofield double at ``bond``."""
    nu = xx_tds_mode_occupations(L, beta, bond)
    if alpha == 1:
        nu = nu[(nu > 1e-300) & (nu < 1.0)]
        return float(-np.sum(nu * np.log(nu) + (1 - nu) * np.log1p(-nu)))
    return float(np.sum(np.log(nu ** alpha + (1 - nu) ** alpha)) / (1 - alpha))


def xx_tds_spectrum(L, beta, bond, floor=1e-16, max_len=200_000):
    """Leading Schmidt weights of the XX-chain thermofield double.

    Products of single-mode weights ``(nu, 1 - nu)`` are enumerated and
    pruned below ``floor``.
    """
    nu = xx_tds_mode_occupations(L, beta, bond)
    w = np.ones(1)
    for v in nu:
        w = np.concatenate([w * v, w * (1 - v)])
        w = w[w >= floor]
        if w.size > max_len:
            w = np.sort(w)[::-1][:max_len]
    return BondSpectrum(np.sort(w)[::-1], bond)
