"""Lattice Hamiltonians written as sums of nearest-neighbour bond terms.

Couplings are dimensionless.  All chains have open boundaries, so a chain of
``L`` sites has ``L - 1`` bond terms ``h_{i,i+1}``.  Two-site matrices act on
``|s_i, s_{i+1}>`` with ``s_i`` the major index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError

KINDS = ("xxz_half", "heisenberg_spin_s", "bilinear_biquadratic_spin1", "bose_hubbard")

_DEFAULTS = {
    "xxz_half": {"delta": 1.0},
    "heisenberg_spin_s": {"spin": 1.5},
    "bilinear_biquadratic_spin1": {"theta": 0.0},
    "bose_hubbard": {"J": 0.25, "U": 1.0, "mu": 0.5, "n_max": 5},
}


def spin_matrices(S):
    """Spin operators ``(Sx, Sy, Sz)`` for spin quantum number ``S``.

    Basis states are ordered ``m = S, S-1, ..., -S``.  ``Sy`` is complex.
    """
    two_s = 2 * Fraction(S).limit_denominator(2)
    if two_s.denominator != 1 or two_s < 0 or abs(float(two_s) / 2 - float(S)) > 1e-12:
        raise ParameterError(f"invalid spin {S}")
    dim = int(two_s) + 1
    s = float(S)
    m = s - np.arange(dim)
    # <m+1| S+ |m> = sqrt(s(s+1) - m(m+1))
    sp = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1)
    sx = (sp + sp.T) / 2
    sy = (sp - sp.T) / 2j
    sz = np.diag(m)
    return sx, sy, sz


def boson_matrices(n_max):
    """Truncated ladder operators ``(b, b†, n)`` on ``|0>, ..., |n_max>``."""
    if int(n_max) != n_max or n_max < 1:
        raise ParameterError(f"n_max must be a positive integer, got {n_max}")
    n_max = int(n_max)
    b = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)
    return b, b.T.copy(), np.diag(np.arange(n_max + 1, dtype=float))


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of one of the supported chains.

    ``params`` holds ``delta`` (xxz_half), ``spin`` (heisenberg_spin_s),
    ``theta`` (bilinear_biquadratic_spin1) or ``J, U, mu, n_max``
    (bose_hubbard).  Missing entries take the defaults above.
    """

    kind: str
    L: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown model kind {self.kind!r}")
        if int(self.L) != self.L or self.L < 1:
            raise ParameterError(f"invalid chain length {self.L}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ParameterError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        merged = dict(_DEFAULTS[self.kind])
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        object.__setattr__(self, "L", int(self.L))
        if self.kind == "heisenberg_spin_s":
            spin_matrices(merged["spin"])
            if float(merged["spin"]) <= 0:
                raise ParameterError("spin must be positive")
        if self.kind == "bose_hubbard":
            boson_matrices(merged["n_max"])

    @property
    def d(self):
        if self.kind == "xxz_half":
            return 2
        if self.kind == "heisenberg_spin_s":
            return int(round(2 * float(self.params["spin"]))) + 1
        if self.kind == "bilinear_biquadratic_spin1":
            return 3
        return int(self.params["n_max"]) + 1

    @property
    def model_id(self):
        args = ",".join(f"{k}={self.params[k]:g}" for k in sorted(self.params))
        return f"{self.kind}({args};L={self.L})"

    def to_dict(self):
        return {"kind": self.kind, "L": self.L, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"kind", "L", "params"}
        if unknown:
            raise ParameterError(f"unknown model keys {sorted(unknown)}")
        return cls(data["kind"], data["L"], dict(data.get("params", {})))


def xxz(L, delta=1.0):
    return ModelSpec("xxz_half", L, {"delta": delta})


def heisenberg(L, spin=1.5):
    return ModelSpec("heisenberg_spin_s", L, {"spin": spin})


def bilinear_biquadratic(L, theta=0.0):
    return ModelSpec("bilinear_biquadratic_spin1", L, {"theta": theta})


def bose_hubbard(L, J=0.25, U=1.0, mu=0.5, n_max=5):
    return ModelSpec("bose_hubbard", L, {"J": J, "U": U, "mu": mu, "n_max": n_max})


@dataclass(frozen=True)
class BondTerm:
    """Two-site term ``h_{i,i+1}`` acting on sites ``site`` and ``site + 1``."""

    site: int
    matrix: np.ndarray


def _real(m):
    if np.max(np.abs(np.imag(m))) > 1e-12:
        raise ParameterError("bond term is not real")
    return np.ascontiguousarray(np.real(m))


def _spin_dot(S):
    sx, sy, sz = spin_matrices(S)
    return _real(np.kron(sx, sx) + np.kron(sy, sy) + np.kron(sz, sz))


def build_bond_terms(spec: ModelSpec) -> list[BondTerm]:
    """Bond matrices whose sum is the chain Hamiltonian.

    For the Bose-Hubbard chain the on-site energy ``U n(n-1)/2 - mu n`` is
    split half/half onto the two bonds touching a site; the end sites put
    their full on-site energy on their single bond.
    """
    p = spec.params
    L = spec.L
    if L < 2:
        raise ParameterError("bond terms need L >= 2")
    if spec.kind == "xxz_half":
        sx, sy, sz = spin_matrices(0.5)
        h = _real(np.kron(sx, sx) + np.kron(sy, sy) + p["delta"] * np.kron(sz, sz))
        return [BondTerm(i, h) for i in range(L - 1)]
    if spec.kind == "heisenberg_spin_s":
        h = _spin_dot(p["spin"])
        return [BondTerm(i, h) for i in range(L - 1)]
    if spec.kind == "bilinear_biquadratic_spin1":
        sd = _spin_dot(1)
        th = p["theta"]
        h = np.cos(th) * sd + np.sin(th) * (sd @ sd)
        return [BondTerm(i, h) for i in range(L - 1)]

    b, bd, n = boson_matrices(p["n_max"])
    eye = np.eye(b.shape[0])
    onsite = p["U"] * n @ (n - eye) / 2 - p["mu"] * n
    hop = -p["J"] * (np.kron(bd, b) + np.kron(b, bd))
    terms = []
    for i in range(L - 1):
        wl = 1.0 if i == 0 else 0.5
        wr = 1.0 if i == L - 2 else 0.5
        h = hop + wl * np.kron(onsite, eye) + wr * np.kron(eye, onsite)
        terms.append(BondTerm(i, h))
    return terms
