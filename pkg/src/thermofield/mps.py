"""Matrix-product purifications of thermal states.

A :class:`PurificationMPS` stores one rank-3 tensor per lattice site with
index order ``(left bond, p, right bond)``.  The fused physical index
``p = sigma * d + sigma_bar`` combines the physical leg ``sigma`` (major)
with its ancilla partner ``sigma_bar`` (minor).  Dense vectors use the
site-local pairing ``(sigma_1, sigma_bar_1, sigma_2, sigma_bar_2, ...)``
in C order, which is the same convention read off the tensors.

Sites are numbered ``0 .. L-1``.  Bond ``l`` (``1 <= l <= L-1``) is the cut
after the first ``l`` sites, so subsystem A contains sites ``0 .. l-1`` of
both copies.

The stored state is kept at unit norm.  Norms divided out by gates,
truncations and canonicalization are collected in ``log_norm`` so the
unnormalized vector is ``exp(log_norm) * state``.

Optionally the state carries integer charge labels on every bond.  The
local charge of ``p = sigma * d + sigma_bar`` is ``sigma - sigma_bar``; the
infinite-temperature state has charge zero everywhere and any evolution
that conserves the total of the basis indices keeps the labels valid.
Labelled states are factorized block by block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (DataError, DimensionError, DomainError, NumericalError, ParameterError,
                     RangeError, SizeError)
from .tensor import block_qr, block_svd_truncate, full_svd, svd_truncate

CHECKPOINT_VERSION = 1
DEFAULT_DENSE_CAP = 2 ** 24
SPECTRUM_FLOOR = 1e-16


@dataclass
class BondSpectrum:
    """Descending eigenvalues of the reduced density matrix at one cut."""

    weights: np.ndarray
    bond: int

    @classmethod
    def from_singular_values(cls, s, bond):
        w = np.sort(np.asarray(s, dtype=float) ** 2)[::-1]
        total = w.sum()
        if total > 0:
            w = w / total
        return cls(w, bond)

    def __len__(self):
        return len(self.weights)


class PurificationMPS:
    """Thermofield-double state in matrix-product form.

    Parameters
    ----------
    tensors : list of ndarray
        Site tensors of shape ``(D_left, d*d, D_right)``.  The outer bonds
        have extent 1.
    d : int
        Local dimension of one copy of the system.
    log_norm : float
        Logarithm of the norm divided out of the stored tensors.
    center : int or None
        Orthogonality center site, ``None`` if the gauge is unknown.
    bond_spectra : list of BondSpectrum or None
        Schmidt spectra of bonds ``1..L-1``; entries may be stale after a
        gate has been applied elsewhere, see :func:`canonicalize`.
    beta : float
        Inverse temperature reached by the evolution.
    charges : list of ndarray or None
        Integer charge labels of bonds ``0..L`` (both boundaries included),
        or ``None`` for an unlabelled state.
    """

    def __init__(self, tensors, d, log_norm=0.0, center=None,
                 bond_spectra=None, beta=0.0, charges=None):
        self.tensors = [np.asarray(t) for t in tensors]
        self.d = int(d)
        self.log_norm = float(log_norm)
        self.center = center
        self.beta = float(beta)
        if bond_spectra is None:
            bond_spectra = [None] * (len(self.tensors) - 1)
        self.bond_spectra = list(bond_spectra)
        self.charges = None if charges is None else [np.asarray(q, dtype=np.int64)
                                                     for q in charges]
        self._check()

    def _check(self):
        if len(self.tensors) < 1:
            raise DimensionError("an MPS needs at least one site")
        p = self.d * self.d
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise DimensionError("boundary bonds must have extent 1")
        for i, t in enumerate(self.tensors):
            if t.ndim != 3 or t.shape[1] != p:
                raise DimensionError(f"site {i}: expected (Dl, {p}, Dr), got {t.shape}")
            if i + 1 < len(self.tensors) and t.shape[2] != self.tensors[i + 1].shape[0]:
                raise DimensionError(f"bond mismatch between sites {i} and {i + 1}")
        if self.charges is not None:
            if len(self.charges) != len(self.tensors) + 1:
                raise DimensionError("need charge labels for bonds 0..L")
            for i, t in enumerate(self.tensors):
                if len(self.charges[i]) != t.shape[0] or len(self.charges[i + 1]) != t.shape[2]:
                    raise DimensionError(f"charge labels do not match bonds of site {i}")

    @property
    def L(self):
        return len(self.tensors)

    @property
    def bond_dims(self):
        """Extents of the internal bonds ``1..L-1``."""
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_bond(self):
        return max(self.bond_dims, default=1)

    @property
    def local_charges(self):
        p = np.arange(self.d * self.d)
        return p // self.d - p % self.d

    @property
    def nbytes(self):
        return sum(t.nbytes for t in self.tensors)

    def copy(self):
        charges = None if self.charges is None else [q.copy() for q in self.charges]
        return PurificationMPS([t.copy() for t in self.tensors], self.d,
                               self.log_norm, self.center,
                               list(self.bond_spectra), self.beta, charges)

    def __repr__(self):
        return (f"PurificationMPS(L={self.L}, d={self.d}, beta={self.beta:g}, "
                f"max_bond={self.max_bond})")


def build_infinite_temperature_tds(d: int, L: int) -> PurificationMPS:
    """Normalized product state with every site maximally entangled with its ancilla."""
    if d < 2 or L < 2:
        raise ParameterError("need d >= 2 and L >= 2")
    local = (np.eye(d) / np.sqrt(d)).reshape(1, d * d, 1)
    spectra = [BondSpectrum(np.ones(1), ell) for ell in range(1, L)]
    charges = [np.zeros(1, np.int64) for _ in range(L + 1)]
    return PurificationMPS([local.copy() for _ in range(L)], d, center=0,
                           bond_spectra=spectra, charges=charges)


# -- gauge moves (in place) -------------------------------------------------

def row_charges(state, i):
    """Charges of the fused ``(left bond, p)`` index of site ``i``."""
    return (state.charges[i][:, None] + state.local_charges[None, :]).reshape(-1)


def col_charges(state, i):
    """Charges of the fused ``(p, right bond)`` index of site ``i``, as seen from the left bond."""
    return (state.charges[i + 1][None, :] - state.local_charges[:, None]).reshape(-1)


def _shift_right(state, i):
    a = state.tensors[i]
    dl, p, dr = a.shape
    m = a.reshape(dl * p, dr)
    if state.charges is None:
        q, r = np.linalg.qr(m)
    else:
        q, r, labels = block_qr(m, row_charges(state, i), state.charges[i + 1])
        state.charges[i + 1] = labels
    state.tensors[i] = q.reshape(dl, p, q.shape[1])
    state.tensors[i + 1] = np.tensordot(r, state.tensors[i + 1], axes=(1, 0))
    state.center = i + 1


def _shift_left(state, i):
    a = state.tensors[i]
    dl, p, dr = a.shape
    mt = a.reshape(dl, p * dr).T
    if state.charges is None:
        q, r = np.linalg.qr(mt)
    else:
        q, r, labels = block_qr(mt, col_charges(state, i), state.charges[i])
        state.charges[i] = labels
    state.tensors[i] = q.T.reshape(q.shape[1], p, dr)
    state.tensors[i - 1] = np.tensordot(state.tensors[i - 1], r.T, axes=(2, 0))
    state.center = i - 1


def move_center(state, site):
    """Move the orthogonality center to ``site`` in place using QR steps."""
    if state.center is None:
        for i in range(site):
            _shift_right(state, i)
        for i in range(state.L - 1, site, -1):
            _shift_left(state, i)
        state.center = site
        return
    while state.center < site:
        _shift_right(state, state.center)
    while state.center > site:
        _shift_left(state, state.center)


def _normalize_center(state):
    c = state.tensors[state.center]
    norm = float(np.linalg.norm(c))
    if not np.isfinite(norm):
        raise NumericalError("non-finite tensor entries")
    if norm == 0.0:
        raise NumericalError("state has zero norm")
    state.tensors[state.center] = c / norm
    state.log_norm += np.log(norm)


def _sweep_left_svd(state, max_rank=None, cutoff=0.0):
    """Right-to-left SVD sweep of a left-canonical state with center at L-1.

    Realizes the Schmidt recurrence: afterwards every site but the first is
    right-orthonormal.  Returns per-bond spectra and discarded weights.
    """
    L = state.L
    spectra = [None] * (L - 1)
    discarded = np.zeros(L - 1)
    for i in range(L - 1, 0, -1):
        a = state.tensors[i]
        dl, p, dr = a.shape
        m = a.reshape(dl, p * dr)
        if state.charges is not None:
            if not np.all(np.isfinite(m)):
                raise NumericalError("non-finite tensor entries")
            (u, s, vh, discarded[i - 1]), labels = block_svd_truncate(
                m, state.charges[i], col_charges(state, i), max_rank, cutoff)
            state.charges[i] = labels
        elif max_rank is None and cutoff == 0.0:
            if not np.all(np.isfinite(m)):
                raise NumericalError("non-finite tensor entries")
            u, s, vh = full_svd(m)
            keep = s > 0.0
            u, s, vh = u[:, keep], s[keep], vh[keep]
        else:
            u, s, vh, discarded[i - 1] = svd_truncate(m, max_rank, cutoff)
        if s.size == 0:
            raise NumericalError("state has zero norm")
        state.tensors[i] = vh.reshape(len(s), p, dr)
        state.tensors[i - 1] = np.tensordot(state.tensors[i - 1], u * s, axes=(2, 0))
        spectra[i - 1] = BondSpectrum.from_singular_values(s, i)
    state.center = 0
    return spectra, discarded


def _canonicalize_inplace(state, bond=None):
    L = state.L
    if bond is not None and not 1 <= bond <= L - 1:
        raise RangeError(f"bond {bond} outside 1..{L - 1}")
    for i in range(L - 1):
        _shift_right(state, i)
    state.center = L - 1
    _normalize_center(state)
    spectra, _ = _sweep_left_svd(state)
    _normalize_center(state)
    state.bond_spectra = spectra
    if bond is not None:
        move_center(state, bond - 1)
    return state


def canonicalize(state: PurificationMPS, bond: int | None = None) -> PurificationMPS:
    """Return a mixed-canonical copy of ``state`` with exact bond spectra.

    After the call, sites ``0..bond-2`` are left-orthonormal, site ``bond-1``
    carries the norm and sites ``bond..L-1`` are right-orthonormal.  With
    ``bond=None`` the center is site 0 and every other site satisfies the
    right-orthonormality condition ``sum_p A^p A^p† = 1``.  All bond spectra
    are recomputed from the current tensors.
    """
    return _canonicalize_inplace(state.copy(), bond)


def schmidt_spectrum(state: PurificationMPS, bond: int) -> BondSpectrum:
    """Schmidt spectrum at the cut after sites ``0..bond-1`` (state untouched)."""
    if not 1 <= bond <= state.L - 1:
        raise RangeError(f"bond {bond} outside 1..{state.L - 1}")
    return canonicalize(state).bond_spectra[bond - 1]


def renyi_entropy(spectrum, alpha: float) -> float:
    """Renyi entropy in nats of a normalized spectrum.

    ``alpha == 1`` gives the von Neumann entropy.  Weights below 1e-16 are
    treated as zero.
    """
    if alpha <= 0:
        raise DomainError(f"Renyi index must be positive, got {alpha}")
    w = np.asarray(getattr(spectrum, "weights", spectrum), dtype=float)
    w = w[w >= SPECTRUM_FLOOR]
    if w.size == 0:
        return 0.0
    if alpha == 1:
        value = -float(np.sum(w * np.log(w)))
    else:
        value = float(np.log(np.sum(w ** alpha)) / (1.0 - alpha))
    return max(value, 0.0)


def truncate_to(state: PurificationMPS, max_rank: int | None,
                rel_weight_cutoff: float = 0.0):
    """Compress every bond with one SVD sweep.

    Returns
    -------
    state : PurificationMPS
        Truncated, renormalized and canonicalized copy.
    eps : ndarray, shape (L-1,)
        Discarded weight at bond ``l`` in ``eps[l-1]``, measured on the
        normalized input before renormalization.
    """
    st = state.copy()
    for i in range(st.L - 1):
        _shift_right(st, i)
    st.center = st.L - 1
    _normalize_center(st)
    _, eps = _sweep_left_svd(st, max_rank, rel_weight_cutoff)
    _normalize_center(st)
    _canonicalize_inplace(st)
    return st, eps


def to_dense(state: PurificationMPS, cap: int = DEFAULT_DENSE_CAP,
             normalized: bool = True) -> np.ndarray:
    """Coefficient vector in the site-local ``(sigma, sigma_bar)`` basis order."""
    size = (state.d * state.d) ** state.L
    if size > cap:
        raise SizeError(f"dense vector of {size} entries exceeds cap {cap}")
    psi = state.tensors[0].reshape(-1, state.tensors[0].shape[2])
    for t in state.tensors[1:]:
        psi = np.tensordot(psi, t, axes=(1, 0)).reshape(-1, t.shape[2])
    psi = psi.reshape(-1)
    if normalized:
        return psi / np.linalg.norm(psi)
    return psi * np.exp(state.log_norm)


def from_dense(vector, d: int, L: int) -> PurificationMPS:
    """Exact MPS of a dense vector by the right-to-left SVD cascade."""
    vector = np.asarray(vector)
    p = d * d
    if vector.size != p ** L:
        raise DimensionError(f"vector of size {vector.size} does not match d={d}, L={L}")
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise NumericalError("zero vector")
    tensors = [None] * L
    spectra = [None] * (L - 1)
    rest = (vector / norm).reshape(p ** (L - 1), p)
    right = 1
    for i in range(L - 1, 0, -1):
        m = rest.reshape(p ** i, p * right)
        u, s, vh = full_svd(m)
        keep = s > 0.0
        u, s, vh = u[:, keep], s[keep], vh[keep]
        tensors[i] = vh.reshape(len(s), p, right)
        spectra[i - 1] = BondSpectrum.from_singular_values(s, i)
        rest = u * s
        right = len(s)
    tensors[0] = rest.reshape(1, p, right)
    return PurificationMPS(tensors, d, log_norm=np.log(norm), center=0,
                           bond_spectra=spectra)


# -- operators on the physical legs ----------------------------------------

def apply_one_site(theta, op, d):
    """Apply a ``d x d`` operator to the physical leg of a site tensor."""
    dl, _, dr = theta.shape
    t = theta.reshape(dl, d, d, dr)
    t = np.tensordot(op, t, axes=(1, 1)).transpose(1, 0, 2, 3)
    return t.reshape(dl, d * d, dr)


def apply_two_site(theta, op, d):
    """Apply a ``d^2 x d^2`` operator to the physical legs of a two-site block.

    ``theta`` has shape ``(Dl, d*d, d*d, Dr)``; ancilla legs are untouched.
    """
    dl, _, _, dr = theta.shape
    t = theta.reshape(dl, d, d, d, d, dr)
    g = op.reshape(d, d, d, d)
    t = np.tensordot(g, t, axes=([2, 3], [1, 3]))
    # axes now (s1', s2', Dl, a1, a2, Dr)
    t = t.transpose(2, 0, 3, 1, 4, 5)
    return t.reshape(dl, d * d, d * d, dr)


def _local_value(state, op, site):
    d = state.d
    if op.shape == (d, d):
        theta = state.tensors[site]
        new = apply_one_site(theta, op, d)
    else:
        theta = np.tensordot(state.tensors[site], state.tensors[site + 1], axes=(2, 0))
        new = apply_two_site(theta, op, d)
    return float(np.real(np.vdot(theta, new) / np.vdot(theta, theta)))


def _operator_span(state, op):
    d = state.d
    if op.shape == (d, d):
        return 1
    if op.shape == (d * d, d * d):
        return 2
    raise DimensionError(f"operator shape {op.shape} does not match d={d}")


def expectation(state: PurificationMPS, op, site: int) -> float:
    """``<state| O ⊗ 1 |state>`` for a one- or two-site operator ``O``.

    A ``d x d`` operator acts on ``site``; a ``d^2 x d^2`` operator acts on
    sites ``site`` and ``site + 1``.  Only the physical legs are touched.
    """
    op = np.asarray(op)
    span = _operator_span(state, op)
    if not 0 <= site <= state.L - span:
        raise RangeError(f"site {site} out of range for a {span}-site operator")
    st = state.copy()
    move_center(st, site)
    return _local_value(st, op, site)


def bond_expectations(state: PurificationMPS, ops) -> np.ndarray:
    """Expectation values of one two-site operator per bond, in one sweep."""
    ops = [np.asarray(o) for o in ops]
    if len(ops) != state.L - 1:
        raise DimensionError("need one operator per bond")
    st = state.copy()
    move_center(st, 0)
    values = np.empty(len(ops))
    for i, op in enumerate(ops):
        if _operator_span(st, op) != 2:
            raise DimensionError("bond operators must be two-site")
        values[i] = _local_value(st, op, i)
        if i < len(ops) - 1:
            _shift_right(st, i)
    return values


# -- diagnostics -----------------------------------------------------------

def right_orthonormality_residual(tensor) -> float:
    """Max-abs deviation of ``sum_p A^p A^p†`` from the identity."""
    dl, p, dr = tensor.shape
    m = tensor.reshape(dl, p * dr)
    return float(np.max(np.abs(m @ m.conj().T - np.eye(dl))))


def left_orthonormality_residual(tensor) -> float:
    dl, p, dr = tensor.shape
    m = tensor.reshape(dl * p, dr)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(dr))))


# -- checkpoints -----------------------------------------------------------

def save_checkpoint(path, state: PurificationMPS, provenance: dict | None = None):
    """Write ``state`` to an ``.npz`` container; reload is bit-exact."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "d": state.d,
        "L": state.L,
        "log_norm": state.log_norm.hex(),
        "beta": state.beta.hex(),
        "center": state.center,
        "charged": state.charges is not None,
        "provenance": provenance or {},
    }
    arrays = {f"tensor_{i}": t for i, t in enumerate(state.tensors)}
    if state.charges is not None:
        arrays.update({f"charges_{i}": q for i, q in enumerate(state.charges)})
    for i, spec in enumerate(state.bond_spectra):
        if spec is not None:
            arrays[f"spectrum_{i + 1}"] = spec.weights
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **arrays)
    tmp.replace(path)
    return path


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(state, provenance)``."""
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise DataError(f"unsupported checkpoint version {meta.get('version')}")
        L = meta["L"]
        tensors = [data[f"tensor_{i}"] for i in range(L)]
        spectra = []
        for ell in range(1, L):
            key = f"spectrum_{ell}"
            spectra.append(BondSpectrum(data[key], ell) if key in data else None)
        charges = None
        if meta.get("charged"):
            charges = [data[f"charges_{i}"] for i in range(L + 1)]
    state = PurificationMPS(tensors, meta["d"], float.fromhex(meta["log_norm"]),
                            meta["center"], spectra, float.fromhex(meta["beta"]), charges)
    return state, meta["provenance"]
