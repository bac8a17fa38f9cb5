"""Imaginary-time evolution of thermofield doubles with Trotter gate sweeps.

Step convention: one Trotter step raises the inverse temperature by ``dtau``
and therefore applies ``exp(-dtau * H / 2)`` to the physical legs, because
the purification evolves with ``exp(-beta H / 2) ⊗ 1``.  A layer with
coefficient ``c`` uses bond gates ``exp(-c * dtau / 2 * h)``.

Gates are applied with the orthogonality center on the gate, so every
truncation is a Schmidt truncation of the current state.  The two parities
are swept in alternating directions to keep the center moves short.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError, ParameterError, ResourceExhaustedError
from .models import BondTerm
from .mps import (BondSpectrum, PurificationMPS, _canonicalize_inplace,
                  apply_two_site, bond_expectations, col_charges, move_center,
                  row_charges)
from .tensor import block_svd_truncate, full_svd, truncation_rank

SUZUKI_P = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
BETA_TOL = 1e-9


@dataclass(frozen=True)
class TrotterPlan:
    """Ordered gate layers ``(parity, coefficient)`` making up one step.

    Parity ``"even"`` covers bonds ``(0,1), (2,3), ...`` and ``"odd"``
    covers ``(1,2), (3,4), ...``.
    """

    order: int
    dtau: float
    layers: tuple

    @property
    def steps_per_unit_beta(self):
        return 1.0 / self.dtau

    def parity_sums(self):
        sums = {"even": 0.0, "odd": 0.0}
        for parity, c in self.layers:
            sums[parity] += c
        return sums

    def digest(self):
        text = repr((self.order, float(self.dtau).hex(),
                     [(p, float(c).hex()) for p, c in self.layers]))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _strang(c):
    return [("even", c / 2), ("odd", c), ("even", c / 2)]


def build_trotter_plan(order: int, dtau: float) -> TrotterPlan:
    """Second-order Strang splitting or the fourth-order Suzuki fractal.

    The fourth-order plan chains five Strang sub-steps with weights
    ``p, p, 1-4p, p, p`` where ``p = 1 / (4 - 4**(1/3))``.
    """
    if dtau <= 0:
        raise ParameterError("dtau must be positive")
    if order == 2:
        layers = _strang(1.0)
    elif order == 4:
        p = SUZUKI_P
        layers = []
        for w in (p, p, 1 - 4 * p, p, p):
            layers += _strang(w)
    else:
        raise ParameterError(f"unsupported Trotter order {order}")
    return TrotterPlan(order, float(dtau), tuple(layers))


def merge_layers(layers):
    """Fuse neighbouring layers of equal parity (their gates commute)."""
    merged = []
    for parity, c in layers:
        if merged and merged[-1][0] == parity:
            merged[-1] = (parity, merged[-1][1] + c)
        else:
            merged.append((parity, c))
    return merged


def gate_exponential(h, x: float) -> np.ndarray:
    """``exp(-x h)`` for a Hermitian bond matrix via its eigendecomposition."""
    h = np.asarray(getattr(h, "matrix", h))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigendecomposition of bond term failed") from exc
    g = (v * np.exp(-x * w)) @ v.conj().T
    if np.isrealobj(h):
        g = g.real
    return g


@dataclass
class EvolutionConfig:
    """Parameters of an imaginary-time run.

    ``beta_grid`` lists the inverse temperatures at which the observer is
    called; ``target_beta`` is always measured.  Gaps between measurement
    points must be multiples of ``dtau``.
    """

    target_beta: float
    dtau: float = 0.01
    order: int = 4
    max_rank: int | None = None
    rel_weight_cutoff: float = 1e-12
    beta_grid: Sequence[float] = ()
    max_seconds: float | None = None
    max_bytes: int | None = None


@dataclass
class Snapshot:
    """Read-only view handed to the observer after a full Trotter step."""

    beta: float
    spectra: list
    bond_dims: list
    energy: float
    log_norm: float
    discarded: np.ndarray
    state: PurificationMPS = field(repr=False)


def measurement_schedule(start_beta, config):
    """``(beta, n_steps)`` pairs from ``start_beta`` up to the target."""
    points = sorted({float(b) for b in config.beta_grid
                     if start_beta + BETA_TOL < b <= config.target_beta + BETA_TOL})
    if not points or abs(points[-1] - config.target_beta) > BETA_TOL:
        points.append(float(config.target_beta))
    schedule = []
    prev = start_beta
    for b in points:
        n = (b - prev) / config.dtau
        if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
            raise ParameterError(
                f"dtau={config.dtau} does not divide the gap {prev:g} -> {b:g}")
        schedule.append((b, int(round(n))))
        prev = b
    return schedule


class _GateSweeper:
    def __init__(self, state, terms, config, plan):
        self.state = state
        self.d = state.d
        self.terms = list(terms)
        self.max_rank = config.max_rank
        self.cutoff = config.rel_weight_cutoff
        self.dtau = plan.dtau
        self.discarded = np.zeros(state.L - 1)
        self._gates = {}

    def gates(self, coefficient):
        key = float(coefficient)
        if key not in self._gates:
            x = key * self.dtau / 2
            self._gates[key] = [gate_exponential(t.matrix, x) for t in self.terms]
        return self._gates[key]

    def _split(self, i, gate, center_left):
        st = self.state
        a, b = st.tensors[i], st.tensors[i + 1]
        dl, p, _ = a.shape
        dr = b.shape[2]
        theta = apply_two_site(np.tensordot(a, b, axes=(2, 0)), gate, self.d)
        m = theta.reshape(dl * p, p * dr)
        if not np.all(np.isfinite(m)):
            raise NumericalError(f"non-finite entries after gate on bond {i + 1}")
        if st.charges is None:
            u, s, vh = full_svd(m)
            total = float(np.dot(s, s))
            r = truncation_rank(s, self.max_rank, self.cutoff)
            kept = s[:r]
        else:
            (u, kept, vh, lost), labels = block_svd_truncate(
                m, row_charges(st, i), col_charges(st, i + 1), self.max_rank, self.cutoff)
            r = kept.size
            total = float(np.dot(kept, kept)) + lost
            st.charges[i + 1] = labels
        if total == 0.0 or r == 0:
            raise NumericalError("gate annihilated the state")
        norm2 = float(np.dot(kept, kept))
        self.discarded[i] += (total - norm2) / total
        kept = kept / np.sqrt(norm2)
        st.log_norm += 0.5 * np.log(norm2)
        if center_left:
            st.tensors[i] = (u[:, :r] * kept).reshape(dl, p, r)
            st.tensors[i + 1] = vh[:r].reshape(r, p, dr)
            st.center = i
        else:
            st.tensors[i] = u[:, :r].reshape(dl, p, r)
            st.tensors[i + 1] = (kept[:, None] * vh[:r]).reshape(r, p, dr)
            st.center = i + 1
        st.bond_spectra[i] = BondSpectrum(kept * kept, i + 1)

    def apply_layer(self, parity, coefficient):
        st = self.state
        first = 0 if parity == "even" else 1
        bonds = list(range(first, st.L - 1, 2))
        if not bonds:
            return
        gates = self.gates(coefficient)
        if st.center is None:
            move_center(st, 0)
        if st.center <= (st.L - 1) / 2:
            for i in bonds:
                move_center(st, i)
                self._split(i, gates[i], center_left=False)
        else:
            for i in reversed(bonds):
                move_center(st, i + 1)
                self._split(i, gates[i], center_left=True)


def conserves_charge(matrix, d) -> bool:
    """Whether a bond matrix commutes with the sum of the two basis indices."""
    k = np.arange(d * d)
    n = k // d + k % d
    return bool(np.max(np.abs(matrix * (n[:, None] - n[None, :])), initial=0.0) < 1e-12)


def take_snapshot(state, terms, discarded=None) -> Snapshot:
    """Canonicalize ``state`` in place and package spectra, energy and norm."""
    if discarded is None:
        discarded = np.zeros(state.L - 1)
    _canonicalize_inplace(state)
    energy = float(np.sum(bond_expectations(state, [t.matrix for t in terms])))
    view = state.copy()
    return Snapshot(state.beta, list(state.bond_spectra), state.bond_dims, energy,
                    state.log_norm, discarded.copy(), view)


def evolve(state: PurificationMPS, terms: Sequence[BondTerm], config: EvolutionConfig,
           observer: Callable[[Snapshot], None] | None = None,
           plan: TrotterPlan | None = None) -> PurificationMPS:
    """Cool ``state`` from its current ``beta`` to ``config.target_beta``.

    The input is not modified.  ``observer`` receives a :class:`Snapshot`
    at each measurement point, taken only after complete Trotter steps.
    Adjacent layers of consecutive steps are merged between measurements.

    Raises
    ------
    ResourceExhaustedError
        When the time or memory budget runs out; carries the state of the
        last measurement point.
    """
    if plan is None:
        plan = build_trotter_plan(config.order, config.dtau)
    terms = list(terms)
    if len(terms) != state.L - 1:
        raise ParameterError("need one bond term per bond")
    for t in terms:
        if t.matrix.shape != (state.d ** 2, state.d ** 2):
            raise ParameterError("bond term does not match the local dimension")
    if config.target_beta < state.beta - BETA_TOL:
        raise ParameterError("target_beta lies below the current beta")
    if abs(config.target_beta - state.beta) <= BETA_TOL:
        return state.copy()

    st = state.copy()
    if st.charges is not None and not all(conserves_charge(t.matrix, st.d) for t in terms):
        st.charges = None
    sweeper = _GateSweeper(st, terms, config, plan)
    start = time.monotonic()
    last_measured = st.copy()
    for beta, n_steps in measurement_schedule(st.beta, config):
        for parity, c in merge_layers(list(plan.layers) * n_steps):
            sweeper.apply_layer(parity, c)
            if config.max_seconds is not None and time.monotonic() - start > config.max_seconds:
                raise ResourceExhaustedError(
                    f"time budget of {config.max_seconds}s exhausted", last_measured)
            if config.max_bytes is not None and st.nbytes > config.max_bytes:
                raise ResourceExhaustedError(
                    f"state size {st.nbytes} B exceeds budget {config.max_bytes} B",
                    last_measured)
        st.beta = beta
        if observer is not None:
            snap = take_snapshot(st, terms, sweeper.discarded)
            observer(snap)
            last_measured = snap.state
        sweeper.discarded[:] = 0.0
    if observer is None:
        _canonicalize_inplace(st)
    return st
