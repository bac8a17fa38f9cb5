import math

import numpy as np
import pytest

from thermofield.errors import RangeError, SizeError
from thermofield.models import bose_hubbard, build_bond_terms, xxz
from thermofield.mps import build_infinite_temperature_tds, renyi_entropy, to_dense
from thermofield.oracle import (DenseState, dense_hamiltonian, energy_gap, exact_tds,
                                exact_thermal_density, ground_state, pure_state_spectrum,
                                reduced_spectrum, tds_vector, trace_out_ancilla,
                                xx_single_particle_energies, xx_tds_entropy, xx_tds_spectrum)


def test_zero_beta_is_infinite_temperature_state():
    # [TRIVIAL]
    v = exact_tds(xxz(4, 1.0), 0.0).vector
    np.testing.assert_allclose(v, to_dense(build_infinite_temperature_tds(2, 4)), atol=1e-14)


def test_large_beta_doubles_ground_state_entropy():
    # [PAPER] the bipartite entropy tends to twice the ground-state value
    model = xxz(4, 1.0)
    s_tds = renyi_entropy(reduced_spectrum(exact_tds(model, 200.0), 2), 1.0)
    s_gs = renyi_entropy(pure_state_spectrum(ground_state(model), 2, 4, 2), 1.0)
    assert s_tds == pytest.approx(2 * s_gs, abs=1e-8)


def test_single_site_field():
    # [DERIVED] H = Sz: amplitudes exp(-beta E/2) on the diagonal pairs
    H = np.diag([0.5, -0.5])
    v = tds_vector(H, 2, 1, 2.0).vector
    ref = np.array([math.exp(-0.5), 0, 0, math.exp(0.5)])
    np.testing.assert_allclose(v, ref / np.linalg.norm(ref), atol=1e-14)


def test_zero_beta_density_is_identity():
    # [TRIVIAL]
    rho = exact_thermal_density(bose_hubbard(2, n_max=2), 0.0)
    np.testing.assert_allclose(rho, np.eye(9) / 9, atol=1e-15)


def test_energy_decreases_with_beta():
    # [TRIVIAL] finite-system thermodynamics
    model = xxz(6, 0.5)
    H = dense_hamiltonian(model)
    energies = [np.trace(exact_thermal_density(model, b) @ H) for b in np.linspace(0, 5, 11)]
    assert np.all(np.diff(energies) < 0)


@pytest.mark.parametrize("beta", [0.3, 1.0, 4.0])
def test_ancilla_trace_gives_thermal_density(beta):
    # [DERIVED] self-consistency of the purification
    model = xxz(5, 1.0)
    rho = trace_out_ancilla(exact_tds(model, beta))
    np.testing.assert_allclose(rho, exact_thermal_density(model, beta), atol=1e-10)


def test_reduced_spectrum_simple_cases():
    # [TRIVIAL]
    product = build_infinite_temperature_tds(2, 3)
    spec = reduced_spectrum(DenseState(to_dense(product), 2, 3), 1)
    np.testing.assert_allclose(spec.weights[0], 1.0)
    np.testing.assert_allclose(spec.weights[1:], 0.0, atol=1e-15)
    bell = np.eye(4).reshape(-1) / 2
    np.testing.assert_allclose(reduced_spectrum(DenseState(bell, 2, 2), 1).weights, [0.25] * 4)
    with pytest.raises(RangeError):
        reduced_spectrum(DenseState(bell, 2, 2), 2)


def _sz_sector(L, m):
    k = np.arange(2 ** L)
    sz = sum(0.5 - ((k >> (L - 1 - i)) & 1) for i in range(L))
    return np.flatnonzero(sz == m)


@pytest.mark.xfail(strict=True, reason="open L=8 chain: Neel doublet splitting 0.15, "
                   "next level 0.99; neither is within 30% of 0.613")
def test_xxz_gapped_gap_at_desk_scale():
    # [PAPER] gap 0.613 in the thermodynamic limit; desk-scale tolerance 30%
    assert abs(energy_gap(xxz(8, 3.0)) - 0.613) <= 0.3 * 0.613


def test_xxz_gapped_spectrum_trends():
    # [PAPER] the magnetized gap approaches 0.613 from above while the
    # quasi-degenerate Neel doublet closes exponentially
    doublet, magnetized = [], []
    for L in (6, 8, 10):
        H = dense_hamiltonian(xxz(L, 3.0))
        e0 = np.linalg.eigvalsh(H)[0]
        idx = _sz_sector(L, 1)
        magnetized.append(np.linalg.eigvalsh(H[np.ix_(idx, idx)])[0] - e0)
        doublet.append(energy_gap(xxz(L, 3.0)))
    assert np.all(np.diff(magnetized) < 0) and magnetized[-1] > 0.613
    assert np.all(np.diff(doublet) < 0)
    assert doublet[2] / doublet[1] < doublet[1] / doublet[0] + 0.05


def test_atomic_limit_gap():
    # [DERIVED] J=0, U=1, mu=1/2: one particle per site, moving one costs 1/2
    assert energy_gap(bose_hubbard(3, J=0.0, U=1.0, mu=0.5, n_max=3)) == pytest.approx(0.5)


def test_xx_gap_from_free_fermions():
    # [DERIVED] adding or removing the fermion closest to zero energy
    eps = xx_single_particle_energies(4)
    assert energy_gap(xxz(4, 0.0)) == pytest.approx(np.min(np.abs(eps)), abs=1e-12)
    assert np.min(np.abs(eps)) == pytest.approx(math.cos(2 * math.pi / 5))


def test_hilbert_cap():
    with pytest.raises(SizeError):
        dense_hamiltonian(xxz(13, 1.0))


@pytest.mark.parametrize("beta", [0.5, 2.0, 6.0])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_free_fermions_match_ed(beta, alpha):
    # [DERIVED] two independent oracles for the XX chain
    L = 6
    ed = renyi_entropy(reduced_spectrum(exact_tds(xxz(L, 0.0), beta), 3), alpha)
    # indices below one weigh the dense eigenvalue round-off near zero
    tol = 1e-9 if alpha >= 1 else 1e-6
    assert xx_tds_entropy(L, beta, 3, alpha) == pytest.approx(ed, abs=tol)


def test_free_fermion_spectrum_matches_ed():
    # [DERIVED]
    ed = reduced_spectrum(exact_tds(xxz(6, 0.0), 2.0), 3).weights
    ff = xx_tds_spectrum(6, 2.0, 3).weights
    n = min(ff.size, int(np.sum(ed > 1e-12)))
    np.testing.assert_allclose(ff[:n], ed[:n], atol=1e-10)


def test_zero_beta_free_fermions():
    # [TRIVIAL] no spatial entanglement at infinite temperature
    for a in (0.5, 1.0):
        assert xx_tds_entropy(32, 0.0, 16, a) == pytest.approx(0.0, abs=1e-12)


def test_bond_terms_do_not_touch_the_oracle():
    # [TRIVIAL] the oracle and the bond decomposition agree on the ground energy
    model = xxz(6, 1.0)
    terms = build_bond_terms(model)
    gs = ground_state(model)
    from thermofield.oracle import embed_bond_operator
    e = sum(gs @ embed_bond_operator(t.matrix, t.site, 2, 6) @ gs for t in terms)
    assert e == pytest.approx(np.linalg.eigvalsh(dense_hamiltonian(model))[0], abs=1e-10)
