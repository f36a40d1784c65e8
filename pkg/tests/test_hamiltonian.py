import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from cavitysim import (
    CouplingSchedule,
    SystemParams,
    assemble_h,
    build_full_space,
    build_sector,
    excitation_operator,
    k_of_t,
    plateau_window,
)
from cavitysim.errors import NoPlateauError, ValidationError
from cavitysim.hamiltonian import hamiltonian_split

from conftest import J_HOP, K0, LAM, OMEGA

SQ2 = math.sqrt(2)

# Sector amplitudes by name, as they appear in the coupled equations.
NAMED = {
    "chi": (0, 0, 1, 0, 0), "a": (1, 1, 0, 0, 0), "b": (1, 0, 0, 1, 0),
    "c": (1, 0, 0, 0, 1), "d": (0, 1, 0, 0, 1), "e": (0, 1, 0, 1, 0),
    "f": (0, 0, 0, 1, 1), "g": (0, 2, 0, 0, 0), "h": (0, 0, 0, 0, 2),
}


def ode_matrix(space, w, lam, J, k):
    """Right-hand side of ``i d/dt x = M x`` for the nine-state sector, entry by entry."""
    rows = {
        "chi": {"chi": w, "g": -1j * k / SQ2},
        "a": {"a": w, "g": SQ2 * lam, "c": J},
        "b": {"b": w, "e": lam, "c": lam},
        "c": {"c": w, "d": lam, "b": lam, "a": J},
        "d": {"d": w, "c": lam, "e": lam, "h": SQ2 * J, "g": SQ2 * J},
        "e": {"e": w, "d": lam, "b": lam, "f": J},
        "f": {"f": w, "h": SQ2 * lam, "e": J},
        "g": {"g": w, "a": SQ2 * lam, "d": SQ2 * J, "chi": 1j * k / SQ2},
        "h": {"h": w, "f": SQ2 * lam, "d": SQ2 * J},
    }
    M = np.zeros((9, 9), dtype=complex)
    for r, entries in rows.items():
        for c, val in entries.items():
            M[space.index_of[NAMED[r]], space.index_of[NAMED[c]]] = val
    return M


def element(H, space, bra, ket):
    return H.matrix[space.index_of[bra], space.index_of[ket]]


def random_params(rng):
    return SystemParams(*rng.uniform(0.1, 80.0, size=5), *rng.uniform(0.0, 10.0, size=3))


def commutator_max(H, N):
    return np.abs(H @ N - N @ H).max()


# -- matrix elements ---------------------------------------------------------

def test_sector_matrix_matches_coupled_equations(chi2_space):
    params = SystemParams.resonant(OMEGA, LAM, J_HOP)
    H = assemble_h(chi2_space, params, K0)
    np.testing.assert_allclose(H.matrix, ode_matrix(chi2_space, OMEGA, LAM, J_HOP, K0),
                               atol=1e-13)


def test_named_elements(chi2_space):
    H = assemble_h(chi2_space, SystemParams.resonant(OMEGA, LAM, J_HOP), K0)
    assert element(H, chi2_space, (0, 0, 1, 0, 0), (0, 2, 0, 0, 0)) == pytest.approx(-1j * K0 / SQ2)
    assert element(H, chi2_space, (0, 2, 0, 0, 0), (0, 0, 1, 0, 0)) == pytest.approx(1j * K0 / SQ2)
    assert element(H, chi2_space, (1, 1, 0, 0, 0), (0, 2, 0, 0, 0)) == pytest.approx(SQ2 * LAM)
    assert element(H, chi2_space, (1, 1, 0, 0, 0), (1, 0, 0, 0, 1)) == pytest.approx(J_HOP)


def test_resonant_diagonal_is_omega(chi2_space):
    H = assemble_h(chi2_space, SystemParams.resonant(OMEGA, LAM, J_HOP), K0)
    np.testing.assert_allclose(H.matrix.diagonal(), OMEGA, rtol=1e-15)


def test_single_excitation_block(single_space):
    params = SystemParams.resonant(OMEGA, LAM, J_HOP)
    H = assemble_h(single_space, params, K0)
    # the pump term needs a pump photon, so k drops out of this sector
    assert np.array_equal(H.matrix, assemble_h(single_space, params, 0.0).matrix)
    order = [single_space.index_of[k] for k in
             [(1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1)]]
    # free energy is zero here: the two half-splittings cancel for every ket
    block = H.matrix[np.ix_(order, order)]
    expected = np.array([[0, LAM, 0, 0], [LAM, 0, 0, J_HOP], [0, 0, 0, LAM], [0, J_HOP, LAM, 0]])
    np.testing.assert_allclose(block, expected, atol=1e-13)


def test_detuning_shifts_qubit_states_only(chi2_space):
    base = SystemParams.resonant(OMEGA, LAM, J_HOP)
    d = 0.1 * LAM
    diff = (assemble_h(chi2_space, base.with_delta(d), K0).matrix
            - assemble_h(chi2_space, base, K0).matrix)
    occ = chi2_space.occupations
    qubit_energy = 0.5 * d * ((2 * occ[:, 0] - 1) + (2 * occ[:, 3] - 1))
    np.testing.assert_allclose(diff, np.diag(qubit_energy), atol=1e-12)
    assert base.with_delta(d).delta == pytest.approx(d)


def test_nonfinite_k_rejected(chi2_space):
    with pytest.raises(ValidationError):
        assemble_h(chi2_space, SystemParams.resonant(OMEGA, LAM, J_HOP), float("nan"))


def test_nonfinite_parameter_rejected():
    with pytest.raises(ValidationError):
        SystemParams.resonant(float("inf"), LAM, J_HOP)


def test_negative_coupling_rejected():
    with pytest.raises(ValidationError):
        SystemParams.resonant(OMEGA, -1.0, J_HOP)


# -- conservation ------------------------------------------------------------

def test_excitation_operator_on_sector(chi2_space):
    np.testing.assert_array_equal(excitation_operator(chi2_space).matrix, 2 * np.eye(9))


def test_excitation_operator_full_space_range():
    full = build_full_space(2, 1)
    vals = excitation_operator(full).matrix.diagonal().real
    assert vals.min() == 0 and vals.max() == 2 + 2 + 2 + 2
    assert set(vals.astype(int)) == set(range(9))


def test_hermitian_and_conserving_random_draws(rng):
    full = build_full_space(2, 1)
    N = excitation_operator(full).matrix
    for _ in range(100):
        H = assemble_h(full, random_params(rng), rng.uniform(0.0, 5.0)).matrix
        assert np.abs(H - H.conj().T).max() <= 1e-13
        assert commutator_max(H, N) <= 1e-12


def test_full_hamiltonian_is_block_diagonal_over_sectors(default_params):
    full = build_full_space(2, 1)
    H = assemble_h(full, default_params, K0).matrix
    for n in range(9):
        sector = build_sector(2, 1, n)
        np.testing.assert_array_equal(H[np.ix_(sector.full_indices, sector.full_indices)],
                                      assemble_h(sector, default_params, K0).matrix)


def test_split_is_linear_in_k(chi2_space, default_params):
    split = hamiltonian_split(chi2_space, default_params)
    np.testing.assert_allclose(split.at(2.5).matrix,
                               split.static + 2.5 * split.coupling, atol=0)
    assert np.abs(split.coupling - split.coupling.conj().T).max() == 0


# -- schedule ----------------------------------------------------------------

def test_k_of_t_examples():
    sched = CouplingSchedule("harmonic", K0, 0.004444)
    assert k_of_t(sched, 0.0) == K0
    assert k_of_t(sched, 1060.3) <= 1e-6 * K0
    assert k_of_t(sched, math.pi / (2 * 0.004444)) == pytest.approx(2 * K0, rel=1e-15)


def test_constant_schedule():
    sched = CouplingSchedule("constant", K0, 0.004444)
    assert k_of_t(sched, 123.0) == K0
    np.testing.assert_array_equal(k_of_t(sched, np.arange(5.0)), np.full(5, K0))


def test_zero_frequency_harmonic_is_constant():
    t = np.linspace(0, 2000, 101)
    np.testing.assert_array_equal(k_of_t(CouplingSchedule("harmonic", K0, 0.0), t),
                                  k_of_t(CouplingSchedule("constant", K0, 0.0), t))


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-4, 0.05), st.floats(0.0, 5000.0))
def test_schedule_is_periodic_and_bounded(Omega, t):
    sched = CouplingSchedule("harmonic", K0, Omega)
    k = k_of_t(sched, t)
    assert -1e-15 <= k <= 2 * K0 + 1e-15
    assert k_of_t(sched, t + 2 * math.pi / Omega) == pytest.approx(k, abs=1e-9 * K0)


def test_bad_schedule_kind():
    with pytest.raises(ValidationError):
        CouplingSchedule("square", K0, 0.1)


# -- plateau windows ---------------------------------------------------------

def brentq_window(Omega, fraction, cycle):
    """Roots of ``k(t) - fraction*k0`` bracketed around the cycle's zero."""
    g = lambda t: 1.0 + math.sin(Omega * t) - fraction  # noqa: E731
    zero = (1.5 * math.pi + 2 * math.pi * cycle) / Omega
    quarter = 0.5 * math.pi / Omega
    enter = brentq(g, zero - quarter, zero, xtol=1e-12) if fraction < 1 else zero - quarter
    exit_ = brentq(g, zero, zero + quarter, xtol=1e-12) if fraction < 1 else zero + quarter
    return enter, zero, exit_


@pytest.mark.parametrize("Omega", [0.002222, 0.004444, 0.006667, 0.008889, 0.1])
@pytest.mark.parametrize("fraction", [0.01, 0.1, 0.5])
@pytest.mark.parametrize("cycle", [0, 1, 3])
def test_plateau_matches_root_finding(Omega, fraction, cycle):
    got = plateau_window(CouplingSchedule("harmonic", K0, Omega), fraction, cycle)
    np.testing.assert_allclose(got, brentq_window(Omega, fraction, cycle), rtol=1e-11)
    assert got.t_enter < got.t_zero < got.t_exit


def test_plateau_row5_published():
    w = plateau_window(CouplingSchedule("harmonic", K0, 0.008889), 0.1, 0)
    np.testing.assert_allclose(w, (479.3, 530.1, 580.9), atol=0.1)


def test_plateau_next_cycle_shift():
    sched = CouplingSchedule("harmonic", K0, 0.004444)
    w0, w1 = plateau_window(sched, 0.1, 0), plateau_window(sched, 0.1, 1)
    np.testing.assert_allclose(np.subtract(w1, w0), 2 * math.pi / 0.004444, rtol=1e-12)
    assert 2 * math.pi / 0.004444 == pytest.approx(1413.9, abs=0.1)


def test_plateau_full_fraction_starts_at_descending_crossing():
    w = plateau_window(CouplingSchedule("harmonic", K0, 0.004444), 1.0, 0)
    assert w.t_enter == pytest.approx(math.pi / 0.004444, rel=1e-15)
    assert w.t_exit == pytest.approx(2 * math.pi / 0.004444, rel=1e-15)


def test_plateau_k_values_at_edges():
    sched = CouplingSchedule("harmonic", K0, 0.006667)
    w = plateau_window(sched, 0.1, 2)
    assert k_of_t(sched, w.t_enter) == pytest.approx(0.1 * K0, rel=1e-9)
    assert k_of_t(sched, w.t_exit) == pytest.approx(0.1 * K0, rel=1e-9)
    assert abs(k_of_t(sched, w.t_zero)) <= 1e-15 * K0


@pytest.mark.parametrize("sched", [CouplingSchedule("constant", K0, 0.004444),
                                   CouplingSchedule("harmonic", K0, 0.0)])
def test_no_plateau_without_modulation(sched):
    with pytest.raises(NoPlateauError):
        plateau_window(sched)


@pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
def test_plateau_bad_fraction(fraction):
    with pytest.raises(ValidationError):
        plateau_window(CouplingSchedule("harmonic", K0, 0.004444), fraction)
