import numpy as np
import pytest

from ottomech.errors import ConfigurationError, DomainError, StabilityError
from ottomech.model import (
    SYMPLECTIC_FORM,
    ModelParams,
    hamiltonian,
    make_schedule,
    normal_mode_frequencies,
    polariton_data,
    quadrature_form,
    schedule_delta,
    williamson,
)
from ottomech.qops import QState, SpaceDims, expectation, number_op

FIG4 = ModelParams(G=0.2, delta_i=-3.0, delta_f=-0.4)


def dynamical_matrix_frequencies(params, delta):
    """Independent oracle: |Im| eigenvalue pairs of the 4x4 dynamical
    matrix Omega M of the quadratic form."""
    ev = np.linalg.eigvals(SYMPLECTIC_FORM @ quadrature_form(params, delta))
    mags = np.sort(np.abs(ev.imag))
    return mags[3], mags[1]  # one representative per +-i omega pair


def test_params_invariants():
    with pytest.raises(ConfigurationError):
        ModelParams(delta_i=-1.0, delta_f=-1.5)  # ordering violated
    with pytest.raises(ConfigurationError):
        ModelParams(G=0.6)
    with pytest.raises(ConfigurationError):
        ModelParams(kappa=-1e-3)


def test_frequencies_decoupled_limit():
    p = ModelParams(G=0.0)
    for d in (-3.0, -0.4):
        wa, wb = normal_mode_frequencies(p, d)
        assert wa == pytest.approx(max(abs(d), 1.0))
        assert wb == pytest.approx(min(abs(d), 1.0))


def test_frequencies_known_point():
    # delta = -omega_m, G = 0.1: sqrt(1.2) and sqrt(0.8), fixed by the
    # dynamical-matrix oracle
    p = ModelParams(G=0.1)
    wa, wb = normal_mode_frequencies(p, -1.0)
    assert wa == pytest.approx(np.sqrt(1.2), abs=1e-12)
    assert wb == pytest.approx(np.sqrt(0.8), abs=1e-12)
    oa, ob = dynamical_matrix_frequencies(p, -1.0)
    assert wa == pytest.approx(oa, abs=1e-10)
    assert wb == pytest.approx(ob, abs=1e-10)


def test_frequencies_fig4_endpoints():
    wa_i, wb_i = normal_mode_frequencies(FIG4, -3.0)
    wa_f, wb_f = normal_mode_frequencies(FIG4, -0.4)
    assert wb_i == pytest.approx(0.9698, abs=2e-4)
    assert wa_i == pytest.approx(3.0099, abs=2e-4)
    assert wb_f == pytest.approx(0.2995, abs=2e-4)
    assert wa_f == pytest.approx(1.0346, abs=2e-4)


def test_frequencies_match_dynamical_oracle_random(rng):
    # resolves the discriminant form: corrected formula vs 4x4 oracle
    for _ in range(20):
        G = rng.uniform(0.02, 0.24)
        delta = -rng.uniform(max(1.05, 4 * G**2 * 1.3), 4.0)
        p = ModelParams(G=G, delta_i=-4.5, delta_f=-0.9)
        wa, wb = normal_mode_frequencies(p, delta)
        oa, ob = dynamical_matrix_frequencies(p, delta)
        assert abs(wa - oa) < 1e-9 and abs(wb - ob) < 1e-9


def test_stability_error_names_delta():
    p = ModelParams(G=0.45, delta_i=-3.0, delta_f=-0.5, omega_m=1.0)
    with pytest.raises(StabilityError, match="-0.5"):
        normal_mode_frequencies(p, -0.5)


def test_hamiltonian_decoupled_diagonal():
    dims = SpaceDims(4, 4)
    p = ModelParams(G=0.0)
    H = hamiltonian(p, -1.0, dims).matrix
    na = number_op(dims, "photon").matrix
    nb = number_op(dims, "phonon").matrix
    assert np.max(np.abs(H - (na + nb))) < 1e-14


def test_hamiltonian_vacuum_energy_zero():
    dims = SpaceDims(5, 5)
    for G, d in ((0.0, -2.0), (0.2, -3.0), (0.15, -0.5)):
        p = ModelParams(G=G)
        vac = QState.fock(dims, 0, 0)
        assert abs(expectation(vac, hamiltonian(p, d, dims))) < 1e-14


def test_hamiltonian_excitations_contain_normal_modes():
    # dense diagonalization cross-check of the corrected frequency formula
    dims = SpaceDims(14, 14)
    wa, wb = normal_mode_frequencies(FIG4, -3.0)
    E = np.linalg.eigvalsh(hamiltonian(FIG4, -3.0, dims).matrix)
    exc = E[1:30] - E[0]
    assert exc[0] == pytest.approx(wb, abs=1e-6)
    assert np.min(np.abs(exc - wa)) < 1e-6
    # the printed values of the two branch frequencies
    assert wb == pytest.approx(0.970, abs=1e-3)
    assert wa == pytest.approx(3.010, abs=1e-3)


def test_hamiltonian_linear_in_delta():
    # finite difference dH/d(delta) = -n_a to 1e-10; H is exactly linear
    # in delta, so a large epsilon has no truncation error and avoids
    # float cancellation noise
    dims = SpaceDims(6, 6)
    eps = 1e-3
    Hp = hamiltonian(FIG4, -2.0 + eps, dims).matrix
    Hm = hamiltonian(FIG4, -2.0 - eps, dims).matrix
    dH = (Hp - Hm) / (2 * eps)
    assert np.max(np.abs(dH + number_op(dims, "photon").matrix)) < 1e-10


def test_polariton_trivial_rotation():
    # G = 0: polariton number ops reduce to the bare ones away from the
    # top truncated level (where (a a^dag + a^dag a)/2 is corrupted)
    dims = SpaceDims(5, 5)
    p = ModelParams(G=0.0)
    pd = polariton_data(p, -3.0, dims)
    labels = np.arange(dims.total)
    na, nb = labels // dims.n_phonon, labels % dims.n_phonon
    keep = (na < dims.n_photon - 1) & (nb < dims.n_phonon - 1)
    sel = np.ix_(keep, keep)
    assert np.max(np.abs(pd.N_A_op.matrix[sel] - number_op(dims, "photon").matrix[sel])) < 1e-10
    assert np.max(np.abs(pd.N_B_op.matrix[sel] - number_op(dims, "phonon").matrix[sel])) < 1e-10


def test_polariton_vacuum_depletion_vanishes_with_coupling():
    dims = SpaceDims(6, 6)
    vac = QState.fock(dims, 0, 0)
    prev = None
    for G in (0.2, 0.1, 0.05, 0.01):
        p = ModelParams(G=G)
        nb = expectation(vac, polariton_data(p, -3.0, dims).N_B_op).real
        assert nb >= -1e-12
        if prev is not None:
            assert nb < prev
        prev = nb
    assert prev < 1e-4


def test_polariton_single_phonon_is_B_like():
    dims = SpaceDims(12, 12)
    pd = polariton_data(FIG4, -3.0, dims)
    st = QState.fock(dims, 0, 1)
    assert expectation(st, pd.N_B_op).real > 0.95


def test_polariton_reconstructs_hamiltonian():
    # H = wA N_A + wB N_B + c away from the top two levels of each mode
    dims = SpaceDims(8, 8)
    for d in (-3.0, -1.0, -0.4):
        pd = polariton_data(FIG4, d, dims)
        H = hamiltonian(FIG4, d, dims).matrix
        resid = (
            H
            - pd.omega_A * pd.N_A_op.matrix
            - pd.omega_B * pd.N_B_op.matrix
            - pd.energy_offset * np.eye(dims.total)
        )
        labels = np.arange(dims.total)
        na, nb = labels // dims.n_phonon, labels % dims.n_phonon
        keep = (na < dims.n_photon - 2) & (nb < dims.n_phonon - 2)
        assert np.max(np.abs(resid[np.ix_(keep, keep)])) < 1e-8


def test_polariton_ops_positive_semidefinite_on_safe_subspace():
    dims = SpaceDims(8, 8)
    labels = np.arange(dims.total)
    na, nb = labels // dims.n_phonon, labels % dims.n_phonon
    keep = (na < dims.n_photon - 2) & (nb < dims.n_phonon - 2)
    sel = np.ix_(keep, keep)
    for d in (-3.0, -1.0, -0.4):
        pd = polariton_data(FIG4, d, dims)
        for op in (pd.N_A_op, pd.N_B_op):
            evals = np.linalg.eigvalsh(op.matrix[sel])
            assert evals[0] > -1e-10


def test_bogoliubov_symplectic_along_sweep():
    for d in np.linspace(-3.0, -0.4, 9):
        _, S = williamson(quadrature_form(FIG4, float(d)))
        dev = np.max(np.abs(S @ SYMPLECTIC_FORM @ S.T - SYMPLECTIC_FORM))
        assert dev < 1e-10


def test_avoided_crossing_location_and_gap():
    for G in (0.05, 0.1, 0.2):
        p = ModelParams(G=G)
        ds = np.linspace(-1.3, -0.8, 2001)
        gaps = np.array([np.subtract(*normal_mode_frequencies(p, float(d))) for d in ds])
        i = int(np.argmin(gaps))
        assert abs(ds[i] - (-1.0)) < 1e-2
        assert gaps[i] == pytest.approx(2 * G, rel=0.05)


def test_schedule_linear_midpoint_and_endpoints():
    sch = make_schedule(FIG4, "linear", 10.0, -3.0, -0.4)
    assert schedule_delta(sch, 5.0) == pytest.approx(-1.7)
    assert schedule_delta(sch, 0.0) == -3.0
    assert schedule_delta(sch, 10.0) == -0.4


def test_schedule_gap_adaptive_boundaries_and_slowdown():
    sch = make_schedule(FIG4, "gap_adaptive", 40.0, -3.0, -0.4)
    assert schedule_delta(sch, 0.0) == pytest.approx(-3.0)
    assert schedule_delta(sch, 40.0) == pytest.approx(-0.4)
    t = np.linspace(0, 40.0, 4001)
    d = schedule_delta(sch, t)
    assert np.all(np.diff(d) > 0)  # monotone, increasing toward -0.4
    speed = np.abs(np.gradient(d, t))
    at = lambda x: speed[np.argmin(np.abs(d - x))]  # noqa: E731
    assert at(-3.0 + 0.05) / at(-1.0) >= 4.0


def test_schedule_domain_error():
    sch = make_schedule(FIG4, "linear", 10.0, -3.0, -0.4)
    with pytest.raises(DomainError):
        schedule_delta(sch, -0.1)
    with pytest.raises(DomainError):
        schedule_delta(sch, 10.5)


def test_schedule_reverse_direction():
    sch = make_schedule(FIG4, "gap_adaptive", 40.0, -0.4, -3.0)
    d = schedule_delta(sch, np.linspace(0, 40, 101))
    assert d[0] == pytest.approx(-0.4) and d[-1] == pytest.approx(-3.0)
    assert np.all(np.diff(d) < 0)
