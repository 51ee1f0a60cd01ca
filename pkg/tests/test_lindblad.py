import numpy as np
import pytest

from ottomech.lindblad import (
    bath_collapse_ops,
    integrate_lindblad,
    measurement_collapse_op,
    trace_distance,
)
from ottomech.model import ModelParams, hamiltonian
from ottomech.qops import QState, SpaceDims, number_op
from ottomech.traj import MeasurementConfig


def test_photon_decay_analytic():
    # G = 0, kappa only: <n_a>(t) = n0 exp(-kappa t)
    dims = SpaceDims(5, 2)
    p = ModelParams(G=0.0, kappa=0.2, gamma=0.0, nbar_th=0.0)
    H = hamiltonian(p, -1.0, dims).matrix
    psi0 = QState.fock(dims, 3, 0).vector
    rho0 = np.outer(psi0, psi0.conj())
    n_op = number_op(dims, "photon").matrix
    ts = [2.0, 5.0, 10.0]
    rhos = integrate_lindblad(H, bath_collapse_ops(p, dims), rho0, 10.0, 1e-3, ts)
    for t, rho in zip(ts, rhos):
        n = np.real(np.trace(n_op @ rho))
        assert n == pytest.approx(3 * np.exp(-0.2 * t), abs=1e-5)


def test_thermal_fixed_point():
    # gamma with nbar: phonon relaxes to the thermal occupation
    dims = SpaceDims(2, 18)
    p = ModelParams(G=0.0, kappa=0.0, gamma=0.5, nbar_th=2.0)
    H = hamiltonian(p, -1.0, dims).matrix
    psi0 = QState.fock(dims, 0, 0).vector
    rho0 = np.outer(psi0, psi0.conj())
    nb = number_op(dims, "phonon").matrix
    (rho,) = integrate_lindblad(H, bath_collapse_ops(p, dims), rho0, 20.0, 2e-3, [20.0])
    assert np.real(np.trace(nb @ rho)) == pytest.approx(2.0, abs=2e-2)
    assert np.real(np.trace(rho)) == pytest.approx(1.0, abs=1e-8)


def test_measurement_dissipator_mapping():
    dims = SpaceDims(3, 3)
    ops_d = measurement_collapse_op(MeasurementConfig("dispersive", 0.3), dims)
    assert len(ops_d) == 1 and ops_d[0][0] == 0.3
    assert np.allclose(ops_d[0][1], number_op(dims, "photon").matrix)
    assert measurement_collapse_op(MeasurementConfig("none", 0.0), dims) == []


def test_dispersive_dissipator_preserves_photon_number():
    dims = SpaceDims(4, 3)
    p = ModelParams(G=0.0, kappa=0.0, gamma=0.0)
    H = hamiltonian(p, -1.5, dims).matrix
    psi0 = np.zeros(dims.total)
    psi0[dims.flat_index(0, 0)] = 1.0
    psi0[dims.flat_index(2, 0)] = 1.0
    psi0 /= np.sqrt(2)
    rho0 = np.outer(psi0, psi0.conj())
    collapse = measurement_collapse_op(MeasurementConfig("dispersive", 0.5), dims)
    (rho,) = integrate_lindblad(H, collapse, rho0, 5.0, 1e-3, [5.0])
    n_op = number_op(dims, "photon").matrix
    assert np.real(np.trace(n_op @ rho)) == pytest.approx(1.0, abs=1e-8)
    # coherence between n = 0 and n = 2 dephases
    assert abs(rho[dims.flat_index(0, 0), dims.flat_index(2, 0)]) < 0.02


def test_trace_distance_properties():
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.5, 0.5]).astype(complex)
    assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-14)
    assert trace_distance(a, b) == pytest.approx(0.5)
