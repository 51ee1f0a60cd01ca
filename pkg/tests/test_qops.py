import numpy as np
import pytest

from ottomech.errors import ConfigurationError, ShapeError
from ottomech.qops import (
    QOperator,
    QState,
    SpaceDims,
    annihilation,
    apply,
    expectation,
    identity,
    number_op,
    quadrature,
)


def test_dims_validation():
    SpaceDims(2, 2)
    with pytest.raises(ConfigurationError):
        SpaceDims(1, 4)
    with pytest.raises(ConfigurationError):
        SpaceDims(4, 0)


def test_annihilation_two_level_truncation():
    a = annihilation(SpaceDims(2, 2), "photon").matrix
    assert a.shape == (4, 4)
    nz = np.argwhere(np.abs(a) > 0)
    # exactly two entries, both 1, coupling |1,k> -> |0,k>
    assert len(nz) == 2
    assert np.allclose(a[np.abs(a) > 0], 1.0)
    for row, col in nz:
        assert col - row == 2  # photon index drops by one, phonon intact


def test_vacuum_annihilation():
    dims = SpaceDims(4, 4)
    vac = QState.fock(dims, 0, 0)
    for which in ("photon", "phonon"):
        assert np.allclose(apply(annihilation(dims, which), vac), 0.0)


def test_number_from_ladder_rule():
    # <n|a^dag a|n> = n, cross-checked against the closed-form sqrt(n) rule
    dims = SpaceDims(8, 8)
    a = annihilation(dims, "photon")
    n_from_ladder = a.dag().matrix @ a.matrix
    for n in range(8):
        st = QState.fock(dims, n, 3)
        assert np.vdot(st.vector, n_from_ladder @ st.vector).real == pytest.approx(n, abs=1e-12)


def test_number_op_diagonal_ordering():
    n = number_op(SpaceDims(3, 2), "photon").matrix
    assert np.allclose(np.diag(n).real, [0, 0, 1, 1, 2, 2])
    assert np.allclose(n - np.diag(np.diag(n)), 0.0)


def test_number_equals_adag_a():
    dims = SpaceDims(5, 4)
    for which in ("photon", "phonon"):
        a = annihilation(dims, which)
        diff = number_op(dims, which).matrix - a.dag().matrix @ a.matrix
        assert np.max(np.abs(diff)) < 1e-14


def test_number_trace():
    tr = np.trace(number_op(SpaceDims(4, 4), "photon").matrix).real
    assert tr == pytest.approx(4 * (0 + 1 + 2 + 3))


def test_expectation_examples(rng):
    dims = SpaceDims(4, 4)
    n_ph = number_op(dims, "photon")
    assert expectation(QState.fock(dims, 0, 0), n_ph) == pytest.approx(0)
    assert expectation(QState.fock(dims, 2, 0), n_ph).real == pytest.approx(2)
    v = rng.normal(size=dims.total) + 1j * rng.normal(size=dims.total)
    st = QState.from_vector(dims, v)
    assert expectation(st, identity(dims)).real == pytest.approx(1.0, abs=1e-12)


def test_expectation_real_for_hermitian(rng):
    dims = SpaceDims(5, 3)
    for _ in range(25):
        m = rng.normal(size=(dims.total,) * 2) + 1j * rng.normal(size=(dims.total,) * 2)
        h = QOperator(dims, (m + m.conj().T) / 2, hermitian=True)
        st = QState.from_vector(dims, rng.normal(size=dims.total) + 1j * rng.normal(size=dims.total))
        assert abs(expectation(st, h).imag) < 1e-10


def test_apply_examples():
    dims = SpaceDims(3, 3)
    st = QState.fock(dims, 1, 0)
    assert np.allclose(apply(identity(dims), st), st.vector)
    out = apply(annihilation(dims, "photon"), st)
    assert np.allclose(out, QState.fock(dims, 0, 0).vector)
    # <0|(a + a^dag)^2|0> = 1 from [a, a^dag] = 1
    vac = QState.fock(dims, 0, 0)
    x = annihilation(dims, "photon").matrix
    xop = QOperator(dims, x + x.conj().T, hermitian=True)
    once = apply(xop, vac)
    twice = xop.matrix @ once
    assert np.vdot(vac.vector, twice).real == pytest.approx(1.0)


def test_ladder_algebra_commutator_masked():
    # a a^dag - a^dag a = 1 except on the top truncated level
    for cutoff_a, cutoff_b in ((4, 6), (6, 4)):
        dims = SpaceDims(cutoff_a, cutoff_b)
        a = annihilation(dims, "photon").matrix
        comm = a.conj().T @ a - a @ a.conj().T
        labels = np.arange(dims.total) // dims.n_phonon
        keep = labels <= cutoff_a - 2
        block = comm[np.ix_(keep, keep)]
        assert np.max(np.abs(block + np.eye(keep.sum()))) < 1e-14


def test_tensor_mode_operators_commute():
    dims = SpaceDims(5, 5)
    for ka in ("x", "p"):
        for kb in ("x", "p"):
            oa = quadrature(dims, "photon", ka).matrix
            ob = quadrature(dims, "phonon", kb).matrix
            assert np.max(np.abs(oa @ ob - ob @ oa)) < 1e-14


def test_shape_errors():
    a = annihilation(SpaceDims(3, 3), "photon")
    st = QState.fock(SpaceDims(4, 4), 0, 0)
    with pytest.raises(ShapeError):
        apply(a, st)
    with pytest.raises(ShapeError):
        expectation(st, a)
    with pytest.raises(ConfigurationError):
        annihilation(SpaceDims(3, 3), "qubit")


def test_state_normalization_enforced():
    dims = SpaceDims(3, 3)
    with pytest.raises(ShapeError):
        QState(dims, np.ones(dims.total, dtype=complex))
    st = QState.from_vector(dims, np.ones(dims.total))
    assert np.linalg.norm(st.vector) == pytest.approx(1.0, abs=1e-12)


def test_hermitian_flag_strict_check():
    dims = SpaceDims(2, 2)
    bad = np.triu(np.ones((4, 4)))
    with pytest.raises(ShapeError):
        QOperator(dims, bad, hermitian=True)  # STRICT_CHECKS on in conftest


def test_operator_immutable():
    op = number_op(SpaceDims(3, 3), "photon")
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5.0
