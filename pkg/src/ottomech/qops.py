"""Dense operator algebra on a truncated two-mode Fock space.

The Hilbert space is the tensor product of a photon mode (cutoff
``n_photon``) and a phonon mode (cutoff ``n_phonon``).  Basis ordering is
lexicographic ``|n_a, n_b>`` with the photon index outermost, i.e. the flat
index of ``|n_a, n_b>`` is ``n_a * n_phonon + n_b``.  All CSV dumps of
state populations rely on this ordering.

Everything is dense complex128: the dimensions used here (<= ~600) make
dense matrix-vector products the simple, cache-friendly choice.

Operators are immutable after construction (their buffers are marked
read-only) and may be shared freely across trajectory workers; states are
owned by a single trajectory at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ShapeError

#: When True, builders re-verify the Hermitian flag on construction.
#: Off by default for speed; the test suite switches it on.
STRICT_CHECKS = False

_HERM_TOL = 1e-12
_NORM_TOL = 1e-10

MODES = ("photon", "phonon")


@dataclass(frozen=True)
class SpaceDims:
    """Fock cutoffs of the two modes; levels run 0..cutoff-1."""

    n_photon: int
    n_phonon: int

    def __post_init__(self):
        for name, n in (("n_photon", self.n_photon), ("n_phonon", self.n_phonon)):
            if not isinstance(n, (int, np.integer)) or n < 2:
                raise ConfigurationError(f"{name} must be an integer >= 2, got {n!r}")

    @property
    def total(self) -> int:
        return self.n_photon * self.n_phonon

    def flat_index(self, n_a: int, n_b: int) -> int:
        if not (0 <= n_a < self.n_photon and 0 <= n_b < self.n_phonon):
            raise ShapeError(f"Fock labels ({n_a},{n_b}) outside cutoffs {self}")
        return n_a * self.n_phonon + n_b


@dataclass(frozen=True)
class QOperator:
    """Dense operator with its space dims and a constructed Hermitian flag.

    The flag is set by builders and trusted afterwards; enable
    ``qops.STRICT_CHECKS`` to re-verify on every construction.
    """

    dims: SpaceDims
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.dims.total, self.dims.total):
            raise ShapeError(
                f"operator matrix shape {m.shape} inconsistent with dims "
                f"{self.dims} (expected {(self.dims.total,) * 2})"
            )
        if m is self.matrix and m.flags.writeable:
            m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        if STRICT_CHECKS and self.hermitian:
            dev = np.max(np.abs(m - m.conj().T))
            if dev >= _HERM_TOL:
                raise ShapeError(f"operator flagged Hermitian deviates by {dev:.2e}")

    def dag(self) -> "QOperator":
        return QOperator(self.dims, self.matrix.conj().T, hermitian=self.hermitian)

    def __matmul__(self, other: "QOperator") -> "QOperator":
        if self.dims != other.dims:
            raise ShapeError(f"dims mismatch: {self.dims} vs {other.dims}")
        return QOperator(self.dims, self.matrix @ other.matrix)


@dataclass
class QState:
    """Pure state as a dense complex vector, kept normalized to 1e-10."""

    dims: SpaceDims
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.complex128)
        if v.shape != (self.dims.total,):
            raise ShapeError(
                f"state vector shape {v.shape} inconsistent with dims {self.dims}"
            )
        n = np.linalg.norm(v)
        if abs(n - 1.0) > _NORM_TOL:
            raise ShapeError(f"state vector norm {n!r} is not 1 within {_NORM_TOL}")
        self.vector = v

    @classmethod
    def fock(cls, dims: SpaceDims, n_a: int, n_b: int) -> "QState":
        v = np.zeros(dims.total, dtype=np.complex128)
        v[dims.flat_index(n_a, n_b)] = 1.0
        return cls(dims, v)

    @classmethod
    def from_vector(cls, dims: SpaceDims, vector: np.ndarray) -> "QState":
        """Build a state from an unnormalized vector."""
        v = np.asarray(vector, dtype=np.complex128)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise ShapeError("cannot normalize a zero vector")
        return cls(dims, v / n)

    def as_matrix(self) -> np.ndarray:
        """View of the amplitudes as an (n_photon, n_phonon) array."""
        return self.vector.reshape(self.dims.n_photon, self.dims.n_phonon)


def _single_mode_ladder(cutoff: int) -> np.ndarray:
    # <n-1| a |n> = sqrt(n)
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1).astype(np.complex128)


def _check_mode(which: str):
    if which not in MODES:
        raise ConfigurationError(f"mode selector must be one of {MODES}, got {which!r}")


def identity(dims: SpaceDims) -> QOperator:
    return QOperator(dims, np.eye(dims.total, dtype=np.complex128), hermitian=True)


def annihilation(dims: SpaceDims, which: str) -> QOperator:
    """Truncated annihilation operator of one mode, tensored with identity
    on the other."""
    _check_mode(which)
    if which == "photon":
        m = np.kron(_single_mode_ladder(dims.n_photon), np.eye(dims.n_phonon))
    else:
        m = np.kron(np.eye(dims.n_photon), _single_mode_ladder(dims.n_phonon))
    return QOperator(dims, m)


def number_op(dims: SpaceDims, which: str) -> QOperator:
    """Diagonal number operator of the selected mode."""
    _check_mode(which)
    na = np.arange(dims.n_photon)
    nb = np.arange(dims.n_phonon)
    if which == "photon":
        diag = np.repeat(na, dims.n_phonon)
    else:
        diag = np.tile(nb, dims.n_photon)
    return QOperator(dims, np.diag(diag.astype(np.complex128)), hermitian=True)


def quadrature(dims: SpaceDims, which: str, kind: str) -> QOperator:
    """Position (``kind='x'``) or momentum (``kind='p'``) quadrature,
    x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2)."""
    a = annihilation(dims, which).matrix
    if kind == "x":
        m = (a + a.conj().T) / np.sqrt(2.0)
    elif kind == "p":
        m = 1j * (a.conj().T - a) / np.sqrt(2.0)
    else:
        raise ConfigurationError(f"quadrature kind must be 'x' or 'p', got {kind!r}")
    return QOperator(dims, m, hermitian=True)


def apply(op: QOperator, state: QState) -> np.ndarray:
    """O|psi> without renormalization; the caller owns normalization policy."""
    if op.dims != state.dims:
        raise ShapeError(f"dims mismatch: operator {op.dims} vs state {state.dims}")
    return op.matrix @ state.vector


def expectation(state: QState, op: QOperator) -> complex:
    """<psi|O|psi>.  Imaginary part is below 1e-10 for Hermitian-flagged
    operators and normalized states."""
    if op.dims != state.dims:
        raise ShapeError(f"dims mismatch: operator {op.dims} vs state {state.dims}")
    return complex(np.vdot(state.vector, op.matrix @ state.vector))
