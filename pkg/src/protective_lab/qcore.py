"""Dense complex linear algebra and quantum-mechanical primitives.

Every other module builds on the small set of value types defined here:
:class:`HermitianOperator`, :class:`Ket`, :class:`DensityMatrix` and
:class:`EigenSystem`. They are thin immutable wrappers around numpy arrays
that validate their physical invariants once, at construction.

Conventions
-----------
* hbar = 1, so ``propagator(H, t) = exp(-i H t)``.
* Composite spaces are ordered system (x) apparatus; ``tensor(A, B)`` puts
  ``A`` first.
* Matrix exponentials go through the Hermitian eigendecomposition only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

# Tolerances, kept in one place.
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
IMAG_TOL = 1e-8

ArrayLike = Union[np.ndarray, Sequence]


class NumericalConsistencyError(ArithmeticError):
    """A quantity that must be real (or finite) came out otherwise."""


def _as_complex_array(data, ndim: int) -> np.ndarray:
    arr = np.array(data, dtype=complex)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array contains NaN or Inf entries")
    arr.setflags(write=False)
    return arr


def _mat(x) -> np.ndarray:
    if isinstance(x, (HermitianOperator, DensityMatrix)):
        return x.matrix
    if isinstance(x, Ket):
        return x.amplitudes
    return np.asarray(x, dtype=complex)


def _vec(x) -> np.ndarray:
    if isinstance(x, Ket):
        return x.amplitudes
    return np.asarray(x, dtype=complex)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Square complex matrix with ``max|M - M^dagger| <= HERMITIAN_TOL``.

    The stored matrix is symmetrised exactly, so downstream code can rely on
    ``matrix == matrix.conj().T`` bit for bit.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_array(_mat(self.matrix), 2)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got {m.shape}")
        defect = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if defect > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (max defect {defect:.3e})")
        sym = 0.5 * (m + m.conj().T)
        sym.setflags(write=False)
        object.__setattr__(self, "matrix", sym)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other):
        return HermitianOperator(self.matrix + _mat(other))

    def __sub__(self, other):
        return HermitianOperator(self.matrix - _mat(other))

    def __mul__(self, scalar: float):
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise TypeError("Hermitian operators only scale by real numbers")
        return HermitianOperator(self.matrix * float(np.real(scalar)))

    __rmul__ = __mul__

    def spectral_norm(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit-norm state vector (within ``NORM_TOL``)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = _as_complex_array(_vec(self.amplitudes), 1)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"ket is not normalized (norm {norm:.12g})")
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, data) -> "Ket":
        v = np.asarray(data, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "Ket":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_array(_mat(self.matrix), 2)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        defect = np.max(np.abs(m - m.conj().T))
        if defect > HERMITIAN_TOL:
            raise ValueError(f"density matrix is not Hermitian (defect {defect:.3e})")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr:.12g}, expected 1")
        lam_min = np.linalg.eigvalsh(m)[0]
        if lam_min < -PSD_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def vector(self, index: int) -> Ket:
        return Ket(self.eigenvectors[:, index])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column real and positive."""
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)


def eigh(H) -> EigenSystem:
    """Spectral decomposition of a Hermitian operator.

    Eigenvalues are ascending. Each eigenvector's largest-magnitude component
    is made real-positive, so the output is reproducible across runs.
    """
    m = H.matrix if isinstance(H, HermitianOperator) else HermitianOperator(H).matrix
    lam, vecs = np.linalg.eigh(m)
    vecs = _fix_phases(vecs)
    lam.setflags(write=False)
    vecs.setflags(write=False)
    return EigenSystem(lam, vecs)


def apply_propagator(eig: EigenSystem, t: float, psi: np.ndarray) -> np.ndarray:
    """Return ``exp(-i H t) psi`` from a precomputed eigensystem of ``H``."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    v = eig.eigenvectors
    return v @ (np.exp(-1j * eig.eigenvalues * t) * (v.conj().T @ psi))


def propagator(H, t: float) -> np.ndarray:
    """Unitary ``exp(-i H t)`` built as ``V exp(-i lambda t) V^dagger``."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    eig = eigh(H)
    v = eig.eigenvectors
    return (v * np.exp(-1j * eig.eigenvalues * t)) @ v.conj().T


def tensor(A, B) -> np.ndarray:
    """Kronecker product with ``A`` as the leading (system) factor.

    Works for matrices and for plain vectors (kets) alike.
    """
    return np.kron(_mat(A), _mat(B))


def _reshape_for_trace(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    d_s, d_a = dims
    if d_s * d_a != m.shape[0]:
        raise ValueError(f"dims {dims} do not match operator dimension {m.shape[0]}")
    return m.reshape(d_s, d_a, d_s, d_a)


def partial_trace(rho, dims: tuple[int, int], keep: str = "S") -> DensityMatrix:
    """Reduced density matrix of a bipartite state.

    Parameters
    ----------
    rho : DensityMatrix or array
        State on the ``d_S * d_A`` dimensional space, system factor first.
    dims : (int, int)
        ``(d_S, d_A)``.
    keep : {"S", "A"}
        Which factor survives the trace.
    """
    t = _reshape_for_trace(_mat(rho), dims)
    if keep == "S":
        out = np.einsum("iaja->ij", t)
    elif keep == "A":
        out = np.einsum("iaib->ab", t)
    else:
        raise ValueError(f"keep must be 'S' or 'A', got {keep!r}")
    return DensityMatrix(out)


def reduced_from_ket(psi, dims: tuple[int, int], keep: str = "S") -> DensityMatrix:
    """Partial trace of a pure state without forming the full projector."""
    v = _vec(psi)
    d_s, d_a = dims
    if d_s * d_a != v.shape[0]:
        raise ValueError(f"dims {dims} do not match state dimension {v.shape[0]}")
    c = v.reshape(d_s, d_a)
    if keep == "S":
        return DensityMatrix(c @ c.conj().T)
    if keep == "A":
        return DensityMatrix(c.T @ c.conj())
    raise ValueError(f"keep must be 'S' or 'A', got {keep!r}")


def expectation(O, psi) -> float:
    """Real expectation value ``<psi|O|psi>``.

    Raises
    ------
    NumericalConsistencyError
        If the imaginary part exceeds ``IMAG_TOL``.
    """
    m, v = _mat(O), _vec(psi)
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"operator dim {m.shape} does not match ket dim {v.shape[0]}")
    val = np.vdot(v, m @ v)
    if abs(val.imag) > IMAG_TOL:
        raise NumericalConsistencyError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def entanglement_entropy(rho_reduced) -> float:
    """Von Neumann entropy in bits, with 0 log 0 = 0."""
    lam = np.linalg.eigvalsh(_mat(rho_reduced))
    lam = lam[lam > 1e-300]
    s = float(-np.sum(lam * np.log2(lam)))
    return max(s, 0.0)


def fidelity_pure(psi, rho) -> float:
    """``<psi|rho|psi>`` for a pure reference state."""
    v, m = _vec(psi), _mat(rho)
    return float(np.vdot(v, m @ v).real)


def nearest_physical(m) -> DensityMatrix:
    """Closest unit-trace PSD matrix in Frobenius norm.

    Hermitian part is diagonalised and its spectrum projected onto the
    probability simplex.
    """
    m = _mat(m)
    h = 0.5 * (m + m.conj().T)
    lam, vecs = np.linalg.eigh(h)
    mu = np.sort(lam)[::-1]
    cum = np.cumsum(mu) - 1.0
    k = np.nonzero(mu - cum / np.arange(1, len(mu) + 1) > 0)[0][-1]
    theta = cum[k] / (k + 1)
    p = np.clip(lam - theta, 0.0, None)
    return DensityMatrix((vecs * p) @ vecs.conj().T)


def commutator_norm(A, B) -> float:
    a, b = _mat(A), _mat(B)
    return float(np.max(np.abs(a @ b - b @ a))) if a.size else 0.0


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
for _p in PAULIS.values():
    _p.setflags(write=False)
