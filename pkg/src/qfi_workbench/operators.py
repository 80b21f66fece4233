"""Dense complex linear algebra for small Hermitian operators.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; states are
1-d complex arrays. The only structured value is :class:`SpectralDecomposition`,
which carries the eigen-data together with its degeneracy clustering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, HermiticityError, NumericalError

HERMITIAN_RTOL = 1e-10
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-10
DEFAULT_CLUSTER_RTOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def max_norm(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_square(m, name="matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"{name} has non-finite entries")
    return m


def hermiticity_defect(m) -> float:
    m = np.asarray(m)
    return max_norm(m - m.conj().T)


def check_hermitian(m, rtol=HERMITIAN_RTOL, name="operator") -> np.ndarray:
    """Return ``m`` as a complex array, raising if it is not Hermitian.

    The test is relative: ``max|M - M^dagger| <= rtol * max|M|``.
    """
    m = as_square(m, name)
    defect = hermiticity_defect(m)
    if defect > rtol * max_norm(m):
        raise HermiticityError(
            f"{name} is not Hermitian: max|M - M^dagger| = {defect:.3e} "
            f"exceeds {rtol:g} * max|M| = {rtol * max_norm(m):.3e}"
        )
    return m


def is_unitary(u, atol=UNITARY_ATOL) -> bool:
    u = np.asarray(u)
    return max_norm(u @ u.conj().T - np.eye(u.shape[0])) <= atol


def check_state(psi, dim=None, atol=NORM_ATOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError(f"state must be a vector, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise DimensionError(f"state has dimension {psi.shape[0]}, expected {dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > atol:
        raise ValueError(f"state is not normalized (norm = {norm:.15g})")
    return psi


def _conformable(*mats):
    shapes = {np.shape(m)[0] for m in mats}
    if len(shapes) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(shapes)}")


def commutator(a, b) -> np.ndarray:
    a = as_square(a, "A")
    b = as_square(b, "B")
    _conformable(a, b)
    return a @ b - b @ a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(A^dagger B)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def expectation(m, psi) -> float:
    m = as_square(m)
    psi = check_state(psi, m.shape[0])
    return float(np.real(np.vdot(psi, m @ psi)))


def variance(m, psi) -> float:
    """<psi|M^2|psi> - <psi|M|psi>^2, computed as ||(M - <M>)psi||^2."""
    m = as_square(m)
    psi = check_state(psi, m.shape[0])
    mpsi = m @ psi
    mean = np.real(np.vdot(psi, mpsi))
    r = mpsi - mean * psi
    return float(np.real(np.vdot(r, r)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigen-data of a Hermitian operator, grouped into degeneracy clusters.

    ``eigenvectors`` holds the orthonormal eigenvectors as columns, ordered
    like ``eigenvalues`` (ascending). ``clusters[k]`` is the index array of the
    k-th degenerate group and ``cluster_values[k]`` its mean eigenvalue.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clusters: tuple
    cluster_values: np.ndarray
    cluster_tol: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def multiplicities(self) -> tuple:
        return tuple(len(c) for c in self.clusters)

    @property
    def labels(self) -> np.ndarray:
        """Cluster index of every eigenvalue."""
        out = np.empty(self.dim, dtype=int)
        for k, idx in enumerate(self.clusters):
            out[idx] = k
        return out

    def projector(self, k: int) -> np.ndarray:
        v = self.eigenvectors[:, self.clusters[k]]
        return v @ v.conj().T

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def to_eigenbasis(self, m) -> np.ndarray:
        """Matrix elements <v_a|M|v_b>."""
        v = self.eigenvectors
        return v.conj().T @ m @ v

    def from_eigenbasis(self, m) -> np.ndarray:
        v = self.eigenvectors
        return v @ m @ v.conj().T

    def with_phases(self, phases) -> "SpectralDecomposition":
        """Same decomposition with eigenvector ``a`` multiplied by ``phases[a]``."""
        return SpectralDecomposition(
            self.eigenvalues, self.eigenvectors * np.asarray(phases)[None, :],
            self.clusters, self.cluster_values, self.cluster_tol,
        )


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real and positive."""
    vectors = np.array(vectors, dtype=complex)
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivots) / pivots)[None, :]


def default_cluster_tol(eigenvalues) -> float:
    eigenvalues = np.asarray(eigenvalues)
    scale = float(eigenvalues[-1] - eigenvalues[0])
    if scale <= 0.0:
        scale = max(float(np.max(np.abs(eigenvalues))), 1.0)
    return DEFAULT_CLUSTER_RTOL * scale


def cluster_eigenvalues(eigenvalues, cluster_tol) -> tuple:
    """Split ascending eigenvalues wherever the adjacent gap exceeds the tolerance."""
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    breaks = np.nonzero(np.diff(eigenvalues) > cluster_tol)[0] + 1
    clusters = tuple(np.split(np.arange(len(eigenvalues)), breaks))
    for c in clusters:
        spread = eigenvalues[c[-1]] - eigenvalues[c[0]]
        if spread > cluster_tol:
            raise NumericalError(
                "eigenvalue clustering is ambiguous: a chain of small gaps spans "
                f"{spread:.3e} > cluster_tol = {cluster_tol:.3e}",
                {"cluster": eigenvalues[c].tolist(), "cluster_tol": cluster_tol},
            )
    return clusters


def eigendecompose(m, cluster_tol=None) -> SpectralDecomposition:
    m = check_hermitian(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Hermitian eigensolver did not converge: {exc}",
            {"dim": m.shape[0], "max_norm": max_norm(m)},
        ) from exc
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(w)
    clusters = cluster_eigenvalues(w, cluster_tol)
    values = np.array([w[c].mean() for c in clusters])
    return SpectralDecomposition(w, fix_phases(v), clusters, values, float(cluster_tol))


def evolution_operator(decomposition: SpectralDecomposition, t: float) -> np.ndarray:
    """exp(-i t H) assembled from the spectral data of H."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    v = decomposition.eigenvectors
    return (v * np.exp(-1j * t * decomposition.eigenvalues)) @ v.conj().T


def random_hermitian(rng: np.random.Generator, d: int, scale=1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / (2.0 * np.sqrt(d))


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)
