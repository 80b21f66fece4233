"""The local parameter-translation generator h = i (dU/dg) U^dagger.

Four independent routes compute the same operator, plus the first-order
short-time approximation:

``finite_diff``
    central difference of U(g) = exp(-i t H(g)), with U from ``scipy.linalg.expm``
    so that it shares no code with the spectral machinery.
``quadrature``
    adaptive Simpson integration of Y(mu) = exp(-i mu H) dH exp(i mu H) over
    [0, t], carried out in the eigenframe of H.
``superoperator``
    eigen-decomposition of the commutator map X -> [H, X] on operator space.
``spectral``
    closed form in the eigenbasis of H with degeneracy clusters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .errors import AmbiguousGapError, IntegrationError
from .model import ModelSpec, differentiate, evaluate
from .operators import (
    SpectralDecomposition,
    eigendecompose,
    hermiticity_defect,
    max_norm,
)

ROUTES = ("finite_diff", "quadrature", "superoperator", "spectral", "short_time")
DEFAULT_FD_STEP = 1e-5
DEFAULT_QUAD_TOL = 1e-9
MAX_SUBINTERVALS = 2**20
GAP_FLOOR_RTOL = 1e-7
ZERO_TOL_RTOL = 1e-8


@dataclass
class GeneratorResult:
    h: np.ndarray
    route: str
    t: float
    g: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class Superoperator:
    """Matrix of X -> [H, X] in the orthonormal matrix-unit basis E_ab (row-major)."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenoperators: np.ndarray  # shape (d^2, d, d), orthonormal under Tr(A^dagger B)
    coefficients: np.ndarray  # c_k = Tr(Gamma_k^dagger dH)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _hermitized(h, route, t, g, diagnostics):
    diagnostics["hermiticity_defect"] = hermiticity_defect(h)
    return GeneratorResult(0.5 * (h + h.conj().T), route, float(t), float(g), diagnostics)


def hamiltonian_and_derivative(spec: ModelSpec, g: float):
    return evaluate(spec, g), evaluate(differentiate(spec), g)


def generator_finite_difference(spec: ModelSpec, g: float, t: float, delta: float = DEFAULT_FD_STEP) -> GeneratorResult:
    if not delta > 0:
        raise ValueError(f"finite-difference step must be positive, got {delta!r}")

    def u(x):
        return scipy.linalg.expm(-1j * t * evaluate(spec, x))

    h = 1j * (u(g + delta) - u(g - delta)) / (2.0 * delta) @ u(g).conj().T
    return _hermitized(h, "finite_diff", t, g, {"delta": delta})


def generator_quadrature(spec: ModelSpec, g: float, t: float, tol: float = DEFAULT_QUAD_TOL,
                         max_intervals: int = MAX_SUBINTERVALS) -> GeneratorResult:
    """h = int_0^t exp(-i mu H) dH exp(i mu H) dmu by adaptive Simpson.

    In the eigenframe of H the integrand has entries dH'_ab exp(-i mu (E_a - E_b)),
    which is what the kernel integrates; ``tol`` bounds the entrywise absolute
    error of the integral there.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    H, dH = hamiltonian_and_derivative(spec, g)
    dec = eigendecompose(H)
    E = dec.eigenvalues
    amps = dec.to_eigenbasis(dH).reshape(-1)
    freqs = (E[:, None] - E[None, :]).reshape(-1)
    lo, hi, sign = (0.0, t, 1.0) if t >= 0 else (t, 0.0, -1.0)
    integral, err, n_int, status = kernels.adaptive_simpson_phases(amps, freqs, lo, hi, tol, max_intervals)
    diagnostics = {"tol": tol, "error_estimate": err, "subintervals": n_int, "backend": kernels.BACKEND}
    if status != kernels.OK:
        reason = "subinterval limit" if status == kernels.TOO_MANY_INTERVALS else "recursion depth limit"
        raise IntegrationError(f"adaptive Simpson hit the {reason} before reaching tol={tol:g}", diagnostics)
    d = dec.dim
    h = dec.from_eigenbasis(sign * integral.reshape(d, d))
    return _hermitized(h, "quadrature", t, g, diagnostics)


def superoperator_matrix(H) -> np.ndarray:
    """(S)_{ij} = Tr(E_i^dagger [H, E_j]) for row-major matrix units, i.e. H x I - I x H^T."""
    d = H.shape[0]
    eye = np.eye(d)
    return np.kron(H, eye) - np.kron(eye, H.T)


def build_superoperator(spec: ModelSpec, g: float) -> Superoperator:
    H, dH = hamiltonian_and_derivative(spec, g)
    d = H.shape[0]
    S = superoperator_matrix(H)
    lam, vecs = np.linalg.eigh(S)
    gammas = vecs.T.reshape(d * d, d, d)
    # Tr(Gamma^dagger dH) = sum conj(Gamma) * dH
    coeffs = np.einsum("kab,ab->k", gammas.conj(), dH)
    return Superoperator(S, lam, gammas, coeffs)


def default_zero_tol(sop: Superoperator, H=None) -> float:
    spread = float(sop.eigenvalues[-1] - sop.eigenvalues[0])
    scale = max(spread, max_norm(H) if H is not None else 0.0)
    return ZERO_TOL_RTOL * (scale if scale > 0 else 1.0)


def generator_superoperator(spec: ModelSpec, g: float, t: float, zero_tol: float | None = None) -> GeneratorResult:
    H = evaluate(spec, g)
    sop = build_superoperator(spec, g)
    if zero_tol is None:
        zero_tol = default_zero_tol(sop, H)
    if not zero_tol > 0:
        raise ValueError("zero_tol must be positive")
    lam = sop.eigenvalues
    alam = np.abs(lam)
    ambiguous = (alam > zero_tol) & (alam < 10.0 * zero_tol)
    if np.any(ambiguous):
        raise AmbiguousGapError(
            f"superoperator eigenvalue(s) {lam[ambiguous].tolist()} lie between zero_tol={zero_tol:.3e} "
            "and 10*zero_tol; adjust zero_tol",
            {"zero_tol": zero_tol, "eigenvalues": lam[ambiguous].tolist()},
        )
    zero = alam <= zero_tol
    weights = np.empty(lam.shape, dtype=complex)
    weights[zero] = t
    nz = lam[~zero]
    weights[~zero] = -1j * (1.0 - np.exp(-1j * nz * t)) / nz
    h = np.einsum("k,kab->ab", weights * sop.coefficients, sop.eigenoperators)
    diagnostics = {
        "zero_modes": int(zero.sum()),
        "zero_tol": zero_tol,
        "zero_mode_weight": float(np.sqrt(np.sum(np.abs(sop.coefficients[zero]) ** 2))),
        "superoperator_hermiticity_defect": hermiticity_defect(sop.matrix),
    }
    return _hermitized(h, "superoperator", t, g, diagnostics)


def default_gap_floor(dec: SpectralDecomposition) -> float:
    spread = float(dec.eigenvalues[-1] - dec.eigenvalues[0])
    return GAP_FLOOR_RTOL * (spread if spread > 0 else 1.0)


def spectral_weights(dec: SpectralDecomposition, t: float, gap_floor: float | None = None):
    """Matrix of 2 exp(-i w t/2) sin(w t/2) / w for w = E_a - E_b.

    Pairs inside one degeneracy cluster, and pairs across clusters closer than
    ``gap_floor``, take the analytic limit ``t``. Returns ``(weights, n_floored)``.
    """
    if gap_floor is None:
        gap_floor = default_gap_floor(dec)
    labels = dec.labels
    E = dec.cluster_values[labels]
    w = E[:, None] - E[None, :]
    same = labels[:, None] == labels[None, :]
    floored = (~same) & (np.abs(w) < gap_floor)
    linear = same | floored
    safe = np.where(linear, 1.0, w)
    weights = np.where(linear, t, 2.0 * np.exp(-0.5j * w * t) * np.sin(0.5 * w * t) / safe)
    return weights, int(floored.sum())


def spectral_generator_from(dec: SpectralDecomposition, dH, t: float, gap_floor: float | None = None):
    """Assemble h from spectral data of H and the matrix dH/dg. Returns ``(h, diagnostics)``."""
    dHe = dec.to_eigenbasis(dH)
    weights, n_floored = spectral_weights(dec, t, gap_floor)
    he = weights * dHe
    labels = dec.labels
    same = labels[:, None] == labels[None, :]
    # Eigenvalue derivatives: eigenvalues of each diagonal block P_k dH P_k.
    dE = [np.linalg.eigvalsh(dHe[np.ix_(c, c)]) for c in dec.clusters]
    diagnostics = {
        "clusters": [(float(v), len(c)) for v, c in zip(dec.cluster_values, dec.clusters)],
        "eigenvalue_derivatives": [x.tolist() for x in dE],
        "degenerate_gaps": n_floored,
        "linear_part": dec.from_eigenbasis(np.where(same, he, 0.0)),
        "oscillatory_part": dec.from_eigenbasis(np.where(same, 0.0, he)),
    }
    return dec.from_eigenbasis(he), diagnostics


def generator_spectral(spec: ModelSpec, g: float, t: float, cluster_tol: float | None = None,
                       gap_floor: float | None = None) -> GeneratorResult:
    H, dH = hamiltonian_and_derivative(spec, g)
    dec = eigendecompose(H, cluster_tol)
    h, diagnostics = spectral_generator_from(dec, dH, t, gap_floor)
    diagnostics["cluster_tol"] = dec.cluster_tol
    return _hermitized(h, "spectral", t, g, diagnostics)


def generator_short_time(spec: ModelSpec, g: float, t: float) -> GeneratorResult:
    dH = evaluate(differentiate(spec), g)
    return GeneratorResult(t * dH, "short_time", float(t), float(g), {"hermiticity_defect": 0.0})


_ALIASES = {"fd": "finite_diff", "quad": "quadrature", "super": "superoperator", "auto": "spectral"}


def compute_generator(spec: ModelSpec, g: float, t: float, route: str = "auto", **options) -> GeneratorResult:
    route = _ALIASES.get(route, route)
    fn = {
        "finite_diff": generator_finite_difference,
        "quadrature": generator_quadrature,
        "superoperator": generator_superoperator,
        "spectral": generator_spectral,
        "short_time": generator_short_time,
    }.get(route)
    if fn is None:
        raise ValueError(f"unknown route {route!r}; choose from {ROUTES + tuple(_ALIASES)}")
    return fn(spec, g, t, **options)


def cross_validate(spec: ModelSpec, g: float, t: float, delta: float = DEFAULT_FD_STEP,
                   tol: float = DEFAULT_QUAD_TOL) -> dict:
    """Run the four exact routes and report pairwise max-norm distances."""
    results = {
        "finite_diff": generator_finite_difference(spec, g, t, delta),
        "quadrature": generator_quadrature(spec, g, t, tol),
        "superoperator": generator_superoperator(spec, g, t),
        "spectral": generator_spectral(spec, g, t),
    }
    distances = {
        f"{a}|{b}": max_norm(results[a].h - results[b].h)
        for a, b in itertools.combinations(results, 2)
    }
    return {
        "results": results,
        "distances": distances,
        "max_distance": max(distances.values()),
        "hermiticity_defects": {k: r.diagnostics["hermiticity_defect"] for k, r in results.items()},
    }
