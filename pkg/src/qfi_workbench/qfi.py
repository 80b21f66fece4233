"""Quantum Fisher information from the translation generator, and its bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    InapplicableBoundError,
    UnsupportedDirectionError,
)
from .generator import compute_generator, default_gap_floor
from .model import ModelSpec, differentiate, evaluate, tensor_power
from .operators import (
    as_square,
    check_hermitian,
    check_state,
    eigendecompose,
    evolution_operator,
    hs_inner,
    max_norm,
    variance,
)

DEFAULT_SUPPORT_TOL = 1e-10
EIGENVALUE_INDEPENDENCE_TOL = 1e-8
SHORT_TIME_REGIME = 0.01  # |t| * ||H|| at or below which the short-time bound is reported


class QfiMax(NamedTuple):
    qfi: float
    state: np.ndarray  # evolved-frame optimal state
    arbitrary: bool  # True when h has a single eigenvalue and any state is optimal


@dataclass
class QfiReport:
    g: float
    t: float
    qfi: float
    qfi_max: float
    optimal_probe: np.ndarray
    bounds: dict = field(default_factory=dict)
    route: str = "spectral"

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "t": self.t,
            "route": self.route,
            "qfi": self.qfi,
            "qfi_max": self.qfi_max,
            "optimal_probe": [[float(z.real), float(z.imag)] for z in self.optimal_probe],
            "bounds": dict(self.bounds),
        }


def qfi_pure(h, probe, U=None) -> float:
    """4 Var(h) in the evolved state U|probe>."""
    h = as_square(h, "h")
    probe = check_state(probe)
    if probe.shape[0] != h.shape[0]:
        raise DimensionError(f"probe dimension {probe.shape[0]} != operator dimension {h.shape[0]}")
    psi = probe if U is None else as_square(U, "U") @ probe
    return 4.0 * variance(h, psi)


def qfi_max(h) -> QfiMax:
    """(lambda_max - lambda_min)^2 and the equal superposition of the extremal eigenvectors."""
    dec = eigendecompose(h)
    lo = dec.clusters[0][0]
    hi = dec.clusters[-1][0]
    value = float((dec.eigenvalues[-1] - dec.eigenvalues[0]) ** 2)
    if len(dec.clusters) == 1:
        return QfiMax(value, dec.eigenvectors[:, 0].copy(), True)
    state = (dec.eigenvectors[:, hi] + dec.eigenvectors[:, lo]) / np.sqrt(2.0)
    return QfiMax(value, state, False)


def sld_operator(rho, drho, support_tol: float = DEFAULT_SUPPORT_TOL) -> np.ndarray:
    """Symmetric logarithmic derivative restricted to the support of rho."""
    rho = check_hermitian(rho, 1e-8, "rho")
    drho = as_square(drho, "drho")
    if drho.shape != rho.shape:
        raise DimensionError(f"rho {rho.shape} and drho {drho.shape} differ in shape")
    if max_norm(drho - drho.conj().T) > 1e-8 * max(1.0, max_norm(drho)):
        raise ValueError("drho must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError(f"rho must have unit trace, got {np.trace(rho).real!r}")
    if abs(np.trace(drho)) > 1e-8:
        raise ValueError("drho must be traceless")
    eta, vecs = np.linalg.eigh(rho)
    if eta[0] < -1e-8:
        raise ValueError(f"rho is not positive semidefinite (eigenvalue {eta[0]:.3e})")
    eta = np.clip(eta, 0.0, None)
    de = vecs.conj().T @ drho @ vecs
    denom = eta[:, None] + eta[None, :]
    inside = denom > support_tol
    outside = np.abs(np.where(inside, 0.0, de))
    if outside.size and outside.max() > 1e-8 * max(1.0, max_norm(drho)):
        raise UnsupportedDirectionError(
            f"drho has weight {outside.max():.3e} outside the support of rho; the QFI is not defined there"
        )
    Le = np.where(inside, 2.0 * de / np.where(inside, denom, 1.0), 0.0)
    return vecs @ Le @ vecs.conj().T


def sld_qfi(rho, drho, support_tol: float = DEFAULT_SUPPORT_TOL) -> float:
    """Tr(rho L^2) with L the support-restricted SLD."""
    L = sld_operator(rho, drho, support_tol)
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ L @ L)))


def bound_short_time(spec: ModelSpec, g: float, t: float) -> float:
    """(t^2 / 2) Tr[(dH/dg)^2], the short-time bound with its customary constant.

    Combining h ~ t dH with F = 4 Var(h) and Var(h) <= Tr(h^2)/2 gives
    2 t^2 Tr[(dH)^2], four times this value, and the short-time QFI can exceed
    it: for spin_direction, F_max ~ 4 t^2 while this returns t^2. Use
    ``bound_hilbert_schmidt(t * dH)`` for a bound that always holds.
    """
    dH = evaluate(differentiate(spec), g)
    return float(0.5 * t * t * np.real(np.trace(dH @ dH)))


def bound_hilbert_schmidt(h) -> float:
    """2 Tr(h^dagger h) >= F_max."""
    h = as_square(h, "h")
    return float(2.0 * np.real(np.vdot(h, h)))


def _spectral_pieces(spec, g, cluster_tol=None, gap_floor=None):
    H = evaluate(spec, g)
    dH = evaluate(differentiate(spec), g)
    dec = eigendecompose(H, cluster_tol)
    if gap_floor is None:
        gap_floor = default_gap_floor(dec)
    dHe = dec.to_eigenbasis(dH)
    labels = dec.labels
    E = dec.cluster_values[labels]
    w = E[:, None] - E[None, :]
    same = labels[:, None] == labels[None, :]
    floored = (~same) & (np.abs(w) < gap_floor)
    return dec, dHe, w, same, floored


def bound_spectral(spec: ModelSpec, g: float, t: float, cluster_tol=None, gap_floor=None) -> float:
    """2 t^2 sum_k ||P_k dH P_k||^2 + 8 sum_{k != l} sin^2(w t / 2) |<E_l|d E_k>|^2.

    With non-degenerate or dH-adapted clusters the first term equals
    2 t^2 sum_k d_k (dE_k/dg)^2. Cross-cluster pairs closer than the gap floor
    use the limit 2 t^2 |<E_l|dH|E_k>|^2.
    """
    dec, dHe, w, same, floored = _spectral_pieces(spec, g, cluster_tol, gap_floor)
    mag2 = np.abs(dHe) ** 2
    linear = 2.0 * t * t * np.sum(mag2[same | floored])
    osc = ~(same | floored)
    wo = w[osc]
    oscillatory = 8.0 * np.sum(np.sin(0.5 * wo * t) ** 2 * mag2[osc] / wo**2)
    return float(linear + oscillatory)


def bound_eigenvalue_independent_ceiling(spec: ModelSpec, g: float, cluster_tol=None, gap_floor=None) -> float:
    """8 sum_{k != l} |<E_l|d E_k>|^2, valid only when no eigenvalue depends on g."""
    dec, dHe, w, same, floored = _spectral_pieces(spec, g, cluster_tol, gap_floor)
    block = np.where(same, dHe, 0.0)
    drift = max_norm(block)
    if drift > EIGENVALUE_INDEPENDENCE_TOL:
        raise InapplicableBoundError(
            f"eigenvalues depend on g (max |<E_k|dH|E_k>| block entry {drift:.3e}); "
            "the t-independent ceiling does not apply"
        )
    if np.any(np.abs(dHe[floored]) > EIGENVALUE_INDEPENDENCE_TOL):
        raise InapplicableBoundError("near-degenerate levels are coupled by dH; the QFI grows without bound")
    osc = ~(same | floored)
    return float(8.0 * np.sum(np.abs(dHe[osc]) ** 2 / w[osc] ** 2))


def tensor_power_qfi(spec: ModelSpec, g: float, t: float, N: int, route: str = "spectral") -> float:
    """Maximal QFI of N noninteracting copies, from the explicit N-copy Hamiltonian."""
    total = tensor_power(spec, N)
    return qfi_max(compute_generator(total, g, t, route).h).qfi


def zero_mode_overlap(spec: ModelSpec, g: float, omega) -> complex:
    """Tr(Omega^dagger dH) for a conserved quantity Omega ([H, Omega] = 0).

    A nonzero result means dH has weight on the zero modes of X -> [H, X],
    so the linear-in-t part of h is nonzero and the QFI grows like t^2.
    """
    H = evaluate(spec, g)
    omega = as_square(omega, "Omega")
    if omega.shape != H.shape:
        raise DimensionError(f"Omega {omega.shape} does not match H {H.shape}")
    hs_norm = np.sqrt(np.real(hs_inner(omega, omega)))
    if abs(hs_norm - 1.0) > 1e-8:
        raise ValueError(f"Omega must have unit Hilbert-Schmidt norm, got {hs_norm:.12g}")
    comm = max_norm(H @ omega - omega @ H)
    if comm > 1e-8 * max_norm(H) * max_norm(omega):
        raise ValueError(f"Omega does not commute with H (max|[H, Omega]| = {comm:.3e})")
    dH = evaluate(differentiate(spec), g)
    return hs_inner(omega, dH)


def qfi_report(spec: ModelSpec, g: float, t: float, probe=None, route: str = "auto") -> QfiReport:
    """QFI for ``probe`` (default: the optimal probe), the maximum, and every applicable bound."""
    res = compute_generator(spec, g, t, route)
    H = evaluate(spec, g)
    U = evolution_operator(eigendecompose(H), t)
    best = qfi_max(res.h)
    optimal_probe = U.conj().T @ best.state
    qfi = qfi_pure(res.h, optimal_probe if probe is None else probe, U)
    short_regime = abs(t) * np.linalg.norm(H, 2) <= SHORT_TIME_REGIME
    bounds = {
        "short_time": bound_short_time(spec, g, t) if short_regime else None,
        "hilbert_schmidt": bound_hilbert_schmidt(res.h),
        "spectral": bound_spectral(spec, g, t),
    }
    try:
        bounds["eigenvalue_independent_ceiling"] = bound_eigenvalue_independent_ceiling(spec, g)
    except InapplicableBoundError:
        bounds["eigenvalue_independent_ceiling"] = None
    return QfiReport(float(g), float(t), qfi, best.qfi, optimal_probe, bounds, res.route)
