"""Simulated estimation: projective measurement, sampling, grid MLE, Cramer-Rao check."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BracketError, DimensionError, IdentifiabilityError
from .generator import generator_spectral
from .model import ModelSpec, evaluate
from .operators import check_state, eigendecompose, evolution_operator, max_norm
from .parallel import ordered_map
from .qfi import qfi_pure, sld_operator

PROBABILITY_FLOOR = 1e-12
IDENTIFIABILITY_FLOOR = 1e-8
DEFAULT_FD_STEP = 1e-5


class NearZeroProbabilityWarning(UserWarning):
    pass


class FlatLikelihoodWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Rank-1 projective measurement; ``vectors[:, m]`` is outcome m."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError(f"measurement needs d orthonormal vectors, got array of shape {v.shape}")
        if max_norm(v @ v.conj().T - np.eye(v.shape[0])) > 1e-10:
            raise ValueError("measurement vectors are not orthonormal (projectors do not sum to I)")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def computational(cls, d: int) -> "ProjectiveMeasurement":
        return cls(np.eye(d, dtype=complex))


@dataclass
class SampleSet:
    nu: int
    outcomes: np.ndarray
    seed: object
    dim: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.outcomes, minlength=self.dim)


@dataclass
class EstimationReport:
    g_true: float
    t: float
    nu: int
    replications: int
    seed: int
    g_est_mean: float
    bias: float
    mse: float
    mse_raw: float
    crb: float
    f_classical: float
    f_quantum: float
    slope: float
    mse_over_crb: float
    grid: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _probabilities(U, probe, meas):
    amps = meas.vectors.conj().T @ (U @ probe)
    return np.abs(amps) ** 2


def outcome_distribution(spec: ModelSpec, probe, meas: ProjectiveMeasurement, g: float, t: float) -> np.ndarray:
    """p_m = |<m|U_g|probe>|^2."""
    probe = check_state(probe)
    if probe.shape[0] != spec.dim or meas.dim != spec.dim:
        raise DimensionError(f"model d={spec.dim}, probe d={probe.shape[0]}, measurement d={meas.dim}")
    U = evolution_operator(eigendecompose(evaluate(spec, g)), t)
    return _probabilities(U, probe, meas)


def _classical_fisher(spec, probe, meas, g, t, delta):
    if not delta > 0:
        raise ValueError("delta must be positive")
    p = outcome_distribution(spec, probe, meas, g, t)
    dp = (outcome_distribution(spec, probe, meas, g + delta, t)
          - outcome_distribution(spec, probe, meas, g - delta, t)) / (2.0 * delta)
    keep = p > PROBABILITY_FLOOR
    notes = []
    suspicious = (~keep) & (np.abs(dp) >= PROBABILITY_FLOOR)
    if np.any(suspicious):
        notes.append(
            f"outcomes {np.nonzero(suspicious)[0].tolist()} have p < {PROBABILITY_FLOOR:g} "
            "but nonzero slope; excluded from the Fisher information"
        )
    return float(np.sum(dp[keep] ** 2 / p[keep])), notes


def classical_fisher(spec: ModelSpec, probe, meas: ProjectiveMeasurement, g: float, t: float,
                     delta: float = DEFAULT_FD_STEP) -> float:
    """sum_m (dp_m/dg)^2 / p_m with central differences for dp/dg."""
    value, notes = _classical_fisher(spec, probe, meas, g, t, delta)
    for note in notes:
        warnings.warn(note, NearZeroProbabilityWarning, stacklevel=2)
    return value


def sld_measurement(spec: ModelSpec, probe, g: float, t: float) -> ProjectiveMeasurement:
    """Eigenbasis of the SLD of the evolved pure state, which attains the QFI."""
    probe = check_state(probe, spec.dim)
    H = evaluate(spec, g)
    psi = evolution_operator(eigendecompose(H), t) @ probe
    h = generator_spectral(spec, g, t).h
    rho = np.outer(psi, psi.conj())
    drho = -1j * (h @ rho - rho @ h)
    L = sld_operator(rho, drho)
    return ProjectiveMeasurement(eigendecompose(0.5 * (L + L.conj().T)).eigenvectors)


def _check_distribution(probs):
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probabilities must be a non-empty vector")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"invalid probability distribution (sum = {p.sum()!r}, min = {p.min()!r})")
    return np.clip(p, 0.0, None)


def _rng(seed):
    return np.random.default_rng(seed)


def sample_outcomes(probs, nu: int, seed) -> SampleSet:
    """Draw ``nu`` outcomes by inverse-CDF sampling of uniform variates.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts; an
    ``(seed, replication)`` pair gives one independent stream per replication.
    Because the same uniforms map monotonically onto outcomes, runs with the
    same seed at nearby parameters draw correlated samples.
    """
    p = _check_distribution(probs)
    if nu < 1:
        raise ValueError("nu must be >= 1")
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    u = _rng(seed).random(nu)
    outcomes = np.minimum(np.searchsorted(cdf, u, side="right"), p.size - 1)
    return SampleSet(int(nu), outcomes, seed, p.size)


def likelihood_table(spec, probe, meas, t, grid):
    """log p_m(g) on the grid points; rows are grid points."""
    lo, hi, n = grid
    if n < 3 or not hi > lo:
        raise ValueError("grid needs g_lo < g_hi and at least 3 points")
    gs = np.linspace(lo, hi, int(n))
    P = np.array([outcome_distribution(spec, probe, meas, g, t) for g in gs])
    with np.errstate(divide="ignore"):
        return gs, np.log(P)


def mle_from_table(counts, gs, logP):
    """Grid argmax of the log-likelihood with 3-point parabolic refinement."""
    counts = np.asarray(counts)
    used = counts > 0
    loglik = logP[:, used] @ counts[used]
    if np.all(loglik == loglik[0]) or np.ptp(loglik) <= 1e-12 * max(1.0, abs(loglik[0])):
        warnings.warn("likelihood is flat on the grid; returning g_lo", FlatLikelihoodWarning, stacklevel=2)
        return float(gs[0])
    i = int(np.argmax(loglik))  # first maximum: ties go to the lower g
    if i == 0 or i == len(gs) - 1:
        raise BracketError(
            f"likelihood maximum at grid boundary g={gs[i]!r}; widen or shift the grid"
        )
    l0, l1, l2 = loglik[i - 1], loglik[i], loglik[i + 1]
    curv = l0 - 2.0 * l1 + l2
    if not np.isfinite(curv) or curv >= 0:
        return float(gs[i])
    step = gs[1] - gs[0]
    return float(gs[i] + 0.5 * step * (l0 - l2) / curv)


def mle_grid(samples: SampleSet, spec: ModelSpec, probe, meas: ProjectiveMeasurement, t: float, grid) -> float:
    gs, logP = likelihood_table(spec, probe, meas, t, grid)
    return mle_from_table(samples.counts, gs, logP)


def crb_experiment(spec: ModelSpec, probe, meas: ProjectiveMeasurement, g_true: float, t: float,
                   nu: int, replications: int, seed: int, grid_halfwidth: float | None = None,
                   grid_points: int = 401) -> EstimationReport:
    """Monte Carlo check of <(dg)^2> against 1 / (nu F).

    Each replication samples ``nu`` outcomes at g_true and estimates g by grid
    MLE on a window centred on the true value (``grid_halfwidth`` defaults to
    10 standard deviations). The slope d<g_est>/dg is estimated from reruns at
    g_true +/- 2 sigma with the same random streams, and the estimation error
    of replication r is (g_est_r - g_true) / |slope|.
    """
    probe = check_state(probe, spec.dim)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        f_cl = classical_fisher(spec, probe, meas, g_true, t)
    notes = [str(w.message) for w in caught]
    if not f_cl > IDENTIFIABILITY_FLOOR:
        raise IdentifiabilityError(
            f"classical Fisher information {f_cl:.3e} at g={g_true!r}, t={t!r} is zero: g is not identifiable"
        )
    h = generator_spectral(spec, g_true, t).h
    U = evolution_operator(eigendecompose(evaluate(spec, g_true)), t)
    f_q = qfi_pure(h, probe, U)
    sigma = 1.0 / np.sqrt(nu * f_cl)
    half = 10.0 * sigma if grid_halfwidth is None else float(grid_halfwidth)
    shift = 2.0 * sigma

    tables = {}
    for key, g0 in (("0", g_true), ("+", g_true + shift), ("-", g_true - shift)):
        gs, logP = likelihood_table(spec, probe, meas, t, (g0 - half, g0 + half, grid_points))
        tables[key] = (gs, logP, outcome_distribution(spec, probe, meas, g0, t))

    def replicate(r):
        out = []
        for key in ("0", "+", "-"):
            gs, logP, p = tables[key]
            counts = sample_outcomes(p, nu, (seed, r)).counts
            out.append(mle_from_table(counts, gs, logP))
        return out

    est = np.array(ordered_map(replicate, range(replications)))
    slope = (est[:, 1].mean() - est[:, 2].mean()) / (2.0 * shift)
    err = (est[:, 0] - g_true) / abs(slope)
    mse = float(np.mean(err**2))
    crb = 1.0 / (nu * f_cl)
    return EstimationReport(
        g_true=float(g_true), t=float(t), nu=int(nu), replications=int(replications), seed=int(seed),
        g_est_mean=float(est[:, 0].mean()), bias=float(est[:, 0].mean() - g_true),
        mse=mse, mse_raw=float(np.mean((est[:, 0] - g_true) ** 2)), crb=crb,
        f_classical=f_cl, f_quantum=f_q, slope=float(slope), mse_over_crb=mse / crb,
        grid=[float(g_true - half), float(g_true + half), int(grid_points)], warnings=notes,
    )
