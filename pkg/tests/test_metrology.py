import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfi_workbench.errors import BracketError, DimensionError, IdentifiabilityError
from qfi_workbench.generator import generator_spectral
from qfi_workbench.metrology import (
    FlatLikelihoodWarning,
    ProjectiveMeasurement,
    classical_fisher,
    crb_experiment,
    likelihood_table,
    mle_from_table,
    mle_grid,
    outcome_distribution,
    sample_outcomes,
    sld_measurement,
)
from qfi_workbench.model import evaluate, random_model, spin_amplitude, spin_direction
from qfi_workbench.operators import eigendecompose, evolution_operator, random_state
from qfi_workbench.qfi import qfi_pure, qfi_report

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
X_BASIS = ProjectiveMeasurement(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))


def test_measurement_validation():
    with pytest.raises(ValueError, match="orthonormal"):
        ProjectiveMeasurement(np.array([[1, 1], [0, 1]], dtype=complex))
    with pytest.raises(DimensionError):
        ProjectiveMeasurement(np.ones((2, 3)))
    assert ProjectiveMeasurement.computational(3).dim == 3


def test_outcome_distribution_amplitude_closed_form():
    # probe |+>, H = g sz, x-basis: p_+ = cos^2(g t)
    p = outcome_distribution(spin_amplitude("g"), PLUS, X_BASIS, 0.3, 1.7)
    assert p[0] == pytest.approx(np.cos(0.51) ** 2, abs=1e-14)
    assert p.sum() == pytest.approx(1.0)


def test_outcome_distribution_dimension_mismatch():
    with pytest.raises(DimensionError):
        outcome_distribution(spin_amplitude("g"), np.ones(3) / np.sqrt(3), X_BASIS, 0.0, 1.0)


@pytest.mark.parametrize("g, t", [(0.3, 1.7), (1.1, 0.4), (-0.2, 2.5)])
def test_binomial_fisher_information(g, t):
    # p = cos^2(gt): F = (dp)^2 / (p (1 - p)) = 4 t^2
    assert classical_fisher(spin_amplitude("g"), PLUS, X_BASIS, g, t) == pytest.approx(4 * t * t, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]), st.floats(0.3, 3.0))
def test_sld_measurement_attains_qfi(seed, d, t):
    rng = np.random.default_rng(seed)
    spec = random_model(rng, d, 3)
    probe = random_state(rng, d)
    g = 0.25
    h = generator_spectral(spec, g, t).h
    U = evolution_operator(eigendecompose(evaluate(spec, g)), t)
    f_q = qfi_pure(h, probe, U)
    meas = sld_measurement(spec, probe, g, t)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        f_cl = classical_fisher(spec, probe, meas, g, t)
    assert f_cl <= f_q + 1e-6 * max(1.0, f_q)
    assert f_cl == pytest.approx(f_q, rel=1e-4, abs=1e-6)


def test_sampling_is_deterministic():
    p = np.array([0.2, 0.5, 0.3])
    a = sample_outcomes(p, 1000, (7, 3))
    b = sample_outcomes(p, 1000, (7, 3))
    c = sample_outcomes(p, 1000, (7, 4))
    assert np.array_equal(a.outcomes, b.outcomes)
    assert not np.array_equal(a.outcomes, c.outcomes)
    assert a.counts.sum() == 1000


def test_sampling_total_variation():
    p = np.array([0.1, 0.25, 0.4, 0.25])
    freq = sample_outcomes(p, 100_000, 11).counts / 100_000
    assert 0.5 * np.abs(freq - p).sum() <= 0.01


def test_sampling_degenerate_distribution():
    assert np.all(sample_outcomes([0.0, 1.0, 0.0], 500, 0).outcomes == 1)


@pytest.mark.parametrize("probs, nu", [([0.5, 0.6], 10), ([1.2, -0.2], 10), ([], 10), ([1.0], 0)])
def test_sampling_rejects_bad_input(probs, nu):
    with pytest.raises(ValueError):
        sample_outcomes(probs, nu, 0)


def test_mle_recovers_parameter():
    spec, t, g_true = spin_amplitude("g"), 1.0, 0.6
    p = outcome_distribution(spec, PLUS, X_BASIS, g_true, t)
    samples = sample_outcomes(p, 200_000, 5)
    g_hat = mle_grid(samples, spec, PLUS, X_BASIS, t, (0.4, 0.8, 201))
    assert g_hat == pytest.approx(g_true, abs=5e-3)


def test_mle_parabolic_refinement_is_exact_for_quadratic():
    gs = np.linspace(-1, 1, 11)
    logP = np.stack([-(gs - 0.137) ** 2, np.zeros_like(gs)], axis=1)
    assert mle_from_table([1, 0], gs, logP) == pytest.approx(0.137, abs=1e-12)


def test_mle_boundary_maximum_raises():
    gs = np.linspace(0, 1, 11)
    logP = np.stack([gs, np.zeros_like(gs)], axis=1)
    with pytest.raises(BracketError):
        mle_from_table([3, 0], gs, logP)


def test_mle_flat_likelihood_warns():
    gs = np.linspace(0, 1, 11)
    with pytest.warns(FlatLikelihoodWarning):
        assert mle_from_table([2, 2], gs, np.full((11, 2), np.log(0.5))) == 0.0


def test_likelihood_grid_validation():
    with pytest.raises(ValueError):
        likelihood_table(spin_amplitude("g"), PLUS, X_BASIS, 1.0, (1.0, 0.0, 11))


def test_identifiability_failure_at_half_period():
    spec = spin_direction(1.0)
    rep = qfi_report(spec, 0.0, np.pi)
    meas = ProjectiveMeasurement.computational(2)
    with pytest.raises(IdentifiabilityError):
        crb_experiment(spec, rep.optimal_probe, meas, 0.0, np.pi, 1000, 5, 0)


def test_crb_amplitude_model():
    spec, t = spin_amplitude("g"), 1.0
    rep = crb_experiment(spec, PLUS, X_BASIS, 0.3, t, 10_000, 200, 3)
    assert rep.f_classical == pytest.approx(4.0, rel=1e-8)
    assert rep.f_quantum == pytest.approx(4.0, rel=1e-10)
    assert 0.8 <= rep.mse_over_crb <= 1.6
    assert abs(rep.slope - 1.0) < 0.1


def test_crb_parallel_matches_serial(monkeypatch):
    spec, t = spin_amplitude("g"), 1.0
    serial = crb_experiment(spec, PLUS, X_BASIS, 0.3, t, 2000, 20, 9).to_dict()
    monkeypatch.setenv("QFI_WORKBENCH_THREADS", "4")
    parallel = crb_experiment(spec, PLUS, X_BASIS, 0.3, t, 2000, 20, 9).to_dict()
    assert serial == parallel


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_crb_direction_is_robust_across_seeds(seed):
    spec, t = spin_direction(1.0), np.pi / 2
    probe = qfi_report(spec, 0.0, t).optimal_probe
    meas = sld_measurement(spec, probe, 0.0, t)
    rep = crb_experiment(spec, probe, meas, 0.0, t, 10_000, 200, seed)
    assert 0.8 <= rep.mse_over_crb <= 1.6
