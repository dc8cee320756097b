"""Exit criteria. Each test is one criterion, run at its stated tolerance."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homsim import cli, coherence, experiments, fock
from homsim.config import RunConfig
from homsim.spectra import SpectralModel, apply_filter, sample_pairs

pytestmark = pytest.mark.acceptance

SIGMA = 1.0
N = 100_000
SEED = 7
GRID65 = np.linspace(0.0, 4.0 / SIGMA, 65)
RATIOS = (1.0, 0.75, 0.5, 0.25)


def test_c1_zero_delay_dip():
    model = SpectralModel(SIGMA)
    assert coherence.analytic_coincidence(model, 0.0) == 0.0
    t0 = time.perf_counter()
    mean, err = coherence.ensemble_coincidence(model, 0.0, N, SEED)
    elapsed = time.perf_counter() - t0
    assert (mean, err) == (0.0, 0.0)
    assert elapsed < 1.0


def test_c2_classical_bound_saturation():
    model = SpectralModel(SIGMA)
    at2 = coherence.analytic_coincidence(model, 2.0 / SIGMA)
    assert abs(at2 - 0.5 * (1.0 - math.exp(-8.0))) < 1e-9
    assert round(at2, 6) == 0.499832
    analytic = coherence.analytic_coincidence(model, GRID65)
    assert np.all(analytic < 0.5)
    t0 = time.perf_counter()
    curve = coherence.scan(model, GRID65, N, SEED)
    elapsed = time.perf_counter() - t0
    assert np.all(np.abs(curve.values - analytic) <= 5.0 * curve.std_errors)
    assert elapsed < 5.0


def test_c3_bandwidth_family():
    base = SpectralModel(SIGMA)
    curves = {r: coherence.scan(apply_filter(base, r), GRID65, analytic=True).values for r in RATIOS}
    for r in RATIOS:
        ref = coherence.analytic_coincidence(base, r * GRID65)
        assert np.max(np.abs(curves[r] - ref)) <= 1e-12
    window = (GRID65 > 0) & (GRID65 < 2.0 / SIGMA)
    asc = sorted(RATIOS)
    for lo, hi in zip(asc, asc[1:]):
        assert np.all(curves[lo][window] < curves[hi][window])
    report = experiments.reproduce_fig1d(RunConfig(command="sweep-bandwidth", analytic=True))
    crossings = [report.metadata["half_plateau_delay"][f"{r:g}"] for r in asc]
    assert all(a > b for a, b in zip(crossings, crossings[1:]))
    assert report.passed


def test_c4_unshifted_contrast():
    model = SpectralModel(SIGMA)
    unshifted = coherence.scan(model, GRID65, analytic=True, shifted=False).values
    shifted = coherence.scan(model, GRID65, analytic=True, shifted=True).values
    assert unshifted[0] == 1.0
    assert np.all(unshifted >= 0.5)
    np.testing.assert_allclose(unshifted, 0.5 * (1 + np.exp(-2 * SIGMA**2 * GRID65**2)), rtol=0, atol=1e-15)
    assert shifted[0] - unshifted[0] == -1.0
    report = experiments.eq3_vs_eq4_contrast(RunConfig(command="contrast", n_pairs=N, seed=SEED))
    assert report.passed


@pytest.mark.parametrize("sigma,seed", [(1.0, 7), (0.3, 1), (4.0, 12345)])
def test_c5_born_rule_uniformity(sigma, seed):
    ens = sample_pairs(SpectralModel(sigma), N, seed)
    for tau in np.linspace(0, 4 / sigma, 17):
        i_a, i_b = coherence.port_intensities(ens.delta_f, tau)
        assert abs(i_a.mean() - 1.0) < 1e-12 and abs(i_b.mean() - 1.0) < 1e-12
        assert np.max(np.abs(i_a + i_b - 2.0)) <= 2 * np.finfo(float).eps


@pytest.mark.parametrize("sigma", [1.0, 0.4, 2.5])
def test_c6_entanglement_non_witness(sigma):
    grid = fock.FrequencyGrid.covering(sigma)
    taus = np.linspace(0, 10 / sigma, 41)
    product = fock.coincidence_probability(fock.make_product_state(grid, sigma), taus)
    entangled = fock.coincidence_probability(fock.make_entangled_state(grid, sigma, 0.0, 0.0), taus)
    assert product[0] <= 1e-8
    assert np.max(np.abs(product - entangled)) < 1e-9
    assert abs(product[-1] - 0.5) < 1e-6 and abs(entangled[-1] - 0.5) < 1e-6


@settings(max_examples=12, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.05, 1.0), st.floats(0.1, 1.5))
def test_c7_cross_model_equivalence(sigma, ratio, ridge_fraction):
    s_eff = sigma * ratio
    cfg = RunConfig(command="compare", sigma=sigma, bandwidth_ratio=ratio, tau_steps=33,
                    tau_max=4.0 / s_eff, ridge_width=ridge_fraction * s_eff)
    report = experiments.model_equivalence(cfg)
    fk, an = report.curves
    assert np.max(np.abs(fk.values - an.values)) < 1e-6
    assert report.check("fit_residual").measured < 1e-4
    assert report.check("grid_refinement_change").measured < 1e-4


def test_c8_fringe_extension():
    mu = 3.0 * SIGMA
    model = SpectralModel(SIGMA, mu)
    odd = np.array([k * math.pi / (2 * mu) for k in (1, 3, 5)])
    closed = 0.5 * (1 - np.exp(-2 * SIGMA**2 * odd**2) * np.cos(2 * mu * odd))
    analytic = coherence.analytic_coincidence(model, odd)
    assert np.all(analytic > 0.5)
    np.testing.assert_allclose(analytic, closed, rtol=0, atol=1e-15)
    mc = coherence.scan(model, odd, N, SEED)
    assert np.all(np.abs(mc.values - closed) <= 5 * mc.std_errors)
    flat = coherence.analytic_coincidence(SpectralModel(SIGMA), np.linspace(0, 4, 401))
    assert np.all(np.diff(flat) >= 0)
    report = experiments.fringe_extension(RunConfig(command="fringe", mean_offset=mu, n_pairs=N, seed=SEED))
    assert report.passed


@pytest.mark.parametrize("argv", [
    ["scan"], ["scan", "--analytic"], ["scan", "--model", "fock"], ["sweep-bandwidth"],
    ["contrast"], ["fringe", "--mean-offset", "3"], ["witness"], ["compare"],
    ["born-rule"], ["detuning-map"],
], ids=lambda a: "-".join(a))
def test_c9_determinism(tmp_path, argv):
    outs = []
    for fmt in ("csv", "json"):
        for i in range(2):
            path = tmp_path / f"{fmt}{i}"
            assert cli.main([*argv, "--format", fmt, "--output", str(path)]) == 0
            outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[2] == outs[3]
