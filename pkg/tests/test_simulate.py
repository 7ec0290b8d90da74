"""Monte Carlo sampling: determinism, histogram contracts, and TV gaps.

Long-run comparisons against quadrature happen in the acceptance tests;
here the horizons stay short enough for the whole file to run in seconds
with every expected gap measured from the frozen seeds.
"""

import numpy as np
import pytest

from quasipot import (FieldSpec, PdmpSpec, diffusion_density, pdmp_density,
                      scaled_field, simulate_diffusion, simulate_pdmp,
                      tv_distance)
from quasipot.errors import ValidationError
from quasipot.simulate import Histogram

STANDARD = PdmpSpec("1", "-1", "1", "1")


def sine_drift():
    return scaled_field(FieldSpec.expression("sin(2*pi*x)"), -0.5)


def test_seeded_runs_are_bit_identical():
    a = simulate_diffusion(sine_drift(), 0.3, 50.0, seed=7)
    b = simulate_diffusion(sine_drift(), 0.3, 50.0, seed=7)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert a.meta == b.meta
    c = simulate_diffusion(sine_drift(), 0.3, 50.0, seed=8)
    assert not np.array_equal(a.counts, c.counts)


def test_pdmp_runs_are_bit_identical():
    a = simulate_pdmp(STANDARD, 50.0, 50.0, seed=3)
    b = simulate_pdmp(STANDARD, 50.0, 50.0, seed=3)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert a.meta == b.meta


def test_driftless_diffusion_is_uniform():
    hist = simulate_diffusion(FieldSpec.expression("0"), 1.0, 2000.0, seed=0)
    assert tv_distance(hist, 1.0) <= 0.03


def test_diffusion_matches_quadrature():
    hist = simulate_diffusion(sine_drift(), 0.3, 600.0, seed=0)
    curve = diffusion_density(sine_drift(), 0.3, 1024)
    assert tv_distance(hist, curve) <= 0.05


def test_transport_histogram_and_occupancy():
    hist = simulate_pdmp(STANDARD, 50.0, 600.0, seed=0)
    assert tv_distance(hist, 1.0) <= 0.05
    assert hist.meta["sigma0_fraction"] == pytest.approx(0.5, abs=0.02)


def test_occupancy_tracks_the_rate_ratio():
    # r01 = 2, r10 = 1 with unit velocities puts a third of the time in
    # state zero
    spec = PdmpSpec("1", "-1", "2", "1")
    hist = simulate_pdmp(spec, 50.0, 600.0, seed=1)
    assert hist.meta["sigma0_fraction"] == pytest.approx(1.0 / 3.0, abs=0.02)


def test_event_gaps_match_the_exponential_clock():
    # constant rates make the jump gaps exactly Exp(1/lam)
    hist = simulate_pdmp(STANDARD, 50.0, 1000.0, seed=0)
    lam = 50.0
    assert hist.meta["gap_mean"] * lam == pytest.approx(1.0, abs=0.02)
    assert hist.meta["gap_var"] * lam * lam == pytest.approx(1.0, abs=0.02)
    assert hist.meta["events"] <= hist.meta["proposals"]


def test_histogram_contract():
    hist = simulate_diffusion(sine_drift(), 0.3, 50.0, seed=0, bins=40)
    assert hist.bins == 40
    assert len(hist.centers) == 40
    assert hist.counts.sum() == hist.total
    width = 1.0 / 40
    assert np.sum(hist.density) * width == pytest.approx(1.0, abs=1e-9)
    assert hist.meta["seed"] == 0


def test_histogram_guards():
    hist = simulate_diffusion(sine_drift(), 0.3, 50.0, seed=0)
    with pytest.raises(ValidationError):
        Histogram(bins=hist.bins, edges=hist.edges,
                  counts=hist.counts + 1, density=hist.density,
                  total=hist.total, seed=hist.seed, meta=hist.meta)


def test_tv_distance_references():
    hist = simulate_diffusion(sine_drift(), 0.3, 50.0, seed=0)
    assert tv_distance(hist, hist.density) == 0.0
    flat = tv_distance(hist, 1.0)
    also_flat = tv_distance(hist, np.ones(400))
    assert flat == pytest.approx(also_flat, abs=1e-12)


def test_simulation_input_validation():
    with pytest.raises(ValidationError):
        simulate_diffusion(sine_drift(), 0.3, 50.0, dt=0.01)
    with pytest.raises(ValidationError):
        simulate_diffusion(sine_drift(), 0.3, 50.0, burn_in=60.0)
    with pytest.raises(ValidationError):
        simulate_diffusion(sine_drift(), -0.3, 50.0)
    with pytest.raises(ValidationError):
        simulate_pdmp(STANDARD, -5.0, 50.0)
    with pytest.raises(ValidationError):
        simulate_pdmp(STANDARD, 50.0, 0.0)
