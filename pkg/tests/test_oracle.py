import numpy as np
import pytest

from autoion.oracle import ContinuumDiscretization, compare, convergence_table, integrate, relative_l2
from autoion.params import SystemParams, figure_params
from autoion.spectra import solve


@pytest.fixture(scope="module")
def fig6_table():
    p = figure_params(1.0, 1.0, 1.0, 1.0, 4.0)
    return convergence_table(p, [1.0, 5.0, 10.0], bins=(800, 1600))


def _err(report, t):
    return next(r["rel_l2"] for r in report["errors"] if r["t"] == t)


def test_discretization():
    d = ContinuumDiscretization(-1.0, 1.0, 4)
    assert d.weight == 0.5
    assert np.allclose(d.energies, [-0.75, -0.25, 0.25, 0.75])
    p = figure_params(1.0, 1.0, 1.0, 1.0, 1.0)
    assert ContinuumDiscretization.default(p).covers(p)
    assert not d.covers(p)
    with pytest.raises(ValueError):
        ContinuumDiscretization(1.0, 0.0, 10)


def test_unpumped_ground_state_is_stationary():
    p = SystemParams(E_a=1.3, E_b=1.0, E_L=1.0, mu_a=0.5, mu_b=0.4, J=0.3, V=0.5, mu=1.0)
    run = integrate(p, ContinuumDiscretization.default(p, n_bins=400), t_end=20.0, n_out=5)
    assert np.allclose(run.c, [[1, 0, 0, 0]] * 5, atol=1e-12)
    assert np.max(np.abs(run.d)) <= 1e-12


def test_norm_is_conserved():
    p = figure_params(1.0, 1.0, 1.0, 1.0, 4.0)
    run = integrate(p, ContinuumDiscretization.default(p, n_bins=400), t_end=50.0)
    assert run.max_norm_drift <= 1e-6


@pytest.mark.parametrize("t", [5.0, 10.0])
def test_matches_analytic_spectrum(fig6_table, t):
    assert _err(fig6_table[1], t) < 0.05


def test_error_drops_with_more_bins(fig6_table):
    assert _err(fig6_table[1], 10.0) < _err(fig6_table[0], 10.0)


def test_early_time_needs_wider_window():
    # at t = 1 the spectrum is still broad; the +-8 Gamma window clips its tails
    p = figure_params(1.0, 1.0, 1.0, 1.0, 4.0)
    disc = ContinuumDiscretization.default(p, n_bins=1600, half_width=16.0)
    report = compare(integrate(p, disc, times=[0.0, 1.0]), p)
    assert _err(report, 1.0) < 0.05


def test_relative_l2():
    assert relative_l2(np.array([1.0, 1.0]), np.array([1.0, 1.0])) == 0
    assert relative_l2(np.array([3.0, 4.0]), np.zeros(2)) == 5.0


@pytest.mark.slow
def test_late_time_channels_exchange_at_rabi_frequency():
    p = figure_params(1.0, 1.0, 1.0, 1.0, 4.0)
    sol = solve(p)
    T = 2 * np.pi / sol.rabi.delta_xi
    n = 64
    times = np.concatenate([[0.0], 2 * sol.t_min + np.arange(n) * 8 * T / n])
    # fine bins keep the recurrence time 2 pi / w beyond the last instant
    disc = ContinuumDiscretization.default(p, n_bins=3200)
    assert 2 * np.pi / disc.weight > times[-1]
    run = integrate(p, disc, times=times, rtol=1e-8, atol=1e-10)
    I0 = np.abs(run.d[1:, 0, :]) ** 2
    I1 = np.abs(run.d[1:, 1, :]) ** 2
    k = int(np.argmax(I0.var(axis=0)))
    freqs = 2 * np.pi * np.fft.rfftfreq(n, d=times[2] - times[1])
    for series in (I0[:, k], I1[:, k]):
        spec = np.abs(np.fft.rfft(series - series.mean()))
        assert abs(freqs[np.argmax(spec)] - sol.rabi.delta_xi) <= freqs[1]
    # the two channels trade population: their sum barely moves
    total = I0[:, k] + I1[:, k]
    assert np.ptp(total) < 0.05 * np.ptp(I0[:, k])
