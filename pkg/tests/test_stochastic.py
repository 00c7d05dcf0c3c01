import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expneuron.errors import InvalidInputError
from expneuron.map_core import MapParams, State, step_full
from expneuron.sim_engine import RegimeLabel, SimConfig, classify_regime, detect_spikes, simulate
from expneuron.stochastic import (GENERATOR_VERSION, NoiseConfig, NoiseTarget, cell_seed,
                                  gaussian_stream, noise_response, simulate_noisy)

SUB = MapParams(2.1, 1.1, 0.02)
SILENT = MapParams(2.1, 1.115, 0.02)


def test_stream_moments():
    d = gaussian_stream(12345).draw(1_000_000)
    assert -0.005 <= d.mean() <= 0.005
    assert 0.99 <= d.var() <= 1.01


def test_stream_reproducible():
    a = gaussian_stream(7)
    b = gaussian_stream(7)
    assert np.array_equal(a.draw(100), b.draw(100))
    it = iter(gaussian_stream(7))
    first = [next(it) for _ in range(5)]
    assert first == gaussian_stream(7).draw(5).tolist()


def test_stream_pinned_values():
    # PCG64 + ziggurat is stable across numpy releases
    v = gaussian_stream(0).draw(3)
    ref = np.random.Generator(np.random.PCG64(0)).standard_normal(3)
    assert np.array_equal(v, ref)
    assert GENERATOR_VERSION.startswith("PCG64")


@pytest.mark.parametrize("target", list(NoiseTarget))
def test_zero_sigma_is_deterministic_path(target):
    cfg = SimConfig(n_transient=500, n_record=5000, record_y=True)
    t0 = simulate(SUB, cfg)
    tn = simulate_noisy(SUB, NoiseConfig(0.0, 3, target), cfg)
    assert np.array_equal(t0.xs, tn.xs) and np.array_equal(t0.ys, tn.ys)


@pytest.mark.parametrize("target, per_step", [(NoiseTarget.SLOW_ONLY, 1),
                                              (NoiseTarget.FAST_ONLY, 1),
                                              (NoiseTarget.BOTH, 2)])
def test_draw_count(target, per_step):
    cfg = SimConfig(n_transient=70_000, n_record=1234)
    t = simulate_noisy(SUB, NoiseConfig(1e-3, 1, target), cfg)
    assert t.noise_draws == per_step * cfg.total_steps


def test_slow_noise_matches_hand_iteration():
    cfg = SimConfig(n_transient=0, n_record=400, record_y=True)
    sigma, seed = 2e-3, 99
    t = simulate_noisy(SUB, NoiseConfig(sigma, seed), cfg)
    xi = gaussian_stream(seed).draw(400)
    cur = State(SUB.s - 1 + 0.01, (1 - SUB.a) * (SUB.s - 1) + np.exp(SUB.s - 1))
    for k in range(400):
        nxt = step_full(SUB, cur)
        cur = State(nxt.x, nxt.y + sigma * xi[k])
        assert t.xs[k] == cur.x and t.ys[k] == cur.y


def test_fast_noise_perturbs_x_only():
    cfg = SimConfig(n_transient=0, n_record=1, record_y=True)
    base = simulate(SUB, cfg)
    t = simulate_noisy(SUB, NoiseConfig(1e-2, 5, NoiseTarget.FAST_ONLY), cfg)
    assert t.ys[0] == base.ys[0] and t.xs[0] != base.xs[0]


@given(st.integers(0, 2 ** 63 - 1), st.floats(0, 1e-2))
@settings(max_examples=20, deadline=None)
def test_seed_determinism(seed, sigma):
    cfg = SimConfig(n_transient=100, n_record=300)
    a = simulate_noisy(SUB, NoiseConfig(sigma, seed), cfg)
    b = simulate_noisy(SUB, NoiseConfig(sigma, seed), cfg)
    assert np.array_equal(a.xs, b.xs)


def test_negative_sigma_rejected():
    with pytest.raises(InvalidInputError):
        NoiseConfig(-1e-3)


def test_cell_seeds_distinct():
    s = {tuple(cell_seed(0, i, j).generate_state(2)) for i in range(5) for j in range(20)}
    assert len(s) == 100


def test_weak_noise_no_spikes():
    quiet = 0
    for j in range(20):
        t = simulate_noisy(SUB, NoiseConfig(1e-4, cell_seed(0, 0, j)))
        quiet += len(detect_spikes(t)) == 0
    assert quiet > 10


def test_strong_noise_tonic():
    tonic = sum(classify_regime(simulate_noisy(SUB, NoiseConfig(4e-3, cell_seed(0, 2, j))))
                is RegimeLabel.TONIC_SPIKING for j in range(20))
    assert tonic > 10


def test_response_rate_monotone_and_parallel_equal():
    sig = [1e-4, 4e-4, 4e-3]
    r1 = noise_response(SUB, sig, 12, jobs=1)
    r4 = noise_response(SUB, sig, 12, jobs=4)
    assert np.array_equal(r1.spike_counts, r4.spike_counts)
    assert r1.seed_regimes == r4.seed_regimes
    assert np.all(np.diff(r1.spike_rate) >= 0)
    assert np.all(r1.spike_rate >= 0)
    assert r1.regime[0] is RegimeLabel.SUBTHRESHOLD
    assert r1.regime[-1] is RegimeLabel.TONIC_SPIKING


def test_noise_response_validation():
    with pytest.raises(InvalidInputError):
        noise_response(SUB, [1e-3, 1e-4], 2)
    with pytest.raises(InvalidInputError):
        noise_response(SUB, [], 2)
    with pytest.raises(InvalidInputError):
        noise_response(SUB, [1e-3], 0)


def test_silence_weak_noise_few_spikes():
    r = noise_response(SILENT, [1e-4, 1e-3], 20)
    assert r.spike_rate[0] == 0.0
    assert r.burst_fraction[0] < 0.1
