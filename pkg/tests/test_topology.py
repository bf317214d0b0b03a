import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from d2d_underlay.geometry import pdf_d_cb
from d2d_underlay.topology import (
    ChannelDraw,
    ConfigError,
    SimConfig,
    Topology,
    bs_interference,
    bs_layout,
    d2d_interference,
    interference_at,
    macro_interference,
    macro_powers,
    sample_channels,
    sample_topology,
)


def realize(cfg, seed=0):
    rng = np.random.default_rng(seed)
    topo = sample_topology(cfg, rng)
    return topo, sample_channels(topo, cfg, rng)


def test_bs_layout():
    assert bs_layout(2000.0, 1).tolist() == [[0.0, 0.0]]
    bs = bs_layout(2000.0, 7)
    assert bs.shape == (7, 2)
    assert np.allclose(np.hypot(bs[1:, 0], bs[1:, 1]), 4000.0)
    # neighbouring outer BSs are also 2R apart
    assert np.allclose(np.hypot(*(bs[1:] - np.roll(bs[1:], 1, axis=0)).T), 4000.0)


@pytest.mark.parametrize("cells", [1, 7])
def test_counts_and_shapes(cells):
    cfg = SimConfig(cells=cells, N_C=5, N_D=3)
    topo, draw = realize(cfg)
    n = cfg.n_d2d
    assert topo.mu_positions.shape == (cells, 5, 2)
    assert topo.d2d_positions.shape == (n, 2)
    assert draw.mu_bs.shape == (5, cells)
    assert draw.mu_d2d.shape == (5, cells, n)
    assert draw.d2d.shape == (5, n, n)
    assert draw.d2d_bs.shape == (5, n)
    assert d2d_interference(topo, draw, cfg).shape == (5, n)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), nd=st.integers(0, 6), cells=st.sampled_from([1, 7]))
def test_placement_invariants(seed, nd, cells):
    cfg = SimConfig(cells=cells, N_C=4, N_D=nd)
    topo, draw = realize(cfg, seed)
    c = topo.cluster_center
    assert np.hypot(*c) <= cfg.R - cfg.r
    assert np.all(np.hypot(*(topo.d2d_positions - c).T) <= cfg.r)
    # the whole cluster stays inside the center cell
    assert np.all(np.hypot(*topo.d2d_positions.T) <= cfg.R)
    for k, bs in enumerate(topo.bs_positions):
        assert np.all(np.hypot(*(topo.mu_positions[k] - bs).T) <= cfg.R)
    assert np.allclose(draw.d2d, np.transpose(draw.d2d, (0, 2, 1)))
    assert np.array_equal(draw.mu_center_bs[:, 0], draw.mu_bs[:, 0])
    assert np.all(d2d_interference(topo, draw, cfg) > 0)


def test_cluster_center_radius_distribution():
    cfg = SimConfig(cells=1, N_C=1, N_D=0)
    rng = np.random.default_rng(11)
    rho = np.array([np.hypot(*sample_topology(cfg, rng).cluster_center) for _ in range(20_000)])
    edges = np.linspace(0, cfg.R - cfg.r, 16)
    observed, _ = np.histogram(rho, edges)
    probs = [integrate.quad(lambda x: pdf_d_cb(x, cfg.distances), a, b)[0] for a, b in zip(edges[:-1], edges[1:])]
    assert stats.chisquare(observed, np.array(probs) * rho.size).pvalue > 1e-3


def test_gain_statistics():
    cfg = SimConfig(cells=7, N_C=30, N_D=20)
    _, draw = realize(cfg, 3)
    iu = np.triu_indices(cfg.n_d2d, 1)
    upper = draw.d2d[:, iu[0], iu[1]].ravel()
    assert upper.mean() == pytest.approx(1.0, abs=0.05)
    # distinct links are independent
    k = upper.size // 2
    assert abs(np.corrcoef(upper[:k], upper[k : 2 * k])[0, 1]) < 0.05


def test_macro_power_sized_to_margin():
    cfg = SimConfig(cells=7, N_C=3)
    topo, draw = realize(cfg, 4)
    pw = macro_powers(topo, draw, cfg)
    d = np.hypot(*(topo.mu_positions[2, 1] - topo.bs_positions[2]))
    snr = pw[1, 2] * d ** -cfg.radio.alpha * draw.mu_bs[1, 2] / cfg.radio.sigma2
    assert snr == pytest.approx(cfg.radio.kappa * cfg.radio.beta_B)


def _hand():
    cfg = SimConfig(cells=1, N_C=2, N_D=0).replace(alpha=2.0, sigma2=1.0, beta_B=2.5, kappa=2.0)
    topo = Topology(
        np.zeros((1, 2)),
        np.array([[[3.0, 4.0], [0.0, 1.0]]]),
        np.zeros(2),
        np.array([[0.0, 0.0], [3.0, 0.0]]),
    )
    draw = ChannelDraw(np.ones((2, 1)), np.ones((2, 1)), np.ones((2, 1, 2)), np.ones((2, 2)), np.ones((2, 2, 2)))
    return cfg, topo, draw


def test_interference_hand_example():
    cfg, topo, draw = _hand()
    # macro user on channel 0 sits 5 m from its BS: power = 2 * 2.5 * 25 = 125 W
    assert macro_powers(topo, draw, cfg)[0, 0] == pytest.approx(125.0)
    # squared distances from the macro user: 25 to node 0, 16 to node 1
    assert interference_at(0, 0, topo, draw, cfg) == pytest.approx(125.0 / 25.0)
    assert interference_at(1, 0, topo, draw, cfg) == pytest.approx(125.0 / 16.0)
    # channel 1: macro at distance 1 -> power 5 W, node 1 at distance sqrt(10)
    assert interference_at(1, 1, topo, draw, cfg) == pytest.approx(5.0 / 10.0)
    assert macro_interference((3.0, 0.0), 0, topo, draw, [2.0], cfg) == pytest.approx(2 * 125.0 / 16.0)
    with pytest.raises(IndexError):
        interference_at(0, 5, topo, draw, cfg)


def test_single_cell_has_no_bs_interference():
    cfg = SimConfig(cells=1, N_C=4)
    topo, draw = realize(cfg)
    assert np.all(bs_interference(topo, draw, cfg) == 0)
    cfg7 = SimConfig(cells=7, N_C=4)
    topo, draw = realize(cfg7)
    assert np.all(bs_interference(topo, draw, cfg7) > 0)


def test_outer_cells_add_interference():
    cfg7 = SimConfig(cells=7, N_C=5, N_D=2)
    topo, draw = realize(cfg7, 9)
    full = d2d_interference(topo, draw, cfg7)
    own = d2d_interference(topo, draw, cfg7, powers=macro_powers(topo, draw, cfg7) * np.r_[1, [0] * 6])
    assert np.all(full > own)


def test_same_seed_same_realization():
    cfg = SimConfig(N_C=6, N_D=4)
    a, da = realize(cfg, 42)
    b, db = realize(cfg, 42)
    assert a.to_json() == b.to_json()
    assert da.to_json() == db.to_json()
    c, _ = realize(cfg, 43)
    assert c.to_json() != a.to_json()


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(N_C=0), "N_C"),
        (dict(N_D=-1), "N_D"),
        (dict(r=2500.0), "r"),
        (dict(cells=3), "cells"),
        (dict(trials=0), "trials"),
        (dict(mode="oracle"), "mode"),
        (dict(channel_order="random"), "channel_order"),
    ],
)
def test_config_errors_name_field(kwargs, field):
    with pytest.raises(ConfigError) as exc:
        SimConfig(**kwargs)
    assert exc.value.field == field


def test_replace_routes_radio_fields():
    cfg = SimConfig().replace(alpha=4.0, N_D=3)
    assert cfg.radio.alpha == 4.0 and cfg.N_D == 3
    with pytest.raises(ConfigError) as exc:
        SimConfig().replace(alpha=1.0)
    assert exc.value.field == "alpha"
