"""Single-hop outage: Monte Carlo over the nine random variables of the
coverage-area formulation, direct simulation of D2D and macro-user outage,
and the multi-hop power/transmission savings metrics.

Random streams are split into fixed-size chunks, each seeded from
``(seed, stream, chunk)``, so results do not depend on how chunks are
scheduled across workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discovery import Route
from .geometry import DistanceParams, circle_intersection_area, sample_uniform_disc
from .radio import (
    EstimateMode,
    RadioParams,
    d2d_tx_power,
    link_estimate,
    macro_min_power,
    meets,
)
from .topology import ChannelDraw, SimConfig, Topology, bs_layout

CHUNK = 8192

# stream tags keep the analytical and simulated paths on unrelated substreams
STREAM_ANALYTICAL = 1
STREAM_D2D_SIM = 2
STREAM_MACRO_SIM = 3


class Method(str, enum.Enum):
    ANALYTICAL = "analytical"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class OutageEstimate:
    p_out: float
    std_err: float
    samples: int
    method: Method

    def __post_init__(self):
        if not (0.0 <= self.p_out <= 1.0):
            raise ValueError(f"p_out outside [0, 1]: {self.p_out}")
        if self.std_err < 0:
            raise ValueError("std_err must be non-negative")


@dataclass
class NineVarSample:
    """Fading gains and distances entering ``d_max`` and the coverage area.

    Fields may be scalars or equally shaped arrays.
    """

    h_MB: np.ndarray
    h_MD: np.ndarray
    h_SD: np.ndarray
    d_CB: np.ndarray
    d_SC: np.ndarray
    d_SB: np.ndarray
    d_MB: np.ndarray
    d_CM: np.ndarray
    d_MD: np.ndarray


def chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, chunk)))


def _chunks(total: int):
    start = 0
    k = 0
    while start < total:
        n = min(CHUNK, total - start)
        yield k, n
        start += n
        k += 1


def _norm(v):
    return np.hypot(v[..., 0], v[..., 1])


def sample_nine_vars(p: DistanceParams, n: int, upsilon: float, rng: np.random.Generator) -> NineVarSample:
    """Draw positions (cluster center, source, destination, macro user) and
    fading, then read off the distances; single cell, BS at the origin."""
    C = sample_uniform_disc((0.0, 0.0), p.R - p.r, rng, size=n)
    S = sample_uniform_disc(C, p.r, rng, size=n)
    D = sample_uniform_disc(C, p.r, rng, size=n)
    M = sample_uniform_disc((0.0, 0.0), p.R, rng, size=n)
    h = rng.exponential(upsilon, (3, n))
    s = NineVarSample(
        h_MB=h[0],
        h_MD=h[1],
        h_SD=h[2],
        d_CB=_norm(C),
        d_SC=_norm(S - C),
        d_SB=_norm(S),
        d_MB=_norm(M),
        d_CM=_norm(C - M),
        d_MD=_norm(M - D),
    )
    # exact zeros have probability zero but would divide by zero downstream
    bad = (s.d_SB == 0) | (s.d_MB == 0) | (s.d_MD == 0)
    if np.any(bad):
        repl = sample_nine_vars(p, int(bad.sum()), upsilon, rng)
        for name in s.__dataclass_fields__:
            getattr(s, name)[bad] = getattr(repl, name)
    return s


def compute_d_max(s: NineVarSample, mode: EstimateMode, p: RadioParams):
    """Largest source-destination distance that still meets ``beta_D`` given
    the macro user at its minimum power and the source at its D2D power."""
    a = p.alpha
    h_sb_hat = p.upsilon
    h_sd_hat = link_estimate(s.h_SD, mode, p)
    md_a = np.power(s.d_MD, a)
    num = md_a * (p.kappa - 1.0) * np.power(s.d_SB, a) * s.h_SD * s.h_MB / h_sb_hat
    den = p.beta_D * h_sd_hat * (p.kappa * p.beta_B * np.power(s.d_MB, a) * s.h_MD + md_a * s.h_MB)
    return np.power(num / den, 1.0 / a)


def coverage_fraction(s: NineVarSample, mode: EstimateMode, p: RadioParams, r: float):
    """Share of the cluster inside the source's coverage disc, in ``[0, 1]``."""
    area = circle_intersection_area(compute_d_max(s, mode, p), r, s.d_SC)
    return np.clip(np.asarray(area) / (np.pi * r * r), 0.0, 1.0)


def analytical_outage_per_channel(
    cfg: SimConfig,
    mode: Optional[EstimateMode] = None,
    mc_samples: int = 100_000,
    seed: Optional[int] = None,
) -> OutageEstimate:
    """Monte Carlo estimate of ``1 - E[A_INT / (pi r^2)]`` for one channel."""
    if mc_samples < 1:
        raise ValueError("mc_samples must be >= 1")
    mode = cfg.mode if mode is None else EstimateMode.parse(mode)
    seed = cfg.seed if seed is None else seed
    dp = cfg.distances
    total = 0.0
    total_sq = 0.0
    for k, n in _chunks(mc_samples):
        s = sample_nine_vars(dp, n, cfg.radio.upsilon, chunk_rng(seed, STREAM_ANALYTICAL, k))
        cov = coverage_fraction(s, mode, cfg.radio, cfg.r)
        total += cov.sum()
        total_sq += np.square(cov).sum()
    mean = total / mc_samples
    var = max(total_sq / mc_samples - mean * mean, 0.0)
    se = np.sqrt(var / max(mc_samples - 1, 1))
    return OutageEstimate(float(np.clip(1.0 - mean, 0.0, 1.0)), float(se), mc_samples, Method.ANALYTICAL)


def multi_channel_outage(p_single, N_C: int):
    """Outage on every one of ``N_C`` independent, identically distributed channels."""
    if N_C < 1:
        raise ValueError("N_C must be >= 1")
    if np.any((np.asarray(p_single) < 0) | (np.asarray(p_single) > 1)):
        raise ValueError("probability outside [0, 1]")
    return p_single**N_C


def analytical_outage(
    cfg: SimConfig,
    mode: Optional[EstimateMode] = None,
    mc_samples: int = 100_000,
    seed: Optional[int] = None,
) -> OutageEstimate:
    """Any-channel outage from the per-channel estimate; the standard error is
    propagated by the delta method."""
    single = analytical_outage_per_channel(cfg, mode, mc_samples, seed)
    n = cfg.N_C
    p = multi_channel_outage(single.p_out, n)
    se = n * single.p_out ** (n - 1) * single.std_err
    return OutageEstimate(float(p), float(se), mc_samples, Method.ANALYTICAL)


def _sim_macro_field(cfg: SimConfig, n: int, rng: np.random.Generator, receivers: np.ndarray):
    """Macro interference at one receiver per channel, ``receivers`` shaped
    ``(n, N_C, 2)``.

    Returns ``(I, M, p_m, h_own)``: interference ``(n, N_C)``, macro-user
    positions ``(n, N_C, cells, 2)``, their powers and own-BS gains
    ``(n, N_C, cells)``.
    """
    bs = bs_layout(cfg.R, cfg.cells)
    M = sample_uniform_disc(bs[None, None, :, :], cfg.R, rng, size=(n, cfg.N_C, cfg.cells))
    h_own = rng.exponential(cfg.radio.upsilon, (n, cfg.N_C, cfg.cells))
    d_own = _norm(M - bs[None, None, :, :])
    p_m = macro_min_power(d_own, h_own, cfg.radio)
    h_rx = rng.exponential(cfg.radio.upsilon, (n, cfg.N_C, cfg.cells))
    d_rx = _norm(M - receivers[:, :, None, :])
    I = (p_m * np.power(d_rx, -cfg.radio.alpha) * h_rx).sum(axis=2)
    return I, M, p_m, h_own


def simulate_d2d_outage(
    cfg: SimConfig,
    mode: Optional[EstimateMode] = None,
    trials: Optional[int] = None,
    per_channel: bool = False,
    independent_channels: bool = True,
) -> OutageEstimate:
    """Fraction of random topologies in which no channel gives the destination
    an SINR of at least ``beta_D``.

    Every channel has its own macro users and fading. With
    ``independent_channels`` (default) each channel also draws its own cluster
    and source-destination pair, so per-channel outcomes are i.i.d. as the
    ``p ** N_C`` law assumes; otherwise one pair is shared by all channels of a
    trial. ``per_channel=True`` returns the per-(trial, channel) failure rate.
    """
    mode = cfg.mode if mode is None else EstimateMode.parse(mode)
    trials = cfg.trials if trials is None else trials
    p = cfg.radio
    fails = np.empty(trials)
    pos = 0
    for k, n in _chunks(trials):
        rng = chunk_rng(cfg.seed, STREAM_D2D_SIM, k)
        shape = (n, cfg.N_C) if independent_channels else (n, 1)
        C = sample_uniform_disc((0.0, 0.0), cfg.R - cfg.r, rng, size=shape)
        S = sample_uniform_disc(C, cfg.r, rng, size=shape)
        D = sample_uniform_disc(C, cfg.r, rng, size=shape)
        S, D = (np.broadcast_to(x, (n, cfg.N_C, 2)) for x in (S, D))
        I_D, _, _, _ = _sim_macro_field(cfg, n, rng, D)
        h_SD = rng.exponential(p.upsilon, (n, cfg.N_C))
        d_SB = _norm(S)
        d_SD = _norm(S - D)
        p_s = d2d_tx_power(d_SB, p.upsilon, h_SD, mode, p)
        g = p_s * np.power(d_SD, -p.alpha) * h_SD / (I_D + p.sigma2)
        ok = meets(g, p.beta_D)
        fails[pos : pos + n] = (~ok).mean(axis=1) if per_channel else ~ok.any(axis=1)
        pos += n
    return _mean_estimate(fails, Method.SIMULATED)


def simulate_macro_outage(
    cfg: SimConfig,
    mode: Optional[EstimateMode] = None,
    trials: Optional[int] = None,
    true_sb_estimate: bool = False,
    d2d_active: bool = True,
) -> OutageEstimate:
    """Fraction of (trial, channel) pairs whose macro user misses ``beta_B``.

    One D2D source transmits per trial, on the channel where it measures the
    least macro interference. ``true_sb_estimate`` replaces the statistical
    source-BS estimate with the true gain (diagnostic); ``d2d_active=False``
    removes the D2D transmitter entirely.
    """
    mode = cfg.mode if mode is None else EstimateMode.parse(mode)
    trials = cfg.trials if trials is None else trials
    p = cfg.radio
    per_trial = np.empty(trials)
    pos = 0
    for k, n in _chunks(trials):
        rng = chunk_rng(cfg.seed, STREAM_MACRO_SIM, k)
        C = sample_uniform_disc((0.0, 0.0), cfg.R - cfg.r, rng, size=n)
        S = sample_uniform_disc(C, cfg.r, rng, size=n)
        I_S, M, p_m, h_own = _sim_macro_field(cfg, n, rng, np.broadcast_to(S[:, None, :], (n, cfg.N_C, 2)))
        h_sb = rng.exponential(p.upsilon, n)
        h_sd = rng.exponential(p.upsilon, n)
        d_mb = _norm(M[:, :, 0, :])
        # center-cell macro users were power controlled with their own gain
        signal = p_m[:, :, 0] * np.power(d_mb, -p.alpha) * h_own[:, :, 0]
        interf = np.zeros((n, cfg.N_C))
        if cfg.bs_cross_cell_interference and cfg.cells > 1:
            bs = bs_layout(cfg.R, cfg.cells)
            h_x = rng.exponential(p.upsilon, (n, cfg.N_C, cfg.cells - 1))
            d_x = _norm(M[:, :, 1:, :] - bs[0])
            interf += (p_m[:, :, 1:] * np.power(d_x, -p.alpha) * h_x).sum(axis=2)
        if d2d_active:
            chosen = np.argmin(I_S, axis=1)
            d_sb = _norm(S)
            h_sb_hat = h_sb if true_sb_estimate else p.upsilon
            p_s = d2d_tx_power(d_sb, h_sb_hat, h_sd, mode, p)
            interf[np.arange(n), chosen] += p_s * np.power(d_sb, -p.alpha) * h_sb
        out = ~meets(signal / (interf + p.sigma2), p.beta_B)
        per_trial[pos : pos + n] = out.mean(axis=1)
        pos += n
    return _mean_estimate(per_trial, Method.SIMULATED)


def _mean_estimate(x: np.ndarray, method: Method) -> OutageEstimate:
    n = x.size
    mean = float(x.mean())
    se = float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return OutageEstimate(min(max(mean, 0.0), 1.0), se, n, method)


def cellular_reference_power(d, p: RadioParams):
    """Uplink-style budget with the statistical gain estimate, used for both
    the source-BS and BS-destination legs of the cellular comparison."""
    return p.kappa * p.beta_B * np.power(d, p.alpha) * p.sigma2 / p.upsilon


def power_savings(route: Route, topo: Topology, draw: Optional[ChannelDraw], cfg: SimConfig) -> float:
    """Fractional power saved by the D2D route relative to relaying through the BS."""
    if route is None or len(route.nodes) < 2:
        raise ValueError("power_savings needs a route with at least one hop")
    src = topo.d2d_positions[route.nodes[0]]
    dst = topo.d2d_positions[route.nodes[-1]]
    bs = topo.bs_positions[0]
    cellular = cellular_reference_power(_norm(src - bs), cfg.radio) + cellular_reference_power(
        _norm(dst - bs), cfg.radio
    )
    return float((cellular - sum(route.per_hop_tx_power)) / cellular)


def t_save(T: float, T_NI: float) -> float:
    """Relative reduction in discovery transmissions from network information."""
    if not T > 0:
        raise ValueError("T must be positive")
    return (T - T_NI) / T
