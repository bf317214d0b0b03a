"""Network realizations: cell layout, macro users, the D2D cluster, and the
per-channel fading draws for one trial."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
import numpy as np

from .geometry import DistanceParams, Point2D, sample_uniform_disc
from .radio import EstimateMode, RadioParams, macro_min_power, sample_fading


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


CHANNEL_ORDERS = ("sorted", "fixed")


@dataclass(frozen=True)
class SimConfig:
    """Scalar network parameters. Defaults: R=2000 m, r=500 m, 30 channels,
    -104 dBm noise, 10 dB and 5 dB SINR targets, 3 dB margin."""

    R: float = 2000.0
    r: float = 500.0
    N_C: int = 30
    N_D: int = 0
    cells: int = 7
    radio: RadioParams = field(default_factory=RadioParams)
    mode: EstimateMode = EstimateMode.STATISTICAL
    trials: int = 100_000
    seed: int = 0
    ni_enabled: bool = True
    channel_order: str = "sorted"
    bs_cross_cell_interference: bool = False

    def __post_init__(self):
        if not isinstance(self.N_C, (int, np.integer)) or self.N_C < 1:
            raise ConfigError("N_C", f"must be an integer >= 1, got {self.N_C!r}")
        if not isinstance(self.N_D, (int, np.integer)) or self.N_D < 0:
            raise ConfigError("N_D", f"must be an integer >= 0, got {self.N_D!r}")
        if not (0 < self.r < self.R):
            raise ConfigError("r", f"need 0 < r < R, got r={self.r}, R={self.R}")
        if self.cells not in (1, 7):
            raise ConfigError("cells", f"must be 1 or 7, got {self.cells!r}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ConfigError("trials", f"must be an integer >= 1, got {self.trials!r}")
        if self.channel_order not in CHANNEL_ORDERS:
            raise ConfigError("channel_order", f"must be one of {CHANNEL_ORDERS}")
        try:
            object.__setattr__(self, "mode", EstimateMode.parse(self.mode))
        except ValueError as exc:
            raise ConfigError("mode", str(exc)) from None

    @property
    def n_d2d(self) -> int:
        return self.N_D + 2

    @property
    def distances(self) -> DistanceParams:
        return DistanceParams(self.R, self.r)

    def replace(self, **changes) -> "SimConfig":
        radio_changes = {k: changes.pop(k) for k in list(changes) if k in _RADIO_FIELDS}
        if radio_changes:
            try:
                changes["radio"] = dataclasses.replace(self.radio, **radio_changes)
            except ValueError as exc:
                raise ConfigError(next(iter(radio_changes)), str(exc)) from None
        return dataclasses.replace(self, **changes)


_RADIO_FIELDS = {f.name for f in dataclasses.fields(RadioParams)}


def bs_layout(R: float, cells: int) -> np.ndarray:
    """Center BS at the origin; for seven cells the outer BSs sit at distance
    2R at angles 0, 60, ..., 300 degrees (tangent circular cells)."""
    pts = [(0.0, 0.0)]
    if cells == 7:
        for k in range(6):
            a = np.deg2rad(60.0 * k)
            pts.append((2.0 * R * np.cos(a), 2.0 * R * np.sin(a)))
    return np.array(pts)


@dataclass
class Topology:
    """One realization.

    ``mu_positions[cell, channel]`` is the macro user on that channel in that
    cell. ``d2d_positions[0]`` is the source, ``[1]`` the destination and the
    rest are relays.
    """

    bs_positions: np.ndarray  # (cells, 2)
    mu_positions: np.ndarray  # (cells, N_C, 2)
    cluster_center: np.ndarray  # (2,)
    d2d_positions: np.ndarray  # (N_D + 2, 2)

    def mu(self, cell: int, channel: int) -> Point2D:
        return Point2D(*self.mu_positions[cell, channel])

    def to_json(self) -> dict:
        return {
            "bs_positions": self.bs_positions.tolist(),
            "mu_positions": self.mu_positions.tolist(),
            "cluster_center": self.cluster_center.tolist(),
            "d2d_positions": self.d2d_positions.tolist(),
        }


@dataclass
class ChannelDraw:
    """Fading power gains for every link a trial uses, indexed by channel first."""

    mu_bs: np.ndarray  # (N_C, cells) macro user -> own BS
    mu_center_bs: np.ndarray  # (N_C, cells) macro user -> center BS
    mu_d2d: np.ndarray  # (N_C, cells, n) macro user -> D2D node
    d2d_bs: np.ndarray  # (N_C, n) D2D node -> center BS
    d2d: np.ndarray  # (N_C, n, n) symmetric D2D <-> D2D

    def to_json(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("mu_bs", "mu_center_bs", "mu_d2d", "d2d_bs", "d2d")}


def sample_topology(cfg: SimConfig, rng: np.random.Generator) -> Topology:
    bs = bs_layout(cfg.R, cfg.cells)
    mu = sample_uniform_disc(bs[:, None, :], cfg.R, rng, size=(cfg.cells, cfg.N_C))
    center = sample_uniform_disc((0.0, 0.0), cfg.R - cfg.r, rng, size=1)[0]
    d2d = sample_uniform_disc(center, cfg.r, rng, size=cfg.n_d2d)
    return Topology(bs, mu, center, d2d)


def sample_channels(topo: Topology, cfg: SimConfig, rng: np.random.Generator) -> ChannelDraw:
    ups = cfg.radio.upsilon
    n = topo.d2d_positions.shape[0]
    cells = topo.bs_positions.shape[0]
    nc = topo.mu_positions.shape[1]
    mu_bs = sample_fading(ups, rng, (nc, cells))
    mu_center_bs = sample_fading(ups, rng, (nc, cells))
    # a macro user's gain to the center BS is its own-BS gain in the center cell
    mu_center_bs[:, 0] = mu_bs[:, 0]
    mu_d2d = sample_fading(ups, rng, (nc, cells, n))
    d2d_bs = sample_fading(ups, rng, (nc, n))
    full = sample_fading(ups, rng, (nc, n, n))
    upper = np.triu(full, 1)
    d2d = upper + np.transpose(upper, (0, 2, 1)) + full * np.eye(n)
    return ChannelDraw(mu_bs, mu_center_bs, mu_d2d, d2d_bs, d2d)


def _dist(a, b):
    return np.hypot(a[..., 0] - b[..., 0], a[..., 1] - b[..., 1])


def macro_powers(topo: Topology, draw: ChannelDraw, cfg: SimConfig) -> np.ndarray:
    """Power of every macro user, ``(N_C, cells)``, sized toward its own BS with
    the true gain."""
    d = _dist(np.transpose(topo.mu_positions, (1, 0, 2)), topo.bs_positions[None, :, :])
    return macro_min_power(d, draw.mu_bs, cfg.radio)


def macro_interference(point, channel: int, topo: Topology, draw: ChannelDraw, gains, cfg: SimConfig) -> float:
    """Summed macro-user power received at an arbitrary ``point`` on
    ``channel``; ``gains`` holds the fading from each cell's macro user to that
    point, shape ``(cells,)``."""
    powers = macro_powers(topo, draw, cfg)[channel]
    d = _dist(topo.mu_positions[:, channel, :], np.asarray(point, dtype=float)[None, :])
    return float(np.sum(powers * d ** (-cfg.radio.alpha) * np.asarray(gains, dtype=float)))


def interference_at(node: int, channel: int, topo: Topology, draw: ChannelDraw, cfg: SimConfig) -> float:
    """Macro interference (W) measured by D2D ``node`` on ``channel``, summed
    over every cell's macro user on that channel."""
    if not 0 <= channel < topo.mu_positions.shape[1]:
        raise IndexError(f"channel {channel} out of range")
    return float(d2d_interference(topo, draw, cfg)[channel, node])


def d2d_interference(topo: Topology, draw: ChannelDraw, cfg: SimConfig, powers=None) -> np.ndarray:
    """Macro interference at every D2D node on every channel, ``(N_C, n)``."""
    if powers is None:
        powers = macro_powers(topo, draw, cfg)
    mu = np.transpose(topo.mu_positions, (1, 0, 2))  # (N_C, cells, 2)
    d = _dist(mu[:, :, None, :], topo.d2d_positions[None, None, :, :])  # (N_C, cells, n)
    rx = powers[:, :, None] * d ** (-cfg.radio.alpha) * draw.mu_d2d
    return rx.sum(axis=1)


def bs_interference(topo: Topology, draw: ChannelDraw, cfg: SimConfig, powers=None) -> np.ndarray:
    """Out-of-cell macro interference at the center BS per channel, ``(N_C,)``."""
    if powers is None:
        powers = macro_powers(topo, draw, cfg)
    if powers.shape[1] == 1:
        return np.zeros(powers.shape[0])
    mu = np.transpose(topo.mu_positions, (1, 0, 2))[:, 1:, :]
    d = _dist(mu, topo.bs_positions[0][None, None, :])
    return (powers[:, 1:] * d ** (-cfg.radio.alpha) * draw.mu_center_bs[:, 1:]).sum(axis=1)
