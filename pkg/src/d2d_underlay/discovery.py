"""Two-way route discovery: DSR-style flooding where each packet carries the
per-hop transmit power and measured interference, letting receivers check
whether they could answer the previous hop before forwarding.

CSMA/CA is abstracted away: transmissions happen one at a time in
breadth-first order, so there is no D2D-to-D2D interference during discovery.
Node ``0`` is the source, node ``1`` the destination.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .radio import d2d_tx_power, meets
from .topology import ChannelDraw, SimConfig, Topology, d2d_interference

SOURCE = 0
DESTINATION = 1


@dataclass(frozen=True)
class Hop:
    node: int
    tx_power: float
    measured_interference: float


@dataclass
class DiscoveryPacket:
    source: int
    destination: int
    hops: list[Hop] = field(default_factory=list)

    def append(self, node: int, tx_power: float, interference: float) -> None:
        if any(h.node == node for h in self.hops):
            raise ValueError(f"node {node} already on the route")
        self.hops.append(Hop(node, tx_power, interference))

    @property
    def nodes(self) -> list[int]:
        return [h.node for h in self.hops]


@dataclass(frozen=True)
class Route:
    nodes: tuple[int, ...]
    per_hop_tx_power: tuple[float, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a route needs at least two nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"route has a loop: {self.nodes}")
        if len(self.per_hop_tx_power) != len(self.nodes) - 1:
            raise ValueError("one transmit power per hop expected")

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1


@dataclass
class DiscoveryResult:
    route: Optional[Route]
    tx_count: int
    channel: Optional[int]
    per_channel: list[tuple[int, int]] = field(default_factory=list)
    packet: Optional[DiscoveryPacket] = None
    forward_path_found: bool = False

    @property
    def success(self) -> bool:
        return self.route is not None


def derive_link_gain(gamma_j, I_j, sigma2, P_tx):
    """Combined pathloss and fading ``d^-alpha h`` recovered from a measured
    SINR, the receiver's interference and the advertised transmit power."""
    return gamma_j * (I_j + sigma2) / P_tx


def min_reply_power(link_gain, I_S, sigma2, beta_D):
    """Smallest power that reaches the upstream node at SINR ``beta_D`` over a
    symmetric link."""
    return (I_S + sigma2) * beta_D / link_gain


def two_way_feasible(forward_sinr, own_tx_power, reply_min, beta_D):
    return meets(forward_sinr, beta_D) & meets(own_tx_power, reply_min)


@dataclass
class LinkState:
    """Per-channel link quantities for one trial, all shaped ``(N_C, n, n)``
    with ``[c, i, j]`` meaning transmitter ``i`` to receiver ``j`` (except
    ``interference`` which is ``(N_C, n)``)."""

    tx_power: np.ndarray
    interference: np.ndarray
    sinr: np.ndarray
    forward: np.ndarray
    two_way: np.ndarray


def link_state(topo: Topology, draw: ChannelDraw, cfg: SimConfig) -> LinkState:
    p = cfg.radio
    pos = topo.d2d_positions
    n = pos.shape[0]
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    with np.errstate(divide="ignore"):
        pathgain = np.where(np.eye(n, dtype=bool), 0.0, dist ** (-p.alpha))
    gain = pathgain[None] * draw.d2d  # (N_C, n, n)

    d_iB = np.hypot(pos[:, 0], pos[:, 1])
    # BS-side estimate is always the statistical one; the mode only shapes
    # the estimate toward the receiver
    tx = d2d_tx_power(d_iB[None, :, None], p.upsilon, draw.d2d, cfg.mode, p)
    interference = d2d_interference(topo, draw, cfg)

    noise_j = interference[:, None, :] + p.sigma2
    sinr = tx * gain / noise_j
    forward = meets(sinr, p.beta_D)
    eye = np.eye(n, dtype=bool)[None]
    forward &= ~eye

    with np.errstate(divide="ignore", invalid="ignore"):
        derived = derive_link_gain(sinr, interference[:, None, :], p.sigma2, tx)
        reply_min = min_reply_power(derived, interference[:, :, None], p.sigma2, p.beta_D)
    reply_tx = np.transpose(tx, (0, 2, 1))  # power j uses toward i
    two_way = forward & two_way_feasible(sinr, reply_tx, reply_min, p.beta_D)
    return LinkState(tx, interference, sinr, forward, two_way)


def _flood(forward: np.ndarray, two_way: np.ndarray, use_ni: bool):
    """Breadth-first flood on one channel. Every node transmits at most once
    and the destination never forwards. Returns ``(parents, tx_count, path)``
    where ``path`` is the first arrival at the destination, or None."""
    n = forward.shape[0]
    usable = two_way if use_ni else forward
    parent = {SOURCE: None}
    queue = deque([SOURCE])
    tx_count = 0
    path = None
    while queue:
        i = queue.popleft()
        tx_count += 1
        row = usable[i]
        for j in range(n):
            if j in parent or not row[j]:
                continue
            parent[j] = i
            if j == DESTINATION:
                path = [j]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                path.reverse()
            else:
                queue.append(j)
    return parent, tx_count, path


def _discover_on(links: LinkState, channel: int, cfg: SimConfig, use_ni: bool) -> DiscoveryResult:
    two_way = links.two_way[channel]
    _, tx_count, path = _flood(links.forward[channel], two_way, use_ni)
    result = DiscoveryResult(None, tx_count, None, [(channel, tx_count)])
    if path is None:
        return result
    result.forward_path_found = True
    hops = list(zip(path[:-1], path[1:]))
    if not all(two_way[i, j] for i, j in hops):
        return result
    powers = tuple(float(links.tx_power[channel, i, j]) for i, j in hops)
    packet = DiscoveryPacket(SOURCE, DESTINATION)
    for (i, _), pw in zip(hops, powers):
        packet.append(i, pw, float(links.interference[channel, i]))
    result.route = Route(tuple(path), powers)
    result.channel = channel
    result.packet = packet
    return result


def run_discovery(
    topo: Topology,
    draw: ChannelDraw,
    channel: int,
    cfg: SimConfig,
    links: Optional[LinkState] = None,
    ni: Optional[bool] = None,
) -> DiscoveryResult:
    """Flood one channel and report the first route reaching the destination.

    With network information a node forwards only packets it could answer;
    without it any received packet is forwarded, and a first-arriving route
    that turns out to be one-way counts as a failure.
    """
    if topo.d2d_positions.shape[0] < 2:
        raise ValueError("discovery needs a source and a destination")
    if links is None:
        links = link_state(topo, draw, cfg)
    use_ni = cfg.ni_enabled if ni is None else ni
    return _discover_on(links, channel, cfg, use_ni)


def channel_order(links: LinkState, cfg: SimConfig) -> list[int]:
    n_c = links.interference.shape[0]
    if cfg.channel_order == "fixed":
        return list(range(n_c))
    # stable sort keeps ties in index order
    return [int(c) for c in np.argsort(links.interference[:, SOURCE], kind="stable")]


def discover_over_channels(
    topo: Topology,
    draw: ChannelDraw,
    cfg: SimConfig,
    links: Optional[LinkState] = None,
    ni: Optional[bool] = None,
) -> DiscoveryResult:
    """Try channels in order (least interference at the source first by
    default) until one yields a two-way route; transmissions accumulate."""
    if links is None:
        links = link_state(topo, draw, cfg)
    use_ni = cfg.ni_enabled if ni is None else ni
    per_channel = []
    total = 0
    last = None
    for c in channel_order(links, cfg):
        last = _discover_on(links, c, cfg, use_ni)
        total += last.tx_count
        per_channel.extend(last.per_channel)
        if last.success:
            break
    last.tx_count = total
    last.per_channel = per_channel
    return last
