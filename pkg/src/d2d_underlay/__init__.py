"""Device-to-device communication underlaying a cellular uplink: power
control, two-way route discovery and outage analysis."""

from .discovery import (
    DiscoveryPacket,
    DiscoveryResult,
    Route,
    derive_link_gain,
    discover_over_channels,
    min_reply_power,
    run_discovery,
    two_way_feasible,
)
from .geometry import DistanceParams, Point2D, circle_intersection_area, sample_uniform_disc
from .outage import (
    NineVarSample,
    OutageEstimate,
    analytical_outage,
    analytical_outage_per_channel,
    compute_d_max,
    multi_channel_outage,
    power_savings,
    simulate_d2d_outage,
    simulate_macro_outage,
    t_save,
)
from .radio import EstimateMode, LinkSample, RadioParams, d2d_max_power, d2d_tx_power, macro_min_power, sinr
from .topology import ChannelDraw, ConfigError, SimConfig, Topology, interference_at, sample_channels, sample_topology

__version__ = "0.1.0"
