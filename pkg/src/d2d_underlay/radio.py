"""Channel gains, SINR and the three-stage D2D power control.

Powers are in watts throughout. Thresholds (``beta_B``, ``beta_D``) and the
interference margin ``kappa`` are stored linear; use :meth:`RadioParams.from_db`
to build them from the dB/dBm values of a parameter table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

# relative slack applied to SINR threshold tests so that a link sized to sit
# exactly on its threshold is not failed by floating-point rounding
SINR_RTOL = 1e-9


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watt(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(x_w):
    return 10.0 * np.log10(x_w) + 30.0


def meets(sinr_value, threshold):
    """``sinr_value >= threshold`` up to :data:`SINR_RTOL`."""
    return np.asarray(sinr_value) >= np.asarray(threshold) * (1.0 - SINR_RTOL)


class EstimateMode(str, enum.Enum):
    """How a D2D transmitter estimates the fading toward its receiver."""

    STATISTICAL = "statistical"
    PERFECT = "perfect"
    TRUNCATED = "truncated"

    @classmethod
    def parse(cls, value: "str | EstimateMode") -> "EstimateMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown estimate mode {value!r}; expected one of {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class RadioParams:
    alpha: float = 3.0
    sigma2: float = float(dbm_to_watt(-104.0))
    beta_B: float = float(db_to_linear(10.0))
    beta_D: float = float(db_to_linear(5.0))
    kappa: float = float(db_to_linear(3.0))
    upsilon: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        if not self.kappa > 1:
            raise ValueError(f"kappa must exceed 1 (linear), got {self.kappa}")
        for name in ("beta_B", "beta_D", "sigma2", "upsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_db(
        cls,
        alpha: float = 3.0,
        sigma2_dbm: float = -104.0,
        beta_B_db: float = 10.0,
        beta_D_db: float = 5.0,
        kappa_db: float = 3.0,
        upsilon: float = 1.0,
    ) -> "RadioParams":
        return cls(
            alpha=float(alpha),
            sigma2=float(dbm_to_watt(sigma2_dbm)),
            beta_B=float(db_to_linear(beta_B_db)),
            beta_D=float(db_to_linear(beta_D_db)),
            kappa=float(db_to_linear(kappa_db)),
            upsilon=float(upsilon),
        )

    def to_db(self) -> dict:
        return {
            "alpha": self.alpha,
            "sigma2_dbm": float(watt_to_dbm(self.sigma2)),
            "beta_B_db": float(linear_to_db(self.beta_B)),
            "beta_D_db": float(linear_to_db(self.beta_D)),
            "kappa_db": float(linear_to_db(self.kappa)),
            "upsilon": self.upsilon,
        }


class LinkSample(NamedTuple):
    distance: float
    h: float


def sample_fading(upsilon: float, rng: np.random.Generator, size=None):
    """Exponential power gain(s) with mean ``upsilon`` (Rayleigh amplitude)."""
    if not upsilon > 0:
        raise ValueError(f"upsilon must be positive, got {upsilon}")
    return rng.exponential(upsilon, size)


def received_power(power, link: LinkSample, alpha: float):
    return power * link.distance ** (-alpha) * link.h


def sinr(
    signal: tuple[float, LinkSample],
    interferers: Iterable[tuple[float, LinkSample]],
    sigma2: float,
    alpha: float,
) -> float:
    """SINR of ``signal`` over the summed ``interferers`` plus noise.

    ``signal`` and each interferer are ``(power, LinkSample)`` pairs.
    """
    p, link = signal
    interference = sum(received_power(pk, lk, alpha) for pk, lk in interferers)
    return received_power(p, link, alpha) / (interference + sigma2)


def macro_min_power(d_MB, h_MB, p: RadioParams):
    """Smallest macro-user power giving SNR ``kappa * beta_B`` at its BS."""
    return p.kappa * p.beta_B * np.power(d_MB, p.alpha) / h_MB * p.sigma2


def d2d_max_power(d_SB, h_SB_hat, p: RadioParams):
    """Largest D2D power keeping the BS SINR at ``beta_B`` when the true
    source-BS gain equals ``h_SB_hat``."""
    return (p.kappa - 1.0) * np.power(d_SB, p.alpha) * p.sigma2 / h_SB_hat


def link_estimate(h_true, mode: EstimateMode, p: RadioParams):
    """Estimate of the transmitter-receiver fading gain under ``mode``."""
    mode = EstimateMode.parse(mode)
    if mode is EstimateMode.STATISTICAL:
        return np.full_like(np.asarray(h_true, dtype=float), p.upsilon)[()]
    if mode is EstimateMode.PERFECT:
        return h_true
    return np.maximum(1.0, h_true)


def d2d_tx_power(d_iB, h_iB_hat, h_ij_true, mode: EstimateMode, p: RadioParams):
    """D2D transmit power: the BS-limited maximum scaled by the inverse of the
    estimated gain toward the receiver."""
    return d2d_max_power(d_iB, h_iB_hat, p) / link_estimate(h_ij_true, mode, p)
