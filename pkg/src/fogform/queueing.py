"""Wireless link rates and M/D/1 delay models for a fog/cloud offloading node.

Every task path is a two-stage pipeline: an optional transmission queue
(the wireless hop towards a neighbor node or the cloud base station)
followed by a computation stage at the destination.  Task arrivals are
Poisson and service times deterministic, so each queue is an M/D/1 system
with mean waiting time lambda / (2 mu (mu - lambda)).

Powers are configured in dBm (dBm/Hz for the noise density) and converted
to linear SI units exactly once, when a :class:`RadioParams` is built; all
downstream arithmetic is linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "QueueUnstableError",
    "RadioParams",
    "ComputeProfile",
    "Position",
    "dbm_to_watts",
    "channel_gain",
    "service_rate",
    "md1_wait",
    "tx_delay",
    "comp_delay_fog",
    "comp_delay_cloud",
    "path_delay",
]


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm power figure to linear watts (or dBm/Hz to W/Hz)."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


class QueueUnstableError(ValueError):
    """A queue is driven at or beyond its service rate and has no steady state."""

    def __init__(self, queue: str, lam: float, mu: float):
        self.queue = queue
        self.lam = lam
        self.mu = mu
        super().__init__(
            f"{queue} queue unstable: arrival rate {lam:g} packets/s >= "
            f"service rate {mu:g} packets/s"
        )


@dataclass(frozen=True)
class RadioParams:
    """Physical-layer constants shared by all wireless hops.

    Parameters:
        bandwidth_hz: channel bandwidth B in Hz
        noise_psd_dbm_per_hz: noise power spectral density in dBm/Hz
        tx_power_dbm: transmit power of the task-initiating node in dBm
        pathloss_const: linear channel gain at the 1 m reference distance
        pathloss_exp: path loss exponent
        packet_size_bits: task packet size in bits (configured bytes * 8)
    """

    bandwidth_hz: float
    noise_psd_dbm_per_hz: float
    tx_power_dbm: float
    pathloss_const: float
    pathloss_exp: float
    packet_size_bits: float
    # linear-scale conversions, derived once here
    tx_power_w: float = field(init=False, repr=False, compare=False)
    noise_psd_w_per_hz: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("bandwidth_hz", "pathloss_const", "pathloss_exp", "packet_size_bits"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"RadioParams.{name} must be positive")
        object.__setattr__(self, "tx_power_w", dbm_to_watts(self.tx_power_dbm))
        object.__setattr__(self, "noise_psd_w_per_hz", dbm_to_watts(self.noise_psd_dbm_per_hz))


@dataclass(frozen=True)
class ComputeProfile:
    """Computation-stage constants of one node.

    ``mu`` is the service rate of the computation queue in packets/s (the
    node's overall hardware speed); ``c`` is the additional deterministic
    compute time per packet in seconds, so a load of lambda packets/s adds
    ``c * lambda`` seconds of processing latency.
    """

    mu: float
    c: float = 0.0

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ValueError("ComputeProfile.mu must be positive")
        if self.c < 0.0:
            raise ValueError("ComputeProfile.c must be non-negative")


@dataclass(frozen=True)
class Position:
    """Planar coordinates in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("Position coordinates must be finite")

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def channel_gain(d: float, radio: RadioParams) -> float:
    """Linear channel gain of a wireless hop of length ``d`` meters.

    Power-law path loss: gain = pathloss_const * d ** (-pathloss_exp).
    """
    if not d > 0.0:
        raise ValueError(f"distance must be positive, got {d!r}")
    return radio.pathloss_const * d ** (-radio.pathloss_exp)


def service_rate(d: float, radio: RadioParams) -> float:
    """Service rate of a transmission queue over a hop of ``d`` meters, packets/s.

    Shannon capacity of the link divided by the packet size:
    (B / K) * log2(1 + gain * P_tx / (B * N0)), everything in linear units.
    """
    gain = channel_gain(d, radio)
    snr = gain * radio.tx_power_w / (radio.bandwidth_hz * radio.noise_psd_w_per_hz)
    return radio.bandwidth_hz * math.log2(1.0 + snr) / radio.packet_size_bits


def md1_wait(lam: float, mu: float, queue: str = "M/D/1") -> float:
    """Mean waiting time in an M/D/1 queue, seconds.

    W = lambda / (2 mu (mu - lambda)); diverges as lambda -> mu.
    """
    if lam < 0.0:
        raise ValueError(f"arrival rate must be non-negative, got {lam!r}")
    if not mu > 0.0:
        raise ValueError(f"service rate must be positive, got {mu!r}")
    if lam >= mu:
        raise QueueUnstableError(queue, lam, mu)
    return lam / (2.0 * mu * (mu - lam))


def tx_delay(lam: float, mu_tx: float) -> float:
    """Transmission-queue latency: M/D/1 wait plus the 1/mu transfer time."""
    return md1_wait(lam, mu_tx, queue="transmission") + 1.0 / mu_tx


def comp_delay_fog(lam: float, prof: ComputeProfile) -> float:
    """Computation latency at a fog node.

    M/D/1 wait, plus the deterministic 1/mu service (application fetch)
    time, plus the per-packet compute time c * lambda.
    """
    return md1_wait(lam, prof.mu, queue="computation") + 1.0 / prof.mu + prof.c * lam

def comp_delay_cloud(lam: float, c_c: float) -> float:
    """Computation latency at the cloud: c_c * lambda.

    Cloud hardware is fast enough that computation queueing is ignored;
    only the per-packet compute time remains.
    """
    if lam < 0.0:
        raise ValueError(f"arrival rate must be non-negative, got {lam!r}")
    if c_c < 0.0:
        raise ValueError(f"compute time constant must be non-negative, got {c_c!r}")
    return c_c * lam


def path_delay(
    kind: str,
    alpha: float,
    x_i: float,
    mu_tx: float | None = None,
    prof: ComputeProfile | None = None,
) -> float:
    """End-to-end latency of one task path carrying the fraction ``alpha`` of x_i.

    kind "local": computation at the initiator only, no transmission queue.
    kind "fog":   transmission queue to the neighbor, then its computation.
    kind "cloud": transmission queue to the base station, then cloud compute
                  (only ``prof.c`` is used; the cloud has no compute queue).

    Raises QueueUnstableError naming the saturated queue (transmission or
    computation) when ``alpha * x_i`` meets or exceeds a service rate.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    lam = alpha * x_i
    if kind == "local":
        if prof is None:
            raise ValueError("local path requires a compute profile")
        return comp_delay_fog(lam, prof)
    if kind == "fog":
        if mu_tx is None or prof is None:
            raise ValueError("fog path requires a transmission rate and a compute profile")
        return tx_delay(lam, mu_tx) + comp_delay_fog(lam, prof)
    if kind == "cloud":
        if mu_tx is None or prof is None:
            raise ValueError("cloud path requires a transmission rate and a compute profile")
        return tx_delay(lam, mu_tx) + comp_delay_cloud(lam, prof.c)
    raise ValueError(f"unknown path kind {kind!r}")
