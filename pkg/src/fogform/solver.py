"""Min-max task distribution over a fixed set of computation paths.

Given a node set (local node, optional cloud uplink, chosen neighbors) and
a total task rate x_i, find the split alpha on the probability simplex that
minimizes the maximum per-path latency.  At the optimum every path that
carries load runs at a common latency D, and paths whose zero-load latency
already exceeds D carry nothing; D is therefore found by an outer bisection
on the equation

    g(D) = sum over paths of load_for_delay(path, D)  =  1,

where load_for_delay inverts the strictly increasing per-path delay curve.
A brute-force simplex-grid oracle is provided for independent verification.

Every path has the same two-queue shape: a transmission queue with rate
``mu_tx`` and a computation queue with rate ``mu`` plus a linear compute
term ``c * lambda``.  A missing stage is encoded with an infinite rate,
which makes its waiting and service terms exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .queueing import ComputeProfile, QueueUnstableError

__all__ = [
    "STABILITY_MARGIN",
    "InfeasibleError",
    "CloudLink",
    "FogLink",
    "NodeSet",
    "PathSpec",
    "TaskDistribution",
    "SolveReport",
    "paths_of",
    "load_for_delay",
    "total_load_fraction",
    "solve_distribution",
    "grid_oracle",
    "total_cost",
]

# Queue loads are capped at (1 - STABILITY_MARGIN) * mu so the bisection
# never evaluates a delay on the divergent side of a queue.
STABILITY_MARGIN = 1e-6

_INF = math.inf


class InfeasibleError(ValueError):
    """The task rate x_i exceeds what the paths can absorb with stable queues."""

    def __init__(self, x_i: float, rate_caps: tuple[float, ...]):
        self.x_i = x_i
        self.rate_caps = rate_caps
        absorbable = sum(min(x_i, cap) for cap in rate_caps)
        self.shortfall = x_i - absorbable
        caps = ", ".join(f"{cap:g}" for cap in rate_caps)
        super().__init__(
            f"infeasible: x_i={x_i:g} packets/s exceeds the absorbable load "
            f"{absorbable:g} packets/s (per-path stable rate caps [{caps}]); "
            f"shortfall {self.shortfall:g} packets/s"
        )


@dataclass(frozen=True)
class CloudLink:
    """Cloud uplink: transmission rate of the base-station hop plus the
    cloud's per-packet compute time (the cloud has no compute queue)."""

    mu_tx: float
    c: float

    def __post_init__(self):
        if not self.mu_tx > 0.0:
            raise ValueError("CloudLink.mu_tx must be positive")
        if self.c < 0.0:
            raise ValueError("CloudLink.c must be non-negative")


@dataclass(frozen=True)
class FogLink:
    """One selected neighbor: wireless rate towards it plus its compute profile."""

    mu_tx: float
    prof: ComputeProfile

    def __post_init__(self):
        if not self.mu_tx > 0.0:
            raise ValueError("FogLink.mu_tx must be positive")


@dataclass(frozen=True)
class NodeSet:
    """The computation graph of one solve: initiator, optional cloud, neighbors."""

    local: ComputeProfile
    cloud: CloudLink | None
    neighbors: tuple[FogLink, ...]
    x_i: float

    def __post_init__(self):
        object.__setattr__(self, "neighbors", tuple(self.neighbors))
        if not self.x_i > 0.0:
            raise ValueError("NodeSet.x_i must be positive")


@dataclass(frozen=True)
class PathSpec:
    """Uniform two-stage description of one path.

    ``mu_tx`` is the transmission-queue rate (infinite for the local path,
    which has none) and ``mu`` the computation-queue rate (infinite for the
    cloud, whose compute queue is ignored).  ``c`` is the linear compute
    time coefficient.
    """

    kind: str
    mu_tx: float
    mu: float
    c: float

    def delay(self, lam: float) -> float:
        """End-to-end latency at task rate ``lam``; mirrors the queueing ops."""
        if lam >= self.mu_tx:
            raise QueueUnstableError("transmission", lam, self.mu_tx)
        if lam >= self.mu:
            raise QueueUnstableError("computation", lam, self.mu)
        mt, m, c = self.mu_tx, self.mu, self.c
        return (
            lam / (2.0 * mt * (mt - lam))
            + 1.0 / mt
            + lam / (2.0 * m * (m - lam))
            + 1.0 / m
            + c * lam
        )

    @property
    def baseline(self) -> float:
        """Zero-load latency 1/mu_tx + 1/mu."""
        return 1.0 / self.mu_tx + 1.0 / self.mu

    @property
    def rate_cap(self) -> float:
        """Largest stable task rate, with the stability margin applied."""
        return (1.0 - STABILITY_MARGIN) * min(self.mu_tx, self.mu)


def paths_of(nodes: NodeSet) -> tuple[PathSpec, ...]:
    """Path list of a node set, ordered local, cloud (if any), neighbors."""
    specs = [PathSpec("local", _INF, nodes.local.mu, nodes.local.c)]
    if nodes.cloud is not None:
        specs.append(PathSpec("cloud", nodes.cloud.mu_tx, _INF, nodes.cloud.c))
    for link in nodes.neighbors:
        specs.append(PathSpec("fog", link.mu_tx, link.prof.mu, link.prof.c))
    return tuple(specs)


def load_for_delay(
    path: PathSpec,
    target_delay: float,
    x_i: float,
    tol: float = 1e-12,
) -> float:
    """Load fraction alpha at which ``path`` reaches ``target_delay``.

    Returns the unique alpha in [0, cap] with delay(alpha * x_i) equal to
    the target, 0 if the zero-load latency already meets it, or the cap
    (stability-margin bound, at most 1) if even the cap stays below it.
    Found by bisection to absolute tolerance ``tol`` on alpha, which is
    sound because the delay is strictly increasing in the load.
    """
    if not target_delay > 0.0:
        raise ValueError("target_delay must be positive")
    mt, m, c = path.mu_tx, path.mu, path.c
    if 1.0 / mt + 1.0 / m >= target_delay:
        return 0.0
    cap = min(1.0, path.rate_cap / x_i)
    lo, hi = 0.0, cap
    # inlined delay(alpha * x_i); this loop dominates solve time
    lam = cap * x_i
    if (
        lam / (2.0 * mt * (mt - lam))
        + 1.0 / mt
        + lam / (2.0 * m * (m - lam))
        + 1.0 / m
        + c * lam
    ) <= target_delay:
        return cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lam = mid * x_i
        d = (
            lam / (2.0 * mt * (mt - lam))
            + 1.0 / mt
            + lam / (2.0 * m * (m - lam))
            + 1.0 / m
            + c * lam
        )
        if d < target_delay:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def total_load_fraction(nodes: NodeSet, target_delay: float) -> float:
    """g(D): total load fraction absorbed when every path runs at latency D.

    Continuous and non-decreasing in D, which is what makes the outer
    bisection of :func:`solve_distribution` sound.
    """
    return sum(load_for_delay(p, target_delay, nodes.x_i) for p in paths_of(nodes))


@dataclass(frozen=True)
class TaskDistribution:
    """Task split over the paths; lives on the probability simplex."""

    alpha_local: float
    alpha_cloud: float
    alpha_fog: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha_fog", tuple(self.alpha_fog))

    def as_vector(self) -> tuple[float, ...]:
        return (self.alpha_local, self.alpha_cloud) + self.alpha_fog

    @property
    def total(self) -> float:
        return math.fsum(self.as_vector())


@dataclass(frozen=True)
class SolveReport:
    """Result of one min-max solve.

    ``per_path_delays`` is ordered like :func:`paths_of`; inactive paths
    (alpha = 0) report their zero-load latency, which by construction is at
    least the common delay.  ``max_delay`` is taken over active paths only,
    and ``total_cost`` adds the queue-management overhead eta * (J + 1).
    """

    distribution: TaskDistribution
    common_delay: float
    per_path_delays: tuple[float, ...]
    max_delay: float
    total_cost: float
    active_mask: tuple[bool, ...]


def _distribution_from(nodes: NodeSet, alphas: list[float]) -> TaskDistribution:
    has_cloud = nodes.cloud is not None
    alpha_local = alphas[0]
    alpha_cloud = alphas[1] if has_cloud else 0.0
    alpha_fog = tuple(alphas[2:] if has_cloud else alphas[1:])
    return TaskDistribution(alpha_local, alpha_cloud, alpha_fog)


def solve_distribution(nodes: NodeSet, eta: float, tol: float = 1e-9) -> SolveReport:
    """Solve the min-max distribution problem for a fixed node set.

    Outer bisection on the common delay D: find D with g(D) = 1, where g
    sums the per-path load fractions at latency D.  All paths with positive
    load then share latency D (within tolerance) and every idle path has a
    zero-load latency of at least D.

    ``tol`` bounds both |g(D) - 1| at the returned D and the final bracket
    width on D; the returned alphas are the loads evaluated at that D, so
    their sum is within ``tol`` of 1 by construction.

    Raises InfeasibleError with the capacity shortfall when the paths
    cannot absorb x_i even at their stability caps.
    """
    specs = paths_of(nodes)
    x = nodes.x_i
    if sum(min(1.0, p.rate_cap / x) for p in specs) < 1.0:
        raise InfeasibleError(x, tuple(p.rate_cap for p in specs))

    def loads_at(d: float) -> list[float]:
        return [load_for_delay(p, d, x) for p in specs]

    lo = min(p.baseline for p in specs)  # g(lo) = 0
    hi = max(2.0 * lo, 1.0)
    while math.fsum(loads_at(hi)) < 1.0:
        hi *= 2.0
        if hi > 1e12:
            raise InfeasibleError(x, tuple(p.rate_cap for p in specs))

    alphas: list[float] = []
    d_star = hi
    for _ in range(220):
        mid = 0.5 * (lo + hi)
        cand = loads_at(mid)
        g = math.fsum(cand)
        if abs(g - 1.0) <= tol:
            alphas, d_star = cand, mid
            if hi - lo <= tol:
                break
        if g < 1.0:
            lo = mid
        else:
            hi = mid
    if not alphas:
        # bracket collapsed without meeting the g tolerance; should not
        # happen for feasible inputs, but fail loudly rather than return
        # an off-simplex distribution
        raise ArithmeticError("common-delay bisection did not converge")

    delays = tuple(
        p.delay(a * x) if a > 0.0 else p.baseline for p, a in zip(specs, alphas)
    )
    active = tuple(a > 0.0 for a in alphas)
    max_delay = max(d for d, m in zip(delays, active) if m)
    return SolveReport(
        distribution=_distribution_from(nodes, alphas),
        common_delay=d_star,
        per_path_delays=delays,
        max_delay=max_delay,
        total_cost=max_delay + eta * (len(nodes.neighbors) + 1),
        active_mask=active,
    )


def _simplex_grid(n_parts: int, total: int) -> np.ndarray:
    """All non-negative integer vectors of length n_parts summing to total."""
    if n_parts == 1:
        return np.array([[total]], dtype=np.int32)
    blocks = []
    for first in range(total + 1):
        rest = _simplex_grid(n_parts - 1, total - first)
        head = np.full((rest.shape[0], 1), first, dtype=np.int32)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def grid_oracle(nodes: NodeSet, resolution: int) -> TaskDistribution:
    """Exhaustive simplex-grid minimizer of the max active-path latency.

    Enumerates every split with step 1/resolution, evaluates the maximum
    latency over the paths that carry load, and returns the best point.
    Independent of the bisection solver; intended for verification only,
    hence the hard limits on path count and resolution.
    """
    specs = paths_of(nodes)
    if len(specs) > 4:
        raise ValueError(f"grid oracle refuses more than 4 paths, got {len(specs)}")
    if not 1 <= resolution <= 400:
        raise ValueError(f"grid oracle resolution must be in [1, 400], got {resolution}")

    alphas = _simplex_grid(len(specs), resolution).astype(np.float64) / resolution
    lam = alphas * nodes.x_i
    delays = np.empty_like(lam)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k, p in enumerate(specs):
            lk = lam[:, k]
            mt, m, c = p.mu_tx, p.mu, p.c
            tx = lk / (2.0 * mt * (mt - lk)) + 1.0 / mt if mt < _INF else 0.0
            comp = lk / (2.0 * m * (m - lk)) + 1.0 / m if m < _INF else 0.0
            col = tx + comp + c * lk
            delays[:, k] = np.where(lk < p.rate_cap, col, np.inf)
    worst = np.where(alphas > 0.0, delays, -np.inf).max(axis=1)
    if not np.isfinite(worst.min()):
        raise InfeasibleError(nodes.x_i, tuple(p.rate_cap for p in specs))
    best = alphas[int(np.argmin(worst))]
    return _distribution_from(nodes, [float(a) for a in best])


def total_cost(report: SolveReport, eta: float, j: int) -> float:
    """Objective value: max latency plus the queue-management time eta * (J + 1)."""
    if j < 0:
        raise ValueError("J must be non-negative")
    return report.max_delay + eta * (j + 1)
