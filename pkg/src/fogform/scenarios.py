"""Scenario generation and the Monte Carlo experiment runners.

A scenario places candidate neighbors uniformly in a square around the
task-initiating node; the wireless rate towards each follows from its
distance unless a fixed rate override is configured.  Arrival order is a
uniform random permutation.

The online experiments draw candidates batch by batch until the selection
quota J is filled (capped at ``max_arrivals``): the selection rule keeps
waiting for arrivals until its network is formed, and the offline
comparator then optimizes over exactly the arrivals that were witnessed.

Every iteration owns the deterministic random sub-stream
``(seed, experiment tag, iteration)``, so results are byte-identical no
matter how many workers run them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .queueing import ComputeProfile, Position, RadioParams, service_rate
from .selection import (
    FogCandidate,
    SelectionOutcome,
    competitive_ratio,
    offline_top_j,
    online_secretary,
)
from .solver import (
    CloudLink,
    FogLink,
    InfeasibleError,
    NodeSet,
    solve_distribution,
    total_cost,
)

__all__ = [
    "DEFAULT_RADIO",
    "ScenarioConfig",
    "ExperimentTable",
    "generate_scenario",
    "candidate_stream",
    "offline_candidates",
    "node_set_for",
    "run_offline_sweep",
    "run_online_vs_offline",
    "run_ratio_cdf",
    "run_distance_sweep",
    "choose_j",
    "choose_j_table",
]

DEFAULT_RADIO = RadioParams(
    bandwidth_hz=15e3,
    noise_psd_dbm_per_hz=-174.0,
    tx_power_dbm=20.0,
    pathloss_const=1e-3,
    pathloss_exp=4.0,
    packet_size_bits=1500 * 8,
)

# sub-stream tags keep each experiment's randomness in its own deterministic lane
_TAG_RATIO = 1
_TAG_ONLINE = 2
_TAG_DISTANCE = 3
_TAG_OFFLINE = 4


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameter set of one simulation scenario.

    ``x_i`` and ``eta`` default to the calibrated values: x_i = 10 puts the
    cloud share at ~60% with no neighbors, and eta = 0.011 puts the offline
    total-cost minimum at J = 4 when the neighbor link rate is fixed at 20.
    """

    area_m: float = 50.0
    n_candidates: int = 15
    initiator_pos: Position | None = None  # None -> center of the square
    bs_distance_m: float = 600.0
    radio: RadioParams = field(default_factory=lambda: DEFAULT_RADIO)
    local_prof: ComputeProfile = field(default_factory=lambda: ComputeProfile(8.0, 0.05))
    neighbor_prof: ComputeProfile = field(default_factory=lambda: ComputeProfile(8.0, 0.05))
    mu_tx_override: float | None = None  # fixed neighbor link rate mode
    cloud: CloudLink = field(default_factory=lambda: CloudLink(8.8, 0.025))
    x_i: float = 10.0
    eta: float = 0.011
    tau: int = 3
    J: int = 4
    seed: int = 20240809
    iterations: int = 200
    max_arrivals: int = 1_000_000

    def __post_init__(self):
        if not self.area_m > 0.0:
            raise ValueError("area_m must be positive")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be at least 1")
        if not self.bs_distance_m > 0.0:
            raise ValueError("bs_distance_m must be positive")
        if self.mu_tx_override is not None and not self.mu_tx_override > 0.0:
            raise ValueError("mu_tx_override must be positive when set")
        if not self.x_i > 0.0:
            raise ValueError("x_i must be positive")
        if self.eta < 0.0:
            raise ValueError("eta must be non-negative")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        # J = 0 is a legal one-shot solve (local + cloud only); the online
        # selection itself requires J >= 1 and enforces that where it runs
        if self.J < 0:
            raise ValueError("J must be non-negative")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.max_arrivals < self.n_candidates:
            raise ValueError("max_arrivals must be at least n_candidates")

    @property
    def initiator(self) -> Position:
        if self.initiator_pos is not None:
            return self.initiator_pos
        return Position(self.area_m / 2.0, self.area_m / 2.0)


def _rng(cfg: ScenarioConfig, tag: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, tag, iteration])


def generate_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> list[FogCandidate]:
    """Draw one batch of candidates in uniform random arrival order.

    Positions are i.i.d. uniform over the square; a draw landing exactly on
    the initiator (zero distance) is redrawn.  The wireless rate towards
    each candidate comes from its distance, or from ``mu_tx_override`` in
    fixed-rate mode.  Deterministic given the generator state.
    """
    init = cfg.initiator
    positions = rng.uniform(0.0, cfg.area_m, size=(cfg.n_candidates, 2))
    for k in range(cfg.n_candidates):
        while positions[k, 0] == init.x and positions[k, 1] == init.y:
            positions[k] = rng.uniform(0.0, cfg.area_m, size=2)
    order = rng.permutation(cfg.n_candidates)
    batch = []
    for slot, k in enumerate(order):
        pos = Position(float(positions[k, 0]), float(positions[k, 1]))
        if cfg.mu_tx_override is not None:
            mu_tx = cfg.mu_tx_override
        else:
            mu_tx = service_rate(pos.distance_to(init), cfg.radio)
        batch.append(
            FogCandidate(
                id=int(k),
                position=pos,
                mu_tx=mu_tx,
                prof=cfg.neighbor_prof,
                arrival_index=slot + 1,
            )
        )
    return batch


def candidate_stream(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    limit: int | None = None,
) -> Iterator[FogCandidate]:
    """Open-ended arrival stream: scenario batches drawn back to back.

    Candidates are re-indexed with stream-global ids and arrival indices.
    Stops after ``limit`` arrivals (default ``cfg.max_arrivals``) so a run
    whose acceptance threshold is never beaten still terminates.
    """
    cap = cfg.max_arrivals if limit is None else limit
    n = 0
    while n < cap:
        for cand in generate_scenario(cfg, rng):
            n += 1
            yield replace(cand, id=n - 1, arrival_index=n)
            if n >= cap:
                return


def _witnessing(stream: Iterable[FogCandidate], seen: list[FogCandidate]) -> Iterator[FogCandidate]:
    for cand in stream:
        seen.append(cand)
        yield cand


def offline_candidates(cfg: ScenarioConfig, iteration: int = 0) -> list[FogCandidate]:
    """Candidate batch from the offline sub-stream (one-shot solves, sweeps)."""
    return generate_scenario(cfg, _rng(cfg, _TAG_OFFLINE, iteration))


def node_set_for(
    cfg: ScenarioConfig,
    chosen: Sequence[FogCandidate],
    cloud: CloudLink | None = None,
) -> NodeSet:
    """Computation graph for the chosen neighbors (cloud defaults to the config's)."""
    neighbors = tuple(FogLink(c.mu_tx, c.prof) for c in chosen)
    return NodeSet(
        local=cfg.local_prof,
        cloud=cfg.cloud if cloud is None else cloud,
        neighbors=neighbors,
        x_i=cfg.x_i,
    )


@dataclass
class ExperimentTable:
    """Labeled numeric rows of one experiment, ready for CSV output."""

    columns: tuple[str, ...]
    rows: list[tuple]


def _map_iterations(fn, payloads: list, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    chunk = max(1, len(payloads) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads, chunksize=chunk))


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


# --- offline sweep (fixed neighbor link rate) --------------------------------

def run_offline_sweep(
    cfg: ScenarioConfig,
    j_range: Iterable[int],
    mu_ij_values: Iterable[float],
) -> ExperimentTable:
    """Offline cost/latency/shares for each J and each fixed neighbor link rate.

    Deterministic: with a fixed link rate all candidates score equally, so
    the offline top-J set needs no averaging.
    """
    j_values = sorted(set(int(j) for j in j_range))
    if j_values and j_values[0] < 0:
        raise ValueError("J values must be non-negative")
    if j_values and j_values[-1] > cfg.n_candidates:
        raise ValueError("J range exceeds n_candidates")
    rows = []
    for mu_ij in mu_ij_values:
        fixed = replace(cfg, mu_tx_override=float(mu_ij))
        candidates = generate_scenario(fixed, _rng(cfg, _TAG_OFFLINE, 0))
        for j in j_values:
            sel = offline_top_j(candidates, j)
            try:
                rep = solve_distribution(node_set_for(fixed, sel.chosen), fixed.eta)
            except InfeasibleError:
                rows.append((float(mu_ij), j) + (math.nan,) * 5 + (0,))
                continue
            d = rep.distribution
            rows.append(
                (
                    float(mu_ij),
                    j,
                    rep.total_cost,
                    rep.max_delay,
                    d.alpha_local,
                    d.alpha_cloud,
                    math.fsum(d.alpha_fog),
                    1,
                )
            )
    return ExperimentTable(
        columns=(
            "mu_ij",
            "J",
            "total_cost",
            "max_latency",
            "share_local",
            "share_cloud",
            "share_fog",
            "feasible",
        ),
        rows=rows,
    )


# --- online vs offline cost (Algorithm comparison) ---------------------------

def _online_vs_offline_iteration(args) -> list[tuple]:
    cfg, j_values, iteration = args
    out = []
    for j in j_values:
        witnessed: list[FogCandidate] = []
        stream = _witnessing(candidate_stream(cfg, _rng(cfg, _TAG_ONLINE, iteration)), witnessed)
        outcome = online_secretary(stream, cfg.tau, j)
        online_rep = solve_distribution(node_set_for(cfg, outcome.chosen), cfg.eta)
        offline_rep = solve_distribution(
            node_set_for(cfg, offline_top_j(witnessed, j).chosen), cfg.eta
        )
        # both sides manage the configured J queues, so the overhead term
        # cancels in the comparison even when the online run was truncated
        out.append(
            (
                j,
                total_cost(online_rep, cfg.eta, j),
                total_cost(offline_rep, cfg.eta, j),
                online_rep.max_delay,
                offline_rep.max_delay,
                1 if outcome.truncated else 0,
            )
        )
    return out


def run_online_vs_offline(
    cfg: ScenarioConfig,
    j_range: Iterable[int],
    workers: int = 1,
    per_iteration: bool = False,
) -> ExperimentTable:
    """Mean online vs offline total cost and latency per J.

    With ``per_iteration`` the raw per-iteration comparison rows are emitted
    instead of the means.
    """
    j_values = sorted(set(int(j) for j in j_range))
    if not j_values or j_values[0] < 1:
        raise ValueError("J values must be at least 1")
    if cfg.max_arrivals < cfg.tau + j_values[-1]:
        raise ValueError("max_arrivals too small to ever fill the largest J")
    payloads = [(cfg, j_values, it) for it in range(cfg.iterations)]
    per_iter = _map_iterations(_online_vs_offline_iteration, payloads, workers)

    if per_iteration:
        rows = [
            (j, it) + tuple(rest)
            for it, results in enumerate(per_iter)
            for (j, *rest) in results
        ]
        return ExperimentTable(
            columns=(
                "J",
                "iteration",
                "online_cost",
                "offline_cost",
                "online_latency",
                "offline_latency",
                "truncated",
            ),
            rows=rows,
        )

    rows = []
    for idx, j in enumerate(j_values):
        per_j = [results[idx] for results in per_iter]
        mean_on = _mean([r[1] for r in per_j])
        mean_off = _mean([r[2] for r in per_j])
        rows.append(
            (
                j,
                mean_on,
                mean_off,
                _mean([r[3] for r in per_j]),
                _mean([r[4] for r in per_j]),
                (mean_on - mean_off) / mean_off,
                sum(r[5] for r in per_j),
            )
        )
    return ExperimentTable(
        columns=(
            "J",
            "online_cost",
            "offline_cost",
            "online_latency",
            "offline_latency",
            "cost_gap",
            "n_truncated",
        ),
        rows=rows,
    )


# --- competitive ratio CDF ----------------------------------------------------

def _ratio_iteration(args) -> float:
    cfg, iteration = args
    witnessed: list[FogCandidate] = []
    stream = _witnessing(candidate_stream(cfg, _rng(cfg, _TAG_RATIO, iteration)), witnessed)
    outcome = online_secretary(stream, cfg.tau, cfg.J)
    return competitive_ratio(outcome, offline_top_j(witnessed, cfg.J))


def run_ratio_cdf(cfg: ScenarioConfig, workers: int = 1) -> ExperimentTable:
    """Empirical CDF of the selection competitive ratio over the iterations."""
    if cfg.max_arrivals < cfg.tau + cfg.J:
        raise ValueError("max_arrivals too small to ever fill J")
    payloads = [(cfg, it) for it in range(cfg.iterations)]
    ratios = sorted(_map_iterations(_ratio_iteration, payloads, workers))
    n = len(ratios)
    rows = [(r, (i + 1) / n) for i, r in enumerate(ratios)]
    return ExperimentTable(columns=("ratio", "cdf"), rows=rows)


# --- cloud share vs base-station distance ------------------------------------

def _distance_iteration(args) -> list[tuple]:
    cfg, distances, iteration = args
    outcome = online_secretary(
        candidate_stream(cfg, _rng(cfg, _TAG_DISTANCE, iteration)), cfg.tau, cfg.J
    )
    out = []
    for d in distances:
        cloud = CloudLink(service_rate(d, cfg.radio), cfg.cloud.c)
        try:
            rep = solve_distribution(node_set_for(cfg, outcome.chosen, cloud=cloud), cfg.eta)
        except InfeasibleError:
            out.append((math.nan, math.nan, math.nan, 0))
            continue
        dist = rep.distribution
        out.append((dist.alpha_cloud, dist.alpha_local, math.fsum(dist.alpha_fog), 1))
    return out


def run_distance_sweep(
    cfg: ScenarioConfig,
    distances: Sequence[float],
    workers: int = 1,
) -> ExperimentTable:
    """Mean task shares under online selection for each base-station distance.

    The cloud link rate is derived from the swept distance, so the cloud
    path slows as the base station moves away while the selected neighbor
    set (which does not depend on the cloud) stays fixed per iteration.
    """
    distances = [float(d) for d in distances]
    if any(d <= 0.0 for d in distances):
        raise ValueError("distances must be positive")
    payloads = [(cfg, distances, it) for it in range(cfg.iterations)]
    per_iter = _map_iterations(_distance_iteration, payloads, workers)
    rows = []
    for idx, d in enumerate(distances):
        samples = [results[idx] for results in per_iter]
        feasible = [s for s in samples if s[3] == 1]
        n_infeasible = len(samples) - len(feasible)
        if feasible:
            row = (
                d,
                service_rate(d, cfg.radio),
                _mean([s[0] for s in feasible]),
                _mean([s[1] for s in feasible]),
                _mean([s[2] for s in feasible]),
                n_infeasible,
            )
        else:
            row = (d, service_rate(d, cfg.radio), math.nan, math.nan, math.nan, n_infeasible)
        rows.append(row)
    return ExperimentTable(
        columns=("distance_m", "mu_c", "share_cloud", "share_local", "share_fog", "n_infeasible"),
        rows=rows,
    )


# --- choosing J ----------------------------------------------------------------

def choose_j_table(cfg: ScenarioConfig, j_bounds: tuple[int, int]) -> tuple[int, ExperimentTable]:
    """Sweep J over the bounds and pick the mean-total-cost minimizer.

    Ties go to the larger J (more neighbors lower the latency at equal
    cost).  In fixed link-rate mode the cost is scenario-independent, so a
    single evaluation per J suffices.
    """
    j_lo, j_hi = int(j_bounds[0]), int(j_bounds[1])
    if not 0 <= j_lo <= j_hi:
        raise ValueError("invalid J bounds")
    if j_hi > cfg.n_candidates:
        raise ValueError("J bounds exceed n_candidates")
    iters = 1 if cfg.mu_tx_override is not None else cfg.iterations
    candidate_sets = [generate_scenario(cfg, _rng(cfg, _TAG_OFFLINE, it)) for it in range(iters)]

    costs: dict[int, float] = {}
    rows = []
    for j in range(j_lo, j_hi + 1):
        per_set = []
        try:
            for cands in candidate_sets:
                sel = offline_top_j(cands, j)
                per_set.append(solve_distribution(node_set_for(cfg, sel.chosen), cfg.eta).total_cost)
        except InfeasibleError:
            rows.append((j, math.nan, 0))
            continue
        costs[j] = _mean(per_set)
        rows.append((j, costs[j], 0))

    if not costs:
        raise InfeasibleError(cfg.x_i, ())
    best_j = j_lo
    best_cost = math.inf
    for j in sorted(costs):
        if costs[j] <= best_cost:  # <= so exact ties prefer the larger J
            best_j, best_cost = j, costs[j]
    rows = [(j, c, 1 if j == best_j else 0) for (j, c, _) in rows]
    return best_j, ExperimentTable(columns=("J", "total_cost", "chosen"), rows=rows)


def choose_j(cfg: ScenarioConfig, j_bounds: tuple[int, int]) -> int:
    """The J in ``j_bounds`` minimizing the mean offline total cost."""
    best_j, _ = choose_j_table(cfg, j_bounds)
    return best_j
