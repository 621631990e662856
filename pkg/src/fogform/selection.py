"""Neighbor selection: offline top-J by score and the online secretary rule.

A candidate's score is the sum of the wireless rate towards it and its
compute rate; the offline optimum simply keeps the J best scores.  The
online rule observes the first tau arrivals to build a threshold multiset,
then accepts any later arrival that beats the current largest threshold,
discarding that threshold on each acceptance.  Decisions are irrevocable:
a rejected candidate never returns and an accepted one is never dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .queueing import ComputeProfile, Position

__all__ = [
    "FogCandidate",
    "ThresholdSet",
    "SelectionOutcome",
    "score",
    "offline_top_j",
    "online_secretary",
    "competitive_ratio",
]


@dataclass(frozen=True)
class FogCandidate:
    """A neighboring fog node as it arrives in the stream.

    ``mu_tx`` is the service rate of the wireless hop from the initiator,
    ``prof`` the candidate's compute profile, and ``arrival_index`` its
    1-based position in the arrival order.
    """

    id: int
    position: Position
    mu_tx: float
    prof: ComputeProfile
    arrival_index: int


def score(candidate: FogCandidate) -> float:
    """Selection score: wireless rate plus compute rate."""
    return candidate.mu_tx + candidate.prof.mu


class ThresholdSet:
    """Multiset of observed scores used as acceptance thresholds.

    The acceptance threshold is the current maximum; each acceptance
    removes one copy of it, so thresholds only get easier over time.
    """

    def __init__(self, values: Iterable[float] = ()):
        self._values = list(values)

    def add(self, value: float) -> None:
        self._values.append(value)

    @property
    def current_max(self) -> float:
        """Largest observed score, or -inf when the set is exhausted."""
        return max(self._values) if self._values else -math.inf

    def remove_max(self) -> None:
        if self._values:
            self._values.remove(max(self._values))

    def values(self) -> tuple[float, ...]:
        return tuple(self._values)

    def __len__(self) -> int:
        return len(self._values)


@dataclass(frozen=True)
class SelectionOutcome:
    """Chosen neighbor set plus bookkeeping from the run.

    ``scores_sum`` is the canonical score total (summed in arrival order);
    unfilled slots contribute nothing.  ``truncated`` flags runs where the
    stream ended before J candidates were accepted.  ``competitive_ratio``
    stays None until an experiment fills it in against an offline optimum.
    """

    chosen: tuple[FogCandidate, ...]
    scores_sum: float
    solve_trace: tuple[Any, ...] = ()
    final_report: Optional[Any] = None
    competitive_ratio: Optional[float] = None
    truncated: bool = False


def _sum_scores(chosen: Iterable[FogCandidate]) -> float:
    # fsum over arrival order keeps the total identical for equal sets no
    # matter how they were collected, so ratio == 1.0 exactly on a match
    ordered = sorted(chosen, key=lambda c: c.arrival_index)
    return math.fsum(score(c) for c in ordered)


def offline_top_j(candidates: list[FogCandidate], j: int) -> SelectionOutcome:
    """Offline optimum: the J candidates with the largest scores.

    Ties break towards the earlier arrival.  Requires j <= len(candidates).
    """
    if j < 0:
        raise ValueError("J must be non-negative")
    if j > len(candidates):
        raise ValueError(f"J={j} exceeds the {len(candidates)} available candidates")
    ranked = sorted(candidates, key=lambda c: (-score(c), c.arrival_index))[:j]
    chosen = tuple(sorted(ranked, key=lambda c: c.arrival_index))
    return SelectionOutcome(chosen=chosen, scores_sum=_sum_scores(chosen))


def online_secretary(
    stream: Iterable[FogCandidate],
    tau: int,
    j: int,
    solver_hook: Optional[Callable[[tuple[FogCandidate, ...]], Any]] = None,
) -> SelectionOutcome:
    """Run the exploration/exploitation selection over an arrival stream.

    Exploration: the first ``tau`` arrivals are observed and never selected;
    their scores seed the threshold set.  Exploitation: each later arrival
    is accepted iff its score strictly beats the current maximum threshold,
    which is then removed (an empty threshold set means accept everything,
    the only continuation that can still fill the quota).  Stops after J
    acceptances or when the stream ends; the latter yields a truncated
    outcome, which may even be empty if the stream is shorter than tau.

    ``solver_hook``, when given, is invoked with the chosen-so-far tuple
    after each acceptance (re-solving the task distribution); its return
    values are collected in ``solve_trace``.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if j < 1:
        raise ValueError("J must be at least 1")
    thresholds = ThresholdSet()
    chosen: list[FogCandidate] = []
    trace: list[Any] = []
    arrivals = iter(stream)

    for _ in range(tau):
        candidate = next(arrivals, None)
        if candidate is None:
            return SelectionOutcome(chosen=(), scores_sum=0.0, truncated=True)
        thresholds.add(score(candidate))

    for candidate in arrivals:
        if score(candidate) > thresholds.current_max:
            chosen.append(candidate)
            thresholds.remove_max()
            if solver_hook is not None:
                trace.append(solver_hook(tuple(chosen)))
            if len(chosen) == j:
                break

    return SelectionOutcome(
        chosen=tuple(chosen),
        scores_sum=_sum_scores(chosen),
        solve_trace=tuple(trace),
        final_report=trace[-1] if trace else None,
        truncated=len(chosen) < j,
    )


def competitive_ratio(online: SelectionOutcome, offline: SelectionOutcome) -> float:
    """Online score total divided by the offline optimum over the same candidates.

    Unfilled online slots contribute 0, so the ratio of an under-filled run
    is simply its partial score total over the full offline one.
    """
    if offline.scores_sum <= 0.0:
        raise ValueError("offline score sum must be positive")
    return online.scores_sum / offline.scores_sum
