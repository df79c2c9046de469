"""Pointing-task analytics: index of difficulty/performance, per-session
summaries with collision bookkeeping, and NASA-TLX workload scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    BadWeights,
    EmptySession,
    NonPositiveMT,
    NonPositiveWidth,
)

TLX_FACTORS = ("MD", "PD", "TD", "PE", "EF", "FR")

# Canonical order of the 15 pairwise comparisons, shared with clients.
TLX_PAIRS = tuple(
    (TLX_FACTORS[i], TLX_FACTORS[j])
    for i in range(len(TLX_FACTORS))
    for j in range(i + 1, len(TLX_FACTORS))
)


def weights_from_pairs(choices: Sequence[str]) -> tuple[int, int, int, int, int, int]:
    """Derive factor weights from the 15 pairwise answers (wins per factor).

    ``choices[i]`` must be one member of TLX_PAIRS[i]; the result always sums
    to 15.
    """
    if len(choices) != len(TLX_PAIRS):
        raise BadWeights(f"need {len(TLX_PAIRS)} pairwise answers, got {len(choices)}")
    wins = {f: 0 for f in TLX_FACTORS}
    for choice, pair in zip(choices, TLX_PAIRS):
        if choice not in pair:
            raise BadWeights(f"answer {choice!r} is not a member of the pair {pair}")
        wins[choice] += 1
    return tuple(wins[f] for f in TLX_FACTORS)  # type: ignore[return-value]


def index_of_difficulty(distance: float, width: float) -> float:
    """Shannon formulation: log2(D/W + 1), in bits.

    Computed as log2((D + W) / W), which is algebraically identical and keeps
    integer-ratio cases exact (log2 of 0.15/0.05 + 1 should be 2 bits, not
    2 - 1ulp).
    """
    if width <= 0:
        raise NonPositiveWidth(f"target width must be positive, got {width}")
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance}")
    return math.log2((distance + width) / width)


def index_of_performance(id_bits: float, movement_time: float) -> float:
    """ID / MT, in bits per second."""
    if movement_time <= 0:
        raise NonPositiveMT(f"movement time must be positive, got {movement_time}")
    return id_bits / movement_time


@dataclass
class TrialRecord:
    """One persisted trial row: flattened spec, outcome, and a pointer to the
    stored trajectory samples."""

    session_id: str
    trial_id: int
    mode: str
    start: tuple[float, float]
    target_center: tuple[float, float]
    target_distance: float
    target_width: float
    size_class: str
    obstacle: Optional[tuple[float, float, float, float]]  # ax, ay, bx, by
    id_bits: float
    success: bool
    collided: bool
    movement_time: Optional[float]
    path_ref: str

    def validate(self) -> "TrialRecord":
        expected = index_of_difficulty(self.target_distance, self.target_width)
        if abs(self.id_bits - expected) > 1e-12:
            raise ValueError(
                f"trial {self.trial_id}: id_bits {self.id_bits} inconsistent with "
                f"(distance, width), expected {expected}"
            )
        if self.success and self.collided:
            raise ValueError(f"trial {self.trial_id}: success and collided are exclusive")
        if self.success != (self.movement_time is not None):
            raise ValueError(f"trial {self.trial_id}: movement_time present iff success")
        return self


@dataclass(frozen=True)
class TlxResponse:
    """Six workload ratings in [0, 100] plus pairwise-comparison weights
    (six non-negative integers summing to 15)."""

    ratings: tuple[float, float, float, float, float, float]  # MD PD TD PE EF FR
    weights: tuple[int, int, int, int, int, int]

    def __post_init__(self):
        if len(self.ratings) != 6 or len(self.weights) != 6:
            raise BadWeights("need six ratings and six weights")
        for r in self.ratings:
            if not 0 <= r <= 100:
                raise ValueError(f"ratings must lie in [0, 100], got {r}")
        if any(w < 0 or w != int(w) for w in self.weights):
            raise BadWeights(f"weights must be non-negative integers, got {self.weights}")
        if sum(self.weights) != 15:
            raise BadWeights(f"weights must sum to 15, got {sum(self.weights)}")


def tlx_total(resp: TlxResponse) -> float:
    """Weighted workload score: sum(rating * weight) / 15, in [0, 100]."""
    return sum(r * w for r, w in zip(resp.ratings, resp.weights)) / 15.0


@dataclass
class SessionSummary:
    mode: str
    trial_count: int
    success_count: int
    collision_count: int
    collisions: str                      # "n/total", collision-table style
    mean_ip: Optional[float]             # bits/s over successful trials only
    per_condition_mt: dict[str, Optional[float]] = field(default_factory=dict)
    tlx_total: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "trial_count": self.trial_count,
            "success_count": self.success_count,
            "collision_count": self.collision_count,
            "collisions": self.collisions,
            "mean_ip": self.mean_ip,
            "per_condition_mt": self.per_condition_mt,
            "tlx_total": self.tlx_total,
        }


def condition_key(target_distance: float, size_class: str) -> str:
    return f"d{target_distance:g}_{size_class}"


def summarize_session(
    records: Sequence[TrialRecord], tlx: Optional[TlxResponse] = None
) -> SessionSummary:
    """Aggregate one session's records.

    Mean IP is computed over successful trials only (failed trials carry no
    movement time); with zero successes the summary is still emitted, with
    mean_ip absent.
    """
    if not records:
        raise EmptySession("no trial records")
    session_ids = {r.session_id for r in records}
    if len(session_ids) > 1:
        raise ValueError(f"records span multiple sessions: {sorted(session_ids)}")
    mode = records[0].mode

    total = len(records)
    collisions = sum(1 for r in records if r.collided)
    successes = [r for r in records if r.success]

    ips = [index_of_performance(r.id_bits, r.movement_time) for r in successes]
    mean_ip = sum(ips) / len(ips) if ips else None

    per_condition: dict[str, list[float]] = {}
    for r in records:
        per_condition.setdefault(condition_key(r.target_distance, r.size_class), [])
    for r in successes:
        per_condition[condition_key(r.target_distance, r.size_class)].append(r.movement_time)
    per_condition_mt = {
        key: (sum(v) / len(v) if v else None) for key, v in sorted(per_condition.items())
    }

    return SessionSummary(
        mode=mode,
        trial_count=total,
        success_count=len(successes),
        collision_count=collisions,
        collisions=f"{collisions}/{total}",
        mean_ip=mean_ip,
        per_condition_mt=per_condition_mt,
        tlx_total=tlx_total(tlx) if tlx is not None else None,
    )
