"""Per-node event decisions from trust estimates and readings.

A node reports a one-bit event indicator each step: 1 means "I am inside
the event region".  A trusted node answers from its own reading; a
distrusted or silent node answers from a trust-weighted average of its
community's readings, so a faulty sensor cannot force a wrong report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyCommunityError
from .filtering import CommunityObservation, ModelParams

# Below this total member trust the weighted average is meaningless;
# fall back to the plain mean.
_TRUST_SUM_FLOOR = 1e-9


@dataclass(frozen=True)
class SensingRange:
    """A-priori interval of readings consistent with the non-event pattern.

    Membership is closed at both ends: a reading exactly at either bound
    counts as in range.
    """

    x_min: float
    x_max: float

    def __post_init__(self) -> None:
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")

    def contains(self, reading: float) -> bool:
        return self.x_min <= reading <= self.x_max


def trusted_reading_estimate(obs: CommunityObservation) -> float:
    """Trust-weighted average of the member readings.

    Stands in for the center node's own reading when that reading is
    missing or distrusted.  Members with high trust dominate; if every
    member is fully distrusted (trust sum below floor) the unweighted
    mean is returned instead.
    """
    if obs.member_count == 0:
        raise EmptyCommunityError("reading estimate needs at least one member reading")
    total_trust = float(obs.member_trusts.sum())
    if total_trust < _TRUST_SUM_FLOOR:
        return float(obs.member_readings.mean())
    return float(np.dot(obs.member_trusts, obs.member_readings)) / total_trust


def decide_event(
    trust: float,
    center_reading: float | None,
    obs: CommunityObservation,
    sensing_range: SensingRange,
    params: ModelParams,
) -> int:
    """Produce the binary event indicator for one node at one step.

    Trusted node (trust above threshold, own reading present): indicator
    is 1 exactly when the own reading leaves the normal sensing range.

    Distrusted node: the own reading is ignored entirely and the
    community estimate takes its place, so the indicator is 1 exactly
    when the trust-averaged member reading leaves the range.  A silent
    (sleeper) center is routed the same way regardless of its trust,
    because there is no own reading for the trusted rules to inspect.

    With no member readings available either, nothing supports a
    non-event call and the indicator defaults to 1.
    """
    if center_reading is not None and trust > params.trust_threshold:
        return 0 if sensing_range.contains(center_reading) else 1
    if obs.member_count == 0:
        return 1
    estimate = trusted_reading_estimate(obs)
    return 0 if sensing_range.contains(estimate) else 1
