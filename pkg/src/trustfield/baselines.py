"""Per-node CUSUM change detector used as the comparison baseline.

Standard two-sided cumulative-sum recursion against a known reference
level.  A node alarms (reports "event") while either cumulative sum
exceeds the threshold; there is no latch-and-reset, so the indicator can
drop back to 0 if the sums decay, which keeps the detector usable for
regions that recede.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

# Frozen result of calibrate_threshold() on 30 fault-free seeds of the
# default scenario: the smallest candidate with zero false alarms.
DEFAULT_CUSUM_THRESHOLD = 0.5

# Candidate grid the calibration walks, smallest first.
THRESHOLD_CANDIDATES = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.5, 10.0, 15.0, 20.0)


@dataclass(frozen=True)
class CusumState:
    """Two-sided CUSUM accumulator for one node.

    ``reference`` is the expected non-event reading level, ``drift`` the
    per-step allowance subtracted from each deviation (half the shift to
    detect is the usual choice), ``threshold`` the alarm level.
    """

    reference: float
    drift: float
    threshold: float
    s_plus: float = 0.0
    s_minus: float = 0.0
    alarmed: bool = False

    def __post_init__(self) -> None:
        if self.drift <= 0.0:
            raise ValueError(f"drift must be > 0, got {self.drift}")
        if self.threshold <= 0.0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        if self.s_plus < 0.0 or self.s_minus < 0.0:
            raise ValueError("cumulative sums must be nonnegative")


def cusum_update(state: CusumState, reading: float | None) -> tuple[CusumState, int]:
    """Advance the CUSUM one step and return (new state, event indicator).

    A missing reading (sleeper node) leaves both sums untouched and
    repeats the previous indicator.
    """
    if reading is None:
        return state, int(state.alarmed)
    s_plus = max(0.0, state.s_plus + (reading - state.reference - state.drift))
    s_minus = max(0.0, state.s_minus + (state.reference - reading - state.drift))
    alarmed = max(s_plus, s_minus) > state.threshold
    new_state = replace(state, s_plus=s_plus, s_minus=s_minus, alarmed=alarmed)
    return new_state, int(alarmed)
