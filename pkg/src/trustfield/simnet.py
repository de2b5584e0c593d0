"""Synthetic sensor network: topology, event dynamics, faults, readings.

The simulated network is a set of nodes on a plane, each with a
community of neighbors within communication radius.  A circular event
region grows around an epicenter according to a per-step radius
schedule; nodes inside it switch from the non-event reading pattern to
the event pattern.  A configurable fraction of nodes carries a permanent
sensor fault (offset, stuck-at, variance degradation, or sleeper) from
its onset step onward.

Time is a single absolute axis ``1 .. warmup_steps + horizon``.  The
first ``warmup_steps`` steps have no event and are not scored; they let
the trust filters reach steady state (and mask any already-faulty
sensors) before the event window opens.  Scored step k corresponds to
absolute step ``warmup_steps + k``.

:func:`step_network` advances the whole network one absolute step in two
synchronous phases: phase 1 updates every node's trust filter using the
previous step's member trusts, phase 2 produces every node's event
indicator using the fresh phase-1 trusts.  Per-node RNG streams are
derived from (seed root, node id, step), so results are independent of
node evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .detection import SensingRange, decide_event
from .errors import InvalidConfigError, TrustFieldError
from .filtering import CommunityObservation, ModelParams, ParticleSet, filter_step

# Salts separating the derived RNG stream families within one run.
_READING_STREAM = 1
_FILTER_STREAM = 2
_FAULT_STREAM = 3


class FaultKind(Enum):
    OFFSET = "offset"
    STUCK_AT = "stuck_at"
    VARIANCE_DEGRADATION = "variance_degradation"
    SLEEPER = "sleeper"


@dataclass(frozen=True)
class FaultSpec:
    """A permanent sensor fault active from ``onset_step`` (absolute) onward.

    ``value`` is interpreted per kind: the additive offset, the stuck
    reading, or the variance of the extra noise.  Unused for sleepers.
    """

    kind: FaultKind
    onset_step: int = 1
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.onset_step < 1:
            raise ValueError(f"onset_step must be >= 1, got {self.onset_step}")
        if self.kind is FaultKind.VARIANCE_DEGRADATION and self.value <= 0.0:
            raise ValueError("variance degradation needs a positive noise variance")

    @classmethod
    def offset(cls, magnitude: float, onset_step: int = 1) -> "FaultSpec":
        return cls(FaultKind.OFFSET, onset_step, magnitude)

    @classmethod
    def stuck_at(cls, stuck_value: float, onset_step: int = 1) -> "FaultSpec":
        return cls(FaultKind.STUCK_AT, onset_step, stuck_value)

    @classmethod
    def variance_degradation(cls, noise_variance: float, onset_step: int = 1) -> "FaultSpec":
        return cls(FaultKind.VARIANCE_DEGRADATION, onset_step, noise_variance)

    @classmethod
    def sleeper(cls, onset_step: int = 1) -> "FaultSpec":
        return cls(FaultKind.SLEEPER, onset_step)

    def active(self, step: int) -> bool:
        return step >= self.onset_step


@dataclass
class EventDynamics:
    """Disk-shaped event region: epicenter plus one radius per scored step."""

    epicenter: tuple[float, float]
    radius_schedule: tuple[float, ...]

    def __post_init__(self) -> None:
        self.epicenter = (float(self.epicenter[0]), float(self.epicenter[1]))
        self.radius_schedule = tuple(float(r) for r in self.radius_schedule)
        if any(r < 0.0 for r in self.radius_schedule):
            raise InvalidConfigError("event radii must be nonnegative")


@dataclass
class ReadingPatterns:
    """Mean reading levels of the two regions plus measurement noise."""

    non_event_mean: float = 20.0
    event_mean: float = 40.0
    noise_std: float = 1.0

    def __post_init__(self) -> None:
        if self.noise_std <= 0.0:
            raise InvalidConfigError(f"noise_std must be > 0, got {self.noise_std}")


@dataclass
class Node:
    """One sensor node with its community and detector state."""

    id: int
    position: tuple[float, float]
    community: list[int] = field(default_factory=list)
    filter_state: ParticleSet | None = None
    last_trust: float = 1.0
    fault: FaultSpec | None = None


def unit_grid_positions(width: int, height: int) -> list[tuple[float, float]]:
    """Node coordinates (1,1) .. (width,height) on the integer grid, row-major."""
    return [(float(x), float(y)) for y in range(1, height + 1) for x in range(1, width + 1)]


def build_topology(config: "ScenarioConfig") -> list[Node]:
    """Create the node list with communities resolved by Euclidean radius.

    A node's community is every other node within ``comm_radius``.  Any
    node left without members makes the scenario unusable (its votes and
    community estimates would be undefined), so that raises.
    """
    positions = config.node_positions()
    nodes = [
        Node(id=i, position=pos, filter_state=ParticleSet.initial(config.model))
        for i, pos in enumerate(positions)
    ]
    coords = np.array(positions)
    for node in nodes:
        deltas = coords - np.array(node.position)
        dist = np.hypot(deltas[:, 0], deltas[:, 1])
        members = [j for j in np.nonzero(dist <= config.comm_radius)[0].tolist() if j != node.id]
        if not members:
            raise InvalidConfigError(
                f"node {node.id} at {node.position} has no community members "
                f"within radius {config.comm_radius}"
            )
        node.community = members
    return nodes


def event_membership(node: Node, k: int, dynamics: EventDynamics) -> bool:
    """True iff the node sits inside the event disk at scored step k."""
    radius = dynamics.radius_schedule[k - 1]
    return math.dist(node.position, dynamics.epicenter) <= radius


def generate_reading(
    node: Node, step: int, config: "ScenarioConfig", rng: np.random.Generator
) -> float | None:
    """The node's transmitted reading at an absolute step, or None if silent.

    Base level follows the node's region (non-event during warm-up),
    plus zero-mean Gaussian measurement noise; an active fault then
    transforms the result.
    """
    scored = step - config.warmup_steps
    in_event = scored >= 1 and event_membership(node, scored, config.event)
    mean = config.patterns.event_mean if in_event else config.patterns.non_event_mean
    reading = mean + rng.normal(0.0, config.patterns.noise_std)

    fault = node.fault
    if fault is None or not fault.active(step):
        return float(reading)
    if fault.kind is FaultKind.OFFSET:
        return float(reading + fault.value)
    if fault.kind is FaultKind.STUCK_AT:
        return float(fault.value)
    if fault.kind is FaultKind.VARIANCE_DEGRADATION:
        return float(reading + rng.normal(0.0, math.sqrt(fault.value)))
    return None  # sleeper transmits nothing


def assign_faults(config: "ScenarioConfig", rng: np.random.Generator) -> dict[int, FaultSpec]:
    """Pick round(failure_rate * n) distinct faulty nodes and their fault kinds.

    Every node is equally likely to be selected; each selected node's
    kind is drawn from the configured mix.  Faults persist from the
    configured onset to the end of the run.
    """
    n = config.node_count()
    count = math.floor(config.failure_rate * n + 0.5)
    faults: dict[int, FaultSpec] = {}
    if count == 0:
        return faults
    chosen = rng.choice(n, size=count, replace=False)
    kinds = list(config.fault_mix.keys())
    weights = np.array([config.fault_mix[k] for k in kinds], dtype=float)
    weights = weights / weights.sum()
    for node_id in sorted(int(i) for i in chosen):
        kind = kinds[int(rng.choice(len(kinds), p=weights))]
        faults[node_id] = config.make_fault(kind)
    return faults


@dataclass
class NetworkStepResult:
    """Everything one absolute step produced, in node-id order."""

    step: int
    truth: np.ndarray
    readings: list[float | None]
    trusts: np.ndarray
    indicators: np.ndarray


def step_network(
    nodes: list[Node], step: int, config: "ScenarioConfig", seed_root: int
) -> NetworkStepResult:
    """Advance every node one absolute step (two synchronous phases).

    Phase 1 assembles each center node's community observation (member
    readings from this step, member trusts from the previous step) and
    runs its trust filter.  Phase 2 recomputes the community estimate
    with the fresh trusts and decides each node's event indicator.
    Node filter states are updated in place.

    A filter failure on one node does not stop the others; any such
    errors are re-raised together after the full sweep.
    """
    scored = step - config.warmup_steps
    truth = np.array(
        [scored >= 1 and event_membership(node, scored, config.event) for node in nodes]
    )
    readings: list[float | None] = [
        generate_reading(
            node, step, config, np.random.default_rng((seed_root, _READING_STREAM, node.id, step))
        )
        for node in nodes
    ]

    prev_trusts = np.array([node.last_trust for node in nodes])
    trusts = np.empty(len(nodes))
    failures: list[tuple[int, Exception]] = []
    for node in nodes:
        obs = _community_observation(node, readings, prev_trusts)
        rng = np.random.default_rng((seed_root, _FILTER_STREAM, node.id, step))
        try:
            node.filter_state, trust = filter_step(node.filter_state, obs, config.model, rng)
        except TrustFieldError as exc:
            failures.append((node.id, exc))
            trust = node.last_trust
        trusts[node.id] = trust

    indicators = np.empty(len(nodes), dtype=int)
    for node in nodes:
        obs = _community_observation(node, readings, trusts)
        indicators[node.id] = decide_event(
            trusts[node.id], readings[node.id], obs, config.sensing_range, config.model
        )
        node.last_trust = trusts[node.id]

    if failures:
        ids = [node_id for node_id, _ in failures]
        raise TrustFieldError(f"filter failure on nodes {ids} at step {step}") from failures[0][1]

    return NetworkStepResult(
        step=step, truth=truth, readings=readings, trusts=trusts, indicators=indicators
    )


def _community_observation(
    node: Node, readings: list[float | None], trusts: np.ndarray
) -> CommunityObservation:
    """The center node's view this step: transmitting members only."""
    member_readings = []
    member_trusts = []
    for j in node.community:
        if readings[j] is not None:
            member_readings.append(readings[j])
            member_trusts.append(trusts[j])
    return CommunityObservation(
        center_reading=readings[node.id],
        member_readings=np.array(member_readings),
        member_trusts=np.array(member_trusts),
    )


def fault_assignment_rng(seed_root: int) -> np.random.Generator:
    """The dedicated stream for fault selection within one run."""
    return np.random.default_rng((seed_root, _FAULT_STREAM))


from .config import ScenarioConfig  # noqa: E402  (runtime use of forward references)
