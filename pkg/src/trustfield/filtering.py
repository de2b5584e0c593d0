"""Online trust estimation for sensor-network nodes.

Each node carries a scalar trust state in [0, 1] that measures how much
its community currently believes the node's sensor readings.  Trust
evolves by a forgetting AR(1) law with truncated Gaussian process noise,

    trust_k = forgetting * trust_{k-1} + noise,   noise ~ N(0, process_variance),

redrawn until the result stays inside [0, 1].  Each step the community
members vote on the center node (a member votes "trusted" when its
reading agrees with the center's within ``vote_radius``), and the voting
average V drives a double-exponential likelihood

    L(trust) = exp(-|trust - V| / likelihood_sharpness).

The posterior over trust is tracked two ways:

* :func:`filter_step` -- a sequential-importance-sampling particle filter
  with the transition law as proposal, fresh likelihood weights, and
  systematic resampling triggered by effective sample size.  This is the
  online estimator meant to run on every node.
* :func:`grid_filter_step` -- an exact Bayes recursion by quadrature on a
  fixed grid.  Slow but assumption-free; used as the reference the
  particle filter is validated against.

All operations are pure functions of (state, observation, rng); nothing
here holds shared mutable state, so per-node filters can run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

from .errors import EmptyCommunityError, MissingCenterReadingError, RejectionSamplingError

# Rejection sampling gives up after this many total draws for one value.
_MAX_REJECTION_DRAWS = 1_000_000

# Weight-normalization tolerance used by validation.
WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Free parameters of the trust model.

    ``resample`` is an operational switch, not a model parameter: it
    enables ESS-triggered systematic resampling inside the particle
    filter (on by default).
    """

    particle_count: int = 20
    forgetting: float = 0.85
    process_variance: float = 0.01
    likelihood_sharpness: float = 0.1
    vote_radius: float = 5.0
    trust_threshold: float = 0.3
    resample: bool = True

    def __post_init__(self) -> None:
        if self.particle_count < 1:
            raise ValueError(f"particle_count must be >= 1, got {self.particle_count}")
        if not 0.0 <= self.forgetting <= 1.0:
            raise ValueError(f"forgetting must be in [0, 1], got {self.forgetting}")
        if self.process_variance <= 0.0:
            raise ValueError(f"process_variance must be > 0, got {self.process_variance}")
        if not 0.0 < self.likelihood_sharpness < 1.0:
            raise ValueError(
                f"likelihood_sharpness must be in (0, 1), got {self.likelihood_sharpness}"
            )
        if self.vote_radius <= 0.0:
            raise ValueError(f"vote_radius must be > 0, got {self.vote_radius}")
        if not 0.0 < self.trust_threshold < 1.0:
            raise ValueError(f"trust_threshold must be in (0, 1), got {self.trust_threshold}")


@dataclass
class CommunityObservation:
    """One node's view of its community at a single time step.

    ``center_reading`` is ``None`` when the center node produced no
    reading (sleeper).  ``member_readings`` and ``member_trusts`` are
    aligned: entry j is the j-th member's reading and that member's most
    recent trust estimate.  Members that transmitted nothing this step
    are simply absent from both arrays.
    """

    center_reading: float | None
    member_readings: np.ndarray
    member_trusts: np.ndarray

    def __post_init__(self) -> None:
        self.member_readings = np.asarray(self.member_readings, dtype=float)
        self.member_trusts = np.asarray(self.member_trusts, dtype=float)
        if self.member_readings.shape != self.member_trusts.shape:
            raise ValueError(
                "member_readings and member_trusts must have the same length: "
                f"{self.member_readings.shape} vs {self.member_trusts.shape}"
            )

    @property
    def member_count(self) -> int:
        return int(self.member_readings.size)


@dataclass
class ParticleSet:
    """Weighted particle approximation of the trust posterior."""

    particles: np.ndarray
    weights: np.ndarray

    @classmethod
    def initial(cls, params: ModelParams) -> "ParticleSet":
        """Full-trust starting state: every particle at 1.0, uniform weights."""
        n = params.particle_count
        return cls(particles=np.ones(n), weights=np.full(n, 1.0 / n))

    def estimate(self) -> float:
        """Posterior-mean trust estimate (minimum mean squared error)."""
        return float(np.dot(self.weights, self.particles))

    def validate(self) -> None:
        """Raise if the invariants are violated."""
        if np.any(self.particles < 0.0) or np.any(self.particles > 1.0):
            raise AssertionError("particle outside [0, 1]")
        if np.any(self.weights <= 0.0):
            raise AssertionError("non-positive particle weight")
        total = float(self.weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise AssertionError(f"weights sum to {total}, expected 1 +/- {WEIGHT_SUM_TOL}")


def _propagate_array(particles: np.ndarray, params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Apply the forgetting transition to every particle, keeping [0, 1].

    Out-of-range proposals are redrawn (rejection), which is exactly a
    truncated Gaussian renormalized around each source particle.
    """
    mean = params.forgetting * particles
    sigma = np.sqrt(params.process_variance)
    out = mean + rng.normal(0.0, sigma, size=particles.shape)
    pending = (out < 0.0) | (out > 1.0)
    draws = particles.size
    while np.any(pending):
        k = int(pending.sum())
        draws += k
        if draws > _MAX_REJECTION_DRAWS + particles.size:
            raise RejectionSamplingError(
                f"rejection sampling exceeded {_MAX_REJECTION_DRAWS} draws; "
                f"process_variance={params.process_variance} is pathological"
            )
        out[pending] = mean[pending] + rng.normal(0.0, sigma, size=k)
        pending = (out < 0.0) | (out > 1.0)
    return out


def propagate_particle(trust_prev: float, params: ModelParams, rng: np.random.Generator) -> float:
    """Draw one step of the trust transition law, truncated to [0, 1]."""
    if not 0.0 <= trust_prev <= 1.0:
        raise ValueError(f"trust_prev must be in [0, 1], got {trust_prev}")
    return float(_propagate_array(np.array([trust_prev]), params, rng)[0])


def vote(member_reading: float, center_reading: float, params: ModelParams) -> int:
    """One member's binary trust vote: 1 iff the readings agree within vote_radius.

    The inequality is strict; a difference of exactly ``vote_radius``
    counts as distrust.
    """
    return int(abs(member_reading - center_reading) < params.vote_radius)


def voting_average(obs: CommunityObservation, params: ModelParams) -> float:
    """Fraction of community members that vote the center node trusted."""
    if obs.member_count == 0:
        raise EmptyCommunityError("voting average needs at least one member reading")
    if obs.center_reading is None:
        raise MissingCenterReadingError("voting average needs the center node's own reading")
    agree = np.abs(obs.member_readings - obs.center_reading) < params.vote_radius
    return float(agree.sum()) / obs.member_count


def likelihood(trust: float | np.ndarray, voting_avg: float, params: ModelParams):
    """Observation likelihood exp(-|trust - V| / sharpness); accepts arrays."""
    return np.exp(-np.abs(np.asarray(trust, dtype=float) - voting_avg) / params.likelihood_sharpness)


def effective_sample_size(weights: np.ndarray) -> float:
    return 1.0 / float(np.sum(np.square(weights)))


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices of a systematic resample: one uniform offset, N even strata."""
    n = len(weights)
    positions = (rng.uniform() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0  # guard against round-off excluding the last particle
    return np.searchsorted(cumulative, positions)


def filter_step(
    state: ParticleSet,
    obs: CommunityObservation | None,
    params: ModelParams,
    rng: np.random.Generator,
) -> tuple[ParticleSet, float]:
    """Advance one node's trust posterior by one time step.

    Normal path: propagate every particle through the transition law,
    re-weight by the voting likelihood, resample systematically when the
    effective sample size falls below half the particle count, and return
    the new state with its posterior-mean estimate.

    Prediction-only path (taken when ``obs`` is ``None``, the center has
    no reading, or no member transmitted): particles propagate and the
    weights are kept, so the estimate decays by the forgetting factor per
    step in expectation.

    If every likelihood underflows to zero (possible only for extreme
    sharpness values), the weights fall back to uniform so the filter
    stays alive.
    """
    particles = _propagate_array(state.particles, params, rng)

    sleeper = obs is None or obs.center_reading is None or obs.member_count == 0
    if sleeper:
        new_state = ParticleSet(particles=particles, weights=state.weights.copy())
        new_state.validate()
        return new_state, new_state.estimate()

    voting_avg = voting_average(obs, params)
    raw = likelihood(particles, voting_avg, params)
    total = float(raw.sum())
    if total == 0.0:
        weights = np.full(params.particle_count, 1.0 / params.particle_count)
    else:
        weights = raw / total

    if params.resample and effective_sample_size(weights) < params.particle_count / 2.0:
        idx = systematic_resample(weights, rng)
        particles = particles[idx]
        weights = np.full(params.particle_count, 1.0 / params.particle_count)

    new_state = ParticleSet(particles=particles, weights=weights)
    new_state.validate()
    return new_state, new_state.estimate()


# ---------------------------------------------------------------------------
# Exact reference filter on a fixed grid
# ---------------------------------------------------------------------------


@dataclass
class GridDensity:
    """Probability masses on a uniform grid of cell midpoints over [0, 1]."""

    masses: np.ndarray

    @classmethod
    def initial(cls, resolution: int = 2000) -> "GridDensity":
        """Point mass in the topmost cell, mirroring the full-trust start."""
        masses = np.zeros(resolution)
        masses[-1] = 1.0
        return cls(masses=masses)

    @classmethod
    def uniform(cls, resolution: int = 2000) -> "GridDensity":
        return cls(masses=np.full(resolution, 1.0 / resolution))

    @property
    def centers(self) -> np.ndarray:
        n = len(self.masses)
        return (np.arange(n) + 0.5) / n

    def mean(self) -> float:
        return float(np.dot(self.centers, self.masses))


@lru_cache(maxsize=8)
def _transition_matrix(resolution: int, forgetting: float, process_variance: float) -> np.ndarray:
    """Cell-to-cell transition masses of the truncated-Gaussian trust law.

    Column j holds the distribution of the next trust value given the
    current one sits at cell midpoint j, renormalized per source point so
    the truncation matches rejection sampling exactly.
    """
    sigma = np.sqrt(process_variance)
    edges = np.linspace(0.0, 1.0, resolution + 1)
    centers = (edges[:-1] + edges[1:]) / 2.0
    source = forgetting * centers[np.newaxis, :]
    cdf_at_edges = ndtr((edges[:, np.newaxis] - source) / sigma)
    matrix = np.diff(cdf_at_edges, axis=0)
    span = cdf_at_edges[-1, :] - cdf_at_edges[0, :]
    return matrix / span[np.newaxis, :]


def grid_filter_step(
    prior: GridDensity,
    obs: CommunityObservation | None,
    params: ModelParams,
) -> tuple[GridDensity, float]:
    """Exact Bayes recursion for the trust posterior by quadrature.

    Applies the Chapman-Kolmogorov sum with the per-source renormalized
    truncated-Gaussian transition kernel, multiplies in the voting
    likelihood (skipped on the prediction-only path), and renormalizes.
    """
    resolution = len(prior.masses)
    transition = _transition_matrix(resolution, params.forgetting, params.process_variance)
    predicted = transition @ prior.masses

    sleeper = obs is None or obs.center_reading is None or obs.member_count == 0
    if not sleeper:
        voting_avg = voting_average(obs, params)
        predicted = predicted * likelihood(prior.centers, voting_avg, params)

    posterior = GridDensity(masses=predicted / predicted.sum())
    return posterior, posterior.mean()
