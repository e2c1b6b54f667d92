"""Constant-velocity Kalman filtering over 8-dimensional box states.

The filter tracks [x, y, w, h, vx, vy, vw, vh] with a unit frame step and
applies a confidence-gated update: corrections fire only once a counter of
consecutive reliable observations reaches ``tau_kf``; until then the track
coasts on its prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import BoundingBox

STATE_DIM = 8
OBS_DIM = 4

# Predicted extents are floored before box construction: velocity
# extrapolation may drive w/h negative and IoU needs positive extents.
MIN_EXTENT = 1e-3


def _transition_matrix() -> np.ndarray:
    f = np.eye(STATE_DIM)
    for i in range(OBS_DIM):
        f[i, i + OBS_DIM] = 1.0
    return f


def _observation_matrix() -> np.ndarray:
    h = np.zeros((OBS_DIM, STATE_DIM))
    h[:OBS_DIM, :OBS_DIM] = np.eye(OBS_DIM)
    return h


TRANSITION = _transition_matrix()
OBSERVATION = _observation_matrix()
TRANSITION.setflags(write=False)
OBSERVATION.setflags(write=False)


@dataclass(frozen=True)
class KinematicsConfig:
    """Filter tuning knobs.

    tau_kf: consecutive reliable associations required before a Kalman
        correction fires; 0 means corrections always fire, ``math.inf``
        disables them entirely.
    tau_obj: objectness threshold above which an observation counts as
        reliable.
    pos_noise / vel_noise / obs_noise: standard-deviation multipliers
        relative to box width/height for the process and observation
        noise models.
    """

    tau_kf: float = 3
    tau_obj: float = 0.5
    pos_noise: float = 0.05
    vel_noise: float = 0.05
    obs_noise: float = 0.1

    def __post_init__(self) -> None:
        if self.tau_kf < 0:
            raise ValueError(f"tau_kf must be >= 0, got {self.tau_kf}")


@dataclass(frozen=True)
class KalmanTrackState:
    """Motion state, covariance, reliability counter, and noise models.

    A plain value: every operation returns a fresh state, so instances are
    freely transferable between threads.
    """

    state: np.ndarray            # (8,) [x, y, w, h, vx, vy, vw, vh]
    covariance: np.ndarray       # (8, 8) symmetric PSD
    counter: int                 # consecutive reliable associations
    process_noise: np.ndarray    # (8, 8) Q
    observation_noise: np.ndarray  # (4, 4) R


def kf_init(z: BoundingBox, config: KinematicsConfig) -> KalmanTrackState:
    """Initialise a track state from its first observed box.

    Position components start at the box, velocities at zero. Noise scales
    with box size: ``size = [w, h, w, h]`` so behaviour is scale invariant.
    Velocity uncertainty is deliberately inflated relative to position
    uncertainty because nothing is known about motion yet.
    """
    size = np.array([z.w, z.h, z.w, z.h])
    state = np.array([z.x, z.y, z.w, z.h, 0.0, 0.0, 0.0, 0.0])

    pos_std = 2.0 * config.pos_noise * size
    vel_std = 10.0 * config.vel_noise * size
    covariance = np.diag(np.concatenate([pos_std, vel_std]) ** 2)

    q_std = np.concatenate([config.pos_noise * size, config.vel_noise * size])
    process_noise = np.diag(q_std ** 2)
    observation_noise = np.diag((config.obs_noise * size) ** 2)

    return KalmanTrackState(
        state=state,
        covariance=covariance,
        counter=0,
        process_noise=process_noise,
        observation_noise=observation_noise,
    )


def predicted_box(state: np.ndarray) -> BoundingBox:
    """Observation projection of a state vector, extents floored at MIN_EXTENT."""
    return BoundingBox(
        float(state[0]),
        float(state[1]),
        max(float(state[2]), MIN_EXTENT),
        max(float(state[3]), MIN_EXTENT),
    )


def kf_predict(s: KalmanTrackState) -> tuple[KalmanTrackState, BoundingBox]:
    """Advance the state one frame under the constant-velocity model.

    Returns the advanced state and the predicted observation box.
    """
    state = TRANSITION @ s.state
    cov = TRANSITION @ s.covariance @ TRANSITION.T + s.process_noise
    cov = (cov + cov.T) / 2.0
    return replace(s, state=state, covariance=cov), predicted_box(state)


def kf_gated_update(
    s: KalmanTrackState,
    z: BoundingBox,
    reliable: bool,
    config: KinematicsConfig,
) -> KalmanTrackState:
    """Confidence-gated measurement update.

    The counter of consecutive reliable associations is incremented when
    ``reliable`` and reset to zero otherwise. Only once the counter has
    reached ``config.tau_kf`` is the standard Kalman correction applied;
    before that the prior (post-predict) state is retained unchanged, which
    keeps noisy observations from corrupting the motion state.

    Must be called after ``kf_predict`` for the current frame.
    """
    counter = s.counter + 1 if reliable else 0
    if counter < config.tau_kf:
        return replace(s, counter=counter)

    obs = np.array([z.x, z.y, z.w, z.h])
    innovation = obs - s.state[:OBS_DIM]

    # H selects the first four components, so HP and PH' are row/column slices.
    p = s.covariance
    innovation_cov = p[:OBS_DIM, :OBS_DIM] + s.observation_noise
    gain = np.linalg.solve(innovation_cov.T, p[:, :OBS_DIM].T).T

    state = s.state + gain @ innovation

    # Joseph form keeps the covariance symmetric PSD under roundoff.
    ikh = np.eye(STATE_DIM) - gain @ OBSERVATION
    cov = ikh @ p @ ikh.T + gain @ s.observation_noise @ gain.T
    cov = (cov + cov.T) / 2.0

    return replace(s, state=state, covariance=cov, counter=counter)


def is_reliable(s_obj: float, config: KinematicsConfig) -> bool:
    """Reliability rule shared by the tracker: objectness meets tau_obj."""
    if not math.isfinite(s_obj):
        raise ValueError(f"objectness score must be finite, got {s_obj!r}")
    return s_obj >= config.tau_obj
