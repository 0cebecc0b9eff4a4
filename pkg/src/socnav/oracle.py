"""Ground-truth action ranking: feasibility, then comfort, then efficiency.

All six motion primitives are rolled out against predicted pedestrian
trajectories. Infeasible primitives (collision, drivable-region violation)
are pruned; the survivors are ordered by personal-space comfort first and
forward progress second, with Stop reserved for when nothing else works or
as an explicit fallback behind uncomfortable choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .actions import Action, RankedActions, efficiency_rank
from .pedsim import SfmParams, TrajectorySet, n_steps_for, predict_trajectories
from .scenario import Pose2D, Scene, obstacle_clearance, wrap_angle


@dataclass(frozen=True)
class PrimitiveSpec:
    action: Action
    linear_speed: float
    angular_speed: float


PRIMITIVES: dict[Action, PrimitiveSpec] = {
    Action.MOVE_FORWARD: PrimitiveSpec(Action.MOVE_FORWARD, 1.0, 0.0),
    Action.MOVE_FORWARD_LEFT: PrimitiveSpec(Action.MOVE_FORWARD_LEFT, 1.0, 0.5),
    Action.MOVE_FORWARD_RIGHT: PrimitiveSpec(Action.MOVE_FORWARD_RIGHT, 1.0, -0.5),
    Action.TURN_LEFT: PrimitiveSpec(Action.TURN_LEFT, 0.0, 1.0),
    Action.TURN_RIGHT: PrimitiveSpec(Action.TURN_RIGHT, 0.0, -1.0),
    Action.STOP: PrimitiveSpec(Action.STOP, 0.0, 0.0),
}

# deterministic final tie-break: left-hand variants sort before right-hand ones
_SIDE_ORDER = {
    Action.MOVE_FORWARD: 0,
    Action.MOVE_FORWARD_LEFT: 0,
    Action.MOVE_FORWARD_RIGHT: 1,
    Action.TURN_LEFT: 0,
    Action.TURN_RIGHT: 1,
    Action.STOP: 0,
}


@dataclass(frozen=True)
class RolloutConfig:
    horizon: float = 2.0
    dt: float = 0.1
    robot_radius: float = 0.3
    comfort_distance: float = 1.2

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if not 0.0 < self.dt <= 0.1 + 1e-12:
            raise ValueError("dt must be in (0, 0.1]")
        if self.robot_radius <= 0.0:
            raise ValueError("robot_radius must be positive")
        if self.comfort_distance <= 0.0:
            raise ValueError("comfort_distance must be positive")

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "dt": self.dt,
            "robot_radius": self.robot_radius,
            "comfort_distance": self.comfort_distance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RolloutConfig":
        return cls(**data)


@dataclass(frozen=True)
class ActionAssessment:
    action: Action
    feasible: bool
    min_clearance: float
    drivable_ok: bool


def rollout(start: Pose2D, action: Action, config: RolloutConfig) -> tuple[Pose2D, ...]:
    """Unicycle rollout of one primitive, explicit Euler, start pose included."""
    spec = PRIMITIVES[action]
    steps = n_steps_for(config.horizon, config.dt)
    poses = [start]
    x, y, heading = start.x, start.y, start.heading
    for _ in range(steps):
        x += spec.linear_speed * math.cos(heading) * config.dt
        y += spec.linear_speed * math.sin(heading) * config.dt
        heading = wrap_angle(heading + spec.angular_speed * config.dt)
        poses.append(Pose2D(x, y, heading))
    return tuple(poses)


def assess_action(scene: Scene, action: Action, trajs: TrajectorySet,
                  config: RolloutConfig) -> ActionAssessment:
    """Check one primitive against predicted pedestrians, obstacles, and bounds.

    min_clearance is the minimum over time of center distance to any predicted
    pedestrian minus both radii (inf when the scene has no pedestrians); it can
    be negative when the rollout collides.
    """
    steps = n_steps_for(config.horizon, config.dt)
    if abs(trajs.dt - config.dt) > 1e-12 or trajs.n_steps != steps:
        raise ValueError(
            "trajectory set is not aligned with the rollout "
            f"(dt {trajs.dt} vs {config.dt}, steps {trajs.n_steps} vs {steps})"
        )
    poses = rollout(scene.robot, action, config)
    xy = np.array([[p.x, p.y] for p in poses])

    if len(trajs):
        diff = trajs.positions - xy[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        clearance = d - config.robot_radius - trajs.radii[:, None]
        min_clearance = float(clearance.min())
    else:
        min_clearance = math.inf

    obstacles_ok = all(
        obstacle_clearance(p.x, p.y, o) > config.robot_radius
        for p in poses
        for o in scene.obstacles
    )
    drivable_ok = all(
        geometry.point_in_polygon(p.x, p.y, scene.drivable)
        and geometry.polygon_boundary_distance(p.x, p.y, scene.drivable)
        >= config.robot_radius
        for p in poses
    )
    feasible = min_clearance > 0.0 and obstacles_ok and drivable_ok
    return ActionAssessment(action, feasible, min_clearance, drivable_ok)


def assess_all(scene: Scene, trajs: TrajectorySet,
               config: RolloutConfig) -> dict[Action, ActionAssessment]:
    return {a: assess_action(scene, a, trajs, config) for a in Action}


def rank_actions(scene: Scene, config: RolloutConfig, params: SfmParams,
                 trajs: TrajectorySet | None = None) -> RankedActions:
    """Rank the feasible primitives; never returns an empty list.

    Feasible non-Stop actions are sorted by (comfort bucket, efficiency tier,
    larger clearance first, left before right), where the comfort bucket is 0
    when min_clearance stays at or above comfort_distance. Stop alone is the
    answer when nothing else is feasible; otherwise Stop is appended as a
    fallback exactly when some ranked action is uncomfortably close.
    """
    if abs(params.dt - config.dt) > 1e-12:
        raise ValueError("SfmParams.dt and RolloutConfig.dt must agree")
    if trajs is None:
        trajs = predict_trajectories(scene, config.horizon, params)
    assessments = assess_all(scene, trajs, config)

    feasible = [
        a for a in Action
        if a is not Action.STOP and assessments[a].feasible
    ]
    if not feasible:
        return (Action.STOP,)

    def bucket(a: Action) -> int:
        return 0 if assessments[a].min_clearance >= config.comfort_distance else 1

    feasible.sort(
        key=lambda a: (
            bucket(a),
            efficiency_rank(a),
            -assessments[a].min_clearance,
            _SIDE_ORDER[a],
        )
    )
    if any(bucket(a) == 1 for a in feasible):
        feasible.append(Action.STOP)
    return tuple(feasible)
