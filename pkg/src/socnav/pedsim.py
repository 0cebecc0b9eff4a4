"""Goal-driven pedestrian dynamics with exponential social repulsion.

Each pedestrian accelerates toward its goal at a preferred speed while being
pushed away from other pedestrians, the (static) robot, and obstacle surfaces
by forces of the form A * exp((r_i + r_j - d) / B). Integration is explicit
Euler with a hard speed clamp, and the drivable polygon acts as a wall: the
velocity component into the boundary is zeroed on contact. Everything is a
pure function of its inputs, with no hidden randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .scenario import (
    Obstacle,
    Pedestrian,
    Pose2D,
    Scene,
    obstacle_surface_point,
    wrap_angle,
)


@dataclass(frozen=True)
class SfmParams:
    desired_speed: float = 1.3
    relaxation_time: float = 0.5
    interaction_strength: float = 2.0
    interaction_range: float = 0.3
    v_max: float = 2.0
    dt: float = 0.1

    def __post_init__(self):
        for name in ("desired_speed", "relaxation_time", "interaction_strength",
                     "interaction_range", "v_max", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.dt > 0.1 + 1e-12:
            raise ValueError("dt must not exceed 0.1 s")
        if self.v_max < self.desired_speed:
            raise ValueError("v_max must be at least desired_speed")

    def to_dict(self) -> dict:
        return {
            "desired_speed": self.desired_speed,
            "relaxation_time": self.relaxation_time,
            "interaction_strength": self.interaction_strength,
            "interaction_range": self.interaction_range,
            "v_max": self.v_max,
            "dt": self.dt,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SfmParams":
        return cls(**data)


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Synchronized short-horizon position forecasts, one row per pedestrian.

    positions has shape (n_pedestrians, n_steps + 1, 2) and includes t = 0.
    """

    dt: float
    ids: tuple[int, ...]
    radii: np.ndarray
    positions: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.positions.shape[1] - 1

    def __len__(self) -> int:
        return len(self.ids)


def _accelerations(pos: np.ndarray, vel: np.ndarray, goals: np.ndarray,
                   radii: np.ndarray, robot_xy: np.ndarray, robot_radius: float,
                   obstacles: tuple[Obstacle, ...], params: SfmParams) -> np.ndarray:
    n = len(pos)
    acc = np.zeros((n, 2))

    # goal attraction: relax toward desired_speed along the goal direction
    to_goal = goals - pos
    goal_dist = np.hypot(to_goal[:, 0], to_goal[:, 1])
    e_goal = np.zeros_like(to_goal)
    moving = goal_dist > 1e-9
    e_goal[moving] = to_goal[moving] / goal_dist[moving, None]
    acc += (params.desired_speed * e_goal - vel) / params.relaxation_time

    a = params.interaction_strength
    b = params.interaction_range

    if n > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(d, np.inf)
        mag = a * np.exp((radii[:, None] + radii[None, :] - d) / b)
        acc += np.sum(mag[..., None] * diff / d[..., None], axis=1)

    diff_r = pos - robot_xy[None, :]
    d_r = np.hypot(diff_r[:, 0], diff_r[:, 1])
    d_r = np.maximum(d_r, 1e-9)
    mag_r = a * np.exp((radii + robot_radius - d_r) / b)
    acc += mag_r[:, None] * diff_r / d_r[:, None]

    for obstacle in obstacles:
        for i in range(n):
            qx, qy = obstacle_surface_point(pos[i, 0], pos[i, 1], obstacle)
            dx, dy = pos[i, 0] - qx, pos[i, 1] - qy
            d = math.hypot(dx, dy)
            if d < 1e-9:
                continue
            mag = a * math.exp((radii[i] - d) / b)
            acc[i, 0] += mag * dx / d
            acc[i, 1] += mag * dy / d
    return acc


def _inward_normal(drivable, edge_index: int, orientation: float) -> tuple[float, float]:
    ax, ay = drivable[edge_index - 1]
    bx, by = drivable[edge_index]
    ex, ey = bx - ax, by - ay
    length = math.hypot(ex, ey)
    if length == 0.0:
        return (0.0, 0.0)
    # left normal of the edge points inward for counterclockwise polygons
    nx, ny = -ey / length, ex / length
    if orientation < 0.0:
        nx, ny = -nx, -ny
    return (nx, ny)


def _nearest_edge(x: float, y: float, drivable) -> int:
    best = math.inf
    best_i = 0
    x1, y1 = drivable[-1]
    for i, (x2, y2) in enumerate(drivable):
        d = geometry.segment_distance(x, y, x1, y1, x2, y2)
        if d < best:
            best = d
            best_i = i
        x1, y1 = x2, y2
    return best_i


def _advance(pos: np.ndarray, vel: np.ndarray, drivable, orientation: float,
             dt: float) -> None:
    """Move each pedestrian by vel*dt, sliding along the boundary on contact."""
    for i in range(len(pos)):
        cx = pos[i, 0] + vel[i, 0] * dt
        cy = pos[i, 1] + vel[i, 1] * dt
        if geometry.point_in_polygon(cx, cy, drivable):
            pos[i, 0], pos[i, 1] = cx, cy
            continue
        nx, ny = _inward_normal(drivable, _nearest_edge(pos[i, 0], pos[i, 1], drivable),
                                orientation)
        outward = vel[i, 0] * -nx + vel[i, 1] * -ny
        if outward > 0.0:
            vel[i, 0] += outward * nx
            vel[i, 1] += outward * ny
        cx = pos[i, 0] + vel[i, 0] * dt
        cy = pos[i, 1] + vel[i, 1] * dt
        if geometry.point_in_polygon(cx, cy, drivable):
            pos[i, 0], pos[i, 1] = cx, cy
        else:
            vel[i, 0] = 0.0
            vel[i, 1] = 0.0


def _step_arrays(pos: np.ndarray, vel: np.ndarray, goals: np.ndarray,
                 radii: np.ndarray, scene: Scene, params: SfmParams,
                 orientation: float) -> None:
    robot_xy = np.array([scene.robot.x, scene.robot.y])
    acc = _accelerations(pos, vel, goals, radii, robot_xy, scene.robot_radius,
                         scene.obstacles, params)
    vel += acc * params.dt
    speed = np.hypot(vel[:, 0], vel[:, 1])
    fast = speed > params.v_max
    if np.any(fast):
        vel[fast] *= (params.v_max / speed[fast])[:, None]
    _advance(pos, vel, scene.drivable, orientation, params.dt)


def _scene_arrays(scene: Scene):
    n = len(scene.pedestrians)
    pos = np.array([[p.pose.x, p.pose.y] for p in scene.pedestrians]).reshape(n, 2)
    vel = np.array([list(p.velocity) for p in scene.pedestrians]).reshape(n, 2)
    goals = np.array([list(p.goal) for p in scene.pedestrians]).reshape(n, 2)
    radii = np.array([p.radius for p in scene.pedestrians])
    return pos, vel, goals, radii


def sfm_step(scene: Scene, params: SfmParams) -> Scene:
    """Advance every pedestrian by one time step; the robot stays put."""
    pos, vel, goals, radii = _scene_arrays(scene)
    orientation = geometry.signed_area(scene.drivable)
    _step_arrays(pos, vel, goals, radii, scene, params, orientation)
    pedestrians = tuple(
        Pedestrian(
            id=p.id,
            pose=Pose2D(pos[i, 0], pos[i, 1], p.pose.heading),
            velocity=(vel[i, 0], vel[i, 1]),
            goal=p.goal,
            radius=p.radius,
        )
        for i, p in enumerate(scene.pedestrians)
    )
    return Scene(
        robot=scene.robot,
        robot_radius=scene.robot_radius,
        pedestrians=pedestrians,
        obstacles=scene.obstacles,
        drivable=scene.drivable,
        route_options=scene.route_options,
        rng_seed=scene.rng_seed,
    )


def n_steps_for(horizon: float, dt: float) -> int:
    """Validate that horizon is a positive whole number of dt steps."""
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    steps = horizon / dt
    rounded = round(steps)
    if rounded < 1 or abs(steps - rounded) > 1e-9 * max(1.0, steps):
        raise ValueError(f"horizon {horizon} is not a multiple of dt {dt}")
    return rounded


def predict_trajectories(scene: Scene, horizon: float, params: SfmParams) -> TrajectorySet:
    """Forecast pedestrian positions over the horizon with the robot held static."""
    steps = n_steps_for(horizon, params.dt)
    pos, vel, goals, radii = _scene_arrays(scene)
    orientation = geometry.signed_area(scene.drivable)
    n = len(scene.pedestrians)
    out = np.empty((n, steps + 1, 2))
    out[:, 0, :] = pos
    for t in range(1, steps + 1):
        _step_arrays(pos, vel, goals, radii, scene, params, orientation)
        out[:, t, :] = pos
    return TrajectorySet(
        dt=params.dt,
        ids=tuple(p.id for p in scene.pedestrians),
        radii=radii,
        positions=out,
    )


_STATIONARY_THRESHOLD_M = 0.1


def motion_class(trajs: TrajectorySet, index: int, scene: Scene) -> str:
    """Classify one pedestrian's predicted displacement relative to robot heading."""
    disp = trajs.positions[index, -1] - trajs.positions[index, 0]
    if math.hypot(disp[0], disp[1]) < _STATIONARY_THRESHOLD_M:
        return "stationary"
    rel = wrap_angle(math.atan2(disp[1], disp[0]) - scene.robot.heading)
    if abs(rel) <= math.pi / 4:
        return "receding"
    if abs(rel) >= 3 * math.pi / 4:
        return "approaching"
    if rel > 0:
        return "crossing right-to-left"
    return "crossing left-to-right"


def describe_predictions(trajs: TrajectorySet, scene: Scene) -> str:
    """Deterministic summary of predicted motion, one clause per pedestrian."""
    if trajs.ids != tuple(p.id for p in scene.pedestrians):
        raise ValueError("trajectory set does not belong to this scene")
    if not trajs.ids:
        return "There are no pedestrians to predict."
    parts = [
        f"Pedestrian {pid} is {motion_class(trajs, i, scene)}."
        for i, pid in enumerate(trajs.ids)
    ]
    return " ".join(parts)
