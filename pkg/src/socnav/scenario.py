"""Synthetic 2-D navigation scenes.

A Scene is the observation a policy reasons about: robot pose, pedestrians,
obstacles, a drivable polygon, and route metadata. This module covers
procedural generation, the rule-based difficulty classification, a top-down
portable-pixmap renderer, and the deterministic textual scene summary used as
the first assistant turn of a benchmark conversation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import geometry

TWO_PI = 2.0 * math.pi

# difficulty calibration: counting radii and score cut points
PEDESTRIAN_NEAR_M = 6.0
OBSTACLE_NEAR_M = 4.0
EASY_MAX_SUM = 1
MEDIUM_MAX_SUM = 3

DEFAULT_ROBOT_RADIUS = 0.3


class GenerationExhaustedError(RuntimeError):
    """No scene of the requested difficulty was found within the attempt bound."""


class RenderError(ValueError):
    """Raster viewport cannot represent the requested scene."""


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]; values already in range pass through unchanged."""
    if -math.pi < theta <= math.pi:
        return theta
    while theta > math.pi:
        theta -= TWO_PI
    while theta <= -math.pi:
        theta += TWO_PI
    return theta


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))


@dataclass(frozen=True)
class Pedestrian:
    id: int
    pose: Pose2D
    velocity: tuple[float, float]
    goal: tuple[float, float]
    radius: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        object.__setattr__(self, "goal", tuple(float(v) for v in self.goal))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise ValueError("pedestrian radius must be positive")


@dataclass(frozen=True)
class Disc:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "cx", float(self.cx))
        object.__setattr__(self, "cy", float(self.cy))
        object.__setattr__(self, "r", float(self.r))
        if self.r <= 0.0:
            raise ValueError("disc radius must be positive")


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError("polygon obstacle needs at least 3 vertices")
        if not geometry.is_convex(verts):
            raise ValueError("polygon obstacle must be convex and non-degenerate")


Obstacle = Disc | ConvexPolygon


@dataclass(frozen=True)
class Scene:
    robot: Pose2D
    robot_radius: float
    pedestrians: tuple[Pedestrian, ...]
    obstacles: tuple[Obstacle, ...]
    drivable: tuple[tuple[float, float], ...]
    route_options: int
    rng_seed: int

    def __post_init__(self):
        object.__setattr__(self, "pedestrians", tuple(self.pedestrians))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(
            self, "drivable", tuple((float(x), float(y)) for x, y in self.drivable)
        )
        if self.robot_radius <= 0.0:
            raise ValueError("robot radius must be positive")
        if len(self.drivable) < 3:
            raise ValueError("drivable region needs at least 3 vertices")
        if self.route_options < 1:
            raise ValueError("route_options must be at least 1")
        if not geometry.point_in_polygon(self.robot.x, self.robot.y, self.drivable):
            raise ValueError("robot must be strictly inside the drivable region")
        ids = [p.id for p in self.pedestrians]
        if len(set(ids)) != len(ids):
            raise ValueError("pedestrian ids must be unique")


class DifficultyLevel(Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    DIFFICULT = "Difficult"


@dataclass(frozen=True)
class Difficulty:
    level: DifficultyLevel
    factor_scores: tuple[int, int, int]  # (road, pedestrian, environment)


def obstacle_clearance(x: float, y: float, obstacle: Obstacle) -> float:
    """Distance from a point to the obstacle surface; negative inside."""
    if isinstance(obstacle, Disc):
        return math.hypot(x - obstacle.cx, y - obstacle.cy) - obstacle.r
    d = geometry.polygon_boundary_distance(x, y, obstacle.vertices)
    if geometry.point_in_polygon(x, y, obstacle.vertices):
        return -d
    return d


def obstacle_surface_point(x: float, y: float, obstacle: Obstacle) -> tuple[float, float]:
    """Nearest point on the obstacle surface to (x, y)."""
    if isinstance(obstacle, Disc):
        dx, dy = x - obstacle.cx, y - obstacle.cy
        d = math.hypot(dx, dy)
        if d == 0.0:
            return (obstacle.cx + obstacle.r, obstacle.cy)
        return (obstacle.cx + obstacle.r * dx / d, obstacle.cy + obstacle.r * dy / d)
    return geometry.closest_point_on_polygon(x, y, obstacle.vertices)


def _count_score(count: int) -> int:
    if count == 0:
        return 0
    if count <= 2:
        return 1
    return 2


def classify_difficulty(scene: Scene) -> Difficulty:
    """Score road, pedestrian, and environment complexity, each on 0-2.

    Road: 0/1/2 for one, two, or three-plus route options. Pedestrian: count
    within 6 m of the robot, binned 0 / 1-2 / 3+. Environment: obstacles whose
    surface lies within 4 m, same bins. The level cuts the score sum at
    Easy <= 1, Medium 2-3, Difficult >= 4.
    """
    rx, ry = scene.robot.x, scene.robot.y
    road = min(scene.route_options - 1, 2)
    near_peds = sum(
        1
        for p in scene.pedestrians
        if math.hypot(p.pose.x - rx, p.pose.y - ry) <= PEDESTRIAN_NEAR_M
    )
    near_obstacles = sum(
        1 for o in scene.obstacles if obstacle_clearance(rx, ry, o) <= OBSTACLE_NEAR_M
    )
    scores = (road, _count_score(near_peds), _count_score(near_obstacles))
    total = sum(scores)
    if total <= EASY_MAX_SUM:
        level = DifficultyLevel.EASY
    elif total <= MEDIUM_MAX_SUM:
        level = DifficultyLevel.MEDIUM
    else:
        level = DifficultyLevel.DIFFICULT
    return Difficulty(level, scores)


# ---------------------------------------------------------------------------
# procedural generation


def _random_point_in_polygon(rng: random.Random, vertices, margin: float,
                             tries: int = 60) -> tuple[float, float] | None:
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    for _ in range(tries):
        x = rng.uniform(min(xs), max(xs))
        y = rng.uniform(min(ys), max(ys))
        if geometry.point_in_polygon(x, y, vertices) and \
                geometry.polygon_boundary_distance(x, y, vertices) >= margin:
            return (x, y)
    return None


def _draw_drivable(rng: random.Random) -> tuple[tuple[float, float], ...]:
    if rng.random() < 0.5:
        hw = rng.uniform(7.0, 12.0)
        hh = rng.uniform(7.0, 12.0)
        return ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh))
    n = rng.choice((5, 6, 7, 8))
    base = rng.uniform(0.0, TWO_PI / n)
    verts = []
    for i in range(n):
        ang = base + TWO_PI * i / n
        r = rng.uniform(6.5, 12.0)
        verts.append((r * math.cos(ang), r * math.sin(ang)))
    return tuple(verts)


def _draw_obstacle(rng: random.Random, cx: float, cy: float, rho: float) -> Obstacle:
    if rng.random() < 0.6:
        return Disc(cx, cy, rho)
    m = rng.choice((3, 4, 5, 6))
    rot = rng.uniform(0.0, TWO_PI)
    verts = tuple(
        (cx + rho * math.cos(rot + TWO_PI * i / m), cy + rho * math.sin(rot + TWO_PI * i / m))
        for i in range(m)
    )
    return ConvexPolygon(verts)


def _place_obstacles(rng: random.Random, drivable, robot_xy, count: int,
                     d_range: tuple[float, float], keepout: float,
                     placed: list[Obstacle],
                     placed_bounds: list[tuple[float, float, float]]) -> None:
    rx, ry = robot_xy
    for _ in range(count):
        for _ in range(25):
            d = rng.uniform(*d_range)
            phi = rng.uniform(-math.pi, math.pi)
            cx = rx + d * math.cos(phi)
            cy = ry + d * math.sin(phi)
            rho_max = min(1.0, d - keepout)
            if rho_max < 0.3:
                continue
            rho = rng.uniform(0.3, rho_max)
            if not geometry.point_in_polygon(cx, cy, drivable):
                continue
            if any(
                math.hypot(cx - ox, cy - oy) < rho + orho + 0.2
                for ox, oy, orho in placed_bounds
            ):
                continue
            placed.append(_draw_obstacle(rng, cx, cy, rho))
            placed_bounds.append((cx, cy, rho))
            break


def _place_pedestrians(rng: random.Random, drivable, robot_xy, obstacles,
                       count: int, d_range: tuple[float, float],
                       placed: list[Pedestrian], next_id: int) -> int:
    rx, ry = robot_xy
    for _ in range(count):
        for _ in range(25):
            d = rng.uniform(*d_range)
            phi = rng.uniform(-math.pi, math.pi)
            px = rx + d * math.cos(phi)
            py = ry + d * math.sin(phi)
            radius = rng.uniform(0.25, 0.35)
            if not geometry.point_in_polygon(px, py, drivable):
                continue
            if geometry.polygon_boundary_distance(px, py, drivable) < 0.5:
                continue
            if any(obstacle_clearance(px, py, o) < radius + 0.1 for o in obstacles):
                continue
            if any(math.hypot(px - q.pose.x, py - q.pose.y) < 0.7 for q in placed):
                continue
            speed = rng.uniform(0.0, 1.5)
            direction = rng.uniform(-math.pi, math.pi)
            goal = _random_point_in_polygon(rng, drivable, margin=0.3)
            if goal is None:
                goal = (rx, ry)
            placed.append(
                Pedestrian(
                    id=next_id,
                    pose=Pose2D(px, py, direction),
                    velocity=(speed * math.cos(direction), speed * math.sin(direction)),
                    goal=goal,
                    radius=radius,
                )
            )
            next_id += 1
            break
    return next_id


def _draw_scene(rng: random.Random, seed: int) -> Scene:
    drivable = _draw_drivable(rng)
    rx = rng.uniform(-3.0, 3.0)
    ry = rng.uniform(-3.0, 3.0)
    if not (
        geometry.point_in_polygon(rx, ry, drivable)
        and geometry.polygon_boundary_distance(rx, ry, drivable) >= 1.0
    ):
        rx, ry = 0.0, 0.0  # every drawn region contains the origin with margin
    heading = rng.uniform(-math.pi, math.pi)
    route_options = rng.randint(1, 3)

    obstacles: list[Obstacle] = []
    bounds: list[tuple[float, float, float]] = []
    _place_obstacles(rng, drivable, (rx, ry), rng.choice((0, 0, 1, 1, 2, 3, 4)),
                     (1.4, 3.8), keepout=1.0, placed=obstacles, placed_bounds=bounds)
    _place_obstacles(rng, drivable, (rx, ry), rng.choice((0, 0, 1, 2)),
                     (4.8, 7.5), keepout=4.05, placed=obstacles, placed_bounds=bounds)

    pedestrians: list[Pedestrian] = []
    next_id = _place_pedestrians(rng, drivable, (rx, ry), obstacles,
                                 rng.choice((0, 0, 1, 1, 2, 3, 4)),
                                 (1.5, 5.5), pedestrians, 0)
    _place_pedestrians(rng, drivable, (rx, ry), obstacles,
                       rng.choice((0, 0, 1, 2)), (6.5, 9.5), pedestrians, next_id)

    return Scene(
        robot=Pose2D(rx, ry, heading),
        robot_radius=DEFAULT_ROBOT_RADIUS,
        pedestrians=tuple(pedestrians),
        obstacles=tuple(obstacles),
        drivable=drivable,
        route_options=route_options,
        rng_seed=seed,
    )


def generate_scene(seed: int, target: DifficultyLevel | None = None,
                   max_attempts: int = 1000) -> Scene:
    """Deterministically synthesize a scene; optionally rejection-sample a level."""
    rng = random.Random(seed)
    for _ in range(max_attempts):
        scene = _draw_scene(rng, seed)
        if target is None or classify_difficulty(scene).level is target:
            return scene
    raise GenerationExhaustedError(
        f"no {target.value} scene found for seed {seed} within {max_attempts} attempts"
    )


# ---------------------------------------------------------------------------
# serialization (scene JSON schema shared with the dataset format)


def scene_to_dict(scene: Scene) -> dict:
    obstacles = []
    for o in scene.obstacles:
        if isinstance(o, Disc):
            obstacles.append({"disc": {"cx": o.cx, "cy": o.cy, "r": o.r}})
        else:
            obstacles.append({"polygon": [[x, y] for x, y in o.vertices]})
    return {
        "robot": {
            "x": scene.robot.x,
            "y": scene.robot.y,
            "heading": scene.robot.heading,
            "radius": scene.robot_radius,
        },
        "pedestrians": [
            {
                "id": p.id,
                "x": p.pose.x,
                "y": p.pose.y,
                "heading": p.pose.heading,
                "vx": p.velocity[0],
                "vy": p.velocity[1],
                "gx": p.goal[0],
                "gy": p.goal[1],
                "radius": p.radius,
            }
            for p in scene.pedestrians
        ],
        "obstacles": obstacles,
        "drivable": [[x, y] for x, y in scene.drivable],
        "route_options": scene.route_options,
        "seed": scene.rng_seed,
    }


def scene_from_dict(data: dict) -> Scene:
    try:
        robot = data["robot"]
        pedestrians = tuple(
            Pedestrian(
                id=int(p["id"]),
                pose=Pose2D(p["x"], p["y"], p.get("heading", 0.0)),
                velocity=(p["vx"], p["vy"]),
                goal=(p["gx"], p["gy"]),
                radius=p["radius"],
            )
            for p in data["pedestrians"]
        )
        obstacles: list[Obstacle] = []
        for o in data["obstacles"]:
            if "disc" in o:
                d = o["disc"]
                obstacles.append(Disc(d["cx"], d["cy"], d["r"]))
            elif "polygon" in o:
                obstacles.append(ConvexPolygon(tuple((x, y) for x, y in o["polygon"])))
            else:
                raise ValueError("obstacle must be a disc or a polygon")
        return Scene(
            robot=Pose2D(robot["x"], robot["y"], robot["heading"]),
            robot_radius=robot["radius"],
            pedestrians=pedestrians,
            obstacles=tuple(obstacles),
            drivable=tuple((x, y) for x, y in data["drivable"]),
            route_options=int(data["route_options"]),
            rng_seed=int(data["seed"]),
        )
    except KeyError as exc:
        raise ValueError(f"scene is missing field {exc.args[0]!r}") from exc


# ---------------------------------------------------------------------------
# frame helpers (used by the mirror-symmetry checks)


def to_robot_frame(scene: Scene) -> Scene:
    """Rigidly transform the scene so the robot sits at the origin, heading 0."""
    c = math.cos(-scene.robot.heading)
    s = math.sin(-scene.robot.heading)
    rx, ry = scene.robot.x, scene.robot.y

    def pt(x: float, y: float) -> tuple[float, float]:
        dx, dy = x - rx, y - ry
        return (c * dx - s * dy, s * dx + c * dy)

    def vec(x: float, y: float) -> tuple[float, float]:
        return (c * x - s * y, s * x + c * y)

    pedestrians = tuple(
        Pedestrian(
            id=p.id,
            pose=Pose2D(*pt(p.pose.x, p.pose.y),
                        wrap_angle(p.pose.heading - scene.robot.heading)),
            velocity=vec(*p.velocity),
            goal=pt(*p.goal),
            radius=p.radius,
        )
        for p in scene.pedestrians
    )
    obstacles: list[Obstacle] = []
    for o in scene.obstacles:
        if isinstance(o, Disc):
            obstacles.append(Disc(*pt(o.cx, o.cy), o.r))
        else:
            obstacles.append(ConvexPolygon(tuple(pt(x, y) for x, y in o.vertices)))
    return Scene(
        robot=Pose2D(0.0, 0.0, 0.0),
        robot_radius=scene.robot_radius,
        pedestrians=pedestrians,
        obstacles=tuple(obstacles),
        drivable=tuple(pt(x, y) for x, y in scene.drivable),
        route_options=scene.route_options,
        rng_seed=scene.rng_seed,
    )


def mirror_scene(scene: Scene) -> Scene:
    """Reflect a scene across the robot's heading axis.

    The result is expressed in the robot frame, where the reflection is an
    exact sign flip of every y coordinate, so mirrored geometry stays
    bit-for-bit comparable with the original after :func:`to_robot_frame`.
    """
    base = to_robot_frame(scene)
    pedestrians = tuple(
        Pedestrian(
            id=p.id,
            pose=Pose2D(p.pose.x, -p.pose.y, wrap_angle(-p.pose.heading)),
            velocity=(p.velocity[0], -p.velocity[1]),
            goal=(p.goal[0], -p.goal[1]),
            radius=p.radius,
        )
        for p in base.pedestrians
    )
    obstacles: list[Obstacle] = []
    for o in base.obstacles:
        if isinstance(o, Disc):
            obstacles.append(Disc(o.cx, -o.cy, o.r))
        else:
            # vertex order is kept (winding flips) so every segment
            # computation stays a bit-exact mirror of the original
            obstacles.append(ConvexPolygon(tuple((x, -y) for x, y in o.vertices)))
    return Scene(
        robot=base.robot,
        robot_radius=base.robot_radius,
        pedestrians=pedestrians,
        obstacles=tuple(obstacles),
        drivable=tuple((x, -y) for x, y in base.drivable),
        route_options=base.route_options,
        rng_seed=base.rng_seed,
    )


# ---------------------------------------------------------------------------
# rendering

COLOR_BACKGROUND = (255, 255, 255)
COLOR_DRIVABLE = (200, 200, 200)
COLOR_OBSTACLE = (0, 0, 0)
COLOR_PEDESTRIAN = (220, 30, 30)
COLOR_ROBOT = (40, 40, 230)


def _paint_disc(img, px, py, cx, cy, r, color) -> None:
    img[(px - cx) ** 2 + (py - cy) ** 2 <= r * r] = color


def _paint_tick(img, cx, cy, direction, length, ppm, x0, y1, color) -> None:
    size_y, size_x = img.shape[:2]
    steps = max(2, int(length * ppm * 2))
    for k in range(steps + 1):
        t = length * k / steps
        x = cx + t * direction[0]
        y = cy + t * direction[1]
        j = int((x - x0) * ppm)
        i = int((y1 - y) * ppm)
        if 0 <= i < size_y and 0 <= j < size_x:
            img[i, j] = color


def render_topdown(scene: Scene, pixels_per_meter: int, extent: float) -> bytes:
    """Render a square bird's-eye raster as a binary portable pixmap (P6).

    `extent` is the viewport side length in meters, centered on the drivable
    region's bounding box; it must cover that box.
    """
    if pixels_per_meter < 1:
        raise RenderError("pixels_per_meter must be at least 1")
    xs = [v[0] for v in scene.drivable]
    ys = [v[1] for v in scene.drivable]
    width = max(xs) - min(xs)
    height = max(ys) - min(ys)
    if extent < width - 1e-9 or extent < height - 1e-9:
        raise RenderError(
            f"extent {extent} m is smaller than the scene bounding box "
            f"({width:.2f} x {height:.2f} m)"
        )
    cx = 0.5 * (min(xs) + max(xs))
    cy = 0.5 * (min(ys) + max(ys))
    x0 = cx - extent / 2.0
    y1 = cy + extent / 2.0
    size = int(round(extent * pixels_per_meter))

    jj, ii = np.meshgrid(np.arange(size), np.arange(size))
    px = x0 + (jj + 0.5) / pixels_per_meter
    py = y1 - (ii + 0.5) / pixels_per_meter

    img = np.empty((size, size, 3), dtype=np.uint8)
    img[:] = COLOR_BACKGROUND
    img[geometry.polygon_mask(px, py, scene.drivable)] = COLOR_DRIVABLE

    for o in scene.obstacles:
        if isinstance(o, Disc):
            _paint_disc(img, px, py, o.cx, o.cy, o.r, COLOR_OBSTACLE)
        else:
            img[geometry.polygon_mask(px, py, o.vertices)] = COLOR_OBSTACLE

    ppm = pixels_per_meter
    for p in scene.pedestrians:
        _paint_disc(img, px, py, p.pose.x, p.pose.y, p.radius, COLOR_PEDESTRIAN)
        speed = math.hypot(*p.velocity)
        if speed > 1e-9:
            direction = (p.velocity[0] / speed, p.velocity[1] / speed)
            _paint_tick(img, p.pose.x, p.pose.y, direction, p.radius + 0.35,
                        ppm, x0, y1, COLOR_PEDESTRIAN)

    _paint_disc(img, px, py, scene.robot.x, scene.robot.y, scene.robot_radius,
                COLOR_ROBOT)
    _paint_tick(img, scene.robot.x, scene.robot.y,
                (math.cos(scene.robot.heading), math.sin(scene.robot.heading)),
                scene.robot_radius + 0.35, ppm, x0, y1, COLOR_ROBOT)

    header = f"P6\n{size} {size}\n255\n".encode("ascii")
    return header + img.tobytes()


def auto_extent(scene: Scene, pad: float = 2.0) -> float:
    """Smallest whole-meter viewport that covers the drivable region plus padding."""
    xs = [v[0] for v in scene.drivable]
    ys = [v[1] for v in scene.drivable]
    return float(math.ceil(max(max(xs) - min(xs), max(ys) - min(ys)) + pad))


# ---------------------------------------------------------------------------
# textual description


def _bearing_phrase(scene: Scene, px: float, py: float) -> str:
    rel = wrap_angle(
        math.atan2(py - scene.robot.y, px - scene.robot.x) - scene.robot.heading
    )
    # thirds of the frontal half-plane: right / ahead / left, else behind
    if abs(rel) <= math.pi / 6:
        return "ahead"
    if math.pi / 6 < rel <= math.pi / 2:
        return "to the left"
    if -math.pi / 2 <= rel < -math.pi / 6:
        return "to the right"
    return "behind"


def _plural(count: int, noun: str) -> str:
    return f"{count} {noun}" if count == 1 else f"{count} {noun}s"


def describe_scene(scene: Scene) -> str:
    """One-paragraph deterministic summary of what the robot can see."""
    parts = [f"There are {_plural(len(scene.pedestrians), 'pedestrian')} nearby."]
    if scene.pedestrians:
        nearest = min(
            scene.pedestrians,
            key=lambda p: math.hypot(p.pose.x - scene.robot.x, p.pose.y - scene.robot.y),
        )
        d = math.hypot(nearest.pose.x - scene.robot.x, nearest.pose.y - scene.robot.y)
        parts.append(
            f"The nearest pedestrian is {d:.1f} m "
            f"{_bearing_phrase(scene, nearest.pose.x, nearest.pose.y)}."
        )
    parts.append(f"{_plural(len(scene.obstacles), 'obstacle')} in view.")
    parts.append(f"{_plural(scene.route_options, 'route option')} available.")
    return " ".join(parts)
