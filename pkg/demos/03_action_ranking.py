"""Step through the ranking protocol on a blocked-corridor scene.

A pedestrian stands in the robot's lane. The script shows the per-primitive
feasibility and clearance table (stage 1), the comfort buckets (stage 2),
and the efficiency-ordered result (stage 3), for two comfort thresholds.
"""

from socnav import Action, SfmParams, format_ranked_actions, rank_actions
from socnav.oracle import RolloutConfig, assess_all
from socnav.pedsim import predict_trajectories
from socnav.scenario import Pedestrian, Pose2D, Scene

ARENA = ((-12.0, -12.0), (12.0, -12.0), (12.0, 12.0), (-12.0, 12.0))


def blocked_scene() -> Scene:
    return Scene(
        robot=Pose2D(0.0, 0.0, 0.0),
        robot_radius=0.3,
        pedestrians=(
            Pedestrian(id=0, pose=Pose2D(2.5, 0.0), velocity=(0.0, 0.0),
                       goal=(2.5, 0.0)),
        ),
        obstacles=(),
        drivable=ARENA,
        route_options=1,
        rng_seed=0,
    )


def show(config: RolloutConfig) -> None:
    scene = blocked_scene()
    params = SfmParams()
    trajs = predict_trajectories(scene, config.horizon, params)
    assessments = assess_all(scene, trajs, config)

    print(f"comfort distance: {config.comfort_distance} m")
    print(f"{'action':<20} {'feasible':<9} {'clearance':>10}  comfort")
    for action in Action:
        a = assessments[action]
        bucket = "-"
        if a.feasible and action is not Action.STOP:
            bucket = "ok" if a.min_clearance >= config.comfort_distance else "tight"
        print(f"{action.value:<20} {str(a.feasible):<9} "
              f"{a.min_clearance:>10.3f}  {bucket}")
    ranked = rank_actions(scene, config, params, trajs=trajs)
    print("ranked:", format_ranked_actions(ranked))
    print()


def main():
    # a strict comfort threshold pushes diagonals behind the turns and
    # appends Stop as the fallback
    show(RolloutConfig(comfort_distance=1.2))
    # a lax threshold lets the diagonals lead and drops Stop entirely
    show(RolloutConfig(comfort_distance=0.5))


if __name__ == "__main__":
    main()
