"""Watch the pedestrian model at work on a hand-built crossing scene.

Three pedestrians: one walking straight at the robot, one cutting across,
and one loiterer. The script rolls the dynamics forward, prints where each
pedestrian ends up, and shows the motion classes that become the second
assistant turn of a benchmark conversation.
"""

from socnav import SfmParams, describe_predictions, predict_trajectories
from socnav.scenario import Pedestrian, Pose2D, Scene

ARENA = ((-15.0, -15.0), (15.0, -15.0), (15.0, 15.0), (-15.0, 15.0))


def main():
    scene = Scene(
        robot=Pose2D(0.0, 0.0, 0.0),
        robot_radius=0.3,
        pedestrians=(
            Pedestrian(id=0, pose=Pose2D(6.0, 0.3), velocity=(-1.2, 0.0),
                       goal=(-12.0, 0.3)),
            Pedestrian(id=1, pose=Pose2D(3.0, -5.0), velocity=(0.0, 1.1),
                       goal=(3.0, 12.0)),
            Pedestrian(id=2, pose=Pose2D(-2.0, 4.0), velocity=(0.0, 0.0),
                       goal=(-2.0, 4.0)),
        ),
        obstacles=(),
        drivable=ARENA,
        route_options=1,
        rng_seed=0,
    )
    params = SfmParams()
    horizon = 2.0
    trajs = predict_trajectories(scene, horizon, params)

    print(f"forecast horizon: {horizon} s at dt {params.dt} s "
          f"({trajs.n_steps} steps)\n")
    for i, pid in enumerate(trajs.ids):
        x0, y0 = trajs.positions[i, 0]
        x1, y1 = trajs.positions[i, -1]
        print(f"pedestrian {pid}: ({x0:+.2f}, {y0:+.2f}) -> ({x1:+.2f}, {y1:+.2f})")
    print()
    print("conversation turn:", describe_predictions(trajs, scene))


if __name__ == "__main__":
    main()
