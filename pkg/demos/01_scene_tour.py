"""Tour the scene generator: one scene per difficulty level.

Generates a scene targeting each difficulty level, prints the factor scores
behind the classification and the textual summary a policy would receive,
and writes a top-down raster per scene to demos/out/.
"""

from pathlib import Path

from socnav import DifficultyLevel, classify_difficulty, describe_scene, generate_scene
from socnav.scenario import auto_extent, render_topdown

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    for level in DifficultyLevel:
        scene = generate_scene(seed=2024, target=level)
        difficulty = classify_difficulty(scene)
        road, peds, env = difficulty.factor_scores
        print(f"=== {level.value} ===")
        print(f"  factor scores: road={road} pedestrian={peds} environment={env}")
        print(f"  {len(scene.pedestrians)} pedestrians, {len(scene.obstacles)} obstacles, "
              f"{scene.route_options} route option(s)")
        print(f"  summary: {describe_scene(scene)}")
        raster = render_topdown(scene, pixels_per_meter=10, extent=auto_extent(scene))
        path = OUT / f"scene_{level.value.lower()}.ppm"
        path.write_bytes(raster)
        print(f"  raster -> {path}")
        print()


if __name__ == "__main__":
    main()
