"""Print every system prompt the benchmark can compose.

Walks the eight-config ablation grid (each segment alone, then the
self-evaluation segment combined with each competitor framing) and finishes
with the constrained single-shot prompt used for zero-shot endpoints.
"""

from socnav.prompts import (
    ablation_grid,
    build_system_prompt,
    constrained_zero_shot_prompt,
)


def main():
    for config in ablation_grid():
        prompt = build_system_prompt(config)
        print(f"=== {config.token()} (use_meta={config.use_meta}, "
              f"competitor={config.competitor}) ===")
        print(prompt.text if prompt.text else "(empty: no system prompt)")
        print()
    print("=== constrained single-shot prompt ===")
    print(constrained_zero_shot_prompt())


if __name__ == "__main__":
    main()
