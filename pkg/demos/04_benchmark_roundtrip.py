"""A complete benchmark round trip, entirely in memory.

Builds a labeled corpus, holds out a test split, scores three reference
policies on it, and prints the comparison table with throughput. The oracle
row is the ceiling (perfect by construction), the noisy oracle sits in the
middle, and the single-action greedy baseline shows what ignoring the scene
costs.
"""

from socnav import (
    GreedyForwardPolicy,
    NoisyOraclePolicy,
    OraclePolicy,
    build_corpus,
    evaluate_samples,
    split_corpus,
)
from socnav.metrics import aggregate, render_markdown


def main():
    corpus = build_corpus(n_total=200, base_seed=1234)
    split = split_corpus(corpus, test_count=40, seed=9)
    print(f"corpus: {len(corpus)} samples -> {len(split.train)} train / "
          f"{len(split.test)} test\n")

    entries = []
    for policy in (OraclePolicy(), NoisyOraclePolicy(0.3, seed=5), GreedyForwardPolicy()):
        _outputs, scores, seconds = evaluate_samples(split.test, policy, jobs=4)
        difficulties = [s.difficulty.level.value for s in split.test]
        entries.append((policy.name, aggregate(scores, seconds, difficulties)))

    print(render_markdown(entries))
    print("per-difficulty breakdown:\n")
    print(render_markdown(entries, per_difficulty=True))


if __name__ == "__main__":
    main()
