"""Deterministic multi-action social-navigation benchmark toolkit."""

__version__ = "0.1.0"

from .actions import (
    ALL_ACTIONS,
    Action,
    RankedActions,
    efficiency_rank,
    format_ranked_actions,
    parse_ranked_actions,
    parse_ranked_actions_tally,
)
from .scenario import (
    ConvexPolygon,
    Difficulty,
    DifficultyLevel,
    Disc,
    GenerationExhaustedError,
    Pedestrian,
    Pose2D,
    RenderError,
    Scene,
    classify_difficulty,
    describe_scene,
    generate_scene,
    mirror_scene,
    render_topdown,
    to_robot_frame,
)
from .pedsim import (
    SfmParams,
    TrajectorySet,
    describe_predictions,
    predict_trajectories,
    sfm_step,
)
from .oracle import (
    ActionAssessment,
    PrimitiveSpec,
    RolloutConfig,
    assess_action,
    rank_actions,
    rollout,
)
from .metrics import (
    AggregateReport,
    SampleScore,
    aggregate,
    apg,
    error_rate,
    maa,
    pred_at_1,
    pred_at_n,
    score_sample,
)
from .dataset import (
    ConversationTurn,
    DatasetFormatError,
    DatasetSplit,
    Sample,
    build_corpus,
    build_sample,
    load_jsonl,
    save_jsonl,
    split_corpus,
)
from .prompts import (
    PromptConfig,
    SystemPrompt,
    ablation_grid,
    build_system_prompt,
    constrained_zero_shot_prompt,
)
from .policy import (
    GreedyForwardPolicy,
    NoisyOraclePolicy,
    OraclePolicy,
    PolicyOutput,
    RemoteEndpointConfig,
    RemotePolicy,
    remote_complete,
    run_policy,
)
from .harness import evaluate_samples
