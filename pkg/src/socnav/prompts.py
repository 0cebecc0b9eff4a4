"""System-prompt texts and their composition.

Two reusable segments exist: a self-evaluation loop with a scoring threshold,
and a competitor framing with three interchangeable reference adversaries
(humans, other AI models, or the model itself). A config selects which
segments appear; the combined prompt is their concatenation, one blank line
apart. A separate single-shot prompt constrains an unprimed model to the
exact one-line ranked-action output grammar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SELF_EVALUATION_TEXT = (
    "Implement a silent, recursive self-evaluation loop. Before answering, "
    "internally generate a draft and score it based on strict safety and "
    "social adherence standards. Set 90 as the minimum passing threshold, "
    "but do NOT cap the score at 100. If a solution is exceptionally robust "
    "or you are highly confident, you are encouraged to assign a score "
    "exceeding 100. If the score is below 90, you must critically analyze "
    "the flaws, refine your logic, and simulate the outcome again. Repeat "
    "this internal iteration until the solution meets or exceeds the "
    "90-point threshold. Output ONLY the final, optimized response without "
    "revealing the intermediate thinking steps."
)

COMPETITOR_TEMPLATE = (
    "You are an intelligent assistant specializing in socially compliant "
    "robot navigation. You must understand human behaviors, infer "
    "intentions, and plan safe, smooth, and socially appropriate paths. "
    "You should perform competitively against {competitor}."
)

COMPETITOR_PHRASES = {
    "human": "humans",
    "ai": "other AI models",
    "self": "other AI models like you",
}

COMPETITOR_MODES = ("none", "human", "self", "ai")

CONSTRAINED_ZERO_SHOT_TEXT = (
    "Given the current observation scenario, as a social robot, first prune "
    "infeasible actions, then select all executable actions from the "
    "following six actions: Move forward, Move forward-left, Move "
    "forward-right, Turn left, Turn right, Stop.\n"
    "\n"
    "Rank the selected actions in descending priority according to: "
    "(1) Social Safety, (2) Efficiency.\n"
    "\n"
    "You may output between 1 and 6 actions depending on feasibility. "
    "Output exactly one line using the following format, without any "
    "explanation or extra text:\n"
    "\n"
    "1.<action> 2.<action> ..."
)


@dataclass(frozen=True)
class PromptConfig:
    use_meta: bool = False
    competitor: str = "none"

    def __post_init__(self):
        if self.competitor not in COMPETITOR_MODES:
            raise ValueError(
                f"competitor must be one of {COMPETITOR_MODES}, got {self.competitor!r}"
            )

    def token(self) -> str:
        """Short CLI name (none, meta, com-<mode>, mcp-<mode>)."""
        if not self.use_meta:
            return "none" if self.competitor == "none" else f"com-{self.competitor}"
        return "meta" if self.competitor == "none" else f"mcp-{self.competitor}"


@dataclass(frozen=True)
class SystemPrompt:
    text: str
    config: PromptConfig = field(default_factory=PromptConfig)


def build_system_prompt(config: PromptConfig) -> SystemPrompt:
    """Concatenate the selected segments; the all-off config gives "" (no prompt)."""
    segments = []
    if config.use_meta:
        segments.append(SELF_EVALUATION_TEXT)
    if config.competitor != "none":
        segments.append(
            COMPETITOR_TEMPLATE.format(competitor=COMPETITOR_PHRASES[config.competitor])
        )
    return SystemPrompt(text="\n\n".join(segments), config=config)


def constrained_zero_shot_prompt() -> str:
    """The self-contained single-shot prompt with the one-line output grammar."""
    return CONSTRAINED_ZERO_SHOT_TEXT


def prompt_config_from_token(token: str) -> PromptConfig:
    """Inverse of PromptConfig.token, used by the command-line interface."""
    if token == "none":
        return PromptConfig(False, "none")
    if token == "meta":
        return PromptConfig(True, "none")
    for prefix, use_meta in (("com-", False), ("mcp-", True)):
        if token.startswith(prefix):
            return PromptConfig(use_meta, token[len(prefix):])
    raise ValueError(f"unknown prompt token {token!r}")


def ablation_grid() -> tuple[PromptConfig, ...]:
    """The standard eight-row grid: each segment alone, then meta with each competitor."""
    return (
        PromptConfig(False, "none"),
        PromptConfig(True, "none"),
        PromptConfig(False, "human"),
        PromptConfig(False, "self"),
        PromptConfig(False, "ai"),
        PromptConfig(True, "human"),
        PromptConfig(True, "self"),
        PromptConfig(True, "ai"),
    )
