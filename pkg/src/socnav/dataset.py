"""Benchmark samples: three-turn conversations with ranked-action ground truth.

Each sample couples a scene with a fixed question script and the
deterministic assistant answers (scene summary, motion forecast, ranked
actions). Corpora serialize to JSONL with a header line that pins the build
configuration so any loaded sample can be re-labeled and checked bit-for-bit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .actions import Action, RankedActions, format_ranked_actions
from .oracle import RolloutConfig, rank_actions
from .pedsim import SfmParams, predict_trajectories, describe_predictions
from .scenario import (
    Difficulty,
    DifficultyLevel,
    Scene,
    auto_extent,
    classify_difficulty,
    describe_scene,
    generate_scene,
    render_topdown,
    scene_from_dict,
    scene_to_dict,
)

FORMAT_VERSION = 1

USER_QUESTIONS = (
    "Describe the scene in front of the robot.",
    "How are the nearby pedestrians likely to move over the next few seconds?",
    "Rank the actions the robot should take next, best first.",
)

DEFAULT_DIFFICULTY_MIX = (29 / 79, 29 / 79, 21 / 79)

_LEVELS = (DifficultyLevel.EASY, DifficultyLevel.MEDIUM, DifficultyLevel.DIFFICULT)

_MASK64 = (1 << 64) - 1


class DatasetFormatError(ValueError):
    """A corpus file violates the line schema; message names line and field."""


def splitmix64(state: int) -> tuple[int, int]:
    """One step of the SplitMix64 sequence: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class ConversationTurn:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in ("user", "assistant"):
            raise ValueError(f"role must be user or assistant, got {self.role!r}")


@dataclass(frozen=True)
class Sample:
    id: str
    scene: Scene
    difficulty: Difficulty
    turns: tuple[ConversationTurn, ...]
    gt_actions: RankedActions
    image_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "turns", tuple(self.turns))
        object.__setattr__(self, "gt_actions", tuple(self.gt_actions))
        _validate_turns(self.turns)
        if not self.gt_actions:
            raise ValueError("gt_actions must be non-empty")
        if self.turns[5].text != format_ranked_actions(self.gt_actions):
            raise ValueError("final assistant turn must equal the formatted gt_actions")


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[Sample, ...]
    test: tuple[Sample, ...]
    split_seed: int


def _validate_turns(turns: Sequence[ConversationTurn]) -> None:
    if len(turns) != 6:
        raise ValueError(f"sample must have exactly 6 turns, got {len(turns)}")
    for i, turn in enumerate(turns):
        expected = "user" if i % 2 == 0 else "assistant"
        if turn.role != expected:
            raise ValueError(f"turn {i} must have role {expected}, got {turn.role!r}")


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def build_sample(seed: int, target: DifficultyLevel | None = None,
                 config: RolloutConfig = RolloutConfig(),
                 params: SfmParams = SfmParams(),
                 image_dir: Path | str | None = None,
                 pixels_per_meter: int = 10) -> Sample:
    """Generate, label, and script one benchmark sample.

    When image_dir is given, the top-down raster is written there as
    <id>.ppm and the sample records the path relative to the directory's
    parent (so a corpus saved next to the directory stays relocatable).
    """
    scene = generate_scene(seed, target)
    sample_id = f"s{seed & _MASK64:016x}"
    trajs = predict_trajectories(scene, config.horizon, params)
    gt = rank_actions(scene, config, params, trajs=trajs)
    turns = (
        ConversationTurn("user", USER_QUESTIONS[0]),
        ConversationTurn("assistant", describe_scene(scene)),
        ConversationTurn("user", USER_QUESTIONS[1]),
        ConversationTurn("assistant", describe_predictions(trajs, scene)),
        ConversationTurn("user", USER_QUESTIONS[2]),
        ConversationTurn("assistant", format_ranked_actions(gt)),
    )
    image_path = None
    if image_dir is not None:
        image_dir = Path(image_dir)
        image_dir.mkdir(parents=True, exist_ok=True)
        raster = render_topdown(scene, pixels_per_meter, auto_extent(scene))
        _atomic_write_bytes(image_dir / f"{sample_id}.ppm", raster)
        image_path = f"{image_dir.name}/{sample_id}.ppm"
    return Sample(
        id=sample_id,
        scene=scene,
        difficulty=classify_difficulty(scene),
        turns=turns,
        gt_actions=gt,
        image_path=image_path,
    )


def _mix_counts(n_total: int, mix: Sequence[float]) -> tuple[int, int, int]:
    if len(mix) != 3:
        raise ValueError("difficulty mix needs exactly three proportions")
    if abs(sum(mix) - 1.0) > 1e-6:
        raise ValueError(f"difficulty mix must sum to 1, got {sum(mix)}")
    raw = [n_total * p for p in mix]
    counts = [int(f) for f in raw]
    # largest remainder keeps every level within one sample of its target
    remainders = sorted(range(3), key=lambda i: (raw[i] - counts[i], i), reverse=True)
    for i in range(n_total - sum(counts)):
        counts[remainders[i % 3]] += 1
    return tuple(counts)


def build_corpus(n_total: int, base_seed: int,
                 difficulty_mix: Sequence[float] = DEFAULT_DIFFICULTY_MIX,
                 config: RolloutConfig = RolloutConfig(),
                 params: SfmParams = SfmParams(),
                 image_dir: Path | str | None = None,
                 pixels_per_meter: int = 10) -> list[Sample]:
    """Build n_total samples hitting the requested difficulty mix within one each."""
    if n_total < 1:
        raise ValueError("n_total must be at least 1")
    counts = _mix_counts(n_total, difficulty_mix)
    samples: list[Sample] = []
    state = base_seed & _MASK64
    for level, count in zip(_LEVELS, counts):
        for _ in range(count):
            state, child_seed = splitmix64(state)
            samples.append(
                build_sample(child_seed, level, config, params,
                             image_dir=image_dir, pixels_per_meter=pixels_per_meter)
            )
    return samples


def split_corpus(samples: Sequence[Sample], test_count: int, seed: int) -> DatasetSplit:
    """Seeded uniform selection without replacement, stable across platforms.

    A SplitMix64 stream assigns one key per id in sorted-id order; the
    test_count smallest (key, id) pairs form the test side.
    """
    if not 0 < test_count < len(samples):
        raise ValueError(
            f"test_count must be in (0, {len(samples)}), got {test_count}"
        )
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise ValueError("sample ids must be unique before splitting")
    state = seed & _MASK64
    keys: dict[str, int] = {}
    for sid in sorted(ids):
        state, keys[sid] = splitmix64(state)
    test_ids = set(sorted(ids, key=lambda sid: (keys[sid], sid))[:test_count])
    train = tuple(s for s in samples if s.id not in test_ids)
    test = tuple(s for s in samples if s.id in test_ids)
    return DatasetSplit(train=train, test=test, split_seed=seed)


# ---------------------------------------------------------------------------
# JSONL persistence


def sample_to_dict(sample: Sample) -> dict:
    return {
        "id": sample.id,
        "difficulty": {
            "level": sample.difficulty.level.value,
            "scores": list(sample.difficulty.factor_scores),
        },
        "scene": scene_to_dict(sample.scene),
        "image": sample.image_path,
        "turns": [{"role": t.role, "text": t.text} for t in sample.turns],
        "gt_actions": [a.value for a in sample.gt_actions],
    }


_ACTION_BY_LABEL = {a.value: a for a in Action}
_LEVEL_BY_NAME = {lv.value: lv for lv in DifficultyLevel}


def sample_from_dict(data: dict) -> Sample:
    try:
        level = _LEVEL_BY_NAME[data["difficulty"]["level"]]
        scores = tuple(int(v) for v in data["difficulty"]["scores"])
        scene = scene_from_dict(data["scene"])
        turns = tuple(
            ConversationTurn(t["role"], t["text"]) for t in data["turns"]
        )
        gt = []
        for label in data["gt_actions"]:
            if label not in _ACTION_BY_LABEL:
                raise ValueError(f"gt_actions: unknown action label {label!r}")
            gt.append(_ACTION_BY_LABEL[label])
        return Sample(
            id=data["id"],
            scene=scene,
            difficulty=Difficulty(level, scores),
            turns=turns,
            gt_actions=gt,
            image_path=data.get("image"),
        )
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from exc


def _header_dict(config: RolloutConfig, params: SfmParams) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "rollout_config": config.to_dict(),
        "sfm_params": params.to_dict(),
    }


def save_jsonl(samples: Sequence[Sample], path: Path | str,
               config: RolloutConfig = RolloutConfig(),
               params: SfmParams = SfmParams()) -> None:
    """Write header line plus one JSON object per sample, atomically."""
    path = Path(path)
    lines = [json.dumps(_header_dict(config, params), ensure_ascii=False)]
    lines.extend(
        json.dumps(sample_to_dict(s), ensure_ascii=False) for s in samples
    )
    _atomic_write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))


def load_jsonl(path: Path | str,
               revalidate: bool = False) -> tuple[list[Sample], RolloutConfig, SfmParams]:
    """Load and validate a corpus; optionally re-run the labeling oracle.

    Structural problems raise DatasetFormatError naming the offending line.
    With revalidate=True every sample's gt_actions is recomputed under the
    header configuration and must match exactly.
    """
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise DatasetFormatError("line 1: header: file is empty")
        try:
            header = json.loads(first)
            if header.get("format_version") != FORMAT_VERSION:
                raise ValueError(
                    f"unsupported format_version {header.get('format_version')!r}"
                )
            config = RolloutConfig.from_dict(header["rollout_config"])
            params = SfmParams.from_dict(header["sfm_params"])
        except (ValueError, KeyError, TypeError) as exc:
            raise DatasetFormatError(f"line 1: header: {exc}") from exc

        samples: list[Sample] = []
        seen_ids: set[str] = set()
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {line_no}: not valid JSON: {exc}") from exc
            try:
                sample = sample_from_dict(data)
            except (ValueError, TypeError) as exc:
                raise DatasetFormatError(f"line {line_no}: {exc}") from exc
            if sample.id in seen_ids:
                raise DatasetFormatError(f"line {line_no}: id: duplicate {sample.id!r}")
            seen_ids.add(sample.id)
            recomputed = classify_difficulty(sample.scene)
            if recomputed != sample.difficulty:
                raise DatasetFormatError(
                    f"line {line_no}: difficulty: recorded "
                    f"{sample.difficulty.level.value} does not match the scene"
                )
            samples.append(sample)
    if revalidate:
        revalidate_samples(samples, config, params)
    return samples, config, params


def revalidate_samples(samples: Sequence[Sample], config: RolloutConfig,
                       params: SfmParams) -> None:
    """Re-run the ranking oracle on every scene and demand exact agreement."""
    for sample in samples:
        expected = rank_actions(sample.scene, config, params)
        if expected != sample.gt_actions:
            raise DatasetFormatError(
                f"sample {sample.id}: gt_actions: oracle produced "
                f"{[a.value for a in expected]} but file records "
                f"{[a.value for a in sample.gt_actions]}"
            )


def strip_images(samples: Sequence[Sample]) -> list[Sample]:
    """Copies with image_path cleared (for corpora saved without rasters)."""
    return [replace(s, image_path=None) for s in samples]
