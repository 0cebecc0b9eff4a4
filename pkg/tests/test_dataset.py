"""Sample construction, corpus mixing, splitting, and JSONL round-trips."""

import json
import os
import subprocess
import sys
from collections import Counter

import pytest

from socnav.dataset import (
    DatasetFormatError,
    Sample,
    build_corpus,
    build_sample,
    load_jsonl,
    sample_to_dict,
    save_jsonl,
    split_corpus,
    splitmix64,
)
from socnav.oracle import RolloutConfig
from socnav.pedsim import SfmParams
from socnav.scenario import DifficultyLevel

EMPTY_SCENE_SEED = 140  # no pedestrians, no obstacles (checked below)


def test_build_sample_structure():
    sample = build_sample(42)
    assert len(sample.turns) == 6
    roles = [t.role for t in sample.turns]
    assert roles == ["user", "assistant"] * 3
    assert sample.turns[5].text.startswith("1.")
    assert sample.gt_actions


def test_build_sample_deterministic():
    a = build_sample(42)
    b = build_sample(42)
    assert json.dumps(sample_to_dict(a)) == json.dumps(sample_to_dict(b))


def test_empty_scene_sample_leads_with_forward():
    sample = build_sample(EMPTY_SCENE_SEED)
    assert not sample.scene.pedestrians
    assert not sample.scene.obstacles
    assert sample.turns[5].text.startswith("1.Move forward")


def test_splitmix64_reference_values():
    # first outputs for state 0 of the standard SplitMix64 sequence
    state, first = splitmix64(0)
    state, second = splitmix64(state)
    assert first == 0xE220A8397B1DCDAF
    assert second == 0x6E789E6AA1B965F4


def test_corpus_counts_and_mix():
    corpus = build_corpus(50, 123, difficulty_mix=(0.4, 0.4, 0.2))
    assert len(corpus) == 50
    counts = Counter(s.difficulty.level for s in corpus)
    assert counts[DifficultyLevel.EASY] == 20
    assert counts[DifficultyLevel.MEDIUM] == 20
    assert counts[DifficultyLevel.DIFFICULT] == 10
    assert len({s.id for s in corpus}) == 50


def test_corpus_deterministic():
    a = build_corpus(12, 5)
    b = build_corpus(12, 5)
    assert [s.id for s in a] == [s.id for s in b]
    assert a == b


def test_corpus_bytes_stable_across_processes(tmp_path):
    # different hash seeds catch any hidden reliance on set/dict ordering
    script = (
        "import sys\n"
        "from socnav.dataset import build_corpus, save_jsonl, split_corpus\n"
        "corpus = build_corpus(10, 99)\n"
        "split = split_corpus(corpus, 3, 42)\n"
        "save_jsonl(list(split.test) + list(split.train), sys.argv[1])\n"
    )
    outputs = []
    for i, hash_seed in enumerate(("0", "31337")):
        out = tmp_path / f"c{i}.jsonl"
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        subprocess.run([sys.executable, "-c", script, str(out)],
                       check=True, env=env)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_corpus_rejects_bad_mix():
    with pytest.raises(ValueError):
        build_corpus(10, 0, difficulty_mix=(0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        build_corpus(0, 0)


def test_corpus_of_one():
    corpus = build_corpus(1, 77, difficulty_mix=(1.0, 0.0, 0.0))
    assert len(corpus) == 1
    assert corpus[0].difficulty.level is DifficultyLevel.EASY


def test_split_counts_and_determinism():
    corpus = build_corpus(40, 9)
    split = split_corpus(corpus, 8, seed=77)
    assert len(split.train) == 32
    assert len(split.test) == 8
    train_ids = {s.id for s in split.train}
    test_ids = {s.id for s in split.test}
    assert not train_ids & test_ids
    assert train_ids | test_ids == {s.id for s in corpus}
    again = split_corpus(corpus, 8, seed=77)
    assert [s.id for s in again.test] == [s.id for s in split.test]
    different = split_corpus(corpus, 8, seed=78)
    assert {s.id for s in different.test} != test_ids


def test_split_boundaries():
    corpus = build_corpus(5, 3)
    assert len(split_corpus(corpus, 4, 0).train) == 1
    with pytest.raises(ValueError):
        split_corpus(corpus, 0, 0)
    with pytest.raises(ValueError):
        split_corpus(corpus, 5, 0)


def test_jsonl_round_trip(tmp_path):
    corpus = build_corpus(8, 21)
    path = tmp_path / "corpus.jsonl"
    save_jsonl(corpus, path)
    loaded, config, params = load_jsonl(path)
    assert loaded == corpus
    assert config == RolloutConfig()
    assert params == SfmParams()


def test_jsonl_header_carries_custom_config(tmp_path):
    config = RolloutConfig(horizon=1.5, comfort_distance=0.9)
    params = SfmParams(desired_speed=1.1, dt=0.1)
    corpus = [build_sample(3, config=config, params=params)]
    path = tmp_path / "c.jsonl"
    save_jsonl(corpus, path, config, params)
    _loaded, config2, params2 = load_jsonl(path, revalidate=True)
    assert config2 == config
    assert params2 == params


def _rewrite_line(path, line_no, mutate):
    lines = path.read_text().splitlines()
    data = json.loads(lines[line_no - 1])
    mutate(data)
    lines[line_no - 1] = json.dumps(data)
    path.write_text("\n".join(lines) + "\n")


def test_load_reports_malformed_json_line(tmp_path):
    path = tmp_path / "c.jsonl"
    save_jsonl(build_corpus(3, 2), path)
    lines = path.read_text().splitlines()
    lines[2] = "{not json"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DatasetFormatError, match="line 3"):
        load_jsonl(path)


def test_load_rejects_five_turn_sample(tmp_path):
    path = tmp_path / "c.jsonl"
    save_jsonl(build_corpus(3, 2), path)
    _rewrite_line(path, 3, lambda d: d["turns"].pop())
    with pytest.raises(DatasetFormatError, match="line 3"):
        load_jsonl(path)


def test_load_rejects_final_turn_mismatch(tmp_path):
    path = tmp_path / "c.jsonl"
    save_jsonl(build_corpus(3, 2), path)

    def corrupt(d):
        d["turns"][5]["text"] = "1.Stop"
        if d["gt_actions"] == ["Stop"]:
            d["turns"][5]["text"] = "1.Move forward"

    _rewrite_line(path, 2, corrupt)
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_jsonl(path)


def test_load_rejects_unknown_action_label(tmp_path):
    path = tmp_path / "c.jsonl"
    save_jsonl(build_corpus(2, 2), path)

    def corrupt(d):
        d["gt_actions"][0] = "Fly up"
        d["turns"][5]["text"] = "1.Fly up"

    _rewrite_line(path, 2, corrupt)
    with pytest.raises(DatasetFormatError, match="line 2"):
        load_jsonl(path)


def test_revalidation_catches_reordered_ground_truth(tmp_path):
    corpus = build_corpus(6, 11)
    target = next(s for s in corpus if len(s.gt_actions) >= 2)
    path = tmp_path / "c.jsonl"
    save_jsonl(corpus, path)
    line_no = corpus.index(target) + 2

    def swap_first_two(d):
        d["gt_actions"][0], d["gt_actions"][1] = d["gt_actions"][1], d["gt_actions"][0]
        labels = d["gt_actions"]
        d["turns"][5]["text"] = " ".join(
            f"{i}.{label}" for i, label in enumerate(labels, start=1)
        )

    _rewrite_line(path, line_no, swap_first_two)
    loaded, config, params = load_jsonl(path)  # structurally fine
    with pytest.raises(DatasetFormatError, match="oracle"):
        load_jsonl(path, revalidate=True)


def test_loaded_corpus_revalidates(tmp_path):
    corpus = build_corpus(10, 31)
    path = tmp_path / "c.jsonl"
    save_jsonl(corpus, path)
    loaded, config, params = load_jsonl(path, revalidate=True)
    assert [s.gt_actions for s in loaded] == [s.gt_actions for s in corpus]


def test_sample_rejects_header_mismatch_and_bad_turns():
    sample = build_sample(4)
    with pytest.raises(ValueError):
        Sample(
            id="x",
            scene=sample.scene,
            difficulty=sample.difficulty,
            turns=sample.turns[:4],
            gt_actions=sample.gt_actions,
        )
    with pytest.raises(ValueError):
        Sample(
            id="x",
            scene=sample.scene,
            difficulty=sample.difficulty,
            turns=sample.turns,
            gt_actions=(),
        )


def test_build_sample_writes_image(tmp_path):
    sample = build_sample(5, image_dir=tmp_path / "images")
    assert sample.image_path == f"images/{sample.id}.ppm"
    raster = (tmp_path / "images" / f"{sample.id}.ppm").read_bytes()
    assert raster.startswith(b"P6\n")
