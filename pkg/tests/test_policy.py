"""Baseline policies, the run wrapper, and the remote client."""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import pytest

from socnav.actions import ALL_ACTIONS, Action, format_ranked_actions, parse_ranked_actions
from socnav.dataset import ConversationTurn, Sample, build_corpus, build_sample
from socnav.policy import (
    ConfigurationError,
    EndpointError,
    GreedyForwardPolicy,
    NoisyOraclePolicy,
    OraclePolicy,
    RemoteEndpointConfig,
    RemotePolicy,
    TransportError,
    make_policy,
    remote_complete,
    run_policy,
)
from socnav.prompts import PromptConfig, build_system_prompt

from .stub_endpoint import StubEndpoint


def sample_with_gt(gt, sample_id="fixture"):
    base = build_sample(4)
    turns = list(base.turns)
    turns[5] = ConversationTurn("assistant", format_ranked_actions(gt))
    return Sample(
        id=sample_id,
        scene=base.scene,
        difficulty=base.difficulty,
        turns=tuple(turns),
        gt_actions=tuple(gt),
        image_path=None,
    )


def test_oracle_policy_matches_ground_truth():
    for sample in build_corpus(5, 17):
        out = run_policy(OraclePolicy(), sample)
        assert out.actions == sample.gt_actions
        assert out.error is None
        assert out.latency >= 0.0


def test_greedy_policy_constant():
    sample = build_sample(3)
    out = run_policy(GreedyForwardPolicy(), sample)
    assert out.raw_text == "1.Move forward"
    assert out.actions == (Action.MOVE_FORWARD,)


def test_run_policy_parses_its_own_raw_text():
    sample = build_sample(6)
    out = run_policy(OraclePolicy(), sample)
    assert out.actions == parse_ranked_actions(out.raw_text)


def test_run_policy_swallows_policy_exceptions():
    class FailingPolicy:
        name = "boom"

        def respond(self, sample, system_prompt=None):
            raise RuntimeError("scripted failure")

    out = run_policy(FailingPolicy(), build_sample(1))
    assert out.actions == ()
    assert out.raw_text == ""
    assert "scripted failure" in out.error


def test_noisy_oracle_epsilon_zero_is_identity():
    policy = NoisyOraclePolicy(0.0, seed=5)
    for sample in build_corpus(6, 2):
        assert run_policy(policy, sample).actions == sample.gt_actions


def test_noisy_oracle_epsilon_one_always_corrupts():
    policy = NoisyOraclePolicy(1.0, seed=5)
    for sample in build_corpus(6, 2):
        assert run_policy(policy, sample).actions != sample.gt_actions


def test_noisy_oracle_full_ground_truth_drops_an_action():
    sample = sample_with_gt(ALL_ACTIONS)
    out = run_policy(NoisyOraclePolicy(1.0, seed=1), sample)
    assert len(out.actions) == 5
    assert set(out.actions) < set(ALL_ACTIONS)


def test_noisy_oracle_corruption_fraction():
    policy = NoisyOraclePolicy(0.3, seed=11)
    oracle = OraclePolicy()
    base = sample_with_gt((Action.MOVE_FORWARD, Action.TURN_LEFT))
    corrupted = 0
    n = 1000
    for i in range(n):
        sample = replace(base, id=f"sample-{i}")
        if run_policy(policy, sample).raw_text != oracle.respond(sample):
            corrupted += 1
    assert 0.25 <= corrupted / n <= 0.35


def test_noisy_oracle_order_independent():
    policy = NoisyOraclePolicy(0.5, seed=3)
    samples = build_corpus(8, 13)
    forward = [run_policy(policy, s).raw_text for s in samples]
    backward = [run_policy(policy, s).raw_text for s in reversed(samples)]
    assert forward == list(reversed(backward))


def test_make_policy_specs():
    assert isinstance(make_policy("oracle"), OraclePolicy)
    assert isinstance(make_policy("greedy"), GreedyForwardPolicy)
    noisy = make_policy("noisy:0.25:7")
    assert isinstance(noisy, NoisyOraclePolicy)
    assert noisy.epsilon == 0.25 and noisy.seed == 7
    with pytest.raises(ValueError):
        make_policy("nonsense")
    with pytest.raises(ValueError):
        make_policy("remote")


# ---------------------------------------------------------------------------
# remote client against the scripted local endpoint


def remote_config(stub, **overrides):
    defaults = dict(
        base_url=stub.base_url,
        model_name="stub-model",
        api_key_env="SOCNAV_TEST_KEY",
        timeout=5.0,
        max_retries=3,
        max_in_flight=4,
    )
    defaults.update(overrides)
    return RemoteEndpointConfig(**defaults)


def test_remote_echo(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    with StubEndpoint() as stub:
        stub.directives.append(("reply", "1.Stop"))
        text = remote_complete(remote_config(stub), "", [("user", "hello")])
        assert text == "1.Stop"


def test_remote_missing_api_key_never_touches_network(monkeypatch):
    monkeypatch.delenv("SOCNAV_TEST_KEY", raising=False)
    with StubEndpoint() as stub:
        with pytest.raises(ConfigurationError):
            remote_complete(remote_config(stub), "", [("user", "hello")])
        assert stub.requests == []


def test_remote_backoff_recovers_from_429(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    with StubEndpoint() as stub:
        stub.directives.extend([("status", 429), ("status", 429), ("reply", "1.Stop")])
        start = time.perf_counter()
        text = remote_complete(remote_config(stub), "", [("user", "go")])
        elapsed = time.perf_counter() - start
        assert text == "1.Stop"
        assert len(stub.requests) == 3
        assert elapsed >= 3.0  # 1s + 2s backoff before the third attempt


def test_remote_exhausted_retries_raise_transport_error(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    with StubEndpoint() as stub:
        stub.directives.extend([("status", 503), ("status", 503)])
        with pytest.raises(TransportError):
            remote_complete(remote_config(stub, max_retries=1), "", [("user", "go")])


def test_remote_non_retryable_status_raises_endpoint_error(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    with StubEndpoint() as stub:
        stub.directives.append(("status", 400))
        with pytest.raises(EndpointError) as info:
            remote_complete(remote_config(stub), "", [("user", "go")])
        assert info.value.status == 400
        assert "scripted error" in info.value.body_excerpt
        assert len(stub.requests) == 1  # no retry on a definitive answer


def test_remote_timeout_becomes_degenerate_output(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    sample = build_sample(2)
    with StubEndpoint() as stub:
        stub.directives.extend([("sleep", 2.0)])
        policy = RemotePolicy(remote_config(stub, timeout=0.3, max_retries=0))
        out = run_policy(policy, sample)
        assert out.actions == ()
        assert out.error is not None
        assert out.latency >= 0.3


def test_remote_single_shot_sends_constrained_prompt_and_system(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    sample = build_sample(2)
    prompt = build_system_prompt(PromptConfig(True, "ai"))
    with StubEndpoint() as stub:
        stub.directives.append(("echo",))
        policy = RemotePolicy(remote_config(stub), mode="single_shot")
        out = run_policy(policy, sample, prompt)
        assert "Output exactly one line" in out.raw_text
        request = stub.requests[0]
        assert request["model"] == "stub-model"
        assert request["messages"][0]["role"] == "system"
        assert "Set 90 as the minimum passing threshold" in request["messages"][0]["content"]


def test_remote_conversational_withholds_assistant_turns(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    sample = build_sample(2)
    with StubEndpoint() as stub:
        stub.directives.extend([("reply", "I see a scene."),
                                ("reply", "They will keep walking."),
                                ("reply", "1.Stop")])
        policy = RemotePolicy(remote_config(stub), mode="conversational")
        out = run_policy(policy, sample)
        assert out.raw_text == "1.Stop"
        assert len(stub.requests) == 3
        final_messages = stub.requests[-1]["messages"]
        texts = [m["content"] for m in final_messages if isinstance(m["content"], str)]
        assert "I see a scene." in texts  # the model's own words, not the dataset's
        assert sample.turns[1].text not in texts


def test_remote_image_rides_first_user_message(monkeypatch, tmp_path):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    sample = build_sample(2, image_dir=tmp_path / "images")
    with StubEndpoint() as stub:
        policy = RemotePolicy(remote_config(stub), image_root=tmp_path)
        run_policy(policy, sample)
        content = stub.requests[0]["messages"][-1]["content"]
        kinds = [part["type"] for part in content]
        assert kinds == ["text", "image_url"]
        assert content[1]["image_url"]["url"].startswith(
            "data:image/x-portable-pixmap;base64,"
        )


def test_remote_records_request_response_pairs(monkeypatch, tmp_path):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    record = tmp_path / "record.jsonl"
    sample = build_sample(2)
    with StubEndpoint() as stub:
        policy = RemotePolicy(remote_config(stub), record_path=record)
        run_policy(policy, sample)
    lines = [json.loads(l) for l in record.read_text().splitlines()]
    assert len(lines) == 1
    assert lines[0]["request"]["model"] == "stub-model"
    assert lines[0]["response"]["text"] == "1.Stop"


def test_remote_respects_max_in_flight(monkeypatch):
    monkeypatch.setenv("SOCNAV_TEST_KEY", "k")
    samples = [replace(build_sample(2), id=f"s{i}") for i in range(8)]
    with StubEndpoint() as stub:
        stub.directives.extend([("sleep", 0.15)] * 8)
        policy = RemotePolicy(remote_config(stub, max_in_flight=2))
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(lambda s: run_policy(policy, s), samples))
        assert stub.max_in_flight_seen <= 2
