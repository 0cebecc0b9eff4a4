"""Command-line front door and shared evaluation machinery.

Subcommands: ``generate`` (corpus + rasters + manifest), ``eval`` (score one
policy against a corpus), ``ablate`` (one evaluation per prompt config), and
``report`` (merge score files from the same corpus into a comparison table).
All outputs are written atomically; reports carry a content digest of their
corpus so unrelated runs cannot be merged.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .dataset import (
    DEFAULT_DIFFICULTY_MIX,
    Sample,
    _atomic_write_bytes,
    build_corpus,
    load_jsonl,
    save_jsonl,
)
from .metrics import (
    METRIC_COLUMNS,
    AggregateReport,
    SampleScore,
    aggregate,
    render_csv,
    render_markdown,
    score_sample,
)
from .oracle import RolloutConfig
from .pedsim import SfmParams
from .policy import (
    PolicyOutput,
    RemoteEndpointConfig,
    make_policy,
    run_policy,
)
from .prompts import (
    PromptConfig,
    SystemPrompt,
    ablation_grid,
    build_system_prompt,
    constrained_zero_shot_prompt,
    prompt_config_from_token,
)


@dataclass(frozen=True)
class RunManifest:
    dataset: str
    dataset_hash: str | None
    policy: str
    prompt: str
    seed: int | None
    jobs: int
    timestamp: str
    tool_version: str

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "dataset_hash": self.dataset_hash,
            "policy": self.policy,
            "prompt": self.prompt,
            "seed": self.seed,
            "jobs": self.jobs,
            "timestamp": self.timestamp,
            "tool_version": self.tool_version,
        }


def dataset_hash(path: Path | str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def evaluate_samples(samples: Sequence[Sample], policy,
                     system_prompt: SystemPrompt | None = None,
                     jobs: int = 1) -> tuple[list[PolicyOutput], list[SampleScore], float]:
    """Run a policy over samples (optionally in parallel) and score each reply.

    Returns outputs and scores in corpus order plus the summed per-sample
    policy wall-clock time, which is what throughput is computed from.
    """
    if jobs <= 1:
        outputs = [run_policy(policy, s, system_prompt) for s in samples]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(lambda s: run_policy(policy, s, system_prompt), samples))
    scores = [score_sample(o.actions, s.gt_actions) for o, s in zip(outputs, samples)]
    total_seconds = sum(o.latency for o in outputs)
    return outputs, scores, total_seconds


def _score_lines(samples: Sequence[Sample], outputs: Sequence[PolicyOutput],
                 scores: Sequence[SampleScore]) -> list[dict]:
    return [
        {
            "id": s.id,
            "difficulty": s.difficulty.level.value,
            "raw_text": o.raw_text,
            "pred": [a.value for a in o.actions],
            "latency": o.latency,
            "error": o.error,
            "scores": sc.as_dict(),
        }
        for s, o, sc in zip(samples, outputs, scores)
    ]


def _write_json(path: Path, obj: dict) -> None:
    _atomic_write_bytes(path, (json.dumps(obj, indent=2) + "\n").encode("utf-8"))


def _write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _write_scores(path: Path, header: dict, lines: Sequence[dict]) -> None:
    payload = [json.dumps(header, ensure_ascii=False)]
    payload.extend(json.dumps(line, ensure_ascii=False) for line in lines)
    _atomic_write_bytes(path, ("\n".join(payload) + "\n").encode("utf-8"))


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(n: int, seed: int, mix: Sequence[float], out_dir: Path | str,
                 pixels_per_meter: int = 10,
                 config: RolloutConfig = RolloutConfig(),
                 params: SfmParams = SfmParams()) -> Path:
    """Write corpus.jsonl, images/, and manifest.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = build_corpus(
        n, seed, mix, config, params,
        image_dir=out / "images", pixels_per_meter=pixels_per_meter,
    )
    corpus_path = out / "corpus.jsonl"
    save_jsonl(samples, corpus_path, config, params)
    manifest = RunManifest(
        dataset=str(corpus_path),
        dataset_hash=dataset_hash(corpus_path),
        policy="",
        prompt="",
        seed=seed,
        jobs=1,
        timestamp=_now(),
        tool_version=__version__,
    )
    _write_json(out / "manifest.json", manifest.to_dict())
    return corpus_path


def cmd_eval(data: Path | str, policy_spec: str, prompt_token: str = "none",
             jobs: int = 1, out_dir: Path | str | None = None,
             remote_config: RemoteEndpointConfig | None = None,
             mode: str = "single_shot",
             record_path: Path | str | None = None) -> AggregateReport:
    """Validate the corpus, evaluate one policy, and write score + report files."""
    data = Path(data)
    samples, config, params = load_jsonl(data, revalidate=True)
    policy = make_policy(policy_spec, remote_config, mode=mode,
                         image_root=data.parent, record_path=record_path)
    system_prompt = build_system_prompt(prompt_config_from_token(prompt_token))

    outputs, scores, total_seconds = evaluate_samples(samples, policy, system_prompt, jobs)
    difficulties = [s.difficulty.level.value for s in samples]
    report = aggregate(scores, total_seconds or None, difficulties)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        digest = dataset_hash(data)
        label = f"{policy.name} ({prompt_token})"
        header = {
            "dataset": str(data),
            "dataset_hash": digest,
            "policy": policy.name,
            "prompt": prompt_token,
            "tool_version": __version__,
        }
        _write_scores(out / "scores.jsonl", header,
                      _score_lines(samples, outputs, scores))
        _write_text(out / "report.md",
                    render_markdown([(label, report)])
                    + "\n"
                    + render_markdown([(label, report)], per_difficulty=True))
        _write_text(out / "report.csv", render_csv([(label, report)]))
        _write_text(out / "report_by_difficulty.csv",
                    render_csv([(label, report)], per_difficulty=True))
        manifest = RunManifest(
            dataset=str(data),
            dataset_hash=digest,
            policy=policy_spec,
            prompt=prompt_token,
            seed=None,
            jobs=jobs,
            timestamp=_now(),
            tool_version=__version__,
        )
        _write_json(out / "manifest.json", manifest.to_dict())
    return report


def _checkmark_cells(config: PromptConfig) -> list[str]:
    return [
        "x" if config.use_meta else "",
        "x" if config.competitor == "human" else "",
        "x" if config.competitor == "self" else "",
        "x" if config.competitor == "ai" else "",
    ]


def ablation_markdown(results: Sequence[tuple[PromptConfig, AggregateReport]]) -> str:
    """Check-mark grid plus the five metric means, one row per config."""
    header = ["Meta", "Com-human", "Com-self", "Com-ai", *METRIC_COLUMNS]
    md = ["| " + " | ".join(header) + " |",
          "|" + "|".join("---" for _ in header) + "|"]
    for prompt_config, report in results:
        cells = _checkmark_cells(prompt_config)
        cells.extend(f"{v:.3f}" for v in report.overall.as_tuple())
        md.append("| " + " | ".join(cells) + " |")
    return "\n".join(md) + "\n"


def cmd_ablate(data: Path | str, policy_spec: str,
               grid: Sequence[PromptConfig] | None = None,
               jobs: int = 1, out_dir: Path | str | None = None,
               remote_config: RemoteEndpointConfig | None = None,
               mode: str = "single_shot") -> list[tuple[PromptConfig, AggregateReport]]:
    """One evaluation per prompt config over a shared corpus; emit a grid table."""
    data = Path(data)
    samples, config, params = load_jsonl(data, revalidate=True)
    if grid is None:
        grid = ablation_grid()
    if not grid:
        raise ValueError("ablation grid must be non-empty")
    policy = make_policy(policy_spec, remote_config, mode=mode, image_root=data.parent)

    results = []
    for prompt_config in grid:
        system_prompt = build_system_prompt(prompt_config)
        _outputs, scores, _secs = evaluate_samples(samples, policy, system_prompt, jobs)
        results.append((prompt_config, aggregate(scores)))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_text(out / "ablation.md", ablation_markdown(results))
        payload = {
            "dataset_hash": dataset_hash(data),
            "policy": policy.name,
            "rows": [
                {"prompt": pc.token(), "use_meta": pc.use_meta,
                 "competitor": pc.competitor,
                 "means": dict(zip(("pred_at_1", "pred_at_n", "apg", "maa", "er"),
                                   report.overall.as_tuple()))}
                for pc, report in results
            ],
        }
        _write_json(out / "ablation.json", payload)
    return results


def cmd_prompts(token: str | None = None) -> str:
    """Render prompt texts for audit: one token, or the whole grid."""

    def block(name: str, text: str) -> str:
        body = text if text else "(empty: no system prompt)"
        return f"=== {name} ===\n{body}\n"

    if token == "constrained":
        return constrained_zero_shot_prompt() + "\n"
    if token is not None:
        return build_system_prompt(prompt_config_from_token(token)).text + "\n"
    blocks = [
        block(config.token(), build_system_prompt(config).text)
        for config in ablation_grid()
    ]
    blocks.append(block("constrained", constrained_zero_shot_prompt()))
    return "\n".join(blocks)


def load_score_file(path: Path | str) -> tuple[dict, list[dict]]:
    """Read one scores.jsonl produced by cmd_eval: (header, per-sample lines)."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        lines = [json.loads(line) for line in fh if line.strip()]
    return header, lines


def cmd_report(score_files: Sequence[Path | str],
               out_path: Path | str | None = None) -> str:
    """Merge runs sharing a dataset hash into one comparison table."""
    if not score_files:
        raise ValueError("no score files given")
    entries = []
    reference_hash = None
    for path in score_files:
        header, lines = load_score_file(path)
        digest = header.get("dataset_hash")
        if reference_hash is None:
            reference_hash = digest
        elif digest != reference_hash:
            raise ValueError(
                f"{path}: dataset hash {digest!r} does not match {reference_hash!r}; "
                "refusing to merge runs from different corpora"
            )
        scores = [SampleScore(**line["scores"]) for line in lines]
        total = sum(line["latency"] for line in lines)
        difficulties = [line["difficulty"] for line in lines]
        label = f"{header.get('policy', '?')} ({header.get('prompt', '?')})"
        entries.append((label, aggregate(scores, total or None, difficulties)))
    table = render_markdown(entries)
    if out_path is not None:
        _write_text(Path(out_path), table)
    return table


# ---------------------------------------------------------------------------
# argument parsing


def _parse_mix(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("mix must be three comma-separated numbers")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socnav",
        description="Multi-action social-navigation benchmark toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="synthesize a labeled corpus")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mix", type=_parse_mix, default=DEFAULT_DIFFICULTY_MIX,
                   metavar="E,M,D", help="difficulty proportions, summing to 1")
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--ppm", type=int, default=10, help="raster pixels per meter")

    e = sub.add_parser("eval", help="score a policy against a corpus")
    e.add_argument("--data", type=Path, required=True)
    e.add_argument("--policy", required=True,
                   help="oracle | greedy | noisy:EPS[:SEED] | remote")
    e.add_argument("--prompt", default="none",
                   help="none | meta | com-{human,self,ai} | mcp-{human,self,ai}")
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out", type=Path, required=True)
    e.add_argument("--mode", choices=("single_shot", "conversational"),
                   default="single_shot")
    e.add_argument("--base-url", default=None)
    e.add_argument("--model", default=None)
    e.add_argument("--api-key-env", default="SOCNAV_API_KEY")
    e.add_argument("--timeout", type=float, default=30.0)
    e.add_argument("--retries", type=int, default=3)
    e.add_argument("--max-in-flight", type=int, default=4)
    e.add_argument("--record", type=Path, default=None,
                   help="append raw request/response pairs to this JSONL file")

    a = sub.add_parser("ablate", help="evaluate a grid of prompt configs")
    a.add_argument("--data", type=Path, required=True)
    a.add_argument("--policy", required=True)
    a.add_argument("--grid", type=Path, default=None,
                   help="JSON list of {use_meta, competitor}; default: the 8-row grid")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--out", type=Path, default=None)

    r = sub.add_parser("report", help="merge score files into one table")
    r.add_argument("files", nargs="+", type=Path)
    r.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("prompts", help="print system prompt texts for audit")
    p.add_argument("--prompt", default=None,
                   help="one token (none|meta|com-*|mcp-*|constrained); "
                        "default prints the whole grid")
    return parser


def _remote_config_from_args(args) -> RemoteEndpointConfig | None:
    if args.policy != "remote":
        return None
    if not args.base_url or not args.model:
        raise ValueError("remote policy requires --base-url and --model")
    return RemoteEndpointConfig(
        base_url=args.base_url,
        model_name=args.model,
        api_key_env=args.api_key_env,
        timeout=args.timeout,
        max_retries=args.retries,
        max_in_flight=args.max_in_flight,
    )


def _load_grid(path: Path | None) -> Sequence[PromptConfig] | None:
    if path is None:
        return None
    data = json.loads(path.read_text(encoding="utf-8"))
    return [PromptConfig(bool(row["use_meta"]), row["competitor"]) for row in data]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            corpus = cmd_generate(args.n, args.seed, args.mix, args.out, args.ppm)
            print(f"wrote {corpus}")
        elif args.command == "eval":
            report = cmd_eval(
                args.data, args.policy, args.prompt, args.jobs, args.out,
                remote_config=_remote_config_from_args(args), mode=args.mode,
                record_path=args.record,
            )
            label = f"{args.policy} ({args.prompt})"
            print(render_markdown([(label, report)]), end="")
        elif args.command == "ablate":
            results = cmd_ablate(args.data, args.policy, _load_grid(args.grid),
                                 args.jobs, args.out)
            print(ablation_markdown(results), end="")
        elif args.command == "report":
            print(cmd_report(args.files, args.out), end="")
        elif args.command == "prompts":
            print(cmd_prompts(args.prompt), end="")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
