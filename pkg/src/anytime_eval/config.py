"""Structured TOML run configuration.

Every knob a run needs lives in one file: dataset, budget schedule,
sampling, endpoint, tokenizer, prompt sources, and preference-generation
settings. Missing values fall back to the dataset profile defaults. The
API credential itself is never in the file, only the name of the
environment variable holding it.
"""

from __future__ import annotations

import datetime as _dt
import logging
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .datasets import KINDS, PROFILES
from .gateway import Backend, FixtureStore, HttpBackend, ReplayBackend, SamplingParams
from .pipeline import DEFAULT_TEMPLATES, RunManifest, now_iso
from .tokenization import TokenizerSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    run_id: str
    out_dir: str
    method: str
    dataset_kind: str
    dataset_path: str
    dataset_split: str
    limit: int | None
    checkpoints: tuple[int, ...]
    n_traces: int
    sampling: SamplingParams
    model: str
    base_url: str
    api_key_env: str
    max_in_flight: int
    max_attempts: int
    timeout_s: float
    tokenizer: TokenizerSpec
    prompt_file: str | None
    pairs_file: str | None
    prefgen_n_traces: int
    prefgen_seed_path: str | None
    prefgen_max_pairs: int
    metric_name: str | None
    scoring_blurb: str | None
    q_max: float


def load_config(path: str | Path) -> RunConfig:
    raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))

    dataset = raw.get("dataset", {})
    kind = dataset.get("kind")
    if kind not in KINDS:
        raise ValueError(f"[dataset].kind must be one of {KINDS}, got {kind!r}")
    if "path" not in dataset:
        raise ValueError("[dataset].path is required")
    profile = PROFILES[kind]

    sampling_raw = raw.get("sampling", {})
    params = SamplingParams(
        temperature=sampling_raw.get("temperature", 0.7),
        top_p=sampling_raw.get("top_p", 1.0),
        top_k=sampling_raw.get("top_k"),
        max_tokens=sampling_raw.get("max_tokens", profile.max_tokens),
        seed=sampling_raw.get("seed"),
    )
    if params.top_k == 1 and params.temperature > 0:
        log.warning(
            "top_k=1 forces effectively greedy decoding; diversity across "
            "sampled traces will collapse. The value is recorded as "
            "configured but most chat APIs reject top_k entirely."
        )

    schedule = raw.get("schedule", {})
    checkpoints = tuple(schedule.get("checkpoints", profile.checkpoints))

    endpoint = raw.get("endpoint", {})
    tok = raw.get("tokenizer", {})
    prompts = raw.get("prompts", {})
    prefgen = raw.get("prefgen", {})

    method = raw.get("method", "base")
    default_run_id = "{}-{}-{}".format(
        kind, method, _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%d-%H%M%S")
    )

    return RunConfig(
        run_id=raw.get("run_id", default_run_id),
        out_dir=raw.get("out_dir", "runs"),
        method=method,
        dataset_kind=kind,
        dataset_path=dataset["path"],
        dataset_split=dataset.get("split", ""),
        limit=dataset.get("limit"),
        checkpoints=checkpoints,
        n_traces=sampling_raw.get("n_traces", profile.n_traces),
        sampling=params,
        model=endpoint.get("model", "unknown-model"),
        base_url=endpoint.get("base_url", "http://localhost:8000/v1"),
        api_key_env=endpoint.get("api_key_env", "OPENAI_API_KEY"),
        max_in_flight=endpoint.get("max_in_flight", 4),
        max_attempts=endpoint.get("max_attempts", 4),
        timeout_s=endpoint.get("timeout_s", 120.0),
        tokenizer=TokenizerSpec(
            kind=tok.get("kind", "words"),
            vocab_file=tok.get("vocab"),
            merges_file=tok.get("merges"),
        ),
        prompt_file=prompts.get("prompt_file"),
        pairs_file=prompts.get("pairs_file"),
        prefgen_n_traces=prefgen.get("n_traces", profile.prefgen_n_traces),
        prefgen_seed_path=prefgen.get("seed_examples"),
        prefgen_max_pairs=prefgen.get("max_pairs", 8),
        metric_name=prefgen.get("metric_name"),
        scoring_blurb=prefgen.get("scoring_blurb"),
        q_max=raw.get("q_max", 1.0),
    )


def make_manifest(config: RunConfig, prefgen: bool = False) -> RunManifest:
    """Freeze a config into the immutable manifest for one run."""
    if prefgen:
        if not config.prefgen_seed_path:
            raise ValueError("[prefgen].seed_examples is required for prefgen runs")
        return RunManifest(
            run_id=f"{config.run_id}-prefgen",
            dataset_kind=config.dataset_kind,
            dataset_path=config.prefgen_seed_path,
            dataset_split=config.dataset_split,
            model=config.model,
            endpoint=config.base_url,
            method="base",
            checkpoints=config.checkpoints,
            n_traces=config.prefgen_n_traces,
            sampling=config.sampling.as_dict(),
            tokenizer=config.tokenizer.as_dict(),
            templates=dict(DEFAULT_TEMPLATES),
            limit=config.limit,
            created_at=now_iso(),
            code_version=__version__,
        )
    return RunManifest(
        run_id=config.run_id,
        dataset_kind=config.dataset_kind,
        dataset_path=config.dataset_path,
        dataset_split=config.dataset_split,
        model=config.model,
        endpoint=config.base_url,
        method=config.method,
        checkpoints=config.checkpoints,
        n_traces=config.n_traces,
        sampling=config.sampling.as_dict(),
        tokenizer=config.tokenizer.as_dict(),
        templates=dict(DEFAULT_TEMPLATES),
        prompt_file=config.prompt_file,
        pairs_file=config.pairs_file,
        limit=config.limit,
        created_at=now_iso(),
        code_version=__version__,
    )


def make_backend(config: RunConfig, replay_path: str | None = None) -> Backend:
    """Live HTTP backend, or a strict replay backend when a fixture path is given."""
    if replay_path:
        return ReplayBackend(FixtureStore(replay_path))
    return HttpBackend(
        base_url=config.base_url,
        api_key_env=config.api_key_env,
        timeout_s=config.timeout_s,
        max_attempts=config.max_attempts,
    )
