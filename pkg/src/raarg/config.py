"""Run configuration and provenance manifests.

A RunConfig materializes every knob with its default so the persisted
manifest always shows the exact resolved settings; the manifest also
records content hashes of stage inputs and outputs. Manifests carry
timestamps and are therefore excluded from byte-identity comparisons.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional

from . import __version__
from .gateway import BackendConfig, DEFAULT_TOKEN_RATIO
from .generation import (
    DEFAULT_EXAMPLE_RESERVE,
    DEFAULT_GENERATION_TEMPERATURE,
    DEFAULT_OUTPUT_RESERVE,
    DEFAULT_TOTAL_BUDGET,
)
from .judges import DEFAULT_PRECISION_THRESHOLD, JUDGE_FORMATS


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Fully materialized settings for one workbench run."""

    # corpus paths
    corpus_dir: str = "corpus"
    qrels_path: str = "qrels.txt"
    splits_path: str = "splits.json"
    output_dir: str = "out"

    # backend
    backend_kind: str = "replay"
    backend_endpoint: str = ""
    backend_model: str = "gpt-4o-mini"
    trace_dir: str = "traces"
    record: bool = False
    retry_limit: int = 2
    request_timeout: float = 60.0
    max_in_flight: int = 4
    token_ratio: int = DEFAULT_TOKEN_RATIO

    # retrieval
    k1: float = 1.2
    b: float = 0.75
    candidate_depth: int = 100
    window: int = 20
    stride: int = 10
    cutoff_k: int = 10
    instruction_kind: str = "generic"

    # generation
    few_shot_topic_ids: tuple[str, ...] = ()
    total_budget: int = DEFAULT_TOTAL_BUDGET
    example_reserve: int = DEFAULT_EXAMPLE_RESERVE
    output_reserve: int = DEFAULT_OUTPUT_RESERVE
    generation_temperature: float = DEFAULT_GENERATION_TEMPERATURE

    # judging
    judge_formats: tuple[str, ...] = ("listwise_rag_fine_grained",)
    listwise_quality_scale: str = "0_5"
    precision_threshold: float = DEFAULT_PRECISION_THRESHOLD
    self_consistency: bool = False
    self_consistency_mode: str = "mean"
    self_consistency_seed: int = 13

    # perturbation
    irrelevance_levels: tuple[float, ...] = (0.0, 10.0, 20.0, 50.0, 70.0, 100.0)
    hallucination_levels: tuple[int, ...] = (0, 5, 20)

    # split
    train_fraction: float = 0.5
    stance_scope: str = "pro_and_con"

    # randomness root: every stage derives named sub-seeds from this
    seed: int = 13

    def __post_init__(self):
        if self.backend_kind not in ("replay", "http_chat"):
            raise ConfigError(f"unknown backend kind {self.backend_kind!r}")
        if self.instruction_kind not in ("generic", "stance_conditioned"):
            raise ConfigError(f"unknown instruction kind {self.instruction_kind!r}")
        if self.listwise_quality_scale not in ("1_3", "0_5"):
            raise ConfigError(
                f"unknown listwise quality scale {self.listwise_quality_scale!r}"
            )
        if self.self_consistency_mode not in ("mean", "majority"):
            raise ConfigError(
                f"unknown self-consistency mode {self.self_consistency_mode!r}"
            )
        unknown = [f for f in self.judge_formats if f not in JUDGE_FORMATS]
        if unknown:
            raise ConfigError(f"unknown judge formats {unknown}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie strictly between 0 and 1")

    def backend_config(self) -> BackendConfig:
        return BackendConfig(
            kind=self.backend_kind,
            endpoint=self.backend_endpoint,
            model=self.backend_model,
            trace_dir=self.trace_dir,
            record=self.record,
            retry_limit=self.retry_limit,
            request_timeout=self.request_timeout,
            max_in_flight=self.max_in_flight,
            token_ratio=self.token_ratio,
        )

    def out_path(self, *parts: str) -> Path:
        return Path(self.output_dir).joinpath(*parts)


_TUPLE_FIELDS = {
    "few_shot_topic_ids": str,
    "judge_formats": str,
    "irrelevance_levels": float,
    "hallucination_levels": int,
}


def config_to_dict(config: RunConfig) -> dict:
    record = dataclasses.asdict(config)
    for name in _TUPLE_FIELDS:
        record[name] = list(record[name])
    return record


def config_from_dict(record: Mapping) -> RunConfig:
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(record) - known)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    kwargs = dict(record)
    for name, cast in _TUPLE_FIELDS.items():
        if name in kwargs:
            kwargs[name] = tuple(cast(v) for v in kwargs[name])
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc))


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(record, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return config_from_dict(record)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def resolve_config(
    path: Optional[str | Path] = None, overrides: Optional[Mapping] = None
) -> RunConfig:
    """File values, then explicit overrides, on top of defaults."""
    config = load_config(path) if path else RunConfig()
    if overrides:
        filtered = {k: v for k, v in overrides.items() if v is not None}
        if filtered:
            config = config_from_dict({**config_to_dict(config), **filtered})
    return config


# ---------------------------------------------------------------------------
# manifests


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    config: dict
    artifact_version: str = __version__
    stages: dict[str, dict] = field(default_factory=dict)

    def record_stage(
        self,
        stage: str,
        inputs: Mapping[str, str | Path],
        outputs: Mapping[str, str | Path],
    ) -> None:
        """Hash existing inputs and outputs under a stage entry."""

        def hashes(paths: Mapping[str, str | Path]) -> dict[str, str]:
            return {
                name: file_sha256(p)
                for name, p in sorted(paths.items())
                if Path(p).exists()
            }

        self.stages[stage] = {
            "inputs": hashes(inputs),
            "outputs": hashes(outputs),
            "completed_at": datetime.now(timezone.utc).isoformat(),
        }


def manifest_path(config: RunConfig) -> Path:
    return config.out_path("manifest.json")


def load_manifest(config: RunConfig) -> RunManifest:
    path = manifest_path(config)
    if path.exists():
        record = json.loads(path.read_text(encoding="utf-8"))
        return RunManifest(
            config=record.get("config", {}),
            artifact_version=record.get("artifact_version", __version__),
            stages=record.get("stages", {}),
        )
    return RunManifest(config=config_to_dict(config))


def save_manifest(manifest: RunManifest, config: RunConfig) -> None:
    manifest.config = config_to_dict(config)
    path = manifest_path(config)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "artifact_version": manifest.artifact_version,
        "config": manifest.config,
        "stages": manifest.stages,
    }
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
