"""Run configuration: JSON file + flag overrides, unknown keys rejected."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .classifiers import KINDS, ClassifierSpec
from .dataset import SynthConfig
from .imaging import PreprocessConfig
from .lpq import LpqConfig
from .selectors import BeesParams, PsoParams

SELECTOR_METHODS = ("pca", "lasso", "pso", "bees")


class ConfigError(ValueError):
    """Invalid or unknown configuration content (CLI exit code 2)."""


@dataclass
class PipelineConfig:
    manifest: str | None = None
    selectors: list[str] = field(default_factory=lambda: list(SELECTOR_METHODS))
    nf_list: list[int] = field(default_factory=lambda: [32, 64, 128])

    def __post_init__(self) -> None:
        bad = [s for s in self.selectors if s not in SELECTOR_METHODS]
        if bad:
            raise ConfigError(f"unknown selectors {bad}; pick from {SELECTOR_METHODS}")
        if not self.nf_list or any(int(nf) < 2 for nf in self.nf_list):
            raise ConfigError("nf_list entries must be >= 2")
        self.nf_list = [int(nf) for nf in self.nf_list]


@dataclass
class RunConfig:
    seed: int = 42
    cv_folds: int = 5
    output_dir: str | None = None
    lasso_lambda: float = 1.0
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    lpq: LpqConfig = field(default_factory=LpqConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    fitness: dict = field(default_factory=lambda: {"w": 0.01, "holdout_fraction": 0.3,
                                                   "ridge_lambda": 1e-6})
    bees: BeesParams = field(default_factory=BeesParams)
    pso: PsoParams = field(default_factory=PsoParams)
    classifiers: list[ClassifierSpec] = field(default_factory=list)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if not self.classifiers:
            self.classifiers = [ClassifierSpec(kind=k, seed=self.seed) for k in KINDS]
        if (self.preprocess.target_width < self.lpq.window_size
                or self.preprocess.target_height < self.lpq.window_size):
            raise ConfigError("preprocess target dims must cover the LPQ window")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "cv_folds": self.cv_folds,
            "output_dir": self.output_dir,
            "lasso_lambda": self.lasso_lambda,
            "preprocess": dataclasses.asdict(self.preprocess),
            "lpq": dataclasses.asdict(self.lpq),
            "synth": dataclasses.asdict(self.synth),
            "fitness": dict(self.fitness),
            "bees": dataclasses.asdict(self.bees),
            "pso": dataclasses.asdict(self.pso),
            "classifiers": [dataclasses.asdict(c) for c in self.classifiers],
            "pipeline": dataclasses.asdict(self.pipeline),
        }


_FITNESS_KEYS = ("w", "holdout_fraction", "ridge_lambda")


def _build(cls, section: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"seed", "cv_folds", "output_dir", "lasso_lambda", "preprocess", "lpq",
             "synth", "fitness", "bees", "pso", "classifiers", "pipeline"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")

    seed = int(data.get("seed", 42))
    fitness = {"w": 0.01, "holdout_fraction": 0.3, "ridge_lambda": 1e-6}
    user_fitness = data.get("fitness", {})
    bad = set(user_fitness) - set(_FITNESS_KEYS)
    if bad:
        raise ConfigError(f"unknown keys in fitness: {sorted(bad)}")
    fitness.update(user_fitness)

    classifiers = []
    for i, entry in enumerate(data.get("classifiers", [])):
        entry = dict(entry)
        entry.setdefault("seed", seed)
        classifiers.append(_build(ClassifierSpec, entry, f"classifiers[{i}]"))

    return RunConfig(
        seed=seed,
        cv_folds=int(data.get("cv_folds", 5)),
        output_dir=data.get("output_dir"),
        lasso_lambda=float(data.get("lasso_lambda", 1.0)),
        preprocess=_build(PreprocessConfig, data.get("preprocess", {}), "preprocess"),
        lpq=_build(LpqConfig, data.get("lpq", {}), "lpq"),
        synth=_build(SynthConfig, data.get("synth", {}), "synth"),
        fitness=fitness,
        bees=_build(BeesParams, data.get("bees", {}), "bees"),
        pso=_build(PsoParams, data.get("pso", {}), "pso"),
        classifiers=classifiers,
        pipeline=_build(PipelineConfig, data.get("pipeline", {}), "pipeline"),
    )


def load_config(path: str | None, seed: int | None = None,
                folds: int | None = None, out: str | None = None) -> RunConfig:
    """Config file plus flag overrides; flags win."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if seed is not None:
        data["seed"] = seed
        data.setdefault("synth", {})
        data["synth"] = dict(data["synth"], seed=seed)
        data["classifiers"] = [dict(c, seed=seed) for c in data.get("classifiers", [])]
    if folds is not None:
        data["cv_folds"] = folds
    if out is not None:
        data["output_dir"] = out
    return config_from_dict(data)


def write_effective_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
