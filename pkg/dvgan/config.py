import subprocess
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from dvgan.utility import dataclass_utility


class GeneratorType(str, Enum):
    cnn = "cnn"
    rnn = "rnn"


class DiscriminatorType(str, Enum):
    cnn = "cnn"
    rnn = "rnn"


class ValidationMode(str, Enum):
    dense = "dense"
    final = "final"
    mod2 = "mod2"


class DiffValidateInput(str, Enum):
    hidden = "hidden"
    diff = "diff"


class RankerType(str, Enum):
    cnn = "cnn"
    rnn = "rnn"


@dataclass
class DatasetConfig:
    processed_dir: Path
    length: int
    rate: float
    seed: int = 0


@dataclass
class NetworkConfig:
    motion_size: int
    vocabulary_size: int
    hidden_size: int = 256
    generator_type: GeneratorType = GeneratorType.cnn
    discriminator_type: DiscriminatorType = DiscriminatorType.cnn
    final_cut: bool = True
    kernel_size: int = 3
    lstm_layer_num: int = 2
    validation_mode: ValidationMode = ValidationMode.dense
    diff_validate_input: DiffValidateInput = DiffValidateInput.hidden


@dataclass
class ModelConfig:
    gradient_penalty_weight: float = 10
    temporal_shift: bool = True


def default_optimizer():
    return dict(name="adam", lr=1e-4, betas=[0.5, 0.9])


@dataclass
class TrainConfig:
    batch_size: int = 64
    log_iteration: int = 100
    eval_iteration: int = 1000
    snapshot_iteration: int = 1000
    stop_iteration: int = 20000
    optimizer: Dict[str, Any] = field(default_factory=default_optimizer)
    discriminator_step: int = 10
    weight_initializer: Optional[str] = "fan_in_uniform"
    num_processes: Optional[int] = None
    use_gpu: bool = False
    seed: int = 0
    ranker_path: Optional[Path] = None
    ranker_config_path: Optional[Path] = None
    eval_candidate_num: int = 15


@dataclass
class ProjectConfig:
    name: str
    tags: Dict[str, Any] = field(default_factory=dict)
    category: Optional[str] = None


def _git(*args: str):
    try:
        return (
            subprocess.check_output(["git", *args], stderr=subprocess.DEVNULL)
            .decode()
            .strip()
        )
    except (OSError, subprocess.CalledProcessError):
        return None


@dataclass
class Config:
    dataset: DatasetConfig
    network: NetworkConfig
    model: ModelConfig
    train: TrainConfig
    project: ProjectConfig

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Config":
        backward_compatible(d)
        return dataclass_utility.convert_from_dict(cls, d)

    def to_dict(self) -> Dict[str, Any]:
        return dataclass_utility.convert_to_dict(self)

    def add_git_info(self):
        self.project.tags["git-commit-id"] = _git("rev-parse", "HEAD")
        self.project.tags["git-branch-name"] = _git("rev-parse", "--abbrev-ref", "HEAD")

    def validate(self):
        length = self.dataset.length
        use_cnn = (
            self.network.generator_type == GeneratorType.cnn
            or self.network.discriminator_type == DiscriminatorType.cnn
        )
        if use_cnn and (length <= 0 or length & (length - 1) != 0):
            raise ValueError(f"length must be a power of two: {length}")
        if length < 2:
            raise ValueError(f"length must be at least 2: {length}")
        assert self.network.hidden_size > 0
        assert self.model.gradient_penalty_weight >= 0
        assert self.train.discriminator_step >= 1
        assert self.train.batch_size > 0
        assert self.train.stop_iteration >= 0


def backward_compatible(d: Dict[str, Any]):
    for key in ("model", "train"):
        if d.get(key) is None:
            d[key] = {}


@dataclass
class RankerNetworkConfig:
    motion_size: int
    vocabulary_size: int
    hidden_size: int = 1024
    ranker_type: RankerType = RankerType.rnn
    kernel_size: int = 3
    lstm_layer_num: int = 2


@dataclass
class RankerTrainConfig:
    candidate_num: int
    batch_size: int = 64
    log_iteration: int = 100
    stop_epoch: int = 100
    optimizer: Dict[str, Any] = field(default_factory=lambda: dict(name="adam", lr=1e-4))
    weight_initializer: Optional[str] = "fan_in_uniform"
    num_processes: Optional[int] = None
    use_gpu: bool = False
    seed: int = 0


@dataclass
class RankerConfig:
    dataset: DatasetConfig
    network: RankerNetworkConfig
    train: RankerTrainConfig
    project: ProjectConfig

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "RankerConfig":
        return dataclass_utility.convert_from_dict(cls, d)

    def to_dict(self) -> Dict[str, Any]:
        return dataclass_utility.convert_to_dict(self)

    def add_git_info(self):
        self.project.tags["git-commit-id"] = _git("rev-parse", "HEAD")
        self.project.tags["git-branch-name"] = _git("rev-parse", "--abbrev-ref", "HEAD")


def apply_overrides(d: Dict[str, Any], overrides: List[str]):
    """
    `section.key=value` overrides from the command line, value parsed as YAML.
    """
    for override in overrides:
        key, sep, value = override.partition("=")
        if sep == "":
            raise ValueError(f"override must be key=value: {override}")
        *parents, leaf = key.split(".")
        target = d
        for p in parents:
            target = target.setdefault(p, {})
        target[leaf] = yaml.safe_load(value)
    return d
