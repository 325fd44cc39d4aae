from pathlib import Path

import pytest
import yaml
from yaml import SafeLoader

from dvgan.config import (
    Config,
    GeneratorType,
    RankerConfig,
    TrainConfig,
    ValidationMode,
    apply_overrides,
)
from tests.utility import get_data_directory


@pytest.fixture()
def train_config_path():
    return get_data_directory() / "train_config.yaml"


@pytest.fixture()
def ranker_config_path():
    return get_data_directory() / "ranker_config.yaml"


def test_from_dict(train_config_path: Path):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    config = Config.from_dict(d)
    assert config.network.generator_type == GeneratorType.cnn
    assert config.network.validation_mode == ValidationMode.dense
    assert isinstance(config.dataset.processed_dir, Path)


def test_to_dict(train_config_path: Path):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    d = Config.from_dict(d).to_dict()
    assert d["network"]["generator_type"] == "cnn"
    yaml.safe_dump(d)


def test_equal_base_config_and_reconstructed(train_config_path: Path):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    base = Config.from_dict(d)
    base_re = Config.from_dict(base.to_dict())
    assert base == base_re


def test_equal_ranker_config_and_reconstructed(ranker_config_path: Path):
    with ranker_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    base = RankerConfig.from_dict(d)
    assert base == RankerConfig.from_dict(base.to_dict())


def test_backward_compatible(train_config_path: Path):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    d.pop("model")
    d["train"].pop("discriminator_step")
    config = Config.from_dict(d)
    assert config.model.gradient_penalty_weight == 10
    assert config.train.discriminator_step == 10


def test_unknown_key(train_config_path: Path):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    d["network"]["unknown"] = 1
    with pytest.raises(ValueError):
        Config.from_dict(d)


@pytest.mark.parametrize("length", [12, 1])
def test_validate_length(train_config_path: Path, length: int):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    d["dataset"]["length"] = length
    with pytest.raises(ValueError):
        Config.from_dict(d).validate()


def test_validate_rnn_any_length(train_config_path: Path):
    with train_config_path.open() as f:
        d = yaml.load(f, SafeLoader)
    d["dataset"]["length"] = 12
    d["network"]["generator_type"] = "rnn"
    d["network"]["discriminator_type"] = "rnn"
    Config.from_dict(d).validate()


def test_apply_overrides():
    d = {"train": {"seed": 0}}
    apply_overrides(d, ["train.seed=3", "network.final_cut=false", "project.name=x"])
    assert d == {
        "train": {"seed": 3},
        "network": {"final_cut": False},
        "project": {"name": "x"},
    }

    with pytest.raises(ValueError):
        apply_overrides(d, ["train.seed"])


def test_train_defaults():
    config = Config.from_dict(
        dict(
            dataset=dict(processed_dir="processed", length=32, rate=4),
            network=dict(motion_size=6, vocabulary_size=6),
            project=dict(name="test"),
        )
    )
    config.validate()
    assert config.train.batch_size == 64
    assert config.train.stop_iteration == 20000
    assert config.train.discriminator_step == 10
    assert config.train.optimizer == dict(name="adam", lr=1e-4, betas=[0.5, 0.9])
    assert config.train.weight_initializer == "fan_in_uniform"
    assert config.model.gradient_penalty_weight == 10


def _load_shipped_config(name: str):
    path = Path(__file__).parent.parent / "config" / f"{name}.yaml"
    d = yaml.safe_load(path.read_text())
    d["network"].update(motion_size=96, vocabulary_size=100)
    return d


@pytest.mark.parametrize(
    "name,length,rate,candidate_num", [("cmu", 32, 4, 250), ("h36m", 64, 12.5, 15)]
)
def test_shipped_configs(name: str, length: int, rate: float, candidate_num: int):
    config = Config.from_dict(_load_shipped_config(name))
    config.validate()
    assert (config.dataset.length, config.dataset.rate) == (length, rate)
    assert config.network.hidden_size == 256
    assert config.train == TrainConfig(
        ranker_path=Path(f"data/{name}/ranker/ranker.pth"),
        ranker_config_path=Path(f"data/{name}/ranker/config.yaml"),
        eval_candidate_num=candidate_num,
    )

    ranker = RankerConfig.from_dict(_load_shipped_config(f"{name}_ranker"))
    assert (ranker.dataset.length, ranker.dataset.rate) == (length, rate)
    assert ranker.network.hidden_size == 1024
    assert ranker.train.candidate_num == candidate_num
    assert ranker.train.stop_epoch == 100
    assert ranker.train.optimizer == dict(name="adam", lr=1e-4)
