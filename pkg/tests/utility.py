from pathlib import Path
from typing import Any, Dict

import torch
import yaml
from torch.autograd import gradcheck
from torch.func import functional_call

from dvgan.data.synthetic import default_recipe, write_synthetic_dataset
from dvgan.dataset import load_dataset_split, preprocess_dataset


def get_data_directory() -> Path:
    return Path(__file__).parent / "data"


def load_yaml(name: str) -> Dict[str, Any]:
    with get_data_directory().joinpath(name).open() as f:
        return yaml.safe_load(f)


def create_processed_dataset(root: Path, clip_num: int = 30, rate: float = 30, seed: int = 0):
    raw = root / "raw"
    write_synthetic_dataset(
        root=raw, recipe=default_recipe(), clip_num=clip_num, test_rate=0.2, seed=seed
    )
    processed = root / "processed"
    preprocess_dataset(load_dataset_split(raw), output=processed, rate=rate)
    return processed


def parameter_call(module: torch.nn.Module):
    """
    Detached float64 copies of the parameters and a function evaluating the
    module with them in place.
    """
    names = [name for name, _ in module.named_parameters()]
    params = tuple(
        p.detach().double().clone().requires_grad_(True) for p in module.parameters()
    )

    def _call(values, *args, **kwargs):
        return functional_call(module, dict(zip(names, values)), args, kwargs)

    return params, _call


def gradcheck_parameters(module: torch.nn.Module, *args, **kwargs):
    params, call = parameter_call(module.double())
    return gradcheck(
        lambda *values: call(values, *args, **kwargs), params, eps=1e-6, atol=1e-5
    )
