import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional

import numpy
import torch
from torch import nn
from torch.optim.optimizer import Optimizer

checkpoint_version = 1


def rng_state():
    return dict(torch=torch.get_rng_state(), numpy=numpy.random.get_state())


def set_rng_state(state: Dict[str, Any]):
    torch.set_rng_state(state["torch"])
    numpy.random.set_state(state["numpy"])


def save_checkpoint(
    path: Path,
    config: Dict[str, Any],
    modules: Dict[str, nn.Module],
    optimizers: Dict[str, Optimizer],
    iteration: int,
):
    """
    Written next to `path` first and renamed, so a crash never leaves a partial file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = dict(
        version=checkpoint_version,
        config=config,
        parameters={k: m.state_dict() for k, m in modules.items()},
        optimizer={k: o.state_dict() for k, o in optimizers.items()},
        rng=rng_state(),
        iteration=iteration,
    )

    fd, temp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            torch.save(data, f)
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.remove(temp)
        raise


def load_checkpoint(
    path: Path,
    modules: Optional[Dict[str, nn.Module]] = None,
    optimizers: Optional[Dict[str, Optimizer]] = None,
    map_location: Optional[torch.device] = None,
):
    data: Dict[str, Any] = torch.load(
        str(path), map_location=map_location, weights_only=False
    )
    version = data.get("version") if isinstance(data, dict) else None
    if version != checkpoint_version:
        raise ValueError(f"{path}: unsupported checkpoint version {version!r}")

    for key, module in (modules or {}).items():
        module.load_state_dict(data["parameters"][key])
    for key, optimizer in (optimizers or {}).items():
        optimizer.load_state_dict(data["optimizer"][key])
    return data
