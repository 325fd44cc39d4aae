import math
import random
from copy import deepcopy
from typing import Any, Callable, Dict, Iterable

import numpy
import torch
import torch_optimizer
from torch import nn, optim
from torch.optim.optimizer import Optimizer


def _fan_in_uniform(param: torch.Tensor):
    fan_in = param.shape[1] * (param[0][0].numel() if param.ndim > 2 else 1)
    bound = 1 / math.sqrt(fan_in)
    torch.nn.init.uniform_(param, -bound, bound)


def init_weights(model: torch.nn.Module, name: str):
    def _init_weights(layer: nn.Module):
        initializer: Callable
        if name == "fan_in_uniform":
            initializer = _fan_in_uniform
        elif name == "uniform":
            initializer = torch.nn.init.uniform_
        elif name == "normal":
            initializer = torch.nn.init.normal_
        elif name == "xavier_uniform":
            initializer = torch.nn.init.xavier_uniform_
        elif name == "xavier_normal":
            initializer = torch.nn.init.xavier_normal_
        elif name == "kaiming_uniform":
            initializer = torch.nn.init.kaiming_uniform_
        elif name == "kaiming_normal":
            initializer = torch.nn.init.kaiming_normal_
        elif name == "orthogonal":
            initializer = torch.nn.init.orthogonal_
        else:
            raise ValueError(name)

        for key, param in layer.named_parameters(recurse=False):
            if "weight" in key and param.ndim >= 2:
                initializer(param)

    model.apply(_init_weights)


def make_optimizer(config_dict: Dict[str, Any], parameters: Iterable[nn.Parameter]):
    cp: Dict[str, Any] = deepcopy(config_dict)
    n = cp.pop("name").lower()
    if "betas" in cp:
        cp["betas"] = tuple(cp["betas"])

    optimizer: Optimizer
    if n == "adam":
        optimizer = optim.Adam(parameters, **cp)
    elif n == "radam":
        optimizer = torch_optimizer.RAdam(parameters, **cp)
    elif n == "ranger":
        optimizer = torch_optimizer.Ranger(parameters, **cp)
    elif n == "sgd":
        optimizer = optim.SGD(parameters, **cp)
    else:
        raise ValueError(n)

    return optimizer


def set_seed(seed: int):
    random.seed(seed)
    numpy.random.seed(seed)
    torch.manual_seed(seed)
