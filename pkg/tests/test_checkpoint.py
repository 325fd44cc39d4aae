import numpy
import pytest
import torch

from dvgan.utility.checkpoint import (
    load_checkpoint,
    rng_state,
    save_checkpoint,
    set_rng_state,
)
from dvgan.utility.pytorch_utility import init_weights, make_optimizer


def test_save_and_load(tmp_path):
    torch.manual_seed(0)
    module = torch.nn.Linear(3, 2)
    optimizer = make_optimizer(dict(name="adam", lr=1e-4, betas=[0.5, 0.9]), module.parameters())
    module(torch.randn(4, 3)).sum().backward()
    optimizer.step()

    path = tmp_path / "checkpoint_1.pth"
    save_checkpoint(
        path,
        config=dict(a=1),
        modules=dict(linear=module),
        optimizers=dict(linear=optimizer),
        iteration=1,
    )
    assert [p.name for p in tmp_path.iterdir()] == ["checkpoint_1.pth"]

    loaded = torch.nn.Linear(3, 2)
    loaded_optimizer = make_optimizer(dict(name="adam", lr=1e-4), loaded.parameters())
    data = load_checkpoint(
        path, modules=dict(linear=loaded), optimizers=dict(linear=loaded_optimizer)
    )
    assert data["iteration"] == 1
    assert data["config"] == dict(a=1)
    assert torch.equal(loaded.weight, module.weight)
    assert loaded_optimizer.param_groups[0]["betas"] == (0.5, 0.9)


def test_unsupported_version(tmp_path):
    torch.save(dict(version=0), tmp_path / "old.pth")
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "old.pth")

    torch.save(torch.nn.Linear(1, 1).state_dict(), tmp_path / "raw.pth")
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "raw.pth")


def test_rng_state():
    state = rng_state()
    a = (torch.rand(3), numpy.random.rand(3))
    set_rng_state(state)
    b = (torch.rand(3), numpy.random.rand(3))
    assert torch.equal(a[0], b[0])
    numpy.testing.assert_array_equal(a[1], b[1])


@pytest.mark.parametrize("name", ["xavier_uniform", "kaiming_uniform", "orthogonal", "fan_in_uniform"])
def test_init_weights(name: str):
    module = torch.nn.Sequential(torch.nn.Linear(4, 3), torch.nn.LSTMCell(3, 2))
    bias = module[0].bias.detach().clone()
    init_weights(module, name)
    assert torch.equal(module[0].bias, bias)


def test_unknown_optimizer():
    with pytest.raises(ValueError):
        make_optimizer(dict(name="unknown"), torch.nn.Linear(1, 1).parameters())
