import pytest
import torch
from scipy.stats import chisquare
from torch.autograd import gradcheck

from dvgan.network.generator import (
    CnnGenerator,
    RnnGenerator,
    final_cut,
    random_cut_offset,
)

from tests.utility import gradcheck_parameters


def _zero_(module: torch.nn.Module):
    for p in module.parameters():
        torch.nn.init.zeros_(p)
    return module


@pytest.fixture()
def cnn_generator():
    torch.manual_seed(0)
    return CnnGenerator(motion_size=6, hidden_size=8, length=16, final_cut=True, kernel_size=3)


@pytest.fixture()
def rnn_generator():
    torch.manual_seed(0)
    return RnnGenerator(motion_size=6, hidden_size=8, length=16, final_cut=False, layer_num=2)


def test_cnn_shape(cnn_generator: CnnGenerator):
    assert cnn_generator.tape_length == 32
    assert len(cnn_generator.residuals) == 5
    assert len(cnn_generator.plots) == 6

    h_text = torch.randn(2, 8)
    z = cnn_generator.sample_latent(2)
    tape, hiddens = cnn_generator.generate_tape(h_text, z)
    assert tape.shape == (2, 32, 6)
    assert [h.shape for h in hiddens] == [(2, 2 ** i, 8) for i in range(6)]
    assert cnn_generator(h_text, z).shape == (2, 16, 6)


def test_cnn_without_final_cut():
    generator = CnnGenerator(motion_size=6, hidden_size=8, length=16, final_cut=False, kernel_size=3)
    assert len(generator.residuals) == 4
    assert len(generator.plots) == 5
    h_text = torch.randn(2, 8)
    assert generator(h_text, generator.sample_latent(2)).shape == (2, 16, 6)


def test_cnn_not_power_of_two():
    with pytest.raises(ValueError):
        CnnGenerator(motion_size=6, hidden_size=8, length=12, final_cut=True, kernel_size=3)


def test_cnn_latent_mismatch(cnn_generator: CnnGenerator):
    z = cnn_generator.sample_latent(2)
    with pytest.raises(ValueError):
        cnn_generator(torch.randn(2, 8), z[:-1])


def test_cnn_zero_parameters(cnn_generator: CnnGenerator):
    _zero_(cnn_generator)
    h_text = torch.randn(2, 8)
    tape, _ = cnn_generator.generate_tape(h_text, cnn_generator.sample_latent(2))
    assert torch.all(tape == 0)


def test_cnn_pinned_offset(cnn_generator: CnnGenerator):
    h_text = torch.randn(2, 8)
    z = cnn_generator.sample_latent(2)
    offset = torch.tensor([3, 16])
    a = cnn_generator(h_text, z, cut_offset=offset)
    b = cnn_generator(h_text, z, cut_offset=offset)
    assert torch.equal(a, b)

    tape, _ = cnn_generator.generate_tape(h_text, z)
    torch.testing.assert_close(a[0], tape[0, 3:19])
    torch.testing.assert_close(a[1], tape[1, 16:32])


def test_final_cut_length1():
    tape = torch.tensor([[1.0], [2.0]]).unsqueeze(0)
    assert final_cut(tape, 1, torch.tensor([0])).flatten().tolist() == [1.0]
    assert final_cut(tape, 1, torch.tensor([1])).flatten().tolist() == [2.0]


def test_final_cut_invalid():
    tape = torch.zeros(1, 8, 2)
    with pytest.raises(ValueError):
        final_cut(tape, 3)
    with pytest.raises(ValueError):
        final_cut(tape, 4, torch.tensor([5]))


def test_final_cut_constant_tape():
    tape = torch.full((3, 8, 2), 0.5)
    for offset in range(5):
        output = final_cut(tape, 4, torch.full((3,), offset))
        assert torch.all(output == 0.5)


def test_cut_offset_uniform():
    generator = torch.Generator().manual_seed(0)
    offsets = random_cut_offset(10000, 4, generator=generator)
    assert int(offsets.min()) == 0
    assert int(offsets.max()) == 4
    counts = torch.bincount(offsets, minlength=5).numpy()
    assert chisquare(counts).pvalue > 0.01


def test_rnn_shape(rnn_generator: RnnGenerator):
    h_text = torch.randn(2, 8)
    assert rnn_generator(h_text, rnn_generator.sample_latent(2)).shape == (2, 16, 6)
    assert rnn_generator(h_text, rnn_generator.sample_latent(2, length=5)).shape == (2, 5, 6)


def test_rnn_final_cut():
    generator = RnnGenerator(motion_size=6, hidden_size=8, length=16, final_cut=True, layer_num=2)
    z = generator.sample_latent(2)
    assert z.shape == (2, 32, 8)
    assert generator(torch.randn(2, 8), z).shape == (2, 16, 6)


def test_rnn_telescoping(rnn_generator: RnnGenerator):
    h_text = torch.randn(2, 8)
    frames, diffs = rnn_generator.generate_tape(h_text, rnn_generator.sample_latent(2))
    for t in range(1, 16):
        expected = frames[:, 0] + torch.stack(diffs[:t], dim=0).sum(dim=0)
        torch.testing.assert_close(frames[:, t], expected, atol=1e-5, rtol=1e-5)


def test_rnn_zero_velocity(rnn_generator: RnnGenerator):
    _zero_(rnn_generator.diff_decode)
    frames = rnn_generator(torch.randn(2, 8), rnn_generator.sample_latent(2))
    assert torch.equal(frames, frames[:, :1].expand_as(frames))


def test_rnn_seed_frames():
    torch.manual_seed(0)
    generator = RnnGenerator(motion_size=6, hidden_size=8, length=64, final_cut=False, layer_num=2)
    seed = torch.randn(2, 25, 6)
    output = generator(torch.randn(2, 8), generator.sample_latent(2), seed_frames=seed)
    assert output.shape == (2, 64, 6)
    assert torch.equal(output[:, :25], seed)


@pytest.mark.parametrize("seed_num", [0, 16, 20])
def test_rnn_seed_frames_invalid(rnn_generator: RnnGenerator, seed_num: int):
    with pytest.raises(ValueError):
        rnn_generator(
            torch.randn(2, 8),
            rnn_generator.sample_latent(2),
            seed_frames=torch.zeros(2, seed_num, 6),
        )


def test_rnn_long_sequence(rnn_generator: RnnGenerator):
    with torch.no_grad():
        output = rnn_generator(torch.randn(1, 8), rnn_generator.sample_latent(1, length=512))
    assert output.shape == (1, 512, 6)
    assert bool(torch.all(torch.isfinite(output)))


def test_gradcheck(rnn_generator: RnnGenerator):
    torch.manual_seed(0)
    cnn_generator = CnnGenerator(
        motion_size=3, hidden_size=4, length=4, final_cut=False, kernel_size=3
    ).double()
    rnn_generator = rnn_generator.double()

    h_text = torch.randn(2, 4, dtype=torch.float64, requires_grad=True)
    z = [z_i.double() for z_i in cnn_generator.sample_latent(2)]
    assert gradcheck(lambda h: cnn_generator(h, z), (h_text,), eps=1e-6, atol=1e-5)

    h_text = torch.randn(2, 8, dtype=torch.float64, requires_grad=True)
    z = rnn_generator.sample_latent(2, length=4).double()
    assert gradcheck(lambda h: rnn_generator(h, z), (h_text,), eps=1e-6, atol=1e-5)


def test_gradcheck_parameters():
    torch.manual_seed(0)
    h_text = torch.randn(2, 4, dtype=torch.float64)

    cnn_generator = CnnGenerator(
        motion_size=3, hidden_size=4, length=4, final_cut=True, kernel_size=3
    )
    z = [z_i.double() for z_i in cnn_generator.sample_latent(2)]
    assert gradcheck_parameters(cnn_generator, h_text, z, cut_offset=torch.tensor([1, 4]))

    rnn_generator = RnnGenerator(
        motion_size=3, hidden_size=4, length=4, final_cut=False, layer_num=2
    )
    z = rnn_generator.sample_latent(2).double()
    assert gradcheck_parameters(rnn_generator, h_text, z)
    seed_frames = torch.randn(2, 2, 3, dtype=torch.float64)
    assert gradcheck_parameters(rnn_generator, h_text, z, seed_frames=seed_frames)
