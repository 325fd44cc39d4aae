import pytest
import torch
from scipy.stats import chisquare
from torch.autograd import gradcheck

from dvgan.config import DiffValidateInput, ValidationMode
from dvgan.network.discriminator import (
    CnnDiscriminator,
    RnnDiscriminator,
    random_shift,
    temporal_shift,
    validation_levels,
)

from tests.utility import gradcheck_parameters


def _cnn_discriminator(mode: ValidationMode = ValidationMode.dense, length: int = 16):
    torch.manual_seed(0)
    return CnnDiscriminator(
        motion_size=6, hidden_size=8, length=length, kernel_size=3, validation_mode=mode
    )


def _rnn_discriminator(diff_validate_input=DiffValidateInput.hidden):
    torch.manual_seed(0)
    return RnnDiscriminator(
        motion_size=6, hidden_size=8, layer_num=2, diff_validate_input=diff_validate_input
    )


def test_temporal_shift():
    x = torch.arange(1, 5, dtype=torch.float32).reshape(1, 4, 1)
    assert temporal_shift(x, torch.tensor([0])).flatten().tolist() == [1, 2, 3, 4]
    assert temporal_shift(x, torch.tensor([2])).flatten().tolist() == [0, 0, 1, 2]
    assert temporal_shift(x, torch.tensor([-1])).flatten().tolist() == [2, 3, 4, 0]


def test_temporal_shift_per_sample():
    x = torch.ones(2, 4, 3)
    y = temporal_shift(x, torch.tensor([1, -2]))
    assert y[0, :, 0].tolist() == [0, 1, 1, 1]
    assert y[1, :, 0].tolist() == [1, 1, 0, 0]


def test_random_shift_uniform():
    generator = torch.Generator().manual_seed(0)
    shifts = random_shift(10000, 8, generator=generator)
    assert int(shifts.min()) == -4
    assert int(shifts.max()) == 4
    counts = torch.bincount(shifts + 4, minlength=9).numpy()
    assert chisquare(counts).pvalue > 0.01


@pytest.mark.parametrize(
    "mode,expected",
    [
        (ValidationMode.dense, [0, 1, 2, 3, 4]),
        (ValidationMode.final, [0]),
        (ValidationMode.mod2, [0, 2, 4]),
    ],
)
def test_validation_levels(mode: ValidationMode, expected):
    assert validation_levels(4, mode) == expected
    discriminator = _cnn_discriminator(mode)
    assert sorted(int(k) for k in discriminator.validators.keys()) == expected
    assert discriminator.log_weights.shape == (len(expected),)


def test_cnn_dense():
    discriminator = _cnn_discriminator()
    x = torch.randn(2, 16, 6)
    h_text = torch.randn(2, 8)
    report = discriminator.validate(x, h_text)

    assert len(report.scores) == 5
    assert [h.shape for h in report.hiddens] == [(2, 2 ** i, 8) for i in range(5)]
    torch.testing.assert_close(report.output, sum(report.scores.values()))
    assert discriminator(x, h_text).shape == (2,)


def test_cnn_weighted_sum():
    discriminator = _cnn_discriminator()
    with torch.no_grad():
        discriminator.log_weights.copy_(torch.tensor([0.0, 1.0, -1.0, 0.5, 2.0]))
    report = discriminator.validate(torch.randn(2, 16, 6), torch.randn(2, 8))
    expected = sum(
        torch.exp(discriminator.log_weights[i]) * report.scores[i] for i in range(5)
    )
    torch.testing.assert_close(report.output, expected)


def test_cnn_zero_parameters():
    discriminator = _cnn_discriminator()
    for p in discriminator.parameters():
        torch.nn.init.zeros_(p)
    output = discriminator(torch.randn(2, 16, 6), torch.randn(2, 8))
    assert torch.all(output == 0)


def test_cnn_validator_isolation():
    discriminator = _cnn_discriminator()
    x = torch.randn(2, 16, 6)
    h_text = torch.randn(2, 8)
    before = discriminator.validate(x, h_text).scores

    with torch.no_grad():
        for p in discriminator.validators["2"].parameters():
            p.add_(1.0)
    after = discriminator.validate(x, h_text).scores

    for i in range(5):
        if i == 2:
            assert not torch.equal(before[i], after[i])
        else:
            assert torch.equal(before[i], after[i])


def test_cnn_wrong_length():
    discriminator = _cnn_discriminator()
    with pytest.raises(ValueError):
        discriminator(torch.randn(2, 8, 6), torch.randn(2, 8))


def test_rnn_output():
    discriminator = _rnn_discriminator()
    x = torch.randn(2, 10, 6)
    h_text = torch.randn(2, 8)
    report = discriminator.validate(x, h_text)
    torch.testing.assert_close(report.output, report.frame_score + report.diff_score)

    with torch.no_grad():
        discriminator.frame_weight.fill_(2.0)
        discriminator.diff_weight.fill_(0.0)
    torch.testing.assert_close(discriminator(x, h_text), 2 * report.frame_score)


def test_rnn_diff_validate_input():
    x = torch.randn(2, 10, 6)
    h_text = torch.randn(2, 8)
    hidden = _rnn_discriminator(DiffValidateInput.hidden).validate(x, h_text)
    diff = _rnn_discriminator(DiffValidateInput.diff).validate(x, h_text)
    torch.testing.assert_close(hidden.frame_score, diff.frame_score)
    assert not torch.allclose(hidden.diff_score, diff.diff_score)


def test_rnn_too_short():
    with pytest.raises(ValueError):
        _rnn_discriminator()(torch.randn(2, 1, 6), torch.randn(2, 8))


def test_gradcheck():
    cnn = _cnn_discriminator(length=4).double()
    rnn = _rnn_discriminator().double()
    h_text = torch.randn(2, 8, dtype=torch.float64)

    x = torch.randn(2, 4, 6, dtype=torch.float64, requires_grad=True)
    assert gradcheck(lambda x: cnn(x, h_text), (x,), eps=1e-6, atol=1e-5)
    assert gradcheck(lambda x: rnn(x, h_text), (x,), eps=1e-6, atol=1e-5)


@pytest.mark.parametrize("mode", list(ValidationMode))
def test_gradcheck_parameters(mode: ValidationMode):
    torch.manual_seed(0)
    h_text = torch.randn(2, 4, dtype=torch.float64)
    x = torch.randn(2, 4, 3, dtype=torch.float64)

    cnn = CnnDiscriminator(
        motion_size=3, hidden_size=4, length=4, kernel_size=3, validation_mode=mode
    )
    assert gradcheck_parameters(cnn, x, h_text)


@pytest.mark.parametrize("diff_validate_input", list(DiffValidateInput))
def test_gradcheck_rnn_parameters(diff_validate_input: DiffValidateInput):
    torch.manual_seed(0)
    h_text = torch.randn(2, 4, dtype=torch.float64)
    x = torch.randn(2, 4, 3, dtype=torch.float64)

    rnn = RnnDiscriminator(
        motion_size=3,
        hidden_size=4,
        layer_num=2,
        diff_validate_input=diff_validate_input,
    )
    assert gradcheck_parameters(rnn, x, h_text)
