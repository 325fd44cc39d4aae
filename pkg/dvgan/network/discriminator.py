from dataclasses import dataclass
from typing import Dict, List, Optional

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from dvgan.config import DiffValidateInput, DiscriminatorType, NetworkConfig, ValidationMode
from dvgan.network.primitive import Conv1d, StackedLSTM, downsample2x


def temporal_shift(x: Tensor, shift: Tensor):
    """
    x: (batch_size, length, ?), shift: (batch_size,). Positive shifts move content
    to later frames, vacated frames are zero.
    """
    length = x.shape[1]
    source = torch.arange(length, device=x.device).unsqueeze(0) - shift.unsqueeze(1)
    valid = (source >= 0) & (source < length)
    index = source.clamp(0, length - 1).unsqueeze(2).expand(-1, -1, x.shape[2])
    return torch.gather(x, 1, index) * valid.unsqueeze(2).to(x.dtype)


def random_shift(
    batch_size: int,
    length: int,
    device: Optional[torch.device] = None,
    generator: Optional[torch.Generator] = None,
):
    half = length // 2
    return torch.randint(
        -half, half + 1, (batch_size,), device=device, generator=generator
    )


def random_temporal_shift(x: Tensor):
    return temporal_shift(x, random_shift(x.shape[0], x.shape[1], device=x.device))


class DownResidual(nn.Module):
    def __init__(self, hidden_size: int, kernel_size: int):
        super().__init__()
        self.pre = Conv1d(hidden_size, hidden_size, kernel_size)
        self.post = Conv1d(hidden_size, hidden_size, kernel_size)

    def forward(self, h: Tensor):
        r = F.relu(downsample2x(self.pre(h)))
        return downsample2x(h) + self.post(r)


class Validator(nn.Module):
    """
    Two-layer per-frame MLP on the hidden sequence and the text, averaged over frames.
    """

    def __init__(self, hidden_size: int):
        super().__init__()
        self.hidden = Conv1d(hidden_size, hidden_size, 1)
        self.text = nn.Linear(hidden_size, hidden_size)
        self.post = Conv1d(hidden_size, 1, 1)

    def forward(self, h: Tensor, h_text: Tensor):
        s = self.post(F.relu(self.hidden(h) + self.text(h_text).unsqueeze(1)))
        return s.squeeze(2).mean(dim=1)


def validation_levels(level_num: int, mode: ValidationMode):
    levels = list(range(level_num + 1))
    if mode == ValidationMode.final:
        return [0]
    if mode == ValidationMode.mod2:
        return [i for i in levels if i % 2 == 0]
    return levels


@dataclass
class ValidationReport:
    scores: Dict[int, Tensor]  # level -> (batch_size,)
    weights: Dict[int, Tensor]
    output: Tensor
    hiddens: List[Tensor]  # level i at index i


class CnnDiscriminator(nn.Module):
    def __init__(
        self,
        motion_size: int,
        hidden_size: int,
        length: int,
        kernel_size: int,
        validation_mode: ValidationMode,
    ):
        super().__init__()
        self.length = length
        self.level_num = length.bit_length() - 1
        if 2 ** self.level_num != length:
            raise ValueError(f"length must be a power of two: {length}")

        self.encode = Conv1d(motion_size, hidden_size, 1)
        self.residuals = nn.ModuleList(
            [DownResidual(hidden_size, kernel_size) for _ in range(self.level_num)]
        )
        self.levels = validation_levels(self.level_num, validation_mode)
        self.validators = nn.ModuleDict({str(i): Validator(hidden_size) for i in self.levels})
        self.log_weights = nn.Parameter(torch.zeros(len(self.levels)))

    def validate(self, x: Tensor, h_text: Tensor):
        if x.shape[1] != self.length:
            raise ValueError(f"input length {x.shape[1]}, expected {self.length}")

        h = self.encode(x)
        hiddens = [h]
        for residual in self.residuals:
            h = residual(h)
            hiddens.append(h)
        hiddens.reverse()

        scores = {i: self.validators[str(i)](hiddens[i], h_text) for i in self.levels}
        weights = {i: w for i, w in zip(self.levels, self.log_weights)}
        output = sum(torch.exp(weights[i]) * scores[i] for i in self.levels)
        return ValidationReport(
            scores=scores, weights=weights, output=output, hiddens=hiddens
        )

    def forward(self, x: Tensor, h_text: Tensor):
        return self.validate(x, h_text).output


@dataclass
class RnnValidationReport:
    frame_score: Tensor
    diff_score: Tensor
    frame_weight: Tensor
    diff_weight: Tensor
    output: Tensor


class RnnDiscriminator(nn.Module):
    def __init__(
        self,
        motion_size: int,
        hidden_size: int,
        layer_num: int,
        diff_validate_input: DiffValidateInput,
    ):
        super().__init__()
        self.diff_validate_input = diff_validate_input

        self.frame_encode = nn.Linear(motion_size, hidden_size)
        self.diff_encode = nn.Linear(motion_size, hidden_size)
        self.lstm = StackedLSTM(hidden_size, hidden_size, layer_num)
        self.frame_validator = Validator(hidden_size)
        self.diff_validator = Validator(hidden_size)
        self.frame_weight = nn.Parameter(torch.ones(()))
        self.diff_weight = nn.Parameter(torch.ones(()))

    def validate(self, x: Tensor, h_text: Tensor):
        if x.shape[1] < 2:
            raise ValueError(f"at least 2 frames required: {x.shape[1]}")

        z = self.frame_encode(x)
        d = self.diff_encode(x[:, 1:] - x[:, :-1])
        h, _ = self.lstm(d)

        frame_score = self.frame_validator(z, h_text)
        diff_score = self.diff_validator(
            h if self.diff_validate_input == DiffValidateInput.hidden else d, h_text
        )
        output = self.frame_weight * frame_score + self.diff_weight * diff_score
        return RnnValidationReport(
            frame_score=frame_score,
            diff_score=diff_score,
            frame_weight=self.frame_weight,
            diff_weight=self.diff_weight,
            output=output,
        )

    def forward(self, x: Tensor, h_text: Tensor):
        return self.validate(x, h_text).output


def create_discriminator(config: NetworkConfig, length: int):
    if config.discriminator_type == DiscriminatorType.cnn:
        return CnnDiscriminator(
            motion_size=config.motion_size,
            hidden_size=config.hidden_size,
            length=length,
            kernel_size=config.kernel_size,
            validation_mode=config.validation_mode,
        )
    return RnnDiscriminator(
        motion_size=config.motion_size,
        hidden_size=config.hidden_size,
        layer_num=config.lstm_layer_num,
        diff_validate_input=config.diff_validate_input,
    )
