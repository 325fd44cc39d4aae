from typing import List, Optional, Union

import torch
import torch.nn.functional as F
from torch import Tensor, nn

from dvgan.config import GeneratorType, NetworkConfig
from dvgan.network.primitive import Conv1d, StackedLSTM, upsample2x

Latent = Union[List[Tensor], Tensor]


def random_cut_offset(
    batch_size: int,
    length: int,
    device: Optional[torch.device] = None,
    generator: Optional[torch.Generator] = None,
):
    return torch.randint(
        0, length + 1, (batch_size,), device=device, generator=generator
    )


def final_cut(tape: Tensor, length: int, offset: Optional[Tensor] = None):
    """
    tape: (batch_size, 2 * length, ?), offset: (batch_size,) in [0, length]
    """
    if tape.shape[1] != 2 * length:
        raise ValueError(f"final_cut: tape length {tape.shape[1]}, expected {2 * length}")
    if offset is None:
        offset = random_cut_offset(tape.shape[0], length, device=tape.device)
    if bool(torch.any((offset < 0) | (offset > length))):
        raise ValueError(f"final_cut: offset out of [0, {length}]")

    index = offset.unsqueeze(1) + torch.arange(length, device=tape.device)
    index = index.unsqueeze(2).expand(-1, -1, tape.shape[2])
    return torch.gather(tape, 1, index)


class Plot(nn.Module):
    def __init__(self, hidden_size: int, kernel_size: int):
        super().__init__()
        self.pre = Conv1d(hidden_size, hidden_size, kernel_size)
        self.post = Conv1d(hidden_size, hidden_size, kernel_size)

    def forward(self, z: Tensor, h_text: Tensor):
        h = F.relu(self.pre(z) + h_text.unsqueeze(1))
        return self.post(h)


class Residual(nn.Module):
    def __init__(self, hidden_size: int, kernel_size: int):
        super().__init__()
        self.pre = Conv1d(hidden_size, hidden_size, kernel_size)
        self.post = Conv1d(hidden_size, hidden_size, kernel_size)

    def forward(self, h: Tensor, p: Tensor):
        r = F.relu(upsample2x(self.pre(h)) + p)
        return upsample2x(h) + self.post(r)


class CnnGenerator(nn.Module):
    def __init__(
        self,
        motion_size: int,
        hidden_size: int,
        length: int,
        final_cut: bool,
        kernel_size: int,
    ):
        super().__init__()
        self.motion_size = motion_size
        self.hidden_size = hidden_size
        self.length = length
        self.final_cut = final_cut

        self.tape_length = 2 * length if final_cut else length
        self.level_num = self.tape_length.bit_length() - 1
        if 2 ** self.level_num != self.tape_length:
            raise ValueError(f"length must be a power of two: {length}")

        self.plots = nn.ModuleList(
            [Plot(hidden_size, kernel_size) for _ in range(self.level_num + 1)]
        )
        self.residuals = nn.ModuleList(
            [Residual(hidden_size, kernel_size) for _ in range(self.level_num)]
        )
        self.decode = Conv1d(hidden_size, motion_size, 1)

    def sample_latent(self, batch_size: int, device: Optional[torch.device] = None):
        return [
            torch.randn(batch_size, 2 ** i, self.hidden_size, device=device)
            for i in range(self.level_num + 1)
        ]

    def generate_tape(self, h_text: Tensor, z: List[Tensor]):
        if len(z) != self.level_num + 1:
            raise ValueError(f"{len(z)} latent levels, expected {self.level_num + 1}")
        for i, z_i in enumerate(z):
            if z_i.shape[1:] != (2 ** i, self.hidden_size):
                raise ValueError(f"latent level {i}: shape {tuple(z_i.shape)}")

        h = self.plots[0](z[0], h_text)
        hiddens = [h]
        for residual, plot, z_i in zip(self.residuals, self.plots[1:], z[1:]):
            h = residual(h, plot(z_i, h_text))
            hiddens.append(h)
        return self.decode(h), hiddens

    def forward(self, h_text: Tensor, z: List[Tensor], cut_offset: Optional[Tensor] = None):
        tape, _ = self.generate_tape(h_text, z)
        if self.final_cut:
            return final_cut(tape, self.length, cut_offset)
        return tape


class VectorPlot(nn.Module):
    def __init__(self, hidden_size: int):
        super().__init__()
        self.pre = nn.Linear(hidden_size, hidden_size)
        self.post = nn.Linear(hidden_size, hidden_size)

    def forward(self, z: Tensor, h_text: Tensor):
        return self.post(F.relu(self.pre(z) + h_text))


class RnnGenerator(nn.Module):
    """
    Generates frame differences with an LSTM; any length is accepted.
    """

    def __init__(
        self,
        motion_size: int,
        hidden_size: int,
        length: int,
        final_cut: bool,
        layer_num: int,
    ):
        super().__init__()
        self.motion_size = motion_size
        self.hidden_size = hidden_size
        self.length = length
        self.final_cut = final_cut

        self.initial_plot = VectorPlot(hidden_size)
        self.initial_decode = nn.Linear(hidden_size, motion_size)
        self.plot = VectorPlot(hidden_size)
        self.pose_encode = nn.Linear(motion_size, hidden_size)
        self.lstm = StackedLSTM(2 * hidden_size, hidden_size, layer_num)
        self.diff_decode = nn.Linear(hidden_size, motion_size)

    def sample_latent(
        self,
        batch_size: int,
        device: Optional[torch.device] = None,
        length: Optional[int] = None,
        final_cut: Optional[bool] = None,
    ):
        length = length if length is not None else self.length
        final_cut = final_cut if final_cut is not None else self.final_cut
        step_num = 2 * length if final_cut else length
        return torch.randn(batch_size, step_num, self.hidden_size, device=device)

    def generate_tape(
        self, h_text: Tensor, z: Tensor, seed_frames: Optional[Tensor] = None
    ):
        """
        z: (batch_size, step_num, hidden_size), seed_frames: (batch_size, n, motion_size)
        """
        step_num = z.shape[1]
        seed_num = 0
        if seed_frames is not None:
            seed_num = seed_frames.shape[1]
            if seed_frames.shape[2] != self.motion_size:
                raise ValueError(
                    f"seed width {seed_frames.shape[2]}, expected {self.motion_size}"
                )
            if not 0 < seed_num < step_num:
                raise ValueError(f"{seed_num} seed frames for {step_num} frames")

        if seed_num > 0:
            a = seed_frames[:, 0]
        else:
            a = self.initial_decode(self.initial_plot(z[:, 0], h_text))

        frames = [a]
        diffs = []
        state = None
        for t in range(1, step_num):
            p = self.plot(z[:, t], h_text)
            d, state = self.lstm.step(torch.cat((self.pose_encode(a), p), dim=1), state)
            diff = self.diff_decode(d)
            a = a + diff
            if t < seed_num:
                a = seed_frames[:, t]
            frames.append(a)
            diffs.append(diff)
        return torch.stack(frames, dim=1), diffs

    def forward(
        self,
        h_text: Tensor,
        z: Tensor,
        seed_frames: Optional[Tensor] = None,
        cut_offset: Optional[Tensor] = None,
    ):
        tape, _ = self.generate_tape(h_text, z, seed_frames=seed_frames)
        if self.final_cut and seed_frames is None:
            return final_cut(tape, tape.shape[1] // 2, cut_offset)
        return tape


def create_generator(config: NetworkConfig, length: int):
    if config.generator_type == GeneratorType.cnn:
        return CnnGenerator(
            motion_size=config.motion_size,
            hidden_size=config.hidden_size,
            length=length,
            final_cut=config.final_cut,
            kernel_size=config.kernel_size,
        )
    return RnnGenerator(
        motion_size=config.motion_size,
        hidden_size=config.hidden_size,
        length=length,
        final_cut=config.final_cut,
        layer_num=config.lstm_layer_num,
    )
