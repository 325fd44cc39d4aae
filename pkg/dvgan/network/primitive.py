from typing import List, Optional, Sequence, Tuple

import torch
import torch.nn.functional as F
from torch import Tensor, nn

State = List[Tuple[Tensor, Tensor]]  # (hidden, cell) per layer


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None):
    if x.shape[-1] != weight.shape[1]:
        raise ValueError(f"linear: input {tuple(x.shape)}, weight {tuple(weight.shape)}")
    return F.linear(x, weight, bias)


def conv1d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None):
    """
    x: (batch_size, length, in_channels), weight: (out_channels, in_channels, size).
    Stride 1 with zero padding, so the length is preserved.
    """
    size = weight.shape[2]
    if size % 2 != 1:
        raise ValueError(f"conv1d: kernel size must be odd: {size}")
    if x.ndim != 3 or x.shape[2] != weight.shape[1]:
        raise ValueError(f"conv1d: input {tuple(x.shape)}, weight {tuple(weight.shape)}")
    h = F.conv1d(x.transpose(1, 2), weight, bias, padding=(size - 1) // 2)
    return h.transpose(1, 2)


def downsample2x(x: Tensor):
    if x.shape[1] % 2 != 0:
        raise ValueError(f"downsample2x: odd length {x.shape[1]}")
    return F.avg_pool1d(x.transpose(1, 2), kernel_size=2).transpose(1, 2)


def upsample2x(x: Tensor):
    return x.repeat_interleave(2, dim=1)


def lstm_step(
    x: Tensor,
    state: State,
    weights: Sequence[Tuple[Tensor, Tensor, Tensor, Tensor]],
) -> Tuple[Tensor, State]:
    """
    weights: (weight_ih, weight_hh, bias_ih, bias_hh) per layer, gates ordered
    input, forget, cell, output.
    """
    if len(state) != len(weights):
        raise ValueError(f"lstm_step: {len(state)} states for {len(weights)} layers")

    new_state: State = []
    h_in = x
    for (h, c), (w_ih, w_hh, b_ih, b_hh) in zip(state, weights):
        if h_in.shape[-1] != w_ih.shape[1] or h.shape[-1] != w_hh.shape[1]:
            raise ValueError(f"lstm_step: input {tuple(h_in.shape)}, weight {tuple(w_ih.shape)}")
        gates = F.linear(h_in, w_ih, b_ih) + F.linear(h, w_hh, b_hh)
        i, f, g, o = gates.chunk(4, dim=-1)
        c = torch.sigmoid(f) * c + torch.sigmoid(i) * torch.tanh(g)
        h = torch.sigmoid(o) * torch.tanh(c)
        new_state.append((h, c))
        h_in = h
    return h_in, new_state


class Conv1d(nn.Conv1d):
    """
    Conv1d over (batch_size, length, channels) tensors with length-preserving padding.
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 1):
        if kernel_size % 2 != 1:
            raise ValueError(f"kernel size must be odd: {kernel_size}")
        super().__init__(
            in_channels, out_channels, kernel_size, padding=(kernel_size - 1) // 2
        )

    def forward(self, x: Tensor):
        return conv1d(x, self.weight, self.bias)


class StackedLSTM(nn.Module):
    def __init__(self, input_size: int, hidden_size: int, layer_num: int):
        super().__init__()
        self.hidden_size = hidden_size
        self.cells = nn.ModuleList(
            [
                nn.LSTMCell(input_size if i == 0 else hidden_size, hidden_size)
                for i in range(layer_num)
            ]
        )

    @property
    def weights(self):
        return [(c.weight_ih, c.weight_hh, c.bias_ih, c.bias_hh) for c in self.cells]

    def initial_state(self, x: Tensor) -> State:
        zeros = x.new_zeros(x.shape[0], self.hidden_size)
        return [(zeros, zeros) for _ in self.cells]

    def step(self, x: Tensor, state: Optional[State] = None):
        if state is None:
            state = self.initial_state(x)
        return lstm_step(x, state, self.weights)

    def forward(
        self,
        x: Tensor,
        state: Optional[State] = None,
        mask: Optional[Tensor] = None,
    ):
        """
        x: (batch_size, length, ?), mask: (batch_size, length), False steps keep the state.
        """
        if state is None:
            state = self.initial_state(x)

        outputs = []
        for t in range(x.shape[1]):
            h, new_state = self.step(x[:, t], state)
            if mask is not None:
                m = mask[:, t].unsqueeze(1)
                new_state = [
                    (torch.where(m, nh, oh), torch.where(m, nc, oc))
                    for (nh, nc), (oh, oc) in zip(new_state, state)
                ]
                h = new_state[-1][0]
            outputs.append(h)
            state = new_state
        return torch.stack(outputs, dim=1), state


def final_state_vector(state: State):
    """
    Hidden and cell states of every layer, concatenated.
    """
    return torch.cat([t for h, c in state for t in (h, c)], dim=1)
