import torch
from torch import Tensor, nn

from dvgan.data.vocabulary import pad_index
from dvgan.network.primitive import StackedLSTM, final_state_vector


class TextEncoder(nn.Module):
    """
    Word embeddings read by a stacked LSTM; the hidden and cell states of every
    layer after the last word are concatenated and projected to `hidden_size`.
    """

    def __init__(self, vocabulary_size: int, hidden_size: int, layer_num: int = 2):
        super().__init__()
        self.hidden_size = hidden_size
        self.embedding = nn.Embedding(
            vocabulary_size, hidden_size, padding_idx=pad_index
        )
        self.lstm = StackedLSTM(hidden_size, hidden_size, layer_num)
        self.project = nn.Linear(2 * layer_num * hidden_size, hidden_size)

    def encode(self, embedded: Tensor, mask: Tensor):
        _, state = self.lstm(embedded, mask=mask)
        return self.project(final_state_vector(state))

    def forward(self, text: Tensor):
        """
        text: (batch_size, length) int64 padded with the pad index, returns (batch_size, hidden_size)
        """
        mask = text != pad_index
        if not bool(torch.all(mask.any(dim=1))):
            raise ValueError("empty description")
        return self.encode(self.embedding(text), mask)
