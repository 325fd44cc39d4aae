import torch
import torch.nn.functional as F
from torch import Tensor, nn

from dvgan.config import RankerNetworkConfig, RankerType
from dvgan.network.discriminator import DownResidual
from dvgan.network.primitive import Conv1d, StackedLSTM
from dvgan.network.text_encoder import TextEncoder

norm_floor = 1e-12


class Ranker(nn.Module):
    """
    Scores a description against an animation by the dot product of the text
    embedding with the L2-normalized animation embedding.
    """

    def __init__(self, vocabulary_size: int, hidden_size: int, layer_num: int):
        super().__init__()
        self.text_encoder = TextEncoder(vocabulary_size, hidden_size, layer_num)

    def encode_motion(self, x: Tensor) -> Tensor:
        raise NotImplementedError()

    def embed_motion(self, x: Tensor):
        return F.normalize(self.encode_motion(x), dim=1, eps=norm_floor)

    def embed_text(self, text: Tensor):
        return self.text_encoder(text)

    def forward(self, x: Tensor, text: Tensor):
        """
        Pairwise scores, (motion_batch_size, text_batch_size).
        """
        return score_matrix(self.embed_motion(x), self.embed_text(text))


def score_matrix(motion_embedding: Tensor, text_embedding: Tensor):
    return motion_embedding @ text_embedding.transpose(0, 1)


class CnnRanker(Ranker):
    def __init__(
        self,
        motion_size: int,
        vocabulary_size: int,
        hidden_size: int,
        length: int,
        kernel_size: int,
        layer_num: int,
    ):
        super().__init__(vocabulary_size, hidden_size, layer_num)
        self.length = length
        level_num = length.bit_length() - 1
        if 2 ** level_num != length:
            raise ValueError(f"length must be a power of two: {length}")

        self.encode = Conv1d(motion_size, hidden_size, 1)
        self.residuals = nn.ModuleList(
            [DownResidual(hidden_size, kernel_size) for _ in range(level_num)]
        )

    def encode_motion(self, x: Tensor):
        if x.shape[1] != self.length:
            raise ValueError(f"input length {x.shape[1]}, expected {self.length}")
        h = self.encode(x)
        for residual in self.residuals:
            h = residual(h)
        return h.squeeze(1)


class RnnRanker(Ranker):
    def __init__(
        self,
        motion_size: int,
        vocabulary_size: int,
        hidden_size: int,
        layer_num: int,
    ):
        super().__init__(vocabulary_size, hidden_size, layer_num)
        self.encode = Conv1d(motion_size, hidden_size, 1)
        self.diff_encode = Conv1d(motion_size, hidden_size, 1)
        self.lstm = StackedLSTM(hidden_size, hidden_size, layer_num)
        self.diff_post = Conv1d(hidden_size, hidden_size, 1)
        self.combine = nn.Linear(2 * hidden_size, hidden_size)

    def encode_motion(self, x: Tensor):
        if x.shape[1] < 2:
            raise ValueError(f"at least 2 frames required: {x.shape[1]}")
        h_a = self.encode(x)
        v = self.diff_encode(x[:, 1:] - x[:, :-1])
        h_d, _ = self.lstm(v)
        return self.combine(
            torch.cat((self.diff_post(h_d).mean(dim=1), h_a.mean(dim=1)), dim=1)
        )


def create_ranker(config: RankerNetworkConfig, length: int):
    if config.ranker_type == RankerType.cnn:
        return CnnRanker(
            motion_size=config.motion_size,
            vocabulary_size=config.vocabulary_size,
            hidden_size=config.hidden_size,
            length=length,
            kernel_size=config.kernel_size,
            layer_num=config.lstm_layer_num,
        )
    return RnnRanker(
        motion_size=config.motion_size,
        vocabulary_size=config.vocabulary_size,
        hidden_size=config.hidden_size,
        layer_num=config.lstm_layer_num,
    )
