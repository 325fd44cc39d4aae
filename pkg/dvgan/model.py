from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy
import torch
import torch.nn.functional as F
from pytorch_trainer import report
from torch import Tensor, nn

from dvgan.config import ModelConfig, NetworkConfig, RankerConfig, RankerNetworkConfig
from dvgan.data.vocabulary import pad_index
from dvgan.network.discriminator import create_discriminator, random_temporal_shift
from dvgan.network.generator import CnnGenerator, create_generator
from dvgan.network.ranker import Ranker, create_ranker
from dvgan.network.text_encoder import TextEncoder
from dvgan.utility.checkpoint import load_checkpoint

Critic = Callable[[Tensor], Tensor]


def interpolate(real: Tensor, fake: Tensor, epsilon: Optional[Tensor] = None):
    """
    epsilon ~ U[0, 1] per sample, the i-th real paired with the i-th fake.
    """
    if epsilon is None:
        epsilon = torch.rand(real.shape[0], device=real.device, dtype=real.dtype)
    epsilon = epsilon.reshape(-1, *([1] * (real.ndim - 1)))
    return epsilon * real + (1 - epsilon) * fake


def gradient_norm(critic: Critic, x: Tensor):
    x = x.detach().requires_grad_(True)
    y = critic(x)
    (grad,) = torch.autograd.grad(y.sum(), x, create_graph=True)
    return torch.sqrt(grad.flatten(start_dim=1).pow(2).sum(dim=1) + 1e-12)


def gradient_penalty(critic: Critic, x: Tensor, weight: float):
    """
    weight * mean over the batch of (|grad_x critic(x)| - 1)^2, norm over every input coordinate.
    """
    norm = gradient_norm(critic, x)
    penalty = weight * (norm - 1).pow(2).mean()
    if not bool(torch.isfinite(penalty)):
        raise FloatingPointError("non-finite gradient penalty")
    return penalty, norm


@dataclass
class WganLosses:
    discriminator_loss: Tensor
    generator_loss: Tensor
    critic_real: Tensor
    critic_fake: Tensor
    gradient_penalty: Tensor
    gradient_norm: Tensor


def wgan_gp_losses(
    critic: Critic,
    real: Tensor,
    fake: Tensor,
    weight: float,
    augment: Optional[Callable[[Tensor], Tensor]] = None,
    epsilon: Optional[Tensor] = None,
):
    if real.shape != fake.shape:
        raise ValueError(f"real {tuple(real.shape)} and fake {tuple(fake.shape)}")

    critic_real = critic(augment(real) if augment is not None else real).mean()
    critic_fake = critic(augment(fake) if augment is not None else fake).mean()

    # penalty on unshifted pairs
    penalty, norm = gradient_penalty(
        critic, interpolate(real, fake.detach(), epsilon=epsilon), weight=weight
    )

    discriminator_loss = -(critic_real - critic_fake) + penalty
    generator_loss = -critic_fake
    if not bool(torch.isfinite(discriminator_loss)):
        raise FloatingPointError("non-finite discriminator loss")

    return WganLosses(
        discriminator_loss=discriminator_loss,
        generator_loss=generator_loss,
        critic_real=critic_real,
        critic_fake=critic_fake,
        gradient_penalty=penalty,
        gradient_norm=norm.mean(),
    )


class GeneratorModel(nn.Module):
    def __init__(self, text_encoder: TextEncoder, generator: nn.Module):
        super().__init__()
        self.text_encoder = text_encoder
        self.generator = generator

    def sample_latent(self, batch_size: int, device: torch.device, **kwargs):
        return self.generator.sample_latent(batch_size, device=device, **kwargs)

    def forward(
        self,
        text: Tensor,
        z=None,
        seed_frames: Optional[Tensor] = None,
        cut_offset: Optional[Tensor] = None,
    ):
        is_cnn = isinstance(self.generator, CnnGenerator)
        if is_cnn and seed_frames is not None:
            raise ValueError("seed frames require the rnn generator")

        h_text = self.text_encoder(text)
        if z is None:
            z = self.sample_latent(
                text.shape[0],
                device=text.device,
                **({} if seed_frames is None else dict(final_cut=False)),
            )
        if is_cnn:
            return self.generator(h_text, z, cut_offset=cut_offset)
        return self.generator(
            h_text, z, seed_frames=seed_frames, cut_offset=cut_offset
        )


class DiscriminatorModel(nn.Module):
    def __init__(self, text_encoder: TextEncoder, discriminator: nn.Module):
        super().__init__()
        self.text_encoder = text_encoder
        self.discriminator = discriminator

    def critic(self, text: Tensor) -> Critic:
        h_text = self.text_encoder(text)
        return lambda x: self.discriminator(x, h_text)

    def forward(self, motion: Tensor, text: Tensor):
        return self.critic(text)(motion)


class Model(nn.Module):
    def __init__(
        self,
        model_config: ModelConfig,
        generator_model: GeneratorModel,
        discriminator_model: DiscriminatorModel,
    ):
        super().__init__()
        self.model_config = model_config
        self.generator_model = generator_model
        self.discriminator_model = discriminator_model

    def augment(self, x: Tensor):
        return random_temporal_shift(x)

    def _losses(self, motion: Tensor, text: Tensor, fake: Tensor):
        return wgan_gp_losses(
            critic=self.discriminator_model.critic(text),
            real=motion,
            fake=fake,
            weight=self.model_config.gradient_penalty_weight,
            augment=self.augment if self.model_config.temporal_shift else None,
        )

    def discriminator_loss(self, motion: Tensor, text: Tensor):
        with torch.no_grad():
            fake = self.generator_model(text)

        losses = self._losses(motion, text, fake)
        report(
            dict(
                discriminator_loss=losses.discriminator_loss,
                critic_real=losses.critic_real,
                critic_fake=losses.critic_fake,
                gradient_penalty=losses.gradient_penalty,
                gradient_norm=losses.gradient_norm,
            ),
            self,
        )
        return losses.discriminator_loss

    def generator_loss(self, text: Tensor):
        fake = self.generator_model(text)
        if self.model_config.temporal_shift:
            fake = self.augment(fake)
        loss = -self.discriminator_model(fake, text).mean()
        if not bool(torch.isfinite(loss)):
            raise FloatingPointError("non-finite generator loss")
        report(dict(generator_loss=loss), self)
        return loss


def create_model(model_config: ModelConfig, network_config: NetworkConfig, length: int):
    def _text_encoder():
        return TextEncoder(
            vocabulary_size=network_config.vocabulary_size,
            hidden_size=network_config.hidden_size,
            layer_num=network_config.lstm_layer_num,
        )

    return Model(
        model_config=model_config,
        generator_model=GeneratorModel(
            text_encoder=_text_encoder(),
            generator=create_generator(network_config, length=length),
        ),
        discriminator_model=DiscriminatorModel(
            text_encoder=_text_encoder(),
            discriminator=create_discriminator(network_config, length=length),
        ),
    )


def pad_tokens(tokens: Sequence[numpy.ndarray]):
    width = max(len(t) for t in tokens)
    array = numpy.full((len(tokens), width), pad_index, dtype=numpy.int64)
    for i, t in enumerate(tokens):
        array[i, : len(t)] = t
    return torch.from_numpy(array)


class RankerModel(nn.Module):
    """
    Candidates index a fixed description pool; candidate 0 is the truth.
    """

    def __init__(self, ranker: Ranker, pool_tokens: Sequence[numpy.ndarray]):
        super().__init__()
        self.ranker = ranker
        self.register_buffer("pool", pad_tokens(pool_tokens), persistent=False)

    def scores(self, motion: Tensor, candidate: Tensor):
        unique, inverse = torch.unique(candidate, return_inverse=True)
        text_embedding = self.ranker.embed_text(self.pool[unique])
        motion_embedding = self.ranker.embed_motion(motion)
        return (motion_embedding.unsqueeze(1) * text_embedding[inverse]).sum(dim=2)

    def forward(self, motion: Tensor, candidate: Tensor):
        batch_size = len(motion)

        scores = self.scores(motion, candidate)
        target = torch.zeros(batch_size, dtype=torch.long, device=scores.device)
        loss = F.cross_entropy(scores, target)
        accuracy = (scores.argmax(dim=1) == 0).float().mean()

        losses = dict(loss=loss, accuracy=accuracy)
        if not self.training:
            losses = {key: (l, batch_size) for key, l in losses.items()}
        report(losses, self)

        return loss


def create_ranker_model(
    config: RankerNetworkConfig, length: int, pool_tokens: Sequence[numpy.ndarray]
):
    return RankerModel(ranker=create_ranker(config, length=length), pool_tokens=pool_tokens)


def load_ranker(config: RankerConfig, path: Path, map_location: Optional[torch.device] = None):
    ranker = create_ranker(config.network, length=config.dataset.length)
    load_checkpoint(path, modules=dict(ranker=ranker), map_location=map_location)
    return ranker.eval()
