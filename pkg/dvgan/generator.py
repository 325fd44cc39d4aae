from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy
import torch
from more_itertools import chunked
from torch import Tensor

from dvgan.config import Config
from dvgan.data.motion_data import NormalizationStats
from dvgan.data.vocabulary import Vocabulary
from dvgan.model import GeneratorModel, create_model, pad_tokens
from dvgan.network.generator import CnnGenerator
from dvgan.utility.checkpoint import load_checkpoint


class Generator(object):
    """
    Inference wrapper: sentences in, denormalized frames (batch_size, length, motion_size) out.
    """

    def __init__(
        self,
        config: Config,
        generator_model: Union[GeneratorModel, Path],
        stats: NormalizationStats,
        vocabulary: Vocabulary,
        use_gpu: bool,
        batch_size: int = 64,
    ):
        self.config = config
        self.stats = stats
        self.vocabulary = vocabulary
        self.batch_size = batch_size
        self.device = torch.device("cuda") if use_gpu else torch.device("cpu")

        if isinstance(generator_model, Path):
            path = generator_model
            generator_model = create_model(
                config.model, config.network, length=config.dataset.length
            ).generator_model
            if path.name.startswith("predictor_"):
                state_dict = torch.load(path, map_location=self.device)
                generator_model.load_state_dict(state_dict)
            else:
                load_checkpoint(
                    path,
                    modules=dict(generator=generator_model),
                    map_location=self.device,
                )
        self.generator_model = generator_model.eval().to(self.device)

    @property
    def length(self):
        return self.config.dataset.length

    def tokens(self, sentences: Sequence[str]):
        return pad_tokens(
            [self.vocabulary.tokenize(s).array for s in sentences]
        ).to(self.device)

    def generate_normalized(self, text: Tensor, length: Optional[int] = None):
        length = length if length is not None else self.length
        generator = self.generator_model.generator
        if isinstance(generator, CnnGenerator):
            if length != generator.length:
                raise ValueError(
                    f"cnn generator is built for {generator.length} frames, {length} requested"
                )
            z = None
        else:
            z = generator.sample_latent(text.shape[0], device=self.device, length=length)

        with torch.no_grad():
            return self.generator_model(text, z=z)

    def generate(self, sentences: Sequence[str], length: Optional[int] = None):
        outputs: List[numpy.ndarray] = []
        for chunk in chunked(sentences, self.batch_size):
            output = self.generate_normalized(self.tokens(chunk), length=length)
            outputs.append(output.cpu().numpy().astype(numpy.float64))
        return self.stats.denormalize(numpy.concatenate(outputs, axis=0))

    def complete(
        self,
        sentences: Sequence[str],
        seed_frames: numpy.ndarray,
        length: Optional[int] = None,
    ):
        """
        seed_frames: denormalized, (batch_size, n, motion_size) with n < length.
        """
        if isinstance(self.generator_model.generator, CnnGenerator):
            raise ValueError("completion requires the rnn generator")

        length = length if length is not None else self.length
        seed_frames = numpy.asarray(seed_frames)
        if len(seed_frames) != len(sentences):
            raise ValueError(f"{len(seed_frames)} seeds for {len(sentences)} sentences")
        if seed_frames.shape[1] >= length:
            raise ValueError(f"{seed_frames.shape[1]} seed frames for {length} frames")

        seed = torch.from_numpy(
            self.stats.normalize(seed_frames).astype(numpy.float32)
        ).to(self.device)
        generator = self.generator_model.generator
        z = generator.sample_latent(
            len(sentences), device=self.device, length=length, final_cut=False
        )
        with torch.no_grad():
            output = self.generator_model(self.tokens(sentences), z=z, seed_frames=seed)
        output = self.stats.denormalize(output.cpu().numpy().astype(numpy.float64))
        # seed frames are returned exactly
        output[:, : seed_frames.shape[1]] = seed_frames
        return output
