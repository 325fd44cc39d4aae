import copy
from typing import List, Sequence

import numpy
import torch
from pytorch_trainer import report, reporter
from pytorch_trainer.dataset import convert
from pytorch_trainer.training import extensions
from torch import Tensor, nn

from dvgan.metric import inception_stats, recall_at_k
from dvgan.model import GeneratorModel, pad_tokens
from dvgan.network.ranker import Ranker, score_matrix


class GenerateEvaluator(nn.Module):
    """
    Generates one clip per test example from its true pool description and
    scores it against the whole pool with a trained ranker. Calls accumulate
    scores; `summarize` reports over everything seen since `reset`.
    """

    def __init__(
        self,
        generator_model: GeneratorModel,
        ranker: Ranker,
        pool_tokens: Sequence[numpy.ndarray],
    ):
        super().__init__()
        self.generator_model = generator_model
        self.ranker = ranker
        self.register_buffer("pool", pad_tokens(pool_tokens), persistent=False)
        self.reset()

    def reset(self):
        self.fake_scores: List[numpy.ndarray] = []
        self.real_scores: List[numpy.ndarray] = []
        self.truths: List[numpy.ndarray] = []

    def __call__(self, motion: Tensor, candidate: Tensor):
        truth = candidate[:, 0]

        with torch.no_grad():
            fake = self.generator_model(self.pool[truth])
            text_embedding = self.ranker.embed_text(self.pool)
            fake_scores = score_matrix(self.ranker.embed_motion(fake), text_embedding)
            real_scores = score_matrix(self.ranker.embed_motion(motion), text_embedding)

        self.fake_scores.append(fake_scores.cpu().numpy())
        self.real_scores.append(real_scores.cpu().numpy())
        self.truths.append(truth.cpu().numpy())

    def summarize(self):
        if len(self.truths) == 0:
            raise ValueError("nothing to summarize")

        fake_scores = numpy.concatenate(self.fake_scores)
        real_scores = numpy.concatenate(self.real_scores)
        truth = numpy.concatenate(self.truths)

        scores = {
            "inception_score": inception_stats(fake_scores).score,
            "recall_1": recall_at_k(fake_scores, truth, 1),
            "real_inception_score": inception_stats(real_scores).score,
        }

        report(scores, self)
        return scores


class WholeSetEvaluator(extensions.Evaluator):
    """
    Feeds every batch to the target, then reports once from `summarize`.
    """

    def evaluate(self):
        iterator = self.get_iterator("main")
        target = self.get_target("main")

        if hasattr(iterator, "reset"):
            iterator.reset()
            it = iterator
        else:
            it = copy.copy(iterator)

        target.reset()
        for batch in it:
            in_arrays = convert._call_converter(self.converter, batch, self.device)
            target(**in_arrays)

        observation = {}
        with reporter.report_scope(observation):
            target.summarize()
        target.reset()
        return observation
