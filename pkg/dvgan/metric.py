from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy
from scipy.special import softmax
from scipy.stats import entropy

from dvgan.data.motion_data import MotionClip, to_euler
from dvgan.data.rotation import expmap_to_rotmat, rotmat_to_euler

standard_horizons = (80, 160, 320, 400)  # millisecond


def recall_at_k(scores: numpy.ndarray, truth: Sequence[int], k: int):
    """
    Percentage of queries whose truth is among the k best candidates; equal
    scores rank the lower candidate index first.
    """
    scores = numpy.asarray(scores, dtype=numpy.float64)
    truth = numpy.asarray(truth)
    query_num, candidate_num = scores.shape
    if k > candidate_num:
        raise ValueError(f"k={k} exceeds {candidate_num} candidates")
    if len(truth) != query_num:
        raise ValueError(f"{len(truth)} truths for {query_num} queries")

    truth_scores = scores[numpy.arange(query_num), truth]
    index = numpy.arange(candidate_num)
    better = (scores > truth_scores[:, None]) | (
        (scores == truth_scores[:, None]) & (index[None, :] < truth[:, None])
    )
    rank = better.sum(axis=1)
    return float(numpy.mean(rank < k) * 100)


@dataclass
class InceptionStats:
    posterior: numpy.ndarray  # (clip_num, action_num)
    marginal: numpy.ndarray
    entropy: float
    conditional_entropy: float
    score: float

    def contributions(self, actions: Optional[Sequence[str]] = None):
        """
        Per-action share of the score, mean_x p(a|x) (ln p(a|x) - ln p(a)).
        """
        p = self.posterior
        with numpy.errstate(divide="ignore", invalid="ignore"):
            terms = numpy.where(p > 0, p * (numpy.log(p) - numpy.log(self.marginal)), 0)
        values = terms.mean(axis=0)
        if actions is None:
            actions = [str(i) for i in range(len(values))]
        return {a: float(v) for a, v in zip(actions, values)}


def inception_stats_from_posterior(posterior: numpy.ndarray):
    posterior = numpy.asarray(posterior, dtype=numpy.float64)
    if len(posterior) == 0:
        raise ValueError("no clips to score")
    if posterior.shape[1] < 2:
        raise ValueError(f"at least 2 actions required: {posterior.shape[1]}")

    marginal = posterior.mean(axis=0)
    h = float(entropy(marginal))
    h_conditional = float(numpy.mean([entropy(p) for p in posterior]))
    return InceptionStats(
        posterior=posterior,
        marginal=marginal,
        entropy=h,
        conditional_entropy=h_conditional,
        score=h - h_conditional,
    )


def inception_stats(scores: numpy.ndarray):
    """
    scores: ranker scores, (clip_num, action_num); posterior by softmax with temperature 1.
    """
    scores = numpy.asarray(scores, dtype=numpy.float64)
    if scores.ndim != 2 or len(scores) == 0:
        raise ValueError(f"scores must be (clip_num, action_num): {scores.shape}")
    return inception_stats_from_posterior(softmax(scores, axis=1))


def inception_score(scores: numpy.ndarray):
    return inception_stats(scores).score


def horizon_frame(seed_num: int, horizon: float, rate: float):
    """
    Frame index of a horizon in millisecond, counted from the last seed frame.
    """
    offset = horizon * rate / 1000
    if not numpy.isclose(offset, round(offset)):
        raise ValueError(f"{horizon}ms at {rate}Hz is not a whole frame")
    return seed_num - 1 + int(round(offset))


def default_horizons(rate: float, seed_num: int, length: int) -> List[float]:
    """
    The standard horizons that fall on whole frames inside the clip, or one
    horizon per generated frame when none does.
    """
    horizons = []
    for h in standard_horizons:
        try:
            frame = horizon_frame(seed_num, h, rate)
        except ValueError:
            continue
        if frame < length:
            horizons.append(float(h))
    if len(horizons) > 0:
        return horizons
    return [1000 * i / rate for i in range(1, length - seed_num + 1)]


def _euler_array(clip: MotionClip):
    """
    Euler angles (radian) for every joint; skeleton-less clips are read as
    expmap triples and converted in ZYX order.
    """
    if clip.skeleton is not None:
        columns = [c for cs, _ in clip.skeleton.rotation_groups() for c in cs]
        return numpy.deg2rad(to_euler(clip).array[:, columns])

    array = clip.array
    if array.shape[1] % 3 != 0:
        raise ValueError(f"{array.shape[1]} channels are not expmap triples")
    expmap = array.reshape(len(array), -1, 3)
    euler = numpy.stack(
        [
            numpy.stack([rotmat_to_euler(expmap_to_rotmat(v), "ZYX") for v in frame])
            for frame in expmap
        ]
    )
    return euler.reshape(len(array), -1)


def completion_error(
    predicted: MotionClip,
    truth: MotionClip,
    seed_num: int,
    horizons: Optional[Sequence[float]] = None,
) -> Dict[float, float]:
    if predicted.array.shape != truth.array.shape:
        raise ValueError(
            f"predicted {predicted.array.shape} and truth {truth.array.shape}"
        )
    if abs(predicted.rate - truth.rate) > 1e-6:
        raise ValueError(f"rates differ: {predicted.rate}, {truth.rate}")
    if horizons is None:
        horizons = default_horizons(truth.rate, seed_num, len(truth))

    frames = [horizon_frame(seed_num, h, truth.rate) for h in horizons]
    for h, f in zip(horizons, frames):
        if f >= len(truth):
            raise ValueError(f"horizon {h}ms is beyond the clip ({len(truth)} frames)")

    predicted_euler = _euler_array(predicted)
    truth_euler = _euler_array(truth)
    return {
        h: float(numpy.linalg.norm(predicted_euler[f] - truth_euler[f]))
        for h, f in zip(horizons, frames)
    }


def zero_velocity_baseline(seed: numpy.ndarray, length: int):
    seed = numpy.asarray(seed)
    if len(seed) == 0:
        raise ValueError("empty seed")
    if len(seed) > length:
        raise ValueError(f"{len(seed)} seed frames for {length} frames")
    rest = numpy.repeat(seed[-1:], length - len(seed), axis=0)
    return numpy.concatenate([seed, rest], axis=0)


def recall_report(scores: numpy.ndarray, truth: Sequence[int], ks: Sequence[int] = (1, 3, 5, 10)):
    candidate_num = numpy.asarray(scores).shape[1]
    return {f"recall_{k}": recall_at_k(scores, truth, k) for k in ks if k <= candidate_num}


def mean_errors(errors: List[Dict[float, float]]):
    keys = errors[0].keys()
    return {k: float(numpy.mean([e[k] for e in errors])) for k in keys}
