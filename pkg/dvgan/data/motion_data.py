from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy
from scipy.spatial.transform import Rotation

from dvgan.data.skeleton import Skeleton

std_floor = 1e-8


@dataclass
class MotionClip:
    array: numpy.ndarray  # shape: (N, M)
    rate: float
    skeleton: Optional[Skeleton] = None

    def __post_init__(self):
        assert self.array.ndim == 2, f"frames must be 2d: {self.array.shape}"
        assert numpy.all(numpy.isfinite(self.array)), "frames must be finite"
        if self.skeleton is not None:
            assert self.array.shape[1] == self.skeleton.channel_count

    def __len__(self):
        return len(self.array)

    @property
    def channel_names(self):
        if self.skeleton is not None:
            return self.skeleton.channel_names
        return [f"channel{i}" for i in range(self.array.shape[1])]

    def replace(self, array: numpy.ndarray, rate: Optional[float] = None):
        return MotionClip(
            array=array,
            rate=self.rate if rate is None else rate,
            skeleton=self.skeleton,
        )

    def resample(self, rate: float):
        stride = self.rate / rate
        if stride < 1 or abs(stride - round(stride)) > 1e-9 * stride:
            raise ValueError(
                f"cannot resample {self.rate}Hz to {rate}Hz: stride {stride} is not a positive integer"
            )
        return self.replace(array=self.array[:: int(round(stride))], rate=rate)

    def sample(self, length: int, rng: numpy.random.RandomState = None):
        if rng is None:
            rng = numpy.random
        if len(self) < length:
            raise ValueError(f"clip is too short: {len(self)} < {length}")
        offset = rng.randint(len(self) - length + 1)
        return self.replace(array=self.array[offset : offset + length])

    def write_csv(self, path: Path, expmap: bool = False):
        """
        expmap: rotation columns hold exponential maps and are named by axis.
        """
        names = self.channel_names
        if expmap and self.skeleton is not None:
            names = self.skeleton.expmap_channel_names

        numpy.savetxt(
            str(path),
            self.array,
            delimiter=",",
            header=",".join(names),
            comments="",
            fmt="%.6f",
        )

    @classmethod
    def load(cls, path: Path, skeleton: Optional[Skeleton] = None):
        d: Dict = numpy.load(str(path), allow_pickle=True).item()
        array, rate = d["array"], d["rate"]

        if array.ndim == 1:
            array = array[:, numpy.newaxis]

        return cls(array=array, rate=rate, skeleton=skeleton)

    def save(self, path: Path):
        numpy.save(str(path), dict(array=self.array, rate=self.rate))


@dataclass
class NormalizationStats:
    mean: numpy.ndarray  # shape: (M,)
    std: numpy.ndarray  # shape: (M,)

    @property
    def constant(self):
        return self.std <= std_floor

    def normalize(self, array: numpy.ndarray):
        output = (array - self.mean) / self.std
        return numpy.where(self.constant, 0.0, output)

    def denormalize(self, array: numpy.ndarray):
        output = array * self.std + self.mean
        return numpy.where(self.constant, self.mean, output)

    @classmethod
    def load(cls, path: Path):
        d: Dict = numpy.load(str(path), allow_pickle=True).item()
        return cls(mean=d["mean"], std=d["std"])

    def save(self, path: Path):
        numpy.save(str(path), dict(mean=self.mean, std=self.std))


def compute_stats(clips: Sequence[MotionClip]):
    if len(clips) == 0:
        raise ValueError("cannot compute stats of no clips")
    widths = {c.array.shape[1] for c in clips}
    if len(widths) != 1:
        raise ValueError(f"inconsistent channel counts: {sorted(widths)}")

    array = numpy.concatenate([c.array for c in clips], axis=0).astype(numpy.float64)
    mean = array.mean(axis=0)
    std = numpy.sqrt(((array - mean) ** 2).mean(axis=0))
    return NormalizationStats(mean=mean, std=numpy.maximum(std, std_floor))


def to_expmap(clip: MotionClip):
    """
    BVH euler channels (degrees) to exponential maps (radians), joint by joint.
    Position channels are left untouched.
    """
    assert clip.skeleton is not None
    array = clip.array.astype(numpy.float64).copy()
    for columns, order in clip.skeleton.rotation_groups():
        rotation = Rotation.from_euler(order, array[:, columns], degrees=True)
        array[:, columns] = rotation.as_rotvec()
    return clip.replace(array=array)


def to_euler(clip: MotionClip):
    assert clip.skeleton is not None
    array = clip.array.astype(numpy.float64).copy()
    for columns, order in clip.skeleton.rotation_groups():
        rotation = Rotation.from_rotvec(array[:, columns])
        array[:, columns] = rotation.as_euler(order, degrees=True)
    return clip.replace(array=array)
