from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy

from dvgan.data.bvh import save_bvh
from dvgan.data.motion_data import MotionClip
from dvgan.data.skeleton import Joint, Skeleton

_rotation = ["Zrotation", "Xrotation", "Yrotation"]


@dataclass
class Sinusoid:
    channel: int
    frequency: float  # Hz
    amplitude: float  # degree
    phase: float = 0.0  # radian


@dataclass
class SyntheticMotionRecipe:
    actions: Dict[str, List[Sinusoid]]
    channel_size: int = 6
    noise: float = 0.5  # degree
    rate: float = 120
    second: float = 6

    def __post_init__(self):
        signatures = [
            tuple(sorted((s.channel, s.frequency) for s in sinusoids))
            for sinusoids in self.actions.values()
        ]
        assert len(set(signatures)) == len(signatures), "actions must differ"
        for sinusoids in self.actions.values():
            for s in sinusoids:
                assert 0 <= s.channel < self.channel_size


def default_skeleton():
    return Skeleton(
        joints=[
            Joint(
                name="Hips",
                parent=-1,
                offset=numpy.zeros(3),
                channels=list(_rotation),
            ),
            Joint(
                name="RightArm",
                parent=0,
                offset=numpy.array([-8.0, 15.0, 0.0]),
                channels=list(_rotation),
                end_site=numpy.array([-12.0, 0.0, 0.0]),
            ),
        ]
    )


def default_recipe():
    return SyntheticMotionRecipe(
        actions={
            "walk": [
                Sinusoid(channel=0, frequency=1, amplitude=10),
                Sinusoid(channel=1, frequency=1, amplitude=25, phase=numpy.pi / 2),
                Sinusoid(channel=2, frequency=1, amplitude=5),
            ],
            "run": [
                Sinusoid(channel=0, frequency=2, amplitude=15),
                Sinusoid(channel=1, frequency=2, amplitude=40, phase=numpy.pi / 2),
                Sinusoid(channel=2, frequency=2, amplitude=8),
            ],
            "wave hand": [
                Sinusoid(channel=3, frequency=1.5, amplitude=30),
                Sinusoid(channel=4, frequency=1.5, amplitude=10, phase=numpy.pi / 2),
                Sinusoid(channel=5, frequency=1.5, amplitude=20),
            ],
        }
    )


def synthesize_clip(
    recipe: SyntheticMotionRecipe,
    action: str,
    skeleton: Skeleton,
    rng: numpy.random.RandomState,
):
    assert skeleton.channel_count == recipe.channel_size
    length = int(recipe.rate * recipe.second)
    time = numpy.arange(length) / recipe.rate
    offset = rng.uniform(0, 2 * numpy.pi)

    array = rng.normal(scale=recipe.noise, size=(length, recipe.channel_size))
    for s in recipe.actions[action]:
        array[:, s.channel] += s.amplitude * numpy.sin(
            2 * numpy.pi * s.frequency * time + s.phase + offset
        )
    return MotionClip(array=array, rate=recipe.rate, skeleton=skeleton)


def write_synthetic_dataset(
    root: Path,
    recipe: SyntheticMotionRecipe,
    clip_num: int,
    test_rate: float,
    seed: int,
):
    """
    Writes `<root>/<split>/<clip_id>.bvh` and `<root>/descriptions.tsv`.
    """
    rng = numpy.random.RandomState(seed)
    skeleton = default_skeleton()
    actions = sorted(recipe.actions.keys())

    entries: List[Tuple[str, str, str]] = []
    for i in range(clip_num):
        action = actions[i % len(actions)]
        clip_id = f"{action.replace(' ', '_')}_{i:05d}"
        entries.append((clip_id, action, "train"))

    test_indexes = rng.permutation(clip_num)[: int(round(clip_num * test_rate))]
    for i in test_indexes:
        clip_id, action, _ = entries[i]
        entries[i] = (clip_id, action, "test")

    for split in ("train", "test"):
        root.joinpath(split).mkdir(parents=True, exist_ok=True)

    for clip_id, action, split in entries:
        clip = synthesize_clip(recipe=recipe, action=action, skeleton=skeleton, rng=rng)
        save_bvh(root / split / f"{clip_id}.bvh", skeleton=skeleton, clip=clip)

    root.joinpath("descriptions.tsv").write_text(
        "".join(f"{clip_id}\t{action}\n" for clip_id, action, _ in entries)
    )
    return entries
