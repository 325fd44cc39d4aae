import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy
from torch.utils.data import Dataset
from tqdm import tqdm

from dvgan.config import DatasetConfig
from dvgan.data.bvh import BvhParseError, load_bvh, save_bvh
from dvgan.data.motion_data import (
    MotionClip,
    NormalizationStats,
    compute_stats,
    to_expmap,
)
from dvgan.data.skeleton import Skeleton
from dvgan.data.vocabulary import Vocabulary

split_names = ("train", "test")


def read_descriptions(path: Path) -> Dict[str, str]:
    descriptions: Dict[str, str] = {}
    for i, line in enumerate(Path(path).read_text().splitlines()):
        if line.strip() == "":
            continue
        try:
            clip_id, sentence = line.split("\t", 1)
        except ValueError:
            raise ValueError(f"{path}:{i + 1}: expected 'clip_id<TAB>sentence'") from None
        descriptions[clip_id] = sentence.strip()
    return descriptions


@dataclass
class DatasetSplit:
    train: List[Tuple[Path, str]]
    test: List[Tuple[Path, str]]

    def __post_init__(self):
        train_ids = {p.stem for p, _ in self.train}
        test_ids = {p.stem for p, _ in self.test}
        overlap = train_ids & test_ids
        if len(overlap) > 0:
            raise ValueError(f"train and test share clips: {sorted(overlap)[:5]}")

    def items(self):
        return (("train", self.train), ("test", self.test))


def load_dataset_split(root: Path):
    """
    Layout: `<root>/<split>/<clip_id>.bvh` and `<root>/descriptions.tsv`.
    """
    root = Path(root)
    description_path = root / "descriptions.tsv"
    if not description_path.exists():
        raise FileNotFoundError(f"descriptions.tsv not found in {root}")
    descriptions = read_descriptions(description_path)

    entries: Dict[str, List[Tuple[Path, str]]] = {}
    for split in split_names:
        paths = sorted(root.joinpath(split).glob("*.bvh"))
        missing = [p.stem for p in paths if p.stem not in descriptions]
        if len(missing) > 0:
            warnings.warn(f"{split}: {len(missing)} clips without description skipped")
        entries[split] = [(p, descriptions[p.stem]) for p in paths if p.stem in descriptions]

    count = sum(len(v) for v in entries.values())
    if count == 0:
        raise ValueError(f"no clips found in {root}: 0 clips")
    return DatasetSplit(train=entries["train"], test=entries["test"])


class ProcessedPaths(object):
    def __init__(self, root: Path):
        self.root = Path(root)

    def clip_dir(self, split: str):
        return self.root / "clips" / split

    def clip(self, split: str, clip_id: str):
        return self.clip_dir(split) / f"{clip_id}.npy"

    def manifest(self, split: str):
        return self.root / f"{split}.tsv"

    @property
    def stats(self):
        return self.root / "stats.npy"

    @property
    def skeleton(self):
        return self.root / "skeleton.bvh"

    @property
    def vocabulary(self):
        return self.root / "vocabulary.txt"


def preprocess_dataset(
    split: DatasetSplit,
    output: Path,
    rate: float,
    strict: bool = False,
):
    """
    BVH euler channels to exponential maps, subsampling to `rate`, train-split
    statistics and vocabulary.
    """
    paths = ProcessedPaths(output)
    skeleton: Optional[Skeleton] = None
    train_clips: List[MotionClip] = []
    manifests: Dict[str, List[Tuple[str, str]]] = {}
    failures: List[str] = []

    for split_name, entries in split.items():
        paths.clip_dir(split_name).mkdir(parents=True, exist_ok=True)
        manifests[split_name] = []
        for path, sentence in tqdm(entries, desc=f"preprocess {split_name}"):
            try:
                clip_skeleton, clip = load_bvh(path)
                if skeleton is None:
                    skeleton = clip_skeleton
                elif not skeleton.equal_structure(clip_skeleton):
                    raise ValueError(f"{path}: skeleton differs from the first clip")
                clip = to_expmap(clip).resample(rate)
            except (BvhParseError, ValueError) as e:
                if strict:
                    raise
                warnings.warn(f"skip {path}: {e}")
                failures.append(str(path))
                continue

            clip.save(paths.clip(split_name, path.stem))
            manifests[split_name].append((path.stem, sentence))
            if split_name == "train":
                train_clips.append(clip)

    if len(train_clips) == 0:
        raise ValueError("no train clips could be processed")
    assert skeleton is not None

    for split_name, manifest in manifests.items():
        paths.manifest(split_name).write_text(
            "".join(f"{clip_id}\t{sentence}\n" for clip_id, sentence in manifest)
        )

    compute_stats(train_clips).save(paths.stats)
    Vocabulary.build(s for _, s in manifests["train"]).save(paths.vocabulary)

    first = train_clips[0]
    save_bvh(
        paths.skeleton,
        skeleton=skeleton,
        clip=MotionClip(
            array=numpy.zeros((1, skeleton.channel_count)), rate=first.rate
        ),
    )
    return dict(
        train_num=len(manifests["train"]),
        test_num=len(manifests["test"]),
        failure_num=len(failures),
        failures=failures,
    )


@dataclass
class MotionInput:
    clip_path: Path
    sentence: str

    def generate(self):
        return MotionClip.load(self.clip_path)


class ProcessedData(object):
    def __init__(self, root: Path):
        self.paths = ProcessedPaths(root)
        self.stats = NormalizationStats.load(self.paths.stats)
        self.vocabulary = Vocabulary.load(self.paths.vocabulary)
        self.skeleton, _ = load_bvh(self.paths.skeleton)

    def inputs(self, split: str):
        inputs: List[MotionInput] = []
        for line in self.paths.manifest(split).read_text().splitlines():
            if line.strip() == "":
                continue
            clip_id, sentence = line.split("\t", 1)
            inputs.append(
                MotionInput(clip_path=self.paths.clip(split, clip_id), sentence=sentence)
            )
        return inputs


def popular_descriptions(
    inputs: Sequence[MotionInput], frame_counts: Sequence[int], num: int
):
    """
    Sentences ranked by their total number of frames, ties broken alphabetically.
    """
    counter: Counter = Counter()
    for inp, count in zip(inputs, frame_counts):
        counter[inp.sentence] += count
    ranked = sorted(counter.keys(), key=lambda s: (-counter[s], s))
    if len(ranked) < num:
        raise ValueError(f"only {len(ranked)} distinct descriptions, {num} requested")
    return ranked[:num]


class MotionDataset(Dataset):
    def __init__(
        self,
        inputs: Sequence[MotionInput],
        length: int,
        rate: float,
        stats: NormalizationStats,
        vocabulary: Vocabulary,
    ):
        self.inputs = inputs
        self.length = length
        self.stats = stats
        self.vocabulary = vocabulary

        self.clips = [inp.generate() for inp in inputs]
        for inp, clip in zip(inputs, self.clips):
            if abs(clip.rate - rate) > 1e-6:
                raise ValueError(f"{inp.clip_path}: rate {clip.rate}Hz, expected {rate}Hz")
            if len(clip) < length:
                raise ValueError(
                    f"{inp.clip_path}: {len(clip)} frames at {rate}Hz, shorter than {length}"
                )

        self.descriptions = [vocabulary.tokenize(inp.sentence) for inp in inputs]

    @property
    def frame_counts(self):
        return [len(c) for c in self.clips]

    @staticmethod
    def extract_input(
        clip: MotionClip,
        length: int,
        stats: NormalizationStats,
    ):
        clip = clip.sample(length)
        return stats.normalize(clip.array).astype(numpy.float32)

    def __len__(self):
        return len(self.inputs)

    def __getitem__(self, i):
        return dict(
            motion=self.extract_input(
                clip=self.clips[i], length=self.length, stats=self.stats
            ),
            text=self.descriptions[i].array,
        )


class RankerDataset(Dataset):
    """
    Candidate 0 is the true description, the others are distractors drawn without
    replacement from the remaining pool.
    """

    def __init__(self, dataset: MotionDataset, pool: Sequence[str], candidate_num: int):
        if candidate_num > len(pool):
            raise ValueError(
                f"{candidate_num} candidates requested, only {len(pool)} descriptions"
            )
        self.dataset = dataset
        self.pool = list(pool)
        self.candidate_num = candidate_num

        pool_index = {s: i for i, s in enumerate(self.pool)}
        self.truth = [pool_index.get(inp.sentence, -1) for inp in dataset.inputs]
        self.indexes = [i for i, t in enumerate(self.truth) if t >= 0]
        if len(self.indexes) < len(self.truth):
            warnings.warn(
                f"{len(self.truth) - len(self.indexes)} clips outside the description pool skipped"
            )

    def __len__(self):
        return len(self.indexes)

    def __getitem__(self, i):
        index = self.indexes[i]
        truth = self.truth[index]
        others = numpy.array([j for j in range(len(self.pool)) if j != truth])
        distractors = numpy.random.choice(
            others, size=self.candidate_num - 1, replace=False
        )
        return dict(
            motion=self.dataset[index]["motion"],
            candidate=numpy.concatenate([[truth], distractors]).astype(numpy.int64),
        )


def create_dataset(config: DatasetConfig):
    data = ProcessedData(config.processed_dir)

    def _dataset(split: str):
        return MotionDataset(
            inputs=data.inputs(split),
            length=config.length,
            rate=config.rate,
            stats=data.stats,
            vocabulary=data.vocabulary,
        )

    return {
        "train": _dataset("train"),
        "test": _dataset("test"),
        "data": data,
    }
