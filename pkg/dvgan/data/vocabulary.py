import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy

pad_word = "<pad>"
unk_word = "<unk>"
pad_index = 0
unk_index = 1

_punctuation = re.compile(r"[^\w\s]|_")


def split_words(raw: str):
    """
    >>> split_words("Dance - expressive arms, pirouette")
    ['dance', 'expressive', 'arms', 'pirouette']
    """
    words = _punctuation.sub(" ", raw.lower()).split()
    if len(words) == 0:
        raise ValueError(f"empty action description: {raw!r}")
    return words


@dataclass
class ActionDescription:
    raw: str
    words: List[str]
    tokens: List[int]

    def __post_init__(self):
        assert len(self.tokens) > 0
        assert len(self.tokens) == len(self.words)

    @property
    def array(self):
        return numpy.array(self.tokens, dtype=numpy.int64)


class Vocabulary(object):
    reserved = (pad_word, unk_word)

    def __init__(self, words: Iterable[str]):
        self.words: List[str] = list(self.reserved)
        for word in words:
            if word in self.reserved:
                raise ValueError(f"reserved word in vocabulary: {word}")
            self.words.append(word)
        self.index: Dict[str, int] = {w: i for i, w in enumerate(self.words)}
        assert len(self.index) == len(self.words), "duplicated words"

    def __len__(self):
        return len(self.words)

    def __eq__(self, o: object):
        return isinstance(o, Vocabulary) and self.words == o.words

    def tokenize(self, raw: str):
        words = split_words(raw)
        return ActionDescription(
            raw=raw,
            words=words,
            tokens=[self.index.get(w, unk_index) for w in words],
        )

    @classmethod
    def build(cls, sentences: Iterable[str], min_count: int = 1):
        counter = Counter(w for s in sentences for w in split_words(s))
        words = sorted(
            (w for w, c in counter.items() if c >= min_count),
            key=lambda w: (-counter[w], w),
        )
        return cls(words)

    @classmethod
    def load(cls, path: Path):
        words = []
        for i, line in enumerate(Path(path).read_text().splitlines()):
            index, word = line.split("\t")
            assert int(index) == i, f"{path}:{i + 1} index mismatch"
            words.append(word)
        assert tuple(words[: len(cls.reserved)]) == cls.reserved
        return cls(words[len(cls.reserved) :])

    def save(self, path: Path):
        Path(path).write_text("".join(f"{i}\t{w}\n" for i, w in enumerate(self.words)))


def tokenize(raw: str, vocabulary: Optional[Vocabulary] = None):
    """
    Without a vocabulary every word is unknown; only the word split is meaningful.
    """
    if vocabulary is None:
        vocabulary = Vocabulary([])
    return vocabulary.tokenize(raw)
