import pytest

from dvgan.data.vocabulary import Vocabulary, pad_index, split_words, tokenize, unk_index


@pytest.fixture()
def vocabulary():
    return Vocabulary.build(["walk on uneven terrain", "walk", "run"])


def test_split_words():
    assert split_words("Walking") == ["walking"]
    assert split_words("Dance - expressive arms, pirouette") == [
        "dance",
        "expressive",
        "arms",
        "pirouette",
    ]


@pytest.mark.parametrize("raw", ["", "   ", " - , "])
def test_empty_description(raw: str):
    with pytest.raises(ValueError):
        split_words(raw)


def test_build(vocabulary: Vocabulary):
    assert vocabulary.words[:2] == ["<pad>", "<unk>"]
    assert vocabulary.words[2] == "walk"
    assert len(vocabulary) == 7


def test_tokenize(vocabulary: Vocabulary):
    description = vocabulary.tokenize("walk on uneven terrain")
    assert len(description.tokens) == 4
    assert pad_index not in description.tokens
    assert unk_index not in description.tokens


def test_unknown_word(vocabulary: Vocabulary):
    description = vocabulary.tokenize("straight walk")
    assert description.tokens == [unk_index, vocabulary.index["walk"]]


def test_tokenize_without_vocabulary():
    description = tokenize("Walk fast")
    assert description.words == ["walk", "fast"]
    assert description.tokens == [unk_index, unk_index]


def test_reserved_word():
    with pytest.raises(ValueError):
        Vocabulary(["<pad>"])


def test_save_and_load(tmp_path, vocabulary: Vocabulary):
    vocabulary.save(tmp_path / "vocabulary.txt")
    assert Vocabulary.load(tmp_path / "vocabulary.txt") == vocabulary
