import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy
import torch
import yaml
from more_itertools import chunked
from tqdm import tqdm

from dvgan.config import Config, RankerConfig, apply_overrides
from dvgan.data.bvh import save_bvh
from dvgan.data.motion_data import MotionClip, NormalizationStats, to_euler
from dvgan.data.synthetic import default_recipe, write_synthetic_dataset
from dvgan.dataset import (
    ProcessedData,
    RankerDataset,
    create_dataset,
    load_dataset_split,
    popular_descriptions,
    preprocess_dataset,
)
from dvgan.generator import Generator
from dvgan.metric import (
    completion_error,
    default_horizons,
    inception_stats,
    mean_errors,
    recall_report,
    zero_velocity_baseline,
)
from dvgan.model import load_ranker, pad_tokens
from dvgan.network.ranker import score_matrix
from dvgan.trainer import create_ranker_trainer, create_trainer, run_trainer
from dvgan.utility.pytorch_utility import set_seed
from dvgan.utility.save_arguments import save_arguments

data_root_env = "DVGAN_DATA_ROOT"


def data_root():
    return Path(os.environ.get(data_root_env, "data"))


def _extract_number(f):
    s = re.findall(r"\d+", str(f))
    return int(s[-1]) if s else -1


def _get_model_path(
    model_dir: Path,
    iteration: Optional[int] = None,
    prefix: str = "checkpoint_",
):
    if iteration is None:
        paths = list(model_dir.glob(prefix + "*.pth"))
        if len(paths) == 0:
            raise FileNotFoundError(f"no {prefix}*.pth in {model_dir}")
        model_path = list(sorted(paths, key=_extract_number))[-1]
    else:
        model_path = model_dir / (prefix + "{}.pth".format(iteration))
        if not model_path.exists():
            raise FileNotFoundError(model_path)
    return model_path


def _load_yaml(path: Path) -> Dict[str, Any]:
    with path.open() as f:
        return yaml.safe_load(f)


def _fill_network_sizes(d: Dict[str, Any]):
    """
    Sizes left out of the config are read from the processed data.
    """
    network = d.setdefault("network", {})
    if network.get("motion_size") is None or network.get("vocabulary_size") is None:
        data = ProcessedData(Path(d["dataset"]["processed_dir"]))
        network.setdefault("motion_size", None)
        network.setdefault("vocabulary_size", None)
        if network["motion_size"] is None:
            network["motion_size"] = len(data.stats.mean)
        if network["vocabulary_size"] is None:
            network["vocabulary_size"] = len(data.vocabulary)
    return d


def _load_generator(model_dir: Path, iteration: Optional[int], prefix: str, use_gpu: bool):
    config = Config.from_dict(_load_yaml(model_dir / "config.yaml"))
    data = ProcessedData(config.dataset.processed_dir)
    generator = Generator(
        config=config,
        generator_model=_get_model_path(model_dir, iteration, prefix=prefix),
        stats=data.stats,
        vocabulary=data.vocabulary,
        use_gpu=use_gpu,
    )
    return config, data, generator


def _file_stem(sentence: str):
    return re.sub(r"[^0-9a-zA-Z]+", "_", sentence.strip()).strip("_").lower()


def _write_clip(path: Path, clip: MotionClip, file_format: str):
    if file_format == "npy":
        clip.save(path.with_suffix(".npy"))
    elif file_format == "csv":
        clip.write_csv(path.with_suffix(".csv"), expmap=True)
    elif file_format == "bvh":
        if clip.skeleton is None:
            raise ValueError("bvh export requires a skeleton")
        save_bvh(path.with_suffix(".bvh"), skeleton=clip.skeleton, clip=to_euler(clip))
    else:
        raise ValueError(file_format)


def synth(output: Path, clip_num: int, test_rate: float, seed: int):
    output.mkdir(parents=True, exist_ok=True)
    save_arguments(output / "arguments.yaml", synth, locals())
    entries = write_synthetic_dataset(
        root=output, recipe=default_recipe(), clip_num=clip_num, test_rate=test_rate, seed=seed
    )
    return dict(clip_num=len(entries))


def preprocess(
    dataset_dir: Path,
    output: Path,
    rate: Optional[float],
    config_path: Optional[Path],
    strict: bool,
):
    if rate is None and config_path is not None:
        rate = _load_yaml(config_path)["dataset"]["rate"]
    if rate is None:
        raise ValueError("rate is neither given nor found in a config")

    output.mkdir(parents=True, exist_ok=True)
    save_arguments(output / "arguments.yaml", preprocess, locals())

    split = load_dataset_split(dataset_dir)
    return preprocess_dataset(split, output=output, rate=rate, strict=strict)


def train_gan(
    config_yaml_path: Path,
    output: Path,
    seed: Optional[int],
    stop_iteration: Optional[int],
    overrides: List[str],
):
    d = _load_yaml(config_yaml_path)
    apply_overrides(d, overrides)
    if seed is not None:
        d["train"]["seed"] = seed
    if stop_iteration is not None:
        d["train"]["stop_iteration"] = stop_iteration
    config = Config.from_dict(_fill_network_sizes(d))

    output.mkdir(parents=True, exist_ok=True)
    save_arguments(output / "arguments.yaml", train_gan, locals())

    trainer = create_trainer(config=config, output=output)
    run_trainer(trainer, config.train.stop_iteration)
    return dict(iteration=trainer.updater.iteration)


def train_ranker(
    config_yaml_path: Path,
    output: Path,
    seed: Optional[int],
    overrides: List[str],
):
    d = _load_yaml(config_yaml_path)
    apply_overrides(d, overrides)
    if seed is not None:
        d["train"]["seed"] = seed
    config = RankerConfig.from_dict(_fill_network_sizes(d))

    output.mkdir(parents=True, exist_ok=True)
    save_arguments(output / "arguments.yaml", train_ranker, locals())

    trainer = create_ranker_trainer(config=config, output=output)
    trainer.run()
    return dict(epoch=trainer.updater.epoch)


def generate(
    model_dir: Path,
    model_iteration: Optional[int],
    model_prefix: str,
    text: str,
    count: int,
    length: Optional[int],
    seed: int,
    file_format: str,
    output_dir: Path,
    use_gpu: bool,
):
    output_dir.mkdir(parents=True, exist_ok=True)
    save_arguments(output_dir / "arguments.yaml", generate, locals())

    set_seed(seed)
    config, data, generator = _load_generator(
        model_dir, model_iteration, model_prefix, use_gpu
    )
    arrays = generator.generate([text] * count, length=length)

    stem = _file_stem(text)
    for i, array in enumerate(arrays):
        clip = MotionClip(array=array, rate=config.dataset.rate, skeleton=data.skeleton)
        _write_clip(output_dir / f"{stem}_vid{i}", clip, file_format)
    return dict(count=len(arrays), length=int(arrays.shape[1]))


def complete(
    model_dir: Path,
    model_iteration: Optional[int],
    model_prefix: str,
    seed_frames: int,
    horizons: Optional[Sequence[float]],
    split: str,
    seed: int,
    output_dir: Path,
    use_gpu: bool,
):
    output_dir.mkdir(parents=True, exist_ok=True)
    save_arguments(output_dir / "arguments.yaml", complete, locals())

    set_seed(seed)
    config, data, generator = _load_generator(
        model_dir, model_iteration, model_prefix, use_gpu
    )
    length = config.dataset.length
    if seed_frames >= length:
        raise ValueError(f"{seed_frames} seed frames for {length} frames")
    if horizons is None:
        horizons = default_horizons(config.dataset.rate, seed_frames, length)

    windows = []
    sentences = []
    for inp in data.inputs(split):
        clip = inp.generate()
        if len(clip) < length:
            continue
        windows.append(clip.sample(length).array)
        sentences.append(inp.sentence)
    if len(windows) == 0:
        raise ValueError(f"no {split} clip has {length} frames")

    def _clip(array: numpy.ndarray):
        return MotionClip(array=array, rate=config.dataset.rate, skeleton=data.skeleton)

    errors: Dict[str, List[Dict[float, float]]] = dict(model=[], zero_velocity=[])
    for chunk in tqdm(
        list(chunked(range(len(windows)), config.train.batch_size)), desc="complete"
    ):
        truth = numpy.stack([windows[i] for i in chunk])
        predicted = generator.complete(
            [sentences[i] for i in chunk], truth[:, :seed_frames], length=length
        )
        for t, p in zip(truth, predicted):
            baseline = zero_velocity_baseline(t[:seed_frames], length)
            errors["model"].append(
                completion_error(_clip(p), _clip(t), seed_frames, horizons)
            )
            errors["zero_velocity"].append(
                completion_error(_clip(baseline), _clip(t), seed_frames, horizons)
            )

    report = {
        name: {f"{h}ms": v for h, v in mean_errors(e).items()}
        for name, e in errors.items()
    }
    report["clip_num"] = len(windows)
    with output_dir.joinpath("completion.yaml").open("w") as f:
        yaml.safe_dump(report, f)
    return report


def evaluate(
    model_dir: Path,
    model_iteration: Optional[int],
    model_prefix: str,
    ranker_dir: Path,
    candidate_num: Optional[int],
    seed: int,
    output_dir: Path,
    use_gpu: bool,
):
    output_dir.mkdir(parents=True, exist_ok=True)
    save_arguments(output_dir / "arguments.yaml", evaluate, locals())

    set_seed(seed)
    config, data, generator = _load_generator(
        model_dir, model_iteration, model_prefix, use_gpu
    )
    device = generator.device

    ranker_config = RankerConfig.from_dict(_load_yaml(ranker_dir / "config.yaml"))
    ranker = load_ranker(ranker_config, ranker_dir / "ranker.pth", map_location=device)

    if candidate_num is None:
        candidate_num = config.train.eval_candidate_num
    datasets = create_dataset(config.dataset)
    pool = popular_descriptions(
        datasets["train"].inputs, datasets["train"].frame_counts, candidate_num
    )
    dataset = RankerDataset(datasets["test"], pool=pool, candidate_num=1)
    if len(dataset) == 0:
        raise ValueError("no test clip is described by the evaluation pool")

    pool_tokens = pad_tokens([data.vocabulary.tokenize(s).array for s in pool]).to(device)

    fake_scores, real_scores, truths = [], [], []
    with torch.no_grad():
        text_embedding = ranker.embed_text(pool_tokens)
        for chunk in tqdm(
            list(chunked(range(len(dataset)), config.train.batch_size)), desc="evaluate"
        ):
            items = [dataset[i] for i in chunk]
            truth = numpy.array([item["candidate"][0] for item in items])
            real = torch.from_numpy(numpy.stack([item["motion"] for item in items]))

            fake = generator.generate_normalized(pool_tokens[torch.from_numpy(truth)])
            fake_scores.append(
                score_matrix(ranker.embed_motion(fake), text_embedding).cpu().numpy()
            )
            real_scores.append(
                score_matrix(ranker.embed_motion(real.to(device)), text_embedding)
                .cpu()
                .numpy()
            )
            truths.append(truth)

    fake_score_array = numpy.concatenate(fake_scores)
    real_score_array = numpy.concatenate(real_scores)
    truth_array = numpy.concatenate(truths)

    fake_stats = inception_stats(fake_score_array)
    real_stats = inception_stats(real_score_array)
    report = dict(
        clip_num=len(truth_array),
        candidate_num=candidate_num,
        generated=dict(
            inception_score=fake_stats.score,
            inception_contribution=fake_stats.contributions(pool),
            **recall_report(fake_score_array, truth_array),
        ),
        real=dict(
            inception_score=real_stats.score,
            inception_contribution=real_stats.contributions(pool),
            **recall_report(real_score_array, truth_array),
        ),
    )
    with output_dir.joinpath("evaluation.yaml").open("w") as f:
        yaml.safe_dump(report, f, sort_keys=False)
    return report


def export(
    input_paths: List[Path],
    processed_dir: Path,
    normalized: bool,
    file_format: str,
    output_dir: Path,
):
    output_dir.mkdir(parents=True, exist_ok=True)
    save_arguments(output_dir / "arguments.yaml", export, locals())

    data = ProcessedData(processed_dir)
    stats: NormalizationStats = data.stats
    for path in tqdm(input_paths, desc="export"):
        clip = MotionClip.load(path, skeleton=data.skeleton)
        if normalized:
            clip = clip.replace(array=stats.denormalize(clip.array))
        _write_clip(output_dir / path.stem, clip, file_format)
    return dict(count=len(input_paths))


def _add_model_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--model_dir", required=True, type=Path)
    parser.add_argument("--model_iteration", type=int)
    parser.add_argument("--model_prefix", default="checkpoint_")
    parser.add_argument("--use_gpu", action="store_true")


def create_parser():
    parser = argparse.ArgumentParser(prog="dvgan")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("synth")
    p.add_argument("--output", type=Path, default=data_root() / "synthetic")
    p.add_argument("--clip_num", type=int, default=200)
    p.add_argument("--test_rate", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=synth)

    p = subparsers.add_parser("preprocess")
    p.add_argument("--dataset_dir", type=Path, default=data_root() / "synthetic")
    p.add_argument("--output", type=Path, default=data_root() / "processed")
    p.add_argument("--rate", type=float)
    p.add_argument("--config_path", type=Path)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=preprocess)

    p = subparsers.add_parser("train-gan")
    p.add_argument("config_yaml_path", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--stop_iteration", type=int)
    p.add_argument("--override", dest="overrides", action="append", default=[])
    p.set_defaults(func=train_gan)

    p = subparsers.add_parser("train-ranker")
    p.add_argument("config_yaml_path", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--override", dest="overrides", action="append", default=[])
    p.set_defaults(func=train_ranker)

    p = subparsers.add_parser("generate")
    _add_model_arguments(p)
    p.add_argument("--text", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--length", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", dest="file_format", choices=["bvh", "csv", "npy"], default="bvh")
    p.add_argument("--output_dir", required=True, type=Path)
    p.set_defaults(func=generate)

    p = subparsers.add_parser("complete")
    _add_model_arguments(p)
    p.add_argument("--seed_frames", "--seed-frames", type=int, default=25)
    p.add_argument("--horizons", type=float, nargs="+")
    p.add_argument("--split", default="test")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output_dir", required=True, type=Path)
    p.set_defaults(func=complete)

    p = subparsers.add_parser("evaluate")
    _add_model_arguments(p)
    p.add_argument("--ranker_dir", required=True, type=Path)
    p.add_argument("--candidate_num", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output_dir", required=True, type=Path)
    p.set_defaults(func=evaluate)

    p = subparsers.add_parser("export")
    p.add_argument("input_paths", nargs="+", type=Path)
    p.add_argument("--processed_dir", type=Path, default=data_root() / "processed")
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--format", dest="file_format", choices=["bvh", "csv"], default="bvh")
    p.add_argument("--output_dir", required=True, type=Path)
    p.set_defaults(func=export)

    return parser


def main(argv: Optional[Sequence[str]] = None):
    args = vars(create_parser().parse_args(argv))
    args.pop("command")
    func = args.pop("func")
    try:
        func(**args)
    except Exception as e:
        print(
            json.dumps({"error": type(e).__name__, "message": str(e)}),
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
