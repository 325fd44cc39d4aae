from pathlib import Path
from typing import Optional

import torch
import yaml
from pytorch_trainer.training import Trainer, extensions
from pytorch_trainer.training.updaters import StandardUpdater
from tensorboardX import SummaryWriter

from dvgan.config import Config, RankerConfig
from dvgan.dataset import RankerDataset, create_dataset, popular_descriptions
from dvgan.evaluator import GenerateEvaluator, WholeSetEvaluator
from dvgan.model import create_model, create_ranker_model, load_ranker
from dvgan.updater import WganUpdater
from dvgan.utility.pytorch_utility import init_weights, make_optimizer, set_seed
from dvgan.utility.trainer_extension import (
    CheckpointExtension,
    LineLogReport,
    TensorboardReport,
    WandbReport,
)
from dvgan.utility.trainer_utility import HighValueTrigger, create_iterator, pad_concat


def _check_sizes(network, data):
    motion_size = len(data.stats.mean)
    if network.motion_size != motion_size:
        raise ValueError(
            f"network.motion_size {network.motion_size}, processed data has {motion_size}"
        )
    if network.vocabulary_size != len(data.vocabulary):
        raise ValueError(
            f"network.vocabulary_size {network.vocabulary_size}, processed data has {len(data.vocabulary)}"
        )


def create_trainer(
    config: Config,
    output: Path,
):
    # config
    config.validate()
    config.add_git_info()

    output.mkdir(exist_ok=True, parents=True)
    with output.joinpath("config.yaml").open(mode="w") as f:
        yaml.safe_dump(config.to_dict(), f)

    set_seed(config.train.seed)

    # dataset
    datasets = create_dataset(config.dataset)
    _check_sizes(config.network, datasets["data"])

    # model
    model = create_model(config.model, config.network, length=config.dataset.length)
    if config.train.weight_initializer is not None:
        init_weights(model, name=config.train.weight_initializer)

    device = torch.device("cuda") if config.train.use_gpu else torch.device("cpu")
    model.to(device)

    train_iter = create_iterator(
        datasets["train"],
        batch_size=config.train.batch_size,
        for_train=True,
        num_processes=config.train.num_processes,
    )

    # optimizer
    generator_optimizer = make_optimizer(
        config_dict=config.train.optimizer,
        parameters=model.generator_model.parameters(),
    )
    discriminator_optimizer = make_optimizer(
        config_dict=config.train.optimizer,
        parameters=model.discriminator_model.parameters(),
    )

    # updater
    updater = WganUpdater(
        iterator=train_iter,
        optimizer=generator_optimizer,
        model=model,
        converter=pad_concat,
        device=device,
        discriminator_optimizer=discriminator_optimizer,
        discriminator_step=config.train.discriminator_step,
    )

    # trainer
    trigger_log = (config.train.log_iteration, "iteration")
    trigger_eval = (config.train.eval_iteration, "iteration")
    trigger_snapshot = (config.train.snapshot_iteration, "iteration")
    trigger_stop = (config.train.stop_iteration, "iteration")

    trainer = Trainer(updater, stop_trigger=trigger_stop, out=output)

    checkpoint = CheckpointExtension(
        config_dict=config.to_dict(),
        modules=dict(
            generator=model.generator_model,
            discriminator=model.discriminator_model,
        ),
        optimizers=dict(
            generator=generator_optimizer,
            discriminator=discriminator_optimizer,
        ),
    )
    if not output.joinpath("checkpoint_0.pth").exists():
        checkpoint.save(output, 0)
    trainer.extend(checkpoint, trigger=trigger_snapshot)

    if config.train.ranker_path is not None:
        assert config.train.ranker_config_path is not None
        ranker_config = RankerConfig.from_dict(
            yaml.safe_load(config.train.ranker_config_path.read_text())
        )
        ranker = load_ranker(ranker_config, config.train.ranker_path, map_location=device)

        train_dataset, test_dataset = datasets["train"], datasets["test"]
        pool = popular_descriptions(
            train_dataset.inputs,
            train_dataset.frame_counts,
            config.train.eval_candidate_num,
        )
        vocabulary = datasets["data"].vocabulary
        generate_evaluator = GenerateEvaluator(
            generator_model=model.generator_model,
            ranker=ranker,
            pool_tokens=[vocabulary.tokenize(s).array for s in pool],
        ).to(device)
        eval_iter = create_iterator(
            RankerDataset(test_dataset, pool=pool, candidate_num=1),
            batch_size=config.train.batch_size,
            for_train=False,
        )
        ext = WholeSetEvaluator(
            eval_iter, generate_evaluator, converter=pad_concat, device=device
        )
        trainer.extend(ext, name="eval", trigger=trigger_eval)

        ext = extensions.snapshot_object(
            model.generator_model,
            filename="predictor_{.updater.iteration}.pth",
            n_retains=5,
        )
        trainer.extend(
            ext,
            trigger=HighValueTrigger("eval/main/inception_score", trigger=trigger_eval),
        )

    trainer.extend(extensions.FailOnNonNumber(), trigger=trigger_log)
    trainer.extend(extensions.LogReport(trigger=trigger_log))
    trainer.extend(
        extensions.PrintReport(
            [
                "iteration",
                "main/discriminator_loss",
                "main/generator_loss",
                "main/gradient_penalty",
                "eval/main/inception_score",
            ]
        ),
        trigger=trigger_log,
    )
    trainer.extend(LineLogReport(trigger=trigger_log))

    ext = TensorboardReport(writer=SummaryWriter(Path(output)))
    trainer.extend(ext, trigger=trigger_log)

    if config.project.category is not None:
        ext = WandbReport(
            config_dict=config.to_dict(),
            project_category=config.project.category,
            project_name=config.project.name,
            output_dir=output.joinpath("wandb"),
        )
        trainer.extend(ext, trigger=trigger_log)

    (output / "struct.txt").write_text(repr(model))

    if config.train.stop_iteration > 0:
        trainer.extend(extensions.ProgressBar(trigger_stop))

    ext = extensions.snapshot_object(
        trainer,
        filename="trainer_{.updater.iteration}.pth",
        n_retains=1,
        autoload=True,
    )
    trainer.extend(ext, trigger=trigger_snapshot)

    return trainer


def run_trainer(trainer: Trainer, stop_iteration: Optional[int]):
    """
    A zero-length run leaves only the initial checkpoint.
    """
    if stop_iteration == 0:
        return
    trainer.run()


def create_ranker_trainer(
    config: RankerConfig,
    output: Path,
):
    # config
    config.add_git_info()

    output.mkdir(exist_ok=True, parents=True)
    with output.joinpath("config.yaml").open(mode="w") as f:
        yaml.safe_dump(config.to_dict(), f)

    set_seed(config.train.seed)

    # dataset
    datasets = create_dataset(config.dataset)
    _check_sizes(config.network, datasets["data"])
    vocabulary = datasets["data"].vocabulary

    pool = sorted({inp.sentence for inp in datasets["train"].inputs})
    train_dataset = RankerDataset(
        datasets["train"], pool=pool, candidate_num=config.train.candidate_num
    )
    test_dataset = RankerDataset(
        datasets["test"], pool=pool, candidate_num=config.train.candidate_num
    )
    output.joinpath("pool.txt").write_text("".join(f"{s}\n" for s in pool))

    # model
    model = create_ranker_model(
        config.network,
        length=config.dataset.length,
        pool_tokens=[vocabulary.tokenize(s).array for s in pool],
    )
    if config.train.weight_initializer is not None:
        init_weights(model, name=config.train.weight_initializer)

    device = torch.device("cuda") if config.train.use_gpu else torch.device("cpu")
    model.to(device)

    train_iter = create_iterator(
        train_dataset,
        batch_size=config.train.batch_size,
        for_train=True,
        num_processes=config.train.num_processes,
    )
    test_iter = create_iterator(
        test_dataset, batch_size=config.train.batch_size, for_train=False
    )

    # optimizer
    optimizer = make_optimizer(
        config_dict=config.train.optimizer, parameters=model.parameters()
    )

    # updater
    updater = StandardUpdater(
        iterator=train_iter,
        optimizer=optimizer,
        model=model,
        converter=pad_concat,
        device=device,
    )

    # trainer
    trigger_log = (config.train.log_iteration, "iteration")
    trigger_epoch = (1, "epoch")
    trigger_stop = (config.train.stop_epoch, "epoch")

    trainer = Trainer(updater, stop_trigger=trigger_stop, out=output)

    if len(test_dataset) > 0:
        ext = extensions.Evaluator(test_iter, model, converter=pad_concat, device=device)
        trainer.extend(ext, name="test", trigger=trigger_epoch)

    trainer.extend(
        CheckpointExtension(
            config_dict=config.to_dict(),
            modules=dict(ranker=model.ranker),
            optimizers=dict(ranker=optimizer),
            filename="ranker.pth",
        ),
        trigger=trigger_epoch,
    )

    trainer.extend(extensions.FailOnNonNumber(), trigger=trigger_log)
    trainer.extend(extensions.LogReport(trigger=trigger_log))
    trainer.extend(
        extensions.PrintReport(
            ["epoch", "iteration", "main/loss", "main/accuracy", "test/main/accuracy"]
        ),
        trigger=trigger_log,
    )
    trainer.extend(LineLogReport(trigger=trigger_log))

    ext = TensorboardReport(writer=SummaryWriter(Path(output)))
    trainer.extend(ext, trigger=trigger_log)

    if config.project.category is not None:
        ext = WandbReport(
            config_dict=config.to_dict(),
            project_category=config.project.category,
            project_name=config.project.name,
            output_dir=output.joinpath("wandb"),
        )
        trainer.extend(ext, trigger=trigger_log)

    (output / "struct.txt").write_text(repr(model))

    trainer.extend(extensions.ProgressBar(trigger_stop))

    return trainer
