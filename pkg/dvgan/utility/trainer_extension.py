import json
from pathlib import Path
from typing import Any, Dict

import wandb
from pytorch_trainer import reporter
from pytorch_trainer.training import Extension, Trainer
from pytorch_trainer.training.util import get_trigger
from tensorboardX import SummaryWriter
from torch import nn
from torch.optim.optimizer import Optimizer

from dvgan.utility.checkpoint import save_checkpoint


def _flatten_dict(dd, separator="/", prefix=""):
    return (
        {
            prefix + separator + k if prefix else k: v
            for kk, vv in dd.items()
            for k, v in _flatten_dict(vv, separator, kk).items()
        }
        if isinstance(dd, dict)
        else {prefix: dd}
    )


class TensorboardReport(Extension):
    def __init__(self, writer: SummaryWriter = None):
        self.writer = writer

    def __call__(self, trainer: Trainer):
        if self.writer is None:
            self.writer = SummaryWriter(Path(trainer.out))

        observations = trainer.observation
        n_iter = trainer.updater.iteration
        for n, v in observations.items():
            self.writer.add_scalar(n, v, n_iter)

    def finalize(self):
        super().finalize()
        if self.writer is not None:
            self.writer.flush()


class WandbReport(Extension):
    def __init__(
        self,
        config_dict: Dict[str, Any],
        project_category: str,
        project_name: str,
        output_dir: Path,
    ):
        self.config_dict = config_dict
        self.project_category = project_category
        self.project_name = project_name
        self.output_dir = output_dir

        self.initialized = False
        self.wandb_id = wandb.util.generate_id()

    def __call__(self, trainer: Trainer):
        if not self.initialized:
            self.initialized = True

            wandb.init(
                id=self.wandb_id,
                project=self.project_category,
                name=self.project_name,
                dir=self.output_dir,
                resume="allow",
            )
            wandb.config.update(_flatten_dict(self.config_dict), allow_val_change=True)

        observations = trainer.observation
        n_iter = trainer.updater.iteration
        wandb.log(observations, step=n_iter)

    def state_dict(self):
        state_dict = {"wandb_id": self.wandb_id}
        return state_dict

    def load_state_dict(self, state_dict):
        self.wandb_id = state_dict["wandb_id"]


class LineLogReport(Extension):
    """
    Appends one JSON record per interval to `<out>/<filename>` with the mean observations.
    """

    def __init__(self, filename: str = "log.jsonl", trigger=(1, "iteration")):
        self.filename = filename
        self._trigger = get_trigger(trigger)
        self._summary = reporter.DictSummary()

    def __call__(self, trainer: Trainer):
        self._summary.add({k: float(v) for k, v in trainer.observation.items()})
        if not self._trigger(trainer):
            return

        record = dict(
            iteration=trainer.updater.iteration,
            discriminator_iteration=getattr(
                trainer.updater, "discriminator_iteration", None
            ),
            elapsed_time=trainer.elapsed_time,
        )
        record.update(
            {k: float(v) for k, v in self._summary.compute_mean().items()}
        )
        with Path(trainer.out, self.filename).open("a") as f:
            f.write(json.dumps(record) + "\n")
        self._summary = reporter.DictSummary()

    def state_dict(self):
        return {"trigger": self._trigger.state_dict()}

    def load_state_dict(self, state_dict):
        self._trigger.load_state_dict(state_dict["trigger"])


class CheckpointExtension(Extension):
    def __init__(
        self,
        config_dict: Dict[str, Any],
        modules: Dict[str, nn.Module],
        optimizers: Dict[str, Optimizer],
        filename: str = "checkpoint_{iteration}.pth",
    ):
        self.config_dict = config_dict
        self.modules = modules
        self.optimizers = optimizers
        self.filename = filename

    def save(self, output: Path, iteration: int):
        save_checkpoint(
            Path(output) / self.filename.format(iteration=iteration),
            config=self.config_dict,
            modules=self.modules,
            optimizers=self.optimizers,
            iteration=iteration,
        )

    def __call__(self, trainer: Trainer):
        self.save(trainer.out, trainer.updater.iteration)
