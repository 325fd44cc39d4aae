from pytorch_trainer import report
from pytorch_trainer.dataset import convert
from pytorch_trainer.training.updaters.standard_updater import StandardUpdater
from torch.optim.optimizer import Optimizer

from dvgan.model import Model


class WganUpdater(StandardUpdater):
    """
    One iteration: `discriminator_step` critic updates, each on a fresh batch,
    then one generator update. The main optimizer owns the generator side.
    """

    def __init__(
        self,
        *args,
        discriminator_optimizer: Optimizer,
        discriminator_step: int,
        **kwargs,
    ):
        super().__init__(*args, **kwargs)
        assert discriminator_step >= 1
        self.discriminator_optimizer = discriminator_optimizer
        self.discriminator_step = discriminator_step
        self.discriminator_iteration = 0

    def _next_batch(self):
        batch = self._iterators["main"].next()
        return convert._call_converter(self.converter, batch, self.device)

    def update_core(self):
        model: Model = self._models["main"]
        generator_optimizer = self._optimizers["main"]

        for m in self._models.values():
            m.train()

        for _ in range(self.discriminator_step):
            in_arrays = self._next_batch()
            self.discriminator_optimizer.zero_grad()
            loss = model.discriminator_loss(
                motion=in_arrays["motion"], text=in_arrays["text"]
            )
            loss.backward()
            self.discriminator_optimizer.step()
            self.discriminator_iteration += 1

        generator_optimizer.zero_grad()
        loss = model.generator_loss(text=in_arrays["text"])
        loss.backward()
        generator_optimizer.step()

        report({"discriminator_iteration": self.discriminator_iteration}, model)

    def state_dict(self):
        state_dict = super().state_dict()
        state_dict["discriminator_optimizer"] = self.discriminator_optimizer.state_dict()
        state_dict["discriminator_iteration"] = self.discriminator_iteration
        return state_dict

    def load_state_dict(self, state_dict):
        super().load_state_dict(state_dict)
        self.discriminator_optimizer.load_state_dict(
            state_dict["discriminator_optimizer"]
        )
        self.discriminator_iteration = state_dict["discriminator_iteration"]
