"""Training/behavioral tests for the diffusion stack on tiny configs."""

import numpy as np
import pytest

import palettekit as pk
from palettekit.conditioning import Variant
from palettekit.data import ProceduralDataset
from palettekit.diffusion import (
    Checkpoint,
    ModelConfig,
    TrainConfig,
    load_checkpoint,
    make_schedule,
    save_checkpoint,
    train_base,
    train_control,
    heldout_control_loss,
)
from palettekit.diffusion.model import ConditionedDenoiser, ControlEncoder, UNet
from palettekit.errors import CheckpointError, EmptyDatasetError

TINY = ModelConfig(image_size=8, base_channels=8, channel_multipliers=(1, 2),
                   time_embed_dim=16, groups=4)


def tiny_dataset(count=8):
    return ProceduralDataset(seed=11, count=count, size=8)


@pytest.fixture(scope="module")
def tiny_base():
    sched = make_schedule(100)
    return train_base(tiny_dataset(), TINY, sched, steps=30, seed=5,
                      train_cfg=TrainConfig(batch_size=4))


class TestTrainBase:
    def test_empty_dataset(self):
        with pytest.raises(EmptyDatasetError):
            train_base(ProceduralDataset(0, 0, 8), TINY, make_schedule(10), 1, 0)

    def test_steps_zero_is_initialization(self):
        sched = make_schedule(10)
        a = train_base(tiny_dataset(), TINY, sched, steps=0, seed=7)
        rng_init = np.random.default_rng(np.random.SeedSequence(7).spawn(2)[0])
        fresh = UNet(TINY, rng=rng_init)
        for name, p in fresh.named_params():
            assert np.array_equal(a.base_params[name], p.value)

    def test_seeded_determinism(self):
        sched = make_schedule(50)
        a = train_base(tiny_dataset(), TINY, sched, steps=5, seed=3,
                       train_cfg=TrainConfig(batch_size=2))
        b = train_base(tiny_dataset(), TINY, sched, steps=5, seed=3,
                       train_cfg=TrainConfig(batch_size=2))
        assert a.base_hash() == b.base_hash()

    def test_loss_halves_on_one_image(self):
        sched = make_schedule(100)
        ds = ProceduralDataset(seed=2, count=1, size=8)
        ckpt = train_base(ds, TINY, sched, steps=500, seed=1,
                          train_cfg=TrainConfig(batch_size=4, learning_rate=1e-3))
        curve = ckpt.metadata["loss_curve"]
        first = np.mean([l for _, l in curve[:10]])
        last = np.mean([l for _, l in curve[-10:]])
        assert last < 0.5 * first


class TestTrainControl:
    def test_base_hash_frozen(self, tiny_base):
        ckpt = train_control(tiny_dataset(), tiny_base, Variant.L, steps=5, seed=2,
                             train_cfg=TrainConfig(batch_size=4), palette_sizes=(4, 8))
        assert ckpt.base_hash() == tiny_base.base_hash()

    def test_task_mix_all_dequant(self, tiny_base):
        ckpt = train_control(tiny_dataset(), tiny_base, Variant.T, task_mix=(1.0, 0.0),
                             steps=4, seed=2, train_cfg=TrainConfig(batch_size=4),
                             palette_sizes=(4,))
        assert ckpt.metadata["task_counts"]["inpaint"] == 0
        assert ckpt.metadata["task_counts"]["dequant"] == 16

    def test_training_reduces_heldout_loss(self, tiny_base):
        ds = tiny_dataset(16)
        trained = train_control(ds, tiny_base, Variant.L, steps=60, seed=4,
                                train_cfg=TrainConfig(batch_size=4), palette_sizes=(4, 8))
        heldout = ProceduralDataset(seed=77, count=8, size=8)
        zero = tiny_base.build()
        zero.encoder = ControlEncoder(TINY, rng=np.random.default_rng(0))
        loss_zero = heldout_control_loss(zero, tiny_base.schedule, heldout, Variant.L,
                                         seed=9, batches=2, batch_size=4, palette_sizes=(4, 8))
        loss_trained = heldout_control_loss(trained.build(), tiny_base.schedule, heldout,
                                            Variant.L, seed=9, batches=2, batch_size=4,
                                            palette_sizes=(4, 8))
        assert loss_trained < loss_zero

    def test_outputs_depend_on_cond_after_one_step(self, tiny_base):
        ckpt = train_control(tiny_dataset(), tiny_base, Variant.L, steps=1, seed=1,
                             train_cfg=TrainConfig(batch_size=2), palette_sizes=(4,))
        den = ckpt.build()
        rng = np.random.default_rng(0)
        x = rng.standard_normal((1, 8, 8, 3)).astype(np.float32)
        c1 = np.zeros((1, 7, 8, 8), np.float32)
        c2 = np.ones((1, 7, 8, 8), np.float32)
        p1 = den.predict_eps(x, 5, c1)
        p2 = den.predict_eps(x, 5, c2)
        assert not np.array_equal(p1, p2)


class TestZeroInit:
    def test_prediction_ignores_cond_before_training(self, tiny_base):
        den = tiny_base.build()
        den.encoder = ControlEncoder(TINY, rng=np.random.default_rng(3))
        rng = np.random.default_rng(0)
        x = rng.standard_normal((2, 8, 8, 3)).astype(np.float32)
        c1 = rng.standard_normal((2, 7, 8, 8)).astype(np.float32)
        c2 = rng.standard_normal((2, 7, 8, 8)).astype(np.float32)
        base_only = den.predict_eps(x, 3)
        assert np.array_equal(den.predict_eps(x, 3, c1), base_only)
        assert np.array_equal(den.predict_eps(x, 3, c2), base_only)


class TestCheckpointIO:
    def test_round_trip(self, tiny_base, tmp_path):
        path = tmp_path / "base.ckpt"
        save_checkpoint(path, tiny_base)
        loaded = load_checkpoint(path)
        assert loaded.base_hash() == tiny_base.base_hash()
        assert loaded.config == tiny_base.config
        assert loaded.variant is None
        assert loaded.metadata["steps"] == tiny_base.metadata["steps"]

    def test_control_round_trip(self, tiny_base, tmp_path):
        ckpt = train_control(tiny_dataset(), tiny_base, Variant.G, steps=2, seed=0,
                             train_cfg=TrainConfig(batch_size=2), palette_sizes=(4,))
        path = tmp_path / "ctrl.ckpt"
        save_checkpoint(path, ckpt)
        loaded = load_checkpoint(path)
        assert loaded.variant == "G"
        for name, arr in ckpt.control_params.items():
            assert np.array_equal(loaded.control_params[name], arr)

    def test_corrupt_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_loaded_model_predicts_identically(self, tiny_base, tmp_path):
        path = tmp_path / "b.ckpt"
        save_checkpoint(path, tiny_base)
        den_a = tiny_base.build()
        den_b = load_checkpoint(path).build()
        x = np.random.default_rng(1).standard_normal((1, 8, 8, 3)).astype(np.float32)
        assert np.array_equal(den_a.predict_eps(x, 2), den_b.predict_eps(x, 2))
