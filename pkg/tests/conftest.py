import pytest
import torch

from models.encoders import EncoderFamily, EncoderSpec
from pipeline.datasets import prepare_dataset
from pipeline.synthetic import SyntheticConfig, generate_synthetic
from training.finetune import FinetuneConfig
from training.pretrain import PretrainConfig


@pytest.fixture(autouse=True)
def _float32_default():
    # Some tests switch to float64 for gradient checks
    previous = torch.get_default_dtype()
    yield
    torch.set_default_dtype(previous)


@pytest.fixture
def small_synthetic_config():
    return SyntheticConfig(num_subjects=6, num_classes=3, duration_s=40.0, seed=3)


@pytest.fixture
def small_recordings(small_synthetic_config):
    return generate_synthetic(small_synthetic_config)


@pytest.fixture
def prepared(small_recordings):
    """6 subjects split 4/1/1, 30-sample windows with 50 % overlap."""
    return prepare_dataset(small_recordings, seed=0, num_classes=3)


@pytest.fixture
def tiny_spec():
    return EncoderSpec(EncoderFamily.CONV1D, layer_widths=(8, 8, 8), kernel_size=3)


@pytest.fixture
def tiny_pretrain_config(tiny_spec):
    return PretrainConfig(K=4, epochs=2, batch_size=16, seed=0, encoder=tiny_spec, context_dim=16)


@pytest.fixture
def tiny_finetune_config():
    return FinetuneConfig(epochs=3, batch_size=16, seed=0)
