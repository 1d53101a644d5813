import struct

import numpy as np
import pytest
import torch

from models.checkpoint import (
    Checkpoint,
    build_cpc_model,
    checkpoint_from_model,
    export_tensors,
    load_cpc_model,
    model_config,
    named_views,
)
from models.cpc import CpcModel
from models.encoders import EncoderFamily, EncoderSpec
from utils.error_handler import DataError


def _model(spec=None, K=3):
    torch.manual_seed(0)
    spec = spec or EncoderSpec(EncoderFamily.CONV1D, layer_widths=(8, 8, 8))
    return CpcModel(spec, 3, K, context_dim=16)


def _checkpoint(model=None):
    model = model or _model()
    return checkpoint_from_model(model, model_config(model, window_length=30, seed=0))


class TestContainer:
    def test_save_load_save_is_byte_identical(self, tmp_path):
        first = _checkpoint().save(tmp_path / "a.bin")
        second = Checkpoint.load(first).save(tmp_path / "b.bin")
        assert first.read_bytes() == second.read_bytes()

    def test_tensors_survive_bit_exactly(self, tmp_path):
        ckpt = _checkpoint()
        loaded = Checkpoint.load(ckpt.save(tmp_path / "c.bin"))
        assert list(loaded.tensors) == list(ckpt.tensors)
        for name, array in ckpt.tensors.items():
            assert loaded.tensors[name].tobytes() == array.tobytes()
        assert loaded.config == ckpt.config
        assert loaded.digest() == ckpt.digest()

    def test_header_layout(self):
        data = _checkpoint().to_bytes()
        (version,) = struct.unpack_from("<I", data, 0)
        (config_len,) = struct.unpack_from("<Q", data, 4)
        assert version == 1
        assert data[12:12 + config_len].decode("utf-8").startswith('{"K":3')

    def test_scalar_tensor(self):
        ckpt = Checkpoint(tensors={"x": np.array(2.5, dtype=np.float32)}, config={})
        assert Checkpoint.from_bytes(ckpt.to_bytes()).tensors["x"] == np.float32(2.5)

    def test_truncated(self):
        data = _checkpoint().to_bytes()
        with pytest.raises(DataError, match="truncated"):
            Checkpoint.from_bytes(data[:-3])

    def test_trailing_bytes(self):
        with pytest.raises(DataError, match="trailing"):
            Checkpoint.from_bytes(_checkpoint().to_bytes() + b"\0")

    def test_unknown_version(self):
        data = bytearray(_checkpoint().to_bytes())
        data[0:4] = struct.pack("<I", 99)
        with pytest.raises(DataError, match="version 99"):
            Checkpoint.from_bytes(bytes(data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            Checkpoint.load(tmp_path / "none.bin")


class TestNaming:
    def test_conv_names(self):
        names = list(_checkpoint().tensors)
        assert names[:2] == ["enc.layer1.weight", "enc.layer1.bias"]
        assert "gar.layer2.reset.weight_ih" in names
        assert "gar.layer1.new.bias_hh" in names
        assert names[-2:] == ["head3.weight", "head3.bias"]

    def test_gate_views_share_storage(self):
        model = _model()
        views = named_views(model)
        hidden = model.context_dim
        torch.testing.assert_close(views["gar.layer1.update.weight_ih"], model.gar.weight_ih_l0[hidden:2 * hidden])

    def test_lstm_encoder_gates(self):
        names = export_tensors(_model(EncoderSpec(EncoderFamily.RECURRENT, cell="lstm", hidden=8)))
        assert {f"enc.layer1.{g}.weight_ih" for g in ("input", "forget", "cell", "output")} <= set(names)


class TestRebuild:
    def test_loaded_model_matches(self):
        model = _model().eval()
        restored = load_cpc_model(_checkpoint(model)).eval()
        x = torch.randn(2, 30, 3)
        torch.testing.assert_close(restored.encoder(x), model.encoder(x), rtol=0, atol=0)
        for a, b in zip(model.parameters(), restored.parameters()):
            assert torch.equal(a, b)

    def test_missing_tensor(self):
        ckpt = _checkpoint()
        del ckpt.tensors["head1.bias"]
        with pytest.raises(DataError, match="missing tensor head1.bias"):
            load_cpc_model(ckpt)

    def test_wrong_shape(self):
        ckpt = _checkpoint()
        ckpt.tensors["head1.bias"] = np.zeros(3, dtype=np.float32)
        with pytest.raises(DataError, match="shape"):
            load_cpc_model(ckpt)

    def test_incomplete_config(self):
        with pytest.raises(DataError, match="lacks"):
            build_cpc_model({"encoder": EncoderSpec().to_dict()})
