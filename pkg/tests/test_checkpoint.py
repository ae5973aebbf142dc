"""Normalization statistics and the checkpoint wire format."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modpolicy.nets import (
    MTDP,
    CheckpointError,
    MinMaxNormalizer,
    PolicyConfig,
    load_checkpoint,
    restore_parameters,
    save_checkpoint,
)


def test_normalizer_maps_extremes_to_unit_interval():
    data = np.array([[0.0, -3.0], [2.0, 5.0], [1.0, 1.0]])
    n = MinMaxNormalizer.from_data(data)
    out = n.normalize(data)
    assert out.min() == -1.0 and out.max() == 1.0
    np.testing.assert_array_equal(out.min(axis=0), [-1, -1])
    np.testing.assert_array_equal(out.max(axis=0), [1, 1])


def test_normalizer_roundtrip_exact():
    rng = np.random.default_rng(0)
    data = rng.uniform(-4, 7, size=(50, 3))
    n = MinMaxNormalizer.from_data(data)
    np.testing.assert_allclose(n.denormalize(n.normalize(data)), data, atol=1e-6)


def test_normalizer_constant_dimension_guard():
    data = np.column_stack([np.linspace(0, 1, 10), np.full(10, 0.25)])
    n = MinMaxNormalizer.from_data(data)
    out = n.normalize(data)
    np.testing.assert_array_equal(out[:, 1], np.zeros(10))
    back = n.denormalize(out)
    np.testing.assert_allclose(back, data, atol=1e-12)


def test_normalizer_dict_roundtrip():
    n = MinMaxNormalizer(np.array([0.0, -1.0]), np.array([2.0, 3.0]))
    m = MinMaxNormalizer.from_dict(n.to_dict())
    x = np.array([[1.3, 0.7]])
    np.testing.assert_array_equal(n.normalize(x), m.normalize(x))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
def test_normalizer_roundtrip_property(seed, n_rows):
    rng = np.random.default_rng(seed)
    data = rng.uniform(-10, 10, size=(n_rows, 4))
    n = MinMaxNormalizer.from_data(data)
    np.testing.assert_allclose(n.denormalize(n.normalize(data)), data, atol=1e-6)
    assert np.abs(n.normalize(data)).max() <= 1.0 + 1e-12


def _toy_cfg():
    return PolicyConfig(d_model=16, n_heads=2, n_encoder_layers=1, n_decoder_layers=1,
                        horizon=4, obs_horizon=2, action_horizon=2, action_dim=2,
                        obs_dim=4, ffn_mult=2)


def _norms():
    return {
        "obs": MinMaxNormalizer(np.zeros(4), np.ones(4)).to_dict(),
        "action": MinMaxNormalizer(-np.ones(2), np.ones(2)).to_dict(),
    }


def test_checkpoint_roundtrip(tmp_path):
    cfg = _toy_cfg()
    net = MTDP(cfg, np.random.default_rng(0))
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net, {"policy": cfg.to_dict()}, _norms())

    manifest, params = load_checkpoint(path)
    assert manifest["config"]["policy"]["d_model"] == 16
    assert set(params) == {name for name, _ in net.named_parameters()}

    net2 = MTDP(cfg, np.random.default_rng(42))
    restore_parameters(net2, params)
    for (n1, p1), (n2, p2) in zip(net.named_parameters(), net2.named_parameters()):
        assert n1 == n2
        np.testing.assert_array_equal(p1.data, p2.data)


def test_checkpoint_manifest_is_json_line_then_payload(tmp_path):
    cfg = _toy_cfg()
    net = MTDP(cfg, np.random.default_rng(0))
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net, {"policy": cfg.to_dict()}, _norms())
    raw = path.read_bytes()
    import json
    manifest = json.loads(raw[:raw.find(b"\n")].decode("utf-8"))
    first = manifest["params"][0]
    assert first["offset"] == 0
    total = sum(int(np.prod(e["shape"] or [1])) for e in manifest["params"])
    assert manifest["payload_bytes"] == 4 * total  # float32 little-endian


def test_checkpoint_shape_mismatch_rejected(tmp_path):
    cfg = _toy_cfg()
    net = MTDP(cfg, np.random.default_rng(0))
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net, {"policy": cfg.to_dict()}, _norms())
    _, params = load_checkpoint(path)

    bigger = PolicyConfig(**{**cfg.to_dict(), "d_model": 32, "unet_channels": (32, 64)})
    net_big = MTDP(bigger, np.random.default_rng(0))
    with pytest.raises(CheckpointError, match="mismatch"):
        restore_parameters(net_big, params)


def test_checkpoint_truncated_payload_rejected(tmp_path):
    cfg = _toy_cfg()
    net = MTDP(cfg, np.random.default_rng(0))
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, net, {"policy": cfg.to_dict()}, _norms())
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(CheckpointError, match="payload"):
        load_checkpoint(path)
