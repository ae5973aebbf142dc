"""Embeddings and the full MTDP / MUDP noise predictors."""

import numpy as np
import pytest

import modpolicy.autodiff as ad
from modpolicy.autodiff import Tensor, grad_check
from modpolicy.nets import (
    MTDP,
    MUDP,
    BlockVariant,
    ConfigError,
    ObsEncoder,
    PolicyConfig,
    TimestepEmbedding,
    build_network,
    pool_condition,
    sinusoidal_timestep_embedding,
)


# --------------------------------------------------------------------------
# embeddings


def test_sinusoid_t0_is_zeros_then_ones():
    emb = sinusoidal_timestep_embedding(np.array([0]), 8)
    np.testing.assert_array_equal(emb[0, :4], np.zeros(4))
    np.testing.assert_array_equal(emb[0, 4:], np.ones(4))


def test_sinusoid_distinct_over_1_to_100():
    emb = sinusoidal_timestep_embedding(np.arange(1, 101), 16)
    assert len(np.unique(emb.round(12), axis=0)) == 100


def test_sinusoid_odd_dim_rejected():
    with pytest.raises(ConfigError, match="even"):
        sinusoidal_timestep_embedding(np.array([1]), 7)


def test_timestep_embedding_gradcheck():
    rng = np.random.default_rng(0)
    emb = TimestepEmbedding(8, 8, rng, dtype=np.float64).finalize_names()
    r = Tensor(rng.normal(size=(3, 8)))

    def f():
        return ad.tsum(ad.mul(emb(np.array([3, 50, 99])), r))

    report = grad_check(f, emb.parameters(), h=1e-4, tolerance=1e-5)
    assert report.passed, str(report)


def test_obs_encoder_token_count_and_identical_states():
    rng = np.random.default_rng(1)
    enc = ObsEncoder(4, 8, rng, dtype=np.float64)
    obs = np.tile(np.array([0.1, 0.2, 0.3, 0.4]), (1, 2, 1))
    out = enc(obs)
    assert out.shape == (1, 2, 8)
    np.testing.assert_array_equal(out.data[0, 0], out.data[0, 1])


def test_obs_encoder_rejects_non_finite():
    enc = ObsEncoder(2, 4, np.random.default_rng(0))
    with pytest.raises(ValueError, match="non-finite"):
        enc(np.array([[[np.nan, 0.0]]]))


def test_obs_encoder_gradcheck():
    rng = np.random.default_rng(2)
    enc = ObsEncoder(4, 8, rng, dtype=np.float64).finalize_names()
    obs = rng.uniform(-1, 1, size=(2, 3, 4))
    r = Tensor(rng.normal(size=(2, 3, 8)))

    def f():
        return ad.tsum(ad.mul(enc(obs), r))

    report = grad_check(f, enc.parameters(), h=1e-4, tolerance=1e-5)
    assert report.passed, str(report)


# --------------------------------------------------------------------------
# MTDP


def _toy_mtdp_cfg(**kw):
    base = dict(d_model=16, n_heads=2, n_encoder_layers=1, n_decoder_layers=1,
                horizon=4, obs_horizon=2, action_horizon=2, action_dim=2,
                obs_dim=4, ffn_mult=2, arch="mtdp")
    base.update(kw)
    return PolicyConfig(**base)


def _batch(cfg, rng, b=2):
    noisy = rng.standard_normal((b, cfg.horizon, cfg.action_dim))
    obs = rng.uniform(-1, 1, size=(b, cfg.obs_horizon, cfg.obs_dim))
    t = rng.integers(1, 100, size=b)
    return noisy, obs, t


@pytest.mark.parametrize("variant", list(BlockVariant))
def test_mtdp_output_shape(variant):
    cfg = _toy_mtdp_cfg(variant=variant)
    rng = np.random.default_rng(0)
    net = MTDP(cfg, rng)
    noisy, obs, t = _batch(cfg, rng)
    out = net(noisy.astype(np.float32), obs, t)
    assert out.shape == noisy.shape


def test_mtdp_head_zero_init_outputs_zero():
    cfg = _toy_mtdp_cfg()
    rng = np.random.default_rng(0)
    net = MTDP(cfg, rng)
    noisy, obs, t = _batch(cfg, rng)
    out = net(noisy.astype(np.float32), obs, t)
    assert (out.data == 0.0).all()


def test_mtdp_decoder_stack_reduces_to_cross_attention_at_init():
    # with gates zero-initialized, each decoder layer must equal
    # x + cross_attn(ln(x), enc), checked layer by layer
    cfg = _toy_mtdp_cfg(n_decoder_layers=3)
    rng = np.random.default_rng(1)
    net = MTDP(cfg, rng, dtype=np.float64)
    noisy, obs, t = _batch(cfg, rng)
    enc = net.encode(obs, t)
    cond = pool_condition(enc)
    h = ad.add(net.action_embed(Tensor(noisy)), net.pos_embed)
    for block in net.decoder:
        out = block(h, enc, cond)
        manual = ad.add(h, block.cross_attn(block.ln_cross(h), enc))
        assert (out.data == manual.data).all()
        h = out


def test_mtdp_full_gradcheck():
    cfg = _toy_mtdp_cfg()
    rng = np.random.default_rng(3)
    net = MTDP(cfg, rng, dtype=np.float64)
    # un-zero the gated paths and the head so every parameter matters
    for name, p in net.named_parameters():
        if not p.data.any():
            p.data = 0.05 * rng.standard_normal(p.data.shape)
    noisy, obs, t = _batch(cfg, rng, b=1)
    r = Tensor(rng.normal(size=noisy.shape))

    def f():
        return ad.tsum(ad.mul(net(noisy, obs, t), r))

    report = grad_check(f, net.parameters(), h=1e-4, tolerance=1e-5, n_samples=150)
    assert report.passed, str(report)


def test_mtdp_shape_mismatch_names_stage():
    cfg = _toy_mtdp_cfg()
    net = MTDP(cfg, np.random.default_rng(0))
    with pytest.raises(ValueError, match="action embed stage"):
        net(np.zeros((1, 5, 2), dtype=np.float32), np.zeros((1, 2, 4)), np.array([1]))


def test_mtdp_parameter_count_default_config_regression():
    net = MTDP(PolicyConfig(), np.random.default_rng(0))
    assert net.n_parameters() == 480194
    net2 = MTDP(PolicyConfig(), np.random.default_rng(99))
    assert net2.n_parameters() == 480194


# --------------------------------------------------------------------------
# MUDP


def _toy_mudp_cfg(**kw):
    base = dict(d_model=16, n_heads=2, horizon=8, obs_horizon=2, action_horizon=2,
                action_dim=2, obs_dim=4, unet_channels=(8, 16), ffn_mult=2, arch="mudp")
    base.update(kw)
    return PolicyConfig(**base)


def test_mudp_output_shape():
    cfg = _toy_mudp_cfg()
    rng = np.random.default_rng(0)
    net = MUDP(cfg, rng)
    noisy, obs, t = _batch(cfg, rng)
    out = net(noisy.astype(np.float32), obs, t)
    assert out.shape == noisy.shape


def test_mudp_init_equals_pure_conv_unet():
    cfg = _toy_mudp_cfg()
    rng = np.random.default_rng(5)
    net = MUDP(cfg, rng)
    noisy, obs, t = _batch(cfg, rng)
    full = net(noisy.astype(np.float32), obs, t)
    conv_only = net(noisy.astype(np.float32), obs, t, conv_only=True)
    assert (full.data == conv_only.data).all()


def test_mudp_indivisible_horizon_rejected():
    with pytest.raises(ConfigError, match="divisible"):
        _toy_mudp_cfg(horizon=6)


def test_mudp_full_gradcheck():
    cfg = _toy_mudp_cfg()
    rng = np.random.default_rng(7)
    net = MUDP(cfg, rng, dtype=np.float64)
    for name, p in net.named_parameters():
        if not p.data.any():
            p.data = 0.05 * rng.standard_normal(p.data.shape)
    noisy, obs, t = _batch(cfg, rng, b=1)
    r = Tensor(rng.normal(size=noisy.shape))

    def f():
        return ad.tsum(ad.mul(net(noisy, obs, t), r))

    report = grad_check(f, net.parameters(), h=1e-4, tolerance=1e-5, n_samples=150)
    assert report.passed, str(report)


def test_mudp_parameter_count_default_config_regression():
    net = MUDP(PolicyConfig(arch="mudp"), np.random.default_rng(0))
    assert net.n_parameters() == 458114


def test_build_network_dispatch():
    assert isinstance(build_network(PolicyConfig(), np.random.default_rng(0)), MTDP)
    assert isinstance(build_network(PolicyConfig(arch="mudp"), np.random.default_rng(0)), MUDP)
