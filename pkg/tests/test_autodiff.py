"""Backward pass: trivial identities, the finite-difference oracle, tape rules."""

import numpy as np
import pytest

import modpolicy.autodiff as ad
from modpolicy.autodiff import AutodiffError, Parameter, Tensor, grad_check


def test_grad_of_weighted_sum_is_the_weights():
    x = np.array([1.0, -2.0, 3.0])
    w = Parameter(np.array([0.5, 0.5, 0.5]))
    loss = ad.tsum(ad.mul(w, Tensor(x)))
    ad.backward(loss)
    np.testing.assert_array_equal(w.grad, x)


def test_grad_of_half_squared_norm_is_the_vector():
    w = Parameter(np.array([1.0, -4.0, 2.5]))
    loss = ad.scale(ad.tsum(ad.mul(w, w)), 0.5)
    ad.backward(loss)
    np.testing.assert_allclose(w.grad, w.data, atol=1e-15)


def test_backward_rejects_non_scalar():
    w = Parameter(np.ones(3))
    out = ad.mul(w, w)
    with pytest.raises(AutodiffError, match="scalar"):
        ad.backward(out)


def test_double_backward_rejected():
    w = Parameter(np.ones(3))
    loss = ad.tsum(ad.mul(w, w))
    ad.backward(loss)
    with pytest.raises(AutodiffError, match="double backward"):
        ad.backward(loss)


def test_no_grad_builds_no_tape():
    w = Parameter(np.ones(3))
    with ad.no_grad():
        out = ad.tsum(ad.mul(w, w))
    assert not out.requires_grad
    with pytest.raises(AutodiffError):
        ad.backward(out)


def test_grad_accumulates_over_shared_subexpression():
    w = Parameter(np.array([2.0]))
    y = ad.mul(w, w)            # w^2
    loss = ad.tsum(ad.add(y, ad.mul(w, Tensor(np.array([3.0])))))  # w^2 + 3w
    ad.backward(loss)
    np.testing.assert_allclose(w.grad, [2 * 2.0 + 3.0])


def test_broadcast_add_grad_sums_over_batch():
    b = Parameter(np.zeros(3))
    x = Tensor(np.ones((4, 3)))
    loss = ad.tsum(ad.add(x, b))
    ad.backward(loss)
    np.testing.assert_array_equal(b.grad, [4.0, 4.0, 4.0])


def _rand_param(rng, shape):
    return Parameter(rng.normal(size=shape))


def test_gradcheck_softmax_matmul_chain():
    rng = np.random.default_rng(11)
    w = _rand_param(rng, (5, 5))
    x = Tensor(rng.normal(size=(3, 5)))
    r = Tensor(rng.normal(size=(3, 5)))

    def f():
        return ad.tsum(ad.mul(ad.softmax(ad.matmul(x, w)), r))

    report = grad_check(f, [w], h=1e-3, tolerance=1e-5)
    assert report.passed, str(report)


def test_gradcheck_constant_function_all_zero():
    w = Parameter(np.ones(4))

    def f():
        return ad.tsum(ad.mul(Tensor(np.ones(4)), Tensor(np.full(4, 2.0)))) + ad.scale(ad.tsum(w), 0.0)

    report = grad_check(f, [w], h=1e-3, tolerance=1e-5)
    assert report.max_rel_error == 0.0


def test_gradcheck_layernorm_at_zero_variance():
    # the epsilon floor makes curvature ~ eps^-1.5 here, so the finite
    # difference needs a much smaller step than the smooth-case default
    w = Parameter(np.full(6, 3.0))
    r = Tensor(np.linspace(-1, 1, 6))

    def f():
        return ad.tsum(ad.mul(ad.layer_norm(w), r))

    report = grad_check(f, [w], h=1e-6, tolerance=1e-5)
    assert np.isfinite(report.max_rel_error)
    assert report.passed, str(report)


@pytest.mark.parametrize("op", [ad.gelu, ad.silu, ad.layer_norm, ad.softmax])
def test_gradcheck_unary_ops(op):
    rng = np.random.default_rng(5)
    w = _rand_param(rng, (4, 6))
    r = Tensor(rng.normal(size=(4, 6)))

    def f():
        return ad.tsum(ad.mul(op(w), r))

    report = grad_check(f, [w], h=1e-3, tolerance=1e-5)
    assert report.passed, str(report)


def test_gradcheck_conv1d():
    rng = np.random.default_rng(9)
    x = _rand_param(rng, (2, 3, 8))
    w = _rand_param(rng, (4, 3, 3))
    b = _rand_param(rng, (4,))
    r = Tensor(rng.normal(size=(2, 4, 8)))

    def f():
        return ad.tsum(ad.mul(ad.conv1d(x, w, b), r))

    report = grad_check(f, [x, w, b], h=1e-3, tolerance=1e-5, n_samples=120)
    assert report.passed, str(report)


def test_gradcheck_pool_upsample_slice_concat():
    rng = np.random.default_rng(13)
    a = _rand_param(rng, (2, 8))
    b = _rand_param(rng, (2, 8))
    r = Tensor(rng.normal(size=(2, 12)))

    def f():
        up = ad.upsample_nearest(ad.avg_pool1d(a, 2), 2)
        cat = ad.concat([up, b[:, 2:6]], axis=1)
        return ad.tsum(ad.mul(cat, r))

    report = grad_check(f, [a, b], h=1e-3, tolerance=1e-5)
    assert report.passed, str(report)


def test_gradcheck_mean_reductions_and_transpose():
    rng = np.random.default_rng(17)
    w = _rand_param(rng, (3, 4, 5))
    r = Tensor(rng.normal(size=(5, 4)))

    def f():
        pooled = ad.mean(w, axis=0)           # (4, 5)
        return ad.tsum(ad.mul(ad.transpose(pooled, (1, 0)), r))

    report = grad_check(f, [w], h=1e-3, tolerance=1e-5)
    assert report.passed, str(report)


def test_parameter_names_via_module_tree():
    rng = np.random.default_rng(0)

    class Tiny(ad.Module):
        def __init__(self):
            super().__init__()
            self.proj = ad.Linear(3, 2, rng)
            self.blocks = ad.ModuleList([ad.LayerNorm(2), ad.LayerNorm(2)])

    m = Tiny().finalize_names()
    names = [n for n, _ in m.named_parameters()]
    assert names == [
        "proj.weight", "proj.bias",
        "blocks.0.gamma", "blocks.0.beta",
        "blocks.1.gamma", "blocks.1.beta",
    ]
    assert all(p.name == n for n, p in m.named_parameters())


def test_module_param_count_and_dtype_switch():
    rng = np.random.default_rng(0)
    lin = ad.Linear(4, 3, rng)
    assert lin.n_parameters() == 4 * 3 + 3
    lin.astype(np.float64)
    assert lin.weight.dtype == np.float64
