import numpy as np
import pytest

from acer.nn import AdamConfig, Mlp, MlpSpec, ShapeError, gradient_check, numeric_gradient


def mse_loss(target):
    def f(out):
        d = out - target
        return float(np.mean(d ** 2)), 2.0 * d / d.size
    return f


@pytest.mark.parametrize("out_act", ["identity", "tanh"])
def test_gradient_matches_finite_differences(out_act):
    rng = np.random.default_rng(1)
    net = Mlp.init(MlpSpec(5, (7, 6), 3, "relu", out_act), rng)
    err = gradient_check(net, mse_loss(rng.normal(size=(4, 3))), trials=3, rng=rng, batch=4)
    assert err < 1e-6


def test_input_gradient():
    rng = np.random.default_rng(2)
    net = Mlp.init(MlpSpec(4, (8,), 1, "tanh"), rng)
    x = rng.normal(size=(1, 4))
    _, gx = net.backward(x, np.ones((1, 1)))
    num = numeric_gradient(lambda v: float(net.forward(v.reshape(1, -1))[0, 0]), x.ravel().copy())
    assert np.allclose(gx.ravel(), num, atol=1e-8)


def test_shapes_and_errors():
    net = Mlp.init(MlpSpec(3, (4,), 2), np.random.default_rng(0))
    assert net.forward(np.zeros(3)).shape == (2,)
    assert net.forward(np.zeros((5, 3))).shape == (5, 2)
    assert net.params.size == net.spec.n_params == 3 * 4 + 4 + 4 * 2 + 2
    with pytest.raises(ShapeError):
        net.forward(np.zeros(4))


def test_adam_reduces_loss():
    rng = np.random.default_rng(0)
    net = Mlp.init(MlpSpec(2, (16,), 1, "tanh"), rng)
    x = rng.normal(size=(64, 2))
    y = (x[:, :1] * x[:, 1:])
    loss = mse_loss(y)
    before = loss(net.forward(x))[0]
    cfg = AdamConfig(1e-2)
    for _ in range(300):
        _, g = loss(net.forward(x))
        grad, _ = net.backward(x, g)
        net.adam_step(grad, cfg)
    assert loss(net.forward(x))[0] < 0.5 * before


def test_soft_update_and_roundtrip():
    rng = np.random.default_rng(0)
    a = Mlp.init(MlpSpec(2, (3,), 1), rng)
    b = Mlp.init(MlpSpec(2, (3,), 1), rng)
    expect = 0.8 * b.params + 0.2 * a.params
    b.soft_update_from(a, 0.2)
    assert np.allclose(b.params, expect)
    c = Mlp.from_bytes(a.to_bytes())
    assert np.array_equal(c.params, a.params) and c.spec == a.spec
