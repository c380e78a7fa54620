"""Dense feed-forward networks with hand-written backprop and Adam.

Parameters live in one flat float64 vector laid out layer by layer as
``[W_0, b_0, W_1, b_1, ...]`` where ``W_k`` has shape ``(fan_in, fan_out)``.
Every input may be a single vector or a 2-D batch of row vectors.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

CHECKPOINT_VERSION = 1

_HIDDEN = ("relu", "tanh")
_OUTPUT = ("identity", "tanh")


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if len(self.hidden_dims) < 1:
            raise ValueError("at least one hidden layer is required")
        if min((self.input_dim, self.output_dim) + self.hidden_dims) < 1:
            raise ValueError("all layer sizes must be >= 1")
        if self.hidden_activation not in _HIDDEN:
            raise ValueError(f"hidden_activation must be one of {_HIDDEN}")
        if self.output_activation not in _OUTPUT:
            raise ValueError(f"output_activation must be one of {_OUTPUT}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims, self.output_dim)

    @property
    def n_params(self) -> int:
        sizes = self.layer_sizes
        return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    def copy(self) -> "AdamState":
        return AdamState(self.m.copy(), self.v.copy(), self.t)


@dataclass
class Mlp:
    spec: MlpSpec
    params: np.ndarray
    adam: AdamState = field(default=None)

    def __post_init__(self):
        self.params = np.ascontiguousarray(self.params, dtype=np.float64)
        if self.params.shape != (self.spec.n_params,):
            raise ShapeError(f"expected {self.spec.n_params} params, got {self.params.shape}")
        if self.adam is None:
            self.adam = AdamState(np.zeros_like(self.params), np.zeros_like(self.params))

    @classmethod
    def init(cls, spec: MlpSpec, rng: np.random.Generator) -> "Mlp":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases."""
        chunks = []
        sizes = spec.layer_sizes
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            chunks.append(rng.uniform(-bound, bound, fan_in * fan_out))
            chunks.append(rng.uniform(-bound, bound, fan_out))
        return cls(spec, np.concatenate(chunks))

    @classmethod
    def zeros(cls, spec: MlpSpec) -> "Mlp":
        return cls(spec, np.zeros(spec.n_params))

    def clone(self) -> "Mlp":
        return Mlp(self.spec, self.params.copy(), self.adam.copy())

    def layers(self, vec: np.ndarray | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
        """(W, b) views into ``vec`` (defaults to the parameters)."""
        vec = self.params if vec is None else vec
        out, pos = [], 0
        sizes = self.spec.layer_sizes
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = vec[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out)
            pos += fan_in * fan_out
            b = vec[pos:pos + fan_out]
            pos += fan_out
            out.append((w, b))
        return out

    def _check_input(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x[None, :] if single else x
        if x2.ndim != 2 or x2.shape[1] != self.spec.input_dim:
            raise ShapeError(f"input has shape {x.shape}, expected last dim {self.spec.input_dim}")
        return x2, single

    def _forward_cache(self, x2: np.ndarray):
        pre, post = [], [x2]
        h = x2
        layers = self.layers()
        last = len(layers) - 1
        for k, (w, b) in enumerate(layers):
            z = h @ w + b
            pre.append(z)
            if k < last:
                h = np.maximum(z, 0.0) if self.spec.hidden_activation == "relu" else np.tanh(z)
            else:
                h = np.tanh(z) if self.spec.output_activation == "tanh" else z
            post.append(h)
        return pre, post

    def forward(self, x) -> np.ndarray:
        x2, single = self._check_input(x)
        out = self._forward_cache(x2)[1][-1]
        return out[0] if single else out

    def backward(self, x, output_grad) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(dL/dparams, dL/dinput)`` for upstream gradient ``output_grad``.

        For a batch the parameter gradient is summed over rows; scale
        ``output_grad`` to get a mean.
        """
        x2, single = self._check_input(x)
        g = np.asarray(output_grad, dtype=np.float64)
        g = g[None, :] if g.ndim == 1 else g
        if g.shape != (x2.shape[0], self.spec.output_dim):
            raise ShapeError(f"output_grad has shape {np.shape(output_grad)}")
        pre, post = self._forward_cache(x2)
        grad = np.zeros_like(self.params)
        glayers = self.layers(grad)
        layers = self.layers()
        last = len(layers) - 1
        for k in range(last, -1, -1):
            if k == last:
                if self.spec.output_activation == "tanh":
                    g = g * (1.0 - post[k + 1] ** 2)
            elif self.spec.hidden_activation == "relu":
                g = g * (pre[k] > 0.0)
            else:
                g = g * (1.0 - post[k + 1] ** 2)
            gw, gb = glayers[k]
            gw[...] = post[k].T @ g
            gb[...] = g.sum(axis=0)
            g = g @ layers[k][0].T
        return grad, (g[0] if single else g)

    def adam_step(self, grad: np.ndarray, cfg: AdamConfig) -> "Mlp":
        if grad.shape != self.params.shape:
            raise ShapeError("gradient length does not match parameter count")
        st = self.adam
        st.t += 1
        st.m *= cfg.beta1
        st.m += (1.0 - cfg.beta1) * grad
        st.v *= cfg.beta2
        st.v += (1.0 - cfg.beta2) * grad * grad
        m_hat = st.m / (1.0 - cfg.beta1 ** st.t)
        v_hat = st.v / (1.0 - cfg.beta2 ** st.t)
        self.params -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        return self

    def soft_update_from(self, source: "Mlp", tau: float) -> "Mlp":
        if source.spec != self.spec:
            raise ShapeError("soft update between networks of different shape")
        if not 0.0 <= tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if tau == 1.0:
            self.params[:] = source.params
        elif tau > 0.0:
            self.params *= 1.0 - tau
            self.params += tau * source.params
        return self

    # serialization -------------------------------------------------------

    def to_arrays(self, prefix: str = "") -> dict[str, np.ndarray]:
        s = self.spec
        return {
            prefix + "spec_dims": np.array(s.layer_sizes, dtype=np.int64),
            prefix + "spec_acts": np.array([s.hidden_activation, s.output_activation]),
            prefix + "params": self.params,
            prefix + "adam_m": self.adam.m,
            prefix + "adam_v": self.adam.v,
            prefix + "adam_t": np.array(self.adam.t, dtype=np.int64),
        }

    @classmethod
    def from_arrays(cls, arrays, prefix: str = "") -> "Mlp":
        dims = [int(d) for d in arrays[prefix + "spec_dims"]]
        acts = [str(a) for a in arrays[prefix + "spec_acts"]]
        spec = MlpSpec(dims[0], tuple(dims[1:-1]), dims[-1], acts[0], acts[1])
        adam = AdamState(np.array(arrays[prefix + "adam_m"]), np.array(arrays[prefix + "adam_v"]),
                         int(arrays[prefix + "adam_t"]))
        return cls(spec, np.array(arrays[prefix + "params"]), adam)

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        np.savez(buf, version=np.array(CHECKPOINT_VERSION), **self.to_arrays())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Mlp":
        with np.load(io.BytesIO(data), allow_pickle=False) as arrays:
            if int(arrays["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {int(arrays['version'])}")
            return cls.from_arrays(arrays)


# Functional aliases -------------------------------------------------------

def forward(net: Mlp, x) -> np.ndarray:
    return net.forward(x)


def backward(net: Mlp, x, output_grad) -> tuple[np.ndarray, np.ndarray]:
    return net.backward(x, output_grad)


def adam_step(net: Mlp, grad: np.ndarray, cfg: AdamConfig) -> Mlp:
    return net.adam_step(grad, cfg)


def soft_update(target: Mlp, source: Mlp, tau: float) -> Mlp:
    return target.soft_update_from(source, tau)


def numeric_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences of scalar ``f`` at ``x`` (``x`` is restored afterwards)."""
    grad = np.zeros_like(x)
    for i in range(x.size):
        old = x.flat[i]
        x.flat[i] = old + h
        fp = f(x)
        x.flat[i] = old - h
        fm = f(x)
        x.flat[i] = old
        grad.flat[i] = (fp - fm) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    return float(np.max(np.abs(analytic - numeric)) / max(np.max(np.abs(numeric)), 1e-8))


def _near_kink(net: Mlp, x: np.ndarray, margin: float) -> bool:
    if net.spec.hidden_activation != "relu":
        return False
    x2, _ = net._check_input(x)
    pre, _ = net._forward_cache(x2)
    return any(np.any(np.abs(z) < margin) for z in pre[:-1])


def gradient_check(
    net: Mlp,
    loss: Callable[[np.ndarray], tuple[float, np.ndarray]],
    trials: int = 1,
    rng: np.random.Generator | None = None,
    batch: int = 1,
    h: float = 1e-5,
    kink_margin: float = 1e-3,
) -> float:
    """Max relative error between backprop and central differences.

    ``loss(outputs)`` returns ``(value, dvalue/doutputs)``.  Inputs are
    drawn from N(0, 1); for relu nets, draws with a pre-activation within
    ``kink_margin`` of zero are resampled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        for _attempt in range(1000):
            x = rng.normal(size=(batch, net.spec.input_dim))
            if not _near_kink(net, x, kink_margin):
                break
        _, g_out = loss(net.forward(x))
        analytic, _ = net.backward(x, g_out)
        probe = net.clone()

        def f(p):
            probe.params = p
            return loss(probe.forward(x))[0]

        numeric = numeric_gradient(f, probe.params.copy(), h)
        worst = max(worst, relative_error(analytic, numeric))
    return worst

