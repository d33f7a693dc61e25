"""Dense-network numerics: forward pass, exact backprop, Adam, Polyak averaging.

Everything is float64 and plain numpy. The backward pass returns the exact
gradient of ``upstream . output`` with respect to every parameter *and* with
respect to the input, which is what the deterministic policy gradient needs
(the critic's gradient with respect to its action slice).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

_ACTIVATIONS = ("tanh", "identity")


class Mlp:
    """Fully-connected network with tanh hidden layers.

    ``output_activation`` is "tanh" for the actor (actions live in [-1, 1])
    and "identity" for the critic. Weights and biases are initialised
    uniformly in +-1/sqrt(fan_in).
    """

    def __init__(self, layer_dims, output_activation="identity", rng=None):
        dims = [int(d) for d in layer_dims]
        if len(dims) < 2 or any(d <= 0 for d in dims):
            raise ValueError(f"need at least two positive layer dims, got {dims}")
        if output_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        self.layer_dims = dims
        self.output_activation = output_activation
        rng = np.random.default_rng(rng)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def params(self) -> list:
        """Interleaved [W0, b0, W1, b1, ...] views onto the live arrays."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.layer_dims = list(self.layer_dims)
        clone.output_activation = self.output_activation
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def _activations(self, x2d):
        """Post-activation values per layer, starting with the input itself."""
        acts = [x2d]
        h = x2d
        last = self.n_layers - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w.T + b
            if i < last or self.output_activation == "tanh":
                h = np.tanh(z)
            else:
                h = z
            acts.append(h)
        return acts

    def forward(self, x):
        """Evaluate the network; accepts a single vector or an (n, d) batch."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2d = np.atleast_2d(x)
        if x2d.shape[1] != self.layer_dims[0]:
            raise ValueError(
                f"input width {x2d.shape[1]} != expected {self.layer_dims[0]}")
        out = self._activations(x2d)[-1]
        return out[0] if single else out

    def backward(self, x, upstream):
        """Gradients of ``sum(upstream * output)`` for a batch.

        Returns ``(param_grads, input_grad)`` where ``param_grads`` matches
        the layout of :attr:`params` (summed over the batch) and
        ``input_grad`` has the same shape as ``x``.
        """
        x = np.asarray(x, dtype=float)
        upstream = np.asarray(upstream, dtype=float)
        single = x.ndim == 1
        x2d = np.atleast_2d(x)
        u2d = np.atleast_2d(upstream)
        if x2d.shape[1] != self.layer_dims[0]:
            raise ValueError(
                f"input width {x2d.shape[1]} != expected {self.layer_dims[0]}")
        if u2d.shape != (x2d.shape[0], self.layer_dims[-1]):
            raise ValueError(
                f"upstream shape {u2d.shape} != {(x2d.shape[0], self.layer_dims[-1])}")

        acts = self._activations(x2d)
        if self.output_activation == "tanh":
            delta = u2d * (1.0 - acts[-1] ** 2)
        else:
            delta = u2d

        w_grads = [None] * self.n_layers
        b_grads = [None] * self.n_layers
        input_grad = None
        for layer in reversed(range(self.n_layers)):
            w_grads[layer] = delta.T @ acts[layer]
            b_grads[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer]) * (1.0 - acts[layer] ** 2)
            else:
                input_grad = delta @ self.weights[0]

        grads = []
        for wg, bg in zip(w_grads, b_grads):
            grads.append(wg)
            grads.append(bg)
        return grads, (input_grad[0] if single else input_grad)


@dataclass
class AdamState:
    """Per-parameter Adam moments plus the shared step counter."""

    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)
    step_count: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params, learning_rate=1e-3, beta1=0.9, beta2=0.999,
                   epsilon=1e-8) -> "AdamState":
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            step_count=0,
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )

    def copy(self) -> "AdamState":
        return copy.deepcopy(self)


def adam_step(params, grads, state: AdamState):
    """One Adam update with bias correction; mutates params and state in place."""
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ValueError("parameter/gradient/moment counts do not match")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params, state


def polyak_update(target: Mlp, online: Mlp, rho: float) -> Mlp:
    """theta_target <- rho * theta_target + (1 - rho) * theta_online, in place."""
    if target.layer_dims != online.layer_dims:
        raise ValueError("target and online architectures differ")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    for tp, op in zip(target.params, online.params):
        tp *= rho
        tp += (1.0 - rho) * op
    return target
