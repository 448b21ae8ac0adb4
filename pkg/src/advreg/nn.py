"""Dense feed-forward network engine: forward/backward, losses, optimizers.

All arithmetic is float64 and fully deterministic for a fixed RNG, which keeps
the finite-difference gradient checks tight and experiment reruns bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, InputError, StateError

FORMAT_VERSION = 1
LOG_CLAMP = 1e-12

HIDDEN_ACTIVATIONS = ("tanh", "relu")
OUTPUT_ACTIVATIONS = ("softmax", "sigmoid", "linear", "relu")


@dataclass
class MlpSpec:
    """Architecture of a dense network: layer widths plus activation choices.

    ``layer_sizes`` starts with the input dimension and ends with the output
    width. ``relu`` is allowed as an output activation so that sub-networks
    whose output feeds another network can keep their last layer rectified.
    """

    layer_sizes: list[int]
    hidden_activation: str = "tanh"
    output_activation: str = "softmax"
    init_std: float = 0.01

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise DimensionError("need at least input and output layer sizes")
        if any(int(s) <= 0 for s in self.layer_sizes):
            raise DimensionError(f"layer sizes must be positive: {self.layer_sizes}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise InputError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise InputError(f"unknown output activation {self.output_activation!r}")
        if not self.init_std > 0:
            raise InputError("init_std must be positive")
        self.layer_sizes = [int(s) for s in self.layer_sizes]

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
            "init_std": self.init_std,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpSpec":
        return cls(
            layer_sizes=list(d["layer_sizes"]),
            hidden_activation=d["hidden_activation"],
            output_activation=d["output_activation"],
            init_std=float(d["init_std"]),
        )


@dataclass
class MlpParams:
    """Weights and biases, one pair per layer. weights[i] is (in, out)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def arrays(self) -> list[np.ndarray]:
        """Flat view of all parameter arrays, weights then biases per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def checksum(self) -> float:
        """Cheap fingerprint used by tests to assert parameter immutability."""
        return float(sum(np.sum(w) + np.sum(b) for w, b in zip(self.weights, self.biases)))


def init_params(spec: MlpSpec, rng: np.random.Generator) -> MlpParams:
    """N(0, init_std) weights, zero biases."""
    weights, biases = [], []
    for n_in, n_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        weights.append(rng.normal(0.0, spec.init_std, size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return MlpParams(weights, biases)


def zero_grads(params: MlpParams) -> MlpParams:
    return MlpParams(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )


def _check_params(spec: MlpSpec, params: MlpParams) -> None:
    if len(params.weights) != spec.num_layers or len(params.biases) != spec.num_layers:
        raise DimensionError("parameter layer count does not match spec")
    for i, (n_in, n_out) in enumerate(zip(spec.layer_sizes[:-1], spec.layer_sizes[1:])):
        if params.weights[i].shape != (n_in, n_out):
            raise DimensionError(
                f"layer {i} weight shape {params.weights[i].shape} != {(n_in, n_out)}"
            )
        if params.biases[i].shape != (n_out,):
            raise DimensionError(f"layer {i} bias shape {params.biases[i].shape} != ({n_out},)")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; accepts 1-D or 2-D input."""
    z = np.asarray(logits, dtype=float)
    if z.size == 0:
        raise InputError("softmax of empty vector")
    if not np.all(np.isfinite(z)):
        raise InputError("softmax input must be finite")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(prediction: np.ndarray, label: int, clamp_eps: float = LOG_CLAMP) -> float:
    """-log of the probability assigned to the true class, clamped below."""
    p = np.asarray(prediction, dtype=float)
    if not 0 <= label < p.shape[-1]:
        raise InputError(f"label {label} out of range for {p.shape[-1]} classes")
    return float(-np.log(max(float(p[label]), clamp_eps)))


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        # Clipping the exponent keeps overflow warnings away; saturation is exact anyway.
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    if name == "softmax":
        return softmax(z)
    if name == "linear":
        return z
    raise InputError(f"unknown activation {name!r}")


def _activation_backward(name: str, grad_out: np.ndarray, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Gradient through an activation, given post-activation gradient."""
    if name == "tanh":
        return grad_out * (1.0 - a * a)
    if name == "relu":
        return grad_out * (z > 0.0)
    if name == "sigmoid":
        return grad_out * a * (1.0 - a)
    if name == "softmax":
        # Row-wise Jacobian product: dz = p * (g - <g, p>)
        inner = np.sum(grad_out * a, axis=-1, keepdims=True)
        return a * (grad_out - inner)
    if name == "linear":
        return grad_out
    raise InputError(f"unknown activation {name!r}")


@dataclass
class ForwardCache:
    """Everything the backward pass needs from one forward evaluation."""

    inputs: np.ndarray
    pre_activations: list[np.ndarray] = field(default_factory=list)
    activations: list[np.ndarray] = field(default_factory=list)
    num_layers: int = 0


def mlp_forward(spec: MlpSpec, params: MlpParams, inputs: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Batched forward pass. Returns (batch x out_dim) outputs plus cache."""
    _check_params(spec, params)
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if x.shape[1] != spec.input_dim:
        raise DimensionError(f"input width {x.shape[1]} != spec input dim {spec.input_dim}")
    if not np.all(np.isfinite(x)):
        raise InputError("non-finite network input")

    cache = ForwardCache(inputs=x, num_layers=spec.num_layers)
    a = x
    for i in range(spec.num_layers):
        z = a @ params.weights[i] + params.biases[i]
        name = spec.output_activation if i == spec.num_layers - 1 else spec.hidden_activation
        a = _apply_activation(name, z)
        cache.pre_activations.append(z)
        cache.activations.append(a)
    return a, cache


def mlp_backward(
    spec: MlpSpec,
    params: MlpParams,
    cache: ForwardCache,
    output_gradient: np.ndarray,
) -> tuple[MlpParams, np.ndarray]:
    """Backpropagate a gradient w.r.t. the network output.

    Returns parameter gradients (same shapes as params) and the gradient
    with respect to the network input.
    """
    _check_params(spec, params)
    if cache.num_layers != spec.num_layers or len(cache.activations) != spec.num_layers:
        raise StateError("forward cache does not match this network")
    g = np.atleast_2d(np.asarray(output_gradient, dtype=float))
    if g.shape != cache.activations[-1].shape:
        raise StateError(
            f"output gradient shape {g.shape} != cached output shape {cache.activations[-1].shape}"
        )

    grads = zero_grads(params)
    for i in range(spec.num_layers - 1, -1, -1):
        name = spec.output_activation if i == spec.num_layers - 1 else spec.hidden_activation
        dz = _activation_backward(name, g, cache.pre_activations[i], cache.activations[i])
        a_prev = cache.inputs if i == 0 else cache.activations[i - 1]
        grads.weights[i] = a_prev.T @ dz
        grads.biases[i] = dz.sum(axis=0)
        g = dz @ params.weights[i].T
    return grads, g


@dataclass
class OptimizerState:
    """SGD or Adam state; accumulators mirror the parameter shapes lazily."""

    kind: str = "adam"
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    first_moment: list[np.ndarray] | None = None
    second_moment: list[np.ndarray] | None = None
    step_count: int = 0

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise InputError(f"unknown optimizer kind {self.kind!r}")
        if self.kind == "adam" and not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise InputError("adam betas must lie in (0, 1)")
        if self.learning_rate < 0:
            raise InputError("learning rate must be nonnegative")

    def fresh(self) -> "OptimizerState":
        """Unused copy of this state, suitable as a per-model instance."""
        return replace(self, first_moment=None, second_moment=None, step_count=0)


def sgd(learning_rate: float = 0.01) -> OptimizerState:
    return OptimizerState(kind="sgd", learning_rate=learning_rate)


def adam(learning_rate: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> OptimizerState:
    return OptimizerState(kind="adam", learning_rate=learning_rate, adam_beta1=beta1, adam_beta2=beta2, adam_eps=eps)


def optimizer_step(state: OptimizerState, param_arrays: list[np.ndarray], grad_arrays: list[np.ndarray]) -> None:
    """One in-place update of every parameter array."""
    if len(param_arrays) != len(grad_arrays):
        raise DimensionError("parameter/gradient count mismatch")
    for p, g in zip(param_arrays, grad_arrays):
        if p.shape != g.shape:
            raise DimensionError(f"gradient shape {g.shape} != parameter shape {p.shape}")

    if state.kind == "sgd":
        state.step_count += 1
        for p, g in zip(param_arrays, grad_arrays):
            p -= state.learning_rate * g
        return

    if state.first_moment is None:
        state.first_moment = [np.zeros_like(p) for p in param_arrays]
        state.second_moment = [np.zeros_like(p) for p in param_arrays]
    if len(state.first_moment) != len(param_arrays) or any(
        m.shape != p.shape for m, p in zip(state.first_moment, param_arrays)
    ):
        raise DimensionError("adam accumulators do not mirror the parameter shapes")

    state.step_count += 1
    t = state.step_count
    b1, b2 = state.adam_beta1, state.adam_beta2
    for p, g, m, v in zip(param_arrays, grad_arrays, state.first_moment, state.second_moment):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * (g * g)
        m_hat = m / (1 - b1 ** t)
        v_hat = v / (1 - b2 ** t)
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.adam_eps)


def grad_check(
    param_arrays: list[np.ndarray],
    loss_fn,
    grad_arrays: list[np.ndarray],
    probe_count: int = 50,
    fd_step: float = 1e-5,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between analytic gradients and central differences.

    ``loss_fn`` is a zero-argument callable that evaluates the loss from the
    current (mutated in place) parameter arrays. Probes ``probe_count``
    randomly chosen scalar parameters.
    """
    if not 1e-7 <= fd_step <= 1e-3:
        raise InputError("fd_step out of the supported [1e-7, 1e-3] range")
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for _ in range(probe_count):
        ai = int(rng.integers(len(param_arrays)))
        arr, grad = param_arrays[ai], grad_arrays[ai]
        if arr.size == 0:
            continue
        fi = int(rng.integers(arr.size))
        flat = arr.reshape(-1)
        orig = flat[fi]
        flat[fi] = orig + fd_step
        lo_hi = loss_fn()
        flat[fi] = orig - fd_step
        lo_lo = loss_fn()
        flat[fi] = orig
        numeric = (lo_hi - lo_lo) / (2 * fd_step)
        analytic = grad.reshape(-1)[fi]
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, err)
    return worst


def mlp_to_dict(spec: MlpSpec, params: MlpParams) -> dict:
    return {
        "spec": spec.to_dict(),
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "format_version": FORMAT_VERSION,
    }


def mlp_from_dict(d: dict) -> tuple[MlpSpec, MlpParams]:
    from .errors import FormatError

    if d.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format_version {d.get('format_version')!r}")
    spec = MlpSpec.from_dict(d["spec"])
    params = MlpParams(
        [np.asarray(w, dtype=float) for w in d["weights"]],
        [np.asarray(b, dtype=float) for b in d["biases"]],
    )
    _check_params(spec, params)
    return spec, params
