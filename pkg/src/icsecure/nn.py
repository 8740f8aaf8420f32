"""Minimal dense-network engine: forward pass, exact gradients, Adam and SGD.

Everything is float64 and deterministic under a seeded numpy Generator.
Inputs may be a single vector or a (batch, dim) matrix; losses are means
over all output elements, so gradients are directly comparable to central
finite differences of :func:`bce_loss`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRED_CLAMP = 1e-12


@dataclass(frozen=True)
class DenseNetworkSpec:
    """Layer sizes input->...->output plus the two activation choices."""

    layer_dims: tuple[int, ...]
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"

    def __post_init__(self):
        if len(self.layer_dims) < 2:
            raise ValueError("need at least input and output dims")
        if any(d < 1 for d in self.layer_dims):
            raise ValueError("all layer dims must be >= 1")
        if self.hidden_activation != "relu":
            raise ValueError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.output_activation not in ("sigmoid", "identity"):
            raise ValueError(f"unsupported output activation {self.output_activation!r}")

    @property
    def n_layers(self) -> int:
        return len(self.layer_dims) - 1


@dataclass
class ParameterSet:
    """Per-layer weight matrices (in_dim x out_dim) and bias vectors."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "ParameterSet":
        return ParameterSet([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def check_shapes(self, spec: DenseNetworkSpec) -> None:
        dims = spec.layer_dims
        if len(self.weights) != spec.n_layers or len(self.biases) != spec.n_layers:
            raise ValueError("layer count mismatch")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[l], dims[l + 1]) or b.shape != (dims[l + 1],):
                raise ValueError(f"layer {l} shape mismatch: {w.shape}, {b.shape}")


def init_params(spec: DenseNetworkSpec, rng: np.random.Generator) -> ParameterSet:
    """Glorot-uniform weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(spec.layer_dims[:-1], spec.layer_dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ParameterSet(weights, biases)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _as_batch(x: np.ndarray, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"expected input of width {dim}, got shape {x.shape}")
    return x


def forward(spec: DenseNetworkSpec, params: ParameterSet, x: np.ndarray) -> list[np.ndarray]:
    """Return activations for every layer, input first, output last."""
    params.check_shapes(spec)
    a = _as_batch(x, spec.layer_dims[0])
    acts = [a]
    last = spec.n_layers - 1
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = acts[-1] @ w + b
        if l < last:
            a = np.maximum(z, 0.0)
        elif spec.output_activation == "sigmoid":
            a = sigmoid(z)
        else:
            a = z
        acts.append(a)
    return acts


def predict(spec: DenseNetworkSpec, params: ParameterSet, x: np.ndarray) -> np.ndarray:
    out = forward(spec, params, x)[-1]
    return out[0] if np.asarray(x).ndim == 1 else out


def bce_loss(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean binary cross-entropy; predictions are clamped before the logs."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    p = np.clip(p, PRED_CLAMP, 1.0 - PRED_CLAMP)
    return float(np.mean(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))))


def backward(
    spec: DenseNetworkSpec,
    params: ParameterSet,
    x: np.ndarray,
    targets: np.ndarray,
    reduction: str = "mean",
) -> tuple[float, ParameterSet]:
    """Loss and exact gradients of BCE over a sigmoid output layer.

    ``reduction="mean"`` averages over all output elements (comparable to
    :func:`bce_loss`). ``"per_sample_sum"`` sums over output units and
    averages over the batch, the usual reconstruction objective; its
    gradients are exactly the mean gradients scaled by the output width.
    """
    if spec.output_activation != "sigmoid":
        raise ValueError("BCE gradients require a sigmoid output layer")
    if reduction not in ("mean", "per_sample_sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    acts = forward(spec, params, x)
    t = _as_batch(targets, spec.layer_dims[-1])
    out = acts[-1]
    if out.shape != t.shape:
        raise ValueError(f"target shape {t.shape} does not match output {out.shape}")
    loss = bce_loss(out, t)
    if reduction == "per_sample_sum":
        loss *= out.shape[1]

    denom = out.size if reduction == "mean" else out.shape[0]
    delta = (out - t) / denom  # dL/dz for sigmoid + BCE
    grad_w = [np.empty(0)] * spec.n_layers
    grad_b = [np.empty(0)] * spec.n_layers
    for l in range(spec.n_layers - 1, -1, -1):
        grad_w[l] = acts[l].T @ delta
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ params.weights[l].T) * (acts[l] > 0.0)
    return loss, ParameterSet(grad_w, grad_b)


@dataclass
class AdamState:
    """First/second-moment accumulators plus the step counter."""

    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: ParameterSet) -> "AdamState":
        return cls(
            m_w=[np.zeros_like(w) for w in params.weights],
            v_w=[np.zeros_like(w) for w in params.weights],
            m_b=[np.zeros_like(b) for b in params.biases],
            v_b=[np.zeros_like(b) for b in params.biases],
        )


def adam_step(params: ParameterSet, grads: ParameterSet, state: AdamState, learning_rate: float) -> None:
    """Bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    b1, b2, eps = state.beta1, state.beta2, state.eps
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for i in range(len(params.weights)):
        for p, g, m, v in (
            (params.weights[i], grads.weights[i], state.m_w[i], state.v_w[i]),
            (params.biases[i], grads.biases[i], state.m_b[i], state.v_b[i]),
        ):
            if p.shape != g.shape:
                raise ValueError("gradient shape mismatch")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)


def sgd_step(params: ParameterSet, grads: ParameterSet, learning_rate: float) -> None:
    """Plain gradient-descent update, in place."""
    for i in range(len(params.weights)):
        if params.weights[i].shape != grads.weights[i].shape:
            raise ValueError("gradient shape mismatch")
        params.weights[i] -= learning_rate * grads.weights[i]
        params.biases[i] -= learning_rate * grads.biases[i]


def params_to_blob(params: ParameterSet) -> tuple[bytes, list[dict]]:
    """Flat little-endian float64 blob plus a manifest of array extents."""
    chunks: list[bytes] = []
    manifest: list[dict] = []
    offset = 0
    for kind, arrays in (("weight", params.weights), ("bias", params.biases)):
        for i, arr in enumerate(arrays):
            raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
            manifest.append({"name": f"{kind}_{i}", "shape": list(arr.shape), "offset": offset})
            chunks.append(raw)
            offset += len(raw)
    return b"".join(chunks), manifest


def params_from_blob(blob: bytes, manifest: list[dict]) -> ParameterSet:
    weights: dict[int, np.ndarray] = {}
    biases: dict[int, np.ndarray] = {}
    for entry in manifest:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=start).reshape(shape).copy()
        kind, idx = entry["name"].rsplit("_", 1)
        (weights if kind == "weight" else biases)[int(idx)] = arr
    return ParameterSet(
        [weights[i] for i in range(len(weights))],
        [biases[i] for i in range(len(biases))],
    )
