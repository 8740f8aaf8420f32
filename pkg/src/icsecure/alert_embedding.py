"""One-hot alert encoding and the autoencoder that compresses it to 16 dims.

The autoencoder is a symmetric stack N -> 256 -> 16 -> 256 -> N trained
full-batch by plain gradient descent on per-sample reconstruction
cross-entropy. All hidden layers (including the 16-wide code layer) are
ReLU; only the reconstruction layer is sigmoid. The 16-dim code is the
alert embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .model import AlertRule, SchemaKeyRegistry

CODE_DIM = 16
HIDDEN_DIM = 256
DEFAULT_EPOCHS = 2000
DEFAULT_LR = 0.1


def one_hot_encode(
    alert: AlertRule,
    registry: SchemaKeyRegistry,
    ignore_unknown: bool = False,
) -> np.ndarray:
    """Binary vector over the registry; bit i set iff key i is present.

    Unknown keys raise by default; with ``ignore_unknown`` they are dropped,
    which is how the recommendation service treats novel alert fields.
    """
    vec = np.zeros(len(registry), dtype=np.float64)
    for key in alert.present_keys:
        idx = registry.index.get(key)
        if idx is None:
            if ignore_unknown:
                continue
            raise KeyError(f"alert key {key!r} not in schema registry")
        vec[idx] = 1.0
    return vec


def encode_matrix(alerts: list[AlertRule], registry: SchemaKeyRegistry) -> np.ndarray:
    return np.stack([one_hot_encode(a, registry) for a in alerts]) if alerts else np.zeros((0, len(registry)))


@dataclass
class AlertAutoencoder:
    """Trained alert autoencoder; ``embed`` is the code-layer activation."""

    spec: nn.DenseNetworkSpec
    params: nn.ParameterSet
    registry_fingerprint: str
    loss_history: list[float] = field(default_factory=list, repr=False)

    @property
    def input_dim(self) -> int:
        return self.spec.layer_dims[0]

    def embed(self, one_hot: np.ndarray) -> np.ndarray:
        one_hot = np.asarray(one_hot, dtype=np.float64)
        if one_hot.shape[-1] != self.input_dim:
            raise ValueError(
                f"one-hot length {one_hot.shape[-1]} does not match registry size {self.input_dim}"
            )
        # code layer sits after the second dense layer (N -> hidden -> code)
        return forward_code(self.spec, self.params, one_hot)

    def reconstruct(self, one_hot: np.ndarray) -> np.ndarray:
        return nn.predict(self.spec, self.params, one_hot)


def forward_code(spec: nn.DenseNetworkSpec, params: nn.ParameterSet, x: np.ndarray) -> np.ndarray:
    acts = nn.forward(spec, params, x)
    code = acts[2]
    return code[0] if np.asarray(x).ndim == 1 else code


def train_autoencoder(
    one_hot: np.ndarray,
    seed: int,
    epochs: int = DEFAULT_EPOCHS,
    learning_rate: float = DEFAULT_LR,
    hidden_dim: int = HIDDEN_DIM,
    code_dim: int = CODE_DIM,
    registry_fingerprint: str = "",
) -> AlertAutoencoder:
    """Full-batch gradient descent on reconstruction BCE."""
    x = np.asarray(one_hot, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("need a non-empty (n_alerts, n_keys) matrix")
    n_keys = x.shape[1]
    spec = nn.DenseNetworkSpec((n_keys, hidden_dim, code_dim, hidden_dim, n_keys))
    rng = np.random.default_rng(seed)
    params = nn.init_params(spec, rng)
    history = []
    n_keys_f = float(n_keys)
    for _ in range(epochs):
        # reconstruction objective: per-sample BCE summed over keys
        loss, grads = nn.backward(spec, params, x, x, reduction="per_sample_sum")
        history.append(loss / n_keys_f)  # recorded as mean-per-element for comparability
        nn.sgd_step(params, grads, learning_rate)
    return AlertAutoencoder(
        spec=spec,
        params=params,
        registry_fingerprint=registry_fingerprint,
        loss_history=history,
    )


def reconstruction_bit_accuracy(model: AlertAutoencoder, one_hot: np.ndarray) -> float:
    """Fraction of bits recovered when thresholding reconstructions at 0.5."""
    recon = model.reconstruct(one_hot) >= 0.5
    return float(np.mean(recon == (np.asarray(one_hot) >= 0.5)))
