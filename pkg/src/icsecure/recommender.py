"""The scorer: concatenated (alert, current-module, partial-graph)
embeddings through a dense network with one sigmoid output per candidate
module plus EOP.

The head width is frozen at training time to the module registry's
candidate list; adding a module requires retraining. The current node
enters through its module's embedding, so two nodes carrying the same
module differ only through the partial-graph embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .alert_embedding import AlertAutoencoder, one_hot_encode
from .corpus_io import Corpus
from .graph_embedding import (
    Graph2VecModel,
    infer_graph_embedding,
    infer_graph_embeddings_batch,
)
from .model import AlertRule, ModuleRegistry, Playbook, SchemaKeyRegistry
from .module_embedding import INIT_SCALE, ModuleEmbeddingTable
from .samples import RecommendationSample, build_samplers, generate_epoch

INPUT_DIM = 48  # three 16-dim embeddings


@dataclass(frozen=True)
class NcfConfig:
    hidden: tuple[int, int] = (64, 64)
    batch_size: int = 64
    learning_rate: float = 0.001
    epochs: int = 1000
    seed: int = 0


def assemble_input(
    alert_emb: np.ndarray,
    current_module_emb: np.ndarray,
    graph_emb: np.ndarray,
) -> np.ndarray:
    """Fixed concatenation order: alert, module, graph."""
    parts = (alert_emb, current_module_emb, graph_emb)
    for part in parts:
        if np.asarray(part).shape != (16,):
            raise ValueError(f"expected 16-dim embedding, got shape {np.asarray(part).shape}")
    return np.concatenate(parts)


@dataclass
class NcfModel:
    """Dense scorer head plus bookkeeping that ties it to its embeddings.

    ``input_mean``/``input_scale`` standardize the concatenated embedding
    before the first layer; the three blocks arrive at very different
    magnitudes (alert codes dwarf graph vectors) and the net would
    otherwise spend its training budget rebalancing them.
    """

    spec: nn.DenseNetworkSpec
    params: nn.ParameterSet
    eop_embedding: np.ndarray
    candidates: tuple[str, ...]
    variant: str
    input_mean: np.ndarray = None
    input_scale: np.ndarray = None
    fingerprints: dict[str, str] = field(default_factory=dict)
    loss_history: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.input_mean is None:
            self.input_mean = np.zeros(self.spec.layer_dims[0])
        if self.input_scale is None:
            self.input_scale = np.ones(self.spec.layer_dims[0])

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.input_mean) / self.input_scale


def fit_standardizer(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean and clamped std; near-constant dims pass through."""
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return mean, np.where(std < 1e-6, 1.0, std)


@dataclass(frozen=True)
class Recommendation:
    """Ranked candidates; scores non-increasing, ranks contiguous from 1."""

    entries: tuple[tuple[str, float, int], ...]

    def candidates(self) -> list[str]:
        return [c for c, _, _ in self.entries]

    def score_of(self, candidate: str) -> float:
        for c, s, _ in self.entries:
            if c == candidate:
                return s
        raise KeyError(candidate)

    def rank_of(self, candidate: str) -> int:
        for c, _, r in self.entries:
            if c == candidate:
                return r
        raise KeyError(candidate)


def rank_candidates(candidates: tuple[str, ...], scores: np.ndarray) -> list[int]:
    """Indices sorted by score descending, ties broken by candidate id."""
    return sorted(range(len(candidates)), key=lambda i: (-scores[i], candidates[i]))


def train_ncf(
    train_alert_ids: list[str],
    corpus: Corpus,
    autoencoder: AlertAutoencoder,
    module_table: ModuleEmbeddingTable,
    graph_model: Graph2VecModel,
    config: NcfConfig,
) -> NcfModel:
    """Per epoch: regenerate samples, shuffle into batches, Adam on BCE."""
    registry = corpus.registry
    modules = corpus.modules
    if autoencoder.registry_fingerprint and autoencoder.registry_fingerprint != registry.fingerprint:
        raise ValueError("autoencoder was trained against a different schema registry")
    missing = [m for m in modules.modules if m not in module_table]
    if missing:
        raise ValueError(f"module table lacks rows for {missing}")

    rng = np.random.default_rng(config.seed)
    candidates = modules.candidates
    spec = nn.DenseNetworkSpec((INPUT_DIM, *config.hidden, len(candidates)))
    params = nn.init_params(spec, rng)
    eop_embedding = rng.uniform(-INIT_SCALE / 16, INIT_SCALE / 16, size=16)
    state = nn.AdamState.for_params(params)

    alert_emb = {
        aid: autoencoder.embed(one_hot_encode(corpus.alerts[aid], registry))
        for aid in sorted(train_alert_ids)
    }
    train_pids = sorted(
        {pid for aid in train_alert_ids for pid in corpus.mapping.playbooks_for(aid)}
    )
    samplers = build_samplers({pid: corpus.playbooks[pid] for pid in train_pids})

    def input_matrix(samples):
        graph_embs = infer_graph_embeddings_batch(
            graph_model, [s.partial_playbook for s in samples]
        )
        return np.stack(
            [
                assemble_input(
                    alert_emb[s.alert_rule_id],
                    module_table.vector(s.partial_playbook.nodes[s.current_node]),
                    graph_embs[i],
                )
                for i, s in enumerate(samples)
            ]
        )

    history = []
    mean = scale = None
    for _ in range(config.epochs):
        samples = generate_epoch(
            train_alert_ids, corpus.mapping, corpus.playbooks, modules, rng, samplers
        )
        x = input_matrix(samples)
        if mean is None:
            mean, scale = fit_standardizer(x)
        x = (x - mean) / scale
        y = np.stack([s.label_vector for s in samples])
        perm = rng.permutation(len(samples))
        epoch_loss = 0.0
        for lo in range(0, len(perm), config.batch_size):
            batch = perm[lo : lo + config.batch_size]
            loss, grads = nn.backward(spec, params, x[batch], y[batch])
            nn.adam_step(params, grads, state, config.learning_rate)
            epoch_loss += loss * len(batch)
        history.append(epoch_loss / len(samples))

    return NcfModel(
        spec=spec,
        params=params,
        eop_embedding=eop_embedding,
        candidates=candidates,
        variant=graph_model.variant,
        input_mean=mean,
        input_scale=scale,
        loss_history=history,
    )


@dataclass
class Recommender:
    """Scoring stack: registries plus the four trained models."""

    registry: SchemaKeyRegistry
    modules: ModuleRegistry
    autoencoder: AlertAutoencoder
    module_table: ModuleEmbeddingTable
    graph_model: Graph2VecModel
    ncf: NcfModel

    def score_all(
        self,
        alert: AlertRule,
        partial_playbook: Playbook,
        current_node: str,
        ignore_unknown_keys: bool = False,
    ) -> np.ndarray:
        """Scores over all candidates (EOP last), each in (0, 1)."""
        if current_node not in partial_playbook.nodes:
            raise ValueError(f"current node {current_node!r} not in the partial playbook")
        module = partial_playbook.nodes[current_node]
        a = self.autoencoder.embed(
            one_hot_encode(alert, self.registry, ignore_unknown=ignore_unknown_keys)
        )
        m = self.module_table.vector(module)
        g = infer_graph_embedding(self.graph_model, partial_playbook)
        x = self.ncf.standardize(assemble_input(a, m, g))
        return nn.predict(self.ncf.spec, self.ncf.params, x)

    def score_sample(self, sample: RecommendationSample, alert: AlertRule) -> np.ndarray:
        return self.score_all(alert, sample.partial_playbook, sample.current_node)

    def recommend_top_k(
        self,
        alert: AlertRule,
        partial_playbook: Playbook,
        current_node: str,
        k: int,
        ignore_unknown_keys: bool = False,
    ) -> Recommendation:
        if k < 1:
            raise ValueError("k must be >= 1")
        scores = self.score_all(
            alert, partial_playbook, current_node, ignore_unknown_keys=ignore_unknown_keys
        )
        order = rank_candidates(self.ncf.candidates, scores)
        top = order[: min(k, len(order))]
        return Recommendation(
            entries=tuple(
                (self.ncf.candidates[i], float(scores[i]), rank)
                for rank, i in enumerate(top, start=1)
            )
        )
