"""Module embeddings: biased random walks over the unified playbook graph
plus a skip-gram/negative-sampling trainer.

Walks traverse edges ignoring direction so leaf modules still receive
context. The second-order bias follows the usual return/in-out scheme:
stepping from ``prev`` to ``cur``, a neighbor ``x`` of ``cur`` is weighted
1/p if it returns to ``prev``, 1 if it is also a neighbor of ``prev``, and
1/q otherwise.

Negative sampling draws one shared negative set per epoch (unigram^0.75
over walk counts), which keeps updates for identically-initialized,
identically-contexted rows exactly equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import UnifiedGraph
from .nn import sigmoid

INIT_SCALE = 0.5  # rows start in U(-0.5/dim, 0.5/dim), the word2vec convention


@dataclass(frozen=True)
class Node2VecConfig:
    embedding_dim: int = 16
    walk_length: int = 4
    context_size: int = 4
    walks_per_node: int = 3
    p: float = 5.0
    q: float = 0.25
    epochs: int = 10000
    negatives_per_positive: int = 1
    learning_rate: float = 0.01
    walk_refresh_interval: int = 50
    seed: int = 0

    def __post_init__(self):
        if not (self.walk_length >= self.context_size >= 2):
            raise ValueError("need walk_length >= context_size >= 2")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")


def step_weights(
    adjacency: dict[str, list[str]],
    prev: str,
    current: str,
    p: float,
    q: float,
) -> tuple[list[str], np.ndarray]:
    """Unnormalized second-order transition weights out of ``current``."""
    prev_nbrs = set(adjacency[prev])
    nbrs = adjacency[current]
    weights = np.empty(len(nbrs))
    for i, x in enumerate(nbrs):
        if x == prev:
            weights[i] = 1.0 / p
        elif x in prev_nbrs:
            weights[i] = 1.0
        else:
            weights[i] = 1.0 / q
    return nbrs, weights


def generate_walks(
    graph: UnifiedGraph,
    config: Node2VecConfig,
    rng: np.random.Generator,
) -> list[list[str]]:
    """``walks_per_node`` biased walks starting at every node, each of at
    most ``walk_length`` nodes; isolated nodes yield length-1 walks."""
    if not graph.nodes:
        raise ValueError("graph is empty")
    adj = graph.undirected_adjacency()
    nodes = graph.sorted_nodes()
    walks = []
    for _ in range(config.walks_per_node):
        for start in nodes:
            walk = [start]
            while len(walk) < config.walk_length:
                nbrs = adj[walk[-1]]
                if not nbrs:
                    break
                if len(walk) == 1:
                    walk.append(nbrs[int(rng.integers(len(nbrs)))])
                else:
                    cand, w = step_weights(adj, walk[-2], walk[-1], config.p, config.q)
                    walk.append(cand[int(rng.choice(len(cand), p=w / w.sum()))])
            walks.append(walk)
    return walks


def skipgram_pairs(
    walks: list[list[str]],
    index: dict[str, int],
    context_size: int,
) -> tuple[np.ndarray, np.ndarray]:
    """(center, context) index pairs within ``context_size - 1`` positions."""
    centers: list[int] = []
    contexts: list[int] = []
    reach = context_size - 1
    for walk in walks:
        for i, u in enumerate(walk):
            for j in range(max(0, i - reach), min(len(walk), i + reach + 1)):
                if j != i:
                    centers.append(index[u])
                    contexts.append(index[walk[j]])
    return np.asarray(centers, dtype=np.intp), np.asarray(contexts, dtype=np.intp)


def unigram_noise(walks: list[list[str]], index: dict[str, int]) -> np.ndarray:
    counts = np.zeros(len(index))
    for walk in walks:
        for node in walk:
            counts[index[node]] += 1
    weights = counts**0.75
    total = weights.sum()
    if total == 0:
        return np.full(len(index), 1.0 / len(index))
    return weights / total


@dataclass
class ModuleEmbeddingTable:
    """Input vectors of the skip-gram model, one row per module id."""

    order: tuple[str, ...]
    vectors: np.ndarray
    context_vectors: np.ndarray = field(repr=False, default=None)
    loss_history: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {m: i for i, m in enumerate(self.order)})

    def __contains__(self, module_id: str) -> bool:
        return module_id in self.index

    def vector(self, module_id: str) -> np.ndarray:
        try:
            return self.vectors[self.index[module_id]]
        except KeyError:
            raise KeyError(f"no embedding row for module {module_id!r}") from None


def get_module_embedding(table: ModuleEmbeddingTable, module_id: str) -> np.ndarray:
    return table.vector(module_id)


class SkipGramTrainer:
    """Dense-batch skip-gram with negative sampling, Adam-updated per epoch."""

    def __init__(self, vocab: list[str], config: Node2VecConfig, rng: np.random.Generator):
        self.vocab = list(vocab)
        self.index = {m: i for i, m in enumerate(self.vocab)}
        self.config = config
        dim = config.embedding_dim
        n = len(self.vocab)
        self.w_in = rng.uniform(-INIT_SCALE / dim, INIT_SCALE / dim, size=(n, dim))
        self.w_out = rng.uniform(-INIT_SCALE / dim, INIT_SCALE / dim, size=(n, dim))
        self._m = [np.zeros_like(self.w_in), np.zeros_like(self.w_out)]
        self._v = [np.zeros_like(self.w_in), np.zeros_like(self.w_out)]
        self._step = 0
        self.loss_history: list[float] = []

    def run_epoch(
        self,
        centers: np.ndarray,
        contexts: np.ndarray,
        noise: np.ndarray,
        rng: np.random.Generator,
    ) -> float:
        cfg = self.config
        n_pos = len(centers)
        negs = rng.choice(len(self.vocab), size=cfg.negatives_per_positive, p=noise)

        zc = self.w_in[centers]  # (P, d)
        co = self.w_out[contexts]  # (P, d)
        cn = self.w_out[negs]  # (K, d)
        s_pos = sigmoid(np.einsum("pd,pd->p", zc, co))
        s_neg = sigmoid(zc @ cn.T)  # (P, K)

        eps = 1e-12
        loss = float(
            np.mean(-np.log(s_pos + eps) - np.log(1.0 - s_neg + eps).sum(axis=1))
        )

        g_pos = (s_pos - 1.0)[:, None] / n_pos  # dL/d(dot) per positive
        g_neg = s_neg / n_pos
        grad_in = np.zeros_like(self.w_in)
        grad_out = np.zeros_like(self.w_out)
        np.add.at(grad_in, centers, g_pos * co + g_neg @ cn)
        np.add.at(grad_out, contexts, g_pos * zc)
        np.add.at(grad_out, negs, g_neg.T @ zc)

        self._adam([grad_in, grad_out])
        self.loss_history.append(loss)
        return loss

    def _adam(self, grads: list[np.ndarray], b1: float = 0.9, b2: float = 0.999, eps: float = 1e-8):
        self._step += 1
        c1 = 1.0 - b1**self._step
        c2 = 1.0 - b2**self._step
        for table, g, m, v in zip((self.w_in, self.w_out), grads, self._m, self._v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            table -= self.config.learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)

    def table(self) -> ModuleEmbeddingTable:
        return ModuleEmbeddingTable(
            order=tuple(self.vocab),
            vectors=self.w_in.copy(),
            context_vectors=self.w_out.copy(),
            loss_history=list(self.loss_history),
        )


def train_node2vec(walks: list[list[str]], config: Node2VecConfig) -> ModuleEmbeddingTable:
    """Skip-gram training over a fixed walk corpus."""
    if not walks:
        raise ValueError("walk corpus is empty")
    vocab = sorted({node for walk in walks for node in walk})
    rng = np.random.default_rng(config.seed)
    trainer = SkipGramTrainer(vocab, config, rng)
    centers, contexts = skipgram_pairs(walks, trainer.index, config.context_size)
    noise = unigram_noise(walks, trainer.index)
    for _ in range(config.epochs):
        if len(centers):
            trainer.run_epoch(centers, contexts, noise, rng)
    return trainer.table()


def train_module_embeddings(graph: UnifiedGraph, config: Node2VecConfig) -> ModuleEmbeddingTable:
    """Full pipeline: biased walks (refreshed periodically) + skip-gram."""
    rng = np.random.default_rng(config.seed)
    trainer = SkipGramTrainer(graph.sorted_nodes(), config, rng)
    centers = contexts = noise = None
    for epoch in range(config.epochs):
        if epoch % config.walk_refresh_interval == 0:
            walks = generate_walks(graph, config, rng)
            centers, contexts = skipgram_pairs(walks, trainer.index, config.context_size)
            noise = unigram_noise(walks, trainer.index)
        if len(centers):
            trainer.run_epoch(centers, contexts, noise, rng)
    return trainer.table()


def extend_table(
    table: ModuleEmbeddingTable,
    extra_ids: list[str],
    rng: np.random.Generator,
) -> ModuleEmbeddingTable:
    """Add rows (initialized like fresh skip-gram rows) for ids not present,
    e.g. the EOP sentinel or registry modules outside the training graph."""
    missing = [m for m in extra_ids if m not in table]
    if not missing:
        return table
    dim = table.vectors.shape[1]
    new_rows = rng.uniform(-INIT_SCALE / dim, INIT_SCALE / dim, size=(len(missing), dim))
    return ModuleEmbeddingTable(
        order=table.order + tuple(missing),
        vectors=np.vstack([table.vectors, new_rows]),
        context_vectors=table.context_vectors,
        loss_history=list(table.loss_history),
    )
