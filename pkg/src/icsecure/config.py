"""Hyperparameter bundle with production defaults, plus JSON overlay support.

Every training entry point takes a ``Hyperparameters`` so an experiment is
reproducible from one JSON file. Defaults follow the evaluated setup:
16-dim embeddings everywhere; autoencoder 256-wide at lr 0.1 for 2000
epochs; walks of length 4, context 4, 3 per node, p=5, q=0.25, 10000
epochs; scorer batches of 64 at lr 0.001 for 1000 epochs; frequency
counts over 100 generation epochs; 50% edge pruning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .graph_embedding import Graph2VecConfig
from .module_embedding import Node2VecConfig


@dataclass(frozen=True)
class Hyperparameters:
    embedding_dim: int = 16
    # alert autoencoder
    ae_hidden: int = 256
    ae_learning_rate: float = 0.1
    ae_epochs: int = 2000
    # node2vec
    walk_length: int = 4
    context_size: int = 4
    walks_per_node: int = 3
    p: float = 5.0
    q: float = 0.25
    node2vec_epochs: int = 10000
    node2vec_negatives: int = 1
    node2vec_learning_rate: float = 0.01
    walk_refresh_interval: int = 50
    # graph2vec
    wl_iterations: int = 2
    graph2vec_epochs: int = 10000
    graph2vec_negatives: int = 2
    graph2vec_learning_rate: float = 0.01
    infer_steps: int = 100
    infer_learning_rate: float = 0.025
    # scorer
    ncf_hidden: tuple[int, int] = (64, 64)
    batch_size: int = 64
    ncf_learning_rate: float = 0.001
    ncf_epochs: int = 1000
    # baselines and sampling
    frequency_epochs: int = 100
    prune_probability: float = 0.5
    nmf_rank: int = 16
    nmf_iterations: int = 200
    nmf_projection_iterations: int = 100

    def node2vec_config(self, seed: int) -> Node2VecConfig:
        return Node2VecConfig(
            embedding_dim=self.embedding_dim,
            walk_length=self.walk_length,
            context_size=self.context_size,
            walks_per_node=self.walks_per_node,
            p=self.p,
            q=self.q,
            epochs=self.node2vec_epochs,
            negatives_per_positive=self.node2vec_negatives,
            learning_rate=self.node2vec_learning_rate,
            walk_refresh_interval=self.walk_refresh_interval,
            seed=seed,
        )

    def graph2vec_config(self, variant: str, seed: int) -> Graph2VecConfig:
        return Graph2VecConfig(
            wl_iterations=self.wl_iterations,
            embedding_dim=self.embedding_dim,
            epochs=self.graph2vec_epochs,
            negatives=self.graph2vec_negatives,
            learning_rate=self.graph2vec_learning_rate,
            infer_steps=self.infer_steps,
            infer_lr=self.infer_learning_rate,
            variant=variant,
            seed=seed,
        )


def load_overlay(hp: Hyperparameters, path: str | Path) -> Hyperparameters:
    """Apply a JSON object of field overrides; unknown fields are an error."""
    overrides = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(Hyperparameters)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ValueError(f"unknown hyperparameter fields: {', '.join(unknown)}")
    if "ncf_hidden" in overrides:
        overrides["ncf_hidden"] = tuple(overrides["ncf_hidden"])
    return replace(hp, **overrides)
