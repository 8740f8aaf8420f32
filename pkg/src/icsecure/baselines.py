"""Frequency and non-negative matrix factorization baselines, trained on
the same generated recommendation samples as the scorer.

The frequency model accumulates true-label counts over 100 generation
epochs and ranks candidates by count, independent of the query context.

The NMF model treats partial-playbook module presence and label bits as
one item set: a training row has a 1 wherever the module appears in the
sample's partial graph or its label vector. Queries zero the label part
and are projected onto the frozen factor matrix by multiplicative
updates; the reconstructed row is the score vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus_io import Corpus
from .model import ModuleRegistry, START_MODULE
from .samples import PlaybookSampler, RecommendationSample, build_samplers, generate_epoch

NMF_EPS = 1e-9


@dataclass
class FrequencyModel:
    candidates: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")


def train_frequency(
    train_alert_ids: list[str],
    corpus: Corpus,
    rng: np.random.Generator,
    epochs: int = 100,
    samplers: dict[str, PlaybookSampler] | None = None,
) -> FrequencyModel:
    registry = corpus.modules
    counts = np.zeros(registry.n_candidates)
    for _ in range(epochs):
        for s in generate_epoch(
            train_alert_ids, corpus.mapping, corpus.playbooks, registry, rng, samplers
        ):
            counts += s.label_vector
    return FrequencyModel(candidates=registry.candidates, counts=counts)


def frequency_scores(model: FrequencyModel) -> np.ndarray:
    """Counts scaled to [0, 1]; the same vector for every query."""
    peak = model.counts.max()
    if peak == 0:
        return np.zeros_like(model.counts)
    return model.counts / peak


def sample_items_row(sample: RecommendationSample, registry: ModuleRegistry) -> np.ndarray:
    """Training row: partial-playbook module presence OR label bit."""
    row = sample.label_vector.copy()
    for module in set(sample.partial_playbook.nodes.values()):
        if module != START_MODULE:
            row[registry.candidate_index(module)] = 1.0
    return row


def sample_query_row(sample: RecommendationSample, registry: ModuleRegistry) -> np.ndarray:
    """Query row: presence only; the label part is unknown at query time."""
    row = np.zeros(registry.n_candidates)
    for module in set(sample.partial_playbook.nodes.values()):
        if module != START_MODULE:
            row[registry.candidate_index(module)] = 1.0
    return row


@dataclass
class NmfModel:
    candidates: tuple[str, ...]
    w: np.ndarray  # (samples, rank)
    h: np.ndarray  # (rank, items)
    rank: int
    iterations: int
    projection_iterations: int = 100
    objective_history: list[float] = field(default_factory=list, repr=False)


def nmf_fit(
    v: np.ndarray,
    rank: int,
    iterations: int,
    seed: int,
    candidates: tuple[str, ...] = (),
    projection_iterations: int = 100,
) -> NmfModel:
    """Multiplicative updates on the Frobenius objective; W, H stay >= 0."""
    v = np.asarray(v, dtype=np.float64)
    if np.any(v < 0):
        raise ValueError("input matrix must be non-negative")
    rng = np.random.default_rng(seed)
    n, m = v.shape
    w = rng.random((n, rank)) + 1e-4
    h = rng.random((rank, m)) + 1e-4
    history = []
    for _ in range(iterations):
        h *= (w.T @ v) / (w.T @ w @ h + NMF_EPS)
        w *= (v @ h.T) / (w @ h @ h.T + NMF_EPS)
        history.append(float(np.linalg.norm(v - w @ h)))
    return NmfModel(
        candidates=tuple(candidates),
        w=w,
        h=h,
        rank=rank,
        iterations=iterations,
        projection_iterations=projection_iterations,
        objective_history=history,
    )


def train_nmf(
    train_alert_ids: list[str],
    corpus: Corpus,
    rng: np.random.Generator,
    rank: int = 16,
    iterations: int = 200,
    projection_iterations: int = 100,
    samplers: dict[str, PlaybookSampler] | None = None,
) -> NmfModel:
    """Fit on exactly one generated epoch of training samples."""
    registry = corpus.modules
    samples = generate_epoch(
        train_alert_ids, corpus.mapping, corpus.playbooks, registry, rng, samplers
    )
    v = np.stack([sample_items_row(s, registry) for s in samples])
    return nmf_fit(
        v,
        rank=rank,
        iterations=iterations,
        seed=int(rng.integers(2**31)),
        candidates=registry.candidates,
        projection_iterations=projection_iterations,
    )


def nmf_scores(model: NmfModel, query_row: np.ndarray) -> np.ndarray:
    """Project the query onto the frozen H and return its reconstruction."""
    q = np.asarray(query_row, dtype=np.float64)[None, :]
    w = np.full((1, model.rank), 0.5)
    hht = model.h @ model.h.T
    for _ in range(model.projection_iterations):
        w *= (q @ model.h.T) / (w @ hht + NMF_EPS)
    return (w @ model.h)[0]
