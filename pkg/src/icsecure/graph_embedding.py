"""Whole-graph embeddings for (partial) playbooks.

Each playbook becomes a document of Weisfeiler-Lehman subtree labels
(iterations 0..h, direction-aware neighborhoods), and documents are
embedded PV-DBOW style: a 16-dim doc vector is trained to predict its
labels against negative samples. Unseen graphs are embedded by optimizing
a fresh doc vector against the frozen label vectors.

Two variants: ``with_attributes`` seeds iteration-0 labels with module
ids; ``without_attributes`` uses only node degrees, i.e. pure structure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import Playbook
from .nn import sigmoid

WITH_ATTRIBUTES = "with_attributes"
WITHOUT_ATTRIBUTES = "without_attributes"
VARIANTS = (WITH_ATTRIBUTES, WITHOUT_ATTRIBUTES)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
INIT_SCALE = 0.5


def fnv1a64(text: str) -> str:
    """64-bit FNV-1a of the UTF-8 bytes, as fixed-width hex; platform-stable."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


@dataclass(frozen=True)
class Graph2VecConfig:
    wl_iterations: int = 2
    embedding_dim: int = 16
    epochs: int = 1000
    negatives: int = 2
    learning_rate: float = 0.01
    infer_steps: int = 100
    infer_lr: float = 0.025
    variant: str = WITH_ATTRIBUTES
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")


def wl_document(graph: Playbook, h: int, variant: str) -> tuple[str, ...]:
    """Multiset (as a sorted tuple) of WL labels, |nodes| * (h+1) entries.

    Iteration-0 labels are module ids (with attributes) or total degrees
    (without). Relabeling hashes the node's own label together with the
    sorted multisets of its in- and out-neighbor labels, so direction of
    the logical flow matters.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    nodes = sorted(graph.nodes)
    if not nodes:
        raise ValueError("graph is empty")
    in_nbrs = {n: [] for n in nodes}
    out_nbrs = {n: [] for n in nodes}
    for a, b in graph.sorted_edges():
        out_nbrs[a].append(b)
        in_nbrs[b].append(a)

    if variant == WITH_ATTRIBUTES:
        labels = {n: graph.nodes[n] for n in nodes}
    else:
        labels = {n: str(len(in_nbrs[n]) + len(out_nbrs[n])) for n in nodes}

    doc = [labels[n] for n in nodes]
    for _ in range(h):
        new_labels = {}
        for n in nodes:
            ins = ",".join(sorted(labels[m] for m in in_nbrs[n]))
            outs = ",".join(sorted(labels[m] for m in out_nbrs[n]))
            new_labels[n] = fnv1a64(f"{labels[n]}|in:{ins}|out:{outs}")
        labels = new_labels
        doc.extend(labels[n] for n in nodes)
    return tuple(sorted(doc))


def _content_seeded_row(doc: tuple[str, ...], seed: int, dim: int) -> np.ndarray:
    digest = int(fnv1a64("\x00".join(doc)), 16)
    rng = np.random.default_rng([seed, digest])
    return rng.uniform(-INIT_SCALE / dim, INIT_SCALE / dim, size=dim)


@dataclass
class Graph2VecModel:
    """Frozen label vectors plus the training doc vectors and sampling state."""

    config: Graph2VecConfig
    label_order: tuple[str, ...]
    label_vectors: np.ndarray
    doc_ids: tuple[str, ...]
    doc_vectors: np.ndarray
    noise: np.ndarray = field(repr=False, default=None)
    inference_seed: int = 0
    loss_history: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "label_index", {l: i for i, l in enumerate(self.label_order)})
        object.__setattr__(self, "_infer_cache", {})  # document -> vector
        object.__setattr__(self, "_doc_cache", {})  # structural key -> document
        object.__setattr__(self, "_neg_rows", None)

    def negative_rows(self) -> np.ndarray:
        """The (steps, k) negative draws shared by every inference call.

        The optimizer rng restarts from the fixed inference seed on each
        call, so all documents see the same negative sequence; computing
        it once keeps single and batched inference identical.
        """
        if self._neg_rows is None:
            rng = np.random.default_rng(self.inference_seed)
            draws = rng.choice(
                len(self.label_order),
                size=(self.config.infer_steps, self.config.negatives),
                p=self.noise,
            )
            object.__setattr__(self, "_neg_rows", draws)
        return self._neg_rows

    @property
    def variant(self) -> str:
        return self.config.variant

    def document(self, graph: Playbook) -> tuple[str, ...]:
        return wl_document(graph, self.config.wl_iterations, self.config.variant)

    def document_coverage(self, graph: Playbook) -> float:
        doc = self.document(graph)
        return sum(1 for l in doc if l in self.label_index) / len(doc)

    def doc_vector_of(self, playbook_id: str) -> np.ndarray:
        return self.doc_vectors[self.doc_ids.index(playbook_id)]


def train_graph2vec(playbooks: list[Playbook], config: Graph2VecConfig) -> Graph2VecModel:
    """PV-DBOW over the playbooks' WL documents, shared negatives per epoch."""
    if not playbooks:
        raise ValueError("training corpus is empty")
    books = sorted(playbooks, key=lambda pb: pb.id)
    docs = [wl_document(pb, config.wl_iterations, config.variant) for pb in books]
    label_order = tuple(sorted({l for doc in docs for l in doc}))
    label_index = {l: i for i, l in enumerate(label_order)}

    counts = np.zeros(len(label_order))
    doc_idx: list[int] = []
    lab_idx: list[int] = []
    for d, doc in enumerate(docs):
        for label in doc:
            li = label_index[label]
            doc_idx.append(d)
            lab_idx.append(li)
            counts[li] += 1
    doc_idx = np.asarray(doc_idx, dtype=np.intp)
    lab_idx = np.asarray(lab_idx, dtype=np.intp)
    weights = counts**0.75
    noise = weights / weights.sum()

    rng = np.random.default_rng(config.seed)
    dim = config.embedding_dim
    # doc rows are seeded from document content, so books with equal WL
    # documents start identical and (with shared negatives) stay identical
    doc_vecs = np.stack([_content_seeded_row(doc, config.seed, dim) for doc in docs])
    lab_vecs = rng.uniform(-INIT_SCALE / dim, INIT_SCALE / dim, size=(len(label_order), dim))

    m = [np.zeros_like(doc_vecs), np.zeros_like(lab_vecs)]
    v = [np.zeros_like(doc_vecs), np.zeros_like(lab_vecs)]
    b1, b2, eps = 0.9, 0.999, 1e-8
    n_pos = len(doc_idx)
    history = []
    for step in range(1, config.epochs + 1):
        negs = rng.choice(len(label_order), size=config.negatives, p=noise)
        dv = doc_vecs[doc_idx]  # (P, d)
        lv = lab_vecs[lab_idx]
        nv = lab_vecs[negs]  # (K, d)
        s_pos = sigmoid(np.einsum("pd,pd->p", dv, lv))
        s_neg = sigmoid(dv @ nv.T)
        history.append(
            float(np.mean(-np.log(s_pos + 1e-12) - np.log(1.0 - s_neg + 1e-12).sum(axis=1)))
        )
        g_pos = (s_pos - 1.0)[:, None] / n_pos
        g_neg = s_neg / n_pos
        grad_doc = np.zeros_like(doc_vecs)
        grad_lab = np.zeros_like(lab_vecs)
        np.add.at(grad_doc, doc_idx, g_pos * lv + g_neg @ nv)
        np.add.at(grad_lab, lab_idx, g_pos * dv)
        np.add.at(grad_lab, negs, g_neg.T @ dv)
        c1 = 1.0 - b1**step
        c2 = 1.0 - b2**step
        for table, g, mm, vv in ((doc_vecs, grad_doc, m[0], v[0]), (lab_vecs, grad_lab, m[1], v[1])):
            mm *= b1
            mm += (1.0 - b1) * g
            vv *= b2
            vv += (1.0 - b2) * g * g
            table -= config.learning_rate * (mm / c1) / (np.sqrt(vv / c2) + eps)

    return Graph2VecModel(
        config=config,
        label_order=label_order,
        label_vectors=lab_vecs,
        doc_ids=tuple(pb.id for pb in books),
        doc_vectors=doc_vecs,
        noise=noise,
        inference_seed=config.seed,
        loss_history=history,
    )


def structural_key(graph: Playbook) -> tuple:
    """Cheap memo key for a graph; avoids re-running WL on repeat queries."""
    return (graph.start, tuple(sorted(graph.nodes.items())), tuple(sorted(graph.edges)))


def _document_for(model: Graph2VecModel, graph: Playbook) -> tuple[str, ...]:
    key = structural_key(graph)
    doc = model._doc_cache.get(key)
    if doc is None:
        doc = model.document(graph)
        if len(model._doc_cache) < 500_000:
            model._doc_cache[key] = doc
    return doc


def infer_graph_embedding(model: Graph2VecModel, graph: Playbook) -> np.ndarray:
    """Optimize a fresh doc vector against frozen label vectors.

    Deterministic for a given (model, graph): the optimizer rng is seeded
    from the model's fixed inference seed. Graphs whose documents contain
    no label seen in training embed to the zero vector with a warning.
    """
    doc = _document_for(model, graph)
    cached = model._infer_cache.get(doc)
    if cached is not None:
        return cached.copy()

    known = np.asarray([model.label_index[l] for l in doc if l in model.label_index], dtype=np.intp)
    cfg = model.config
    if len(known) == 0:
        warnings.warn("partial playbook shares no subtree labels with the training corpus")
        vec = np.zeros(cfg.embedding_dim)
    else:
        lv = model.label_vectors[known]
        # start at the known-label centroid: 100 fixed-rate steps converge
        # much tighter from there than from a random point
        d = lv.mean(axis=0)
        n_pos = len(known)
        negs = model.negative_rows()
        for step in range(cfg.infer_steps):
            nv = model.label_vectors[negs[step]]
            g_pos = (sigmoid(lv @ d) - 1.0) @ lv / n_pos
            g_neg = sigmoid(nv @ d) @ nv / n_pos
            d -= cfg.infer_lr * (g_pos + g_neg)
        vec = d

    if len(model._infer_cache) < 500_000:
        model._infer_cache[doc] = vec.copy()
    return vec


def infer_graph_embeddings_batch(
    model: Graph2VecModel, graphs: list[Playbook]
) -> np.ndarray:
    """Inference for many graphs at once; same per-document optimization
    as :func:`infer_graph_embedding` (shared negative sequence), run
    vectorized across the batch's cache misses."""
    cfg = model.config
    dim = cfg.embedding_dim
    docs = [_document_for(model, g) for g in graphs]
    out = np.zeros((len(graphs), dim))
    miss_docs: dict[tuple, list[int]] = {}
    for i, doc in enumerate(docs):
        cached = model._infer_cache.get(doc)
        if cached is not None:
            out[i] = cached
        else:
            miss_docs.setdefault(doc, []).append(i)
    if not miss_docs:
        return out

    unique = list(miss_docs)
    known_sets = [
        np.asarray([model.label_index[l] for l in doc if l in model.label_index], dtype=np.intp)
        for doc in unique
    ]
    oov = [len(k) == 0 for k in known_sets]
    if any(oov):
        warnings.warn("partial playbook shares no subtree labels with the training corpus")
    active = [j for j, is_oov in enumerate(oov) if not is_oov]
    if active:
        counts = np.array([len(known_sets[j]) for j in active], dtype=np.float64)
        p_max = int(counts.max())
        b = len(active)
        lv_pad = np.zeros((b, p_max, dim))
        mask = np.zeros((b, p_max))
        for row, j in enumerate(active):
            k = known_sets[j]
            lv_pad[row, : len(k)] = model.label_vectors[k]
            mask[row, : len(k)] = 1.0
        d = lv_pad.sum(axis=1) / counts[:, None]  # centroid init
        negs = model.negative_rows()
        for step in range(cfg.infer_steps):
            nv = model.label_vectors[negs[step]]  # (k, dim)
            s_pos = sigmoid(np.einsum("bpd,bd->bp", lv_pad, d)) - 1.0
            g_pos = np.einsum("bp,bpd->bd", s_pos * mask, lv_pad) / counts[:, None]
            g_neg = (sigmoid(d @ nv.T) @ nv) / counts[:, None]
            d -= cfg.infer_lr * (g_pos + g_neg)
        for row, j in enumerate(active):
            vec = d[row]
            if len(model._infer_cache) < 500_000:
                model._infer_cache[unique[j]] = vec.copy()
            for i in miss_docs[unique[j]]:
                out[i] = vec
    for j, is_oov in enumerate(oov):
        if is_oov:
            if len(model._infer_cache) < 500_000:
                model._infer_cache[unique[j]] = np.zeros(dim)
    return out
