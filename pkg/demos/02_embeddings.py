#!/usr/bin/env python3
"""The three embedding stages on a small corpus: alert autoencoder,
module node2vec, and whole-graph embeddings for partial playbooks.

Run:  python3 demos/02_embeddings.py   (about half a minute)
"""

import numpy as np

from icsecure.alert_embedding import encode_matrix, reconstruction_bit_accuracy, train_autoencoder
from icsecure.datagen import CorpusSpec, generate_corpus
from icsecure.graph_embedding import Graph2VecConfig, infer_graph_embedding, train_graph2vec
from icsecure.model import build_unified_graph
from icsecure.module_embedding import Node2VecConfig, train_module_embeddings

registry, alerts, playbooks, mapping = generate_corpus(
    CorpusSpec(n_keys=64, n_alerts=16, n_playbooks=6, n_modules=9,
               keys_per_alert=(3, 6), playbook_size=(3, 6), branching=(1, 2),
               playbooks_per_alert=(1, 2), seed=3)
)

# --- alerts: sparse one-hot -> 16-dim code ------------------------------
one_hot = encode_matrix([alerts[a] for a in sorted(alerts)], registry)
ae = train_autoencoder(one_hot, seed=0, epochs=800)
print(f"autoencoder: {one_hot.shape[1]} keys -> 16 dims; "
      f"bit accuracy {reconstruction_bit_accuracy(ae, one_hot):.3f}; "
      f"loss {ae.loss_history[0]:.3f} -> {ae.loss_history[-1]:.4f}")
code = ae.embed(one_hot[0])
print("  example code:", np.round(code[:6], 3), "...")

# --- modules: biased walks over the unified graph -----------------------
unified = build_unified_graph(list(playbooks.values()))
table = train_module_embeddings(unified, Node2VecConfig(epochs=2000, seed=1))
print(f"\nnode2vec: {len(table.order)} module rows; "
      f"loss {table.loss_history[0]:.3f} -> {table.loss_history[-1]:.3f}")

def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

adj = unified.undirected_adjacency()
anchor = next(m for m in table.order if adj[m])
neighbor = adj[anchor][0]
stranger = max(table.order, key=lambda m: 0 if m in adj[anchor] or m == anchor else 1)
print(f"  cosine({anchor}, neighbor {neighbor}) = {cosine(table.vector(anchor), table.vector(neighbor)):+.3f}")
print(f"  cosine({anchor}, non-neighbor {stranger}) = {cosine(table.vector(anchor), table.vector(stranger)):+.3f}")

# --- playbooks: WL documents -> doc vectors -----------------------------
books = [playbooks[p] for p in sorted(playbooks)]
g2v = train_graph2vec(books, Graph2VecConfig(epochs=2000, seed=2))
print(f"\ngraph2vec: {len(g2v.doc_ids)} training docs over {len(g2v.label_order)} WL labels")
probe = books[0]
vec = infer_graph_embedding(g2v, probe)
sims = [(pid, cosine(vec, g2v.doc_vectors[i])) for i, pid in enumerate(g2v.doc_ids)]
sims.sort(key=lambda t: -t[1])
print(f"  re-inferring {probe.id}: nearest training docs -> {sims[:3]}")
