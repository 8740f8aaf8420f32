#!/usr/bin/env python3
"""Small-scale cross-validated comparison of the scorer against the
frequency and NMF baselines (reduced epochs so it finishes quickly).

Run:  python3 demos/04_evaluate_baselines.py   (a few minutes)
"""

from icsecure.config import Hyperparameters
from icsecure.corpus_io import Corpus
from icsecure.datagen import CorpusSpec, generate_corpus
from icsecure.evaluation import run_cross_validation
from icsecure.model import ModuleRegistry
from icsecure.samples import split_folds

registry, alerts, playbooks, mapping = generate_corpus(
    CorpusSpec(n_keys=128, n_alerts=25, n_playbooks=10, n_modules=12,
               keys_per_alert=(3, 8), playbook_size=(3, 6), branching=(1, 2),
               playbooks_per_alert=(1, 2), seed=11)
)
corpus = Corpus(
    registry=registry,
    alerts=alerts,
    playbooks=playbooks,
    mapping=mapping,
    modules=ModuleRegistry.from_playbooks(playbooks.values()),
)
plan = split_folds(alerts, playbooks, mapping, seed=11)

hp = Hyperparameters(
    ae_epochs=600, node2vec_epochs=2000, graph2vec_epochs=3000,
    ncf_epochs=250, frequency_epochs=40, nmf_iterations=150,
)
report = run_cross_validation(
    corpus, plan, hp,
    models=("icsecure-with", "frequency", "nmf"),
    ks=(1, 3, 5), seed=11, dataset="demo",
)

print(f"{'model':16s} {'k':>2s} {'precision':>9s} {'recall':>9s} {'map':>9s}")
for row in report["means"]:
    print(f"{row['model']:16s} {row['k']:2d} {row['precision']:9.4f} "
          f"{row['recall']:9.4f} {row['map']:9.4f}")
