#!/usr/bin/env python3
"""Walk through the data model: generate a synthetic corpus, validate it,
project it to the unified module graph, and draw recommendation samples.

Run:  python3 demos/01_corpus_and_samples.py
"""

import numpy as np

from icsecure.corpus_io import Corpus
from icsecure.datagen import CorpusSpec, generate_corpus
from icsecure.model import ModuleRegistry, build_unified_graph, validate_corpus
from icsecure.samples import generate_epoch, split_folds

spec = CorpusSpec(
    n_keys=64,
    n_alerts=12,
    n_playbooks=5,
    n_modules=8,
    keys_per_alert=(3, 7),
    playbook_size=(3, 6),
    branching=(1, 2),
    playbooks_per_alert=(1, 2),
    seed=42,
)
registry, alerts, playbooks, mapping = generate_corpus(spec)
corpus = Corpus(
    registry=registry,
    alerts=alerts,
    playbooks=playbooks,
    mapping=mapping,
    modules=ModuleRegistry.from_playbooks(playbooks.values()),
)

print(f"corpus: {len(alerts)} alerts, {len(playbooks)} playbooks, "
      f"{corpus.modules.n_candidates} candidates (incl. EOP)")
print("violations:", validate_corpus(registry, alerts, playbooks, mapping) or "none")

one = playbooks[sorted(playbooks)[0]]
print(f"\nplaybook {one.id}: start={one.start}")
for a, b in one.sorted_edges():
    print(f"  {a} ({one.nodes[a]}) -> {b} ({one.nodes[b]})")

unified = build_unified_graph(list(playbooks.values()))
print(f"\nunified graph: {len(unified.nodes)} modules, {len(unified.edges)} edges")

rng = np.random.default_rng(0)
samples = generate_epoch(sorted(alerts), mapping, playbooks, corpus.modules, rng)
print(f"\none generation epoch -> {len(samples)} samples; three of them:")
for s in samples[:3]:
    positives = sorted(s.relevant_candidates(corpus.modules))
    print(f"  alert={s.alert_rule_id} pb={s.partial_playbook.id} current={s.current_node} "
          f"kept_edges={len(s.partial_playbook.edges)} labels={positives}")

plan = split_folds(alerts, playbooks, mapping, seed=1)
print(f"\nfold plan: sizes {[len(f) for f in plan.folds]}, "
      f"{len(plan.unique_alerts)} unique alerts pinned to training")
