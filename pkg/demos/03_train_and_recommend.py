#!/usr/bin/env python3
"""Train the full stack on a memorizable corpus, then grow a playbook the
way an analyst would: query for top-k next modules, attach the best one,
repeat until EOP wins.

Run:  python3 demos/03_train_and_recommend.py   (about a minute)
"""

from icsecure.config import Hyperparameters
from icsecure.corpus_io import Corpus
from icsecure.datagen import generate_memorization_corpus
from icsecure.model import EOP_MODULE, ModuleRegistry, Playbook, START_MODULE
from icsecure.pipeline import train_stack

registry, alerts, playbooks, mapping = generate_memorization_corpus(
    n_alerts=12, chain_length=4, n_modules=10, seed=0
)
corpus = Corpus(
    registry=registry,
    alerts=alerts,
    playbooks=playbooks,
    mapping=mapping,
    modules=ModuleRegistry.from_playbooks(playbooks.values()),
)

hp = Hyperparameters(ae_epochs=800, node2vec_epochs=3000, graph2vec_epochs=4000, ncf_epochs=400)
rec, log = train_stack(corpus, sorted(corpus.alerts), hp, "with_attributes", seed=0)
print("trained:", {k: f"{v:.1f}s" for k, v in log.timings.items()})

aid = sorted(alerts)[0]
alert = alerts[aid]
target = corpus.playbooks_of(aid)[0]
chain = [target.nodes[n] for n in sorted(target.nodes) if n != target.start]
print(f"\nalert {aid} should reproduce the chain: {' -> '.join(chain)}")

# grow a draft from a lone START node, always accepting the rank-1 candidate
draft = Playbook(id="draft", nodes={"n0": START_MODULE}, edges=frozenset(), start="n0")
current = "n0"
for step in range(1, 8):
    out = rec.recommend_top_k(alert, draft, current, k=5)
    top = out.entries[0]
    shown = ", ".join(f"{c}:{s:.2f}" for c, s, _ in out.entries[:3])
    print(f" step {step}: top3 [{shown}]")
    if top[0] == EOP_MODULE:
        print("  EOP ranked first: branch complete")
        break
    new_node = f"n{step}"
    draft = Playbook(
        id="draft",
        nodes={**draft.nodes, new_node: top[0]},
        edges=frozenset(draft.edges | {(current, new_node)}),
        start="n0",
    )
    current = new_node

built = [draft.nodes[n] for n in sorted(draft.nodes) if n != "n0"]
print(f"\nbuilt chain: {' -> '.join(built)}")
print("matches target:", built == chain)
