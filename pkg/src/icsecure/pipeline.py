"""End-to-end training: autoencoder, then node2vec, then graph2vec, then
the scorer, all on the training side of a corpus.

Training playbooks are the ones triggered by at least one training alert;
the module embedding table is extended with initialized rows for EOP and
any registry module outside that graph so scoring never misses a lookup.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .alert_embedding import train_autoencoder
from .config import Hyperparameters
from .corpus_io import Corpus
from .graph_embedding import train_graph2vec
from .model import EOP_MODULE, build_unified_graph
from .module_embedding import extend_table, train_module_embeddings
from .recommender import NcfConfig, Recommender, train_ncf


@dataclass
class TrainingLog:
    seed: int
    variant: str
    timings: dict[str, float] = field(default_factory=dict)
    losses: dict[str, list[float]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "variant": self.variant,
            "timings_seconds": {k: round(v, 3) for k, v in self.timings.items()},
            "final_losses": {k: (v[-1] if v else None) for k, v in self.losses.items()},
        }


def training_playbook_ids(corpus: Corpus, train_alert_ids: list[str]) -> list[str]:
    return sorted({pid for aid in train_alert_ids for pid in corpus.mapping.playbooks_for(aid)})


def train_stack(
    corpus: Corpus,
    train_alert_ids: list[str],
    hp: Hyperparameters,
    variant: str,
    seed: int,
    shared: tuple | None = None,
) -> tuple[Recommender, TrainingLog]:
    """Train the full stack; ``shared`` may carry an (autoencoder, module
    table) pair from another variant's run on the same fold — both are
    variant-independent and deterministic under the seed."""
    from .alert_embedding import encode_matrix

    log = TrainingLog(seed=seed, variant=variant)
    train_alert_ids = sorted(train_alert_ids)
    train_pids = training_playbook_ids(corpus, train_alert_ids)
    train_books = [corpus.playbooks[pid] for pid in train_pids]

    if shared is not None:
        autoencoder, table = shared
        log.timings["autoencoder"] = 0.0
        log.timings["node2vec"] = 0.0
    else:
        t0 = time.perf_counter()
        one_hot = encode_matrix(
            [corpus.alerts[aid] for aid in train_alert_ids], corpus.registry
        )
        autoencoder = train_autoencoder(
            one_hot,
            seed=seed,
            epochs=hp.ae_epochs,
            learning_rate=hp.ae_learning_rate,
            hidden_dim=hp.ae_hidden,
            code_dim=hp.embedding_dim,
            registry_fingerprint=corpus.registry.fingerprint,
        )
        log.timings["autoencoder"] = time.perf_counter() - t0
        log.losses["autoencoder"] = autoencoder.loss_history

        t0 = time.perf_counter()
        unified = build_unified_graph(train_books)
        table = train_module_embeddings(unified, hp.node2vec_config(seed))
        table = extend_table(
            table,
            [EOP_MODULE, *corpus.modules.modules],
            np.random.default_rng(seed),
        )
        log.timings["node2vec"] = time.perf_counter() - t0
        log.losses["node2vec"] = table.loss_history

    t0 = time.perf_counter()
    graph_model = train_graph2vec(train_books, hp.graph2vec_config(variant, seed))
    log.timings["graph2vec"] = time.perf_counter() - t0
    log.losses["graph2vec"] = graph_model.loss_history

    t0 = time.perf_counter()
    ncf = train_ncf(
        train_alert_ids,
        corpus,
        autoencoder,
        table,
        graph_model,
        NcfConfig(
            hidden=hp.ncf_hidden,
            batch_size=hp.batch_size,
            learning_rate=hp.ncf_learning_rate,
            epochs=hp.ncf_epochs,
            seed=seed,
        ),
    )
    log.timings["ncf"] = time.perf_counter() - t0
    log.losses["ncf"] = ncf.loss_history

    rec = Recommender(
        registry=corpus.registry,
        modules=corpus.modules,
        autoencoder=autoencoder,
        module_table=table,
        graph_model=graph_model,
        ncf=ncf,
    )
    return rec, log
