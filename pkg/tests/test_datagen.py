import itertools

import numpy as np
import pytest

from icsecure.corpus_io import load_corpus, save_corpus
from icsecure.datagen import (
    CorpusSpec,
    d1_spec,
    generate_corpus,
    generate_memorization_corpus,
    make_keys,
)
from icsecure.model import START_MODULE, validate_corpus


class TestScaleCorpus:
    def test_d1_scale_corpus_is_valid(self):
        registry, alerts, books, mapping = generate_corpus(d1_spec(seed=7))
        assert len(registry) == 2661
        assert len(alerts) == 55
        assert len(books) == 23
        modules = {m for pb in books.values() for m in pb.nodes.values()} - {START_MODULE}
        assert len(modules) == 26
        assert validate_corpus(registry, alerts, books, mapping) == []

    def test_single_tiny_playbook(self):
        spec = CorpusSpec(
            n_keys=32, n_alerts=1, n_playbooks=1, n_modules=2,
            keys_per_alert=(1, 2), playbook_size=(1, 1), branching=(1, 1),
            playbooks_per_alert=(1, 1), seed=0,
        )
        _, _, books, _ = generate_corpus(spec)
        (pb,) = books.values()
        assert len(pb.nodes) == 2  # START plus one module node

    def test_byte_identical_outputs_under_seed(self, tmp_path):
        for sub in ("a", "b"):
            registry, alerts, books, mapping = generate_corpus(d1_spec(seed=3))
            save_corpus(tmp_path / sub, registry, alerts, books, mapping)
        for name in ("schema.json", "alerts.json", "playbooks.json", "mapping.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_learnability_signal(self):
        # alerts sharing a playbook overlap (Jaccard) more than unrelated ones
        _, alerts, _, mapping = generate_corpus(d1_spec(seed=1))

        def jaccard(a, b):
            ka, kb = alerts[a].present_keys, alerts[b].present_keys
            return len(ka & kb) / len(ka | kb)

        same, cross = [], []
        for a, b in itertools.combinations(sorted(alerts), 2):
            shared = set(mapping.entries[a]) & set(mapping.entries[b])
            (same if shared else cross).append(jaccard(a, b))
        assert np.mean(same) > np.mean(cross)

    def test_infeasible_specs_rejected(self):
        with pytest.raises(ValueError):
            CorpusSpec(n_keys=4)  # schema smaller than signature + noise
        with pytest.raises(ValueError):
            CorpusSpec(playbooks_per_alert=(1, 99))

    def test_round_trip_equality(self, tmp_path):
        registry, alerts, books, mapping = generate_corpus(
            CorpusSpec(n_keys=40, n_alerts=5, n_playbooks=3, n_modules=5,
                       keys_per_alert=(2, 4), playbook_size=(2, 4),
                       branching=(1, 2), playbooks_per_alert=(1, 2), seed=5)
        )
        save_corpus(tmp_path, registry, alerts, books, mapping)
        corpus = load_corpus(tmp_path)
        assert corpus.registry == registry
        assert corpus.alerts == alerts
        assert corpus.playbooks == books
        assert corpus.mapping == mapping


class TestMemorizationCorpus:
    def test_chain_shape(self):
        registry, alerts, books, mapping = generate_memorization_corpus(20, 4, 15, seed=0)
        assert len(books) == 20 and len(alerts) == 20
        for pb in books.values():
            assert len(pb.nodes) == 5  # START + 4 chain nodes
            # every non-terminal node has exactly one successor
            out_deg = {n: 0 for n in pb.nodes}
            for a, _ in pb.edges:
                out_deg[a] += 1
            assert sorted(out_deg.values()) == [0, 1, 1, 1, 1]
        assert validate_corpus(registry, alerts, books, mapping) == []

    def test_distinct_alert_keysets(self):
        _, alerts, _, _ = generate_memorization_corpus(30, 3, 10, seed=2)
        keysets = {a.present_keys for a in alerts.values()}
        assert len(keysets) == 30

    def test_infeasible_sizes_rejected(self):
        with pytest.raises(ValueError):
            generate_memorization_corpus(5, 10, 4, seed=0)

    def test_each_alert_maps_to_own_playbook(self):
        _, _, _, mapping = generate_memorization_corpus(8, 3, 10, seed=1)
        assert all(len(pids) == 1 for pids in mapping.entries.values())


class TestKeys:
    def test_base_names_then_padding(self):
        keys = make_keys(100)
        assert keys[0] == "srcip" and "field_0099" == keys[99]
        assert len(set(keys)) == 100
