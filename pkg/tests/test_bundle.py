import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from icsecure.bundle import load_bundle, save_bundle
from icsecure.config import Hyperparameters
from icsecure.corpus_io import Corpus
from icsecure.datagen import generate_memorization_corpus
from icsecure.model import ModuleRegistry
from icsecure.pipeline import train_stack

FAST = Hyperparameters(ae_epochs=60, node2vec_epochs=60, graph2vec_epochs=60, ncf_epochs=10)


def tiny_corpus(seed=0):
    registry, alerts, books, mapping = generate_memorization_corpus(4, 3, 6, seed=seed)
    return Corpus(
        registry=registry,
        alerts=alerts,
        playbooks=books,
        mapping=mapping,
        modules=ModuleRegistry.from_playbooks(books.values()),
    )


def file_hashes(d: Path) -> dict[str, str]:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(d.iterdir())
        if p.suffix == ".bin"
    }


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    corpus = tiny_corpus()
    rec, _ = train_stack(corpus, sorted(corpus.alerts), FAST, "with_attributes", seed=2)
    d = tmp_path_factory.mktemp("bundle")
    fingerprint = save_bundle(rec, d, seed=2, hyperparameters=FAST)
    return corpus, rec, d, fingerprint


class TestRoundTrip:
    def test_scores_identical_after_reload(self, trained):
        corpus, rec, d, _ = trained
        loaded, manifest = load_bundle(d)
        aid = sorted(corpus.alerts)[0]
        pb = corpus.playbooks_of(aid)[0]
        for node in sorted(pb.nodes):
            before = rec.score_all(corpus.alerts[aid], pb, node)
            after = loaded.score_all(corpus.alerts[aid], pb, node)
            np.testing.assert_allclose(before, after, atol=1e-12, rtol=0)

    def test_manifest_contents(self, trained):
        _, rec, d, fingerprint = trained
        manifest = json.loads((d / "manifest.json").read_text())
        assert manifest["fingerprint"] == fingerprint
        assert manifest["variant"] == "with_attributes"
        assert manifest["candidates"] == list(rec.ncf.candidates)
        assert manifest["module_order"][0] == "START"

    def test_identical_seeds_identical_blobs(self, trained, tmp_path):
        corpus, _, d, _ = trained
        rec2, _ = train_stack(corpus, sorted(corpus.alerts), FAST, "with_attributes", seed=2)
        save_bundle(rec2, tmp_path, seed=2, hyperparameters=FAST)
        assert file_hashes(d) == file_hashes(tmp_path)

    def test_different_seed_changes_blobs(self, trained, tmp_path):
        corpus, _, d, _ = trained
        rec3, _ = train_stack(corpus, sorted(corpus.alerts), FAST, "with_attributes", seed=3)
        save_bundle(rec3, tmp_path, seed=3, hyperparameters=FAST)
        assert file_hashes(d) != file_hashes(tmp_path)

    def test_corrupted_blob_rejected(self, trained, tmp_path):
        corpus, rec, d, _ = trained
        import shutil

        for item in d.iterdir():
            shutil.copy(item, tmp_path / item.name)
        blob = (tmp_path / "ncf.bin").read_bytes()
        (tmp_path / "ncf.bin").write_bytes(blob[:-8] + b"\x00" * 8)
        with pytest.raises(ValueError):
            load_bundle(tmp_path)

    def test_registry_round_trip(self, trained):
        corpus, _, d, _ = trained
        loaded, _ = load_bundle(d)
        assert loaded.registry == corpus.registry
        assert loaded.modules == corpus.modules
