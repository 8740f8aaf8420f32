import numpy as np
import pytest

from icsecure.model import UnifiedGraph
from icsecure.module_embedding import (
    ModuleEmbeddingTable,
    Node2VecConfig,
    SkipGramTrainer,
    generate_walks,
    get_module_embedding,
    skipgram_pairs,
    step_weights,
    train_module_embeddings,
    train_node2vec,
    unigram_noise,
)


def graph(edges, extra_nodes=()):
    nodes = set(extra_nodes)
    for a, b in edges:
        nodes.update((a, b))
    return UnifiedGraph(nodes=frozenset(nodes), edges=frozenset(edges))


SMALL = Node2VecConfig(epochs=200, seed=1)


class TestWalkBias:
    def test_return_and_exploration_weights(self):
        # path a-b-c with the production p=5, q=0.25: after stepping b->c,
        # returning to b weighs 1/5 and any distance-2 hop weighs 1/0.25
        g = graph([("a", "b"), ("b", "c"), ("c", "d")])
        adj = g.undirected_adjacency()
        cand, w = step_weights(adj, "b", "c", p=5.0, q=0.25)
        weights = dict(zip(cand, w))
        assert weights["b"] == pytest.approx(0.2)
        assert weights["d"] == pytest.approx(4.0)

    def test_common_neighbor_weight_is_one(self):
        g = graph([("a", "b"), ("b", "c"), ("a", "c")])
        adj = g.undirected_adjacency()
        cand, w = step_weights(adj, "a", "b", p=5.0, q=0.25)
        assert dict(zip(cand, w))["c"] == pytest.approx(1.0)


class TestWalks:
    def test_isolated_node_yields_singleton_walk(self):
        g = graph([("a", "b")], extra_nodes=["lone"])
        walks = generate_walks(g, SMALL, np.random.default_rng(0))
        assert ["lone"] in walks

    def test_every_pair_is_an_edge(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(2, 8))
            edges = set()
            for _ in range(int(rng.integers(1, 12))):
                a, b = rng.choice(n, size=2, replace=False)
                edges.add((f"m{a}", f"m{b}"))
            g = graph(sorted(edges))
            undirected = {frozenset(e) for e in g.edges}
            for walk in generate_walks(g, SMALL, rng):
                for a, b in zip(walk, walk[1:]):
                    assert frozenset((a, b)) in undirected

    def test_walk_length_and_coverage(self):
        g = graph([("a", "b"), ("b", "c")])
        cfg = Node2VecConfig(walks_per_node=3, walk_length=4, seed=0)
        walks = generate_walks(g, cfg, np.random.default_rng(0))
        assert all(len(w) <= 4 for w in walks)
        starts = [w[0] for w in walks]
        for node in g.nodes:
            assert starts.count(node) == 3

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            generate_walks(UnifiedGraph(frozenset(), frozenset()), SMALL, np.random.default_rng(0))


class TestPairsAndNoise:
    def test_pairs_respect_context_size(self):
        index = {c: i for i, c in enumerate("abcd")}
        centers, contexts = skipgram_pairs([["a", "b", "c", "d"]], index, context_size=2)
        got = set(zip(centers.tolist(), contexts.tolist()))
        want = {(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)}
        assert got == want

    def test_noise_distribution_sums_to_one(self):
        index = {"a": 0, "b": 1}
        noise = unigram_noise([["a", "b", "a"]], index)
        assert noise.sum() == pytest.approx(1.0)
        assert noise[0] > noise[1]


class TestTraining:
    def test_table_shape_and_lookup(self):
        g = graph([("START", "m1"), ("m1", "m2"), ("m1", "m3")])
        table = train_module_embeddings(g, SMALL)
        assert table.vectors.shape == (4, 16)
        row = get_module_embedding(table, "m2")
        assert row.shape == (16,)
        np.testing.assert_array_equal(row, get_module_embedding(table, "m2"))

    def test_unknown_module_rejected(self):
        table = ModuleEmbeddingTable(order=("m1",), vectors=np.zeros((1, 16)))
        with pytest.raises(KeyError):
            get_module_embedding(table, "m9")

    def test_deterministic_under_seed(self):
        g = graph([("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")])
        t1 = train_module_embeddings(g, SMALL)
        t2 = train_module_embeddings(g, SMALL)
        assert np.array_equal(t1.vectors, t2.vectors)

    def test_loss_decreases_on_six_node_graph(self):
        # two triangles joined by a bridge: real cluster structure to learn
        g = graph(
            [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")]
        )
        cfg = Node2VecConfig(epochs=100, seed=2)
        table = train_module_embeddings(g, cfg)
        h = table.loss_history
        assert np.mean(h[90:]) < np.mean(h[:10])

    def test_tied_rows_with_identical_contexts_stay_equal(self):
        # m1 and m2 occur in exactly the same contexts; with identical
        # initial rows their input vectors receive identical updates
        walks = [["a", "m1", "b"], ["a", "m2", "b"]] * 3
        cfg = Node2VecConfig(epochs=300, seed=4)
        vocab = sorted({n for w in walks for n in w})
        rng = np.random.default_rng(cfg.seed)
        trainer = SkipGramTrainer(vocab, cfg, rng)
        i1, i2 = trainer.index["m1"], trainer.index["m2"]
        trainer.w_in[i2] = trainer.w_in[i1]
        centers, contexts = skipgram_pairs(walks, trainer.index, cfg.context_size)
        noise = unigram_noise(walks, trainer.index)
        for _ in range(cfg.epochs):
            trainer.run_epoch(centers, contexts, noise, rng)
        table = trainer.table()
        np.testing.assert_array_equal(table.vector("m1"), table.vector("m2"))
        # and training actually moved the rows
        assert np.abs(table.vector("m1")).max() > 0

    def test_train_node2vec_from_fixed_walks(self):
        walks = [["a", "b", "c"], ["c", "b", "a"]]
        table = train_node2vec(walks, Node2VecConfig(epochs=50, seed=0))
        assert set(table.order) == {"a", "b", "c"}
        assert table.vectors.shape == (3, 16)

    def test_empty_walks_rejected(self):
        with pytest.raises(ValueError):
            train_node2vec([], SMALL)


class TestExtendTable:
    def test_adds_missing_rows_only(self):
        from icsecure.module_embedding import extend_table

        base = ModuleEmbeddingTable(order=("m1",), vectors=np.ones((1, 16)))
        out = extend_table(base, ["m1", "EOP"], np.random.default_rng(0))
        assert out.order == ("m1", "EOP")
        np.testing.assert_array_equal(out.vector("m1"), np.ones(16))
        assert np.all(np.abs(out.vector("EOP")) <= 0.5 / 16)
