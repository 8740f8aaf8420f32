import pytest

from icsecure.model import (
    EOP_MODULE,
    START_MODULE,
    AlertPlaybookMapping,
    AlertRule,
    ModuleRegistry,
    Playbook,
    SchemaKeyRegistry,
    build_unified_graph,
    playbook_violations,
    reachable_nodes,
    validate_corpus,
)


def pb(pid, chain, extra_edges=()):
    """Linear playbook START -> chain[0] -> chain[1] ... with optional extras."""
    nodes = {"n0": START_MODULE}
    edges = set()
    prev = "n0"
    for i, mod in enumerate(chain, start=1):
        nid = f"n{i}"
        nodes[nid] = mod
        edges.add((prev, nid))
        prev = nid
    edges.update(extra_edges)
    return Playbook(id=pid, nodes=nodes, edges=frozenset(edges), start="n0")


class TestRegistries:
    def test_schema_registry_positions(self):
        reg = SchemaKeyRegistry.from_keys(["a", "b", "c"])
        assert reg.index == {"a": 0, "b": 1, "c": 2}
        assert len(reg) == 3 and "b" in reg and "z" not in reg

    def test_schema_registry_rejects_duplicates(self):
        with pytest.raises(ValueError):
            SchemaKeyRegistry.from_keys(["a", "a"])

    def test_fingerprint_depends_on_order(self):
        assert (
            SchemaKeyRegistry.from_keys(["a", "b"]).fingerprint
            != SchemaKeyRegistry.from_keys(["b", "a"]).fingerprint
        )

    def test_module_registry_candidates(self):
        reg = ModuleRegistry(modules=(START_MODULE, "m1", "m2"))
        assert reg.candidates == ("m1", "m2", EOP_MODULE)
        assert reg.n_candidates == 3
        assert reg.candidate_index("m1") == 0
        assert reg.candidate_index(EOP_MODULE) == 2 == reg.eop_index

    def test_module_registry_start_not_a_candidate(self):
        reg = ModuleRegistry(modules=(START_MODULE, "m1"))
        with pytest.raises(ValueError):
            reg.candidate_index(START_MODULE)

    def test_module_registry_from_playbooks_sorted(self):
        reg = ModuleRegistry.from_playbooks([pb("p1", ["m_z", "m_a"]), pb("p2", ["m_k"])])
        assert reg.modules == (START_MODULE, "m_a", "m_k", "m_z")

    def test_alert_rule_requires_keys(self):
        with pytest.raises(ValueError):
            AlertRule(id="ar", present_keys=frozenset())


class TestUnifiedGraph:
    def test_union_of_two_playbooks(self):
        # {pb1: START->m1->m2} u {pb2: START->m1->m3}
        g = build_unified_graph([pb("pb1", ["m1", "m2"]), pb("pb2", ["m1", "m3"])])
        assert g.nodes == {START_MODULE, "m1", "m2", "m3"}
        assert g.edges == {(START_MODULE, "m1"), ("m1", "m2"), ("m1", "m3")}

    def test_single_playbook_is_its_projection(self):
        g = build_unified_graph([pb("pb1", ["m1", "m2"])])
        assert g.edges == {(START_MODULE, "m1"), ("m1", "m2")}

    def test_shared_edge_appears_once(self):
        g = build_unified_graph([pb("a", ["m1", "m2"]), pb("b", ["m1", "m2"])])
        assert len([e for e in g.edges if e == ("m1", "m2")]) == 1

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            build_unified_graph([])

    def test_edges_witnessed_both_ways_random(self):
        # every unified edge has a witnessing playbook edge, and vice versa
        import numpy as np

        rng = np.random.default_rng(11)
        for _ in range(50):
            books = []
            mods = [f"m{i}" for i in range(rng.integers(2, 6))]
            for b in range(rng.integers(1, 4)):
                length = int(rng.integers(1, len(mods) + 1))
                chain = list(rng.choice(mods, size=length, replace=False))
                books.append(pb(f"pb{b}", chain))
            g = build_unified_graph(books)
            witnessed = {
                (pbk.nodes[a], pbk.nodes[b]) for pbk in books for a, b in pbk.edges
            }
            assert g.edges == frozenset(witnessed)

    def test_undirected_adjacency_symmetric(self):
        g = build_unified_graph([pb("pb1", ["m1", "m2"])])
        adj = g.undirected_adjacency()
        for n, nbrs in adj.items():
            for m in nbrs:
                assert n in adj[m]


class TestValidation:
    def corpus(self):
        reg = SchemaKeyRegistry.from_keys(["srcip", "dstip", "hostname"])
        alerts = {"ar_1": AlertRule("ar_1", frozenset({"srcip", "dstip"}))}
        books = {"pb_1": pb("pb_1", ["m1", "m2"])}
        mapping = AlertPlaybookMapping(entries={"ar_1": ("pb_1",)})
        return reg, alerts, books, mapping

    def test_valid_corpus_empty_report(self):
        assert validate_corpus(*self.corpus()) == []

    def test_dangling_playbook_reference(self):
        reg, alerts, books, _ = self.corpus()
        mapping = AlertPlaybookMapping(entries={"ar_1": ("pb_99",)})
        report = validate_corpus(reg, alerts, books, mapping)
        assert [v.kind for v in report] == ["dangling_playbook_reference"]

    def test_unreachable_node_reported(self):
        reg, alerts, books, mapping = self.corpus()
        bad = pb("pb_1", ["m1"])
        bad = Playbook(
            id=bad.id,
            nodes={**bad.nodes, "n9": "m_lost"},
            edges=bad.edges,
            start=bad.start,
        )
        report = validate_corpus(reg, alerts, {"pb_1": bad}, mapping)
        assert [v.kind for v in report] == ["unreachable_node"]

    def test_unknown_key_reported(self):
        reg, _, books, mapping = self.corpus()
        alerts = {"ar_1": AlertRule("ar_1", frozenset({"srcip", "nope"}))}
        report = validate_corpus(reg, alerts, books, mapping)
        assert [v.kind for v in report] == ["unknown_key"]

    def test_self_loop_and_bad_start(self):
        bad = Playbook(id="p", nodes={"n0": "m1", "n1": "m2"}, edges=frozenset({("n1", "n1")}), start="n0")
        kinds = {v.kind for v in playbook_violations(bad)}
        assert "self_loop" in kinds and "bad_start" in kinds

    def test_reachability_helper(self):
        p = pb("p", ["m1", "m2"])
        assert reachable_nodes(p) == {"n0", "n1", "n2"}
