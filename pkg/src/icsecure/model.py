"""Core data model: schema keys, alert rules, playbooks, and the unified module graph.

All types are immutable after construction and safe to share across threads.
Structural problems in a loaded corpus are reported by :func:`validate_corpus`
as data (a list of violations), not raised, so that partially broken corpora
can still be inspected.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

START_MODULE = "START"
EOP_MODULE = "EOP"


def _sha256_of(parts: Iterable[str]) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


@dataclass(frozen=True)
class SchemaKeyRegistry:
    """Ordered universe of alert schema keys; defines the one-hot axis."""

    keys: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.keys)) != len(self.keys):
            raise ValueError("schema keys must be unique")
        object.__setattr__(self, "index", {k: i for i, k in enumerate(self.keys)})

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key: str) -> bool:
        return key in self.index

    @property
    def fingerprint(self) -> str:
        """Stable hash of the key order; embeddings are only valid against it."""
        return _sha256_of(self.keys)

    @classmethod
    def from_keys(cls, keys: Iterable[str]) -> "SchemaKeyRegistry":
        return cls(keys=tuple(keys))


@dataclass(frozen=True)
class AlertRule:
    """An analytic rule's alert fingerprint: the set of schema keys it populates."""

    id: str
    present_keys: frozenset[str]

    def __post_init__(self):
        if not self.present_keys:
            raise ValueError(f"alert rule {self.id!r} has no keys")


@dataclass(frozen=True)
class ModuleRegistry:
    """Ordered module universe with the reserved START and EOP entries.

    ``modules`` holds START first, then the real module ids in sorted order.
    START is never a recommendation candidate; EOP is always the last
    candidate, so ``candidates == modules[1:] + (EOP,)``.
    """

    modules: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.modules)) != len(self.modules):
            raise ValueError("module ids must be unique")
        if not self.modules or self.modules[0] != START_MODULE:
            raise ValueError("module registry must start with START")
        if EOP_MODULE in self.modules:
            raise ValueError("EOP is implicit and must not be listed as a module")

    @classmethod
    def from_playbooks(cls, playbooks: Iterable["Playbook"]) -> "ModuleRegistry":
        mods = set()
        for pb in playbooks:
            mods.update(pb.nodes.values())
        mods.discard(START_MODULE)
        return cls(modules=(START_MODULE, *sorted(mods)))

    @property
    def candidates(self) -> tuple[str, ...]:
        """All recommendable ids: real modules in registry order, then EOP."""
        return self.modules[1:] + (EOP_MODULE,)

    @property
    def n_candidates(self) -> int:
        return len(self.modules)  # len(modules) - START + EOP

    def candidate_index(self, module_id: str) -> int:
        if module_id == EOP_MODULE:
            return self.n_candidates - 1
        if module_id == START_MODULE:
            raise ValueError("START is not a candidate")
        try:
            i = self.modules.index(module_id)
        except ValueError:
            raise KeyError(f"unknown module {module_id!r}") from None
        return i - 1

    @property
    def eop_index(self) -> int:
        return self.n_candidates - 1

    @property
    def fingerprint(self) -> str:
        return _sha256_of(self.modules)


@dataclass(frozen=True)
class Playbook:
    """Directed graph of module-typed nodes with a designated start node.

    Node ids are distinct from module ids so the same module may occur at
    several positions. Constructors are permissive: structural invariants
    (start node present, reachability, no self-loops) are checked by
    :func:`playbook_violations` / :func:`validate_corpus`, because partially
    pruned or broken graphs must still be representable.
    """

    id: str
    nodes: dict[str, str]  # node id -> module id
    edges: frozenset[tuple[str, str]]
    start: str

    def module_of(self, node_id: str) -> str:
        return self.nodes[node_id]

    def successors(self, node_id: str) -> list[str]:
        return sorted(b for a, b in self.edges if a == node_id)

    def predecessors(self, node_id: str) -> list[str]:
        return sorted(a for a, b in self.edges if b == node_id)

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def successor_modules(self, node_id: str) -> set[str]:
        return {self.nodes[b] for a, b in self.edges if a == node_id}


def reachable_nodes(pb: Playbook) -> set[str]:
    """Nodes reachable from the start node via directed edges (start included)."""
    out: dict[str, list[str]] = {n: [] for n in pb.nodes}
    for a, b in pb.edges:
        if a in out:
            out[a].append(b)
    seen = {pb.start} if pb.start in pb.nodes else set()
    queue = deque(seen)
    while queue:
        cur = queue.popleft()
        for nxt in out.get(cur, ()):
            if nxt in pb.nodes and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


@dataclass(frozen=True)
class AlertPlaybookMapping:
    """Which playbooks each alert rule may trigger."""

    entries: dict[str, tuple[str, ...]]

    def __post_init__(self):
        for ar, pbs in self.entries.items():
            if not pbs:
                raise ValueError(f"mapping for {ar!r} is empty")

    def playbooks_for(self, alert_id: str) -> tuple[str, ...]:
        return self.entries[alert_id]


@dataclass(frozen=True)
class UnifiedGraph:
    """Module-level union of all playbooks: the embedding training graph."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def undirected_adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {n: sorted(adj[n]) for n in sorted(adj)}


def build_unified_graph(playbooks: Sequence[Playbook]) -> UnifiedGraph:
    """Project every playbook edge onto module ids and union the results."""
    if not playbooks:
        raise ValueError("cannot build a unified graph from zero playbooks")
    nodes: set[str] = set()
    edges: set[tuple[str, str]] = set()
    for pb in playbooks:
        nodes.update(pb.nodes.values())
        for a, b in pb.edges:
            edges.add((pb.nodes[a], pb.nodes[b]))
    return UnifiedGraph(nodes=frozenset(nodes), edges=frozenset(edges))


@dataclass(frozen=True)
class Violation:
    """One structural problem found in a corpus."""

    kind: str
    subject: str
    detail: str


def playbook_violations(pb: Playbook) -> list[Violation]:
    out: list[Violation] = []
    if pb.start not in pb.nodes:
        out.append(Violation("bad_start", pb.id, f"start node {pb.start!r} not in nodes"))
    elif pb.nodes[pb.start] != START_MODULE:
        out.append(
            Violation("bad_start", pb.id, f"start node {pb.start!r} does not carry module {START_MODULE}")
        )
    for a, b in pb.sorted_edges():
        if a == b:
            out.append(Violation("self_loop", pb.id, f"self-loop on node {a!r}"))
        if a not in pb.nodes or b not in pb.nodes:
            out.append(Violation("dangling_edge", pb.id, f"edge ({a!r}, {b!r}) leaves the node set"))
    if pb.start in pb.nodes:
        reached = reachable_nodes(pb)
        for n in sorted(set(pb.nodes) - reached):
            out.append(Violation("unreachable_node", pb.id, f"node {n!r} unreachable from start"))
    return out


def validate_corpus(
    registry: SchemaKeyRegistry,
    alerts: Mapping[str, AlertRule],
    playbooks: Mapping[str, Playbook],
    mapping: AlertPlaybookMapping,
) -> list[Violation]:
    """Cross-check the four corpus collections; empty result means valid."""
    out: list[Violation] = []
    for aid in sorted(alerts):
        for key in sorted(alerts[aid].present_keys):
            if key not in registry:
                out.append(Violation("unknown_key", aid, f"key {key!r} not in schema registry"))
    for pid in sorted(playbooks):
        out.extend(playbook_violations(playbooks[pid]))
    for aid in sorted(mapping.entries):
        if aid not in alerts:
            out.append(Violation("dangling_alert_reference", aid, "mapping references unknown alert rule"))
        for pid in mapping.entries[aid]:
            if pid not in playbooks:
                out.append(
                    Violation("dangling_playbook_reference", aid, f"mapping references unknown playbook {pid!r}")
                )
    for aid in sorted(alerts):
        if aid not in mapping.entries:
            out.append(Violation("unmapped_alert", aid, "alert rule triggers no playbook"))
    return out
