"""Recommendation-sample generation and alert-level fold splitting.

One sample = (alert, partial playbook, current node, label vector). The
partial playbook keeps one uniformly chosen shortest start->current path
intact, drops every other edge with probability 0.5, and discards nodes
left with no edges. A module's label bit is set when the original graph
connects the current node to that module but the partial graph no longer
does; the EOP bit is set exactly when no module bit is.

Folds are split over alert rules. Modules occurring fewer than four times
across (alert, triggered playbook) pairs are rare; alerts touching them
are pinned to every training side instead of being folded.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .model import (
    AlertPlaybookMapping,
    AlertRule,
    ModuleRegistry,
    Playbook,
    START_MODULE,
    reachable_nodes,
)

UNIQUE_MODULE_THRESHOLD = 4
PRUNE_PROBABILITY = 0.5
N_FOLDS = 5


@dataclass(frozen=True)
class RecommendationSample:
    alert_rule_id: str
    partial_playbook: Playbook
    current_node: str
    label_vector: np.ndarray

    def positive_indices(self) -> list[int]:
        return np.flatnonzero(self.label_vector).tolist()

    def relevant_candidates(self, registry: ModuleRegistry) -> set[str]:
        return {registry.candidates[i] for i in self.positive_indices()}


class PlaybookSampler:
    """Per-playbook precomputation shared by every sample drawn from it."""

    def __init__(self, pb: Playbook):
        self.pb = pb
        self.edges = pb.sorted_edges()
        self.out_idx: dict[str, list[int]] = {n: [] for n in pb.nodes}
        for i, (a, b) in enumerate(self.edges):
            if a in self.out_idx:
                self.out_idx[a].append(i)

        # BFS from start: levels, shortest-path counts, and shortest-DAG preds
        self.level: dict[str, int] = {pb.start: 0}
        self.n_paths: dict[str, float] = {pb.start: 1.0}
        self.preds: dict[str, list[str]] = {pb.start: []}
        queue = deque([pb.start])
        succ: dict[str, list[str]] = {n: [] for n in pb.nodes}
        for a, b in self.edges:
            if a in succ:
                succ[a].append(b)
        while queue:
            u = queue.popleft()
            for v in succ.get(u, ()):
                if v not in pb.nodes:
                    continue
                if v not in self.level:
                    self.level[v] = self.level[u] + 1
                    self.n_paths[v] = 0.0
                    self.preds[v] = []
                    queue.append(v)
                if self.level[v] == self.level[u] + 1:
                    self.n_paths[v] += self.n_paths[u]
                    self.preds[v].append(u)

        self.reachable = sorted(self.level)
        self.edge_index = {e: i for i, e in enumerate(self.edges)}

    def protected_edge_indices(self, current: str, rng: np.random.Generator) -> list[int]:
        """Edges of one shortest start->current path, uniform over paths."""
        if current not in self.level:
            raise ValueError(f"node {current!r} unreachable from start in {self.pb.id!r}")
        path_edges = []
        v = current
        while v != self.pb.start:
            preds = self.preds[v]
            weights = np.array([self.n_paths[u] for u in preds])
            u = preds[int(rng.choice(len(preds), p=weights / weights.sum()))]
            path_edges.append(self.edge_index[(u, v)])
            v = u
        return path_edges

    def draw(
        self,
        alert_id: str,
        current: str,
        registry: ModuleRegistry,
        rng: np.random.Generator,
    ) -> RecommendationSample:
        pb = self.pb
        protected = self.protected_edge_indices(current, rng)
        keep = rng.random(len(self.edges)) >= PRUNE_PROBABILITY
        keep[protected] = True

        kept_edges = [self.edges[i] for i in np.flatnonzero(keep)]
        nodes = {pb.start}
        for a, b in kept_edges:
            nodes.add(a)
            nodes.add(b)
        nodes.add(current)

        labels = np.zeros(registry.n_candidates)
        orig_succ = {pb.nodes[self.edges[i][1]] for i in self.out_idx[current]}
        kept_succ = {pb.nodes[b] for a, b in kept_edges if a == current}
        for mod in orig_succ - kept_succ:
            labels[registry.candidate_index(mod)] = 1.0
        if not labels.any():
            labels[registry.eop_index] = 1.0

        partial = Playbook(
            id=pb.id,
            nodes={n: pb.nodes[n] for n in sorted(nodes)},
            edges=frozenset(kept_edges),
            start=pb.start,
        )
        return RecommendationSample(
            alert_rule_id=alert_id,
            partial_playbook=partial,
            current_node=current,
            label_vector=labels,
        )


def make_sample(
    alert_rule: AlertRule,
    playbook: Playbook,
    current_node: str,
    registry: ModuleRegistry,
    rng: np.random.Generator,
) -> RecommendationSample:
    return PlaybookSampler(playbook).draw(alert_rule.id, current_node, registry, rng)


def build_samplers(playbooks: Mapping[str, Playbook]) -> dict[str, PlaybookSampler]:
    return {pid: PlaybookSampler(playbooks[pid]) for pid in sorted(playbooks)}


def generate_epoch(
    alert_ids: Iterable[str],
    mapping: AlertPlaybookMapping,
    playbooks: Mapping[str, Playbook],
    registry: ModuleRegistry,
    rng: np.random.Generator,
    samplers: dict[str, PlaybookSampler] | None = None,
) -> list[RecommendationSample]:
    """One pass over every (alert, triggered playbook, reachable node) triple
    with fresh pruning randomness per sample."""
    if samplers is None:
        samplers = build_samplers(playbooks)
    out: list[RecommendationSample] = []
    for aid in sorted(alert_ids):
        for pid in mapping.playbooks_for(aid):
            sampler = samplers[pid]
            for current in sampler.reachable:
                out.append(sampler.draw(aid, current, registry, rng))
    return out


def module_total_counts(
    playbooks: Mapping[str, Playbook],
    mapping: AlertPlaybookMapping,
) -> Counter:
    """Node-multiplicity of each module summed over (alert, playbook) pairs."""
    counts: Counter = Counter()
    for aid in sorted(mapping.entries):
        for pid in mapping.entries[aid]:
            for module in playbooks[pid].nodes.values():
                if module != START_MODULE:
                    counts[module] += 1
    return counts


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[str, ...], ...]
    unique_alerts: tuple[str, ...]

    def train_alerts(self, fold: int) -> list[str]:
        out = [a for i, f in enumerate(self.folds) if i != fold for a in f]
        out.extend(self.unique_alerts)
        return sorted(out)

    def test_alerts(self, fold: int) -> list[str]:
        return list(self.folds[fold])


def split_folds(
    alerts: Mapping[str, AlertRule],
    playbooks: Mapping[str, Playbook],
    mapping: AlertPlaybookMapping,
    seed: int,
    n_folds: int = N_FOLDS,
) -> FoldPlan:
    counts = module_total_counts(playbooks, mapping)
    rare = {m for m, c in counts.items() if c < UNIQUE_MODULE_THRESHOLD}
    unique = []
    foldable = []
    for aid in sorted(alerts):
        touched = {
            mod
            for pid in mapping.entries.get(aid, ())
            for mod in playbooks[pid].nodes.values()
        }
        (unique if touched & rare else foldable).append(aid)
    if len(foldable) < n_folds:
        raise ValueError(
            f"only {len(foldable)} non-unique alerts; need at least {n_folds} to fold"
        )
    order = np.random.default_rng(seed).permutation(len(foldable))
    shuffled = [foldable[i] for i in order]
    folds = tuple(tuple(part.tolist()) for part in np.array_split(np.array(shuffled), n_folds))
    return FoldPlan(folds=folds, unique_alerts=tuple(unique))


def dump_samples_jsonl(
    samples: Iterable[RecommendationSample],
    path: str | Path,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            pb = s.partial_playbook
            fh.write(
                json.dumps(
                    {
                        "alert": s.alert_rule_id,
                        "playbook": pb.id,
                        "current": s.current_node,
                        "nodes": [[n, m] for n, m in sorted(pb.nodes.items())],
                        "edges": [list(e) for e in pb.sorted_edges()],
                        "positive_labels": s.positive_indices(),
                    }
                )
                + "\n"
            )
