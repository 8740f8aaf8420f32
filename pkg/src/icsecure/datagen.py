"""Synthetic corpus generation at desk scale.

Corpora mirror the statistical shape of real alert/playbook datasets:
layered DAG playbooks rooted at START, and alert key-sets correlated with
the playbooks they trigger. Each playbook owns a hidden 8-key signature;
every alert mapped to it carries that signature plus a few noise keys, so
alerts sharing playbooks overlap far more than unrelated ones and the
task is learnable.

The memorization corpus is deliberately trivial: one linear-chain
playbook per alert, distinct key-sets, used to verify that the full
pipeline can reproduce what it was trained on.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .corpus_io import save_corpus
from .model import (
    AlertPlaybookMapping,
    AlertRule,
    Playbook,
    SchemaKeyRegistry,
    START_MODULE,
)

SIGNATURE_KEYS = 8

# CIM-flavored field names; generated registries start with these and pad
# out with numbered fields up to the requested size.
BASE_KEY_NAMES = [
    "srcip", "dstip", "hostname", "src_port", "dest_port", "user", "src_user",
    "process_name", "parent_process_name", "process_id", "command_line",
    "file_name", "file_path", "file_hash", "url", "http_method", "http_status",
    "uri_path", "http_user_agent", "dns_query", "dns_answer", "protocol",
    "transport", "bytes_in", "bytes_out", "action", "severity", "signature",
    "signature_id", "rule_name", "event_id", "event_code", "log_source",
    "sourcetype", "index_name", "registry_key", "registry_value", "service_name",
    "account_domain", "logon_type", "session_id", "vendor_product", "device_name",
    "interface", "vlan_id", "email_sender", "email_recipient", "email_subject",
    "attachment_name", "certificate_cn", "ja3_hash", "asn", "geo_country",
    "geo_city", "threat_category", "ioc_type", "ioc_value", "alert_id",
    "detection_source", "mitre_technique", "mitre_tactic", "kill_chain_phase",
    "risk_score", "confidence",
]


@dataclass(frozen=True)
class CorpusSpec:
    n_keys: int = 2661
    n_alerts: int = 55
    n_playbooks: int = 23
    n_modules: int = 26
    keys_per_alert: tuple[int, int] = (4, 12)  # noise keys beyond signatures
    playbook_size: tuple[int, int] = (4, 8)  # module nodes, excluding START
    branching: tuple[int, int] = (1, 3)
    playbooks_per_alert: tuple[int, int] = (1, 3)
    seed: int = 0

    def __post_init__(self):
        for name in ("n_keys", "n_alerts", "n_playbooks", "n_modules"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("keys_per_alert", "playbook_size", "branching", "playbooks_per_alert"):
            lo, hi = getattr(self, name)
            if lo < 1 and name != "keys_per_alert" or lo > hi:
                raise ValueError(f"{name} range ({lo}, {hi}) is empty or invalid")
        if self.n_keys < SIGNATURE_KEYS + self.keys_per_alert[1]:
            raise ValueError("schema too small for signatures plus noise keys")
        if self.playbooks_per_alert[1] > self.n_playbooks:
            raise ValueError("playbooks_per_alert exceeds playbook count")


def d1_spec(seed: int = 0) -> CorpusSpec:
    """Dimensions of the largest evaluation dataset: 55 alerts, 23 playbooks,
    26 modules over a 2,661-key schema."""
    return CorpusSpec(seed=seed)


def make_keys(n_keys: int) -> list[str]:
    keys = BASE_KEY_NAMES[:n_keys]
    keys += [f"field_{i:04d}" for i in range(len(keys), n_keys)]
    return keys


def _module_ids(n: int) -> list[str]:
    return [f"m_{i:02d}" for i in range(n)]


class _BalancedPool:
    """Deals module ids in shuffled rounds so usage stays near-uniform."""

    def __init__(self, modules: list[str], rng: np.random.Generator):
        self.modules = modules
        self.rng = rng
        self.queue: list[str] = []

    def draw(self) -> str:
        if not self.queue:
            self.queue = [self.modules[i] for i in self.rng.permutation(len(self.modules))]
        return self.queue.pop()


def _layered_playbook(
    pid: str,
    size: int,
    branching: tuple[int, int],
    pool: _BalancedPool,
    rng: np.random.Generator,
) -> Playbook:
    widths = []
    remaining = size
    while remaining > 0:
        w = min(remaining, int(rng.integers(branching[0], branching[1] + 1)))
        widths.append(w)
        remaining -= w

    nodes = {"n0": START_MODULE}
    layers = [["n0"]]
    counter = 1
    for w in widths:
        layer = []
        for _ in range(w):
            nid = f"n{counter}"
            counter += 1
            nodes[nid] = pool.draw()
            layer.append(nid)
        layers.append(layer)

    # tree-like flow as in real response playbooks: every node has one
    # parent, occasionally a second; at most one skip-level edge
    edges: set[tuple[str, str]] = set()
    for prev, layer in zip(layers, layers[1:]):
        for child in layer:
            parent = prev[int(rng.integers(len(prev)))]
            edges.add((parent, child))
            if len(prev) > 1 and rng.random() < 0.15:
                second = prev[int(rng.integers(len(prev)))]
                edges.add((second, child))
    if len(layers) > 2 and rng.random() < 0.3:
        i = int(rng.integers(0, len(layers) - 2))
        j = int(rng.integers(i + 2, len(layers)))
        a = layers[i][int(rng.integers(len(layers[i])))]
        b = layers[j][int(rng.integers(len(layers[j])))]
        if a != b:
            edges.add((a, b))
    return Playbook(id=pid, nodes=nodes, edges=frozenset(edges), start="n0")


def generate_corpus(
    spec: CorpusSpec,
) -> tuple[SchemaKeyRegistry, dict[str, AlertRule], dict[str, Playbook], AlertPlaybookMapping]:
    rng = np.random.default_rng(spec.seed)
    registry = SchemaKeyRegistry.from_keys(make_keys(spec.n_keys))
    modules = _module_ids(spec.n_modules)
    pool = _BalancedPool(modules, rng)

    playbooks: dict[str, Playbook] = {}
    for i in range(spec.n_playbooks):
        pid = f"pb_{i:02d}"
        size = int(rng.integers(spec.playbook_size[0], spec.playbook_size[1] + 1))
        playbooks[pid] = _layered_playbook(pid, size, spec.branching, pool, rng)

    signatures = {
        pid: set(rng.choice(registry.keys, size=SIGNATURE_KEYS, replace=False))
        for pid in sorted(playbooks)
    }

    alerts: dict[str, AlertRule] = {}
    entries: dict[str, tuple[str, ...]] = {}
    pids = sorted(playbooks)
    for i in range(spec.n_alerts):
        aid = f"ar_{i:03d}"
        n_pbs = int(rng.integers(spec.playbooks_per_alert[0], spec.playbooks_per_alert[1] + 1))
        chosen = sorted(pids[int(j)] for j in rng.choice(len(pids), size=n_pbs, replace=False))
        keys: set[str] = set()
        for pid in chosen:
            keys |= signatures[pid]
        n_noise = int(rng.integers(spec.keys_per_alert[0], spec.keys_per_alert[1] + 1))
        keys |= set(rng.choice(registry.keys, size=n_noise, replace=False))
        alerts[aid] = AlertRule(id=aid, present_keys=frozenset(keys))
        entries[aid] = tuple(chosen)

    return registry, alerts, playbooks, AlertPlaybookMapping(entries=entries)


def generate_memorization_corpus(
    n_alerts: int,
    chain_length: int,
    n_modules: int,
    seed: int,
    n_keys: int = 64,
) -> tuple[SchemaKeyRegistry, dict[str, AlertRule], dict[str, Playbook], AlertPlaybookMapping]:
    """One linear-chain playbook per alert; distinct alert key-sets."""
    if n_modules < chain_length:
        raise ValueError("need n_modules >= chain_length for distinct chain modules")
    rng = np.random.default_rng(seed)
    registry = SchemaKeyRegistry.from_keys(make_keys(n_keys))
    modules = _module_ids(n_modules)

    alerts: dict[str, AlertRule] = {}
    playbooks: dict[str, Playbook] = {}
    entries: dict[str, tuple[str, ...]] = {}
    seen_keysets: set[frozenset[str]] = set()
    for i in range(n_alerts):
        aid = f"ar_{i:03d}"
        pid = f"pb_{i:02d}"
        chain = [modules[int(j)] for j in rng.choice(n_modules, size=chain_length, replace=False)]
        nodes = {"n0": START_MODULE}
        edges = set()
        prev = "n0"
        for k, mod in enumerate(chain, 1):
            nid = f"n{k}"
            nodes[nid] = mod
            edges.add((prev, nid))
            prev = nid
        playbooks[pid] = Playbook(id=pid, nodes=nodes, edges=frozenset(edges), start="n0")

        while True:
            keys = frozenset(rng.choice(registry.keys, size=SIGNATURE_KEYS, replace=False))
            if keys not in seen_keysets:
                seen_keysets.add(keys)
                break
        alerts[aid] = AlertRule(id=aid, present_keys=keys)
        entries[aid] = (pid,)

    return registry, alerts, playbooks, AlertPlaybookMapping(entries=entries)


def save_generated_corpus(
    directory: str | Path,
    registry: SchemaKeyRegistry,
    alerts: dict[str, AlertRule],
    playbooks: dict[str, Playbook],
    mapping: AlertPlaybookMapping,
    manifest: dict,
) -> None:
    """The four corpus files plus corpus-manifest.json recording provenance."""
    d = Path(directory)
    save_corpus(d, registry, alerts, playbooks, mapping)
    (d / "corpus-manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )


def corpus_spec_manifest(spec: CorpusSpec) -> dict:
    return {"kind": "scale", "spec": asdict(spec)}
