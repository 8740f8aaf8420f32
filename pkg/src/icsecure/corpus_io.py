"""JSON readers/writers for the four corpus files plus a convenience bundle.

File formats (UTF-8):
  schema.json     {"keys": ["srcip", "dstip", ...]}
  alerts.json     [{"id": "ar_001", "keys": ["srcip", ...]}, ...]
  playbooks.json  [{"id": "pb_01", "start": "n0",
                    "nodes": [{"id": "n0", "module": "START"}, ...],
                    "edges": [["n0", "n1"], ...]}, ...]
  mapping.json    {"ar_001": ["pb_01", "pb_07"], ...}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .model import (
    AlertPlaybookMapping,
    AlertRule,
    ModuleRegistry,
    Playbook,
    SchemaKeyRegistry,
)

SCHEMA_FILE = "schema.json"
ALERTS_FILE = "alerts.json"
PLAYBOOKS_FILE = "playbooks.json"
MAPPING_FILE = "mapping.json"


@dataclass(frozen=True)
class Corpus:
    """A loaded corpus with its derived module registry."""

    registry: SchemaKeyRegistry
    alerts: dict[str, AlertRule]
    playbooks: dict[str, Playbook]
    mapping: AlertPlaybookMapping
    modules: ModuleRegistry

    def playbooks_of(self, alert_id: str) -> list[Playbook]:
        return [self.playbooks[pid] for pid in self.mapping.playbooks_for(alert_id)]


def playbook_to_json(pb: Playbook) -> dict:
    return {
        "id": pb.id,
        "start": pb.start,
        "nodes": [{"id": n, "module": m} for n, m in sorted(pb.nodes.items())],
        "edges": [list(e) for e in pb.sorted_edges()],
    }


def playbook_from_json(obj: dict) -> Playbook:
    nodes = {n["id"]: n["module"] for n in obj["nodes"]}
    edges = frozenset((a, b) for a, b in obj["edges"])
    return Playbook(id=obj["id"], nodes=nodes, edges=edges, start=obj["start"])


def save_corpus(
    directory: str | Path,
    registry: SchemaKeyRegistry,
    alerts: Mapping[str, AlertRule],
    playbooks: Mapping[str, Playbook],
    mapping: AlertPlaybookMapping,
) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    _dump(d / SCHEMA_FILE, {"keys": list(registry.keys)})
    _dump(
        d / ALERTS_FILE,
        [{"id": aid, "keys": sorted(alerts[aid].present_keys)} for aid in sorted(alerts)],
    )
    _dump(d / PLAYBOOKS_FILE, [playbook_to_json(playbooks[pid]) for pid in sorted(playbooks)])
    _dump(d / MAPPING_FILE, {aid: list(pids) for aid, pids in sorted(mapping.entries.items())})


def load_corpus(directory: str | Path) -> Corpus:
    d = Path(directory)
    registry = SchemaKeyRegistry.from_keys(_load(d / SCHEMA_FILE)["keys"])
    alerts = {
        a["id"]: AlertRule(id=a["id"], present_keys=frozenset(a["keys"]))
        for a in _load(d / ALERTS_FILE)
    }
    playbooks = {obj["id"]: playbook_from_json(obj) for obj in _load(d / PLAYBOOKS_FILE)}
    mapping = AlertPlaybookMapping(
        entries={aid: tuple(pids) for aid, pids in _load(d / MAPPING_FILE).items()}
    )
    modules = ModuleRegistry.from_playbooks(playbooks.values())
    return Corpus(registry=registry, alerts=alerts, playbooks=playbooks, mapping=mapping, modules=modules)


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=False) + "\n", encoding="utf-8")


def _load(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))
