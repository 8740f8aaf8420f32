"""Model bundle persistence: one directory holding manifest.json plus four
little-endian float64 blobs (autoencoder, module table, graph2vec, scorer).

Arrays round-trip bit-exactly, so reloaded bundles score identically.
Every blob is fingerprinted with sha256; the bundle fingerprint hashes
the blob digests together with the registry orders, and the health
endpoint reports it.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import nn
from .alert_embedding import AlertAutoencoder
from .config import Hyperparameters
from .graph_embedding import Graph2VecConfig, Graph2VecModel
from .model import ModuleRegistry, SchemaKeyRegistry
from .module_embedding import ModuleEmbeddingTable
from .recommender import NcfModel, Recommender

MANIFEST_FILE = "manifest.json"
FORMAT_VERSION = 1


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _arrays_to_blob(arrays: dict[str, np.ndarray]) -> tuple[bytes, list[dict]]:
    chunks = []
    manifest = []
    offset = 0
    for name, arr in arrays.items():
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    return b"".join(chunks), manifest


def _arrays_from_blob(blob: bytes, manifest: list[dict]) -> dict[str, np.ndarray]:
    out = {}
    for entry in manifest:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        out[entry["name"]] = (
            np.frombuffer(blob, dtype="<f8", count=count, offset=entry["offset"])
            .reshape(shape)
            .copy()
        )
    return out


def bundle_fingerprint(manifest: dict) -> str:
    core = {
        "blobs": {k: manifest[k]["sha256"] for k in ("autoencoder", "module_table", "graph2vec", "ncf")},
        "schema": _sha256("\x00".join(manifest["schema_keys"]).encode()),
        "modules": manifest["module_order"],
        "variant": manifest["variant"],
    }
    return _sha256(json.dumps(core, sort_keys=True).encode())


def save_bundle(
    rec: Recommender,
    out_dir: str | Path,
    seed: int,
    hyperparameters: Hyperparameters | None = None,
) -> str:
    """Write the bundle; returns its fingerprint."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)

    ae_blob, ae_manifest = nn.params_to_blob(rec.autoencoder.params)

    table = rec.module_table
    mt_blob, mt_manifest = _arrays_to_blob({"vectors": table.vectors})

    g = rec.graph_model
    g_blob, g_manifest = _arrays_to_blob(
        {"label_vectors": g.label_vectors, "doc_vectors": g.doc_vectors, "noise": g.noise}
    )

    ncf_blob, ncf_manifest = nn.params_to_blob(rec.ncf.params)
    for name, arr in (
        ("eop_embedding", rec.ncf.eop_embedding),
        ("input_mean", rec.ncf.input_mean),
        ("input_scale", rec.ncf.input_scale),
    ):
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        ncf_manifest.append({"name": name, "shape": list(arr.shape), "offset": len(ncf_blob)})
        ncf_blob += raw

    blobs = {
        "autoencoder": (ae_blob, "autoencoder.bin"),
        "module_table": (mt_blob, "module_table.bin"),
        "graph2vec": (g_blob, "graph2vec.bin"),
        "ncf": (ncf_blob, "ncf.bin"),
    }
    manifest = {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "variant": rec.ncf.variant,
        "inference_seed": g.inference_seed,
        "schema_keys": list(rec.registry.keys),
        "module_order": list(rec.modules.modules),
        "candidates": list(rec.ncf.candidates),
        "hyperparameters": None
        if hyperparameters is None
        else json.loads(json.dumps(hyperparameters.__dict__)),
        "autoencoder": {
            "layer_dims": list(rec.autoencoder.spec.layer_dims),
            "arrays": ae_manifest,
        },
        "module_table": {"order": list(table.order), "arrays": mt_manifest},
        "graph2vec": {
            "labels": list(g.label_order),
            "doc_ids": list(g.doc_ids),
            "config": {
                "wl_iterations": g.config.wl_iterations,
                "embedding_dim": g.config.embedding_dim,
                "epochs": g.config.epochs,
                "negatives": g.config.negatives,
                "learning_rate": g.config.learning_rate,
                "infer_steps": g.config.infer_steps,
                "infer_lr": g.config.infer_lr,
                "variant": g.config.variant,
                "seed": g.config.seed,
            },
            "arrays": g_manifest,
        },
        "ncf": {"layer_dims": list(rec.ncf.spec.layer_dims), "arrays": ncf_manifest},
    }
    for key, (blob, fname) in blobs.items():
        (d / fname).write_bytes(blob)
        manifest[key]["sha256"] = _sha256(blob)
        manifest[key]["file"] = fname
    fingerprint = bundle_fingerprint(manifest)
    manifest["fingerprint"] = fingerprint
    (d / MANIFEST_FILE).write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return fingerprint


def load_bundle(bundle_dir: str | Path) -> tuple[Recommender, dict]:
    d = Path(bundle_dir)
    manifest = json.loads((d / MANIFEST_FILE).read_text(encoding="utf-8"))
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported bundle format {manifest.get('format_version')!r}")

    blobs = {}
    for key in ("autoencoder", "module_table", "graph2vec", "ncf"):
        blob = (d / manifest[key]["file"]).read_bytes()
        if _sha256(blob) != manifest[key]["sha256"]:
            raise ValueError(f"blob {key} does not match its recorded digest")
        blobs[key] = blob

    registry = SchemaKeyRegistry.from_keys(manifest["schema_keys"])
    modules = ModuleRegistry(modules=tuple(manifest["module_order"]))

    ae_params = nn.params_from_blob(blobs["autoencoder"], manifest["autoencoder"]["arrays"])
    autoencoder = AlertAutoencoder(
        spec=nn.DenseNetworkSpec(tuple(manifest["autoencoder"]["layer_dims"])),
        params=ae_params,
        registry_fingerprint=registry.fingerprint,
    )

    mt_arrays = _arrays_from_blob(blobs["module_table"], manifest["module_table"]["arrays"])
    table = ModuleEmbeddingTable(
        order=tuple(manifest["module_table"]["order"]), vectors=mt_arrays["vectors"]
    )

    g_arrays = _arrays_from_blob(blobs["graph2vec"], manifest["graph2vec"]["arrays"])
    g_cfg = manifest["graph2vec"]["config"]
    graph_model = Graph2VecModel(
        config=Graph2VecConfig(
            wl_iterations=g_cfg["wl_iterations"],
            embedding_dim=g_cfg["embedding_dim"],
            epochs=g_cfg["epochs"],
            negatives=g_cfg["negatives"],
            learning_rate=g_cfg["learning_rate"],
            infer_steps=g_cfg["infer_steps"],
            infer_lr=g_cfg["infer_lr"],
            variant=g_cfg["variant"],
            seed=g_cfg["seed"],
        ),
        label_order=tuple(manifest["graph2vec"]["labels"]),
        label_vectors=g_arrays["label_vectors"],
        doc_ids=tuple(manifest["graph2vec"]["doc_ids"]),
        doc_vectors=g_arrays["doc_vectors"],
        noise=g_arrays["noise"],
        inference_seed=manifest["inference_seed"],
    )

    extra_names = ("eop_embedding", "input_mean", "input_scale")
    ncf_arrays_manifest = [e for e in manifest["ncf"]["arrays"] if e["name"] not in extra_names]
    ncf_params = nn.params_from_blob(blobs["ncf"], ncf_arrays_manifest)
    extras = _arrays_from_blob(
        blobs["ncf"], [e for e in manifest["ncf"]["arrays"] if e["name"] in extra_names]
    )
    ncf = NcfModel(
        spec=nn.DenseNetworkSpec(tuple(manifest["ncf"]["layer_dims"])),
        params=ncf_params,
        eop_embedding=extras["eop_embedding"],
        candidates=tuple(manifest["candidates"]),
        variant=manifest["variant"],
        input_mean=extras["input_mean"],
        input_scale=extras["input_scale"],
        fingerprints={k: manifest[k]["sha256"] for k in ("autoencoder", "module_table", "graph2vec", "ncf")},
    )

    rec = Recommender(
        registry=registry,
        modules=modules,
        autoencoder=autoencoder,
        module_table=table,
        graph_model=graph_model,
        ncf=ncf,
    )
    return rec, manifest
