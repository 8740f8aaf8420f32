"""Command-line interface: gen-data, train, eval, recommend, serve.

Exit codes: 0 success, 1 runtime/data error, 2 usage error. The global
seed falls back to the IC_SECURE_SEED environment variable when --seed is
not given. Hyperparameters can be overridden module-wide with a JSON
config overlay (--config file.json).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .bundle import load_bundle, save_bundle
from .config import Hyperparameters, load_overlay
from .corpus_io import load_corpus, playbook_from_json
from .datagen import (
    CorpusSpec,
    d1_spec,
    generate_corpus,
    generate_memorization_corpus,
    save_generated_corpus,
)
from .evaluation import DEFAULT_KS, MODEL_NAMES, run_cross_validation, write_report
from .model import AlertRule, validate_corpus
from .pipeline import train_stack
from .recommender import Recommendation
from .samples import split_folds
from .service import RecommendationService, make_server, serve_until_signal

VARIANT_FLAGS = {"with-attributes": "with_attributes", "without-attributes": "without_attributes"}


def _default_seed() -> int:
    return int(os.environ.get("IC_SECURE_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icsecure", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="generate a synthetic corpus")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--scale", choices=["d1"], default=None, help="named corpus scale")
    gen.add_argument("--memorize", action="store_true", help="linear-chain memorization corpus")
    gen.add_argument("--alerts", type=int, default=20)
    gen.add_argument("--chain", type=int, default=4)
    gen.add_argument("--modules", type=int, default=15)

    train = sub.add_parser("train", help="train a model bundle")
    train.add_argument("--data", required=True, help="corpus directory")
    train.add_argument("--out", required=True, help="bundle output directory")
    train.add_argument("--graph-variant", choices=sorted(VARIANT_FLAGS), default="with-attributes")
    train.add_argument("--seed", type=int, default=None)
    train.add_argument("--config", default=None, help="hyperparameter overlay JSON")

    ev = sub.add_parser("eval", help="run cross-validated evaluation")
    ev.add_argument("--data", required=True)
    ev.add_argument("--out", required=True)
    ev.add_argument("--models", default=",".join(MODEL_NAMES))
    ev.add_argument("--ks", default=",".join(str(k) for k in DEFAULT_KS))
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--config", default=None)
    ev.add_argument("--dump-samples", action="store_true")
    ev.add_argument("--dataset-name", default="synthetic")

    recc = sub.add_parser("recommend", help="rank next modules for one query")
    recc.add_argument("--bundle", required=True)
    recc.add_argument("--alert", required=True, help="JSON file with a key list")
    recc.add_argument("--playbook", required=True, help="JSON file with one playbook")
    recc.add_argument("--current", required=True, help="current node id")
    recc.add_argument("-k", "--top-k", type=int, default=5)

    srv = sub.add_parser("serve", help="serve recommendations over HTTP")
    srv.add_argument("--model", required=True, help="bundle directory")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--cors-origin", default=None)
    return parser


def _hyperparameters(args) -> Hyperparameters:
    hp = Hyperparameters()
    if getattr(args, "config", None):
        hp = load_overlay(hp, args.config)
    return hp


def cmd_gen_data(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.memorize:
        registry, alerts, books, mapping = generate_memorization_corpus(
            args.alerts, args.chain, args.modules, seed=seed
        )
        manifest = {
            "kind": "memorization",
            "n_alerts": args.alerts,
            "chain_length": args.chain,
            "n_modules": args.modules,
            "seed": seed,
        }
    else:
        spec = d1_spec(seed=seed) if args.scale == "d1" else CorpusSpec(seed=seed)
        registry, alerts, books, mapping = generate_corpus(spec)
        manifest = {"kind": "scale", "spec": asdict(spec)}
    save_generated_corpus(args.out, registry, alerts, books, mapping, manifest)
    print(f"wrote corpus ({len(alerts)} alerts, {len(books)} playbooks) to {args.out}")
    return 0


def cmd_train(args) -> int:
    corpus = load_corpus(args.data)
    problems = validate_corpus(corpus.registry, corpus.alerts, corpus.playbooks, corpus.mapping)
    if problems:
        for v in problems:
            print(f"corpus violation [{v.kind}] {v.subject}: {v.detail}", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else _default_seed()
    hp = _hyperparameters(args)
    variant = VARIANT_FLAGS[args.graph_variant]
    rec, log = train_stack(corpus, sorted(corpus.alerts), hp, variant, seed)
    fingerprint = save_bundle(rec, args.out, seed=seed, hyperparameters=hp)
    log_path = Path(args.out) / "training-log.json"
    log_path.write_text(json.dumps(log.to_json(), indent=1) + "\n", encoding="utf-8")
    print(f"bundle {fingerprint[:12]} written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    corpus = load_corpus(args.data)
    seed = args.seed if args.seed is not None else _default_seed()
    hp = _hyperparameters(args)
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    ks = tuple(int(k) for k in args.ks.split(","))
    plan = split_folds(corpus.alerts, corpus.playbooks, corpus.mapping, seed=seed)
    report = run_cross_validation(
        corpus,
        plan,
        hp,
        models=models,
        ks=ks,
        seed=seed,
        dataset=args.dataset_name,
        keep_per_sample=args.dump_samples,
    )
    write_report(report, args.out)
    print(f"report written to {args.out}")
    return 0


def _recommendation_to_json(out: Recommendation) -> dict:
    return {
        "recommendations": [
            {"candidate": c, "score": s, "rank": r} for c, s, r in out.entries
        ]
    }


def cmd_recommend(args) -> int:
    rec, _ = load_bundle(args.bundle)
    alert_obj = json.loads(Path(args.alert).read_text(encoding="utf-8"))
    keys = alert_obj["keys"] if isinstance(alert_obj, dict) else alert_obj
    alert = AlertRule(id=str(alert_obj.get("id", "query")) if isinstance(alert_obj, dict) else "query",
                      present_keys=frozenset(keys))
    playbook = playbook_from_json(json.loads(Path(args.playbook).read_text(encoding="utf-8")))
    out = rec.recommend_top_k(
        alert, playbook, args.current, k=args.top_k, ignore_unknown_keys=True
    )
    print(json.dumps(_recommendation_to_json(out), indent=1))
    return 0


def cmd_serve(args) -> int:
    rec, manifest = load_bundle(args.model)
    service = RecommendationService(rec, manifest["fingerprint"])
    server = make_server(service, port=args.port, host=args.host, cors_origin=args.cors_origin)
    print(f"serving bundle {manifest['fingerprint'][:12]} on {args.host}:{args.port}")
    serve_until_signal(server)
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "recommend": cmd_recommend,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
