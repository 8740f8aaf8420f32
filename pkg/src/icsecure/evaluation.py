"""Offline evaluation: model adapters, per-sample metric averaging, and the
5-fold cross-validation runner with JSON/CSV report emission.

Test-time samples are generated with the same pruning procedure as
training (one epoch over the test alerts, seeded per fold). Metrics are
computed per sample against the label set and averaged.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from . import baselines
from .config import Hyperparameters
from .corpus_io import Corpus
from .metrics import MetricRow, average_precision_at_k, precision_at_k, recall_at_k
from .pipeline import train_stack
from .recommender import Recommender, rank_candidates
from .samples import FoldPlan, RecommendationSample, build_samplers, generate_epoch

MODEL_NAMES = ("icsecure-with", "icsecure-without", "frequency", "nmf")
DEFAULT_KS = (1, 3, 5, 10)


class ModelAdapter(Protocol):
    name: str

    def rank(self, sample: RecommendationSample, corpus: Corpus) -> list[str]:
        """Full candidate ranking, best first."""


@dataclass
class RecommenderAdapter:
    recommender: Recommender
    name: str

    def rank(self, sample: RecommendationSample, corpus: Corpus) -> list[str]:
        scores = self.recommender.score_sample(sample, corpus.alerts[sample.alert_rule_id])
        order = rank_candidates(self.recommender.ncf.candidates, scores)
        return [self.recommender.ncf.candidates[i] for i in order]


@dataclass
class FrequencyAdapter:
    model: baselines.FrequencyModel
    name: str = "frequency"

    def rank(self, sample: RecommendationSample, corpus: Corpus) -> list[str]:
        scores = baselines.frequency_scores(self.model)
        order = rank_candidates(self.model.candidates, scores)
        return [self.model.candidates[i] for i in order]


@dataclass
class NmfAdapter:
    model: baselines.NmfModel
    name: str = "nmf"

    def rank(self, sample: RecommendationSample, corpus: Corpus) -> list[str]:
        query = baselines.sample_query_row(sample, corpus.modules)
        scores = baselines.nmf_scores(self.model, query)
        order = rank_candidates(self.model.candidates, scores)
        return [self.model.candidates[i] for i in order]


@dataclass
class EvaluationResult:
    model: str
    n_samples: int
    means: dict[int, tuple[float, float, float]]  # k -> (precision, recall, map)
    per_sample: list[dict] = field(default_factory=list, repr=False)

    def rows(self, dataset: str, fold: str) -> list[MetricRow]:
        return [
            MetricRow(
                dataset=dataset,
                model=self.model,
                k=k,
                precision=p,
                recall=r,
                map=m,
                fold=fold,
            )
            for k, (p, r, m) in sorted(self.means.items())
        ]


def evaluate_model(
    adapter: ModelAdapter,
    test_alert_ids: list[str],
    corpus: Corpus,
    ks: tuple[int, ...],
    rng: np.random.Generator,
    keep_per_sample: bool = False,
) -> EvaluationResult:
    if not test_alert_ids:
        raise ValueError("empty test set")
    samples = generate_epoch(
        test_alert_ids, corpus.mapping, corpus.playbooks, corpus.modules, rng
    )
    sums = {k: np.zeros(3) for k in ks}
    per_sample = []
    for s in samples:
        ranking = adapter.rank(s, corpus)
        relevant = s.relevant_candidates(corpus.modules)
        record = {"alert": s.alert_rule_id, "ranking": ranking, "relevant": sorted(relevant)}
        for k in ks:
            p = precision_at_k(ranking, relevant, k)
            r = recall_at_k(ranking, relevant, k)
            m = average_precision_at_k(ranking, relevant, k)
            sums[k] += (p, r, m)
        if keep_per_sample:
            per_sample.append(record)
    n = len(samples)
    means = {k: tuple(sums[k] / n) for k in ks}
    return EvaluationResult(
        model=adapter.name, n_samples=n, means=means, per_sample=per_sample
    )


def _fold_seed(seed: int, fold: int) -> int:
    return seed * 1000 + fold


def train_fold_adapters(
    corpus: Corpus,
    train_ids: list[str],
    hp: Hyperparameters,
    models: tuple[str, ...],
    seed: int,
) -> tuple[list[ModelAdapter], dict]:
    """All requested adapters for one training side.

    The autoencoder and module table are variant-independent, so the two
    scorer variants share them (training is deterministic under the seed).
    """
    adapters: list[ModelAdapter] = []
    logs: dict = {}
    variant_of = {"icsecure-with": "with_attributes", "icsecure-without": "without_attributes"}
    shared = None
    for name in models:
        if name in variant_of:
            rec, log = train_stack(
                corpus, train_ids, hp, variant_of[name], seed, shared=shared
            )
            shared = (rec.autoencoder, rec.module_table)
            adapters.append(RecommenderAdapter(recommender=rec, name=name))
            logs[name] = log.to_json()
        elif name == "frequency":
            rng = np.random.default_rng([seed, 101])
            model = baselines.train_frequency(
                train_ids, corpus, rng, epochs=hp.frequency_epochs
            )
            adapters.append(FrequencyAdapter(model=model))
            logs[name] = {"counts_total": float(model.counts.sum())}
        elif name == "nmf":
            rng = np.random.default_rng([seed, 202])
            model = baselines.train_nmf(
                train_ids,
                corpus,
                rng,
                rank=hp.nmf_rank,
                iterations=hp.nmf_iterations,
                projection_iterations=hp.nmf_projection_iterations,
            )
            adapters.append(NmfAdapter(model=model))
            logs[name] = {
                "rank": model.rank,
                "final_objective": model.objective_history[-1],
                "w_shape": list(model.w.shape),
                "h_shape": list(model.h.shape),
            }
        else:
            raise ValueError(f"unknown model {name!r}")
    return adapters, logs


def run_cross_validation(
    corpus: Corpus,
    fold_plan: FoldPlan,
    hp: Hyperparameters,
    models: tuple[str, ...] = MODEL_NAMES,
    ks: tuple[int, ...] = DEFAULT_KS,
    seed: int = 0,
    dataset: str = "synthetic",
    keep_per_sample: bool = False,
) -> dict:
    folds_out = []
    all_rows: dict[tuple[str, int], list[MetricRow]] = {}
    per_sample_dump = []
    for fold in range(len(fold_plan.folds)):
        fold_seed = _fold_seed(seed, fold)
        train_ids = fold_plan.train_alerts(fold)
        test_ids = fold_plan.test_alerts(fold)
        t0 = time.perf_counter()
        adapters, logs = train_fold_adapters(corpus, train_ids, hp, models, fold_seed)
        rows = []
        for adapter in adapters:
            rng = np.random.default_rng([fold_seed, 777])
            result = evaluate_model(
                adapter, test_ids, corpus, ks, rng, keep_per_sample=keep_per_sample
            )
            rows.extend(result.rows(dataset, fold=str(fold)))
            for rec in result.per_sample:
                per_sample_dump.append({"fold": fold, "model": adapter.name, **rec})
            for row in result.rows(dataset, fold=str(fold)):
                all_rows.setdefault((row.model, row.k), []).append(row)
        folds_out.append(
            {
                "fold": fold,
                "n_train_alerts": len(train_ids),
                "n_test_alerts": len(test_ids),
                "seconds": round(time.perf_counter() - t0, 3),
                "training": logs,
                "rows": [r.as_dict() for r in rows],
            }
        )

    means = []
    for (model, k), rows in sorted(all_rows.items()):
        means.append(
            MetricRow(
                dataset=dataset,
                model=model,
                k=k,
                precision=float(np.mean([r.precision for r in rows])),
                recall=float(np.mean([r.recall for r in rows])),
                map=float(np.mean([r.map for r in rows])),
                fold="mean",
            ).as_dict()
        )
    report = {
        "dataset": dataset,
        "seed": seed,
        "ks": list(ks),
        "models": list(models),
        "unique_alerts": list(fold_plan.unique_alerts),
        "folds": folds_out,
        "means": means,
    }
    if keep_per_sample:
        report["per_sample"] = per_sample_dump
    return report


def write_report(report: dict, out_dir: str | Path) -> None:
    """report.json plus a flat report.csv; optional samples.jsonl dump."""
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    slim = {k: v for k, v in report.items() if k != "per_sample"}
    (d / "report.json").write_text(json.dumps(slim, indent=1) + "\n", encoding="utf-8")
    with open(d / "report.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["dataset", "model", "fold", "k", "precision", "recall", "map"]
        )
        writer.writeheader()
        for fold in report["folds"]:
            for row in fold["rows"]:
                writer.writerow(row)
        for row in report["means"]:
            writer.writerow(row)
    if "per_sample" in report:
        with open(d / "samples.jsonl", "w", encoding="utf-8") as fh:
            for rec in report["per_sample"]:
                fh.write(json.dumps(rec) + "\n")
