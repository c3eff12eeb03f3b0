"""Link-prediction and node-classification protocols at desk scale.

Link prediction: random 80/10/10 edge split, negatives sampled uniformly
from verified non-edges, six edge-feature strategies scored by ROC-AUC.
Dot and cosine rank pairs directly; the element-wise strategies train a
logistic regression on the validation examples and score the test set.

Classification: one-vs-rest L2-regularized logistic regression on a seeded
fraction of labeled nodes, predicting for each node the top-K classes by
sigmoid score where K is the node's true label count, reported as micro
and macro F1. All outputs are pure functions of (inputs, seeds).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import t as student_t

from .embedder import EmbedConfig, embed_graph
from .graphio import Graph, GraphHandle

STRATEGIES = ("dot", "cosine", "hadamard", "average", "l1", "l2")
SCALAR_STRATEGIES = frozenset({"dot", "cosine"})

DEFAULT_FRACTIONS = (0.8, 0.1, 0.1)
DEFAULT_L2 = 1.0
REPORT_VERSION = 1


@dataclass
class EdgeSplit:
    """Train graph plus positive/negative validation and test edge sets.

    Positives are disjoint from the train edges; negatives are verified
    non-edges of the full graph, one per positive in each partition.
    """

    train_graph: Graph
    val_pos: np.ndarray
    val_neg: np.ndarray
    test_pos: np.ndarray
    test_neg: np.ndarray
    seed: int


def split_edges(
    graph: Graph,
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
) -> EdgeSplit:
    """Uniformly split the unique edges into train/validation/test.

    The train graph keeps all nodes (some possibly isolated) and retains any
    self-loops; loops are never candidates for held-out positives.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError("fractions must be three positive values")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")
    edges = graph.undirected_edges(include_loops=False)
    m = len(edges)
    if m < 10:
        raise ValueError(f"need at least 10 edges to split, got {m}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    n_val = int(round(fractions[1] * m))
    n_test = int(round(fractions[2] * m))
    if m - n_val - n_test < 1:
        raise ValueError("train fraction leaves no edges")
    val_pos = edges[perm[:n_val]]
    test_pos = edges[perm[n_val : n_val + n_test]]
    train_edges = edges[perm[n_val + n_test :]]

    all_pairs = graph.undirected_edges(include_loops=True)
    loops = all_pairs[all_pairs[:, 0] == all_pairs[:, 1]]
    train_graph = Graph.from_edges(
        np.vstack((train_edges, loops)), node_count=graph.node_count
    )
    negatives = _sample_non_edges(graph, n_val + n_test, rng)
    return EdgeSplit(
        train_graph=train_graph,
        val_pos=val_pos,
        val_neg=negatives[:n_val],
        test_pos=test_pos,
        test_neg=negatives[n_val:],
        seed=seed,
    )


def _sample_non_edges(graph: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform rejection sampling of distinct non-edges (u < v)."""
    n = graph.node_count
    if n < 2:
        raise ValueError("need at least 2 nodes to sample non-edges")
    chosen: set[tuple[int, int]] = set()
    out = np.empty((count, 2), dtype=np.int64)
    found = 0
    attempts = 0
    limit = 200 * count + 10000
    while found < count:
        batch = rng.integers(0, n, size=(max(64, 2 * (count - found)), 2))
        for u, v in batch.tolist():
            attempts += 1
            if u == v:
                continue
            a, b = (u, v) if u < v else (v, u)
            if (a, b) in chosen or graph.has_edge(a, b):
                continue
            chosen.add((a, b))
            out[found] = (a, b)
            found += 1
            if found == count:
                break
        if attempts > limit:
            raise ValueError("graph too dense to sample the requested non-edges")
    return out


def edge_feature(w_u: np.ndarray, w_v: np.ndarray, strategy: str):
    """Combine two node embeddings into an edge score or feature vector."""
    w_u = np.asarray(w_u, dtype=np.float64)
    w_v = np.asarray(w_v, dtype=np.float64)
    if w_u.shape != w_v.shape:
        raise ValueError(f"dimension mismatch: {w_u.shape} vs {w_v.shape}")
    if strategy == "dot":
        return float(w_u @ w_v)
    if strategy == "cosine":
        norm = float(np.linalg.norm(w_u) * np.linalg.norm(w_v))
        return float(w_u @ w_v) / norm if norm > 0.0 else 0.0
    if strategy == "hadamard":
        return w_u * w_v
    if strategy == "average":
        return 0.5 * (w_u + w_v)
    if strategy == "l1":
        return np.abs(w_u - w_v)
    if strategy == "l2":
        return (w_u - w_v) * (w_u - w_v)
    raise ValueError(f"unknown strategy {strategy!r}")


def _pair_scores(matrix: np.ndarray, pairs: np.ndarray, strategy: str) -> np.ndarray:
    wu = matrix[pairs[:, 0]]
    wv = matrix[pairs[:, 1]]
    dots = np.einsum("ij,ij->i", wu, wv)
    if strategy == "dot":
        return dots
    norms = np.linalg.norm(wu, axis=1) * np.linalg.norm(wv, axis=1)
    return np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0.0)


def _pair_features(matrix: np.ndarray, pairs: np.ndarray, strategy: str) -> np.ndarray:
    wu = matrix[pairs[:, 0]]
    wv = matrix[pairs[:, 1]]
    if strategy == "hadamard":
        return wu * wv
    if strategy == "average":
        return 0.5 * (wu + wv)
    if strategy == "l1":
        return np.abs(wu - wv)
    if strategy == "l2":
        return (wu - wv) * (wu - wv)
    raise ValueError(f"unknown vector strategy {strategy!r}")


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Rank-based ROC-AUC; tied scores contribute 1/2 (Mann-Whitney)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC requires both classes")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    mean_rank = starts + (counts + 1) / 2.0  # 1-based average rank per value
    ranks = mean_rank[inverse]
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass
class LogRegModel:
    """L2-regularized logistic regression trained by full-batch descent."""

    weights: np.ndarray
    bias: float
    l2: float
    iterations: int
    final_loss: float
    converged: bool

    def decision(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return expit(self.decision(features))


def _logreg_loss_grad(
    wb: np.ndarray, features: np.ndarray, targets: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Summed logistic loss with ridge penalty on the weights (not the bias)."""
    w, b = wb[:-1], wb[-1]
    z = features @ w + b
    loss = float(np.logaddexp(0.0, z).sum() - targets @ z + 0.5 * l2 * (w @ w))
    delta = expit(z) - targets
    grad = np.empty_like(wb)
    grad[:-1] = features.T @ delta + l2 * w
    grad[-1] = delta.sum()
    return loss, grad


def train_logreg(
    features: np.ndarray,
    labels: Sequence[int],
    l2: float = DEFAULT_L2,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> LogRegModel:
    """Gradient descent with Armijo backtracking until the gradient is tiny.

    Starts from zero weights, so the result is deterministic; ``seed`` is
    accepted for interface parity but the convex objective does not need it.
    """
    del seed
    features = np.asarray(features, dtype=np.float64)
    targets = np.asarray(labels, dtype=np.float64)
    if features.ndim != 2 or len(features) != len(targets):
        raise ValueError("features must be 2-d and aligned with labels")
    if len(targets) < 2:
        raise ValueError("need at least 2 examples")
    if targets.min() == targets.max():
        raise ValueError("training data contains a single class")

    wb = np.zeros(features.shape[1] + 1, dtype=np.float64)
    loss, grad = _logreg_loss_grad(wb, features, targets, l2)
    iterations = 0
    converged = False
    while iterations < max_iter:
        gnorm2 = float(grad @ grad)
        if math.sqrt(gnorm2) < tol:
            converged = True
            break
        step = 1.0
        for _ in range(60):
            trial = wb - step * grad
            trial_loss, trial_grad = _logreg_loss_grad(trial, features, targets, l2)
            if trial_loss <= loss - 1e-4 * step * gnorm2:
                break
            step *= 0.5
        wb, loss, grad = trial, trial_loss, trial_grad
        iterations += 1
    else:
        converged = math.sqrt(float(grad @ grad)) < tol
    return LogRegModel(
        weights=wb[:-1].copy(),
        bias=float(wb[-1]),
        l2=l2,
        iterations=iterations,
        final_loss=loss,
        converged=converged,
    )


@dataclass
class LabelSet:
    """Dense multilabel ground truth: node id -> set of class ids."""

    labels: dict[int, frozenset[int]]
    n_classes: int

    def label_count(self, node: int) -> int:
        return len(self.labels[node])


def load_labels(path: str | os.PathLike, node_count: int | None = None) -> LabelSet:
    """Parse "<node_id> <label_id>" lines; repeated nodes build multilabel sets.

    Label ids are remapped to a dense 0..C-1 range in sorted order so macro
    averages run over classes that actually occur.
    """
    raw: dict[int, set[int]] = {}
    seen: set[int] = set()
    with open(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text[0] in "#%":
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected node and label ids")
            node, label = int(parts[0]), int(parts[1])
            if node < 0 or label < 0:
                raise ValueError(f"{path}:{lineno}: negative id")
            if node_count is not None and node >= node_count:
                raise ValueError(f"{path}:{lineno}: node {node} out of range")
            raw.setdefault(node, set()).add(label)
            seen.add(label)
    remap = {label: i for i, label in enumerate(sorted(seen))}
    labels = {
        node: frozenset(remap[label] for label in node_labels)
        for node, node_labels in raw.items()
    }
    return LabelSet(labels=labels, n_classes=len(remap))


def train_one_vs_rest(
    features: np.ndarray,
    label_sets: Sequence[Iterable[int]],
    n_classes: int,
    l2: float = DEFAULT_L2,
    seed: int = 0,
) -> list[LogRegModel | None]:
    """One binary model per class; classes missing a side of the data get None."""
    models: list[LogRegModel | None] = []
    memberships = [set(s) for s in label_sets]
    for c in range(n_classes):
        y = np.array([1.0 if c in s else 0.0 for s in memberships])
        if 0 < y.sum() < len(y):
            models.append(train_logreg(features, y, l2=l2, seed=seed))
        else:
            models.append(None)
    return models


def _score_matrix(models: Sequence[LogRegModel | None], features: np.ndarray) -> np.ndarray:
    scores = np.zeros((len(features), len(models)), dtype=np.float64)
    for c, model in enumerate(models):
        if model is not None:
            scores[:, c] = model.predict_proba(features)
    return scores


def _topk_labels(scores: np.ndarray, k: int) -> set[int]:
    # Primary key: descending score; secondary: ascending label id.
    order = np.lexsort((np.arange(len(scores)), -scores))
    return set(int(c) for c in order[:k])


def classify_topk(
    models: Sequence[LogRegModel | None], w: np.ndarray, k: int
) -> set[int]:
    """The k classes with the largest sigmoid scores; ties go to lower ids."""
    if k > len(models):
        raise ValueError(f"k={k} exceeds class count {len(models)}")
    scores = _score_matrix(models, np.asarray(w, dtype=np.float64)[None, :])[0]
    return _topk_labels(scores, k)


def f1_scores(
    predicted: Mapping[int, Iterable[int]],
    truth: Mapping[int, Iterable[int]],
    n_classes: int,
) -> tuple[float, float]:
    """(micro F1, macro F1) over aligned per-node label sets.

    Micro pools TP/FP/FN across everything; macro averages per-class F1 over
    all ``n_classes`` classes, counting classes with no truth and no
    predictions as 0.
    """
    if not truth:
        raise ValueError("empty input")
    if set(predicted) != set(truth):
        raise ValueError("predicted and truth node sets differ")
    tp = np.zeros(n_classes, dtype=np.int64)
    fp = np.zeros(n_classes, dtype=np.int64)
    fn = np.zeros(n_classes, dtype=np.int64)
    for node, true_labels in truth.items():
        t = set(true_labels)
        p = set(predicted[node])
        for c in p & t:
            tp[c] += 1
        for c in p - t:
            fp[c] += 1
        for c in t - p:
            fn[c] += 1
    denom = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = float(2 * tp.sum() / denom) if denom else 0.0
    per_class_denom = 2 * tp + fp + fn
    per_class = np.divide(
        2.0 * tp,
        per_class_denom,
        out=np.zeros(n_classes, dtype=np.float64),
        where=per_class_denom > 0,
    )
    return micro, float(per_class.mean())


def confidence_half_width(values: Sequence[float], confidence: float = 0.90) -> float:
    """Student-t half width of the mean's confidence interval."""
    values = np.asarray(values, dtype=np.float64)
    k = len(values)
    if k < 2:
        return 0.0
    quantile = student_t.ppf(0.5 + confidence / 2.0, k - 1)
    return float(quantile * values.std(ddof=1) / math.sqrt(k))


def _summary(values: list[float]) -> dict:
    return {
        "mean": float(np.mean(values)),
        "half_width_90": confidence_half_width(values),
        "values": [float(v) for v in values],
    }


def run_link_prediction(
    graph: Graph,
    config: EmbedConfig,
    strategies: Sequence[str] = STRATEGIES,
    repeats: int = 3,
    seed: int = 0,
    l2: float = DEFAULT_L2,
    workers: int = 1,
) -> dict:
    """Full link-prediction protocol; returns the JSON-ready report."""
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    results: dict[str, dict[str, list[float]]] = {
        s: {"validation": [], "test": []} for s in strategies
    }
    for rep in range(repeats):
        split = split_edges(graph, DEFAULT_FRACTIONS, seed=seed + rep)
        handle = GraphHandle.in_memory(split.train_graph)
        matrix = embed_graph(handle, config, workers=workers).values
        val_pairs = np.vstack((split.val_pos, split.val_neg))
        val_labels = np.concatenate(
            (np.ones(len(split.val_pos)), np.zeros(len(split.val_neg)))
        )
        test_pairs = np.vstack((split.test_pos, split.test_neg))
        test_labels = np.concatenate(
            (np.ones(len(split.test_pos)), np.zeros(len(split.test_neg)))
        )
        for strategy in strategies:
            if strategy in SCALAR_STRATEGIES:
                val_scores = _pair_scores(matrix, val_pairs, strategy)
                test_scores = _pair_scores(matrix, test_pairs, strategy)
            else:
                val_features = _pair_features(matrix, val_pairs, strategy)
                model = train_logreg(val_features, val_labels, l2=l2, seed=seed)
                val_scores = model.predict_proba(val_features)
                test_scores = model.predict_proba(
                    _pair_features(matrix, test_pairs, strategy)
                )
            results[strategy]["validation"].append(roc_auc(val_scores, val_labels))
            results[strategy]["test"].append(roc_auc(test_scores, test_labels))

    strategy_reports = {
        s: {
            "validation_auc": _summary(results[s]["validation"]),
            "test_auc": _summary(results[s]["test"]),
        }
        for s in strategies
    }
    best = max(
        strategies,
        key=lambda s: (strategy_reports[s]["validation_auc"]["mean"],
                       -strategies.index(s)),
    )
    return {
        "report_version": REPORT_VERSION,
        "task": "link_prediction",
        "config": {
            "alpha": config.alpha,
            "epsilon": config.epsilon,
            "dim": config.dim,
            "seed": config.master_seed,
            "l2": l2,
            "repeats": repeats,
            "fractions": list(DEFAULT_FRACTIONS),
        },
        "strategies": strategy_reports,
        "best_on_validation": {
            "strategy": best,
            "test_auc_mean": strategy_reports[best]["test_auc"]["mean"],
        },
    }


def run_classification(
    graph: Graph,
    label_set: LabelSet,
    config: EmbedConfig,
    train_frac: float = 0.1,
    repeats: int = 3,
    seed: int = 0,
    l2: float = DEFAULT_L2,
    workers: int = 1,
) -> dict:
    """Top-K one-vs-rest classification protocol; returns the JSON-ready report."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be in (0, 1)")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    labeled = np.array(sorted(label_set.labels), dtype=np.int64)
    if len(labeled) < 2:
        raise ValueError("need at least 2 labeled nodes")
    handle = GraphHandle.in_memory(graph)
    matrix = embed_graph(handle, config, workers=workers).values

    micro_values: list[float] = []
    macro_values: list[float] = []
    detail = []
    for rep in range(repeats):
        rng = np.random.default_rng([seed, rep])
        perm = rng.permutation(len(labeled))
        n_train = min(max(1, int(round(train_frac * len(labeled)))), len(labeled) - 1)
        train_nodes = labeled[perm[:n_train]]
        test_nodes = labeled[perm[n_train:]]
        models = train_one_vs_rest(
            matrix[train_nodes],
            [label_set.labels[int(v)] for v in train_nodes],
            label_set.n_classes,
            l2=l2,
            seed=seed,
        )
        scores = _score_matrix(models, matrix[test_nodes])
        predicted = {
            int(v): _topk_labels(scores[i], label_set.label_count(int(v)))
            for i, v in enumerate(test_nodes)
        }
        truth = {int(v): label_set.labels[int(v)] for v in test_nodes}
        micro, macro = f1_scores(predicted, truth, label_set.n_classes)
        micro_values.append(micro)
        macro_values.append(macro)
        detail.append(
            {"repeat": rep, "train_nodes": int(n_train), "micro_f1": micro,
             "macro_f1": macro}
        )
    return {
        "report_version": REPORT_VERSION,
        "task": "classification",
        "config": {
            "alpha": config.alpha,
            "epsilon": config.epsilon,
            "dim": config.dim,
            "seed": config.master_seed,
            "l2": l2,
            "repeats": repeats,
            "train_frac": train_frac,
        },
        "micro_f1": _summary(micro_values),
        "macro_f1": _summary(macro_values),
        "repeats_detail": detail,
    }
