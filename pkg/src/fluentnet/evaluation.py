"""Metrics, cross-validation splitters, and the ensemble evaluation harness.

ROC accumulation is done in integers (counts of true and false positives per
threshold step), so the trapezoid AUC equals the Mann-Whitney pair-counting
value exactly, not just approximately.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_from_scores(scores: np.ndarray, labels: np.ndarray,
                          threshold: float = 0.5) -> ConfusionCounts:
    """Threshold scores (predicted positive when score >= threshold)."""
    scores, labels = _check_scores(scores, labels)
    pred = scores >= threshold
    pos = labels == 1
    return ConfusionCounts(
        tp=int((pred & pos).sum()),
        fp=int((pred & ~pos).sum()),
        tn=int((~pred & ~pos).sum()),
        fn=int((~pred & pos).sum()),
    )


def miss_rate(counts: ConfusionCounts) -> float:
    """Fraction of true positives the detector failed to flag (1 - recall)."""
    d = counts.tp + counts.fn
    if d == 0:
        raise ValueError("miss rate needs at least one positive example")
    return counts.fn / d


def recall(counts: ConfusionCounts) -> float:
    d = counts.tp + counts.fn
    if d == 0:
        raise ValueError("recall needs at least one positive example")
    return counts.tp / d


def accuracy(counts: ConfusionCounts) -> float:
    if counts.total == 0:
        raise ValueError("accuracy needs at least one example")
    return (counts.tp + counts.tn) / counts.total


def _check_scores(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise ValueError("scores and labels must be equal-length 1-D arrays")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return scores, labels.astype(np.int64)


def roc_curve(scores: np.ndarray,
              labels: np.ndarray) -> tuple[list[tuple[float, float, float]], float]:
    """Points (threshold, fpr, tpr) at every distinct score, plus AUC.

    The sweep starts above the highest score (point (inf, 0, 0)) and lowers
    the threshold through each distinct value, so fpr is non-decreasing and
    the last point is (min score, 1, 1). True/false positive counts stay
    integers until the final division, which makes the trapezoid AUC equal
    the Mann-Whitney pair count divided by n_pos * n_neg exactly.
    """
    scores, labels = _check_scores(scores, labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes present")

    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    y_sorted = labels[order]

    points = [(float("inf"), 0.0, 0.0)]
    tp = fp = 0
    auc_twice = 0  # integer accumulation: sum of (dfp) * (tp_prev + tp_new)
    i = 0
    n = scores.size
    while i < n:
        j = i
        while j < n and s_sorted[j] == s_sorted[i]:
            j += 1
        d_tp = int((y_sorted[i:j] == 1).sum())
        d_fp = (j - i) - d_tp
        auc_twice += d_fp * (2 * tp + d_tp)
        tp += d_tp
        fp += d_fp
        points.append((float(s_sorted[i]), fp / n_neg, tp / n_pos))
        i = j
    return points, auc_twice / (2 * n_pos * n_neg)


@dataclass(frozen=True)
class Split:
    name: str
    train_ids: tuple[int, ...]
    test_ids: tuple[int, ...]

    def __post_init__(self):
        if set(self.train_ids) & set(self.test_ids):
            raise ValueError(f"split {self.name!r} has overlapping train/test ids")


def subject_of(source: str) -> str:
    """Subject identity of a recording: the stem before the first dash."""
    return source.split("-")[0]


def loso_splits(sources: list[str]) -> list[Split]:
    """One split per subject; that subject's clips form the whole test set."""
    subjects = np.array([subject_of(s) for s in sources])
    unique = sorted(set(subjects.tolist()))
    if len(unique) < 2:
        raise ValueError("leave-one-subject-out needs at least 2 subjects")
    splits = []
    all_ids = np.arange(len(sources))
    for subj in unique:
        test = subjects == subj
        splits.append(Split(name=f"subject-{subj}",
                            train_ids=tuple(all_ids[~test].tolist()),
                            test_ids=tuple(all_ids[test].tolist())))
    return splits


def kfold_splits(strata: list, k: int, rng: np.random.Generator) -> list[Split]:
    """Stratified k-fold: each fold holds ~1/k of every stratum.

    ``strata`` assigns each clip a stratum key (e.g. "S:1" for a positive
    clip of type S). Within each stratum the clips are shuffled by ``rng``
    and dealt round-robin, so fold sizes per stratum differ by at most one.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    keys = np.array([str(s) for s in strata])
    test_sets: list[list[int]] = [[] for _ in range(k)]
    for key in sorted(set(keys.tolist())):
        members = np.flatnonzero(keys == key)
        if members.size < k:
            raise ValueError(f"stratum {key!r} has {members.size} members, needs >= {k}")
        dealt = rng.permutation(members)
        for fold in range(k):
            test_sets[fold].extend(dealt[fold::k].tolist())
    all_ids = set(range(len(keys)))
    splits = []
    for fold in range(k):
        test = sorted(test_sets[fold])
        train = sorted(all_ids - set(test))
        splits.append(Split(name=f"fold{fold + 1:02d}",
                            train_ids=tuple(train), test_ids=tuple(test)))
    return splits


def ensemble_evaluate(fold_scores: dict[str, list[tuple[str, np.ndarray, np.ndarray]]],
                      threshold: float = 0.5) -> dict:
    """Summarize per-type detector scores across validation splits.

    ``fold_scores`` maps each disfluency type to a list of
    (split_name, scores, labels) triples for that split's test clips.
    Returns {"rows", "summary", "roc"}: per-split rows (miss_rate is None
    when a test fold holds no positives), per-type averages over splits
    (unweighted; miss_rate averaged over folds that had positives) with a
    final overall row, and per-type ROC on the splits' pooled scores.
    """
    if not fold_scores:
        raise ValueError("no detector scores to evaluate")
    rows = []
    summary = []
    roc: dict[str, tuple[list, float]] = {}
    for dtype in sorted(fold_scores):
        triples = fold_scores[dtype]
        if not triples:
            raise ValueError(f"no splits for type {dtype!r}")
        fold_mr, fold_acc = [], []
        pooled_scores, pooled_labels = [], []
        for split_name, scores, labels in triples:
            counts = confusion_from_scores(scores, labels, threshold)
            mr = miss_rate(counts) if counts.tp + counts.fn > 0 else None
            acc = accuracy(counts)
            rows.append({"dtype": dtype, "split": split_name,
                         "miss_rate": mr, "accuracy": acc})
            if mr is not None:
                fold_mr.append(mr)
            fold_acc.append(acc)
            pooled_scores.append(np.asarray(scores, dtype=np.float64))
            pooled_labels.append(np.asarray(labels))
        if not fold_mr:
            raise ValueError(f"no split had positive examples for type {dtype!r}")
        summary.append({"dtype": dtype,
                        "miss_rate": sum(fold_mr) / len(fold_mr),
                        "accuracy": sum(fold_acc) / len(fold_acc)})
        roc[dtype] = roc_curve(np.concatenate(pooled_scores),
                               np.concatenate(pooled_labels))
    summary.append({"dtype": "ALL",
                    "miss_rate": sum(s["miss_rate"] for s in summary) / len(summary),
                    "accuracy": sum(s["accuracy"] for s in summary) / len(summary)})
    return {"rows": rows, "summary": summary, "roc": roc}


def write_report_csvs(out_dir: str | Path, report: dict) -> list[Path]:
    """Write report.csv, summary.csv, and one roc_<dtype>.csv per type.

    report.csv: dtype, split, miss_rate, accuracy (fractions; empty miss_rate
    when the fold had no positives). summary.csv: dtype, miss_rate, accuracy
    including the ALL row. roc files: threshold, fpr, tpr rows in sweep order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / "report.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dtype", "split", "miss_rate", "accuracy"])
        for row in report["rows"]:
            mr = "" if row["miss_rate"] is None else f"{row['miss_rate']:.6f}"
            writer.writerow([row["dtype"], row["split"], mr, f"{row['accuracy']:.6f}"])
    written.append(path)

    path = out_dir / "summary.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dtype", "miss_rate", "accuracy"])
        for row in report["summary"]:
            writer.writerow([row["dtype"], f"{row['miss_rate']:.6f}",
                             f"{row['accuracy']:.6f}"])
    written.append(path)

    for dtype, (points, auc) in report["roc"].items():
        path = out_dir / f"roc_{dtype}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["threshold", "fpr", "tpr"])
            for thr, fpr, tpr in points:
                writer.writerow([repr(thr), f"{fpr:.6f}", f"{tpr:.6f}"])
        written.append(path)
    return written
