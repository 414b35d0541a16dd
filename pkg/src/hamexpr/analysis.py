"""Correlation coefficients, mutual information and per-class aggregation."""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class PairedSeries:
    x: np.ndarray
    y: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise AnalysisError("x and y must be 1-D and of equal length")
        if x.size < 3:
            raise AnalysisError("need at least 3 paired values")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise AnalysisError("non-finite values in series")
        if self.labels and len(self.labels) != x.size:
            raise AnalysisError("labels do not match series length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", tuple(self.labels))


@dataclass(frozen=True)
class CorrelationReport:
    pearson: float
    spearman: float
    kendall: float
    mutual_info: float
    n: int
    bins: int


def _pair(x, y, min_len: int = 3):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("x and y must be 1-D and of equal length")
    if x.size < min_len:
        raise AnalysisError(f"need at least {min_len} paired values, got {x.size}")
    return x, y


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        raise AnalysisError("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson(x, y) -> float:
    return _pearson(*_pair(x, y))


def spearman(x, y) -> float:
    x, y = _pair(x, y)
    return _pearson(stats.rankdata(x), stats.rankdata(y))


def kendall_tau(x, y) -> float:
    """Tie-corrected tau-b."""
    x, y = _pair(x, y)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise AnalysisError("all-tied input")
    return float(stats.kendalltau(x, y, variant="b").statistic)


def default_bins(n: int) -> int:
    return max(1, math.ceil(math.sqrt(n / 5)))


def mutual_information(x, y, bins: int | None = None) -> float:
    """Plug-in estimate (nats) on an equal-width 2-D histogram."""
    x, y = _pair(x, y, min_len=10)
    b = default_bins(x.size) if bins is None else int(bins)
    if b < 1:
        raise AnalysisError("bins must be >= 1")
    joint, _, _ = np.histogram2d(x, y, bins=b)
    p = joint / joint.sum()
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    nz = p > 0
    outer = np.outer(px, py)
    mi = math.fsum((p[nz] * np.log(p[nz] / outer[nz])).tolist())
    return max(mi, 0.0)


def correlation_report(x, y, bins: int | None = None) -> CorrelationReport:
    x, y = _pair(x, y)
    mi = mutual_information(x, y, bins) if x.size >= 10 else float("nan")
    return CorrelationReport(
        pearson(x, y),
        spearman(x, y),
        kendall_tau(x, y),
        mi,
        int(x.size),
        default_bins(x.size) if bins is None else int(bins),
    )


COEFFICIENTS = ("pearson", "spearman", "kendall", "mutual_info")


@dataclass(frozen=True)
class ClassAggregate:
    problem_class: str
    subclass: str
    n_instances: int
    means: dict
    stds: dict


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return float("nan"), float("nan")
    mean = math.fsum(v) / v.size
    return mean, math.sqrt(math.fsum((v - mean) ** 2) / v.size)


def aggregate_by_class(reports: Sequence[tuple[object, CorrelationReport]]) -> list[ClassAggregate]:
    """Per-class mean and population standard deviation of every coefficient.

    Heisenberg instances are split by ground-state kind through ``Hamiltonian.subclass``.
    Classes appear in first-seen order.
    """
    groups: OrderedDict[str, list] = OrderedDict()
    parents = {}
    for h, rep in reports:
        key = h.subclass
        parents[key] = h.problem_class.value
        groups.setdefault(key, []).append(rep)
    if not groups:
        raise AnalysisError("no reports to aggregate")
    out = []
    for key, reps in groups.items():
        means, stds = {}, {}
        for c in COEFFICIENTS:
            means[c], stds[c] = _mean_std([getattr(r, c) for r in reps])
        out.append(ClassAggregate(parents[key], key, len(reps), means, stds))
    return out


@dataclass(frozen=True)
class NoisePoint:
    err: float
    report: CorrelationReport
    label: str = ""


def noise_sweep(
    profiles: Sequence[tuple[str, float]],
    pipeline: Callable[[int], tuple[Sequence[float], Sequence[float]]],
    bins: int | None = None,
) -> list[NoisePoint]:
    """Pair each profile's Err with the correlation report of its pipeline run.

    ``profiles`` is a list of (label, Err) ordered by Err; ``pipeline(i)`` returns the
    (expressibility, A.R.) series obtained under profile ``i``.
    """
    errs = [e for _, e in profiles]
    if any(b < a for a, b in zip(errs, errs[1:])):
        raise AnalysisError("profiles must be ordered by Err")
    points = []
    for i, (label, err) in enumerate(profiles):
        x, y = pipeline(i)
        points.append(NoisePoint(err, correlation_report(x, y, bins), label))
    return points


def bell_shape_interior(x: Sequence[float], y: Sequence[float]) -> bool:
    """True when the argmax of y sits strictly inside the observed x range."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    best = x[int(np.argmax(y))]
    return bool(x.min() < best < x.max())
