"""Run-level evaluation: overlap, path length and workload balance."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


@dataclass
class CoverageLedger:
    # one boolean raster per agent: cells that agent observed
    sensed: list[np.ndarray]
    masks: object = None

    @property
    def union(self) -> np.ndarray:
        return np.logical_or.reduce(self.sensed)


def overlap_pct(ledger: CoverageLedger) -> float:
    """Percentage of observed cells seen by at least two agents."""
    if len(ledger.sensed) < 2:
        raise InvalidArgument("overlap is undefined for a single agent")
    counts = np.sum(np.stack(ledger.sensed), axis=0)
    seen = np.count_nonzero(counts >= 1)
    if seen == 0:
        return 0.0
    return 100.0 * np.count_nonzero(counts >= 2) / seen


def path_lengths(trajectories) -> list[float]:
    """Per-agent polyline length of time-ordered ``(x, y)`` samples."""
    out = []
    for tr in trajectories:
        a = np.asarray(tr, dtype=np.float64).reshape(-1, 2)
        out.append(float(np.sum(np.hypot(*np.diff(a, axis=0).T))) if len(a) > 1 else 0.0)
    return out


def path_length_total(trajectories) -> tuple[float, list[float]]:
    per = path_lengths(trajectories)
    return float(sum(per)), per


def mean_std(values) -> tuple[float, float]:
    """Mean and population standard deviation."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise InvalidArgument("need at least one value")
    return float(v.mean()), float(v.std(ddof=0))


def workload_balance(areas, paths) -> dict[str, tuple[float, float]]:
    return {"area": mean_std(areas), "path": mean_std(paths)}


def coefficient_of_variation(values) -> float:
    m, s = mean_std(values)
    return s / m if m else math.inf
