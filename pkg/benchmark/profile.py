"""
Profile module for the benchmark harness.
Contains the performance-profile computation over (problem, variant) oracle counts.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from cubic_newton.errors import EmptyInput

# Setup logging
logger = logging.getLogger(__name__)

# x = 0, 0.05, ..., 10
PROFILE_GRID = np.linspace(0.0, 10.0, 201)

CountKey = Tuple[str, str]


@dataclass(eq=False)
class ProfileTable:
    """Per-problem ratios and the per-variant profile curves.

    ``rows`` keeps the raw counts (None marks a run that did not finish);
    ``curve[v][i]`` is the fraction of profiled problems with log2 ratio <= grid[i].
    """
    problems: List[str]
    variants: List[str]
    rows: Dict[CountKey, Optional[float]]
    ratios: Dict[CountKey, float]
    grid: np.ndarray
    curve: Dict[str, np.ndarray]
    excluded: List[str] = field(default_factory=list)

    def curve_at(self, variant: str, x: float) -> float:
        """Fraction of problems solved within a factor 2^x of the best."""
        logs = [np.log2(self.ratios[(p, variant)]) for p in self.problems]
        return sum(1 for v in logs if v <= x) / len(self.problems)


def performance_profile(counts: Mapping[CountKey, Optional[float]],
                        grid: Optional[np.ndarray] = None) -> ProfileTable:
    """Build the profile; problems with no finisher are dropped with a warning."""
    if not counts:
        raise EmptyInput("no counts to profile")
    grid = PROFILE_GRID if grid is None else np.asarray(grid, dtype=float)
    problems = sorted({p for p, _ in counts})
    variants = sorted({v for _, v in counts})

    kept: List[str] = []
    excluded: List[str] = []
    ratios: Dict[CountKey, float] = {}
    for problem in problems:
        finished = {}
        for variant in variants:
            count = counts.get((problem, variant))
            if count is None or not np.isfinite(count):
                continue
            if count <= 0:
                raise ValueError(f"count for ({problem}, {variant}) must be positive, got {count}")
            finished[variant] = float(count)
        if not finished:
            logger.warning(f"⚠️ no variant finished '{problem}', dropping it from the profile")
            excluded.append(problem)
            continue
        kept.append(problem)
        best = min(finished.values())
        for variant in variants:
            ratios[(problem, variant)] = finished[variant] / best if variant in finished else np.inf

    if not kept:
        raise EmptyInput("every problem was dropped: no variant finished any of them")

    curve = {}
    for variant in variants:
        logs = np.array([np.log2(ratios[(p, variant)]) for p in kept])
        curve[variant] = np.array([np.count_nonzero(logs <= x) for x in grid], dtype=float) / len(kept)

    return ProfileTable(problems=kept, variants=variants, rows=dict(counts), ratios=ratios,
                        grid=grid, curve=curve, excluded=excluded)
