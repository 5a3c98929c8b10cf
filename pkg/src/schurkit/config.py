"""Central tolerance defaults shared by every module."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

MACHINE_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class RankTolerance:
    """Singular values at or below ``max(rel * sigma_max * max(rows, cols), abs)`` count as zero."""

    rel: float = MACHINE_EPS
    abs: float = 1e-12

    def threshold(self, sigma_max: float, shape: tuple[int, int]) -> float:
        return max(self.rel * sigma_max * max(shape), self.abs)


@dataclass(frozen=True)
class Tolerances:
    range: float = 1e-8
    douglas: float = 1e-8
    conv: float = 1e-6
    rank_rel: float = MACHINE_EPS
    rank_abs: float = 1e-12

    @property
    def rank(self) -> RankTolerance:
        return RankTolerance(self.rank_rel, self.rank_abs)

    def replace(self, **overrides) -> "Tolerances":
        return dataclasses.replace(self, **overrides)

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


DEFAULT = Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return DEFAULT if tol is None else tol
