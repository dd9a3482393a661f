"""Coalition games over feature subsets.

The characteristic functions measure how far a model trained on a feature
coalition sits above the random-classifier baseline: AUC − 0.50 and
AUPRC − 0.50 for areas, tpr − fpr at a query FPR for ROC slices, and
precision − 0.50 at a query recall for PRC slices.  The empty coalition is
worth 0 by definition and is never evaluated through a model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .curves import (
    PrCurve,
    RocCurve,
    Strategy,
    estimate_precision,
    estimate_tpr,
    pr_from_scores,
    roc_from_scores,
)
from .dataset import Dataset, project
from .errors import (
    DataError,
    NoPositiveLabels,
    SingleClassLabels,
    TooManyFeaturesForExactMode,
)
from .model import train_gnb

EXACT_MODE_CAP = 20

AUC = "auc"
ROC_SLICE = "roc_slice"
AUPRC = "auprc"
PRC_SLICE = "prc_slice"

_AREA_KINDS = (AUC, AUPRC)
_SLICE_KINDS = (ROC_SLICE, PRC_SLICE)
_ROC_KINDS = (AUC, ROC_SLICE)


class DegenerateCurveWarning(UserWarning):
    """A coalition's scores admit no valid curve; its payoff fell back to 0."""


@dataclass(frozen=True)
class Target:
    """What the game measures: an area metric or a curve slice."""

    kind: str
    abscissa: float | None = None

    def __post_init__(self):
        if self.kind not in _AREA_KINDS + _SLICE_KINDS:
            raise DataError(f"unknown target kind {self.kind!r}")
        if self.kind in _SLICE_KINDS and self.abscissa is not None:
            if not 0.0 <= self.abscissa <= 1.0:
                raise DataError(f"slice abscissa must lie in [0,1], got {self.abscissa}")
        if self.kind in _AREA_KINDS and self.abscissa is not None:
            raise DataError(f"{self.kind} target takes no abscissa")

    @classmethod
    def auc(cls) -> "Target":
        return cls(AUC)

    @classmethod
    def auprc(cls) -> "Target":
        return cls(AUPRC)

    @classmethod
    def roc_slice(cls, fpr: float) -> "Target":
        return cls(ROC_SLICE, float(fpr))

    @classmethod
    def prc_slice(cls, recall: float) -> "Target":
        return cls(PRC_SLICE, float(recall))

    @property
    def is_slice(self) -> bool:
        return self.kind in _SLICE_KINDS

    def with_abscissa(self, q: float) -> "Target":
        if not self.is_slice:
            raise DataError(f"{self.kind} target takes no abscissa")
        return Target(self.kind, float(q))

    def baseline(self) -> float:
        """Random-classifier value of the metric (what payoffs are relative to)."""
        if self.kind == ROC_SLICE:
            if self.abscissa is None:
                raise DataError("ROC slice target needs an abscissa")
            return self.abscissa
        return 0.5

    def describe(self) -> str:
        if self.kind == AUC:
            return "AUC"
        if self.kind == AUPRC:
            return "AUPRC"
        if self.kind == ROC_SLICE:
            return f"TPR at FPR={self.abscissa:g}"
        return f"precision at recall={self.abscissa:g}"


@dataclass(frozen=True)
class Coalition:
    """Subset of feature indices packed into a bitmask."""

    mask: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= 63:
            raise DataError(f"coalition arity must lie in [0, 63], got {self.n}")
        if not 0 <= self.mask < (1 << self.n):
            raise DataError(f"mask {self.mask:#x} has bits beyond arity {self.n}")

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @classmethod
    def full(cls, n: int) -> "Coalition":
        return cls((1 << n) - 1, n)

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "Coalition":
        mask = 0
        for i in indices:
            if not 0 <= i < n:
                raise DataError(f"feature index {i} out of range for arity {n}")
            mask |= 1 << i
        return cls(mask, n)

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    def add(self, i: int) -> "Coalition":
        return Coalition(self.mask | (1 << i), self.n)

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __len__(self) -> int:
        return self.mask.bit_count()


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A characteristic function bound to a train/test split."""

    target: Target
    train: Dataset
    test: Dataset
    strategy: Strategy | None = None
    fit: Callable[[Dataset], object] = train_gnb

    def __post_init__(self):
        if self.train.feature_names != self.test.feature_names:
            raise DataError("train and test must share feature arity and names")
        if self.target.is_slice and self.strategy is None:
            raise DataError(f"{self.target.kind} games require a strategy")

    @property
    def n(self) -> int:
        return self.train.n_features


@dataclass(frozen=True, eq=False)
class PayoffTable:
    """Payoffs for coalitions of one game, ∅ stored analytically as 0."""

    n: int
    payoffs: Mapping[int, float]
    target: Target
    strategy: Strategy | None
    feature_names: tuple[str, ...]
    trainings: int

    def __post_init__(self):
        if 0 not in self.payoffs or self.payoffs[0] != 0.0:
            raise DataError("payoff table must store υ(∅) == 0")
        for mask, value in self.payoffs.items():
            if not 0 <= mask < (1 << self.n):
                raise DataError(f"mask {mask:#x} out of range for arity {self.n}")
            if not np.isfinite(value):
                raise DataError(f"payoff for mask {mask:#x} is not finite")

    def __getitem__(self, c: int | Coalition) -> float:
        mask = c.mask if isinstance(c, Coalition) else int(c)
        return self.payoffs[mask]

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def is_complete(self) -> bool:
        return len(self.payoffs) == 1 << self.n

    def rows(self) -> list[tuple[int, str, float]]:
        """(bitmask, member names joined by '+', payoff) per coalition."""
        out = []
        for mask in sorted(self.payoffs):
            members = "+".join(
                self.feature_names[i] for i in range(self.n) if mask >> i & 1
            )
            out.append((mask, members, self.payoffs[mask]))
        return out


class PayoffEngine:
    """Trains at most one model per coalition and serves memoized payoffs.

    Curves are cached per coalition, so slice games over a grid reuse every
    trained model and only repeat the cheap estimation step.
    """

    def __init__(self, spec: GameSpec):
        self.spec = spec
        self._curves: dict[int, RocCurve | PrCurve | None] = {}
        self._payoffs: dict[tuple[int, float | None], float] = {}
        self.trainings = 0

    def curve(self, mask: int) -> RocCurve | PrCurve | None:
        if mask not in self._curves:
            self._curves[mask] = self._build_curve(mask)
        return self._curves[mask]

    def _build_curve(self, mask: int):
        spec = self.spec
        indices = [i for i in range(spec.n) if mask >> i & 1]
        train = project(spec.train, indices)
        test = project(spec.test, indices)
        scorer = spec.fit(train)
        self.trainings += 1
        scores = np.asarray(scorer.score(test), dtype=np.float64)
        try:
            if not np.isfinite(scores).all():
                raise SingleClassLabels("scores contain non-finite values")
            if spec.target.kind in _ROC_KINDS:
                return roc_from_scores(scores, test.labels)
            return pr_from_scores(scores, test.labels)
        except (SingleClassLabels, NoPositiveLabels) as exc:
            warnings.warn(
                f"coalition {mask:#x} has no valid curve ({exc}); payoff set to 0",
                DegenerateCurveWarning,
                stacklevel=3,
            )
            return None

    def payoff(self, mask: int, abscissa: float | None = None) -> float:
        """υ(coalition) for this engine's target, at an optional override abscissa."""
        if mask == 0:
            return 0.0
        if abscissa is None:
            abscissa = self.spec.target.abscissa
        key = (mask, abscissa)
        if key not in self._payoffs:
            self._payoffs[key] = self._compute(mask, abscissa)
        return self._payoffs[key]

    def _compute(self, mask: int, abscissa: float | None) -> float:
        curve = self.curve(mask)
        if curve is None:
            return 0.0
        kind = self.spec.target.kind
        if kind == AUC:
            return curve.auc - 0.5
        if kind == AUPRC:
            return curve.auprc - 0.5
        if abscissa is None:
            raise DataError(f"{kind} game needs an abscissa")
        if kind == ROC_SLICE:
            return estimate_tpr(curve, abscissa, self.spec.strategy) - abscissa
        return estimate_precision(curve, abscissa, self.spec.strategy) - 0.5


def payoff(spec: GameSpec, c: Coalition) -> float:
    """One-shot payoff of a single coalition."""
    if c.n != spec.n:
        raise DataError(f"coalition arity {c.n} != game arity {spec.n}")
    return PayoffEngine(spec).payoff(c.mask)


def evaluate_all(spec: GameSpec, cap: int = EXACT_MODE_CAP) -> PayoffTable:
    """Payoffs for every one of the 2^n coalitions."""
    n = spec.n
    if n > cap:
        raise TooManyFeaturesForExactMode(n, cap)
    if spec.target.is_slice and spec.target.abscissa is None:
        raise DataError(f"{spec.target.kind} game needs an abscissa")
    engine = PayoffEngine(spec)
    payoffs = {mask: engine.payoff(mask) for mask in range(1 << n)}
    return PayoffTable(
        n, payoffs, spec.target, spec.strategy, spec.train.feature_names,
        engine.trainings,
    )


def evaluate_slices(
    spec: GameSpec, grid: np.ndarray, cap: int = EXACT_MODE_CAP
) -> list[PayoffTable]:
    """One complete payoff table per grid abscissa, sharing all trained models."""
    if not spec.target.is_slice:
        raise DataError(f"evaluate_slices needs a slice target, got {spec.target.kind}")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise DataError("grid must be a non-empty 1-D array")
    if (grid < 0.0).any() or (grid > 1.0).any():
        raise DataError("grid abscissae must lie in [0, 1]")
    n = spec.n
    if n > cap:
        raise TooManyFeaturesForExactMode(n, cap)
    engine = PayoffEngine(spec)
    per_point: list[dict[int, float]] = []
    for q in grid:
        per_point.append({mask: engine.payoff(mask, float(q)) for mask in range(1 << n)})
    return [
        PayoffTable(
            n, payoffs, spec.target.with_abscissa(float(q)), spec.strategy,
            spec.train.feature_names, engine.trainings,
        )
        for q, payoffs in zip(grid, per_point)
    ]
