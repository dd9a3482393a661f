"""Shapley attribution of game payoffs to features.

`shapley_exact` enumerates a complete payoff table with the classic
combinatorial weights; `shapley_sampled` estimates the same values from
uniformly random feature permutations with memoized payoffs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np

from .curves import trapezoid
from .errors import DataError, GridTooCoarse, IncompleteTable
from .game import GameSpec, PayoffEngine, PayoffTable, Target

EFFICIENCY_TOL = 1e-9
MIN_CONSISTENCY_GRID = 11
_EXHAUSTIVE_ARITY_CAP = 8


@dataclass(frozen=True, eq=False)
class Attribution:
    """Per-feature Shapley values φ_i for one game.

    `total` is the metric the grand coalition achieves; efficiency ties it
    to the baseline: total == baseline + Σφ_i.
    """

    feature_names: tuple[str, ...]
    values: np.ndarray
    baseline: float
    total: float
    target: Target

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.feature_names),):
            raise DataError("one φ per feature name required")
        if abs(self.total - self.baseline - values.sum()) > EFFICIENCY_TOL:
            raise DataError(
                "efficiency violated: total - baseline != sum of attributions"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return len(self.feature_names)

    def by_name(self, name: str) -> float:
        return float(self.values[self.feature_names.index(name)])


@dataclass(frozen=True, eq=False)
class CurveAttribution:
    """Per-feature Shapley series over a grid of slice abscissae."""

    feature_names: tuple[str, ...]
    abscissae: np.ndarray
    values: np.ndarray      # shape (n_features, n_points)
    reference: np.ndarray   # grand-coalition metric value per point
    baselines: np.ndarray   # random-classifier metric value per point
    kind: str

    def __post_init__(self):
        abscissae = np.asarray(self.abscissae, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        reference = np.asarray(self.reference, dtype=np.float64)
        baselines = np.asarray(self.baselines, dtype=np.float64)
        n, m = len(self.feature_names), abscissae.size
        if values.shape != (n, m) or reference.shape != (m,) or baselines.shape != (m,):
            raise DataError("curve attribution arrays have inconsistent shapes")
        if m and np.max(np.abs(values.sum(axis=0) - (reference - baselines))) > EFFICIENCY_TOL:
            raise DataError("efficiency violated at some grid point")
        for arr in (abscissae, values, reference, baselines):
            arr.setflags(write=False)
        object.__setattr__(self, "abscissae", abscissae)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "reference", reference)
        object.__setattr__(self, "baselines", baselines)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return len(self.feature_names)

    def series(self, name: str) -> np.ndarray:
        return self.values[self.feature_names.index(name)]


def _subset_weights(n: int) -> np.ndarray:
    """w[s] = s! (n-s-1)! / n! for s = 0..n-1, from exact integer factorials."""
    n_fact = factorial(n)
    return np.array(
        [factorial(s) * factorial(n - 1 - s) / n_fact for s in range(n)]
    )


def shapley_exact(t: PayoffTable) -> Attribution:
    """Shapley values of a complete payoff table.

    φ_i = Σ_{A ⊆ N\\{i}} |A|! (n-|A|-1)! / n! · (υ(A∪{i}) − υ(A))
    """
    if not t.is_complete():
        raise IncompleteTable(
            f"table holds {len(t.payoffs)} of {1 << t.n} coalitions"
        )
    n = t.n
    size = 1 << n
    v = np.empty(size)
    for mask in range(size):
        v[mask] = t.payoffs[mask]
    masks = np.arange(size, dtype=np.int64)
    sizes = np.zeros(size, dtype=np.int64)
    for i in range(n):
        sizes += (masks >> i) & 1
    weights = _subset_weights(n) if n else np.empty(0)
    values = np.empty(n)
    for i in range(n):
        without = masks[(masks >> i & 1) == 0]
        gains = v[without | (1 << i)] - v[without]
        values[i] = float(np.sum(weights[sizes[without]] * gains))
    baseline = t.target.baseline()
    return Attribution(
        t.feature_names, values, baseline, baseline + v[size - 1], t.target
    )


def shapley_sampled(
    spec: GameSpec,
    samples: int,
    seed: int,
    *,
    without_replacement: bool = False,
) -> Attribution:
    """Permutation-sampling estimate of the Shapley values of `spec`'s game.

    Draws uniform random feature permutations and averages each feature's
    marginal payoff over them.  Payoffs are memoized, so repeated coalitions
    cost nothing.  With `without_replacement` the permutations are distinct;
    sampling all n! of them reproduces the exact values.
    """
    if samples < 1:
        raise DataError(f"samples must be ≥ 1, got {samples}")
    n = spec.n
    if n == 0:
        raise DataError("cannot attribute a game with no features")
    if spec.target.is_slice and spec.target.abscissa is None:
        raise DataError(f"{spec.target.kind} game needs an abscissa")
    rng = np.random.default_rng(seed)
    if without_replacement:
        if n > _EXHAUSTIVE_ARITY_CAP:
            raise DataError(
                f"without_replacement is supported for n ≤ {_EXHAUSTIVE_ARITY_CAP}"
            )
        universe = list(itertools.permutations(range(n)))
        if samples > len(universe):
            raise DataError(
                f"cannot draw {samples} distinct permutations of {n} features"
            )
        order = rng.permutation(len(universe))[:samples]
        perms = [universe[k] for k in order]
    else:
        perms = [rng.permutation(n) for _ in range(samples)]

    engine = PayoffEngine(spec)
    values = _mean_marginals(engine, n, perms, None)
    baseline = spec.target.baseline()
    total = baseline + engine.payoff((1 << n) - 1)
    return Attribution(spec.train.feature_names, values, baseline, total, spec.target)


def _mean_marginals(
    engine: PayoffEngine, n: int, perms, abscissa: float | None
) -> np.ndarray:
    gains = np.zeros(n)
    for perm in perms:
        mask = 0
        previous = 0.0
        for i in perm:
            mask |= 1 << int(i)
            value = engine.payoff(mask, abscissa)
            gains[int(i)] += value - previous
            previous = value
    return gains / len(perms)


def shapley_sampled_curve(
    spec: GameSpec, grid: np.ndarray, samples: int, seed: int
) -> CurveAttribution:
    """Permutation-sampling analogue of evaluate_slices + shapley_curve.

    One payoff engine serves every grid point, so models and curves are
    trained once; point k draws its permutations from seed + k.
    """
    if samples < 1:
        raise DataError(f"samples must be ≥ 1, got {samples}")
    if not spec.target.is_slice:
        raise DataError(f"sampled curve needs a slice target, got {spec.target.kind}")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise DataError("grid must be a non-empty 1-D array")
    if (grid < 0.0).any() or (grid > 1.0).any():
        raise DataError("grid abscissae must lie in [0, 1]")
    n = spec.n
    if n == 0:
        raise DataError("cannot attribute a game with no features")
    engine = PayoffEngine(spec)
    full = (1 << n) - 1
    values = np.empty((n, grid.size))
    reference = np.empty(grid.size)
    baselines = np.empty(grid.size)
    for k, q in enumerate(grid):
        q = float(q)
        rng = np.random.default_rng(seed + k)
        perms = [rng.permutation(n) for _ in range(samples)]
        values[:, k] = _mean_marginals(engine, n, perms, q)
        point = spec.target.with_abscissa(q)
        baselines[k] = point.baseline()
        reference[k] = baselines[k] + engine.payoff(full, q)
    return CurveAttribution(
        spec.train.feature_names, grid, values, reference, baselines,
        spec.target.kind,
    )


def shapley_curve(tables: list[PayoffTable]) -> CurveAttribution:
    """Exact Shapley values per grid point, assembled into per-feature series."""
    if not tables:
        raise DataError("no payoff tables given")
    first = tables[0]
    if not first.target.is_slice:
        raise DataError("shapley_curve needs slice-game tables")
    for t in tables:
        if t.n != first.n or t.feature_names != first.feature_names:
            raise DataError("tables disagree on features")
        if t.target.kind != first.target.kind:
            raise DataError("tables disagree on target kind")
    attrs = [shapley_exact(t) for t in tables]
    abscissae = np.array([t.target.abscissa for t in tables])
    values = np.stack([a.values for a in attrs], axis=1)
    reference = np.array([a.total for a in attrs])
    baselines = np.array([a.baseline for a in attrs])
    return CurveAttribution(
        first.feature_names, abscissae, values, reference, baselines,
        first.target.kind,
    )


def auc_roc_consistency(
    area_attr: Attribution, curve_attr: CurveAttribution
) -> np.ndarray:
    """|∫φ_i^ROC dfpr − φ_i^AUC| per feature.

    The per-slice attributions, integrated over FPR, should reproduce the
    area attributions up to grid and estimation error.
    """
    if area_attr.feature_names != curve_attr.feature_names:
        raise DataError("attributions disagree on features")
    if curve_attr.abscissae.size < MIN_CONSISTENCY_GRID:
        raise GridTooCoarse(curve_attr.abscissae.size, MIN_CONSISTENCY_GRID)
    integrals = np.array(
        [trapezoid(curve_attr.values[i], curve_attr.abscissae)
         for i in range(curve_attr.n)]
    )
    return np.abs(integrals - area_attr.values)
