"""
Rolling-window spanning trees and how fast their edges decay.

Windows of ``width`` return rows slide forward by ``step`` rows. For a given
origin window, the survival curve counts the fraction of its tree edges
still present ``tau`` windows later. The tree half-life is the first lag at
which that fraction reaches one half.
"""

from __future__ import annotations

import io
import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from corrtax.corrnet import correlation_matrix, distance_matrix
from corrtax.errors import CorrelationError, DynamicsError
from corrtax.panel import ReturnPanel, slice_window
from corrtax.taxonomy import SpanningTree, minimum_spanning_tree

__all__ = [
    "WindowPlan",
    "SurvivalCurve",
    "HalfLifeEstimate",
    "HalfLifeScaling",
    "window_starts",
    "rolling_trees",
    "edge_survival",
    "tree_half_life",
    "mean_half_life",
    "fit_through_origin",
    "half_life_scaling",
    "survival_to_csv",
    "survival_to_json",
    "scaling_to_csv",
    "scaling_to_json",
    "scaling_plot_data",
]

# linear region of the half-life vs width relation (one year of weekly rows)
DEFAULT_MAX_FIT_WIDTH = 52


@dataclass(frozen=True)
class WindowPlan:
    width: int
    step: int = 1

    def __post_init__(self):
        if self.width < 2:
            raise DynamicsError(f"window width must be at least 2, got {self.width}")
        if self.step < 1:
            raise DynamicsError(f"window step must be at least 1, got {self.step}")

    def check(self, rows: int) -> None:
        if self.width > rows:
            raise DynamicsError(f"window width {self.width} exceeds the {rows} available return rows")


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    lags: np.ndarray
    fraction: np.ndarray

    def __post_init__(self):
        lags = np.array(self.lags, dtype=float)
        fraction = np.array(self.fraction, dtype=float)
        if lags.shape != fraction.shape or lags.ndim != 1 or lags.size == 0:
            raise DynamicsError("lags and fraction must be matching non-empty sequences")
        if np.any(fraction < 0) or np.any(fraction > 1):
            raise DynamicsError("survival fractions must lie in [0, 1]")
        if lags[0] != 0 or fraction[0] != 1.0:
            raise DynamicsError("a survival curve starts at lag 0 with fraction 1")
        if np.any(np.diff(lags) <= 0):
            raise DynamicsError("lags must be strictly increasing")
        lags.flags.writeable = False
        fraction.flags.writeable = False
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "fraction", fraction)


@dataclass(frozen=True)
class HalfLifeEstimate:
    """Half-life in weeks, ``None`` when the survival fraction never reaches 1/2."""

    half_life: float | None
    origin_count: int = 1

    @property
    def defined(self) -> bool:
        return self.half_life is not None


@dataclass(frozen=True, eq=False)
class HalfLifeScaling:
    """
    Half-life per window width and the through-origin fit ``t_half = slope * width``.

    ``half_lives`` holds NaN where the half-life is undefined. ``fit_mask``
    marks the widths that entered the fit; ``residuals`` is NaN elsewhere.
    """

    widths: np.ndarray
    half_lives: np.ndarray
    origin_counts: np.ndarray
    fit_mask: np.ndarray
    slope: float
    residuals: np.ndarray


def window_starts(rows: int, plan: WindowPlan) -> list[int]:
    plan.check(rows)
    return list(range(0, rows - plan.width + 1, plan.step))


def rolling_trees(returns: ReturnPanel, plan: WindowPlan) -> list[SpanningTree]:
    """One minimum spanning tree per window start ``0, step, 2*step, ...``."""
    trees = []
    for k, start in enumerate(window_starts(returns.n_rows, plan)):
        window = slice_window(returns, start, plan.width)
        try:
            corr = correlation_matrix(window)
        except CorrelationError as exc:
            raise DynamicsError(f"window {k} (rows {start}..{start + plan.width - 1}): {exc}") from None
        trees.append(minimum_spanning_tree(distance_matrix(corr)))
    return trees


def edge_survival(trees: Sequence[SpanningTree], origin: int = 0) -> SurvivalCurve:
    """Fraction of the origin tree's edges (as unordered name pairs) present at each later lag."""
    if not 0 <= origin < len(trees):
        raise DynamicsError(f"origin {origin} out of range for {len(trees)} trees")
    initial = trees[origin].edge_set()
    if not initial:
        raise DynamicsError("origin tree has no edges")
    fractions = [len(initial & t.edge_set()) / len(initial) for t in trees[origin:]]
    return SurvivalCurve(np.arange(len(fractions)), fractions)


def tree_half_life(curve: SurvivalCurve, step_duration: float = 1.0) -> HalfLifeEstimate:
    """
    First lag at which the survival fraction drops to 1/2 or below.

    The crossing is located by linear interpolation between the bracketing
    lags and converted to weeks with ``step_duration`` (weeks per lag).
    """
    below = np.flatnonzero(curve.fraction <= 0.5)
    if below.size == 0:
        return HalfLifeEstimate(None, 0)
    k = int(below[0])
    f0, f1 = curve.fraction[k - 1], curve.fraction[k]
    l0, l1 = curve.lags[k - 1], curve.lags[k]
    if f1 == 0.5:
        lag = float(l1)
    else:
        lag = float(l0 + (f0 - 0.5) / (f0 - f1) * (l1 - l0))
    return HalfLifeEstimate(lag * step_duration, 1)


def mean_half_life(trees: Sequence[SpanningTree], step_duration: float = 1.0) -> HalfLifeEstimate:
    """Average half-life over every origin that has a later window and a defined crossing."""
    if len(trees) < 2:
        raise DynamicsError(f"need at least 2 trees, got {len(trees)}")
    values = []
    for origin in range(len(trees) - 1):
        est = tree_half_life(edge_survival(trees, origin), step_duration)
        if est.defined:
            values.append(est.half_life)
    if not values:
        return HalfLifeEstimate(None, 0)
    return HalfLifeEstimate(math.fsum(values) / len(values), len(values))


def fit_through_origin(x, y) -> tuple[float, np.ndarray]:
    """Least-squares slope of ``y = slope * x`` and the residuals ``y - slope * x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise DynamicsError(f"need at least 2 defined points for the fit, got {x.size}")
    denom = math.fsum(x * x)
    if denom == 0:
        raise DynamicsError("fit needs at least one non-zero width")
    slope = math.fsum(x * y) / denom
    return slope, y - slope * x


def half_life_scaling(
    returns: ReturnPanel,
    widths: Sequence[int],
    step: int = 1,
    step_duration: float = 1.0,
    max_fit_width: float | None = DEFAULT_MAX_FIT_WIDTH,
) -> HalfLifeScaling:
    """
    Mean tree half-life for each window width and its linear trend.

    :param returns: (ReturnPanel) Log-returns to window.
    :param widths: (list) Window widths in return rows; at least two.
    :param step: (int) Rows between consecutive window starts.
    :param step_duration: (float) Weeks per return row. One lag is ``step``
        rows, so half-lives are reported in weeks.
    :param max_fit_width: (float) Only widths up to this value enter the
        through-origin fit; ``None`` uses every width.
    :return: (HalfLifeScaling) Per-width half-lives and the fitted slope.
    """
    widths = [int(w) for w in widths]
    if len(widths) < 2:
        raise DynamicsError(f"need at least 2 widths, got {len(widths)}")
    lag_duration = step * step_duration
    half_lives = np.full(len(widths), np.nan)
    counts = np.zeros(len(widths), dtype=int)
    for k, width in enumerate(widths):
        trees = rolling_trees(returns, WindowPlan(width, step))
        if len(trees) < 2:
            continue
        est = mean_half_life(trees, lag_duration)
        if est.defined:
            half_lives[k] = est.half_life
            counts[k] = est.origin_count

    w = np.array(widths, dtype=float)
    mask = ~np.isnan(half_lives)
    if max_fit_width is not None:
        mask &= w <= max_fit_width
    if np.count_nonzero(mask) < 2:
        raise DynamicsError(
            f"only {int(np.count_nonzero(mask))} widths in the fit range have a defined half-life; need 2"
        )
    slope, fit_res = fit_through_origin(w[mask], half_lives[mask])
    residuals = np.full(len(widths), np.nan)
    residuals[mask] = fit_res
    return HalfLifeScaling(w, half_lives, counts, mask, slope, residuals)


def _fmt(value: float) -> str:
    return "" if value is None or (isinstance(value, float) and math.isnan(value)) else repr(float(value))


def survival_to_csv(curve: SurvivalCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lag", "fraction"])
    for lag, frac in zip(curve.lags, curve.fraction):
        writer.writerow([int(lag), repr(float(frac))])
    return buf.getvalue()


def survival_to_json(curve: SurvivalCurve, estimate: HalfLifeEstimate | None = None) -> str:
    doc = {"lags": [int(v) for v in curve.lags], "fraction": [float(v) for v in curve.fraction]}
    if estimate is not None:
        doc["half_life"] = estimate.half_life
        doc["origin_count"] = estimate.origin_count
    return json.dumps(doc)


def scaling_to_csv(result: HalfLifeScaling) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["width", "half_life"])
    for w, t in zip(result.widths, result.half_lives):
        writer.writerow([int(w), _fmt(t)])
    return buf.getvalue()


def scaling_to_json(result: HalfLifeScaling) -> str:
    def clean(v):
        return None if math.isnan(v) else float(v)

    return json.dumps(
        {
            "widths": [int(w) for w in result.widths],
            "half_lives": [clean(v) for v in result.half_lives],
            "origin_counts": [int(c) for c in result.origin_counts],
            "in_fit": [bool(m) for m in result.fit_mask],
            "slope": result.slope,
            "residuals": [clean(v) for v in result.residuals],
        }
    )


def scaling_plot_data(result: HalfLifeScaling) -> str:
    """Two-column ``width half_life`` text for gnuplot; undefined points are skipped."""
    lines = [f"# t_half = {result.slope:.6g} * width", "# width half_life"]
    for w, t in zip(result.widths, result.half_lives):
        if not math.isnan(t):
            lines.append(f"{int(w)} {t:.10g}")
    return "\n".join(lines) + "\n"
