"""
Correlation and distance matrices over an asset set.

The correlation between two return series is the Pearson coefficient with
plain temporal averages. It is mapped to the metric ``sqrt(2 * (1 - rho))``,
which runs from 0 (perfectly correlated) to 2 (perfectly anti-correlated).
"""

from __future__ import annotations

import enum
import io
import json
import csv
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from corrtax.errors import CorrelationError
from corrtax.panel import ReturnPanel

__all__ = [
    "CorrelationMatrix",
    "DistanceMatrix",
    "CorrelationLevel",
    "CorrelationCensus",
    "RankedPair",
    "correlation_matrix",
    "classify_pair",
    "census",
    "rho_to_distance",
    "distance_matrix",
    "top_pairs",
    "canonical_pair",
    "matrix_to_csv",
    "matrix_to_json",
    "parse_matrix",
    "census_to_json",
]

# overshoot of |rho| beyond 1 that is attributed to rounding
CLAMP_TOLERANCE = 1e-12


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    """Unordered pair stored with the lexicographically smaller name first."""
    return (a, b) if a <= b else (b, a)


def _square(values, n: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.shape != (n, n):
        raise CorrelationError(f"{what} must be {n}x{n}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


def _check_assets(assets) -> tuple[str, ...]:
    assets = tuple(assets)
    if len(set(assets)) != len(assets) or not all(isinstance(a, str) and a for a in assets):
        raise CorrelationError("asset names must be unique and non-empty")
    return assets


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """
    Symmetric matrix of pairwise correlations with a unit diagonal.

    When built from returns, ``profiles`` holds the centred return columns
    scaled to unit norm (one row per asset), so that ``rho[i, j]`` is the dot
    product of rows ``i`` and ``j``. :func:`distance_matrix` uses them to
    evaluate the distance as a Euclidean norm, which stays accurate where
    ``rho`` is within rounding of 1.
    """

    assets: tuple[str, ...]
    rho: np.ndarray
    profiles: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        assets = _check_assets(self.assets)
        rho = _square(self.rho, len(assets), "correlation matrix")
        if not np.array_equal(rho, rho.T):
            raise CorrelationError("correlation matrix must be symmetric")
        if not np.all(np.diag(rho) == 1.0):
            raise CorrelationError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(rho) > 1.0):
            raise CorrelationError("correlations must lie in [-1, 1]")
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "rho", rho)
        if self.profiles is not None:
            profiles = np.array(self.profiles, dtype=float, copy=True)
            if profiles.ndim != 2 or profiles.shape[0] != len(assets):
                raise CorrelationError("profiles must have one row per asset")
            profiles.flags.writeable = False
            object.__setattr__(self, "profiles", profiles)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def permuted(self, order) -> "CorrelationMatrix":
        """Same matrix with assets reordered by the index sequence ``order``."""
        order = list(order)
        profiles = None if self.profiles is None else self.profiles[order]
        return CorrelationMatrix(tuple(self.assets[i] for i in order), self.rho[np.ix_(order, order)], profiles)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of non-negative distances with a zero diagonal."""

    assets: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        assets = _check_assets(self.assets)
        d = _square(self.d, len(assets), "distance matrix")
        if not np.array_equal(d, d.T):
            raise CorrelationError("distance matrix must be symmetric")
        if not np.all(np.diag(d) == 0.0):
            raise CorrelationError("distance matrix must have a zero diagonal")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise CorrelationError("distances must be finite and non-negative")
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "d", d)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def transformed(self, fn) -> "DistanceMatrix":
        """Apply ``fn`` to the off-diagonal entries, keeping the diagonal at zero."""
        d = np.array(fn(self.d), dtype=float)
        np.fill_diagonal(d, 0.0)
        return DistanceMatrix(self.assets, d)


class CorrelationLevel(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class CorrelationCensus:
    strong: int
    weak: int
    negative: int

    @property
    def pairs(self) -> int:
        return self.strong + self.weak + self.negative

    def as_dict(self) -> dict:
        return {"strong": self.strong, "weak": self.weak, "negative": self.negative, "pairs": self.pairs}


class RankedPair(NamedTuple):
    first: str
    second: str
    rho: float
    distance: float


def correlation_matrix(returns: ReturnPanel) -> CorrelationMatrix:
    """
    Pearson correlations between all return columns.

    Two-pass: columns are centred on their temporal mean before the
    cross-products are accumulated. Overshoot of ``|rho|`` past 1 up to
    ``CLAMP_TOLERANCE`` is clamped; anything larger is an error.
    """
    y = np.asarray(returns.values, dtype=float)
    if y.shape[0] < 2:
        raise CorrelationError(f"need at least 2 return rows, got {y.shape[0]}")
    for c in range(y.shape[1]):
        if np.ptp(y[:, c]) == 0.0:
            raise CorrelationError(f"zero variance in returns of asset {returns.assets[c]!r}")

    centred = y - y.mean(axis=0)
    sumsq = np.einsum("ti,ti->i", centred, centred)
    if np.any(sumsq <= 0.0):
        c = int(np.argmin(sumsq))
        raise CorrelationError(f"zero variance in returns of asset {returns.assets[c]!r}")
    cov = centred.T @ centred
    scale = np.sqrt(sumsq)
    rho = cov / np.outer(scale, scale)
    # matmul is not guaranteed to give bit-symmetric output
    rho = np.triu(rho, 1)
    rho = rho + rho.T

    over = np.abs(rho) - 1.0
    if np.any(over > CLAMP_TOLERANCE):
        i, j = np.unravel_index(int(np.argmax(over)), over.shape)
        raise CorrelationError(
            f"correlation {float(rho[i, j])!r} between {returns.assets[i]!r} and {returns.assets[j]!r} is outside [-1, 1]"
        )
    np.clip(rho, -1.0, 1.0, out=rho)
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(returns.assets, rho, (centred / scale).T)


def classify_pair(rho: float) -> CorrelationLevel:
    """Strong for rho >= 1/2, weak for 0 <= rho < 1/2, negative for rho < 0."""
    if not -1.0 <= rho <= 1.0:
        raise CorrelationError(f"correlation {rho!r} is outside [-1, 1]")
    if rho >= 0.5:
        return CorrelationLevel.STRONG
    if rho >= 0.0:
        return CorrelationLevel.WEAK
    return CorrelationLevel.NEGATIVE


def census(corr: CorrelationMatrix) -> CorrelationCensus:
    """Count the n(n-1)/2 off-diagonal pairs in each correlation level."""
    iu = np.triu_indices(corr.n_assets, k=1)
    upper = corr.rho[iu]
    strong = int(np.count_nonzero(upper >= 0.5))
    negative = int(np.count_nonzero(upper < 0.0))
    return CorrelationCensus(strong=strong, weak=upper.size - strong - negative, negative=negative)


def rho_to_distance(rho):
    """Elementwise ``sqrt(2 * (1 - rho))``; accepts scalars or arrays."""
    return np.sqrt(2.0 * (1.0 - np.asarray(rho, dtype=float)))


def distance_matrix(corr: CorrelationMatrix) -> DistanceMatrix:
    """
    Elementwise ``sqrt(2 * (1 - rho))`` with an exact zero diagonal.

    With unit profiles ``u`` available, ``2 * (1 - u_i . u_j) = |u_i - u_j|^2``,
    so the distance is taken as that norm. Going through ``rho`` instead
    quantises small distances to about 1.5e-8 (the resolution of ``1 - rho``
    near 1), enough to break the triangle inequality between near-duplicate
    series.
    """
    if corr.profiles is None:
        d = rho_to_distance(corr.rho)
    else:
        u = corr.profiles
        n = len(u)
        d = np.zeros((n, n))
        for i in range(n - 1):
            diff = u[i + 1 :] - u[i]
            d[i, i + 1 :] = np.sqrt(np.einsum("kt,kt->k", diff, diff))
        d = np.minimum(d + d.T, 2.0)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(corr.assets, d)


def top_pairs(corr: CorrelationMatrix, k: int) -> list[RankedPair]:
    """
    The ``k`` most correlated unordered pairs, by rho descending.

    Ties are broken by the canonical (lexicographically ordered) pair names.
    """
    n = corr.n_assets
    total = n * (n - 1) // 2
    if k < 0 or k > total:
        raise CorrelationError(f"k={k} is outside [0, {total}] for {n} assets")
    pairs = []
    for i, j in combinations(range(n), 2):
        a, b = canonical_pair(corr.assets[i], corr.assets[j])
        pairs.append((-float(corr.rho[i, j]), a, b))
    pairs.sort()
    return [RankedPair(a, b, -neg, float(rho_to_distance(-neg))) for neg, a, b in pairs[:k]]


def matrix_to_csv(assets, values) -> str:
    """CSV with a header row and a leading column of asset names."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["asset", *assets])
    for name, row in zip(assets, values):
        writer.writerow([name, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def matrix_to_json(assets, values, key: str = "rho") -> str:
    return json.dumps({"assets": list(assets), key: [[float(v) for v in row] for row in values]})


def parse_matrix(text: str) -> tuple[tuple[str, ...], np.ndarray, str | None]:
    """
    Read a matrix written by :func:`matrix_to_csv` or :func:`matrix_to_json`.

    :return: (tuple) Asset names, the square array, and the JSON key
        (``"rho"`` or ``"d"``) or ``None`` for CSV input.
    """
    stripped = text.lstrip("﻿").lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        key = "rho" if "rho" in doc else "d" if "d" in doc else None
        if key is None or "assets" not in doc:
            raise CorrelationError("matrix JSON needs 'assets' and 'rho' (or 'd') keys")
        return tuple(doc["assets"]), np.array(doc[key], dtype=float), key
    rows = [row for row in csv.reader(io.StringIO(stripped)) if row]
    if not rows:
        raise CorrelationError("empty matrix document")
    assets = tuple(h.strip() for h in rows[0][1:])
    if len(rows) - 1 != len(assets):
        raise CorrelationError(f"matrix has {len(rows) - 1} rows for {len(assets)} assets")
    values = np.empty((len(assets), len(assets)))
    for r, row in enumerate(rows[1:]):
        if row[0].strip() != assets[r] or len(row) != len(assets) + 1:
            raise CorrelationError(f"matrix row {r + 2} does not match the header")
        try:
            values[r] = [float(v) for v in row[1:]]
        except ValueError:
            raise CorrelationError(f"non-numeric entry in matrix row {r + 2}") from None
    return assets, values, None


def census_to_json(result: CorrelationCensus) -> str:
    return json.dumps(result.as_dict())
