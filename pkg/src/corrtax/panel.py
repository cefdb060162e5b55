"""
Dated panels of positive weekly values: parsing, validation, log-returns
and window slicing.

A panel is rectangular: one row per observation date, one column per asset.
Lags and windows are counted in rows, never in calendar days, so skipped
chart weeks do not change the index arithmetic.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from corrtax.errors import PanelError

__all__ = [
    "SalesPanel",
    "ReturnPanel",
    "parse_panel",
    "parse_returns",
    "panel_to_csv",
    "validate_panel",
    "apply_floor",
    "log_returns",
    "slice_window",
]


def _frozen_array(values, shape: tuple[int, int]) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 2 or arr.shape != shape:
        raise PanelError(f"values must have shape {shape}, got {arr.shape}")
    arr.flags.writeable = False
    return arr


def _check_labels(assets: Sequence[str]) -> tuple[str, ...]:
    assets = tuple(assets)
    seen = set()
    for name in assets:
        if not isinstance(name, str) or not name:
            raise PanelError(f"asset names must be non-empty text, got {name!r}")
        if name in seen:
            raise PanelError(f"duplicate asset name {name!r}")
        seen.add(name)
    return assets


def _check_dates(dates: Sequence[date]) -> tuple[date, ...]:
    dates = tuple(dates)
    for prev, cur in zip(dates, dates[1:]):
        if cur <= prev:
            raise PanelError(f"dates must be strictly increasing: {cur.isoformat()} follows {prev.isoformat()}")
    return dates


@dataclass(frozen=True)
class SalesPanel:
    """
    Aligned panel of weekly sales, one column per asset.

    Construction checks the structural invariants (unique non-empty asset
    names, strictly increasing dates, rectangular values). Positivity and
    minimum length are checked by :func:`validate_panel`, so that a raw
    parsed panel can still be reported on before it is rejected.

    :param dates: (tuple) Observation dates, strictly increasing.
    :param assets: (tuple) Asset names, in column order.
    :param values: (np.ndarray) T x N array of sales values (read-only).
    """

    dates: tuple[date, ...]
    assets: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        assets = _check_labels(self.assets)
        dates = _check_dates(self.dates)
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", _frozen_array(self.values, (len(dates), len(assets))))

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def scaled(self, factor: float) -> "SalesPanel":
        """Panel with every value multiplied by ``factor``."""
        return SalesPanel(self.dates, self.assets, self.values * factor)

    def __eq__(self, other):
        if not isinstance(other, SalesPanel):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.assets == other.assets
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None


@dataclass(frozen=True)
class ReturnPanel:
    """
    Log-returns of a :class:`SalesPanel`.

    Row ``t`` holds ``ln P[t+1] - ln P[t]`` and is dated by the later of the
    two observations.
    """

    dates: tuple[date, ...]
    assets: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        assets = _check_labels(self.assets)
        dates = _check_dates(self.dates)
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", _frozen_array(self.values, (len(dates), len(assets))))
        if not np.all(np.isfinite(self.values)):
            raise PanelError("returns must be finite")

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    def __eq__(self, other):
        if not isinstance(other, ReturnPanel):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.assets == other.assets
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _parse_cell(cell: str, asset: str, when: str) -> float:
    cell = cell.strip()
    if cell == "":
        return math.nan
    try:
        value = float(cell)
    except ValueError:
        raise PanelError(f"non-numeric cell {cell!r} for asset {asset!r} on {when}") from None
    if not math.isfinite(value):
        raise PanelError(f"non-numeric cell {cell!r} for asset {asset!r} on {when}")
    return value


def _parse_table(text: str) -> tuple[tuple[date, ...], tuple[str, ...], np.ndarray]:
    # csv handles both LF and CRLF line endings
    rows = [row for row in csv.reader(io.StringIO(text.lstrip("﻿"))) if row]
    if not rows:
        raise PanelError("empty panel: no header row")
    header = [h.strip() for h in rows[0]]
    if header[0].lower() != "date":
        raise PanelError(f"first column header must be 'date', got {header[0]!r}")
    assets = header[1:]
    if not assets:
        raise PanelError("empty panel: no asset columns")
    assets = _check_labels(assets)
    body = rows[1:]
    if not body:
        raise PanelError("empty panel: no data rows")

    dates = []
    values = np.empty((len(body), len(assets)))
    for r, row in enumerate(body):
        if len(row) != len(assets) + 1:
            raise PanelError(f"row {r + 2} has {len(row)} cells, expected {len(assets) + 1}")
        stamp = row[0].strip()
        try:
            dates.append(date.fromisoformat(stamp))
        except ValueError:
            raise PanelError(f"row {r + 2}: invalid ISO-8601 date {stamp!r}") from None
        for c, cell in enumerate(row[1:]):
            values[r, c] = _parse_cell(cell, assets[c], stamp)
    return _check_dates(dates), assets, values


def parse_panel(text: str) -> SalesPanel:
    """
    Parse a ``date,<asset1>,...`` CSV document into a :class:`SalesPanel`.

    Empty cells become NaN and are reported as missing by
    :func:`validate_panel`; any other non-numeric cell is an error here.
    """
    dates, assets, values = _parse_table(text)
    return SalesPanel(dates, assets, values)


def parse_returns(text: str) -> ReturnPanel:
    """Parse a return CSV (same layout as a sales panel; values may be negative)."""
    dates, assets, values = _parse_table(text)
    if np.isnan(values).any():
        r, c = np.argwhere(np.isnan(values))[0]
        raise PanelError(f"missing return for asset {assets[c]!r} on {dates[r].isoformat()}")
    return ReturnPanel(dates, assets, values)


def panel_to_csv(panel: SalesPanel | ReturnPanel) -> str:
    """Serialize a panel to CSV text; floats are written in shortest round-trip form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["date", *panel.assets])
    for stamp, row in zip(panel.dates, panel.values):
        writer.writerow([stamp.isoformat(), *(repr(float(v)) for v in row)])
    return buf.getvalue()


def apply_floor(panel: SalesPanel, eps: float) -> SalesPanel:
    """Replace exact zeros with ``eps``. Missing cells and negatives are left for validation."""
    if not eps > 0:
        raise PanelError(f"floor must be positive, got {eps}")
    values = np.where(panel.values == 0.0, eps, panel.values)
    return SalesPanel(panel.dates, panel.assets, values)


def validate_panel(panel: SalesPanel, min_length: int = 3) -> SalesPanel:
    """
    Check positivity and length, returning the panel unchanged.

    :param panel: (SalesPanel) Panel to check.
    :param min_length: (int) Minimum number of rows; at least 3 is needed for
        two return observations.
    :return: (SalesPanel) The same panel object.
    """
    if panel.n_rows < min_length:
        raise PanelError(f"panel too short: {panel.n_rows} rows, need at least {min_length}")
    values = panel.values
    bad = np.isnan(values) | (values <= 0)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        what = "missing value" if np.isnan(values[r, c]) else f"non-positive value {float(values[r, c])!r}"
        raise PanelError(
            f"{what} for asset {panel.assets[c]!r} on {panel.dates[r].isoformat()} (week {r + 1})"
        )
    return panel


def log_returns(panel: SalesPanel) -> ReturnPanel:
    """Weekly log-returns ``ln P[t+1] - ln P[t]`` of a validated panel."""
    validate_panel(panel, min_length=2)
    # log of the ratio is bit-exact under power-of-two rescaling; a difference of logs is not
    values = np.log(panel.values[1:] / panel.values[:-1])
    return ReturnPanel(panel.dates[1:], panel.assets, values)


def slice_window(returns: ReturnPanel, start_index: int, width: int) -> ReturnPanel:
    """Contiguous block of ``width`` return rows starting at ``start_index``."""
    if width < 2:
        raise PanelError(f"window width must be at least 2, got {width}")
    if start_index < 0 or start_index + width > returns.n_rows:
        raise PanelError(
            f"window [{start_index}, {start_index + width}) out of range for {returns.n_rows} return rows"
        )
    stop = start_index + width
    return ReturnPanel(returns.dates[start_index:stop], returns.assets, returns.values[start_index:stop])
