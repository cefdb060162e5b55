"""
Seeded synthetic sales panels with known structure.

Both generators draw from one numpy ``PCG64`` stream seeded with the config
seed. Normal variates come from ``Generator.standard_normal`` (numpy's
ziggurat). Draws are made column by column: all weeks of the first series,
then all weeks of the next, and so on.

Sector market
    log-return ``Y_i(t) = beta_g * f_g(t) + sigma * e_i(t)`` with one common
    factor per sector. Factors are drawn first (sector order), then the
    idiosyncratic noise (asset order).

Competition market
    a fixed total of sales is split by market shares. Each week the shares
    are perturbed as ``s_i ** (1 - churn) * exp(churn * z_i)``, floored at
    ``SHARE_FLOOR`` and renormalised. The exponent pulls shares back toward
    an equal split, so the log-shares form a stationary AR(1) process instead
    of drifting to a single winner. Shares sum to one, so a gain for one asset
    is a loss for the rest and return correlations are mostly negative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from corrtax.errors import ConfigError
from corrtax.panel import SalesPanel

__all__ = [
    "Sector",
    "SectorConfig",
    "CompetitionConfig",
    "generate_sector_market",
    "generate_competitive_market",
    "weekly_dates",
    "config_from_json",
    "SHARE_FLOOR",
]

SHARE_FLOOR = 1e-6
DEFAULT_START = date(2003, 5, 1)


def weekly_dates(weeks: int, start: date = DEFAULT_START) -> tuple[date, ...]:
    return tuple(start + timedelta(weeks=k) for k in range(weeks))


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must fit in 64 unsigned bits, got {seed}")
    return int(seed)


@dataclass(frozen=True)
class Sector:
    label: str
    members: int
    loading: float

    def __post_init__(self):
        if not self.label:
            raise ConfigError("sector label must be non-empty")
        if self.members < 1:
            raise ConfigError(f"sector {self.label!r} needs at least one member")
        if not self.loading >= 0:
            raise ConfigError(f"sector {self.label!r} loading must be >= 0, got {self.loading}")

    def asset_names(self) -> list[str]:
        return [f"{self.label}_{k + 1:02d}" for k in range(self.members)]


@dataclass(frozen=True)
class SectorConfig:
    sectors: tuple[Sector, ...]
    weeks: int
    seed: int
    noise_sd: float = 0.1
    initial_sales: float = 10000.0
    start: date = DEFAULT_START

    def __post_init__(self):
        sectors = tuple(s if isinstance(s, Sector) else Sector(*s) for s in self.sectors)
        object.__setattr__(self, "sectors", sectors)
        _check_seed(self.seed)
        labels = [s.label for s in sectors]
        if len(set(labels)) != len(labels):
            raise ConfigError("sector labels must be unique")
        if sum(s.members for s in sectors) < 2:
            raise ConfigError("need at least 2 assets in total")
        if self.weeks < 3:
            raise ConfigError(f"need at least 3 weeks, got {self.weeks}")
        if not self.noise_sd > 0:
            raise ConfigError(f"noise_sd must be positive, got {self.noise_sd}")
        if not self.initial_sales > 0:
            raise ConfigError(f"initial_sales must be positive, got {self.initial_sales}")


@dataclass(frozen=True)
class CompetitionConfig:
    assets: int
    weeks: int
    seed: int
    churn: float = 0.1
    total_sales: float = 1_000_000.0
    start: date = DEFAULT_START

    def __post_init__(self):
        _check_seed(self.seed)
        if self.assets < 2:
            raise ConfigError(f"need at least 2 assets, got {self.assets}")
        if self.weeks < 3:
            raise ConfigError(f"need at least 3 weeks, got {self.weeks}")
        if not 0 < self.churn < 1:
            raise ConfigError(f"churn must lie in (0, 1), got {self.churn}")
        if not self.total_sales > 0:
            raise ConfigError(f"total_sales must be positive, got {self.total_sales}")

    def asset_names(self) -> list[str]:
        width = len(str(self.assets))
        return [f"artist_{k + 1:0{width}d}" for k in range(self.assets)]


def generate_sector_market(config: SectorConfig) -> SalesPanel:
    """
    Sales panel whose log-returns follow a one-factor-per-sector model.

    Sales start at ``initial_sales`` and compound the drawn log-returns, so
    every value is positive.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    steps = config.weeks - 1
    factors = rng.standard_normal((len(config.sectors), steps))
    n_assets = sum(s.members for s in config.sectors)
    noise = rng.standard_normal((n_assets, steps))

    names = []
    returns = np.empty((n_assets, steps))
    col = 0
    for g, sector in enumerate(config.sectors):
        for name in sector.asset_names():
            returns[col] = sector.loading * factors[g] + config.noise_sd * noise[col]
            names.append(name)
            col += 1

    log_sales = np.log(config.initial_sales) + np.concatenate(
        [np.zeros((n_assets, 1)), np.cumsum(returns, axis=1)], axis=1
    )
    return SalesPanel(weekly_dates(config.weeks, config.start), tuple(names), np.exp(log_sales).T)


def generate_competitive_market(config: CompetitionConfig) -> SalesPanel:
    """Sales panel from a conserved market split by randomly reallocated shares."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.assets
    shocks = rng.standard_normal((n, config.weeks - 1))
    shares = np.empty((config.weeks, n))
    shares[0] = 1.0 / n
    for t in range(1, config.weeks):
        moved = shares[t - 1] ** (1.0 - config.churn) * np.exp(config.churn * shocks[:, t - 1])
        moved /= moved.sum()
        moved = np.maximum(moved, SHARE_FLOOR)
        shares[t] = moved / moved.sum()
    return SalesPanel(weekly_dates(config.weeks, config.start), tuple(config.asset_names()), shares * config.total_sales)


def config_from_json(text: str, model: str, seed: int) -> SectorConfig | CompetitionConfig:
    """
    Build a generator config from a JSON document.

    Sector documents list ``sectors`` as ``[{"label", "members", "loading"}]``.
    The ``seed`` argument always wins over any seed in the document.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid config JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config JSON must be an object")
    doc = dict(doc)
    doc["seed"] = seed
    if "start" in doc:
        doc["start"] = date.fromisoformat(doc["start"])
    try:
        if model == "sector":
            doc["sectors"] = tuple(Sector(**s) for s in doc.get("sectors", ()))
            return SectorConfig(**doc)
        if model == "competition":
            return CompetitionConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"invalid config fields: {exc}") from None
    raise ConfigError(f"unknown model {model!r}")
