"""Price and return series containers, CSV ingestion and order statistics.

Losses are carried as negative log-returns, so a large positive value is a
large loss. Every estimator in the package consumes a :class:`ReturnSeries`
(or a plain array of values).
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .exceptions import InputError

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "OrderStats",
    "neg_log_returns",
    "order_stats",
    "as_values",
    "read_csv",
    "write_csv",
    "align",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _as_dates(dates: Iterable) -> np.ndarray:
    try:
        return np.asarray(list(dates), dtype="datetime64[D]")
    except (ValueError, TypeError) as exc:
        raise InputError(f"could not parse dates: {exc}") from exc


def _check_increasing(dates: np.ndarray) -> None:
    if dates.size > 1:
        bad = np.flatnonzero(np.diff(dates) <= np.timedelta64(0, "D"))
        if bad.size:
            raise InputError(f"dates must be strictly increasing (violated at {dates[bad[0] + 1]})")


@dataclass(frozen=True)
class PriceSeries:
    """Strictly positive prices on strictly increasing dates."""

    dates: np.ndarray
    prices: np.ndarray
    name: str = "series"

    def __post_init__(self):
        dates = _as_dates(self.dates)
        prices = np.asarray(self.prices, dtype=float)
        if dates.shape != prices.shape or prices.ndim != 1:
            raise InputError("dates and prices must be 1-d and of equal length")
        if prices.size < 2:
            raise InputError("a price series needs at least 2 observations")
        _check_increasing(dates)
        bad = np.flatnonzero(~(prices > 0) | ~np.isfinite(prices))
        if bad.size:
            raise InputError(f"non-positive or non-finite price {prices[bad[0]]!r} on {dates[bad[0]]}")
        object.__setattr__(self, "dates", _frozen(dates))
        object.__setattr__(self, "prices", _frozen(prices))

    def __len__(self) -> int:
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    """Ordered negative log-returns with their dates.

    Args:
        values: Loss values (negative log-returns), finite.
        dates: Strictly increasing dates. When omitted, consecutive days
            starting at 2000-01-01 are used.
        name: Label carried into reports.
    """

    values: np.ndarray
    dates: np.ndarray = None
    name: str = "series"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise InputError("return values must be 1-d")
        if not np.all(np.isfinite(values)):
            raise InputError("return values must be finite")
        if self.dates is None:
            dates = np.datetime64("2000-01-01", "D") + np.arange(values.size)
        else:
            dates = _as_dates(self.dates)
        if dates.shape != values.shape:
            raise InputError("dates and values must have equal length")
        _check_increasing(dates)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "dates", _frozen(dates))

    def __len__(self) -> int:
        return self.values.size

    @property
    def n(self) -> int:
        return self.values.size

    def scaled(self, c: float) -> "ReturnSeries":
        return ReturnSeries(c * self.values, self.dates, self.name)

    def slice(self, start: int, stop: int) -> "ReturnSeries":
        return ReturnSeries(self.values[start:stop], self.dates[start:stop], self.name)


SeriesLike = Union[ReturnSeries, Sequence[float], np.ndarray]


def as_values(s: SeriesLike) -> np.ndarray:
    """Return the float array behind ``s`` (a ReturnSeries or array-like)."""
    if isinstance(s, ReturnSeries):
        return s.values
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 1:
        raise InputError("expected a 1-d sample")
    return arr


@dataclass(frozen=True)
class OrderStats:
    """Sorted sample and the 1-based rank of every original observation.

    ``sorted[i - 1]`` is the order statistic Y_{i,n}; ``ranks[t]`` is the
    position of observation ``t`` in ``sorted`` (ties broken by index).
    """

    sorted: np.ndarray
    ranks: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.sorted.size

    def __getitem__(self, i: int) -> float:
        """Y_{i,n} with 1-based ``i``."""
        if not 1 <= i <= self.sorted.size:
            raise IndexError(i)
        return float(self.sorted[i - 1])


def neg_log_returns(p: PriceSeries) -> ReturnSeries:
    """Convert prices to negative log-returns between consecutive rows.

    ``values[t] = -(log p[t+1] - log p[t])`` and carries the date of
    ``p[t+1]``. No calendar adjustment is made for gaps.
    """
    logp = np.log(p.prices)
    return ReturnSeries(-np.diff(logp), p.dates[1:], p.name)


def order_stats(s: SeriesLike) -> OrderStats:
    values = as_values(s)
    if values.size == 0:
        raise InputError("order statistics of an empty series")
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(1, values.size + 1)
    return OrderStats(_frozen(values[order]), _frozen(ranks))


def align(series: Sequence[ReturnSeries]) -> list[ReturnSeries]:
    """Inner-join several return series on their dates."""
    if not series:
        raise InputError("nothing to align")
    common = series[0].dates
    for s in series[1:]:
        common = np.intersect1d(common, s.dates)
    if common.size == 0:
        raise InputError("series share no dates")
    out = []
    for s in series:
        mask = np.isin(s.dates, common)
        out.append(ReturnSeries(s.values[mask], s.dates[mask], s.name))
    return out


def read_csv(path: Union[str, Path], schema: str = "price", name: str | None = None) -> ReturnSeries:
    """Read a ``date,price`` or ``date,return`` CSV into a ReturnSeries.

    With ``schema="price"`` the prices are converted by
    :func:`neg_log_returns`; with ``schema="return"`` the second column is
    taken as negative log-returns already.
    """
    path = Path(path)
    if schema not in ("price", "return"):
        raise InputError(f"unknown schema {schema!r}; expected 'price' or 'return'")
    name = name or path.stem
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise InputError(f"{path}: empty file")
    header = [h.strip().lower() for h in header]
    if header[:2] != ["date", schema]:
        raise InputError(f"{path}: expected header 'date,{schema}', got {','.join(header)!r}")
    dates, values = [], []
    for lineno, row in enumerate(rows, start=2):
        if len(row) < 2:
            raise InputError(f"{path}:{lineno}: expected 2 columns")
        try:
            dates.append(dt.date.fromisoformat(row[0].strip()))
            values.append(float(row[1]))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    if schema == "price":
        return neg_log_returns(PriceSeries(dates, values, name))
    return ReturnSeries(values, dates, name)


def write_csv(s: ReturnSeries, path: Union[str, Path]) -> None:
    """Write ``s`` in the ``date,return`` schema (values at full precision)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "return"])
        for d, v in zip(s.dates, s.values):
            writer.writerow([str(d), repr(float(v))])
