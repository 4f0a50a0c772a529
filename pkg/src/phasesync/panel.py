"""Core data containers for monthly panels and frequency bands.

Everything here is immutable after construction so panels and bands can be
shared freely across worker threads.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, IngestionError

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def round_half_up(x: float) -> int:
    """Round to the nearest integer, ties upward (round(28.5) = 29)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, order=True)
class Month:
    """A calendar month at month granularity (no day component)."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ContractError(f"month must be in 1..12, got {self.month}")

    @classmethod
    def parse(cls, text: str) -> "Month":
        """Parse 'YYYY-MM'."""
        m = _MONTH_RE.match(text)
        if m is None:
            raise ContractError(f"expected YYYY-MM date, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    def __add__(self, months: int) -> "Month":
        idx = self.year * 12 + (self.month - 1) + months
        return Month(idx // 12, idx % 12 + 1)

    def __sub__(self, other: "Month") -> int:
        """Number of months from `other` to `self`."""
        return (self.year - other.year) * 12 + (self.month - other.month)


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """One named monthly series.

    Parameters
    ----------
    id : str
        Unique member identifier within a panel.
    start : Month
        Calendar month of the first sample.
    values : array_like
        Finite floats, length >= 2. Stored read-only.
    """

    id: str
    start: Month
    values: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.values)
        if arr.ndim != 1 or arr.size < 2:
            raise ContractError(
                f"series '{self.id}': need a 1-d sequence of length >= 2, "
                f"got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise ContractError(f"series '{self.id}': non-finite value at index {bad}")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    def month_at(self, i: int) -> Month:
        return self.start + i


@dataclass(frozen=True)
class Panel:
    """A collection of series sharing one calendar (same start, same length)."""

    series: tuple[TimeSeries, ...]

    def __post_init__(self):
        members = tuple(self.series)
        if not members:
            raise ContractError("panel needs at least one series")
        ids = [s.id for s in members]
        if len(set(ids)) != len(ids):
            dup = next(x for x in ids if ids.count(x) > 1)
            raise ContractError(f"duplicate series id '{dup}'")
        first = members[0]
        for s in members[1:]:
            if s.start != first.start:
                raise ContractError(
                    f"series '{s.id}' starts {s.start}, expected {first.start}"
                )
            if s.n != first.n:
                raise ContractError(
                    f"series '{s.id}' has length {s.n}, expected {first.n}"
                )
        object.__setattr__(self, "series", members)

    @property
    def n(self) -> int:
        return self.series[0].n

    @property
    def start(self) -> Month:
        return self.series[0].start

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.series)

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    def member(self, sid: str) -> TimeSeries:
        for s in self.series:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def month_at(self, i: int) -> Month:
        return self.start + i


@dataclass(frozen=True)
class FilterBand:
    """Inclusive range [lower, upper] of Fourier mode indices (cycles per record)."""

    lower: int
    upper: int

    def __post_init__(self):
        if self.lower != int(self.lower) or self.upper != int(self.upper):
            raise ContractError("band cutoffs must be integers")
        if not 1 <= self.lower <= self.upper:
            raise ContractError(
                f"need 1 <= lower <= upper, got ({self.lower}, {self.upper})"
            )

    def validate_for(self, n: int) -> None:
        """Raise unless the band fits a length-n record."""
        if self.upper > n // 2:
            raise ContractError(
                f"band ({self.lower}, {self.upper}) invalid for length {n}: "
                f"need upper <= floor(N/2) = {n // 2}"
            )


def periods_of_band(n: int, band: FilterBand) -> tuple[float, float]:
    """Periods (in months) bounding the band: (shortest, longest) = (N/upper, N/lower)."""
    band.validate_for(n)
    return n / band.upper, n / band.lower


def band_from_periods(n: int, longest: float, shortest: float) -> FilterBand:
    """Derive mode cutoffs from period bounds.

    Inverse of :func:`periods_of_band` up to rounding: cutoffs are
    round-half-up of N/period, clamped to [1, floor(N/2)].
    """
    if not 2 <= shortest <= longest <= n:
        raise ContractError(
            f"need 2 <= shortest <= longest <= N, got "
            f"shortest={shortest}, longest={longest}, N={n}"
        )
    half = n // 2
    lower = min(max(round_half_up(n / longest), 1), half)
    upper = min(max(round_half_up(n / shortest), 1), half)
    if lower > upper:
        raise ContractError(
            f"periods ({longest}, {shortest}) collapse to an empty band for N={n}"
        )
    return FilterBand(lower, upper)


@dataclass(frozen=True)
class RecessionCalendar:
    """Ordered, non-overlapping (peak, trough) reference-date episodes.

    The contraction spans the months after the peak up to and including the
    trough: the peak month itself is the last expansion month.
    """

    episodes: tuple[tuple[Month, Month], ...]

    def __post_init__(self):
        eps = tuple((p, t) for p, t in self.episodes)
        prev_trough = None
        for p, t in eps:
            if not p < t:
                raise ContractError(f"episode peak {p} must precede trough {t}")
            if prev_trough is not None and p < prev_trough:
                raise ContractError(
                    f"episode starting {p} overlaps previous trough {prev_trough}"
                )
            prev_trough = t
        object.__setattr__(self, "episodes", eps)

    def is_contraction(self, month: Month) -> bool:
        return any(p < month <= t for p, t in self.episodes)

    def overlaps(self, first: Month, last: Month) -> bool:
        """True if any contraction month falls inside [first, last]."""
        return any(p + 1 <= last and t >= first for p, t in self.episodes)


def load_panel_csv(path) -> Panel:
    """Read a panel from CSV with header ``date,<id1>,<id2>,...``.

    Dates must be YYYY-MM and strictly consecutive months. Every cell must
    be numeric; errors name the offending row (1-based, header = row 1)
    and column.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError(f"{path}: empty file")
    header = rows[0]
    if not header or header[0] != "date":
        raise IngestionError(f"{path}: row 1: header must start with 'date'")
    ids = header[1:]
    if not ids:
        raise IngestionError(f"{path}: row 1: no series columns after 'date'")
    for sid in ids:
        if ids.count(sid) > 1:
            raise IngestionError(f"{path}: row 1: duplicate column id '{sid}'")
        if not sid:
            raise IngestionError(f"{path}: row 1: blank column id")

    months: list[Month] = []
    columns: list[list[float]] = [[] for _ in ids]
    for rownum, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise IngestionError(
                f"{path}: row {rownum}: expected {len(header)} cells, got {len(row)}"
            )
        try:
            m = Month.parse(row[0])
        except ContractError as exc:
            raise IngestionError(f"{path}: row {rownum}: {exc}") from exc
        if months and m - months[-1] != 1:
            raise IngestionError(
                f"{path}: row {rownum}: non-consecutive calendar months "
                f"({months[-1]} followed by {m})"
            )
        months.append(m)
        for col, (sid, cell) in enumerate(zip(ids, row[1:])):
            if cell.strip() == "":
                raise IngestionError(
                    f"{path}: row {rownum}, column '{sid}': missing value"
                )
            try:
                columns[col].append(float(cell))
            except ValueError:
                raise IngestionError(
                    f"{path}: row {rownum}, column '{sid}': "
                    f"non-numeric value {cell!r}"
                ) from None

    if len(months) < 2:
        raise IngestionError(f"{path}: need at least 2 data rows, got {len(months)}")
    try:
        return Panel(tuple(
            TimeSeries(sid, months[0], vals) for sid, vals in zip(ids, columns)
        ))
    except ContractError as exc:
        raise IngestionError(f"{path}: {exc}") from exc


def write_panel_csv(panel: Panel, path) -> None:
    """Write a panel in the format load_panel_csv reads, 12 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + list(panel.ids))
        for i in range(panel.n):
            row = [str(panel.month_at(i))]
            row += [format(s.values[i], ".12g") for s in panel.series]
            writer.writerow(row)


def load_recession_csv(path) -> RecessionCalendar:
    """Read reference dates from CSV with header ``peak,trough`` and YYYY-MM values."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["peak", "trough"]:
        raise IngestionError(f"{path}: header must be exactly 'peak,trough'")
    episodes = []
    for rownum, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise IngestionError(f"{path}: row {rownum}: expected 2 cells, got {len(row)}")
        try:
            episodes.append((Month.parse(row[0]), Month.parse(row[1])))
        except ContractError as exc:
            raise IngestionError(f"{path}: row {rownum}: {exc}") from exc
    try:
        return RecessionCalendar(tuple(episodes))
    except ContractError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
