"""Calendar helpers: ISO dates <-> consecutive month indices from an epoch.

Events within one month are unordered; all temporal logic in the package
works on month indices.
"""

from __future__ import annotations

import datetime as _dt

from .errors import MalformedRecord

ISO_FMT = "%Y-%m-%d"


def parse_date(text: str) -> _dt.date:
    """Parse an ISO-8601 date (YYYY-MM-DD)."""
    try:
        return _dt.datetime.strptime(text.strip(), ISO_FMT).date()
    except ValueError as exc:
        raise MalformedRecord(f"bad ISO date {text!r}") from exc


def month_index(date: _dt.date, epoch: _dt.date) -> int:
    """Month index of `date` relative to `epoch` (epoch month is 0).

    Dates before the epoch clamp to 0: nodes founded before the data
    window simply exist from the first period onward.
    """
    idx = (date.year - epoch.year) * 12 + (date.month - epoch.month)
    return max(idx, 0)


def months_between(later: _dt.date, earlier: _dt.date) -> int:
    """Whole-month difference (later - earlier), no clamping."""
    return (later.year - earlier.year) * 12 + (later.month - earlier.month)


def add_months(date: _dt.date, months: int) -> _dt.date:
    """Shift a date by a number of months, keeping day-of-month at 1."""
    total = date.year * 12 + (date.month - 1) + months
    return _dt.date(total // 12, total % 12 + 1, 1)


def period_to_date(period: int, epoch: _dt.date, day: int = 1) -> _dt.date:
    """First (or given) day of the month `period` months after the epoch."""
    base = add_months(epoch, period)
    return _dt.date(base.year, base.month, day)
