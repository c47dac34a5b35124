"""Parsing and validation for the six input dataset schemas plus the lexicon.

All files are UTF-8 comma-separated values with a single header row and "."
as the decimal separator. Rows that fail validation are rejected individually
with a positioned error message; parsing only aborts when more than half of
the data rows are rejected.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path
from typing import Iterable

__all__ = [
    "ItineraryRecord",
    "FareObservation",
    "ReviewRecord",
    "TweetRecord",
    "SafetyRecord",
    "FleetRecord",
    "LexiconEntry",
    "ParseResult",
    "ParseError",
    "SCHEMAS",
    "parse_dataset",
    "serialize_dataset",
    "filter_tweets",
    "reconcile_booking_fares",
]


class ParseError(Exception):
    """Fatal parse failure: missing file, bad header, or >50% rows rejected."""


@dataclass(frozen=True)
class ItineraryRecord:
    od: str
    airline_id: int
    dep_day_id: int
    dbd: int
    dep_time_mam: int
    travel_time: float
    price: float
    is_bought: bool


@dataclass(frozen=True)
class FareObservation:
    od: str
    airline_id: int
    dep_day_id: int
    dbd: int
    dep_time_mam: int
    travel_time: float
    price: float


@dataclass(frozen=True)
class ReviewRecord:
    airline_id: int
    recommended: bool
    review_text: str
    fb: int
    ground: int
    ife: int
    crew: int
    seat: int
    value: int
    wifi: int


@dataclass(frozen=True)
class TweetRecord:
    airline_id: int
    text: str
    is_retweet: bool
    is_reply: bool
    language_tag: str


@dataclass(frozen=True)
class SafetyRecord:
    airline_code: str
    score: float


@dataclass(frozen=True)
class FleetRecord:
    airline_id: int
    aircraft_type: str
    aircraft_cost: float
    registration: str
    aircraft_age: float


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    score: int


@dataclass
class ParseResult:
    records: list
    rejected: list[tuple[int, str]]

    @property
    def n_accepted(self) -> int:
        return len(self.records)

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)

    def rejection_report(self) -> str:
        lines = [f"line {lineno}: {msg}" for lineno, msg in self.rejected]
        lines.append(f"accepted={self.n_accepted} rejected={self.n_rejected}")
        return "\n".join(lines)


_TRUE = {"1", "true", "t", "y", "yes"}
_FALSE = {"0", "false", "f", "n", "no"}


def _to_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _to_int(raw: str) -> int:
    return int(raw.strip())


def _to_float(raw: str) -> float:
    val = float(raw.strip())
    if not math.isfinite(val):
        raise ValueError(f"non-finite value: {raw!r}")
    return val


def _to_str(raw: str) -> str:
    return raw


_COERCERS = {int: _to_int, float: _to_float, bool: _to_bool, str: _to_str}


def _validate_itinerary_common(rec) -> str | None:
    if rec.dbd > 0:
        return "dbd out of range (must be <= 0)"
    if not (0 <= rec.dep_time_mam < 1440):
        return "dep_time_mam out of range"
    if rec.travel_time <= 0:
        return "travel_time must be positive"
    if rec.price <= 0:
        return "price must be positive"
    return None


def _validate_review(rec: ReviewRecord) -> str | None:
    for name in ("fb", "ground", "ife", "crew", "seat", "value", "wifi"):
        if getattr(rec, name) not in (1, 2, 3, 4, 5):
            return f"{name} score outside 1..5"
    return None


def _validate_safety(rec: SafetyRecord) -> str | None:
    return None if rec.score >= 0 else "score must be nonnegative"


def _validate_fleet(rec: FleetRecord) -> str | None:
    if rec.aircraft_age < 0:
        return "aircraft_age must be nonnegative"
    if rec.aircraft_cost <= 0:
        return "aircraft_cost must be positive"
    return None


def _validate_lexicon(rec: LexiconEntry) -> str | None:
    if not (-5 <= rec.score <= 5):
        return "score outside -5..5"
    if rec.word != rec.word.lower():
        return "word must be lowercase"
    return None


# schema kind -> (record type, row validator)
SCHEMAS = {
    "bookings": (ItineraryRecord, _validate_itinerary_common),
    "fares": (FareObservation, _validate_itinerary_common),
    "reviews": (ReviewRecord, _validate_review),
    "tweets": (TweetRecord, lambda rec: None),
    "safety": (SafetyRecord, _validate_safety),
    "fleet": (FleetRecord, _validate_fleet),
    "lexicon": (LexiconEntry, _validate_lexicon),
}


def schema_columns(schema: str) -> list[str]:
    rec_type, _ = SCHEMAS[schema]
    return [f.name for f in dc_fields(rec_type)]


def parse_dataset(path: str | Path, schema: str) -> ParseResult:
    """Parse one dataset file into validated records plus positioned rejects.

    Deterministic and order-preserving. Raises ParseError on a missing file,
    a header mismatch, or when more than 50% of data rows are rejected.
    """
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema: {schema!r}")
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"no such file: {path}")
    rec_type, validator = SCHEMAS[schema]
    columns = schema_columns(schema)
    coercers = [_COERCERS[f.type if isinstance(f.type, type) else eval(f.type)]
                for f in dc_fields(rec_type)]

    records: list = []
    rejected: list[tuple[int, str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, missing header") from None
        if header != columns:
            raise ParseError(
                f"{path}: header mismatch for schema {schema!r}: "
                f"expected {columns}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(columns):
                rejected.append((lineno, f"expected {len(columns)} fields, got {len(row)}"))
                continue
            try:
                values = [coerce(raw) for coerce, raw in zip(coercers, row)]
            except ValueError as exc:
                rejected.append((lineno, str(exc)))
                continue
            rec = rec_type(*values)
            problem = validator(rec)
            if problem is not None:
                rejected.append((lineno, f"{problem} at line {lineno}"))
                continue
            records.append(rec)

    total = len(records) + len(rejected)
    if total > 0 and len(rejected) > total / 2:
        raise ParseError(
            f"{path}: {len(rejected)}/{total} rows rejected (over 50% circuit breaker)"
        )
    return ParseResult(records=records, rejected=rejected)


def _format_value(val) -> str:
    if isinstance(val, bool):
        return "1" if val else "0"
    if isinstance(val, float):
        return f"{val:.6g}"
    return str(val)


def serialize_dataset(records: Iterable, schema: str, path: str | Path) -> None:
    """Write records back out in the schema's canonical column order."""
    columns = schema_columns(schema)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_format_value(getattr(rec, col)) for col in columns])


def filter_tweets(tweets: Iterable[TweetRecord]) -> list[TweetRecord]:
    """Keep only original (non-retweet, non-reply) English tweets."""
    return [
        t for t in tweets
        if not t.is_retweet and not t.is_reply and t.language_tag == "en"
    ]


@dataclass
class ReconcileResult:
    matched: list[ItineraryRecord]
    relative_errors: list[float]
    unmatched_count: int

    def error_histogram(self, bin_width: float = 0.01) -> Counter:
        """Histogram of relative fare errors, keyed by bin lower edge."""
        hist: Counter = Counter()
        for err in self.relative_errors:
            hist[math.floor(err / bin_width) * bin_width] += 1
        return hist


def reconcile_booking_fares(
    bookings: Iterable[ItineraryRecord],
    fares: Iterable[FareObservation],
) -> ReconcileResult:
    """Join bookings to the pricing dataset and adopt the pricing fare.

    The join key is (od, airline_id, dep_day_id, dbd, dep_time_mam). The
    booking's price is replaced by the pricing-dataset fare; the relative
    error between the two prices is recorded. Unmatched bookings are dropped
    and counted.
    """
    fare_by_key = {
        (f.od, f.airline_id, f.dep_day_id, f.dbd, f.dep_time_mam): f.price
        for f in fares
    }
    matched: list[ItineraryRecord] = []
    errors: list[float] = []
    unmatched = 0
    for b in bookings:
        key = (b.od, b.airline_id, b.dep_day_id, b.dbd, b.dep_time_mam)
        pricing_fare = fare_by_key.get(key)
        if pricing_fare is None:
            unmatched += 1
            continue
        errors.append(abs(b.price - pricing_fare) / pricing_fare)
        matched.append(
            ItineraryRecord(
                od=b.od,
                airline_id=b.airline_id,
                dep_day_id=b.dep_day_id,
                dbd=b.dbd,
                dep_time_mam=b.dep_time_mam,
                travel_time=b.travel_time,
                price=pricing_fare,
                is_bought=b.is_bought,
            )
        )
    return ReconcileResult(matched=matched, relative_errors=errors, unmatched_count=unmatched)
