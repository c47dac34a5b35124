"""Lexicon-based sentiment scoring aggregated per airline on a 0-10 scale.

Review free text is scored as the mean lexicon valence of its matched tokens
and airline review sentiment is aggregated by mean; tweet sentiment is
aggregated by median. Raw scores live in [-5, 5] and are mapped to [0, 10]
by adding 5.
"""

from __future__ import annotations

import csv
import logging
import re
import statistics
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Literal, Mapping, Sequence

from .ingest import LexiconEntry

__all__ = [
    "SentimentScore",
    "load_stopwords",
    "load_default_lexicon",
    "tokenize",
    "score_text",
    "scale_to_10",
    "aggregate_airline_sentiment",
]

log = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[^0-9a-z]+")


def load_stopwords() -> frozenset[str]:
    """Fixed, versioned English stop-word list shipped with the package."""
    text = resources.files("farecast.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


def load_default_lexicon() -> dict[str, int]:
    """Shipped valence lexicon subset (word -> integer score in -5..5)."""
    text = resources.files("farecast.data").joinpath("lexicon.csv").read_text("utf-8")
    reader = csv.reader(text.strip().splitlines())
    next(reader)  # header
    return {word: int(score) for word, score in reader}


def lexicon_as_dict(entries: Iterable[LexiconEntry]) -> dict[str, int]:
    return {e.word: e.score for e in entries}


_STOPWORDS = None


def tokenize(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase, strip punctuation, drop stop words; order preserved.

    Internal apostrophes are removed before splitting, so "don't" -> "dont".
    """
    global _STOPWORDS
    if stopwords is None:
        if _STOPWORDS is None:
            _STOPWORDS = load_stopwords()
        stopwords = _STOPWORDS
    lowered = text.lower().replace("'", "").replace("’", "")
    tokens = [tok for tok in _WORD_RE.split(lowered) if tok]
    return [tok for tok in tokens if tok not in stopwords]


def score_text(tokens: Sequence[str], lexicon: Mapping[str, int]) -> float | None:
    """Mean lexicon score over matched tokens; None when nothing matches."""
    if not lexicon:
        raise ValueError("lexicon must be nonempty")
    scores = [lexicon[tok] for tok in tokens if tok in lexicon]
    if not scores:
        return None
    return sum(scores) / len(scores)


def scale_to_10(raw: float) -> float:
    """Affine map from [-5, 5] onto [0, 10]."""
    if not -5.0 <= raw <= 5.0:
        raise ValueError(f"raw sentiment {raw} outside [-5, 5]")
    return raw + 5.0


@dataclass(frozen=True)
class SentimentScore:
    airline_id: int
    score_0_10: float
    n_texts: int
    matched_token_share: float


def aggregate_airline_sentiment(
    texts_by_airline: Mapping[int, Sequence[str]],
    lexicon: Mapping[str, int],
    method: Literal["mean", "median"],
    stopwords: frozenset[str] | None = None,
) -> dict[int, SentimentScore]:
    """Score each text and reduce per airline with the requested statistic.

    Texts with no lexicon match are excluded from the aggregate (but counted
    in matched_token_share's denominator). Airlines without a single scored
    text are omitted with a warning.
    """
    if method not in ("mean", "median"):
        raise ValueError(f"unknown aggregation method: {method!r}")
    out: dict[int, SentimentScore] = {}
    for airline_id in sorted(texts_by_airline):
        raws: list[float] = []
        n_tokens = 0
        n_matched = 0
        for text in texts_by_airline[airline_id]:
            tokens = tokenize(text, stopwords)
            n_tokens += len(tokens)
            n_matched += sum(1 for tok in tokens if tok in lexicon)
            raw = score_text(tokens, lexicon)
            if raw is not None:
                raws.append(raw)
        if not raws:
            log.warning("airline %s: no text matched the lexicon; omitted", airline_id)
            continue
        raw_agg = statistics.mean(raws) if method == "mean" else statistics.median(raws)
        out[airline_id] = SentimentScore(
            airline_id=airline_id,
            score_0_10=scale_to_10(raw_agg),
            n_texts=len(raws),
            matched_token_share=n_matched / n_tokens if n_tokens else 0.0,
        )
    return out
