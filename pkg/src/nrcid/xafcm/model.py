"""
Extended-alphabet finite-context models (xaFCM).

An order-k, depth-d model counts, for every length-k context, how often each
length-d word followed it. The probability of word w after context c is

    P(w | c) = (v(w|c) + alpha) / (v(c) + alpha * |A|^d)

where v(c) is the total count stored under c. Bits are the information
content -log2 P summed over consecutive depth-d blocks; no entropy coder is
run. Both learning and compression treat strings as circular.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple, Union

import numpy as np

from ..core.errors import (
    CapacityError,
    InvalidInputError,
    InvalidSpecError,
    InvalidStateError,
    InvalidSymbolError,
)
from ..quantizer import ALPHABET, alphabet

logger = logging.getLogger(__name__)

AUTO = "auto"
MAX_EXTENDED_ALPHABET = 2**63 - 1

Alpha = Union[str, float]


def parse_alpha(value: Union[str, float]) -> Alpha:
    """Accept "auto" or a positive real (number or text)."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text == AUTO:
            return AUTO
        try:
            value = float(text)
        except ValueError as e:
            raise InvalidSpecError(f"alpha must be 'auto' or a positive real, got {value!r}") from e
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise InvalidSpecError(f"alpha must be a positive finite real, got {value!r}")
    return value


def format_alpha(value: Alpha) -> str:
    return AUTO if value == AUTO else repr(float(value))


@dataclass(frozen=True)
class ModelParams:
    """Context order k, depth d, alphabet size and smoothing mode."""

    k: int
    d: int
    alphabet_size: int
    alpha: Alpha = AUTO

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidSpecError(f"k must be a positive integer, got {self.k}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidSpecError(f"d must be a positive integer, got {self.d}")
        if not 2 <= self.alphabet_size <= len(ALPHABET):
            raise InvalidSpecError(
                f"alphabet_size must be in [2, {len(ALPHABET)}], got {self.alphabet_size}"
            )
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        if self.alphabet_size**self.d > MAX_EXTENDED_ALPHABET:
            raise CapacityError(
                f"|A|^d = {self.alphabet_size}^{self.d} exceeds the count arithmetic range"
            )
        if not math.isfinite(self.resolved_alpha * float(self.extended_size)):
            raise CapacityError(f"alpha * |A|^d overflows for {self}")

    @property
    def extended_size(self) -> int:
        """|A|^d, the number of distinct depth-d words."""
        return self.alphabet_size**self.d

    @property
    def symbols(self) -> str:
        return alphabet(self.alphabet_size)

    @property
    def resolved_alpha(self) -> float:
        return alpha_resolve(self)


def alpha_resolve(params: ModelParams, counts_view: Optional["CountsTable"] = None) -> float:
    """
    Smoothing pseudo-count for a model.

    A fixed alpha is returned as is. "auto" spreads one pseudo-event over the
    extended alphabet, alpha = 1 / |A|^d, constant across contexts; the counts
    are not consulted.
    """
    if params.alpha == AUTO:
        return 1.0 / float(params.alphabet_size**params.d)
    return float(params.alpha)


class CountsTable:
    """
    Sparse context -> {event -> count} table with cached per-context totals.

    Zero counts are never stored.
    """

    def __init__(self):
        self._events: Dict[str, Dict[str, int]] = {}
        self._totals: Dict[str, int] = {}

    def increment(self, context: str, event: str, amount: int = 1) -> None:
        if amount < 1:
            raise InvalidInputError(f"Count increments must be positive, got {amount}")
        events = self._events.setdefault(context, {})
        events[event] = events.get(event, 0) + amount
        self._totals[context] = self._totals.get(context, 0) + amount

    def count(self, context: str, event: str) -> int:
        events = self._events.get(context)
        return events.get(event, 0) if events else 0

    def total(self, context: str) -> int:
        return self._totals.get(context, 0)

    def contexts(self) -> Iterator[str]:
        return iter(sorted(self._events))

    def items(self) -> Iterator[Tuple[str, Dict[str, int]]]:
        for context in sorted(self._events):
            yield context, self._events[context]

    @property
    def context_count(self) -> int:
        return len(self._events)

    @property
    def total_events(self) -> int:
        return sum(self._totals.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountsTable):
            return NotImplemented
        return self._events == other._events

    __hash__ = None

    def __len__(self) -> int:
        return len(self._events)


def _check_symbols(text: str, symbols: str, what: str) -> None:
    stray = set(text) - set(symbols)
    if stray:
        raise InvalidSymbolError(
            f"{what} contains symbols {''.join(sorted(stray))!r} outside alphabet {symbols!r}"
        )


def _circular(text: str, start: int, length: int) -> str:
    n = len(text)
    return "".join(text[j % n] for j in range(start, start + length))


@dataclass(frozen=True)
class CompressionResult:
    """Information content of a query and the number of symbols it covers."""

    bits: float
    coded_symbols: int


class XaModel:
    """
    Order-k, depth-d count model.

    learn() mutates the model and needs exclusive access; freeze() seals it,
    after which the model is read-only and safe to share between threads.
    """

    def __init__(self, params: ModelParams, counts: Optional[CountsTable] = None, trained_symbols: int = 0):
        self.params = params
        self.counts = counts if counts is not None else CountsTable()
        self.trained_symbols = trained_symbols
        self._frozen = False

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "XaModel":
        self._frozen = True
        return self

    def learn(self, training: str) -> "XaModel":
        """
        Count every (context, event) pair of a circular training string.

        For each position i, the context is the k symbols ending just before i
        and the event is the d symbols starting at i, both wrapping around the
        ends, giving exactly len(training) increments.

        Raises:
            InvalidStateError: the model is frozen
            InvalidInputError: empty training string
            InvalidSymbolError: symbol outside the alphabet
        """
        if self._frozen:
            raise InvalidStateError("Cannot learn into a frozen model")
        n = len(training)
        if n < 1:
            raise InvalidInputError("Training string must not be empty")
        _check_symbols(training, self.params.symbols, "Training string")

        k, d = self.params.k, self.params.d
        ext = _circular(training, -k, k) + training + _circular(training, n, d - 1)
        width = k + d
        pairs = Counter(ext[i : i + width] for i in range(n))
        for key in sorted(pairs):
            self.counts.increment(key[:k], key[k:], pairs[key])
        self.trained_symbols += n

        logger.debug(
            f"[learn] k={k} d={d} symbols={n} contexts={self.counts.context_count}"
        )
        return self

    def _check_word(self, context: str, event: str) -> None:
        if len(context) != self.params.k:
            raise InvalidInputError(f"Context must have length {self.params.k}, got {len(context)}")
        if len(event) != self.params.d:
            raise InvalidInputError(f"Event must have length {self.params.d}, got {len(event)}")
        _check_symbols(context + event, self.params.symbols, "Context/event")

    def probability(self, context: str, event: str) -> float:
        """(v(event|context) + alpha) / (v(context) + alpha |A|^d)."""
        self._check_word(context, event)
        alpha = alpha_resolve(self.params, self.counts)
        numerator = self.counts.count(context, event) + alpha
        denominator = self.counts.total(context) + alpha * self.params.extended_size
        return numerator / denominator

    def block_bits(self, context: str, event: str) -> float:
        return -math.log2(self.probability(context, event))

    def compress_bits(self, query: str) -> CompressionResult:
        """
        Bits needed for a query under the static model.

        The query is split into consecutive depth-d blocks from position 0;
        each block is conditioned on the k preceding symbols, wrapping into
        the end of the query for the first blocks. Trailing len % d symbols
        are not coded. Counts are never updated.

        Raises:
            InvalidInputError: query shorter than max(k, d)
            InvalidSymbolError: symbol outside the alphabet
        """
        k, d = self.params.k, self.params.d
        n = len(query)
        if n < max(k, d):
            raise InvalidInputError(f"Query of length {n} is shorter than max(k, d) = {max(k, d)}")
        _check_symbols(query, self.params.symbols, "Query")

        blocks = n // d
        ext = query[n - k :] + query
        hits = np.empty(blocks, dtype=np.float64)
        totals = np.empty(blocks, dtype=np.float64)
        for i in range(blocks):
            start = i * d
            context = ext[start : start + k]
            hits[i] = self.counts.count(context, query[start : start + d])
            totals[i] = self.counts.total(context)

        alpha = alpha_resolve(self.params, self.counts)
        probabilities = (hits + alpha) / (totals + alpha * self.params.extended_size)
        bits = float(-np.sum(np.log2(probabilities)))
        return CompressionResult(bits=bits, coded_symbols=blocks * d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, XaModel):
            return NotImplemented
        return self.params == other.params and self.counts == other.counts

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"XaModel(k={self.params.k}, d={self.params.d}, |A|={self.params.alphabet_size}, "
            f"alpha={format_alpha(self.params.alpha)}, contexts={self.counts.context_count})"
        )


# =============================================================================
# Function-style API
# =============================================================================


def learn(model: XaModel, training: str) -> XaModel:
    return model.learn(training)


def estimate_probability(model: XaModel, context: str, event: str) -> float:
    return model.probability(context, event)


def block_bits(model: XaModel, context: str, event: str) -> float:
    return model.block_bits(context, event)


def compress_bits(model: XaModel, query: str) -> CompressionResult:
    return model.compress_bits(query)
