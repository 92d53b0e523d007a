"""
Tests for extended-alphabet finite-context models.
"""

import itertools
import math
import random

import pytest

from nrcid.core.errors import (
    CapacityError,
    ChecksumError,
    InvalidInputError,
    InvalidSpecError,
    InvalidStateError,
    InvalidSymbolError,
    TruncatedStreamError,
    VersionMismatchError,
)
from nrcid.xafcm import (
    AUTO,
    ModelParams,
    XaModel,
    alpha_resolve,
    block_bits,
    compress_bits,
    deserialize,
    estimate_probability,
    parse_alpha,
    serialize,
)

ALPHAS = (AUTO, 1.0, 0.01)


def oracle_bits(training: str, query: str, k: int, d: int, size: int, alpha) -> float:
    """Straight-from-the-definition circular count model, no shared code."""
    n = len(training)
    counts = {}
    for i in range(n):
        context = "".join(training[(i - k + j) % n] for j in range(k))
        event = "".join(training[(i + j) % n] for j in range(d))
        counts[(context, event)] = counts.get((context, event), 0) + 1

    a = 1.0 / size**d if alpha == AUTO else alpha
    m = len(query)
    bits = 0.0
    for block in range(m // d):
        pos = block * d
        context = "".join(query[(pos - k + j) % m] for j in range(k))
        event = query[pos : pos + d]
        hit = counts.get((context, event), 0)
        total = sum(c for (ctx, _), c in counts.items() if ctx == context)
        bits -= math.log2((hit + a) / (total + a * size**d))
    return bits


def _model(training: str, k: int, d: int, size: int, alpha=AUTO) -> XaModel:
    return XaModel(ModelParams(k=k, d=d, alphabet_size=size, alpha=alpha)).learn(training).freeze()


class TestModelParams:
    """Tests for ModelParams and alpha handling."""

    def test_auto_alpha(self):
        """Test auto smoothing is 1 / |A|^d."""
        params = ModelParams(k=3, d=2, alphabet_size=4)
        assert params.extended_size == 16
        assert alpha_resolve(params) == pytest.approx(1 / 16)
        assert alpha_resolve(ModelParams(k=38, d=2, alphabet_size=17)) == pytest.approx(1 / 289)
        assert alpha_resolve(ModelParams(k=1, d=1, alphabet_size=2)) == 0.5

    def test_parse_alpha(self):
        """Test alpha accepts 'auto' and positive reals as text."""
        assert parse_alpha("AUTO") == AUTO
        assert parse_alpha("0.5") == 0.5
        with pytest.raises(InvalidSpecError):
            parse_alpha("0")
        with pytest.raises(InvalidSpecError):
            parse_alpha("lots")

    @pytest.mark.parametrize("k,d,size", [(0, 1, 4), (1, 0, 4), (1, 1, 1), (1, 1, 27)])
    def test_invalid_params(self, k, d, size):
        """Test out-of-range k, d and alphabet sizes are rejected."""
        with pytest.raises(InvalidSpecError):
            ModelParams(k=k, d=d, alphabet_size=size)

    def test_capacity(self):
        """Test |A|^d beyond the count range is a capacity error."""
        with pytest.raises(CapacityError):
            ModelParams(k=1, d=14, alphabet_size=26)


class TestLearn:
    """Tests for XaModel.learn."""

    def test_circular_counts(self):
        """Test contexts wrap around the training string."""
        model = _model("ABAB", k=1, d=1, size=2)
        assert model.counts.count("A", "B") == 2
        assert model.counts.count("B", "A") == 2
        assert model.counts.total_events == 4
        assert model.trained_symbols == 4

    def test_depth_two_wraps_events(self):
        """Test depth-d events wrap past the end as well."""
        model = _model("AAB", k=1, d=2, size=2)
        # positions 0,1,2 -> contexts B,A,A and events AA,AB,BA
        assert model.counts.count("B", "AA") == 1
        assert model.counts.count("A", "AB") == 1
        assert model.counts.count("A", "BA") == 1
        assert model.counts.context_count == 2

    def test_context_longer_than_training(self):
        """Test k larger than the training string still wraps."""
        model = _model("AB", k=3, d=1, size=2)
        assert model.counts.total_events == 2
        assert model.counts.count("BAB", "A") == 1
        assert model.counts.count("ABA", "B") == 1

    def test_frozen_model_rejects_learning(self):
        """Test learning into a frozen model fails."""
        model = _model("ABAB", k=1, d=1, size=2)
        with pytest.raises(InvalidStateError):
            model.learn("AB")

    def test_symbol_outside_alphabet(self):
        """Test training symbols must belong to the alphabet."""
        with pytest.raises(InvalidSymbolError):
            XaModel(ModelParams(k=1, d=1, alphabet_size=2)).learn("ABC")

    def test_empty_training(self):
        """Test empty training strings are rejected."""
        with pytest.raises(InvalidInputError):
            XaModel(ModelParams(k=1, d=1, alphabet_size=2)).learn("")

    def test_learning_twice_doubles_counts(self):
        """Test learning the same string twice doubles every count."""
        text = "".join(random.Random(7).choice("ABC") for _ in range(150))
        once = _model(text, 2, 2, 3)
        twice = XaModel(ModelParams(k=2, d=2, alphabet_size=3)).learn(text).learn(text)
        assert twice.counts.context_count == once.counts.context_count
        for context, events in once.counts.items():
            assert twice.counts.total(context) == 2 * once.counts.total(context)
            for event, count in events.items():
                assert twice.counts.count(context, event) == 2 * count
        assert twice.trained_symbols == 300

    def test_learning_is_deterministic(self):
        """Test equal training strings give equal models."""
        text = "".join(random.Random(1).choice("ABC") for _ in range(300))
        assert _model(text, 3, 2, 3) == _model(text, 3, 2, 3)


class TestCompress:
    """Tests for probability estimates and bit counts."""

    def test_untrained_model_is_uniform(self):
        """Test an empty model codes every symbol at log2 |A| bits."""
        model = XaModel(ModelParams(k=2, d=2, alphabet_size=4)).freeze()
        result = compress_bits(model, "ABCDABCDA")
        assert result.coded_symbols == 8
        assert result.bits == pytest.approx(8 * 2.0, abs=1e-12)

    def test_trailing_symbols_not_coded(self):
        """Test len % d trailing symbols are excluded."""
        model = _model("ABCABC", k=1, d=3, size=3)
        assert compress_bits(model, "ABCABCAB").coded_symbols == 6

    def test_query_too_short(self):
        """Test queries shorter than max(k, d) are rejected."""
        model = _model("ABAB", k=4, d=1, size=2)
        with pytest.raises(InvalidInputError):
            compress_bits(model, "ABA")

    def test_probability_formula(self):
        """Test (count + alpha) / (total + alpha |A|^d) for a fixed alpha."""
        model = _model("AAAB", k=1, d=1, size=2, alpha=1.0)
        # context A: A->A twice, A->B once
        assert estimate_probability(model, "A", "A") == pytest.approx(3 / 5)
        assert estimate_probability(model, "A", "B") == pytest.approx(2 / 5)
        assert estimate_probability(model, "B", "A") == pytest.approx(2 / 3)

    def test_block_bits_example(self):
        """Test bits(A|A) = log2(5/3) for a model of "AABA" with alpha 1."""
        model = _model("AABA", k=1, d=1, size=2, alpha=1.0)
        assert block_bits(model, "A", "A") == pytest.approx(math.log2(5 / 3), abs=1e-12)
        untrained = XaModel(ModelParams(k=1, d=3, alphabet_size=2)).freeze()
        assert block_bits(untrained, "A", "ABA") == pytest.approx(3.0, abs=1e-12)

    def test_memorized_string_costs_almost_nothing(self):
        """Test a query the model has seen one hundred times codes in about zero bits."""
        model = _model("A" * 100, k=1, d=1, size=2, alpha=0.001)
        bits = compress_bits(model, "AAAA").bits
        assert bits == pytest.approx(-4 * math.log2(100.001 / 100.002), rel=1e-6)
        assert bits < 1e-4

    def test_training_beats_uniform_on_its_own_string(self):
        """Test a learned model codes its training string in fewer bits than an empty one."""
        text = "ABCAABCBBACABC" * 3
        trained = _model(text, 2, 1, 3)
        untrained = XaModel(ModelParams(k=2, d=1, alphabet_size=3)).freeze()
        assert compress_bits(trained, text).bits < compress_bits(untrained, text).bits

    def test_matches_oracle_on_example(self):
        """Test one hand-picked case against the reference implementation."""
        training, query = "ABCCBAABCA", "CABBACAB"
        for alpha in ALPHAS:
            model = _model(training, 2, 2, 3, alpha)
            expected = oracle_bits(training, query, 2, 2, 3, alpha)
            assert compress_bits(model, query).bits == pytest.approx(expected, abs=1e-9)

    @pytest.mark.slow
    def test_matches_oracle_exhaustive_short_strings(self):
        """Test every binary string up to length 10 and ternary up to 6 against the oracle."""
        for size, max_len in ((2, 10), (3, 6)):
            symbols = "ABC"[:size]
            for n in range(1, max_len + 1):
                for chars in itertools.product(symbols, repeat=n):
                    training = "".join(chars)
                    query = training[::-1] + training
                    for k, d, alpha in itertools.product((1, 2, 3), (1, 2), ALPHAS):
                        if len(query) < max(k, d):
                            continue
                        model = _model(training, k, d, size, alpha)
                        expected = oracle_bits(training, query, k, d, size, alpha)
                        assert compress_bits(model, query).bits == pytest.approx(expected, abs=1e-9)

    @pytest.mark.slow
    def test_matches_oracle_random(self):
        """Test 10^4 random cases with lengths up to 64."""
        rng = random.Random(12345)
        for _ in range(10_000):
            size = rng.randint(2, 3)
            symbols = "ABC"[:size]
            k, d = rng.randint(1, 3), rng.randint(1, 2)
            alpha = rng.choice(ALPHAS)
            training = "".join(rng.choice(symbols) for _ in range(rng.randint(1, 64)))
            query = "".join(rng.choice(symbols) for _ in range(rng.randint(max(k, d), 64)))
            model = _model(training, k, d, size, alpha)
            expected = oracle_bits(training, query, k, d, size, alpha)
            assert compress_bits(model, query).bits == pytest.approx(expected, abs=1e-9)

    @pytest.mark.slow
    def test_probabilities_normalize(self):
        """Test probabilities over all |A|^d events sum to 1 for seen and unseen contexts."""
        rng = random.Random(99)
        for _ in range(120):
            size, d = rng.randint(2, 4), rng.randint(1, 3)
            k = rng.randint(1, 3)
            symbols = "ABCD"[:size]
            alpha = rng.choice(ALPHAS)
            training = "".join(rng.choice(symbols) for _ in range(rng.randint(1, 40)))
            model = _model(training, k, d, size, alpha)
            contexts = list(model.counts.contexts())[:3] + [symbols[-1] * k]
            for context in contexts:
                total = sum(
                    estimate_probability(model, context, "".join(event))
                    for event in itertools.product(symbols, repeat=d)
                )
                assert total == pytest.approx(1.0, abs=1e-9)


class TestCodec:
    """Tests for the xaFCM text codec."""

    def test_round_trip(self):
        """Test deserialize(serialize(m)) == m and re-serialization is byte-identical."""
        text = "".join(random.Random(3).choice("ABCD") for _ in range(200))
        model = _model(text, 3, 2, 4, 0.25)
        data = serialize(model)
        back = deserialize(data)
        assert back == model
        assert back.frozen
        assert back.trained_symbols == 200
        assert serialize(back) == data

    def test_empty_model(self):
        """Test an untrained model serializes with zero contexts."""
        model = XaModel(ModelParams(k=2, d=1, alphabet_size=3))
        data = serialize(model)
        assert b"contexts=0\n" in data
        assert deserialize(data).counts.context_count == 0

    def test_checksum_mismatch(self):
        """Test a tampered count fails the checksum."""
        data = serialize(_model("ABBA" * 10, 2, 1, 2)).decode()
        tampered = data.replace("=10", "=11", 1)
        assert tampered != data
        with pytest.raises(ChecksumError):
            deserialize(tampered.encode())

    def test_inserted_blank_line_fails_checksum(self):
        """Test blank lines inside the stream are content, while trailing ones are ignored."""
        lines = serialize(_model("ABBA" * 10, 2, 1, 2)).decode().split("\n")
        padded = "\n".join(lines[:2] + [""] + lines[2:])
        with pytest.raises(ChecksumError):
            deserialize(padded.encode())
        assert deserialize(("\n".join(lines) + "\n\n").encode()) == _model("ABBA" * 10, 2, 1, 2)

    def test_version_mismatch(self):
        """Test an unknown format version is reported as such."""
        data = serialize(_model("ABBA", 1, 1, 2)).replace(b"xafcm v1", b"xafcm v2")
        with pytest.raises(VersionMismatchError):
            deserialize(data)

    def test_truncated(self):
        """Test a stream cut before its checksum is truncated."""
        lines = serialize(_model("ABBA", 1, 1, 2)).decode().splitlines()
        with pytest.raises(TruncatedStreamError):
            deserialize("\n".join(lines[:-1]).encode())
