import pytest

from fcguard.crypto.encoding import ATTRIBUTE_BOUND, encode_attribute
from fcguard.errors import EncodingRangeError

CORPUS = ["a", "b", "Bank of A", "Bank of B", "Alice Example", "alice example",
          "", " ", "Bank of A ", "123456789"]


def test_small_integers_are_fixed_points():
    assert encode_attribute(123_456_789) == 123_456_789
    assert encode_attribute(0) == 0
    assert encode_attribute(ATTRIBUTE_BOUND - 1) == ATTRIBUTE_BOUND - 1


def test_string_encoding_deterministic():
    assert encode_attribute("Bank of A") == encode_attribute("Bank of A")


def test_distinctness_over_corpus():
    # verified exhaustively over the fixed corpus
    encoded = [encode_attribute(s) for s in CORPUS]
    assert len(set(encoded)) == len(CORPUS)
    assert encode_attribute("a") != encode_attribute("b")


def test_strings_land_below_bound():
    for s in CORPUS:
        assert 0 <= encode_attribute(s) < ATTRIBUTE_BOUND


def test_integer_over_bound_rejected():
    with pytest.raises(EncodingRangeError):
        encode_attribute(ATTRIBUTE_BOUND)
    with pytest.raises(EncodingRangeError):
        encode_attribute(-1)


def test_unsupported_types_rejected():
    with pytest.raises(TypeError):
        encode_attribute(1.5)
    with pytest.raises(TypeError):
        encode_attribute(True)
