import pytest

from fcguard.errors import FcGuardError
from fcguard.serialize import canonical_int_hex, decode_int, dumps, encode_int, loads


def test_int_encoding_round_trip():
    for value in [0, 1, -1, 255, 256, -98765, 10**50, -(10**50), 123_456_789]:
        assert decode_int(encode_int(value)) == value


def test_int_encoding_is_length_prefixed_big_endian():
    assert encode_int(255) == b"\x00" + (1).to_bytes(4, "big") + b"\xff"
    assert encode_int(-255) == b"\x01" + (1).to_bytes(4, "big") + b"\xff"
    assert encode_int(0) == b"\x00" + (1).to_bytes(4, "big") + b"\x00"


def test_canonical_hex_matches_encoding():
    assert canonical_int_hex(123_456_789) == encode_int(123_456_789).hex()


def test_dumps_sorts_keys_and_is_stable():
    a = dumps({"b": 2, "a": 1})
    b = dumps({"a": 1, "b": 2})
    assert a == b
    assert dumps({"x": [1, "two", b"\x03", None, True]}) == dumps(
        {"x": [1, "two", b"\x03", None, True]})


def test_round_trip_nested():
    value = {"ints": [0, -5, 2**200], "s": "text", "b": b"\x00\xff", "flag": False,
             "none": None, "nested": {"k": [1, 2]}}
    assert loads(dumps(value)) == value


def test_non_string_keys_rejected():
    with pytest.raises(FcGuardError):
        dumps({1: "x"})


def test_floats_rejected():
    with pytest.raises(FcGuardError):
        dumps({"x": 1.5})


def test_distinct_values_distinct_bytes():
    assert dumps({"v": 1}) != dumps({"v": "1"})
    assert dumps([1, 2]) != dumps([2, 1])
