"""Attribute encoding: integers below the bound pass through unchanged,
strings hash down to a fixed 252-bit width."""

from __future__ import annotations

import hashlib

from ..errors import EncodingRangeError
from ..params import ATTRIBUTE_BITS

ATTRIBUTE_BOUND = 1 << ATTRIBUTE_BITS


def encode_attribute(raw: str | int) -> int:
    if isinstance(raw, bool):
        raise TypeError("attributes must be strings or integers")
    if isinstance(raw, int):
        if not 0 <= raw < ATTRIBUTE_BOUND:
            raise EncodingRangeError(f"integer attribute out of range [0, 2^{ATTRIBUTE_BITS})")
        return raw
    if isinstance(raw, str):
        digest = hashlib.sha256(raw.encode("utf-8")).digest()
        return int.from_bytes(digest, "big") >> (256 - ATTRIBUTE_BITS)
    raise TypeError(f"attributes must be strings or integers, got {type(raw).__name__}")
