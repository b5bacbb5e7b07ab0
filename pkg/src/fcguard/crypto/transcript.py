"""Fiat-Shamir transcript: a domain-separated, order-sensitive hash of
absorbed messages, producing challenges of the profile's bit length."""

from __future__ import annotations

import hashlib
from typing import Any

from ..serialize import dumps


class Transcript:
    """Absorbs canonical message bytes and derives a deterministic challenge.

    The state is the label followed by each absorbed message with an 8-byte
    length prefix; with no messages the challenge is the hash of the label
    alone.
    """

    def __init__(self, label: str):
        self.label = label
        self._parts: list[bytes] = [label.encode("utf-8")]

    def absorb_bytes(self, data: bytes) -> None:
        self._parts.append(len(data).to_bytes(8, "big") + data)

    def absorb(self, value: Any) -> None:
        """Absorb any envelope-serializable value in canonical form."""
        self.absorb_bytes(dumps(value))

    def state_digest(self) -> bytes:
        return hashlib.sha256(b"".join(self._parts)).digest()

    def challenge(self, bits: int) -> int:
        if bits % 8 != 0 or not 0 < bits <= 256:
            raise ValueError("challenge bits must be a positive multiple of 8, at most 256")
        return int.from_bytes(self.state_digest()[: bits // 8], "big")


def transcript_challenge(label: str, *messages: Any, bits: int = 256) -> int:
    t = Transcript(label)
    for msg in messages:
        t.absorb(msg)
    return t.challenge(bits)
