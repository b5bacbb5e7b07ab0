"""Parameter profiles.

`toy` keeps every modulus small enough for fast, deterministic tests; `paper`
is the benchmark-scale configuration (1536-bit Sophie Germain primes for the
issuer moduli and 2048-bit encryption moduli).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError

# Bound for encoded attributes: plain integers below 2**252 pass through,
# strings hash down to this width.
ATTRIBUTE_BITS = 252


@dataclass(frozen=True)
class Profile:
    name: str
    sg_prime_bits: int  # size of the Sophie Germain primes p', q'
    challenge_bits: int
    stat_bits: int  # statistical hiding slack for integer sigma responses
    elgamal_modulus_bits: int
    paillier_modulus_bits: int
    elgamal_plain_bound: int = 1 << 30  # covers 9-digit SSNs
    attr_bits: int = ATTRIBUTE_BITS

    @property
    def modulus_bits(self) -> int:
        """Bits of n = (2p'+1)(2q'+1)."""
        return 2 * (self.sg_prime_bits + 1)

    @property
    def e_bits(self) -> int:
        """Total length of the prime signature exponent."""
        return self.attr_bits + self.challenge_bits + self.stat_bits + 5

    @property
    def e_window_bits(self) -> int:
        """Width of the interval [2^(e_bits-1), 2^(e_bits-1) + 2^e_window_bits)
        the exponent is drawn from; must leave room for the response slack."""
        return self.e_bits - self.challenge_bits - self.stat_bits - 3

    @property
    def v_bits(self) -> int:
        """Length of the signature blinding exponent."""
        return self.modulus_bits + self.attr_bits + self.challenge_bits + self.stat_bits


TOY = Profile(
    name="toy",
    sg_prime_bits=64,
    challenge_bits=80,
    stat_bits=80,
    elgamal_modulus_bits=256,
    paillier_modulus_bits=512,
)

PAPER = Profile(
    name="paper",
    sg_prime_bits=1536,
    challenge_bits=256,
    stat_bits=80,
    elgamal_modulus_bits=2048,
    paillier_modulus_bits=2048,
)

PROFILES = {p.name: p for p in (TOY, PAPER)}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ParameterError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}") from None
