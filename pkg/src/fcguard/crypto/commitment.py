"""Integer commitments C = R^m * S^r in an RSA group of hidden order, plus the
generic two-base proof of knowledge of an opening used by credential requests
and the cross-presentation link arms."""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass

from ..params import Profile
from ..serialize import encode_int, serializable
from .primes import powmod
from .transcript import Transcript


@serializable("commitment-key")
@dataclass(frozen=True)
class CommitmentKey:
    n: int
    r_base: int
    s_base: int

    @classmethod
    def derive(cls, n: int, s_base: int, label: str) -> "CommitmentKey":
        """Second base hashed from (label, n): a quadratic residue whose
        discrete log relative to s_base nobody learns from the derivation."""
        counter = 0
        while True:
            digest = hashlib.sha256(label.encode() + encode_int(n) + encode_int(counter)).digest()
            x = int.from_bytes(digest + hashlib.sha256(digest).digest(), "big") % n
            r_base = x * x % n
            if r_base not in (0, 1) and math.gcd(x, n) == 1:
                return cls(n=n, r_base=r_base, s_base=s_base)
            counter += 1

    def to_fields(self) -> dict:
        return {"n": self.n, "r_base": self.r_base, "s_base": self.s_base}

    @classmethod
    def from_fields(cls, fields: dict) -> "CommitmentKey":
        return cls(n=fields["n"], r_base=fields["r_base"], s_base=fields["s_base"])


@serializable("integer-commitment")
@dataclass(frozen=True)
class IntegerCommitment:
    value: int

    def to_fields(self) -> dict:
        return {"value": self.value}

    @classmethod
    def from_fields(cls, fields: dict) -> "IntegerCommitment":
        return cls(value=fields["value"])


def randomizer_bits(key: CommitmentKey, profile: Profile) -> int:
    return key.n.bit_length() + profile.stat_bits


def commit(key: CommitmentKey, m: int, rng: random.Random | None = None, r: int | None = None,
           profile: Profile | None = None) -> tuple[IntegerCommitment, int]:
    """Commit to m; returns the commitment and the opening randomness."""
    if r is None:
        if rng is None:
            raise ValueError("either rng or explicit randomness r is required")
        bits = randomizer_bits(key, profile) if profile else key.n.bit_length() + 80
        r = rng.getrandbits(bits)
    value = powmod(key.r_base, m, key.n) * powmod(key.s_base, r, key.n) % key.n
    return IntegerCommitment(value=value), r


def open_verify(key: CommitmentKey, commitment: IntegerCommitment, m: int, r: int) -> bool:
    if not isinstance(m, int) or not isinstance(r, int):
        return False
    return powmod(key.r_base, m, key.n) * powmod(key.s_base, r, key.n) % key.n == commitment.value


@dataclass(frozen=True)
class OpeningProof:
    """Proof of knowledge of (m, r) with C = base1^m * base2^r (mod n)."""

    challenge: int
    s_m: int
    s_r: int


def prove_opening(n: int, base1: int, base2: int, value: int, m: int, r: int,
                  label: str, nonce: bytes, profile: Profile, rng: random.Random,
                  m_bits: int | None = None, r_bits: int | None = None) -> OpeningProof:
    m_bits = m_bits if m_bits is not None else profile.attr_bits
    r_bits = r_bits if r_bits is not None else n.bit_length() + profile.stat_bits
    m_t = rng.getrandbits(m_bits + profile.challenge_bits + profile.stat_bits)
    r_t = rng.getrandbits(r_bits + profile.challenge_bits + profile.stat_bits)
    t_value = powmod(base1, m_t, n) * powmod(base2, r_t, n) % n
    c = _opening_challenge(label, nonce, n, base1, base2, value, t_value, profile)
    return OpeningProof(challenge=c, s_m=m_t + c * m, s_r=r_t + c * r)


def verify_opening(n: int, base1: int, base2: int, value: int, proof: OpeningProof,
                   label: str, nonce: bytes, profile: Profile) -> bool:
    try:
        t_hat = (
            powmod(value, -proof.challenge, n)
            * powmod(base1, proof.s_m, n)
            * powmod(base2, proof.s_r, n)
            % n
        )
    except (ValueError, ZeroDivisionError):
        return False
    return proof.challenge == _opening_challenge(label, nonce, n, base1, base2, value, t_hat, profile)


def _opening_challenge(label: str, nonce: bytes, n: int, base1: int, base2: int,
                       value: int, t_value: int, profile: Profile) -> int:
    t = Transcript(label)
    t.absorb_bytes(nonce)
    for x in (n, base1, base2, value, t_value):
        t.absorb(x)
    return t.challenge(profile.challenge_bits)
