"""Paillier encryption with g = N + 1. Decryption is exact for any plaintext
below N, which is why large bank account numbers go through this scheme
rather than exponential ElGamal."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..errors import DecryptionError, EncodingRangeError
from ..params import Profile
from ..serialize import serializable
from .ciphertext import Ciphertext
from .primes import invert, powmod, random_prime


@serializable("paillier-pk")
@dataclass(frozen=True)
class PaillierPublicKey:
    n: int
    g: int  # always n + 1

    @property
    def n_squared(self) -> int:
        return self.n * self.n

    def key_id(self) -> str:
        from ..serialize import dumps
        import hashlib

        return hashlib.sha256(dumps(self)).hexdigest()[:16]

    def to_fields(self) -> dict:
        return {"g": self.g, "n": self.n}

    @classmethod
    def from_fields(cls, fields: dict) -> "PaillierPublicKey":
        return cls(n=fields["n"], g=fields["g"])


@dataclass(frozen=True)
class PaillierKeyPair:
    public: PaillierPublicKey
    lam: int  # lcm(p-1, q-1)
    mu: int  # L(g^lam mod n^2)^-1 mod n

    @classmethod
    def from_primes(cls, p: int, q: int) -> "PaillierKeyPair":
        n = p * q
        g = n + 1
        lam = math.lcm(p - 1, q - 1)
        mu = invert(_ell(powmod(g, lam, n * n), n), n)
        return cls(public=PaillierPublicKey(n=n, g=g), lam=lam, mu=mu)


def _ell(u: int, n: int) -> int:
    return (u - 1) // n


def paillier_keygen(profile: Profile, rng: random.Random) -> PaillierKeyPair:
    half = profile.paillier_modulus_bits // 2
    p = random_prime(half, rng)
    q = random_prime(half, rng)
    while q == p:
        q = random_prime(half, rng)
    return PaillierKeyPair.from_primes(p, q)


def paillier_encrypt(pk: PaillierPublicKey, m: int, rng: random.Random | None = None, r: int | None = None) -> Ciphertext:
    if not 0 <= m < pk.n:
        raise EncodingRangeError("plaintext must lie in [0, n)")
    if r is None:
        if rng is None:
            raise ValueError("either rng or explicit randomness r is required")
        while True:
            r = rng.randrange(1, pk.n)
            if math.gcd(r, pk.n) == 1:
                break
    n2 = pk.n_squared
    # g = n + 1 gives g^m = 1 + m*n (mod n^2)
    c = (1 + m * pk.n) % n2 * powmod(r, pk.n, n2) % n2
    return Ciphertext(scheme="paillier", parts=(c,))


def paillier_decrypt(keypair: PaillierKeyPair, ct: Ciphertext) -> int:
    if ct.scheme != "paillier" or len(ct.parts) != 1:
        raise DecryptionError("not a Paillier ciphertext")
    n = keypair.public.n
    c = ct.parts[0]
    if not 0 <= c < n * n:
        raise DecryptionError("ciphertext out of range")
    return _ell(powmod(c, keypair.lam, n * n), n) * keypair.mu % n
