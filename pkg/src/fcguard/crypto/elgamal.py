"""Exponential ElGamal over a safe-prime group.

The message rides in the exponent so that sigma protocols can relate a
ciphertext to a committed attribute. Decryption recovers g^m and then solves
a bounded discrete log by baby-step/giant-step, which caps plaintexts at the
profile's bound (default 2^30, enough for 9-digit SSNs).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from ..errors import DecryptionError, EncodingRangeError
from ..params import Profile
from ..serialize import serializable
from .ciphertext import Ciphertext
from .primes import powmod, safe_prime

# 2048-bit MODP group (RFC 3526, group 14). P is a safe prime and 2 generates
# the subgroup of quadratic residues of prime order Q = (P-1)/2; using the
# standardized group keeps benchmark-profile key generation cheap.
MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)


@serializable("elgamal-pk")
@dataclass(frozen=True)
class ElGamalPublicKey:
    p: int  # safe prime
    q: int  # subgroup order, p = 2q + 1
    g: int  # generator of the order-q subgroup
    h: int  # g^sk
    plain_bound: int

    def key_id(self) -> str:
        from ..serialize import dumps
        import hashlib

        return hashlib.sha256(dumps(self)).hexdigest()[:16]

    def to_fields(self) -> dict:
        return {"g": self.g, "h": self.h, "p": self.p, "plain_bound": self.plain_bound, "q": self.q}

    @classmethod
    def from_fields(cls, fields: dict) -> "ElGamalPublicKey":
        return cls(p=fields["p"], q=fields["q"], g=fields["g"], h=fields["h"], plain_bound=fields["plain_bound"])


@dataclass(frozen=True)
class ElGamalKeyPair:
    public: ElGamalPublicKey
    sk: int
    _baby_table: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_secrets(cls, p: int, q: int, g: int, sk: int, plain_bound: int = 1 << 30) -> "ElGamalKeyPair":
        pub = ElGamalPublicKey(p=p, q=q, g=g, h=powmod(g, sk, p), plain_bound=plain_bound)
        return cls(public=pub, sk=sk)


def elgamal_keygen(profile: Profile, rng: random.Random) -> ElGamalKeyPair:
    if profile.elgamal_modulus_bits == 2048:
        p, q, g = MODP_2048, (MODP_2048 - 1) // 2, 2
    else:
        p, q = safe_prime(profile.elgamal_modulus_bits, rng)
        g = 4  # square, hence a generator of the order-q subgroup
    sk = rng.randrange(2, q)
    return ElGamalKeyPair.from_secrets(p, q, g, sk, profile.elgamal_plain_bound)


def elgamal_encrypt(pk: ElGamalPublicKey, m: int, rng: random.Random | None = None, r: int | None = None) -> Ciphertext:
    if not 0 <= m < pk.plain_bound:
        raise EncodingRangeError(f"plaintext out of ElGamal bound [0, {pk.plain_bound})")
    if r is None:
        if rng is None:
            raise ValueError("either rng or explicit randomness r is required")
        r = rng.randrange(1, pk.q)
    c1 = powmod(pk.g, r, pk.p)
    c2 = powmod(pk.g, m, pk.p) * powmod(pk.h, r, pk.p) % pk.p
    return Ciphertext(scheme="elgamal", parts=(c1, c2))


def elgamal_decrypt(keypair: ElGamalKeyPair, ct: Ciphertext) -> int:
    if ct.scheme != "elgamal" or len(ct.parts) != 2:
        raise DecryptionError("not an ElGamal ciphertext")
    pk = keypair.public
    c1, c2 = ct.parts
    target = c2 * powmod(c1, -keypair.sk, pk.p) % pk.p
    return _bounded_dlog(keypair, target)


def _bounded_dlog(keypair: ElGamalKeyPair, target: int) -> int:
    """Baby-step/giant-step over [0, plain_bound); the baby table is built
    once per key and cached."""
    pk = keypair.public
    step = 1 << max(1, math.isqrt(pk.plain_bound - 1).bit_length())
    table = keypair._baby_table
    if not table:
        acc = 1
        for j in range(step):
            table.setdefault(acc, j)
            acc = acc * pk.g % pk.p
    giant = powmod(pk.g, -step, pk.p)
    cur = target
    for i in range((pk.plain_bound + step - 1) // step + 1):
        j = table.get(cur)
        if j is not None:
            m = i * step + j
            if m < pk.plain_bound:
                return m
        cur = cur * giant % pk.p
    raise DecryptionError("discrete log not found below the plaintext bound")
