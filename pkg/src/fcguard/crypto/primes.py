"""Primality testing, prime search, and modular arithmetic helpers.

gmpy2 backs the hot paths when available (roughly 7x faster at benchmark key
sizes); a pure Miller-Rabin fallback keeps the package importable without it.
All searches draw candidates from an injected seeded RNG, so key generation
is reproducible.
"""

from __future__ import annotations

import random

from ..errors import PrimeGenerationError

try:
    import gmpy2

    def powmod(base: int, exp: int, mod: int) -> int:
        return int(gmpy2.powmod(base, exp, mod))

    def _mr_is_prime(n: int, rounds: int) -> bool:
        return bool(gmpy2.is_prime(n, rounds))

except ImportError:  # pragma: no cover - exercised only without gmpy2
    gmpy2 = None

    def powmod(base: int, exp: int, mod: int) -> int:
        return pow(base, exp, mod)

    def _mr_is_prime(n: int, rounds: int) -> bool:
        d, s = n - 1, 0
        while d % 2 == 0:
            d //= 2
            s += 1
        # fixed bases plus bases derived from n keep the fallback deterministic
        bases = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]
        seed = n
        while len(bases) < rounds:
            seed = (seed * 6364136223846793005 + 1442695040888963407) % (1 << 64)
            bases.append(2 + seed % (n - 3))
        for a in bases[:max(rounds, 12)]:
            a %= n
            if a < 2:
                continue
            x = pow(a, d, n)
            if x in (1, n - 1):
                continue
            for _ in range(s - 1):
                x = pow(x, 2, n)
                if x == n - 1:
                    break
            else:
                return False
        return True


def invert(a: int, mod: int) -> int:
    return pow(a, -1, mod)


_SIEVE_BOUND = 20000
_SMALL_PRIMES: list[int] = []


def _small_primes() -> list[int]:
    if not _SMALL_PRIMES:
        sieve = bytearray([1]) * _SIEVE_BOUND
        sieve[0] = sieve[1] = 0
        for i in range(2, int(_SIEVE_BOUND**0.5) + 1):
            if sieve[i]:
                sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
        _SMALL_PRIMES.extend(i for i in range(3, _SIEVE_BOUND) if sieve[i])
    return _SMALL_PRIMES


def is_probable_prime(n: int, rounds: int = 25) -> bool:
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    return _mr_is_prime(n, rounds)


def random_prime(bits: int, rng: random.Random, max_tries: int = 100000) -> int:
    """Random prime of exactly `bits` bits."""
    if bits < 2:
        raise PrimeGenerationError("prime size must be at least 2 bits")
    for _ in range(max_tries):
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(cand):
            return cand
    raise PrimeGenerationError(f"no {bits}-bit prime found in {max_tries} draws")


def random_prime_in_range(lo: int, hi: int, rng: random.Random, max_tries: int = 100000) -> int:
    """Random prime in [lo, hi)."""
    for _ in range(max_tries):
        cand = rng.randrange(lo, hi) | 1
        if cand >= hi:
            continue
        if is_probable_prime(cand):
            return cand
    raise PrimeGenerationError(f"no prime found in [{lo}, {hi}) after {max_tries} draws")


def sophie_germain_prime(bits: int, rng: random.Random, max_windows: int = 64) -> int:
    """Random prime p' of exactly `bits` bits with 2p'+1 also prime.

    Candidates come from sieved windows above a random start: each window
    strikes positions where either p' or 2p'+1 has a small factor before any
    Miller-Rabin test runs. Raises PrimeGenerationError if the window budget
    is exhausted, which signals a misconfigured profile or RNG.
    """
    if bits < 8:
        return _sophie_germain_small(bits, rng)
    window = 1 << 16
    for _ in range(max_windows):
        base = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        ok = bytearray([1]) * window
        for sp in _small_primes():
            inv2 = pow(2, -1, sp)
            # base + 2k == 0 (mod sp)
            r = (-base) * inv2 % sp
            while r < window:
                ok[r] = 0
                r += sp
            # 2(base + 2k) + 1 == 0 (mod sp)
            r = (-(2 * base + 1)) * pow(4, -1, sp) % sp
            while r < window:
                ok[r] = 0
                r += sp
        for k in range(window):
            if not ok[k]:
                continue
            cand = base + 2 * k
            if cand.bit_length() != bits:
                break
            if is_probable_prime(cand, 8) and is_probable_prime(2 * cand + 1, 8):
                if is_probable_prime(cand) and is_probable_prime(2 * cand + 1):
                    return cand
    raise PrimeGenerationError(f"no {bits}-bit Sophie Germain prime within {max_windows} windows")


def _sophie_germain_small(bits: int, rng: random.Random, max_tries: int = 200000) -> int:
    for _ in range(max_tries):
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if is_probable_prime(cand) and is_probable_prime(2 * cand + 1):
            return cand
    raise PrimeGenerationError(f"no {bits}-bit Sophie Germain prime in {max_tries} draws")


def safe_prime(bits: int, rng: random.Random) -> tuple[int, int]:
    """(P, Q) with P = 2Q + 1, both prime, P of exactly `bits` bits."""
    q = sophie_germain_prime(bits - 1, rng)
    return 2 * q + 1, q
