import hashlib
import itertools

from fcguard.crypto.transcript import Transcript, transcript_challenge
from fcguard.params import PAPER, TOY

CORPUS = [
    ["alpha"],
    ["alpha", "beta"],
    [1, 2, 3],
    [b"\x00", b"\x01"],
    ["mixed", 42, b"\xff"],
]


def test_same_inputs_same_challenge():
    for messages in CORPUS:
        a = transcript_challenge("label", *messages, bits=256)
        b = transcript_challenge("label", *messages, bits=256)
        assert a == b


def test_permuted_order_changes_challenge():
    # checked exhaustively on a fixed corpus
    for messages in CORPUS:
        if len(messages) < 2:
            continue
        base = transcript_challenge("label", *messages, bits=256)
        for perm in itertools.permutations(messages):
            if list(perm) == messages:
                continue
            assert transcript_challenge("label", *perm, bits=256) != base


def test_empty_message_list_hashes_label_alone():
    expected = int.from_bytes(hashlib.sha256(b"label").digest(), "big")
    assert transcript_challenge("label", bits=256) == expected


def test_label_separates_domains():
    assert transcript_challenge("a", 1, bits=256) != transcript_challenge("b", 1, bits=256)


def test_challenge_bit_lengths_follow_profile():
    for profile in (TOY, PAPER):
        c = transcript_challenge("label", "m", bits=profile.challenge_bits)
        assert 0 <= c < (1 << profile.challenge_bits)


def test_incremental_absorption_matches_one_shot():
    t = Transcript("label")
    t.absorb("x")
    t.absorb(7)
    assert t.challenge(80) == transcript_challenge("label", "x", 7, bits=80)
