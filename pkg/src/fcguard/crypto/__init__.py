"""Number-theoretic primitives: CL signatures over an RSA group, integer
commitments, probabilistic encryption (exponential ElGamal and Paillier), and
the Fiat-Shamir transcript shared by every sigma protocol."""

from .ciphertext import Ciphertext
from .cl import ClIssuerKeyPair, ClPublicKey, ClSignature, SignatureProof, cl_keygen, cl_sign, cl_verify
from .commitment import CommitmentKey, IntegerCommitment, commit, open_verify
from .elgamal import ElGamalKeyPair, ElGamalPublicKey
from .encoding import ATTRIBUTE_BOUND, encode_attribute
from .paillier import PaillierKeyPair, PaillierPublicKey
from .transcript import Transcript, transcript_challenge

__all__ = [
    "ATTRIBUTE_BOUND",
    "Ciphertext",
    "ClIssuerKeyPair",
    "ClPublicKey",
    "ClSignature",
    "CommitmentKey",
    "ElGamalKeyPair",
    "ElGamalPublicKey",
    "IntegerCommitment",
    "PaillierKeyPair",
    "PaillierPublicKey",
    "SignatureProof",
    "Transcript",
    "cl_keygen",
    "cl_sign",
    "cl_verify",
    "commit",
    "encode_attribute",
    "open_verify",
    "transcript_challenge",
]
