"""Security property suite: taint and blindness scans, unlinkability,
the tamper/mutation matrix, conservation, audit branches, replay protection,
and address hygiene. Each property reports one pass/fail line; the same
checks back the acceptance tests."""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass

from .credentials import (
    BANK_ATTRIBUTES,
    PLATFORM_ATTRIBUTES,
    Schema,
    Wallet,
    create_credential_request,
    holder_finalize_credential,
    issue_credential,
    publish_definition,
    verify_credential_request,
)
from .crypto.cl import cl_verify, cl_keygen, recompute_q, verify_signature_proof
from .crypto.commitment import CommitmentKey, commit, open_verify
from .crypto.elgamal import elgamal_encrypt, elgamal_keygen
from .crypto.paillier import paillier_keygen
from .ledger import Registry
from .params import TOY, Profile
from .presentations import (
    EncryptionSpec,
    PredicateSpec,
    PresentationBundle,
    ProofSession,
    bundle_digest,
    verify_bundle,
    verify_equality,
)
from .scenario import bank_taint_hits, platform_taint_hits, random_scenario, run_scenario


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def presentation_randomized_fields(bundle: PresentationBundle) -> set[int]:
    """Every field of a bundle that fresh proof randomness should make unique:
    the randomized signature value, the challenge, and all responses."""
    pres = bundle.presentation
    values = {pres.a_prime, pres.e_hat, pres.v_hat, pres.challenge}
    values.update(pres.m_hats.values())
    for arm in bundle.link_proofs:
        values.add(arm.r_hat)
    for arm in bundle.enc_proofs:
        values.add(arm.r_hat)
        values.update(arm.ciphertext.parts)
    for arm in bundle.predicate_proofs:
        values.add(arm.u_hat)
        values.update(arm.bit_commitments)
    return values


@dataclass
class _Fixture:
    """Toy-profile environment with two issuers, two credentials sharing an
    SSN, and a full two-bundle session, used by the mutation matrix."""

    registry: Registry
    profile: Profile
    wallet: Wallet
    platform_defn: object
    platform_schema: Schema
    bank_defn: object
    bank_schema: Schema
    platform_keys: object
    vc_pu: object
    vc_bu: object
    nonce: bytes
    bundle1: PresentationBundle
    bundle2: PresentationBundle
    equality: object
    enc_keys: dict
    aa_keys: object
    bank_enc: object
    rng: random.Random


def build_fixture(seed: int = 1301, ssn: int = 123_456_789) -> _Fixture:
    rng = random.Random(f"security-fixture:{seed}")
    profile = TOY
    registry = Registry()
    platform_keys = cl_keygen(4, profile, rng)
    bank_keys = cl_keygen(4, profile, rng)
    p_schema = Schema(f"schema:platform:{seed}", "platform", PLATFORM_ATTRIBUTES)
    b_schema = Schema(f"schema:bank:{seed}", "bank", BANK_ATTRIBUTES)
    _, p_defn = publish_definition(registry, platform_keys, p_schema, f"defn:platform:{seed}", profile)
    _, b_defn = publish_definition(registry, bank_keys, b_schema, f"defn:bank:{seed}", profile)
    wallet = Wallet.create(profile, rng)

    def issue(defn, schema, keys, values):
        nonce = rng.getrandbits(128).to_bytes(16, "big")
        request, v_prime = create_credential_request(wallet.link_secret, defn, nonce, rng)
        cred = issue_credential(keys, defn, schema, request, values, rng)
        return holder_finalize_credential(defn, schema, cred, wallet.link_secret, v_prime, nonce)

    vc_pu = issue(p_defn, p_schema, platform_keys,
                  {"name": "Holder", "birthday": 19900101, "ssn": ssn})
    vc_bu = issue(b_defn, b_schema, bank_keys,
                  {"bank_name": "Bank of A", "bank_account": 12_345_678_901_234_567, "ssn": ssn})
    wallet.store(vc_pu)
    wallet.store(vc_bu)

    aa_keys = elgamal_keygen(profile, rng)
    bank_enc = paillier_keygen(profile, rng)
    nonce = rng.getrandbits(128).to_bytes(16, "big")
    session = ProofSession(registry, nonce, rng, commitment_source=p_defn.defn_id)
    bundle1 = session.build_bundle(
        p_defn, p_schema, vc_pu, wallet.link_secret, disclose=(), link={"ssn": "ssn"},
        encrypt=[EncryptionSpec("ssn", aa_keys.public)],
        predicates=[PredicateSpec("birthday", 20070101)])
    bundle2 = session.build_bundle(
        b_defn, b_schema, vc_bu, wallet.link_secret, disclose=("bank_name",),
        link={"ssn": "ssn"}, encrypt=[EncryptionSpec("bank_account", bank_enc.public)])
    equality = session.equality_proof(bundle1, "ssn", bundle2, "ssn")
    enc_keys = {aa_keys.public.key_id(): aa_keys.public,
                bank_enc.public.key_id(): bank_enc.public}
    return _Fixture(registry=registry, profile=profile, wallet=wallet,
                    platform_defn=p_defn, platform_schema=p_schema,
                    bank_defn=b_defn, bank_schema=b_schema, platform_keys=platform_keys,
                    vc_pu=vc_pu, vc_bu=vc_bu, nonce=nonce, bundle1=bundle1, bundle2=bundle2,
                    equality=equality, enc_keys=enc_keys, aa_keys=aa_keys,
                    bank_enc=bank_enc, rng=rng)


def mutation_cases(fx: _Fixture | None = None) -> list[tuple[str, bool]]:
    """Enumerated tamper matrix. Each entry is (case name, accepted); a sound
    system accepts none of them."""
    fx = fx or build_fixture()
    registry, nonce, enc_keys = fx.registry, fx.nonce, fx.enc_keys
    cases: list[tuple[str, bool]] = []

    def verify1(bundle) -> bool:
        return verify_bundle(registry, bundle, nonce, enc_keys, expected_prev=b"")

    def verify2(bundle) -> bool:
        return verify_bundle(registry, bundle, nonce, enc_keys,
                             expected_prev=bundle_digest(fx.bundle1))

    # CL signature field and attribute mutations
    slots = [fx.wallet.link_secret.value] + [fx.vc_pu.attributes[n] for n in PLATFORM_ATTRIBUTES]
    sig = fx.vc_pu.signature
    pk = fx.platform_defn.public_key
    cases.append(("cl-sig:a+1", cl_verify(pk, slots, dataclasses.replace(sig, a=sig.a + 1))))
    cases.append(("cl-sig:e+2", cl_verify(pk, slots, dataclasses.replace(sig, e=sig.e + 2))))
    cases.append(("cl-sig:v+1", cl_verify(pk, slots, dataclasses.replace(sig, v=sig.v + 1))))
    for i, name in enumerate(["link"] + list(PLATFORM_ATTRIBUTES)):
        mutated = list(slots)
        mutated[i] += 1
        cases.append((f"cl-sig:attr-{name}+1", cl_verify(pk, mutated, sig)))

    # issuer signature-correctness proof
    q_value = recompute_q(pk, slots, sig.v)
    proof = fx.vc_pu.signature_proof
    for field_name in ("challenge", "s_e"):
        bad = dataclasses.replace(proof, **{field_name: getattr(proof, field_name) + 1})
        cases.append((f"sig-proof:{field_name}+1",
                      _sig_proof_ok(pk, sig.a, q_value, bad, fx.profile)))

    # integer commitment opening
    ck = CommitmentKey.derive(pk.n, pk.s, label="matrix")
    c_obj, r = commit(ck, 777, rng=fx.rng, profile=fx.profile)
    cases.append(("commitment:m+1", open_verify(ck, c_obj, 778, r)))
    cases.append(("commitment:r+1", open_verify(ck, c_obj, 777, r + 1)))

    # credential request proof
    request, _ = create_credential_request(fx.wallet.link_secret, fx.platform_defn,
                                           b"matrix-nonce", fx.rng)
    cases.append(("cred-request:blinded+1", verify_credential_request(
        fx.platform_defn, dataclasses.replace(request, blinded=request.blinded + 1))))
    for field_name in ("challenge", "s_m", "s_r"):
        bad_proof = dataclasses.replace(request.proof,
                                        **{field_name: getattr(request.proof, field_name) + 1})
        cases.append((f"cred-request:{field_name}+1", verify_credential_request(
            fx.platform_defn, dataclasses.replace(request, proof=bad_proof))))

    # presentation responses, both bundles
    for tag, bundle, checker in (("vp1", fx.bundle1, verify1), ("vp2", fx.bundle2, verify2)):
        pres = bundle.presentation
        for field_name in ("a_prime", "e_hat", "v_hat", "challenge"):
            bad = dataclasses.replace(pres, **{field_name: getattr(pres, field_name) + 1})
            if field_name == "challenge":
                bad_bundle = dataclasses.replace(bundle, presentation=bad, challenge=bad.challenge)
            else:
                bad_bundle = dataclasses.replace(bundle, presentation=bad)
            cases.append((f"{tag}:{field_name}+1", checker(bad_bundle)))
        for attr in pres.m_hats:
            hats = dict(pres.m_hats)
            hats[attr] += 1
            bad = dataclasses.replace(pres, m_hats=hats)
            cases.append((f"{tag}:m_hat[{attr}]+1",
                          checker(dataclasses.replace(bundle, presentation=bad))))
    cases.append(("vp1:nonce-swap", verify_bundle(
        registry, fx.bundle1, b"some-other-nonce", enc_keys, expected_prev=b"")))
    cases.append(("vp2:prev-digest-tamper", verify_bundle(
        registry, fx.bundle2, nonce, enc_keys, expected_prev=b"wrong")))
    disclosed = dict(fx.bundle2.presentation.disclosed)
    disclosed["bank_name"] += 1
    bad_pres = dataclasses.replace(fx.bundle2.presentation, disclosed=disclosed)
    cases.append(("vp2:disclosed+1", verify2(dataclasses.replace(fx.bundle2, presentation=bad_pres))))

    # link arms
    for tag, bundle, checker in (("vp1", fx.bundle1, verify1), ("vp2", fx.bundle2, verify2)):
        arm = bundle.link_proofs[0]
        for field_name in ("commitment", "r_hat"):
            bad_arm = dataclasses.replace(arm, **{field_name: getattr(arm, field_name) + 1})
            cases.append((f"{tag}:link-{field_name}+1",
                          checker(dataclasses.replace(bundle, link_proofs=(bad_arm,)))))

    # verifiable-encryption arms
    arm = fx.bundle1.enc_proofs[0]
    for idx, label in ((0, "c1"), (1, "c2")):
        parts = list(arm.ciphertext.parts)
        parts[idx] += 1
        bad_arm = dataclasses.replace(arm, ciphertext=dataclasses.replace(
            arm.ciphertext, parts=tuple(parts)))
        cases.append((f"verenc-eg:{label}+1",
                      verify1(dataclasses.replace(fx.bundle1, enc_proofs=(bad_arm,)))))
    cases.append(("verenc-eg:r_hat+1", verify1(dataclasses.replace(
        fx.bundle1, enc_proofs=(dataclasses.replace(arm, r_hat=arm.r_hat + 1),)))))
    other_ct = elgamal_encrypt(fx.aa_keys.public, 999, rng=fx.rng)
    cases.append(("verenc-eg:ciphertext-swap", verify1(dataclasses.replace(
        fx.bundle1, enc_proofs=(dataclasses.replace(arm, ciphertext=other_ct),)))))

    parm = fx.bundle2.enc_proofs[0]
    bad_ct = dataclasses.replace(parm.ciphertext, parts=(parm.ciphertext.parts[0] + 1,))
    cases.append(("verenc-paillier:c+1", verify2(dataclasses.replace(
        fx.bundle2, enc_proofs=(dataclasses.replace(parm, ciphertext=bad_ct),)))))
    cases.append(("verenc-paillier:r_hat+1", verify2(dataclasses.replace(
        fx.bundle2, enc_proofs=(dataclasses.replace(parm, r_hat=parm.r_hat + 1),)))))
    from .crypto.paillier import paillier_encrypt

    other_pct = paillier_encrypt(fx.bank_enc.public, 42, rng=fx.rng)
    cases.append(("verenc-paillier:ciphertext-swap", verify2(dataclasses.replace(
        fx.bundle2, enc_proofs=(dataclasses.replace(parm, ciphertext=other_pct),)))))

    # predicate arms
    pred = fx.bundle1.predicate_proofs[0]
    ckey = _fixture_commitment_key(fx)
    flipped = list(pred.bit_commitments)
    flipped[0] = flipped[0] * ckey.r_base % ckey.n
    cases.append(("predicate:bit0-flip", verify1(dataclasses.replace(
        fx.bundle1, predicate_proofs=(dataclasses.replace(
            pred, bit_commitments=tuple(flipped)),)))))
    swapped = list(pred.bit_commitments)
    swapped[0], swapped[1] = swapped[1], swapped[0]
    cases.append(("predicate:bit-swap", verify1(dataclasses.replace(
        fx.bundle1, predicate_proofs=(dataclasses.replace(
            pred, bit_commitments=tuple(swapped)),)))))
    for field_name in ("u_hat", "threshold"):
        bad_pred = dataclasses.replace(pred, **{field_name: getattr(pred, field_name) + 1})
        cases.append((f"predicate:{field_name}+1", verify1(dataclasses.replace(
            fx.bundle1, predicate_proofs=(bad_pred,)))))
    for field_name in ("c0", "s0", "s1"):
        bit = pred.bit_proofs[0]
        bad_bits = (dataclasses.replace(bit, **{field_name: getattr(bit, field_name) + 1}),) \
            + pred.bit_proofs[1:]
        cases.append((f"predicate:bit0-{field_name}+1", verify1(dataclasses.replace(
            fx.bundle1, predicate_proofs=(dataclasses.replace(pred, bit_proofs=bad_bits),)))))

    # equality splices across sessions with different SSNs
    other = build_fixture(seed=1302, ssn=987_654_321)
    eq = fx.equality
    cases.append(("equality:foreign-commitment", verify_equality(
        registry, dataclasses.replace(eq, commitment=other.equality.commitment),
        fx.bundle1, fx.bundle2, nonce, nonce, enc_keys)))
    cases.append(("equality:foreign-r_hat_a", verify_equality(
        registry, dataclasses.replace(eq, r_hat_a=other.equality.r_hat_a),
        fx.bundle1, fx.bundle2, nonce, nonce, enc_keys)))
    cases.append(("equality:foreign-r_hat_b", verify_equality(
        registry, dataclasses.replace(eq, r_hat_b=other.equality.r_hat_b),
        fx.bundle1, fx.bundle2, nonce, nonce, enc_keys)))
    cases.append(("equality:foreign-bundle2", verify_equality(
        registry, eq, fx.bundle1, other.bundle2, nonce, nonce, enc_keys)))
    cases.append(("equality:foreign-bundle1", verify_equality(
        registry, eq, other.bundle1, fx.bundle2, nonce, nonce, enc_keys)))

    return cases


def _fixture_commitment_key(fx: _Fixture) -> CommitmentKey:
    from .presentations import commitment_key_for

    return commitment_key_for(fx.platform_defn)


def _sig_proof_ok(pk, a, q_value, proof, profile) -> bool:
    return verify_signature_proof(pk, a, q_value, proof, b"", profile)


def splice_harness(trials: int = 50, seed: int = 77) -> tuple[int, int]:
    """Random splices of equality material across two unequal-SSN sessions;
    returns (trials, rejected)."""
    fx_a = build_fixture(seed=seed, ssn=111_111_111)
    fx_b = build_fixture(seed=seed + 1, ssn=222_222_222)
    rng = random.Random(f"splice:{seed}")
    rejected = 0
    for _ in range(trials):
        eq = fx_a.equality
        donor = fx_b.equality
        field_names = rng.sample(["commitment", "r_hat_a", "r_hat_b",
                                  "bundle_digest_a", "bundle_digest_b"], k=rng.randrange(1, 4))
        eq = dataclasses.replace(eq, **{f: getattr(donor, f) for f in field_names})
        bundle1 = fx_b.bundle1 if rng.getrandbits(1) else fx_a.bundle1
        bundle2 = fx_b.bundle2 if (bundle1 is fx_a.bundle1) else fx_a.bundle2
        ok = verify_equality(fx_a.registry, eq, bundle1, bundle2, fx_a.nonce, fx_a.nonce,
                             fx_a.enc_keys)
        if not ok:
            rejected += 1
    return trials, rejected


# ---------------------------------------------------------------------------
# suite driver


def check_platform_blindness(seed: int, scenario_count: int = 20,
                             control_mode: str = "fcguard") -> PropertyResult:
    """Zero SSN or account encodings on the platform's exchange and audit
    tapes across randomized scenarios, with the plaintext baseline as the
    positive control that the scan actually bites."""
    leaks = []
    for i in range(scenario_count):
        result = run_scenario(random_scenario(seed + i, mode=control_mode))
        leaks.extend(platform_taint_hits(result))
    control = run_scenario(random_scenario(seed + 990, mode="baseline"))
    control_hits = platform_taint_hits(control)
    if control_mode == "baseline":
        # negative-control run: the property is expected to FAIL loudly
        return PropertyResult("platform-blindness", not leaks,
                              f"{len(leaks)} secret encodings on the baseline tape")
    ok = not leaks and bool(control_hits)
    detail = (f"0 leaks across {scenario_count} scenarios; baseline control caught "
              f"{len(control_hits)}") if ok else f"leaks={leaks}, control={len(control_hits)}"
    return PropertyResult("platform-blindness", ok, detail)


def check_bank_blindness(seed: int, scenario_count: int = 20) -> PropertyResult:
    leaks = []
    for i in range(scenario_count):
        result = run_scenario(random_scenario(seed + i))
        leaks.extend(bank_taint_hits(result))
    ok = not leaks
    return PropertyResult("bank-blindness", ok,
                          f"0 crypto addresses on the bank tape across {scenario_count} scenarios"
                          if ok else f"leaked addresses: {leaks}")


def check_unlinkability(seed: int, presentations: int = 100) -> PropertyResult:
    fx = build_fixture(seed=seed)
    rng = random.Random(f"unlink:{seed}")
    seen: dict[int, int] = {}
    for i in range(presentations):
        nonce = rng.getrandbits(128).to_bytes(16, "big")
        session = ProofSession(fx.registry, nonce, rng, commitment_source=fx.platform_defn.defn_id)
        bundle = session.build_bundle(fx.platform_defn, fx.platform_schema, fx.vc_pu,
                                      fx.wallet.link_secret, disclose=(),
                                      link={"ssn": "ssn"},
                                      encrypt=[EncryptionSpec("ssn", fx.aa_keys.public)])
        if not verify_bundle(fx.registry, bundle, nonce, fx.enc_keys):
            return PropertyResult("unlinkability", False, f"presentation {i} failed verification")
        for value in presentation_randomized_fields(bundle):
            if value in seen:
                return PropertyResult("unlinkability", False,
                                      f"presentations {seen[value]} and {i} share a field value")
            seen[value] = i
    cts = {elgamal_encrypt(fx.aa_keys.public, 123_456_789, rng=rng).parts
           for _ in range(presentations)}
    if len(cts) != presentations:
        return PropertyResult("unlinkability", False, "repeated SSN ciphertexts")
    return PropertyResult("unlinkability", True,
                          f"{presentations} presentations pairwise-distinct; "
                          f"{presentations} SSN ciphertexts pairwise-distinct")


def check_tamper_matrix(min_cases: int = 50) -> PropertyResult:
    cases = mutation_cases()
    accepted = [name for name, ok in cases if ok]
    trials, rejected = splice_harness()
    count = len(cases) + trials
    ok = not accepted and rejected == trials and count >= min_cases
    detail = (f"{count} tamper cases (incl. {trials} random splices), 0 false accepts"
              if ok else f"accepted: {accepted}; splices rejected {rejected}/{trials}")
    return PropertyResult("tamper-matrix", ok, detail)


def check_conservation(seed: int, scenario_count: int = 10) -> PropertyResult:
    for i in range(scenario_count):
        result = run_scenario(random_scenario(seed + i))
        ok, detail = result.assertion_results.get("conservation", (False, "missing"))
        if not ok:
            return PropertyResult("conservation", False, f"scenario {i}: {detail}")
    return PropertyResult("conservation", True,
                          f"fiat and crypto totals conserved across {scenario_count} scenarios")


def check_audit_branches(seed: int, users: int = 10) -> PropertyResult:
    gen = random.Random(f"audit-suite:{seed}")
    cfg = random_scenario(seed, n_users=users, orders_per_user=1)
    for i, order in enumerate(cfg["orders"]):
        order["self_report"] = i % 2 == 0
    cfg["assertions"] = ["audit_branches", "conservation"]
    result = run_scenario(cfg)
    ok, detail = result.assertion_results["audit_branches"]
    reported = sum(1 for o in cfg["orders"] if o["self_report"])
    expected_decrypts = len(cfg["orders"]) - reported
    ok = ok and result.ctx.authority.decrypt_count == expected_decrypts and gen is not None
    return PropertyResult("audit-branches", ok,
                          f"{users} users: {reported} compliant without decryption, "
                          f"{expected_decrypts} de-anonymized" if ok else detail)


def check_replay_protection(seed: int) -> PropertyResult:
    cfg = random_scenario(seed, n_users=1)
    cfg["orders"] = [{"user": 0, "crypto_amount": 300, "address_count": 2, "attack": "replay"}]
    cfg["assertions"] = ["replay_failed_mfa", "conservation", "failed_no_movement"]
    result = run_scenario(cfg)
    bad = [name for name, (ok, _) in result.assertion_results.items() if not ok]
    ok = not bad
    return PropertyResult("replay-protection", ok,
                          "stolen bundle failed at mfa with no money movement"
                          if ok else f"failed checks: {bad}")


def check_address_hygiene(seed: int) -> PropertyResult:
    cfg = random_scenario(seed, n_users=4, orders_per_user=5)
    cfg["rotation_epoch"] = 5
    cfg["pool_size"] = 3
    for order in cfg["orders"]:
        order["address_count"] = 3
    cfg["assertions"] = ["address_hygiene", "orders_complete", "conservation"]
    for user in cfg["users"]:
        user["balance"] = 10_000_000
    result = run_scenario(cfg)
    bad = [name for name, (ok, _) in result.assertion_results.items() if not ok]
    if not release_delays_in_window(result):
        bad.append("release-window")
    detail = result.assertion_results["address_hygiene"][1]
    return PropertyResult("address-hygiene", not bad,
                          detail + "; releases inside [0, D]" if not bad else f"failed checks: {bad}")


def release_delays_in_window(result) -> bool:
    """Every chain transfer crediting an order lands within [0, delay_max]
    simulated milliseconds of that order's fiat settlement."""
    ctx = result.ctx
    owner = {}
    for outcome in result.orders:
        for address in outcome.addresses:
            owner[address] = outcome.order_id
    settle_time = {}
    for order_id, order in ctx.platform.orders.items():
        for frm, to, t in order.transitions:
            if to == "fiat-settled":
                settle_time[order_id] = t
    for tx in ctx.chain.all_txs():
        order_id = owner.get(tx.recipient)
        if order_id is None or order_id not in settle_time:
            continue
        delay = tx.timestamp_ms - settle_time[order_id]
        if not 0 <= delay <= ctx.delay_max_ms:
            return False
    return True


def run_security_suite(seed: int = 9000, scenario_count: int = 20,
                       negative_control: bool = False) -> list[PropertyResult]:
    control_mode = "baseline" if negative_control else "fcguard"
    results = [
        check_platform_blindness(seed, scenario_count, control_mode=control_mode),
        check_bank_blindness(seed + 100, scenario_count),
        check_unlinkability(seed + 200),
        check_tamper_matrix(),
        check_conservation(seed + 300),
        check_audit_branches(seed + 400),
        check_replay_protection(seed + 500),
        check_address_hygiene(seed + 600),
    ]
    return results
