"""Acceptance gate: every criterion below runs at its stated tolerance and
prints one pass/fail line. Criteria 1 and 9 run at the benchmark-scale
parameter profile; the session-scoped key cache makes the expensive issuer
keys a once-per-session cost while keeping generation honest."""

import random
import time
from pathlib import Path

from fcguard.bench import run_bench
from fcguard.crypto.cl import ClIssuerKeyPair, cl_keygen, cl_sign, cl_verify
from fcguard.crypto.elgamal import ElGamalKeyPair, elgamal_decrypt, elgamal_encrypt, elgamal_keygen
from fcguard.crypto.paillier import PaillierKeyPair, paillier_decrypt, paillier_encrypt, paillier_keygen
from fcguard.params import TOY
from fcguard.scenario import load_scenario, run_scenario
from fcguard.security import (
    check_audit_branches,
    check_bank_blindness,
    check_platform_blindness,
    check_unlinkability,
    mutation_cases,
    release_delays_in_window,
    splice_harness,
)

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "fcguard" / "scenarios"


def _report(criterion: int, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: PASS - {detail}")


def test_criterion_01_end_to_end_happy_path_paper_profile(paper_key_cache):
    cfg = load_scenario(SCENARIO_DIR / "happy_path.json")
    assert cfg["profile"] == "paper"
    assert len(cfg["users"]) == 1 and len(cfg["orders"]) == 1
    start = time.perf_counter()
    result = run_scenario(cfg, key_cache_dir=paper_key_cache)
    elapsed = time.perf_counter() - start
    (outcome,) = result.orders
    assert outcome.state == "complete", outcome
    ok, detail = result.assertion_results["conservation"]
    assert ok, detail
    assert elapsed < 60.0, f"happy path took {elapsed:.1f}s (budget 60s)"
    _report(1, f"order complete with conservation in {elapsed:.1f}s < 60s")


def test_criterion_02_platform_blindness_with_negative_control():
    result = check_platform_blindness(seed=31000, scenario_count=20)
    assert result.passed, result.detail
    _report(2, result.detail)


def test_criterion_03_bank_blindness():
    result = check_bank_blindness(seed=32000, scenario_count=20)
    assert result.passed, result.detail
    _report(3, result.detail)


def test_criterion_04_unlinkability():
    result = check_unlinkability(seed=33000, presentations=100)
    assert result.passed, result.detail
    _report(4, result.detail)


def test_criterion_05_soundness_mutation_matrix():
    cases = mutation_cases()
    accepted = [name for name, ok in cases if ok]
    trials, rejected = splice_harness(trials=50)
    total = len(cases) + trials
    assert total >= 50
    assert accepted == [], f"false accepts: {accepted}"
    assert rejected == trials
    _report(5, f"{total} tamper cases enumerated, 0 false accepts")


def test_criterion_06_audit_branches_ten_users():
    result = check_audit_branches(seed=34000, users=10)
    assert result.passed, result.detail
    _report(6, result.detail)


def test_criterion_07_replay_protection_bundled_scenario():
    cfg = load_scenario(SCENARIO_DIR / "replay_attack.json")
    initial_balances = {u["bank_account"]: u["balance"] for u in cfg["users"]}
    result = run_scenario(cfg)
    (outcome,) = result.orders
    assert outcome.state == "failed" and outcome.failure_cause == "mfa"
    for account, balance in initial_balances.items():
        assert result.ctx.bank.accounts[account].balance == balance
    assert not [tx for tx in result.ctx.chain.all_txs()
                if tx.recipient in outcome.addresses]
    assert result.passed
    _report(7, "stolen bundle ended failed(mfa); no fiat or crypto moved")


def test_criterion_08_crypto_round_trips_and_worked_examples():
    rng = random.Random(35000)
    # toy worked examples, reproduced exactly
    toy_cl = ClIssuerKeyPair.from_secrets(5, 11, 4, 7, [9, 13, 21])
    assert toy_cl.public.n == 253 and toy_cl.public.z == 192
    toy_eg = ElGamalKeyPair.from_secrets(p=23, q=11, g=4, sk=3, plain_bound=16)
    ct = elgamal_encrypt(toy_eg.public, 2, r=5)
    assert ct.parts == (12, 2) and elgamal_decrypt(toy_eg, ct) == 2
    toy_pa = PaillierKeyPair.from_primes(3, 5)
    pc = paillier_encrypt(toy_pa.public, 7, r=2)
    assert pc.parts == (83,) and paillier_decrypt(toy_pa, pc) == 7

    eg = elgamal_keygen(TOY, rng)
    assert eg.public.plain_bound == 1 << 30
    for _ in range(100):
        m = rng.randrange(0, 1 << 30)
        assert elgamal_decrypt(eg, elgamal_encrypt(eg.public, m, rng=rng)) == m
    pa = paillier_keygen(TOY, rng)
    for _ in range(100):
        m = rng.randrange(0, pa.public.n)
        assert paillier_decrypt(pa, paillier_encrypt(pa.public, m, rng=rng)) == m
    cl = cl_keygen(4, TOY, rng)
    for _ in range(100):
        attrs = [rng.getrandbits(64) for _ in range(4)]
        assert cl_verify(cl.public, attrs, cl_sign(cl, attrs, TOY, rng))
    _report(8, "100-case ElGamal, Paillier, and CL round trips; toy vectors exact")


def test_criterion_09_benchmark_relations_paper_profile(paper_key_cache):
    start = time.perf_counter()
    report = run_bench(profile="paper", iterations=5, seed=42,
                       key_cache_dir=paper_key_cache)
    elapsed = time.perf_counter() - start
    assert elapsed < 600, f"bench took {elapsed:.0f}s (budget 600s)"
    identity = report.phases["identity_verification"]
    assert identity["fcguard"] > 10 * identity["baseline"], identity
    for phase in ("bank_transfer", "crypto_transfer"):
        row = report.phases[phase]
        rel = abs(row["fcguard"] - row["baseline"]) / max(row["baseline"], 1e-9)
        assert rel < 0.20, f"{phase} differs {rel:.1%} across modes"
    table = report.table()
    for figure in ("464.87", "363.27", "170.67", "156.95", "362.52"):
        assert figure in table
    print("\n" + table)
    _report(9, f"identity x{identity['fcguard'] / identity['baseline']:.0f} over baseline; "
               f"transfer phases within 20%; bench ran in {elapsed:.0f}s")


def test_criterion_10_address_hygiene_and_obfuscation_structure():
    cfg = load_scenario(SCENARIO_DIR / "address_rotation.json")
    assert cfg["rotation_epoch"] == 5
    assert len(cfg["orders"]) == 20
    assert all(order["address_count"] == 3 for order in cfg["orders"])
    result = run_scenario(cfg)
    assert result.passed, result.assertion_results
    ctx = result.ctx
    seen: dict[str, str] = {}
    for outcome in result.orders:
        for address in outcome.addresses:
            assert seen.setdefault(address, outcome.order_id) == outcome.order_id
    pool_senders = {tx.sender for tx in ctx.chain.all_txs() if tx.sender.startswith("pool:")}
    assert len(pool_senders) >= 2
    assert release_delays_in_window(result)
    _report(10, f"20 orders: no address reuse, {len(pool_senders)} pool addresses, "
                f"releases within [0, {ctx.delay_max_ms} ms]")


def test_paper_profile_issuer_prime_sizes(paper_key_cache):
    # benchmark-profile issuer keys are built from 1536-bit Sophie Germain
    # primes (cache warmed by criterion 1, so this is a load plus validation)
    from fcguard.keycache import issuer_keys
    from fcguard.params import PAPER

    keys = issuer_keys(PAPER, 42, "platform", 4, paper_key_cache)
    assert keys.p_prime.bit_length() == 1536
    assert keys.q_prime.bit_length() == 1536
    assert keys.public.n.bit_length() in (3073, 3074)
