"""Scenario files and the simulation runner.

A scenario is a plain JSON document: party roster with seeded PII and bank
balances, the order list with adversary and self-report toggles, the RNG
seed, and the named assertions to evaluate after the run. Identical
(scenario, seed) inputs produce byte-identical event logs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from .crypto.elgamal import elgamal_keygen
from .crypto.paillier import paillier_keygen
from .errors import ProtocolError, ScenarioError
from .keycache import issuer_keys
from .ledger import Chain, Registry
from .netsim import Network, SimClock
from .params import get_profile
from .parties import (
    Attacker,
    AuditingAuthority,
    Bank,
    ExchangeOrder,
    OrderParams,
    PiiRecord,
    Platform,
    SimContext,
    SsaDirectory,
    User,
    audit,
    bank_preissue,
    baseline_exchange,
    baseline_register,
    baseline_report,
    drain_transfers,
    exchange_step1_identity,
    exchange_step2_bank,
    exchange_step3_transfer,
    platform_report,
    publish_issuer_definitions,
    register_user,
    user_self_report,
)
from .serialize import canonical_int_hex

PLATFORM_BANK_ACCOUNT = 999_000_001

DEFAULTS = {
    "audit": True,
    "bank_name": "Bank of A",
    "current_date": 20250101,
    "delay_max_ms": 600_000,
    "mode": "fcguard",
    "pool_size": 4,
    "profile": "toy",
    "rate": [1, 1],
    "rotation_epoch": 10,
    "seed": 1,
    "treasury_crypto": None,  # default: 2x the sum of order amounts
}


def load_scenario(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ScenarioError(f"{path}: scenario must be a JSON object")
    return cfg


def _validated(cfg: dict) -> dict:
    merged = dict(DEFAULTS)
    merged.update(cfg)
    if merged["mode"] not in ("fcguard", "baseline"):
        raise ScenarioError(f"mode must be fcguard or baseline, got {merged['mode']!r}")
    users = merged.get("users")
    if not isinstance(users, list) or not users:
        raise ScenarioError("scenario needs a non-empty users list")
    for i, user in enumerate(users):
        for key in ("name", "birthday", "ssn", "bank_account", "balance"):
            if key not in user:
                raise ScenarioError(f"users[{i}] missing required field {key!r}")
    orders = merged.get("orders", [])
    for i, order in enumerate(orders):
        if "user" not in order or not 0 <= order["user"] < len(users):
            raise ScenarioError(f"orders[{i}] has no valid user index")
        if order.get("crypto_amount", 0) <= 0:
            raise ScenarioError(f"orders[{i}] needs a positive crypto_amount")
    merged["orders"] = orders
    rate = merged["rate"]
    if not (isinstance(rate, list) and len(rate) == 2 and all(isinstance(x, int) and x > 0 for x in rate)):
        raise ScenarioError("rate must be a [numerator, denominator] pair of positive integers")
    return merged


@dataclass
class OrderOutcome:
    order_id: str
    user_index: int
    state: str
    failure_cause: str | None
    attack: str | None
    self_report: bool
    addresses: tuple[str, ...]
    fiat_due: int
    crypto_amount: int


@dataclass
class ScenarioResult:
    mode: str
    seed: int
    ctx: SimContext
    orders: list[OrderOutcome]
    audit_outcomes: dict[str, tuple[str, int | None]]
    assertion_results: dict[str, tuple[bool, str]]
    initial_fiat_total: int
    initial_crypto_total: int
    registration_ok: dict[int, bool]

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.assertion_results.values())

    def event_log_lines(self) -> list[str]:
        return self.ctx.net.event_log_lines()

    def final_state(self) -> dict:
        ctx = self.ctx
        return {
            "crypto_total": ctx.chain.total_supply(),
            "fiat_accounts": {str(num): acct.balance for num, acct in sorted(ctx.bank.accounts.items())},
            "fiat_total": ctx.fiat_total(),
            "orders": {o.order_id: {"failure_cause": o.failure_cause, "state": o.state}
                       for o in self.orders},
            "tx_count": len(ctx.chain.all_txs()),
        }


def build_context(cfg: dict, key_cache_dir: str | Path | None = None) -> tuple[SimContext, dict]:
    cfg = _validated(cfg)
    profile = get_profile(cfg["profile"])
    seed = cfg["seed"]

    platform_keys = issuer_keys(profile, seed, "platform", 4, key_cache_dir)
    bank_keys = issuer_keys(profile, seed, "bank", 4, key_cache_dir)
    bank_enc = paillier_keygen(profile, random.Random(f"{seed}:paillier:bank"))
    authority_enc = elgamal_keygen(profile, random.Random(f"{seed}:elgamal:authority"))

    clock = SimClock()
    net = Network(clock)
    registry = Registry()
    chain = Chain()

    platform = Platform(issuer_keys=platform_keys, rng=random.Random(f"{seed}:platform"),
                        pool_size=cfg["pool_size"], rotation_epoch=cfg["rotation_epoch"],
                        bank_account=PLATFORM_BANK_ACCOUNT)
    bank = Bank(name=cfg["bank_name"], issuer_keys=bank_keys, enc_keys=bank_enc,
                rng=random.Random(f"{seed}:bank"))
    ssa = SsaDirectory()
    authority = AuditingAuthority(enc_keys=authority_enc)

    users = []
    for i, ucfg in enumerate(cfg["users"]):
        pii = PiiRecord(name=ucfg["name"], birthday=ucfg["birthday"], ssn=ucfg["ssn"])
        user = User(index=i, pii=pii, bank_account=ucfg["bank_account"], profile=profile,
                    rng=random.Random(f"{seed}:user:{i}"),
                    self_report=bool(ucfg.get("self_report", True)))
        users.append(user)
        if ucfg.get("seed_ssa", True):
            ssa.seed(pii)
        bank.open_account(ucfg["bank_account"], pii.ssn, ucfg["balance"],
                          owner_party=user.party_id)
    bank.open_account(PLATFORM_BANK_ACCOUNT, 0, 0, owner_party="platform")

    treasury = cfg["treasury_crypto"]
    if treasury is None:
        treasury = 2 * sum(o["crypto_amount"] for o in cfg["orders"]) + 1000
    chain.genesis({platform.treasury_address: treasury})

    ctx = SimContext(clock=clock, net=net, registry=registry, chain=chain, profile=profile,
                     mode=cfg["mode"], rng=random.Random(f"{seed}:main"), platform=platform,
                     bank=bank, ssa=ssa, authority=authority, users=users,
                     rate=(cfg["rate"][0], cfg["rate"][1]), delay_max_ms=cfg["delay_max_ms"],
                     current_date=cfg["current_date"])
    publish_issuer_definitions(ctx)
    return ctx, cfg


def run_scenario(cfg: dict, key_cache_dir: str | Path | None = None) -> ScenarioResult:
    ctx, cfg = build_context(cfg, key_cache_dir)
    initial_fiat = ctx.fiat_total()
    initial_crypto = ctx.chain.total_supply()

    registration_ok: dict[int, bool] = {}
    for user in ctx.users:
        try:
            if ctx.mode == "fcguard":
                register_user(ctx, user)
                bank_preissue(ctx, user)
            else:
                baseline_register(ctx, user)
            registration_ok[user.index] = True
        except ProtocolError:
            registration_ok[user.index] = False

    attacker = Attacker()
    outcomes: list[OrderOutcome] = []
    notify: dict[str, User] = {}
    order_objs: dict[str, ExchangeOrder] = {}
    order_users: dict[str, User] = {}
    order_reports: dict[str, bool] = {}

    for idx, ocfg in enumerate(cfg["orders"]):
        user = ctx.users[ocfg["user"]]
        if not registration_ok[user.index]:
            continue
        count = ocfg.get("address_count", 1)
        addresses = tuple(f"{user.party_id}:o{idx}:a{k}" for k in range(count))
        params = OrderParams(asset=ocfg.get("asset", "BTC"),
                             crypto_amount=ocfg["crypto_amount"], addresses=addresses,
                             age_threshold_years=ocfg.get("age_check_years"))
        attack = ocfg.get("attack")
        actor = attacker if attack == "replay" else None
        self_report = ocfg.get("self_report")
        if self_report is None:
            self_report = user.self_report

        if ctx.mode == "baseline":
            order = baseline_exchange(ctx, user, params)
        else:
            order, handle = exchange_step1_identity(ctx, user, params, actor=actor)
            if order.state == "identity-verified":
                exchange_step2_bank(ctx, user, order, handle, actor=actor)
            if order.state == "bank-verified":
                exchange_step3_transfer(ctx, user, order, actor=actor)
            notify[order.order_id] = user
        order_objs[order.order_id] = order
        order_users[order.order_id] = user
        order_reports[order.order_id] = bool(self_report)
        outcomes.append(OrderOutcome(
            order_id=order.order_id, user_index=user.index, state=order.state,
            failure_cause=order.failure_cause, attack=attack, self_report=bool(self_report),
            addresses=addresses, fiat_due=order.fiat_due, crypto_amount=order.crypto_amount))

    if ctx.mode == "fcguard":
        drain_transfers(ctx, notify)

    audit_outcomes: dict[str, tuple[str, int | None]] = {}
    if cfg["audit"]:
        for order_id, order in order_objs.items():
            if order.state not in ("fiat-settled", "crypto-sent", "complete"):
                continue
            user = order_users[order_id]
            if ctx.mode == "fcguard":
                platform_report(ctx, order)
            else:
                baseline_report(ctx, user, order)
            if order_reports[order_id]:
                user_self_report(ctx, user, order)
        if ctx.mode == "fcguard":
            audit_outcomes = audit(ctx)

    # refresh final order states after drain
    for outcome in outcomes:
        order = order_objs[outcome.order_id]
        outcome.state = order.state
        outcome.failure_cause = order.failure_cause

    result = ScenarioResult(
        mode=ctx.mode, seed=cfg["seed"], ctx=ctx, orders=outcomes,
        audit_outcomes=audit_outcomes, assertion_results={},
        initial_fiat_total=initial_fiat, initial_crypto_total=initial_crypto,
        registration_ok=registration_ok)
    for name in cfg.get("assertions", []):
        check = ASSERTIONS.get(name)
        if check is None:
            result.assertion_results[name] = (False, f"unknown assertion {name!r}")
        else:
            result.assertion_results[name] = check(result)
    return result


# ---------------------------------------------------------------------------
# named assertions


def _user_secrets(result: ScenarioResult) -> list[tuple[str, int]]:
    secrets = []
    for user in result.ctx.users:
        secrets.append((f"user {user.index} ssn", user.pii.ssn))
        secrets.append((f"user {user.index} bank account", user.bank_account))
    return secrets


def platform_taint_hits(result: ScenarioResult) -> list[str]:
    """Occurrences of any user SSN or bank-account canonical encoding in the
    platform's exchange- and audit-phase received bytes."""
    tape = result.ctx.net.received_bytes("platform", phases=("exchange", "audit"))
    hits = []
    for label, value in _user_secrets(result):
        if tape.count(canonical_int_hex(value).encode("ascii")):
            hits.append(label)
    return hits


def bank_taint_hits(result: ScenarioResult) -> list[str]:
    """User crypto addresses appearing anywhere in the bank's received bytes."""
    tape = result.ctx.net.received_bytes(result.ctx.bank.party_id)
    hits = []
    for outcome in result.orders:
        for address in outcome.addresses:
            if tape.count(address.encode("ascii")):
                hits.append(address)
    return hits


def _assert_orders_complete(result: ScenarioResult) -> tuple[bool, str]:
    bad = [o.order_id for o in result.orders if o.attack is None and o.state != "complete"]
    return (not bad, "all honest orders complete" if not bad else f"incomplete: {bad}")


def _assert_conservation(result: ScenarioResult) -> tuple[bool, str]:
    ctx = result.ctx
    fiat_ok = ctx.fiat_total() == result.initial_fiat_total
    crypto_ok = ctx.chain.total_supply() == result.initial_crypto_total
    detail = f"fiat {result.initial_fiat_total}->{ctx.fiat_total()}, crypto {result.initial_crypto_total}->{ctx.chain.total_supply()}"
    return (fiat_ok and crypto_ok, detail)


def _assert_platform_blindness(result: ScenarioResult) -> tuple[bool, str]:
    hits = platform_taint_hits(result)
    return (not hits, "no secret encodings on the platform tape" if not hits else f"leaked: {hits}")


def _assert_platform_sees_plaintext(result: ScenarioResult) -> tuple[bool, str]:
    hits = platform_taint_hits(result)
    return (bool(hits), f"control found {len(hits)} plaintext secrets" if hits else "control found nothing")


def _assert_bank_blindness(result: ScenarioResult) -> tuple[bool, str]:
    hits = bank_taint_hits(result)
    return (not hits, "no crypto addresses on the bank tape" if not hits else f"leaked: {hits}")


def _assert_replay_failed_mfa(result: ScenarioResult) -> tuple[bool, str]:
    attacks = [o for o in result.orders if o.attack == "replay"]
    if not attacks:
        return (False, "no replay orders in scenario")
    for o in attacks:
        if o.state != "failed" or o.failure_cause != "mfa":
            return (False, f"{o.order_id} ended {o.state}({o.failure_cause})")
        moved = [tx for tx in result.ctx.chain.all_txs() if tx.recipient in o.addresses]
        if moved:
            return (False, f"{o.order_id} moved crypto despite failing")
    return (True, f"{len(attacks)} replayed orders failed at mfa with no movement")


def _assert_failed_no_movement(result: ScenarioResult) -> tuple[bool, str]:
    for o in result.orders:
        if o.state != "failed":
            continue
        moved = [tx for tx in result.ctx.chain.all_txs() if tx.recipient in o.addresses]
        if moved:
            return (False, f"{o.order_id} failed but moved crypto")
    return (True, "failed orders moved nothing")


def _assert_audit_branches(result: ScenarioResult) -> tuple[bool, str]:
    ctx = result.ctx
    expected_decrypts = 0
    for o in result.orders:
        if o.state not in ("fiat-settled", "crypto-sent", "complete"):
            continue
        outcome = result.audit_outcomes.get(o.order_id)
        if outcome is None:
            return (False, f"{o.order_id} missing audit outcome")
        kind, ssn = outcome
        if o.self_report:
            if kind != "compliant":
                return (False, f"{o.order_id} reported but audited as {kind}")
        else:
            expected_decrypts += 1
            if kind != "deanonymized" or ssn != ctx.users[o.user_index].pii.ssn:
                return (False, f"{o.order_id} expected de-anonymization with the registered SSN")
    if ctx.authority.decrypt_count != expected_decrypts:
        return (False, f"decrypt count {ctx.authority.decrypt_count} != expected {expected_decrypts}")
    return (True, f"{expected_decrypts} de-anonymizations, rest compliant without decryption")


def _assert_address_hygiene(result: ScenarioResult) -> tuple[bool, str]:
    ctx = result.ctx
    owner: dict[str, str] = {}
    for o in result.orders:
        for address in o.addresses:
            if address in owner and owner[address] != o.order_id:
                return (False, f"address {address} used by two orders")
            owner[address] = o.order_id
    pool_senders = {tx.sender for tx in ctx.chain.all_txs() if tx.sender.startswith("pool:")}
    credited: dict[str, int] = {}
    for tx in ctx.chain.all_txs():
        if tx.recipient in owner:
            credited[owner[tx.recipient]] = credited.get(owner[tx.recipient], 0) + tx.amount
    for o in result.orders:
        if o.state == "complete" and result.mode == "fcguard":
            if credited.get(o.order_id, 0) != o.crypto_amount:
                return (False, f"{o.order_id} credited {credited.get(o.order_id, 0)} != {o.crypto_amount}")
    completed = [o for o in result.orders if o.state == "complete"]
    if result.mode == "fcguard" and len(completed) >= 2 and len(pool_senders) < 2:
        return (False, f"only {len(pool_senders)} pool addresses used")
    return (True, f"{len(owner)} unique user addresses, {len(pool_senders)} pool addresses")


def _assert_baseline_linkage(result: ScenarioResult) -> tuple[bool, str]:
    store = result.ctx.platform.baseline_users
    linked = [uid for uid, rec in store.items()
              if rec.get("bank_account") and rec.get("addresses") and rec["pii"].get("ssn")]
    return (bool(linked), f"platform links identity, account, and addresses for {len(linked)} users")


ASSERTIONS = {
    "orders_complete": _assert_orders_complete,
    "conservation": _assert_conservation,
    "platform_blindness": _assert_platform_blindness,
    "platform_sees_plaintext": _assert_platform_sees_plaintext,
    "bank_blindness": _assert_bank_blindness,
    "replay_failed_mfa": _assert_replay_failed_mfa,
    "failed_no_movement": _assert_failed_no_movement,
    "audit_branches": _assert_audit_branches,
    "address_hygiene": _assert_address_hygiene,
    "baseline_linkage": _assert_baseline_linkage,
}


def random_scenario(seed: int, mode: str = "fcguard", n_users: int = 2,
                    orders_per_user: int = 1, profile: str = "toy") -> dict:
    """Deterministic randomized scenario for the security suites."""
    gen = random.Random(f"scenario-gen:{seed}")
    users = []
    for i in range(n_users):
        users.append({
            "name": f"User {seed}-{i} " + "".join(gen.choice("abcdefghijklmnop") for _ in range(6)),
            "birthday": gen.randrange(1950, 2003) * 10000 + gen.randrange(1, 13) * 100 + gen.randrange(1, 29),
            "ssn": gen.randrange(100_000_000, 1_000_000_000),
            "bank_account": gen.randrange(10_000_000_000_000_000, 100_000_000_000_000_000),
            "balance": gen.randrange(5_000, 50_000),
            "self_report": bool(gen.getrandbits(1)),
        })
    orders = []
    for i in range(n_users):
        for _ in range(orders_per_user):
            orders.append({
                "user": i,
                "asset": "BTC",
                "crypto_amount": gen.randrange(100, 2_000),
                "address_count": gen.randrange(1, 4),
                "self_report": bool(gen.getrandbits(1)),
            })
    return {
        "seed": seed,
        "profile": profile,
        "mode": mode,
        "delay_max_ms": 60_000,
        "rotation_epoch": 3,
        "pool_size": 3,
        "users": users,
        "orders": orders,
        "audit": True,
        "assertions": ["conservation", "failed_no_movement"],
    }
