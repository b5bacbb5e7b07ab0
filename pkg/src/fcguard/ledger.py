"""Simulated public infrastructure: an append-only verifiable-data registry
for schemas and credential definitions, and an account-model cryptocurrency
ledger standing in for a test network. Both are globally readable by every
party."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .errors import LedgerError, RegistryError
from .serialize import dumps

# Constant simulated propagation latency for chain transactions, matching the
# scale of the reference benchmark figures.
DEFAULT_CHAIN_LATENCY_MS = 170


@dataclass(frozen=True)
class RegistryEntry:
    entry_id: str
    kind: str  # "schema" | "credential-definition"
    payload: bytes
    seq: int


class Registry:
    """Append-only store keyed by (kind, id); payloads are opaque bytes."""

    def __init__(self) -> None:
        self._entries: dict[tuple[str, str], RegistryEntry] = {}
        self._log: list[RegistryEntry] = []

    def put(self, entry_id: str, kind: str, payload: bytes) -> int:
        key = (kind, entry_id)
        if key in self._entries:
            raise RegistryError(f"duplicate registry id {entry_id!r} for kind {kind!r}")
        entry = RegistryEntry(entry_id=entry_id, kind=kind, payload=bytes(payload), seq=len(self._log) + 1)
        self._entries[key] = entry
        self._log.append(entry)
        return entry.seq

    def get(self, entry_id: str, kind: str) -> RegistryEntry:
        try:
            return self._entries[(kind, entry_id)]
        except KeyError:
            raise RegistryError(f"unknown registry id {entry_id!r} for kind {kind!r}") from None

    def log(self) -> list[RegistryEntry]:
        return list(self._log)

    def replay(self) -> "Registry":
        """Rebuild a registry from the put log; used to assert append-only state."""
        fresh = Registry()
        for entry in self._log:
            fresh.put(entry.entry_id, entry.kind, entry.payload)
        return fresh

    def state_digest(self) -> str:
        h = hashlib.sha256()
        for entry in self._log:
            h.update(dumps([entry.entry_id, entry.kind, entry.payload, entry.seq]))
        return h.hexdigest()


@dataclass(frozen=True)
class ChainTx:
    tx_id: str
    sender: str
    recipient: str
    amount: int  # crypto minor units
    timestamp_ms: int
    seq: int


class Chain:
    """Account-balance ledger. Transactions apply immediately and are ordered
    by (timestamp, sequence); genesis allocations are the only mint."""

    def __init__(self, latency_ms: int = DEFAULT_CHAIN_LATENCY_MS) -> None:
        self.latency_ms = latency_ms
        self._balances: dict[str, int] = {}
        self._txs: list[ChainTx] = []

    def genesis(self, allocations: dict[str, int]) -> None:
        if self._txs or self._balances:
            raise LedgerError("genesis must precede all transactions")
        for addr, amount in allocations.items():
            if amount < 0:
                raise LedgerError("genesis amounts must be non-negative")
            self._balances[addr] = self._balances.get(addr, 0) + amount

    def submit(self, sender: str, recipient: str, amount: int, timestamp_ms: int) -> str:
        if not isinstance(amount, int) or amount <= 0:
            raise LedgerError("transaction amount must be a positive integer")
        if self._balances.get(sender, 0) < amount:
            raise LedgerError(f"insufficient balance at {sender!r}")
        seq = len(self._txs) + 1
        tx_id = hashlib.sha256(dumps([sender, recipient, amount, timestamp_ms, seq])).hexdigest()[:24]
        self._balances[sender] -= amount
        self._balances[recipient] = self._balances.get(recipient, 0) + amount
        self._txs.append(ChainTx(tx_id=tx_id, sender=sender, recipient=recipient,
                                 amount=amount, timestamp_ms=timestamp_ms, seq=seq))
        return tx_id

    def query(self, address: str) -> list[ChainTx]:
        hits = [tx for tx in self._txs if tx.sender == address or tx.recipient == address]
        return sorted(hits, key=lambda tx: (tx.timestamp_ms, tx.seq))

    def balance(self, address: str) -> int:
        return self._balances.get(address, 0)

    def total_supply(self) -> int:
        return sum(self._balances.values())

    def all_txs(self) -> list[ChainTx]:
        return list(self._txs)

    def dump_jsonl(self) -> str:
        lines = []
        for tx in self._txs:
            lines.append(json.dumps({
                "amount": tx.amount,
                "from": tx.sender,
                "seq": tx.seq,
                "timestamp_ms": tx.timestamp_ms,
                "to": tx.recipient,
                "tx_id": tx.tx_id,
            }, sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + ("\n" if lines else "")
