"""Deterministic message fabric for the simulator: a simulated millisecond
clock and a network that serializes every protocol message, records one event
per message (sender, receiver, byte length, payload digest), and keeps
per-party tapes of sent and received bytes for the taint and blindness
scans."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .serialize import dumps


class SimClock:
    """Monotonic simulated time in integer milliseconds."""

    def __init__(self) -> None:
        self.now_ms = 0

    def advance_to(self, t_ms: int) -> None:
        if t_ms > self.now_ms:
            self.now_ms = t_ms

    def advance(self, delta_ms: int) -> None:
        self.now_ms += max(0, delta_ms)


@dataclass(frozen=True)
class MessageEvent:
    seq: int
    time_ms: int
    sender: str
    receiver: str
    mtype: str
    size: int
    digest: str
    phase: str


@dataclass
class _Tape:
    chunks: list[bytes] = field(default_factory=list)

    def text(self) -> bytes:
        return b"\n".join(self.chunks)


class Network:
    """Synchronous message recorder. Sending serializes the payload to
    canonical bytes, appends an event, and feeds both parties' tapes."""

    def __init__(self, clock: SimClock):
        self.clock = clock
        self.events: list[MessageEvent] = []
        self._received: dict[tuple[str, str], _Tape] = {}
        self._sent: dict[tuple[str, str], _Tape] = {}
        self.phase_counters: dict[str, dict[str, int]] = {}

    def send(self, sender: str, receiver: str, mtype: str, payload: Any, phase: str) -> Any:
        data = dumps(payload)
        event = MessageEvent(
            seq=len(self.events) + 1,
            time_ms=self.clock.now_ms,
            sender=sender,
            receiver=receiver,
            mtype=mtype,
            size=len(data),
            digest=hashlib.sha256(data).hexdigest(),
            phase=phase,
        )
        self.events.append(event)
        self._received.setdefault((receiver, phase), _Tape()).chunks.append(data)
        self._sent.setdefault((sender, phase), _Tape()).chunks.append(data)
        counters = self.phase_counters.setdefault(phase, {"messages": 0, "bytes": 0})
        counters["messages"] += 1
        counters["bytes"] += len(data)
        return payload

    def received_bytes(self, party: str, phases: Iterable[str] | None = None) -> bytes:
        return self._collect(self._received, party, phases)

    def sent_bytes(self, party: str, phases: Iterable[str] | None = None) -> bytes:
        return self._collect(self._sent, party, phases)

    @staticmethod
    def _collect(tapes: dict[tuple[str, str], _Tape], party: str,
                 phases: Iterable[str] | None) -> bytes:
        wanted = set(phases) if phases is not None else None
        out = []
        for (name, phase), tape in tapes.items():
            if name == party and (wanted is None or phase in wanted):
                out.append(tape.text())
        return b"\n".join(out)

    def event_log_lines(self) -> list[str]:
        lines = []
        for ev in self.events:
            lines.append(json.dumps({
                "bytes": ev.size,
                "digest": ev.digest,
                "phase": ev.phase,
                "receiver": ev.receiver,
                "sender": ev.sender,
                "seq": ev.seq,
                "time_ms": ev.time_ms,
                "type": ev.mtype,
            }, sort_keys=True, separators=(",", ":")))
        return lines
