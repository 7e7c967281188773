"""Tamper-evident provenance chain.

Append-only linked hashes: entry i commits to entry i-1 via
``hash = SHA-256(prev_hash || payload)``, with a 32-zero-byte genesis.
Payloads are canonical event encodings (byte-exact, see
``directives.canonical_json_bytes``), so two runs over the same inputs
produce bit-identical chains. Changing any byte of any entry breaks
verification at or before that entry.

File format: JSON lines ``{"payload": base64, "prev": hex, "hash": hex}``.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

GENESIS = b"\x00" * 32


def link_hash(prev: bytes, payload: bytes) -> bytes:
    return hashlib.sha256(prev + payload).digest()


@dataclass(frozen=True)
class ChainEntry:
    payload: bytes
    prev_hash: bytes
    hash: bytes


class Chain:
    """Immutable sequence of linked entries; append returns a new
    chain."""

    def __init__(self, entries: Tuple[ChainEntry, ...] = ()):
        self.entries = tuple(entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def head(self) -> bytes:
        return self.entries[-1].hash if self.entries else GENESIS

    def append(self, payload: bytes) -> "Chain":
        prev = self.head
        return Chain(self.entries + (ChainEntry(payload, prev, link_hash(prev, payload)),))

    def prefix(self, k: int) -> "Chain":
        return Chain(self.entries[:k])


def chain_of(payloads: Iterable[bytes]) -> Chain:
    c = Chain()
    for p in payloads:
        c = c.append(p)
    return c


@dataclass(frozen=True)
class ChainVerdict:
    valid: bool
    broken_at: Optional[int] = None


def verify(c: Chain) -> ChainVerdict:
    """Recompute every link; report the first index that fails."""
    prev = GENESIS
    for i, e in enumerate(c.entries):
        if e.prev_hash != prev or link_hash(e.prev_hash, e.payload) != e.hash:
            return ChainVerdict(False, i)
        prev = e.hash
    return ChainVerdict(True)


def to_jsonl(c: Chain) -> str:
    lines = []
    for e in c.entries:
        lines.append(
            json.dumps(
                {
                    "payload": base64.b64encode(e.payload).decode(),
                    "prev": e.prev_hash.hex(),
                    "hash": e.hash.hex(),
                }
            )
        )
    return "".join(line + "\n" for line in lines)


def from_jsonl(text: str) -> Chain:
    entries = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        entries.append(
            ChainEntry(
                base64.b64decode(obj["payload"]),
                bytes.fromhex(obj["prev"]),
                bytes.fromhex(obj["hash"]),
            )
        )
    return Chain(tuple(entries))
