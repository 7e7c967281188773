"""Provenance chain: linking, verification, tamper evidence."""

import hashlib

from govtree.chain import (
    Chain,
    ChainEntry,
    GENESIS,
    chain_of,
    from_jsonl,
    link_hash,
    to_jsonl,
    verify,
)
from govtree.harness import Xorshift64Star


def test_genesis_and_link_formula():
    assert GENESIS == b"\x00" * 32
    assert link_hash(GENESIS, b"p") == hashlib.sha256(GENESIS + b"p").digest()


def test_append_to_empty():
    c = Chain().append(b"payload")
    assert len(c) == 1
    assert c[0].prev_hash == GENESIS
    assert verify(c).valid


def test_append_preserves_validity():
    rng = Xorshift64Star(41)
    for _ in range(100):
        c = chain_of([rng.bytes(rng.randrange(30)) for _ in range(rng.randrange(20))])
        assert verify(c).valid
        assert verify(c.append(rng.bytes(5))).valid


def test_identical_inputs_identical_hashes():
    payloads = [b"a", b"bb", b"", b"ccc"]
    assert chain_of(payloads).head == chain_of(payloads).head
    assert chain_of(payloads).head != chain_of([b"a", b"bb", b"x", b"ccc"]).head


def test_verify_empty_is_valid():
    assert verify(Chain()).valid


def test_payload_tamper_breaks_at_index():
    rng = Xorshift64Star(42)
    c = chain_of([rng.bytes(8) for _ in range(10)])
    for k in range(10):
        e = c[k]
        bad = ChainEntry(e.payload[:3] + b"\xff" + e.payload[4:], e.prev_hash, e.hash)
        t = Chain(c.entries[:k] + (bad,) + c.entries[k + 1 :])
        v = verify(t)
        assert not v.valid and v.broken_at == k


def test_every_single_byte_tamper_detected():
    rng = Xorshift64Star(43)
    c = chain_of([rng.bytes(6) for _ in range(6)])
    for k in range(len(c)):
        e = c[k]
        for field in ("payload", "prev_hash", "hash"):
            data = getattr(e, field)
            for i in range(len(data)):
                bad_data = data[:i] + bytes([data[i] ^ 0x40]) + data[i + 1 :]
                parts = {
                    "payload": e.payload,
                    "prev_hash": e.prev_hash,
                    "hash": e.hash,
                }
                parts[field] = bad_data
                t = Chain(
                    c.entries[:k]
                    + (ChainEntry(parts["payload"], parts["prev_hash"], parts["hash"]),)
                    + c.entries[k + 1 :]
                )
                v = verify(t)
                assert not v.valid
                assert v.broken_at <= k or (field == "hash" and v.broken_at == k)


def test_prefix_closure():
    rng = Xorshift64Star(44)
    c = chain_of([rng.bytes(10) for _ in range(25)])
    for k in range(len(c) + 1):
        assert verify(c.prefix(k)).valid


def test_jsonl_round_trip():
    rng = Xorshift64Star(45)
    c = chain_of([rng.bytes(12) for _ in range(8)])
    again = from_jsonl(to_jsonl(c))
    assert again.entries == c.entries
    assert verify(again).valid
