"""Per-community sub-chains for sanitized releases.

Blocks carry an 80-byte header (version, parent hash, Merkle root,
timestamp, nbits, nonce; integers little-endian) and are identified by
the double SHA-256 of that header. Difficulty is expressed directly as
the number of leading zero bits required of the block hash. Consensus is
an in-process validator vote loop over a proposed block.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .mechanisms import as_generator

HEADER_SIZE = 80
GENESIS_PARENT = b"\x00" * 32


def sha256d(data: bytes) -> bytes:
    return hashlib.sha256(hashlib.sha256(data).digest()).digest()


def leading_zero_bits(digest: bytes) -> int:
    value = int.from_bytes(digest, "big")
    return 256 - value.bit_length()


@dataclass(frozen=True)
class Transaction:
    """One sanitized release queued for a community sub-chain.

    epsilon is stored fixed-point (x1000) so hashes are bit-exact across
    platforms.
    """

    releaser: int
    community_id: int
    epsilon_milli: int
    payload: bytes
    tx_timestamp: int = 0

    def __post_init__(self):
        if self.epsilon_milli <= 0:
            raise ValueError("epsilon_milli must be positive")
        if not self.payload:
            raise ValueError("payload must be non-empty")

    def to_bytes(self) -> bytes:
        return struct.pack("<IIIII", self.releaser, self.community_id,
                           self.epsilon_milli, self.tx_timestamp,
                           len(self.payload)) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> Tuple["Transaction", int]:
        releaser, cid, eps, ts, length = struct.unpack_from("<IIIII", data, offset)
        start = offset + 20
        payload = data[start:start + length]
        return cls(releaser=releaser, community_id=cid, epsilon_milli=eps,
                   payload=payload, tx_timestamp=ts), start + length

    @classmethod
    def from_value(cls, releaser: int, community_id: int, epsilon: float,
                   value: float, tx_timestamp: int = 0) -> "Transaction":
        return cls(releaser=releaser, community_id=community_id,
                   epsilon_milli=int(round(epsilon * 1000)),
                   payload=struct.pack("<d", value), tx_timestamp=tx_timestamp)

    def value(self) -> float:
        """Decode the payload as a single little-endian float64."""
        return struct.unpack("<d", self.payload[:8])[0]


def merkle_root(txs: Sequence[Transaction]) -> bytes:
    """Merkle root over SHA-256 transaction leaves.

    A single leaf is its own root; an odd level duplicates its last node.
    """
    if not txs:
        raise ValueError("empty transaction list")
    level = [hashlib.sha256(tx.to_bytes()).digest() for tx in txs]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [hashlib.sha256(level[i] + level[i + 1]).digest()
                 for i in range(0, len(level), 2)]
    return level[0]


@dataclass(frozen=True)
class BlockHeader:
    version: int
    parent_hash: bytes
    merkle_root: bytes
    timestamp: int
    nbits: int
    nonce: int

    def __post_init__(self):
        if len(self.parent_hash) != 32 or len(self.merkle_root) != 32:
            raise ValueError("hashes must be 32 bytes")
        if not 0 <= self.nbits <= 255:
            raise ValueError("nbits must lie in [0, 255]")

    def to_bytes(self) -> bytes:
        return struct.pack("<I", self.version) + self.parent_hash + \
            self.merkle_root + struct.pack("<III", self.timestamp,
                                           self.nbits, self.nonce)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BlockHeader":
        if len(data) != HEADER_SIZE:
            raise ValueError(f"header must be exactly {HEADER_SIZE} bytes")
        version = struct.unpack_from("<I", data, 0)[0]
        parent = data[4:36]
        root = data[36:68]
        timestamp, nbits, nonce = struct.unpack_from("<III", data, 68)
        return cls(version=version, parent_hash=parent, merkle_root=root,
                   timestamp=timestamp, nbits=nbits, nonce=nonce)

    def block_hash(self) -> bytes:
        return sha256d(self.to_bytes())

    def meets_target(self) -> bool:
        return leading_zero_bits(self.block_hash()) >= self.nbits

    def hex_fields(self) -> List[Tuple[str, str]]:
        """Header fields as hex strings in on-disk (little-endian) order."""
        return [
            ("version", struct.pack("<I", self.version).hex()),
            ("parent_hash", self.parent_hash.hex()),
            ("merkle_root", self.merkle_root.hex()),
            ("timestamp", struct.pack("<I", self.timestamp).hex()),
            ("nbits", struct.pack("<I", self.nbits).hex()),
            ("nonce", struct.pack("<I", self.nonce).hex()),
        ]


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: Tuple[Transaction, ...]

    def to_bytes(self) -> bytes:
        body = b"".join(tx.to_bytes() for tx in self.transactions)
        return self.header.to_bytes() + struct.pack("<I", len(self.transactions)) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Block":
        header = BlockHeader.from_bytes(data[:HEADER_SIZE])
        (count,) = struct.unpack_from("<I", data, HEADER_SIZE)
        txs = []
        offset = HEADER_SIZE + 4
        for _ in range(count):
            tx, offset = Transaction.from_bytes(data, offset)
            txs.append(tx)
        return cls(header=header, transactions=tuple(txs))


class MiningExhaustedError(RuntimeError):
    def __init__(self, attempts: int):
        super().__init__(f"no qualifying nonce within {attempts} attempts")
        self.attempts = attempts


def mine_block(parent_hash: bytes, txs: Sequence[Transaction], nbits: int,
               timestamp: int = 0, version: int = 3, nonce_start: int = 0,
               max_attempts: int = 1 << 22) -> Block:
    """Find the smallest nonce >= nonce_start meeting the difficulty
    target. Deterministic given inputs."""
    if not txs:
        raise ValueError("a block needs at least one transaction")
    root = merkle_root(txs)
    prefix = struct.pack("<I", version) + parent_hash + root + \
        struct.pack("<II", timestamp, nbits)
    for attempt in range(max_attempts):
        nonce = nonce_start + attempt
        digest = sha256d(prefix + struct.pack("<I", nonce))
        if leading_zero_bits(digest) >= nbits:
            header = BlockHeader(version=version, parent_hash=parent_hash,
                                 merkle_root=root, timestamp=timestamp,
                                 nbits=nbits, nonce=nonce)
            return Block(header=header, transactions=tuple(txs))
    raise MiningExhaustedError(max_attempts)


def mining_attempts(block: Block, nonce_start: int = 0) -> int:
    """Number of nonce evaluations the miner made for this block."""
    return block.header.nonce - nonce_start + 1


@dataclass
class SubChain:
    """Append-only per-community chain of blocks."""

    community_id: int
    blocks: List[Block] = field(default_factory=list)

    def append(self, block: Block) -> None:
        expected = self.tip_hash()
        if block.header.parent_hash != expected:
            raise ValueError("block does not extend the chain tip")
        self.blocks.append(block)

    def tip_hash(self) -> bytes:
        if not self.blocks:
            return GENESIS_PARENT
        return self.blocks[-1].header.block_hash()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    block_index: Optional[int] = None
    reason: Optional[str] = None

    def __str__(self) -> str:
        if self.ok:
            return "chain valid"
        return f"block {self.block_index}: {self.reason}"


def validate_chain(chain: SubChain) -> ValidationReport:
    """Check parent linkage, Merkle roots, difficulty targets, and
    timestamp monotonicity; reports the first failure."""
    parent = GENESIS_PARENT
    last_timestamp = 0
    for i, block in enumerate(chain.blocks):
        header = block.header
        if header.parent_hash != parent:
            return ValidationReport(False, i, "parent hash mismatch")
        if merkle_root(block.transactions) != header.merkle_root:
            return ValidationReport(False, i, "merkle root mismatch")
        if not header.meets_target():
            return ValidationReport(False, i, "difficulty target not met")
        if header.timestamp < last_timestamp:
            return ValidationReport(False, i, "timestamp decreased")
        parent = header.block_hash()
        last_timestamp = header.timestamp
    return ValidationReport(True)


def write_chain(chain: SubChain, path) -> None:
    """Append-only binary format: length-prefixed block records."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", chain.community_id))
        for block in chain.blocks:
            data = block.to_bytes()
            fh.write(struct.pack("<I", len(data)))
            fh.write(data)


def read_chain(path) -> SubChain:
    with open(path, "rb") as fh:
        raw = fh.read()
    (community_id,) = struct.unpack_from("<I", raw, 0)
    blocks = []
    offset = 4
    while offset < len(raw):
        (length,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        blocks.append(Block.from_bytes(raw[offset:offset + length]))
        offset += length
    return SubChain(community_id=community_id, blocks=blocks)


FIXED_MALICE = "fixed"
BERNOULLI_MALICE = "bernoulli"


@dataclass(frozen=True)
class PoisoningResult:
    rounds: int
    acceptance_rate: float
    aae: float


def simulate_poisoning(community_size: int, adversary_fraction: float,
                       poison_fraction: float, rounds: int, seed=None,
                       txs_per_round: int = 4,
                       malice_model: str = FIXED_MALICE) -> PoisoningResult:
    """Vote-based defense against falsified releases.

    Each round an adversary proposes a block in which a poison_fraction
    of payload values is falsified. Honest validators recompute the
    Merkle commitment of the announced (true) transactions and reject on
    mismatch; adversarial validators always accept. The poisoned block
    commits only on a strict majority of acceptances, otherwise the true
    data is committed. AAE is the mean absolute difference between
    committed and true payload values.

    malice_model "fixed" uses a deterministic adversary count
    round(f * N); "bernoulli" re-draws each validator's allegiance per
    round with probability f, so small communities can stochastically
    lose their honest majority.
    """
    if community_size < 1:
        raise ValueError("need at least one validator")
    if not 0.0 <= adversary_fraction <= 1.0 or not 0.0 <= poison_fraction <= 1.0:
        raise ValueError("fractions must lie in [0, 1]")
    if malice_model not in (FIXED_MALICE, BERNOULLI_MALICE):
        raise ValueError(f"unknown malice model {malice_model!r}")
    rng = as_generator(seed)
    n_poisoned = max(1, int(round(poison_fraction * txs_per_round))) if poison_fraction > 0 else 0
    accepted = 0
    error_sum = 0.0
    error_count = 0
    for _ in range(rounds):
        true_values = rng.normal(0.0, 1.0, size=txs_per_round)
        true_txs = [Transaction.from_value(releaser=i, community_id=0,
                                           epsilon=1.0, value=v)
                    for i, v in enumerate(true_values)]
        announced_root = merkle_root(true_txs)

        poisoned_values = true_values.copy()
        idx = rng.choice(txs_per_round, size=n_poisoned, replace=False)
        poisoned_values[idx] += rng.uniform(1.0, 5.0, size=n_poisoned)
        poisoned_txs = [Transaction.from_value(releaser=i, community_id=0,
                                               epsilon=1.0, value=v)
                        for i, v in enumerate(poisoned_values)]

        if malice_model == FIXED_MALICE:
            n_adversarial = int(round(adversary_fraction * community_size))
        else:
            n_adversarial = int(rng.binomial(community_size, adversary_fraction))
        honest_accepts = merkle_root(poisoned_txs) == announced_root
        votes = n_adversarial + (community_size - n_adversarial) * int(honest_accepts)

        if votes > community_size / 2:
            accepted += 1
            committed = poisoned_values
        else:
            committed = true_values
        error_sum += float(np.abs(committed - true_values).sum())
        error_count += txs_per_round
    return PoisoningResult(rounds=rounds, acceptance_rate=accepted / rounds,
                           aae=error_sum / error_count)


def required_hashrate(block_count: int, nbits: int) -> int:
    """Expected hash evaluations to re-mine block_count blocks at a fixed
    difficulty of nbits leading zero bits."""
    if block_count < 1:
        raise ValueError("block count must be at least 1")
    return block_count * (1 << nbits)


def required_hashrate_ramp(block_count: int, nbits_start: int,
                           blocks_per_step: int) -> int:
    """Expected hash evaluations when the difficulty gains one bit every
    blocks_per_step blocks."""
    if block_count < 1:
        raise ValueError("block count must be at least 1")
    if blocks_per_step < 1:
        raise ValueError("blocks_per_step must be at least 1")
    return sum(1 << (nbits_start + i // blocks_per_step)
               for i in range(block_count))
