"""Block construction, hash linkage, and full-chain verification.

A block commits to its payload twice: the Merkle root of its transactions
is part of the signed header, and the header hash is chained into the next
block's previousHash. Verification recomputes everything from the stored
fields, so any post-hoc edit of any field surfaces as at least one
violation at the edited block.

Field names on Block and EntryExitTransaction mirror the on-ledger schema
exactly (including previousHash); to_dict/from_dict are therefore direct
and the canonical serialization of a block is its storage line.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence, Union

from .crypto import (
    AuthorityKeyPair,
    canonical_bytes,
    is_cipher_field,
    quantize_timestamp,
    sha256_hex,
    sign_digest,
    verify_signature,
)

GENESIS_TYPE = "0xFF"
ENTRY_TYPE = "0x00"
EXIT_TYPE = "0x01"
BLOCK_TYPES = frozenset((GENESIS_TYPE, ENTRY_TYPE, EXIT_TYPE))

ZERO_HASH = "0" * 64

_TX_FIELDS = (
    "Birthdate",
    "EntryDate",
    "EntryGate",
    "ExitDate",
    "ExitGate",
    "NameSurname",
    "Nationality",
    "PassportNumber",
    "PassportValidityDate",
    "Plate",
)

_BLOCK_FIELDS = (
    "authority",
    "hash",
    "index",
    "nonce",
    "previousHash",
    "signature",
    "timestamp",
    "transactions",
    "transactions_root",
)


class ChainError(Exception):
    """Base error for chain operations."""


class TransactionShapeError(ChainError, ValueError):
    """Transaction fields do not match the block type's required shape."""


class ClockRegressionError(ChainError, ValueError):
    """New block timestamp is earlier than the chain tip's."""


class DuplicateBlockError(ChainError, ValueError):
    """A block with this index is already on the chain."""


class ViolationKind(str, Enum):
    HASH_MISMATCH = "HashMismatch"
    LINK_MISMATCH = "LinkMismatch"
    ROOT_MISMATCH = "RootMismatch"
    BAD_SIGNATURE = "BadSignature"
    UNKNOWN_AUTHORITY = "UnknownAuthority"
    INDEX_GAP = "IndexGap"
    BAD_TIMESTAMP_ORDER = "BadTimestampOrder"


@dataclass(frozen=True)
class Violation:
    block_index: int
    kind: ViolationKind
    detail: str

    def to_dict(self) -> dict:
        return {
            "block_index": self.block_index,
            "kind": self.kind.value,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    violations: tuple[Violation, ...]

    @classmethod
    def from_violations(cls, violations: Sequence[Violation]) -> "VerificationReport":
        return cls(valid=not violations, violations=tuple(violations))

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [v.to_dict() for v in self.violations],
        }


class AppendRejectedError(ChainError):
    """Block failed verification against the tip and validator set."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        summary = "; ".join(f"{v.kind.value}: {v.detail}" for v in self.violations)
        super().__init__(f"block rejected: {summary}")


# ---------------------------------------------------------------------------
# Transactions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntryExitTransaction:
    """One border-crossing event as recorded on the ledger.

    PassportNumber, NameSurname, and Nationality are always cipher fields
    (base64 AES-GCM blobs), never plaintext. Entry events carry
    EntryDate/EntryGate and leave the exit pair empty; exit events are the
    mirror image.
    """

    PassportNumber: str
    NameSurname: str
    Nationality: str
    Birthdate: str
    PassportValidityDate: str
    EntryDate: str = ""
    EntryGate: str = ""
    ExitDate: str = ""
    ExitGate: str = ""
    Plate: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EntryExitTransaction":
        missing = [f for f in _TX_FIELDS if f not in data]
        extra = [k for k in data if k not in _TX_FIELDS]
        if missing or extra:
            raise TransactionShapeError(
                f"bad transaction fields: missing={missing} unexpected={extra}"
            )
        values = {f: data[f] for f in _TX_FIELDS}
        for name, value in values.items():
            if not isinstance(value, str):
                raise TransactionShapeError(f"{name} must be a string")
        return cls(**values)


def validate_transaction_shape(tx: EntryExitTransaction, block_type: str) -> None:
    """Raise TransactionShapeError unless ``tx`` fits ``block_type``."""
    problems: list[str] = []
    for name in ("PassportNumber", "NameSurname", "Nationality"):
        if not is_cipher_field(getattr(tx, name)):
            problems.append(f"{name} is not an encrypted field")
    if block_type == ENTRY_TYPE:
        if not tx.EntryDate or not tx.EntryGate:
            problems.append("entry transaction requires EntryDate and EntryGate")
        if tx.ExitDate or tx.ExitGate:
            problems.append("entry transaction must leave ExitDate and ExitGate empty")
    elif block_type == EXIT_TYPE:
        if not tx.ExitDate or not tx.ExitGate:
            problems.append("exit transaction requires ExitDate and ExitGate")
        if tx.EntryDate or tx.EntryGate:
            problems.append("exit transaction must leave EntryDate and EntryGate empty")
    else:
        problems.append(f"unknown block type {block_type!r}")
    if problems:
        raise TransactionShapeError("; ".join(problems))


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    index: int
    nonce: str
    timestamp: float
    previousHash: str
    transactions: tuple[EntryExitTransaction, ...]
    transactions_root: str
    authority: str
    hash: str
    signature: str

    def header_dict(self) -> dict:
        """The six signed header fields (hash preimage)."""
        return {
            "index": self.index,
            "nonce": self.nonce,
            "timestamp": self.timestamp,
            "previousHash": self.previousHash,
            "transactions_root": self.transactions_root,
            "authority": self.authority,
        }

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "nonce": self.nonce,
            "timestamp": self.timestamp,
            "previousHash": self.previousHash,
            "transactions": [tx.to_dict() for tx in self.transactions],
            "transactions_root": self.transactions_root,
            "authority": self.authority,
            "hash": self.hash,
            "signature": self.signature,
        }

    def serialize(self) -> str:
        """Canonical single-line text form (the persistence format)."""
        return canonical_bytes(self.to_dict()).decode("utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "Block":
        missing = [f for f in _BLOCK_FIELDS if f not in data]
        extra = [k for k in data if k not in _BLOCK_FIELDS]
        if missing or extra:
            raise ChainError(f"bad block fields: missing={missing} unexpected={extra}")
        index = data["index"]
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise ChainError("block index must be a non-negative integer")
        txs = data["transactions"]
        if not isinstance(txs, list):
            raise ChainError("transactions must be a list")
        return cls(
            index=index,
            nonce=str(data["nonce"]),
            timestamp=float(data["timestamp"]),
            previousHash=str(data["previousHash"]),
            transactions=tuple(EntryExitTransaction.from_dict(t) for t in txs),
            transactions_root=str(data["transactions_root"]),
            authority=str(data["authority"]),
            hash=str(data["hash"]),
            signature=str(data["signature"]),
        )


def compute_transactions_root(
    transactions: Sequence[EntryExitTransaction],
) -> str:
    """Merkle root over the transaction hashes.

    Leaves are sha256 of each transaction's canonical bytes; pairs are
    combined by hashing the ASCII concatenation of the two hex digests; an
    odd level duplicates its last node. No transactions hashes the empty
    byte string; a single leaf is the root itself.
    """
    level = [sha256_hex(canonical_bytes(tx.to_dict())) for tx in transactions]
    if not level:
        return sha256_hex(b"")
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [
            sha256_hex((level[i] + level[i + 1]).encode("ascii"))
            for i in range(0, len(level), 2)
        ]
    return level[0]


def compute_block_hash(
    index: int,
    nonce: str,
    timestamp: float,
    previous_hash: str,
    transactions_root: str,
    authority: str,
) -> str:
    """Hash of the six header fields; excludes hash and signature."""
    return sha256_hex(
        canonical_bytes(
            {
                "index": index,
                "nonce": nonce,
                "timestamp": timestamp,
                "previousHash": previous_hash,
                "transactions_root": transactions_root,
                "authority": authority,
            }
        )
    )


def make_genesis(
    authority: AuthorityKeyPair, timestamp: Optional[float] = None
) -> Block:
    """The chain origin: index 0, zero previousHash, no transactions."""
    ts = quantize_timestamp(timestamp if timestamp is not None else time.time())
    root = compute_transactions_root(())
    block_hash = compute_block_hash(
        0, GENESIS_TYPE, ts, ZERO_HASH, root, authority.public_key
    )
    return Block(
        index=0,
        nonce=GENESIS_TYPE,
        timestamp=ts,
        previousHash=ZERO_HASH,
        transactions=(),
        transactions_root=root,
        authority=authority.public_key,
        hash=block_hash,
        signature=sign_digest(authority.private_key, block_hash),
    )


def build_block(
    prev: Block,
    block_type: str,
    tx: EntryExitTransaction,
    signer: AuthorityKeyPair,
    timestamp: Optional[float] = None,
) -> Block:
    """Assemble and sign the successor of ``prev`` carrying one transaction."""
    if block_type not in (ENTRY_TYPE, EXIT_TYPE):
        raise ValueError(f"block type must be entry or exit, got {block_type!r}")
    validate_transaction_shape(tx, block_type)
    ts = quantize_timestamp(timestamp if timestamp is not None else time.time())
    if ts < prev.timestamp:
        raise ClockRegressionError(
            f"timestamp {ts:.6f} precedes chain tip {prev.timestamp:.6f}"
        )
    transactions = (tx,)
    root = compute_transactions_root(transactions)
    block_hash = compute_block_hash(
        prev.index + 1, block_type, ts, prev.hash, root, signer.public_key
    )
    return Block(
        index=prev.index + 1,
        nonce=block_type,
        timestamp=ts,
        previousHash=prev.hash,
        transactions=transactions,
        transactions_root=root,
        authority=signer.public_key,
        hash=block_hash,
        signature=sign_digest(signer.private_key, block_hash),
    )


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

ValidatorPolicy = Union[set, frozenset, object]


def _is_authorized(policy: ValidatorPolicy, authority: str, timestamp: float) -> bool:
    checker = getattr(policy, "is_signing_authority_at", None)
    if checker is not None:
        return bool(checker(authority, timestamp))
    if isinstance(policy, (set, frozenset)):
        return authority in policy
    raise TypeError(
        "validator policy must be a key set or expose is_signing_authority_at()"
    )


def verify_block(
    block: Block,
    prev: Optional[Block],
    validator_set: ValidatorPolicy,
    position: Optional[int] = None,
) -> list[Violation]:
    """All violations for one block; empty list means the block is sound.

    The header hash is rechecked against the root recomputed from the
    actual transaction list, so a tampered transaction reports both
    RootMismatch and HashMismatch. Violations are reported at ``position``
    (the block's place in the chain) when given — the stored index field
    itself may be what was tampered with.
    """
    violations: list[Violation] = []
    idx = block.index if position is None else position

    actual_root = compute_transactions_root(block.transactions)
    if actual_root != block.transactions_root:
        violations.append(
            Violation(
                idx,
                ViolationKind.ROOT_MISMATCH,
                f"stored root {block.transactions_root[:16]}… does not match transactions",
            )
        )
    recomputed_hash = compute_block_hash(
        block.index,
        block.nonce,
        block.timestamp,
        block.previousHash,
        actual_root,
        block.authority,
    )
    if recomputed_hash != block.hash:
        violations.append(
            Violation(
                idx,
                ViolationKind.HASH_MISMATCH,
                f"stored hash {block.hash[:16]}… does not match recomputed header hash",
            )
        )
    if not verify_signature(block.authority, block.hash, block.signature):
        violations.append(
            Violation(idx, ViolationKind.BAD_SIGNATURE, "signature does not verify")
        )
    if not _is_authorized(validator_set, block.authority, block.timestamp):
        violations.append(
            Violation(
                idx,
                ViolationKind.UNKNOWN_AUTHORITY,
                f"authority {block.authority[:16]}… not a signing authority at block time",
            )
        )
    if prev is None:
        if block.index != 0:
            violations.append(
                Violation(idx, ViolationKind.INDEX_GAP, "first block must have index 0")
            )
    else:
        if block.index != prev.index + 1:
            violations.append(
                Violation(
                    idx,
                    ViolationKind.INDEX_GAP,
                    f"index {block.index} does not follow {prev.index}",
                )
            )
        if block.previousHash != prev.hash:
            violations.append(
                Violation(
                    idx,
                    ViolationKind.LINK_MISMATCH,
                    "previousHash does not match predecessor's hash",
                )
            )
        if block.timestamp < prev.timestamp:
            violations.append(
                Violation(
                    idx,
                    ViolationKind.BAD_TIMESTAMP_ORDER,
                    f"timestamp {block.timestamp:.6f} precedes predecessor",
                )
            )
    return violations


def verify_chain(
    chain: Union["Chain", Sequence[Block]], validator_set: ValidatorPolicy
) -> VerificationReport:
    """Run verify_block over every block in order and aggregate violations."""
    blocks: Sequence[Block] = chain.blocks if isinstance(chain, Chain) else chain
    if not blocks:
        return VerificationReport.from_violations(
            [Violation(0, ViolationKind.INDEX_GAP, "chain is empty; genesis block missing")]
        )
    violations: list[Violation] = []
    prev: Optional[Block] = None
    for position, block in enumerate(blocks):
        violations.extend(verify_block(block, prev, validator_set, position=position))
        prev = block
    return VerificationReport.from_violations(violations)


# ---------------------------------------------------------------------------
# The chain
# ---------------------------------------------------------------------------

class Chain:
    """Append-only block sequence bound to a validator policy.

    Single-writer contract: one appender at a time; readers may traverse a
    snapshot (``blocks`` is only ever appended to, existing entries are
    immutable Block values).
    """

    def __init__(
        self,
        validator_set: ValidatorPolicy,
        blocks: Optional[Iterable[Block]] = None,
    ):
        self.validator_set = validator_set
        self.blocks: list[Block] = list(blocks) if blocks is not None else []

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)

    def __getitem__(self, index: int) -> Block:
        return self.blocks[index]

    @property
    def tip(self) -> Block:
        if not self.blocks:
            raise ChainError("chain is empty")
        return self.blocks[-1]

    def append(self, block: Block) -> Block:
        """Verify ``block`` against the tip and validator set, then append."""
        if any(b.index == block.index for b in self.blocks):
            raise DuplicateBlockError(f"block index {block.index} already present")
        prev = self.blocks[-1] if self.blocks else None
        violations = verify_block(block, prev, self.validator_set)
        if violations:
            raise AppendRejectedError(violations)
        self.blocks.append(block)
        return block

    def verify(self) -> VerificationReport:
        return verify_chain(self.blocks, self.validator_set)
