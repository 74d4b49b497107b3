"""GateChain: a permissioned proof-of-authority ledger for entry-exit registry management."""

from .authorities import (
    ACTIONS,
    ROLE_PERMISSIONS,
    ROLES,
    AuthorityRecord,
    AuthorityRegistry,
    PermissionDeniedError,
)
from .chain import (
    ENTRY_TYPE,
    EXIT_TYPE,
    GENESIS_TYPE,
    Block,
    Chain,
    EntryExitTransaction,
    VerificationReport,
    Violation,
    ViolationKind,
    build_block,
    compute_block_hash,
    compute_transactions_root,
    make_genesis,
    verify_block,
    verify_chain,
)
from .crypto import (
    AuthorityKeyPair,
    canonical_bytes,
    decrypt_field,
    encrypt_field,
    generate_data_key,
    generate_keypair,
    sha256_hex,
    sign_digest,
    verify_signature,
)
from .node import GateChainNode
from .registry import (
    BorderRegistry,
    EntryForm,
    ExitForm,
    StatsReport,
    TravelRecordView,
)
from .storage import ChainStore, KeyStore

__version__ = "0.1.0"

__all__ = [
    "ACTIONS",
    "ROLES",
    "ROLE_PERMISSIONS",
    "ENTRY_TYPE",
    "EXIT_TYPE",
    "GENESIS_TYPE",
    "AuthorityKeyPair",
    "AuthorityRecord",
    "AuthorityRegistry",
    "Block",
    "BorderRegistry",
    "Chain",
    "ChainStore",
    "EntryExitTransaction",
    "EntryForm",
    "ExitForm",
    "GateChainNode",
    "KeyStore",
    "PermissionDeniedError",
    "StatsReport",
    "TravelRecordView",
    "VerificationReport",
    "Violation",
    "ViolationKind",
    "build_block",
    "canonical_bytes",
    "compute_block_hash",
    "compute_transactions_root",
    "decrypt_field",
    "encrypt_field",
    "generate_data_key",
    "generate_keypair",
    "make_genesis",
    "sha256_hex",
    "sign_digest",
    "verify_block",
    "verify_chain",
    "verify_signature",
]
