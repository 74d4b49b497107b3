"""Validator-set management: authority identities, roles, and permissions.

The set of authorities is small and predetermined; every application
action is gated by the role matrix below. Adds and revocations are
timestamped so chain verification can apply the historical-membership
policy: a block is acceptable if its signer was a registered signing
authority *at the block's timestamp*, which keeps legitimate history valid
after a key is revoked.

All registry mutations are appended to an audit log (actor, action,
target, timestamp).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .crypto import quantize_timestamp

ROLE_ADMIN = "admin"
ROLE_OFFICER = "officer"
ROLE_AUDITOR = "auditor"
ROLES = (ROLE_ADMIN, ROLE_OFFICER, ROLE_AUDITOR)

ACTION_MANAGE_AUTHORITIES = "manage_authorities"
ACTION_REGISTER_ENTRY = "register_entry"
ACTION_REGISTER_EXIT = "register_exit"
ACTION_LIST_RECORDS = "list_records"
ACTION_VERIFY_CHAIN = "verify_chain"
ACTION_VIEW_STATS = "view_stats"
ACTIONS = (
    ACTION_MANAGE_AUTHORITIES,
    ACTION_REGISTER_ENTRY,
    ACTION_REGISTER_EXIT,
    ACTION_LIST_RECORDS,
    ACTION_VERIFY_CHAIN,
    ACTION_VIEW_STATS,
)

ROLE_PERMISSIONS: dict[str, frozenset[str]] = {
    ROLE_ADMIN: frozenset(ACTIONS),
    ROLE_OFFICER: frozenset(
        (ACTION_REGISTER_ENTRY, ACTION_REGISTER_EXIT, ACTION_LIST_RECORDS)
    ),
    ROLE_AUDITOR: frozenset(
        (ACTION_LIST_RECORDS, ACTION_VERIFY_CHAIN, ACTION_VIEW_STATS)
    ),
}

# Roles whose active members may sign blocks.
SIGNING_ROLES = frozenset((ROLE_ADMIN, ROLE_OFFICER))

STATUS_ACTIVE = "active"
STATUS_REVOKED = "revoked"


class AuthorityError(Exception):
    """Base error for registry operations."""


class PermissionDeniedError(AuthorityError):
    def __init__(self, public_key: str, action: str):
        self.public_key = public_key
        self.action = action
        super().__init__(f"key {public_key[:16]}… lacks permission {action!r}")


class DuplicateAuthorityError(AuthorityError, ValueError):
    pass


class UnknownAuthorityError(AuthorityError, KeyError):
    pass


class AlreadyRevokedError(AuthorityError, ValueError):
    pass


@dataclass
class AuthorityRecord:
    public_key: str
    display_name: str
    role: str
    status: str = STATUS_ACTIVE
    added_at: float = 0.0
    revoked_at: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "public_key": self.public_key,
            "display_name": self.display_name,
            "role": self.role,
            "status": self.status,
            "added_at": self.added_at,
            "revoked_at": self.revoked_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuthorityRecord":
        return cls(
            public_key=data["public_key"],
            display_name=data["display_name"],
            role=data["role"],
            status=data["status"],
            added_at=float(data["added_at"]),
            revoked_at=None if data.get("revoked_at") is None else float(data["revoked_at"]),
        )


@dataclass
class AuditEvent:
    timestamp: float
    actor: str  # public key hex, or "system" for bootstrap
    action: str  # "add" | "revoke" | "bootstrap"
    target: str  # public key hex affected
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "actor": self.actor,
            "action": self.action,
            "target": self.target,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuditEvent":
        return cls(
            timestamp=float(data["timestamp"]),
            actor=data["actor"],
            action=data["action"],
            target=data["target"],
            detail=data.get("detail", ""),
        )


@dataclass
class AuthorityRegistry:
    records: dict[str, AuthorityRecord] = field(default_factory=dict)
    audit_log: list[AuditEvent] = field(default_factory=list)

    # -- bootstrap ---------------------------------------------------------

    def bootstrap_admin(
        self, public_key: str, display_name: str, at: Optional[float] = None
    ) -> AuthorityRecord:
        """Install the first admin; only valid on an empty registry."""
        if self.records:
            raise AuthorityError("registry already bootstrapped")
        ts = quantize_timestamp(at if at is not None else time.time())
        record = AuthorityRecord(
            public_key=public_key,
            display_name=display_name,
            role=ROLE_ADMIN,
            status=STATUS_ACTIVE,
            added_at=ts,
        )
        self.records[public_key] = record
        self.audit_log.append(
            AuditEvent(ts, "system", "bootstrap", public_key, display_name)
        )
        return record

    # -- mutations ---------------------------------------------------------

    def add_authority(
        self,
        actor: str,
        public_key: str,
        display_name: str,
        role: str,
        at: Optional[float] = None,
    ) -> AuthorityRecord:
        if not self.check_permission(actor, ACTION_MANAGE_AUTHORITIES):
            raise PermissionDeniedError(actor, ACTION_MANAGE_AUTHORITIES)
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}; expected one of {ROLES}")
        if public_key in self.records:
            raise DuplicateAuthorityError(f"key {public_key[:16]}… already registered")
        ts = quantize_timestamp(at if at is not None else time.time())
        record = AuthorityRecord(
            public_key=public_key,
            display_name=display_name,
            role=role,
            status=STATUS_ACTIVE,
            added_at=ts,
        )
        self.records[public_key] = record
        self.audit_log.append(AuditEvent(ts, actor, "add", public_key, f"{role}:{display_name}"))
        return record

    def revoke_authority(
        self, actor: str, public_key: str, at: Optional[float] = None
    ) -> AuthorityRecord:
        if not self.check_permission(actor, ACTION_MANAGE_AUTHORITIES):
            raise PermissionDeniedError(actor, ACTION_MANAGE_AUTHORITIES)
        record = self.records.get(public_key)
        if record is None:
            raise UnknownAuthorityError(f"key {public_key[:16]}… not registered")
        if record.status == STATUS_REVOKED:
            raise AlreadyRevokedError(f"key {public_key[:16]}… already revoked")
        ts = quantize_timestamp(at if at is not None else time.time())
        record.status = STATUS_REVOKED
        record.revoked_at = ts
        self.audit_log.append(AuditEvent(ts, actor, "revoke", public_key, record.role))
        return record

    # -- queries -----------------------------------------------------------

    def get(self, public_key: str) -> Optional[AuthorityRecord]:
        return self.records.get(public_key)

    def check_permission(self, public_key: str, action: str) -> bool:
        """True iff the key is registered, active, and its role grants the action."""
        record = self.records.get(public_key)
        if record is None or record.status != STATUS_ACTIVE:
            return False
        return action in ROLE_PERMISSIONS.get(record.role, frozenset())

    def validator_set(self) -> set[str]:
        """Active public keys whose role may sign blocks."""
        return {
            key
            for key, record in self.records.items()
            if record.status == STATUS_ACTIVE and record.role in SIGNING_ROLES
        }

    def is_signing_authority_at(self, public_key: str, timestamp: float) -> bool:
        """Historical-membership policy used by chain verification."""
        record = self.records.get(public_key)
        if record is None or record.role not in SIGNING_ROLES:
            return False
        if timestamp < record.added_at:
            return False
        return record.revoked_at is None or timestamp < record.revoked_at

    def list_records(self) -> list[AuthorityRecord]:
        return sorted(self.records.values(), key=lambda r: (r.added_at, r.public_key))

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "authorities": [r.to_dict() for r in self.list_records()],
            "audit_log": [e.to_dict() for e in self.audit_log],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuthorityRegistry":
        registry = cls()
        for raw in data.get("authorities", []):
            record = AuthorityRecord.from_dict(raw)
            registry.records[record.public_key] = record
        registry.audit_log = [AuditEvent.from_dict(e) for e in data.get("audit_log", [])]
        return registry
