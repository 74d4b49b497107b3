"""Authenticated HTTP interface for registration, listing, verification, and admin.

Login is challenge-response against the registered authority keys: the
server hands out a single-use random nonce, the client signs
sha256(ascii(nonce)) with its ECDSA key, and a valid signature yields a
bearer token. Challenges are key-bound, expire quickly, and are consumed
on any attempt, so a replayed or stale challenge is always rejected.

Private keys and the AES data key never leave the node; personal data is
returned in plaintext only to sessions whose role grants the action.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field as dc_field
from datetime import datetime
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from pydantic import BaseModel

from .authorities import (
    ACTION_LIST_RECORDS,
    ACTION_MANAGE_AUTHORITIES,
    ACTION_REGISTER_ENTRY,
    ACTION_REGISTER_EXIT,
    ACTION_VERIFY_CHAIN,
    ACTION_VIEW_STATS,
    STATUS_ACTIVE,
    AlreadyRevokedError,
    DuplicateAuthorityError,
    PermissionDeniedError,
    UnknownAuthorityError,
)
from .chain import verify_chain
from .crypto import sha256_hex, verify_signature
from .node import GateChainNode
from .registry import (
    STATUS_CLOSED,
    STATUS_OPEN,
    DataIntegrityError,
    DuplicateOpenEntryError,
    EntryForm,
    ExitForm,
    ExitWithoutOpenEntryError,
    FormValidationError,
)

CHALLENGE_TTL_S = 120.0
DEFAULT_SESSION_TTL_S = 8 * 3600.0  # one border shift


@dataclass
class Challenge:
    nonce: str
    public_key: str
    expires_at: float


@dataclass
class Session:
    token: str
    public_key: str
    expires_at: float


@dataclass
class AuthState:
    session_ttl_s: float = DEFAULT_SESSION_TTL_S
    challenges: dict[str, Challenge] = dc_field(default_factory=dict)
    sessions: dict[str, Session] = dc_field(default_factory=dict)

    def issue_challenge(self, public_key: str) -> tuple[str, str]:
        now = time.time()
        self.challenges = {
            cid: c for cid, c in self.challenges.items() if c.expires_at > now
        }
        challenge_id = secrets.token_hex(16)
        nonce = secrets.token_hex(32)
        self.challenges[challenge_id] = Challenge(
            nonce=nonce, public_key=public_key, expires_at=now + CHALLENGE_TTL_S
        )
        return challenge_id, nonce

    def consume_challenge(self, challenge_id: str, public_key: str) -> Optional[str]:
        """Return the nonce and delete it; None if stale, unknown, or wrong key."""
        challenge = self.challenges.pop(challenge_id, None)
        if challenge is None or challenge.expires_at <= time.time():
            return None
        if challenge.public_key != public_key:
            return None
        return challenge.nonce

    def open_session(self, public_key: str) -> Session:
        token = secrets.token_hex(32)
        session = Session(
            token=token,
            public_key=public_key,
            expires_at=time.time() + self.session_ttl_s,
        )
        self.sessions[token] = session
        return session

    def resolve(self, token: str) -> Optional[Session]:
        session = self.sessions.get(token)
        if session is None:
            return None
        if session.expires_at <= time.time():
            del self.sessions[token]
            return None
        return session


def login_digest(nonce: str) -> str:
    """The digest a client signs to answer a challenge: sha256 of the ASCII nonce."""
    return sha256_hex(nonce.encode("ascii"))


# -- request bodies ----------------------------------------------------------

class ChallengeRequest(BaseModel):
    public_key: str


class LoginRequest(BaseModel):
    public_key: str
    challenge_id: str
    signature: str


class EntryRequest(BaseModel):
    passport_number: str
    name_surname: str
    nationality: str
    birthdate: str
    passport_validity_date: str
    entry_gate: str
    entry_datetime: str
    plate: str = ""


class ExitRequest(BaseModel):
    passport_number: str
    exit_gate: str
    exit_datetime: str
    plate: str = ""


class AuthorityCreateRequest(BaseModel):
    public_key: str
    display_name: str
    role: str


def _check_day(value: Optional[str], name: str) -> Optional[str]:
    if value is None:
        return None
    try:
        datetime.strptime(value, "%Y-%m-%d")
    except ValueError:
        raise HTTPException(422, detail=f"{name} must be YYYY-MM-DD")
    return value


def create_app(
    node: GateChainNode, session_ttl_s: float = DEFAULT_SESSION_TTL_S
) -> FastAPI:
    app = FastAPI(title="GateChain", version="0.1.0", docs_url=None, redoc_url=None)
    auth = AuthState(session_ttl_s=session_ttl_s)
    # Single-writer contract: one block/registry mutation at a time.
    write_lock = threading.Lock()

    def current_session(authorization: Optional[str] = Header(None)) -> Session:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(401, detail="missing bearer token")
        session = auth.resolve(authorization[len("Bearer "):])
        if session is None:
            raise HTTPException(401, detail="unknown or expired session")
        return session

    def require(session: Session, action: str) -> None:
        if not node.authorities.check_permission(session.public_key, action):
            raise HTTPException(403, detail=f"role does not grant {action}")

    def operator_for(session: Session):
        try:
            return node.keypair_for(session.public_key)
        except Exception:
            raise HTTPException(
                403, detail="session identity has no hosted signing key on this node"
            )

    # -- login ---------------------------------------------------------------

    @app.post("/api/login/challenge")
    def post_challenge(body: ChallengeRequest):
        challenge_id, nonce = auth.issue_challenge(body.public_key)
        return {"challenge_id": challenge_id, "nonce": nonce}

    @app.post("/api/login")
    def post_login(body: LoginRequest):
        record = node.authorities.get(body.public_key)
        if record is None or record.status != STATUS_ACTIVE:
            raise HTTPException(401, detail="unknown or revoked key")
        nonce = auth.consume_challenge(body.challenge_id, body.public_key)
        if nonce is None:
            raise HTTPException(401, detail="stale or unknown challenge")
        if not verify_signature(body.public_key, login_digest(nonce), body.signature):
            raise HTTPException(401, detail="bad challenge signature")
        session = auth.open_session(body.public_key)
        return {
            "token": session.token,
            "public_key": record.public_key,
            "display_name": record.display_name,
            "role": record.role,
            "expires_at": session.expires_at,
        }

    # -- records ---------------------------------------------------------------

    def _trip_view(session: Session, passport_number: str, block_index: int, kind: str):
        records = node.registry.list_travel_records(
            session.public_key, passport_number=passport_number
        )
        for record in records:
            if kind == "entry" and record.entry_block_index == block_index:
                return record.to_dict()
            if kind == "exit" and record.exit_block_index == block_index:
                return record.to_dict()
        return None  # pragma: no cover - record was just written

    @app.post("/api/entries", status_code=201)
    def post_entry(body: EntryRequest, session: Session = Depends(current_session)):
        require(session, ACTION_REGISTER_ENTRY)
        operator = operator_for(session)
        form = EntryForm(
            passport_number=body.passport_number,
            name_surname=body.name_surname,
            nationality=body.nationality,
            birthdate=body.birthdate,
            passport_validity_date=body.passport_validity_date,
            entry_gate=body.entry_gate,
            entry_datetime=body.entry_datetime,
            plate=body.plate,
        )
        with write_lock:
            try:
                block = node.registry.register_entry(form, operator)
            except PermissionDeniedError as exc:
                raise HTTPException(403, detail=str(exc))
            except DuplicateOpenEntryError as exc:
                raise HTTPException(409, detail=str(exc))
            except FormValidationError as exc:
                raise HTTPException(422, detail=str(exc))
        return {
            "block_index": block.index,
            "record": _trip_view(session, body.passport_number, block.index, "entry"),
        }

    @app.post("/api/exits", status_code=201)
    def post_exit(body: ExitRequest, session: Session = Depends(current_session)):
        require(session, ACTION_REGISTER_EXIT)
        operator = operator_for(session)
        form = ExitForm(
            passport_number=body.passport_number,
            exit_gate=body.exit_gate,
            exit_datetime=body.exit_datetime,
            plate=body.plate,
        )
        with write_lock:
            try:
                block = node.registry.register_exit(form, operator)
            except PermissionDeniedError as exc:
                raise HTTPException(403, detail=str(exc))
            except ExitWithoutOpenEntryError as exc:
                raise HTTPException(404, detail=str(exc))
            except FormValidationError as exc:
                raise HTTPException(422, detail=str(exc))
        return {
            "block_index": block.index,
            "record": _trip_view(session, body.passport_number, block.index, "exit"),
        }

    @app.get("/api/records")
    def get_records(
        session: Session = Depends(current_session),
        passport: Optional[str] = None,
        nationality: Optional[str] = None,
        date_from: Optional[str] = Query(None, alias="from"),
        date_to: Optional[str] = Query(None, alias="to"),
        gate: Optional[str] = None,
        status: Optional[str] = None,
        limit: int = Query(100, ge=1, le=10000),
        offset: int = Query(0, ge=0),
    ):
        require(session, ACTION_LIST_RECORDS)
        _check_day(date_from, "from")
        _check_day(date_to, "to")
        if status is not None and status not in (STATUS_OPEN, STATUS_CLOSED):
            raise HTTPException(422, detail="status must be open or closed")
        try:
            records = node.registry.list_travel_records(
                session.public_key,
                passport_number=passport,
                nationality=nationality,
                date_from=date_from,
                date_to=date_to,
                gate=gate,
                status=status,
            )
        except DataIntegrityError as exc:
            raise HTTPException(500, detail=str(exc))
        page = records[offset : offset + limit]
        return {
            "records": [r.to_dict() for r in page],
            "total": len(records),
            "limit": limit,
            "offset": offset,
        }

    # -- verification and statistics ------------------------------------------

    @app.get("/api/chain/verify")
    def get_verify(session: Session = Depends(current_session)):
        require(session, ACTION_VERIFY_CHAIN)
        report = verify_chain(node.chain.blocks, node.authorities)
        return report.to_dict()

    @app.get("/api/stats")
    def get_stats(
        session: Session = Depends(current_session),
        date_from: Optional[str] = Query(None, alias="from"),
        date_to: Optional[str] = Query(None, alias="to"),
    ):
        require(session, ACTION_VIEW_STATS)
        _check_day(date_from, "from")
        _check_day(date_to, "to")
        try:
            report = node.registry.compute_statistics(
                session.public_key, date_from=date_from, date_to=date_to
            )
        except DataIntegrityError as exc:
            raise HTTPException(500, detail=str(exc))
        return report.to_dict()

    # -- authority management ---------------------------------------------------

    @app.get("/api/authorities")
    def get_authorities(session: Session = Depends(current_session)):
        require(session, ACTION_MANAGE_AUTHORITIES)
        return {"authorities": [r.to_dict() for r in node.authorities.list_records()]}

    @app.post("/api/authorities", status_code=201)
    def post_authority(
        body: AuthorityCreateRequest, session: Session = Depends(current_session)
    ):
        require(session, ACTION_MANAGE_AUTHORITIES)
        with write_lock:
            try:
                record = node.authorities.add_authority(
                    session.public_key, body.public_key, body.display_name, body.role
                )
            except PermissionDeniedError as exc:
                raise HTTPException(403, detail=str(exc))
            except DuplicateAuthorityError as exc:
                raise HTTPException(409, detail=str(exc))
            except ValueError as exc:
                raise HTTPException(422, detail=str(exc))
            node.save_keystore()
        return record.to_dict()

    @app.delete("/api/authorities/{public_key}")
    def delete_authority(
        public_key: str, session: Session = Depends(current_session)
    ):
        require(session, ACTION_MANAGE_AUTHORITIES)
        with write_lock:
            try:
                record = node.authorities.revoke_authority(
                    session.public_key, public_key
                )
            except PermissionDeniedError as exc:
                raise HTTPException(403, detail=str(exc))
            except UnknownAuthorityError as exc:
                raise HTTPException(404, detail=str(exc))
            except AlreadyRevokedError as exc:
                raise HTTPException(409, detail=str(exc))
            node.save_keystore()
        return record.to_dict()

    return app
