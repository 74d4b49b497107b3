"""Border-crossing domain logic on top of the chain.

Entries and exits are separate blocks; an exit never touches the entry
block it closes. The two are correlated only by decrypted passport number
when records are listed, so nothing on the ledger links them to outside
observers (exit blocks re-encrypt the identity fields under fresh nonces
rather than copying ciphertexts).

At most one open trip may exist per passport: a second entry without an
exit is rejected, and an exit without an open entry is rejected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

from .authorities import (
    ACTION_LIST_RECORDS,
    ACTION_REGISTER_ENTRY,
    ACTION_REGISTER_EXIT,
    ACTION_VIEW_STATS,
    AuthorityRegistry,
    PermissionDeniedError,
)
from .chain import (
    ENTRY_TYPE,
    EXIT_TYPE,
    Block,
    Chain,
    EntryExitTransaction,
    build_block,
)
from .crypto import (
    AuthorityKeyPair,
    FieldDecryptionError,
    decrypt_field,
    encrypt_field,
    now_timestamp,
)

logger = logging.getLogger(__name__)

STATUS_OPEN = "open"
STATUS_CLOSED = "closed"

DATE_FORMAT = "%Y-%m-%d"
DATETIME_FORMAT = "%Y-%m-%d %H:%M"


class RegistryError(Exception):
    """Base error for border-registry operations."""


class FormValidationError(RegistryError, ValueError):
    """Submitted form fields are missing or malformed."""


class ExpiredPassportError(FormValidationError):
    """Passport validity date precedes the entry date."""


class DuplicateOpenEntryError(RegistryError):
    """Person already has an open entry (is currently inside)."""


class ExitWithoutOpenEntryError(RegistryError):
    """No open entry exists for this passport."""


class DataIntegrityError(RegistryError):
    """A ledger field failed to decrypt during replay."""

    def __init__(self, block_index: int, detail: str):
        self.block_index = block_index
        super().__init__(f"block {block_index}: {detail}")


def _parse_date(value: str, name: str) -> datetime:
    try:
        return datetime.strptime(value, DATE_FORMAT)
    except (ValueError, TypeError) as exc:
        raise FormValidationError(f"{name} must be YYYY-MM-DD: {exc}") from exc


def _parse_datetime(value: str, name: str) -> datetime:
    try:
        return datetime.strptime(value, DATETIME_FORMAT)
    except (ValueError, TypeError) as exc:
        raise FormValidationError(f"{name} must be 'YYYY-MM-DD HH:MM': {exc}") from exc


@dataclass(frozen=True)
class EntryForm:
    passport_number: str
    name_surname: str
    nationality: str
    birthdate: str
    passport_validity_date: str
    entry_gate: str
    entry_datetime: str
    plate: str = ""

    def validate(self, check_expiry: bool = True) -> None:
        if not self.passport_number:
            raise FormValidationError("passport_number must not be empty")
        if not self.entry_gate:
            raise FormValidationError("entry_gate must not be empty")
        _parse_date(self.birthdate, "birthdate")
        validity = _parse_date(self.passport_validity_date, "passport_validity_date")
        entry = _parse_datetime(self.entry_datetime, "entry_datetime")
        if check_expiry and validity.date() < entry.date():
            raise ExpiredPassportError(
                f"passport expired {self.passport_validity_date}, "
                f"entry on {self.entry_datetime[:10]}"
            )


@dataclass(frozen=True)
class ExitForm:
    passport_number: str
    exit_gate: str
    exit_datetime: str
    plate: str = ""

    def validate(self) -> None:
        if not self.passport_number:
            raise FormValidationError("passport_number must not be empty")
        if not self.exit_gate:
            raise FormValidationError("exit_gate must not be empty")
        _parse_datetime(self.exit_datetime, "exit_datetime")


@dataclass(frozen=True)
class TravelRecordView:
    """One logical trip: an entry block merged with its matching exit block."""

    passport_number: str
    name_surname: str
    nationality: str
    birthdate: str
    entry_date: str
    entry_gate: str
    exit_date: str
    exit_gate: str
    plate: str
    entry_block_index: int
    exit_block_index: Optional[int]
    status: str

    def to_dict(self) -> dict:
        return {
            "passport_number": self.passport_number,
            "name_surname": self.name_surname,
            "nationality": self.nationality,
            "birthdate": self.birthdate,
            "entry_date": self.entry_date,
            "entry_gate": self.entry_gate,
            "exit_date": self.exit_date,
            "exit_gate": self.exit_gate,
            "plate": self.plate,
            "entry_block_index": self.entry_block_index,
            "exit_block_index": self.exit_block_index,
            "status": self.status,
        }


@dataclass
class EventTally:
    entries: int = 0
    exits: int = 0

    def to_dict(self) -> dict:
        return {"entries": self.entries, "exits": self.exits}


@dataclass
class StatsReport:
    total_entries: int
    total_exits: int
    currently_inside: int
    per_gate: dict[str, EventTally] = field(default_factory=dict)
    per_nationality: dict[str, int] = field(default_factory=dict)
    per_day: dict[str, EventTally] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_entries": self.total_entries,
            "total_exits": self.total_exits,
            "currently_inside": self.currently_inside,
            "per_gate": {g: t.to_dict() for g, t in self.per_gate.items()},
            "per_nationality": dict(self.per_nationality),
            "per_day": {d: t.to_dict() for d, t in self.per_day.items()},
        }


def _event_day(event_datetime: str) -> str:
    return event_datetime[:10]


def _day_in_range(day: str, date_from: Optional[str], date_to: Optional[str]) -> bool:
    if date_from is not None and day < date_from:
        return False
    if date_to is not None and day > date_to:
        return False
    return True


class BorderRegistry:
    """Records crossings as blocks and merges them into travel records."""

    def __init__(
        self,
        chain: Chain,
        authorities: AuthorityRegistry,
        data_key: bytes,
        chain_store=None,
        reject_expired_passports: bool = True,
    ):
        self.chain = chain
        self.authorities = authorities
        self.data_key = data_key
        self.chain_store = chain_store
        self.reject_expired_passports = reject_expired_passports
        # passport (plaintext) -> entry block index of the single open trip
        self._open_trips: dict[str, int] = {}
        self._rebuild_open_trips()

    def _rebuild_open_trips(self) -> None:
        # Lenient on decryption failures: a tampered block must not brick
        # node startup — verify_chain is where tampering gets reported.
        self._open_trips.clear()
        for block in self.chain:
            for tx in block.transactions:
                try:
                    passport = decrypt_field(self.data_key, tx.PassportNumber)
                except FieldDecryptionError:
                    logger.warning(
                        "block %d: passport field failed to decrypt; "
                        "skipped during open-trip replay", block.index,
                    )
                    continue
                if block.nonce == ENTRY_TYPE:
                    self._open_trips[passport] = block.index
                elif block.nonce == EXIT_TYPE:
                    self._open_trips.pop(passport, None)

    def _decrypt(self, block_index: int, cipher: str) -> str:
        try:
            return decrypt_field(self.data_key, cipher)
        except FieldDecryptionError as exc:
            raise DataIntegrityError(block_index, str(exc)) from exc

    def _require(self, public_key: str, action: str) -> None:
        if not self.authorities.check_permission(public_key, action):
            raise PermissionDeniedError(public_key, action)

    def _append(self, block: Block) -> Block:
        self.chain.append(block)
        if self.chain_store is not None:
            self.chain_store.append_block(block)
        return block

    # -- recording ----------------------------------------------------------

    def register_entry(
        self, form: EntryForm, operator: AuthorityKeyPair, at: Optional[float] = None
    ) -> Block:
        """Record an entry as a new signed block; returns the accepted block."""
        self._require(operator.public_key, ACTION_REGISTER_ENTRY)
        form.validate(check_expiry=self.reject_expired_passports)
        if form.passport_number in self._open_trips:
            raise DuplicateOpenEntryError(
                f"open entry already exists (block "
                f"{self._open_trips[form.passport_number]})"
            )
        tx = EntryExitTransaction(
            PassportNumber=encrypt_field(self.data_key, form.passport_number),
            NameSurname=encrypt_field(self.data_key, form.name_surname),
            Nationality=encrypt_field(self.data_key, form.nationality),
            Birthdate=form.birthdate,
            PassportValidityDate=form.passport_validity_date,
            EntryDate=form.entry_datetime,
            EntryGate=form.entry_gate,
            ExitDate="",
            ExitGate="",
            Plate=form.plate,
        )
        block = build_block(
            self.chain.tip, ENTRY_TYPE, tx, operator, timestamp=self._clock(at)
        )
        self._append(block)
        self._open_trips[form.passport_number] = block.index
        return block

    def register_exit(
        self, form: ExitForm, operator: AuthorityKeyPair, at: Optional[float] = None
    ) -> Block:
        """Record an exit as a new block; the matched entry block is untouched."""
        self._require(operator.public_key, ACTION_REGISTER_EXIT)
        form.validate()
        entry_index = self._open_trips.get(form.passport_number)
        if entry_index is None:
            raise ExitWithoutOpenEntryError(
                f"no open entry for passport {form.passport_number!r}"
            )
        entry_tx = self.chain[entry_index].transactions[0]
        # Re-encrypt identity fields under fresh nonces: ciphertext equality
        # must not link the exit block to its entry block.
        name = self._decrypt(entry_index, entry_tx.NameSurname)
        nationality = self._decrypt(entry_index, entry_tx.Nationality)
        tx = EntryExitTransaction(
            PassportNumber=encrypt_field(self.data_key, form.passport_number),
            NameSurname=encrypt_field(self.data_key, name),
            Nationality=encrypt_field(self.data_key, nationality),
            Birthdate=entry_tx.Birthdate,
            PassportValidityDate=entry_tx.PassportValidityDate,
            EntryDate="",
            EntryGate="",
            ExitDate=form.exit_datetime,
            ExitGate=form.exit_gate,
            Plate=form.plate,
        )
        block = build_block(
            self.chain.tip, EXIT_TYPE, tx, operator, timestamp=self._clock(at)
        )
        self._append(block)
        del self._open_trips[form.passport_number]
        return block

    def _clock(self, at: Optional[float]) -> float:
        # Default clock never regresses below the tip; an explicit ``at``
        # is passed through so callers that inject time see real errors.
        if at is not None:
            return at
        return max(now_timestamp(), self.chain.tip.timestamp)

    # -- merging and reporting ----------------------------------------------

    def _merge_all(self) -> list[TravelRecordView]:
        trips: list[dict] = []
        open_by_passport: dict[str, dict] = {}
        for block in self.chain:
            for tx in block.transactions:
                passport = self._decrypt(block.index, tx.PassportNumber)
                if block.nonce == ENTRY_TYPE:
                    trip = {
                        "passport_number": passport,
                        "name_surname": self._decrypt(block.index, tx.NameSurname),
                        "nationality": self._decrypt(block.index, tx.Nationality),
                        "birthdate": tx.Birthdate,
                        "entry_date": tx.EntryDate,
                        "entry_gate": tx.EntryGate,
                        "exit_date": "",
                        "exit_gate": "",
                        "plate": tx.Plate,
                        "entry_block_index": block.index,
                        "exit_block_index": None,
                        "status": STATUS_OPEN,
                    }
                    trips.append(trip)
                    open_by_passport[passport] = trip
                elif block.nonce == EXIT_TYPE:
                    trip = open_by_passport.pop(passport, None)
                    if trip is None:
                        continue  # unreachable on chains this module produced
                    trip["exit_date"] = tx.ExitDate
                    trip["exit_gate"] = tx.ExitGate
                    trip["exit_block_index"] = block.index
                    trip["status"] = STATUS_CLOSED
                    if not trip["plate"] and tx.Plate:
                        trip["plate"] = tx.Plate
        return [TravelRecordView(**t) for t in trips]

    def list_travel_records(
        self,
        caller_public_key: str,
        passport_number: Optional[str] = None,
        nationality: Optional[str] = None,
        date_from: Optional[str] = None,
        date_to: Optional[str] = None,
        gate: Optional[str] = None,
        status: Optional[str] = None,
    ) -> list[TravelRecordView]:
        """Merged travel records in entry-block order, optionally filtered.

        The date range (YYYY-MM-DD, inclusive) matches a trip if its entry
        or its exit day falls inside.
        """
        self._require(caller_public_key, ACTION_LIST_RECORDS)
        records = self._merge_all()
        result = []
        for record in records:
            if passport_number is not None and record.passport_number != passport_number:
                continue
            if nationality is not None and record.nationality != nationality:
                continue
            if gate is not None and gate not in (record.entry_gate, record.exit_gate):
                continue
            if status is not None and record.status != status:
                continue
            if date_from is not None or date_to is not None:
                entry_ok = _day_in_range(
                    _event_day(record.entry_date), date_from, date_to
                )
                exit_ok = bool(record.exit_date) and _day_in_range(
                    _event_day(record.exit_date), date_from, date_to
                )
                if not entry_ok and not exit_ok:
                    continue
            result.append(record)
        return result

    def compute_statistics(
        self,
        caller_public_key: str,
        date_from: Optional[str] = None,
        date_to: Optional[str] = None,
    ) -> StatsReport:
        """Counts over merged travel records.

        The date range narrows entry/exit event counts; currently_inside is
        always the present number of open trips on the whole chain.
        """
        self._require(caller_public_key, ACTION_VIEW_STATS)
        records = self._merge_all()
        report = StatsReport(
            total_entries=0,
            total_exits=0,
            currently_inside=sum(1 for r in records if r.status == STATUS_OPEN),
        )
        for record in records:
            entry_day = _event_day(record.entry_date)
            if _day_in_range(entry_day, date_from, date_to):
                report.total_entries += 1
                report.per_gate.setdefault(record.entry_gate, EventTally()).entries += 1
                report.per_day.setdefault(entry_day, EventTally()).entries += 1
                report.per_nationality[record.nationality] = (
                    report.per_nationality.get(record.nationality, 0) + 1
                )
            if record.exit_date:
                exit_day = _event_day(record.exit_date)
                if _day_in_range(exit_day, date_from, date_to):
                    report.total_exits += 1
                    report.per_gate.setdefault(record.exit_gate, EventTally()).exits += 1
                    report.per_day.setdefault(exit_day, EventTally()).exits += 1
        return report

    # -- introspection -------------------------------------------------------

    def open_trip_count(self) -> int:
        return len(self._open_trips)

    def has_open_trip(self, passport_number: str) -> bool:
        return passport_number in self._open_trips
